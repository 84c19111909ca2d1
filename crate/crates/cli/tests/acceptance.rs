//! Acceptance suite: fifteen criteria at their stated tolerances, one line each.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use beckner::constants::{
    beckner_lower_bound, depol_classical, estimate_constant, mixing, mixing_bound, moment_concentration_check,
    two_point_constant, ConstantKind, EstimateOptions, MixingMode,
};
use beckner::dirichlet::dirichlet_form;
use beckner::entropy::{chi2_divergence, k_p, p_divergence, power_operator, relative_entropy, trace_norm, RelEntKind};
use beckner::operator_core::{diag, frob, identity, paulis, re, traceless_herm, CMat, Scalar};
use beckner::ricci::{
    dynamic_checks, hessian_form, inequality_checks, ricci_estimate, Dynamic, DynamicOptions, Inequality, RicciOptions,
};
use beckner::sampling;
use beckner::semigroup::{alicki_decompose, build_from_jumps, depolarizing, generator_distance, random_dbc};
use beckner::state::Reference;
use beckner::transport::{
    flat_w22, geodesic_shoot, GeodesicState, grad_flow_residual, log_mean_kernel_apply, trace_distance_constant, w2p_solve, Direction,
    KernelChoice, MetricKernel, ShootOptions, TransportOptions,
};
use beckner::{DbcLindbladian, JumpTerm, Result};
use beckner_cli::fixtures::{fixture, FIXTURE_NAMES};
use beckner_cli::{run, Task};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// Weyl sequence frac(k·α); deterministic uniform samples without an RNG dependency.
fn weyl(k: usize, alpha: f64) -> f64 {
    (k as f64 * alpha).fract()
}

const A1: f64 = 0.618_033_988_749_894_8;
const A2: f64 = 0.414_213_562_373_095_1;
const A3: f64 = 0.732_050_807_568_877_2;

fn half() -> CMat {
    identity(2) * re(0.5)
}

fn maximally_mixed(d: usize) -> CMat {
    identity(d) * re(1.0 / d as f64)
}

/// Depolarizing at I/2 with rate γ written through the three Pauli jumps.
fn pauli_depol(gamma: f64) -> Result<DbcLindbladian> {
    let c = (gamma / 8.0).sqrt();
    let jumps: Vec<JumpTerm> = paulis().iter().map(|s| JumpTerm { v: s * re(c), omega: 0.0 }).collect();
    build_from_jumps(&half(), &jumps)
}

fn random_model(seed: u64, d: usize) -> Result<(DbcLindbladian, sampling::SeededRng)> {
    let mut r = sampling::rng(seed);
    let s = sampling::reference_state(d, 0.3, &mut r);
    Ok((random_dbc(&s, d, 1, seed)?, r))
}

fn estimate(l: &DbcLindbladian, kind: ConstantKind) -> Result<f64> {
    Ok(estimate_constant(l, kind, &EstimateOptions::default())?.value)
}

fn structure_round_trip() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in [2, 3, 4] {
        let mut r = sampling::rng(100 + d as u64);
        let mut models = vec![depolarizing(&sampling::reference_state(d, 0.2, &mut r), 0.8)?, depolarizing(&maximally_mixed(d), 1.0)?];
        for seed in 0..10 {
            let s = sampling::reference_state(d, 0.2, &mut r);
            models.push(random_dbc(&s, d, 1 + seed as usize % 2, seed)?);
        }
        for l in models {
            let rebuilt = build_from_jumps(l.sigma(), &alicki_decompose(&l.generator, l.sigma())?)?;
            worst = worst.max(generator_distance(&l.generator, &rebuilt.generator));
            count += 1;
        }
    }
    outcome(worst <= 1e-8, format!("{count} generators, max relative residual {worst:.2e}"))
}

fn spectral_anchors() -> Result<Outcome> {
    let mut r = sampling::rng(2);
    let sigmas = [half(), diag(&[0.75, 0.25]), sampling::reference_state(3, 0.2, &mut r), maximally_mixed(4)];
    let (mut gap_err, mut alpha_err) = (0.0f64, 0.0f64);
    for s in &sigmas {
        for gamma in [0.5, 1.0, 2.3] {
            let l = depolarizing(s, gamma)?;
            gap_err = gap_err.max((l.gap()? - gamma).abs());
            let e = estimate_constant(&l, ConstantKind::Beckner(2.0), &EstimateOptions::default())?;
            // the optimizer output itself, not the value clipped at the cap
            alpha_err = alpha_err.max((e.raw - gamma).abs());
        }
    }
    outcome(gap_err <= 1e-10 && alpha_err <= 1e-6, format!("max |λ−γ| {gap_err:.1e}, max |α̂₂−γ| {alpha_err:.1e}"))
}

fn classical_cross_oracle() -> Result<Outcome> {
    let l = depolarizing(&half(), 1.0)?;
    let mut worst = 0.0f64;
    for p in [1.1, 1.25, 1.5, 1.75] {
        let want = depol_classical(p, 2);
        worst = worst.max((estimate(&l, ConstantKind::Beckner(p))? - want).abs() / want);
    }
    let exact = depol_classical(2.0, 2) == 1.0;
    outcome(worst <= 1e-3 && exact, format!("max relative gap {worst:.2e}; classical at p=2 exactly 1: {exact}"))
}

fn two_sided_bound() -> Result<Outcome> {
    let grid = [1.05, 1.1, 1.25, 1.5, 1.75, 2.0];
    let embed = fixture("classical_embed").expect("fixture").build()?;
    // each model paired with its exact α_p
    type Exact = fn(f64) -> f64;
    let cases: [(DbcLindbladian, Exact); 3] = [
        (depolarizing(&half(), 1.0)?, |p| depol_classical(p, 2)),
        (fixture("depol3").expect("fixture").build()?, |p| depol_classical(p, 3)),
        (embed, |p| two_point_constant(p, 0.5)),
    ];
    let mut worst = f64::INFINITY;
    for (l, alpha) in &cases {
        let lambda = l.gap()?;
        let smin = l.reference.min_eig();
        for &p in &grid {
            let a = alpha(p);
            let lower = p * p * smin.powf(2.0 - p) * lambda / 4.0;
            for slack in [a - lower, a - lambda * (p - 1.0), a - beckner_lower_bound(lambda, smin, p), p * lambda / 2.0 - a] {
                worst = worst.min(slack);
            }
        }
    }
    outcome(worst >= -1e-6, format!("{} models × {} exponents, min slack {worst:.2e}", cases.len(), grid.len()))
}

fn stroock_varopoulos() -> Result<Outcome> {
    let mut worst = f64::INFINITY;
    for k in 0..200 {
        let d = 2 + k % 2;
        let (l, mut r) = random_model(1000 + k as u64, d)?;
        let s = l.sigma().clone();
        let x = sampling::psd(d, &mut r) + identity(d) * re(0.05);
        let p = 0.5 + 1.5 * weyl(k + 1, A1);
        let q = p + (2.0 - p) * weyl(k + 1, A2);
        let lp = dirichlet_form(&l, &power_operator(&x, &s, p, 2.0)?, p)?.value;
        let lq = dirichlet_form(&l, &power_operator(&x, &s, q, 2.0)?, q)?.value;
        worst = worst.min(lp - lq);
        let pr = 1.0 + 0.99 * weyl(k + 1, A3) + 0.01;
        let e2 = dirichlet_form(&l, &power_operator(&x, &s, 2.0, pr)?, 2.0)?.value;
        let ep = dirichlet_form(&l, &x, pr)?.value;
        worst = worst.min(ep - e2).min(pr * pr / (4.0 * (pr - 1.0)) * e2 - ep);
    }
    outcome(worst >= -1e-9, format!("200 instances, min slack {worst:.2e}"))
}

fn sandwich() -> Result<Outcome> {
    let mut r = sampling::rng(6);
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let d = 2 + k % 2;
        let s = sampling::reference_state(d, 0.2, &mut r);
        let rho = sampling::full_rank_density(d, 0.1, &mut r);
        let p = 1.05 + 0.95 * weyl(k + 1, A1);
        let c = relative_entropy(&rho, &s, RelEntKind::Max)?.value.exp();
        let chi = chi2_divergence(&rho, &s, &Scalar::Kappa(1.0 / p))?.value;
        let f = p_divergence(&rho, &s, p)?.value;
        worst = worst.min(f - k_p(p, c) * chi).min(chi / p - f);
    }
    outcome(worst >= -1e-9, format!("100 instances, min slack {worst:.2e}"))
}

fn gradient_flow() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in 0..50 {
        let d = 2 + k % 2;
        let (l, mut r) = random_model(2000 + k as u64, d)?;
        let rho = sampling::full_rank_density(d, 0.1, &mut r);
        let p = 1.0 + weyl(k + 1, A2).max(0.01);
        worst = worst.max(grad_flow_residual(&l, &rho, p)?);
    }
    outcome(worst <= 1e-8, format!("50 triples, max residual {worst:.2e}"))
}

fn pair_models() -> Result<Vec<(DbcLindbladian, CMat, CMat)>> {
    let mut out = Vec::new();
    let l = pauli_depol(1.0)?;
    let mut r = sampling::rng(8);
    for _ in 0..4 {
        out.push((l.clone(), sampling::full_rank_density(2, 0.1, &mut r), sampling::full_rank_density(2, 0.1, &mut r)));
    }
    for (k, d) in [(0u64, 2usize), (1, 2), (2, 3), (3, 3)] {
        let (l, mut r) = random_model(3000 + k, d)?;
        out.push((l, sampling::full_rank_density(d, 0.1, &mut r), sampling::full_rank_density(d, 0.1, &mut r)));
    }
    let depol3 = fixture("depol3").expect("fixture").build()?;
    let mut r = sampling::rng(9);
    for _ in 0..2 {
        out.push((depol3.clone(), sampling::full_rank_density(3, 0.1, &mut r), sampling::full_rank_density(3, 0.1, &mut r)));
    }
    Ok(out)
}

fn flat_anchor() -> Result<Outcome> {
    let opts = TransportOptions { n: 20, ..Default::default() };
    let mut worst = 0.0f64;
    let pairs = pair_models()?;
    for (l, r0, r1) in &pairs {
        let (w, _) = w2p_solve(l, r0, r1, 2.0, &opts)?;
        let f = flat_w22(l, r0, r1)?;
        worst = worst.max((w - f).abs() / f);
    }
    let (w, _) = w2p_solve(&pauli_depol(1.0)?, &diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 2.0, &opts)?;
    outcome(
        worst <= 0.01 && (w - 2.0).abs() <= 0.02,
        format!("{} pairs, max relative deviation {worst:.2e}; antipodal W = {w:.5}", pairs.len()),
    )
}

fn geodesic_property() -> Result<Outcome> {
    let opts = TransportOptions { n: 20, ..Default::default() };
    let (mut spread, mut td_slack, mut solved) = (0.0f64, f64::INFINITY, 0);
    for (l, r0, r1) in pair_models()? {
        for p in [1.25, 1.5, 2.0] {
            let (w, path) = w2p_solve(&l, &r0, &r1, p, &opts)?;
            let mean = path.action / path.n as f64;
            spread = spread.max(path.step_actions.iter().map(|a| (a - mean).abs() / mean).fold(0.0, f64::max));
            let c = trace_distance_constant(&l, p)?;
            td_slack = td_slack.min(c * w - trace_norm(&(&r1 - &r0)));
            solved += 1;
        }
    }
    outcome(
        spread <= 0.02 && td_slack >= 0.0,
        format!("{solved} paths, max action spread {:.2}%, min trace-distance slack {td_slack:.2e}", 100.0 * spread),
    )
}

fn shot_second_difference(l: &DbcLindbladian, rho: &CMat, u: &CMat, p: f64, h: f64) -> Result<f64> {
    let o = ShootOptions { steps: 8, ..Default::default() };
    let f = |x: &CMat| p_divergence(x, l.sigma(), p).map(|v| v.value);
    let fwd = geodesic_shoot(l, rho, u, p, h, &o)?;
    let back = geodesic_shoot(l, rho, &(-u), p, h, &o)?;
    let end = |path: &[GeodesicState]| path.last().expect("nonempty path").rho.clone();
    Ok((f(&end(&fwd))? - 2.0 * f(rho)? + f(&end(&back))?) / (h * h))
}

fn curvature_anchor() -> Result<Outcome> {
    let mut worst_kappa = f64::INFINITY;
    for (s, gamma) in [(half(), 1.0), (diag(&[0.75, 0.25]), 0.7), (maximally_mixed(3), 1.0)] {
        let l = depolarizing(&s, gamma)?;
        for p in [1.25, 1.5, 2.0] {
            let est = ricci_estimate(&l, p, &RicciOptions { num_states: 16, seed: 1, ..Default::default() })?;
            worst_kappa = worst_kappa.min(est.kappa - gamma * p / 2.0);
        }
    }
    let mut worst_fd = 0.0f64;
    for (k, d) in [(0u64, 2usize), (1, 3)] {
        let (l, mut r) = random_model(4000 + k, d)?;
        let depol = depolarizing(l.sigma(), 1.0)?;
        for model in [&l, &depol] {
            let rho = sampling::full_rank_density(d, 0.2, &mut r);
            for p in [1.25, 1.5, 2.0] {
                let u = traceless_herm(&sampling::hermitian(d, &mut r));
                let exact = hessian_form(model, &rho, p, &u, KernelChoice::Symmetrized)?;
                let fd = shot_second_difference(model, &rho, &u, p, 1e-3)?;
                worst_fd = worst_fd.max((exact - fd).abs() / exact.abs().max(1e-3));
            }
        }
    }
    outcome(
        worst_kappa >= -1e-6 && worst_fd <= 1e-3,
        format!("min κ̂ − γp/2 = {worst_kappa:.2e}; max Hessian vs second difference {worst_fd:.2e}"),
    )
}

fn curvature_chain() -> Result<Outcome> {
    let l = pauli_depol(1.0)?;
    let topts = TransportOptions { n: 20, ..Default::default() };
    let mut r = sampling::rng(11);
    let states: Vec<CMat> = (0..3).map(|_| sampling::full_rank_density(2, 0.2, &mut r)).collect();
    let all = [Inequality::Hwi, Inequality::BecknerFromRicci, Inequality::Tcp, Inequality::Diameter];
    let dopts = DynamicOptions { transport: topts, seed: 5, ..Default::default() };
    let (mut failed, mut total, mut worst_rel, mut tight) = (Vec::new(), 0, f64::INFINITY, 0.0f64);
    for p in [1.25, 1.5, 2.0] {
        let kappa = p / 2.0;
        let mut entries = inequality_checks(&l, p, kappa, &states, &all, &topts)?;
        let contraction = dynamic_checks(&l, p, kappa, Dynamic::Contraction, &states, &dopts)?;
        if p == 2.0 {
            tight = contraction.iter().map(|e| (e.lhs - e.rhs).abs() / e.rhs).fold(tight, f64::max);
        }
        entries.extend(contraction);
        entries.extend(dynamic_checks(&l, p, kappa, Dynamic::GradientEstimate, &states, &dopts)?);
        for e in entries {
            total += 1;
            if e.rhs.abs() > 1e-12 {
                worst_rel = worst_rel.min(e.slack / e.rhs.abs());
            }
            if !e.pass {
                failed.push(format!("p={p} {}", e.name));
            }
        }
    }
    outcome(
        failed.is_empty() && worst_rel >= -0.02 && tight <= 0.01,
        format!("{total} checks, min relative slack {:.2}%, contraction tightness at p=2 {:.2}%, failures {failed:?}", 100.0 * worst_rel, 100.0 * tight),
    )
}

fn mixing_bounds() -> Result<Outcome> {
    let grid = [1.05, 1.1, 1.25, 1.5, 1.75, 2.0];
    let mut worst = f64::INFINITY;
    for name in ["depol2", "depol3"] {
        let l = fixture(name).expect("fixture").build()?;
        let (lambda, smin) = (l.gap()?, l.reference.min_eig());
        let pairs: Vec<(f64, f64)> = grid.iter().map(|&p| (p, beckner_lower_bound(lambda, smin, p))).collect();
        for eps in [0.1, 0.01] {
            let emp = mixing(&l, eps, &MixingMode::Empirical { seed: 7 })?;
            let bound = mixing(&l, eps, &MixingMode::BoundInf(pairs.clone()))?;
            worst = worst.min(bound - emp);
        }
    }
    let h = mixing_bound(2.0, 1.0, 0.25, 0.01);
    let anchor = (h - (100.0 * 3f64.sqrt()).ln()).abs();
    outcome(worst >= 0.0 && anchor <= 1e-10, format!("min bound − t₁ {worst:.3}; |h(2,1/4,0.01) − log(100√3)| {anchor:.1e}"))
}

fn moments() -> Result<Outcome> {
    let mut models = vec![depolarizing(&half(), 1.0)?, depolarizing(&maximally_mixed(3), 1.0)?];
    for d in [2, 3] {
        models.push(random_dbc(&maximally_mixed(d), d, 1, 50 + d as u64)?);
    }
    let mut worst = f64::INFINITY;
    let mut r = sampling::rng(13);
    let mut count = 0;
    for (k, l) in models.iter().enumerate() {
        let d = l.dim();
        let lambda = l.gap()?;
        let a = (1..=100).map(|j| 1.0 + j as f64 / 100.0).map(|p| beckner_lower_bound(lambda, 1.0 / d as f64, p)).fold(f64::INFINITY, f64::min);
        let n = if k < 2 { 13 } else { 12 };
        for _ in 0..n {
            let x = sampling::hermitian(d, &mut r);
            for rr in [2.0, 3.0, 4.0, 6.0] {
                for t in [0.25, 1.0, 2.0] {
                    let rep = moment_concentration_check(l, &x, rr, a, 0.0, t)?;
                    worst = rep.slacks().into_iter().fold(worst, f64::min);
                }
            }
            count += 1;
        }
    }
    outcome(worst >= -1e-8, format!("{count} operators × r ∈ {{2,3,4,6}}, min slack {worst:.2e}"))
}

fn limit_consistency() -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for name in ["depol2", "depol3"] {
        let l = fixture(name).expect("fixture").build()?;
        let mlsi = estimate(&l, ConstantKind::Mlsi)?;
        for p in [1.05, 1.02, 1.01] {
            let a = estimate(&l, ConstantKind::Beckner(p))?;
            let rel = (a - mlsi).abs() / mlsi;
            worst = worst.max(rel);
            rows.push(format!("{name} p={p}: {:.2}%", 100.0 * rel));
        }
    }
    let mut r = sampling::rng(14);
    let mut kernel = 0.0f64;
    for d in [2, 3] {
        let s = sampling::reference_state(d, 0.3, &mut r);
        let reference = Reference::new(&s)?;
        for omega in [-0.7, 0.0, 0.5] {
            let rho = sampling::full_rank_density(d, 0.2, &mut r);
            let a = sampling::ginibre(d, &mut r);
            let oracle = log_mean_kernel_apply(&rho, omega, &a)?;
            let k = MetricKernel::new(&reference, &rho, 1.001, omega)?;
            kernel = kernel.max(frob(&(k.apply(&a, Direction::Forward) - &oracle)) / frob(&oracle));
        }
    }
    outcome(
        worst <= 5e-2 && kernel <= 1e-2,
        format!("max |α̂_p − α̂₁|/α̂₁ {:.2}% [{}]; kernel at p=1.001 vs log-mean {kernel:.2e}", 100.0 * worst, rows.join(", ")),
    )
}

fn determinism() -> Result<Outcome> {
    let all = vec![Task::Constants, Task::Decay, Task::Mixing, Task::Transport, Task::Ricci, Task::Verify];
    let mut differing = Vec::new();
    for name in FIXTURE_NAMES {
        let mut cfg = fixture(name).expect("fixture");
        cfg.tasks = all.clone();
        let cfg = cfg.materialize().expect("valid fixture");
        if run(&cfg).to_json_without_timings() != run(&cfg).to_json_without_timings() {
            differing.push(name);
        }
    }
    outcome(differing.is_empty(), format!("{} fixtures, full task list, reports differing: {differing:?}", FIXTURE_NAMES.len()))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 15] = [
        ("structure round-trip", structure_round_trip),
        ("depolarizing spectral anchors", spectral_anchors),
        ("classical cross-oracle", classical_cross_oracle),
        ("two-sided Beckner bound", two_sided_bound),
        ("Stroock–Varopoulos and L_p regularity", stroock_varopoulos),
        ("chi-square sandwich", sandwich),
        ("gradient-flow identity", gradient_flow),
        ("flat-metric anchor", flat_anchor),
        ("geodesic property and trace-distance bound", geodesic_property),
        ("curvature anchor and Hessian", curvature_anchor),
        ("curvature inequality chain", curvature_chain),
        ("mixing-time bound", mixing_bounds),
        ("moments and concentration", moments),
        ("limit consistency", limit_consistency),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|s| s == &n.to_string() || name.contains(s.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f));
        let secs = t0.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failures += 1;
        }
        println!("criterion {n:>2} {}  {name}: {detail} ({secs:.1}s)", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {failures} failing criteria");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
