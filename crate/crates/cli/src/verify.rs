//! Invariant suite run against the configured model.

use beckner::constants::{beckner_lower_bound, estimate_constant, ConstantKind, EstimateOptions};
use beckner::dirichlet::{dirichlet_form, representation_check};
use beckner::entropy::{chi2_divergence, k_p, p_divergence, power_operator, relative_entropy, RelEntKind};
use beckner::operator_core::{eigh, frob, identity, inner_product, re, traceless_herm, CMat, InnerKind, Scalar};
use beckner::ricci::hessian_form;
use beckner::sampling::{self, SeededRng};
use beckner::semigroup::{alicki_decompose, build_from_jumps, choi, generator_distance, min_eig, Picture};
use beckner::transport::{grad_flow_residual, KernelChoice, MetricKernel, Direction};
use serde_json::json;

use crate::report::Check;
use crate::tasks::{Context, TaskOutput};

const TASK: &str = "verify";

struct Suite<'c, 'a> {
    ctx: &'c Context<'a>,
    rng: SeededRng,
    checks: Vec<Check>,
}

impl Suite<'_, '_> {
    fn le(&mut self, name: impl Into<String>, property: &str, lhs: f64, rhs: f64, allowance: f64) {
        self.checks.push(Check::le(TASK, name, property, lhs, rhs, allowance));
    }

    fn psd(&mut self) -> CMat {
        let d = self.ctx.l.dim();
        sampling::psd(d, &mut self.rng) + identity(d) * re(0.05)
    }

    fn density(&mut self) -> CMat {
        sampling::full_rank_density(self.ctx.l.dim(), 0.2, &mut self.rng)
    }

    fn hermitian(&mut self) -> CMat {
        sampling::hermitian(self.ctx.l.dim(), &mut self.rng)
    }
}

/// Runs every invariant; a failing row names the property it asserts.
pub fn verify_task(ctx: &Context) -> beckner::Result<TaskOutput> {
    let mut s = Suite { ctx, rng: sampling::substream(ctx.cfg.seeds.states, 900), checks: Vec::new() };
    let l = &ctx.l;
    let sigma = l.sigma().clone();

    let h = s.hermitian();
    let e = eigh(&h)?;
    s.le("eigh_reconstruction", "spectral resynthesis", frob(&(e.map(|v| v) - &h)) / frob(&h), 0.0, 1e-10);

    let rebuilt = build_from_jumps(&sigma, &alicki_decompose(&l.generator, &sigma)?)?;
    s.le("jump_round_trip", "generator recovered from its jump decomposition", generator_distance(&l.generator, &rebuilt.generator), 0.0, 1e-8);

    let (x, y) = (s.hermitian(), s.hermitian());
    let kms = |a: &CMat, b: &CMat| inner_product(InnerKind::Kms(&sigma), a, b).map(|z| z.re);
    let asym = (kms(&x, &l.apply(&y))? - kms(&l.apply(&x), &y)?).abs();
    s.le("kms_symmetry", "self-adjointness in the KMS inner product", asym, 0.0, 1e-9 * (1.0 + frob(&x) * frob(&y)));

    for t in [0.1, 1.0] {
        let dual = beckner::operator_core::Superop::new(l.dim(), l.semigroup(t).matrix.adjoint());
        s.le(format!("complete_positivity[t={t}]"), "complete positivity of the dual semigroup", 0.0, min_eig(&choi(&dual)), 1e-8);
    }

    let x = s.psd();
    for p in [1.5, 2.0] {
        s.le(format!("dirichlet_representation[p={p}]"), "divided-difference representation of the p-Dirichlet form", representation_check(l, &x, p)?, 0.0, 1e-8);
    }

    for p in [0.6, 1.25, 1.5, 2.0] {
        let x = s.psd();
        s.le(format!("dirichlet_nonnegative[p={p}]"), "nonnegativity of the p-Dirichlet form", 0.0, dirichlet_form(l, &x, p)?.value, 1e-12);
    }

    let x = s.psd();
    let grid = [0.6, 1.0, 1.3, 1.7, 2.0];
    for (a, &p) in grid.iter().enumerate() {
        for &q in &grid[a + 1..] {
            let ep = dirichlet_form(l, &power_operator(&x, &sigma, p, 2.0)?, p)?.value;
            let eq = dirichlet_form(l, &power_operator(&x, &sigma, q, 2.0)?, q)?.value;
            s.le(format!("stroock_varopoulos[p={p},q={q}]"), "Stroock–Varopoulos inequality", eq, ep, 1e-9);
        }
    }
    for p in [1.25, 1.5, 2.0] {
        let e2 = dirichlet_form(l, &power_operator(&x, &sigma, 2.0, p)?, 2.0)?.value;
        let ep = dirichlet_form(l, &x, p)?.value;
        s.le(format!("lp_regularity_lower[p={p}]"), "L_p regularity of the Dirichlet form", e2, ep, 1e-9);
        s.le(format!("lp_regularity_upper[p={p}]"), "L_p regularity of the Dirichlet form", ep, p * p / (4.0 * (p - 1.0)) * e2, 1e-9);
    }

    let rho = s.density();
    for p in [1.3, 2.0] {
        let f0 = p_divergence(&rho, &sigma, p)?.value;
        let rt = beckner::operator_core::herm_part(&l.evolve(0.5, Picture::Schrodinger, &rho)?);
        s.le(format!("data_processing[p={p}]"), "data processing under the semigroup", p_divergence(&rt, &sigma, p)?.value, f0, 1e-10);
        let c = relative_entropy(&rho, &sigma, RelEntKind::Max)?.value.exp();
        let chi = chi2_divergence(&rho, &sigma, &Scalar::Kappa(1.0 / p))?.value;
        s.le(format!("sandwich_lower[p={p}]"), "chi-square sandwich of the p-divergence", k_p(p, c) * chi, f0, 1e-9);
        s.le(format!("sandwich_upper[p={p}]"), "chi-square sandwich of the p-divergence", f0, chi / p, 1e-9);
    }

    for p in [1.3, 1.7, 2.0] {
        let rho = s.density();
        s.le(format!("gradient_flow[p={p}]"), "semigroup is the gradient flow of the p-divergence", grad_flow_residual(l, &rho, p)?, 0.0, 1e-8);
    }

    let rho = s.density();
    let (u, v) = (traceless_herm(&s.hermitian()), traceless_herm(&s.hermitian()));
    let q = |x: &CMat| hessian_form(l, &rho, 1.6, x, KernelChoice::Symmetrized);
    let buv = 0.25 * (q(&(&u + &v))? - q(&(&u - &v))?);
    let bvu = 0.25 * (q(&(&v + &u))? - q(&(&v - &u))?);
    s.le("hessian_symmetry", "symmetry of the Hessian", (buv - bvu).abs(), 0.0, 1e-9 * (1.0 + buv.abs()));

    let (r0, r1) = (s.density(), s.density());
    let (x0, x1) = (s.hermitian(), s.hermitian());
    let quad = |r: &CMat, x: &CMat| -> beckner::Result<f64> {
        let k = MetricKernel::new(&l.reference, r, 1.5, 0.0)?;
        Ok(beckner::operator_core::hs(x, &k.apply(x, Direction::Inverse)).re)
    };
    let mid = quad(&((&r0 + &r1) * re(0.5)), &((&x0 + &x1) * re(0.5)))?;
    let avg = 0.5 * (quad(&r0, &x0)? + quad(&r1, &x1)?);
    s.le("kernel_joint_convexity", "joint convexity of the inverse metric kernel", mid, avg, 1e-10);

    let opts = EstimateOptions { num_starts: 4, seed: ctx.cfg.seeds.constants, ..Default::default() };
    let p = 1.5;
    let est = estimate_constant(l, ConstantKind::Beckner(p), &opts)?;
    let lower = beckner_lower_bound(ctx.lambda, ctx.sigma_min, p);
    s.le("beckner_lower_bound", "two-sided Beckner bound (lower)", lower, est.value, 1e-6);
    s.le("beckner_upper_bound", "two-sided Beckner bound (upper)", est.value, p * ctx.lambda / 2.0, 1e-6);

    let failures = s.checks.iter().filter(|c| !c.pass).count();
    Ok(TaskOutput { result: json!({ "checks": s.checks.len(), "failures": failures }), checks: s.checks })
}
