//! Task execution in dependency order.

use std::time::Instant;

use beckner::constants::{
    beckner_lower_bound, bound_ledger, estimate_constant, mixing, ConstantEstimate, ConstantKind, EstimateOptions,
    MixingMode, HARD_TOL,
};
use beckner::entropy::{p_divergence, trace_norm};
use beckner::operator_core::{herm_part, CMat};
use beckner::ricci::{dynamic_checks, inequality_checks, ricci_estimate, Dynamic, DynamicOptions, Inequality, RicciOptions};
use beckner::sampling;
use beckner::semigroup::{DbcLindbladian, Picture};
use beckner::transport::{flat_w22, trace_distance_constant, w2p_solve, TransportOptions};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, MatrixJson, Task};
use crate::report::{Check, RunReport, TaskError};

/// Built model plus quantities shared between tasks.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub l: DbcLindbladian,
    pub sigma_min: f64,
    pub lambda: f64,
    pub constants: Option<Vec<ConstantEstimate>>,
}

impl Context<'_> {
    /// Seeded full-rank state number `k` of the config's state stream.
    pub fn state(&self, k: u64) -> CMat {
        let mut r = sampling::substream(self.cfg.seeds.states, k);
        sampling::full_rank_density(self.l.dim(), 0.2, &mut r)
    }

    fn certified(&self, p: f64) -> f64 {
        beckner_lower_bound(self.lambda, self.sigma_min, p)
    }
}

/// Outcome of one task.
pub struct TaskOutput {
    pub result: Value,
    pub checks: Vec<Check>,
}

/// Execute every configured task; errors are recorded and the run continues.
pub fn run(cfg: &ExperimentConfig) -> RunReport {
    let mut report = RunReport::new(cfg.clone());
    if cfg.tasks.is_empty() {
        report.finish();
        return report;
    }
    if cfg.dimension == 1 {
        for t in &cfg.tasks {
            report.ledger.push(Check::skipped(t.name(), t.name(), "dimension 1 has no spectral gap"));
        }
        report.finish();
        return report;
    }
    let start = Instant::now();
    let built = cfg.build().and_then(|l| {
        let lambda = l.gap()?;
        let sigma_min = l.reference.min_eig();
        Ok((l, lambda, sigma_min))
    });
    report.timings.insert("model".into(), start.elapsed().as_secs_f64());
    let (l, lambda, sigma_min) = match built {
        Ok(v) => v,
        Err(e) => {
            report.errors.push(TaskError { task: "model".into(), message: describe(&e) });
            report.finish();
            return report;
        }
    };
    let mut ctx = Context { cfg, l, sigma_min, lambda, constants: None };
    // tasks are sorted, so constants come first
    for &task in &cfg.tasks {
        let t0 = Instant::now();
        let out = match task {
            Task::Constants => constants_task(&mut ctx),
            Task::Decay => decay_task(&ctx),
            Task::Mixing => mixing_task(&ctx),
            Task::Transport => transport_task(&ctx),
            Task::Ricci => ricci_task(&ctx),
            Task::Verify => crate::verify::verify_task(&ctx),
        };
        report.timings.insert(task.name().into(), t0.elapsed().as_secs_f64());
        match out {
            Ok(o) => {
                report.results.insert(task.name().into(), o.result);
                report.ledger.extend(o.checks);
            }
            Err(e) => report.errors.push(TaskError { task: task.name().into(), message: describe(&e) }),
        }
    }
    report.finish();
    report
}

/// Variant name and message, e.g. `NotDbc: generator violates detailed balance: …`.
pub fn describe(e: &beckner::Error) -> String {
    let dbg = format!("{e:?}");
    let variant = dbg.split(['(', ' ', '{']).next().unwrap_or("Error");
    format!("{variant}: {e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantRow {
    pub kind: String,
    pub p_or_q: Option<f64>,
    pub value: f64,
    pub raw: f64,
    pub cap: f64,
    pub capped: bool,
    pub num_starts: usize,
    pub residual: f64,
}

impl From<&ConstantEstimate> for ConstantRow {
    fn from(e: &ConstantEstimate) -> Self {
        ConstantRow {
            kind: e.kind.name().into(),
            p_or_q: e.kind.parameter(),
            value: e.value,
            raw: e.raw,
            cap: e.cap,
            capped: e.capped,
            num_starts: e.num_starts,
            residual: e.best_residual,
        }
    }
}

fn constants_task(ctx: &mut Context) -> beckner::Result<TaskOutput> {
    let cfg = ctx.cfg;
    let opts = EstimateOptions {
        num_starts: cfg.settings.constants.num_starts,
        max_iters: cfg.settings.constants.max_iters,
        seed: cfg.seeds.constants,
        ..Default::default()
    };
    let mut kinds = vec![ConstantKind::Poincare];
    kinds.extend(cfg.p_grid.iter().map(|&p| ConstantKind::Beckner(p)));
    kinds.extend([ConstantKind::Mlsi, ConstantKind::Lsi]);
    kinds.extend(cfg.q_grid.iter().map(|&q| ConstantKind::DualBeckner(q)));
    let estimates = kinds.iter().map(|&k| estimate_constant(&ctx.l, k, &opts)).collect::<beckner::Result<Vec<_>>>()?;
    let ledger = bound_ledger(&estimates, ctx.sigma_min, &cfg.p_grid)?;
    let checks = ledger.entries.iter().map(|e| Check::from_entry("constants", "closed-form relations between functional-inequality constants", e)).collect();
    let rows: Vec<ConstantRow> = estimates.iter().map(ConstantRow::from).collect();
    let result = json!({
        "gap": ctx.lambda,
        "sigma_min": ctx.sigma_min,
        "estimates": rows,
        "ledger": ledger.entries.iter().map(|e| json!({
            "name": e.name, "lhs": e.lhs, "rhs": e.rhs, "slack": e.slack, "hard": e.hard, "pass": e.pass
        })).collect::<Vec<_>>(),
    });
    ctx.constants = Some(estimates);
    Ok(TaskOutput { result, checks })
}

fn decay_task(ctx: &Context) -> beckner::Result<TaskOutput> {
    let s = &ctx.cfg.settings.decay;
    let rho0 = ctx.state(0);
    let sigma = ctx.l.sigma();
    let n = s.points.max(2);
    let times: Vec<f64> = (0..n).map(|k| s.horizon / ctx.lambda * k as f64 / (n - 1) as f64).collect();
    let states = times
        .iter()
        .map(|&t| ctx.l.evolve(t, Picture::Schrodinger, &rho0).map(|r| herm_part(&r)))
        .collect::<beckner::Result<Vec<_>>>()?;
    let mut series = Vec::new();
    let mut checks = Vec::new();
    for &p in &ctx.cfg.p_grid {
        let alpha = ctx.certified(p);
        let f0 = p_divergence(&rho0, sigma, p)?.value;
        let mut points = Vec::new();
        for (t, rho) in times.iter().zip(&states) {
            let f = p_divergence(rho, sigma, p)?.value;
            let bound = (-4.0 * alpha * t / p).exp() * f0;
            checks.push(Check::le("decay", format!("decay[p={p},t={t:.4}]"), "exponential decay of the p-divergence", f, bound, 1e-9 * (1.0 + bound)));
            points.push(json!({ "t": t, "f": f, "bound": bound }));
        }
        series.push(json!({ "p": p, "alpha": alpha, "points": points }));
    }
    Ok(TaskOutput { result: json!({ "initial_state": MatrixJson::from_matrix(&rho0), "series": series }), checks })
}

fn mixing_task(ctx: &Context) -> beckner::Result<TaskOutput> {
    let pairs: Vec<(f64, f64)> = ctx.cfg.p_grid.iter().map(|&p| (p, ctx.certified(p))).collect();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &eps in &ctx.cfg.settings.mixing.eps {
        let empirical = mixing(&ctx.l, eps, &MixingMode::Empirical { seed: ctx.cfg.seeds.states })?;
        let bound = mixing(&ctx.l, eps, &MixingMode::BoundInf(pairs.clone()))?;
        checks.push(Check::le("mixing", format!("mixing[eps={eps}]"), "mixing time below the Beckner-based bound", empirical, bound, 1e-9 * (1.0 + bound)));
        rows.push(json!({ "eps": eps, "empirical": empirical, "bound": bound }));
    }
    Ok(TaskOutput { result: json!({ "rows": rows }), checks })
}

/// Sample pairs of the transport task.
pub fn transport_pairs(ctx: &Context, count: usize) -> Vec<(CMat, CMat)> {
    (0..count as u64).map(|k| (ctx.state(100 + 2 * k), ctx.state(101 + 2 * k))).collect()
}

fn transport_task(ctx: &Context) -> beckner::Result<TaskOutput> {
    let s = &ctx.cfg.settings.transport;
    let tol = ctx.cfg.tolerances.transport;
    let opts = TransportOptions { n: s.steps, tol: s.tol, ..Default::default() };
    let c = trace_distance_constant(&ctx.l, s.p)?;
    let mut pairs = Vec::new();
    let mut checks = Vec::new();
    for (k, (r0, r1)) in transport_pairs(ctx, s.pairs).iter().enumerate() {
        let (w, path) = w2p_solve(&ctx.l, r0, r1, s.p, &opts)?;
        let cont = path.continuity_residual(&ctx.l)?;
        let mean = path.action / path.n as f64;
        let spread = path.step_actions.iter().map(|a| (a - mean).abs()).fold(0.0, f64::max);
        let td = trace_norm(&(r1 - r0));
        checks.push(Check::le("transport", format!("continuity[{k}]"), "discrete continuity equation", cont, 1e-8, 0.0));
        checks.push(Check::le("transport", format!("constant_speed[{k}]"), "constant-speed geodesic", spread, tol * mean, 0.0));
        checks.push(Check::le("transport", format!("trace_distance[{k}]"), "trace distance below the transport distance", td, c * w, tol * c * w));
        let flat = if (s.p - 2.0).abs() < 1e-12 {
            let f = flat_w22(&ctx.l, r0, r1)?;
            checks.push(Check::le("transport", format!("flat_metric[{k}]"), "agreement with the flat closed form", (w - f).abs(), 0.01 * f, 0.0));
            Some(f)
        } else {
            None
        };
        pairs.push(json!({
            "w": w,
            "converged": path.converged,
            "iterations": path.iterations,
            "action": path.action,
            "step_actions": path.step_actions,
            "continuity_residual": cont,
            "trace_distance": td,
            "trace_distance_constant": c,
            "flat_w22": flat,
            "states": path.states.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>(),
        }));
    }
    Ok(TaskOutput { result: json!({ "p": s.p, "pairs": pairs }), checks })
}

fn ricci_task(ctx: &Context) -> beckner::Result<TaskOutput> {
    let cfg = ctx.cfg;
    let s = &cfg.settings.ricci;
    let topts = TransportOptions { n: s.steps, tol: cfg.settings.transport.tol, ..Default::default() };
    let states: Vec<CMat> = (0..s.states as u64).map(|k| ctx.state(200 + k)).collect();
    let mut out = Vec::new();
    let mut checks = Vec::new();
    for &p in &s.p {
        let est = ricci_estimate(&ctx.l, p, &RicciOptions { num_states: s.samples, seed: cfg.seeds.ricci, ..Default::default() })?;
        let analytic = cfg.analytic_kappa(p);
        if let Some(k) = analytic {
            checks.push(Check::le("ricci", format!("curvature_anchor[p={p}]"), "curvature of the depolarizing semigroup", k, est.kappa, 1e-6));
        }
        // the analytic value is certified; a sampled minimum only bounds the infimum from above
        let kappa = analytic.unwrap_or(est.kappa);
        let certified = analytic.is_some();
        let mark = |c: Check| if certified { c } else { c.soft() };
        let which: Vec<Inequality> = if kappa > 0.0 {
            vec![Inequality::Hwi, Inequality::BecknerFromRicci, Inequality::Tcp, Inequality::Diameter]
        } else {
            vec![Inequality::Hwi]
        };
        for e in inequality_checks(&ctx.l, p, kappa, &states, &which, &topts)? {
            checks.push(mark(Check::from_entry("ricci", "inequality implied by the curvature bound", &e)));
        }
        let dopts = DynamicOptions { seed: cfg.seeds.ricci, transport: topts, ..Default::default() };
        for mode in [Dynamic::Contraction, Dynamic::GradientEstimate] {
            for e in dynamic_checks(&ctx.l, p, kappa, mode, &states, &dopts)? {
                checks.push(mark(Check::from_entry("ricci", "semigroup estimate implied by the curvature bound", &e)));
            }
        }
        if let Some(est_c) = &ctx.constants {
            if let Some(b) = est_c.iter().find(|e| e.kind == ConstantKind::Beckner(p)) {
                checks.push(
                    Check::le("ricci", format!("beckner_vs_curvature[p={p}]"), "Beckner constant from curvature", kappa * p / 2.0, b.value, HARD_TOL).soft(),
                );
            }
        }
        out.push(json!({
            "p": p,
            "kappa_estimate": est.kappa,
            "kappa_used": kappa,
            "samples": est.samples,
            "worst_state": MatrixJson::from_matrix(&est.worst_state),
            "worst_direction": MatrixJson::from_matrix(&est.worst_direction),
        }));
    }
    Ok(TaskOutput { result: json!({ "estimates": out }), checks })
}
