//! Hessian of F_{p,σ} in the W_{2,p} geometry, sampled Ricci lower bounds
//! and the inequalities that follow from positive curvature.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::constants::LedgerEntry;
use crate::dirichlet::dirichlet_form;
use crate::entropy::p_divergence;
use crate::error::{Error, Result};
use crate::operator_core::{frob, herm_part, hs, re, traceless_basis, unit, vec, CMat};
use crate::sampling;
use crate::semigroup::{DbcLindbladian, Picture};
use crate::transport::{kernel_derivative, onsager, w2p_solve, KernelChoice, Onsager, TransportOptions};

/// Relative discretization tolerance of the transport solver.
pub const W_TOL: f64 = 0.02;

/// Mixing weights of σ in the sampled state family.
const MIX_WEIGHTS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

fn check_traceless(u: &CMat) -> Result<()> {
    let t = u.trace().norm();
    if t > 1e-10 * (1.0 + frob(u)) {
        return Err(Error::NotTraceless { index: 0, trace: t });
    }
    Ok(())
}

/// Precomputed pieces of the Hessian at a fixed ρ.
struct HessianAt<'a> {
    l: &'a DbcLindbladian,
    rho: &'a CMat,
    p: f64,
    op: Onsager,
    flow: CMat,
    choice: KernelChoice,
}

impl<'a> HessianAt<'a> {
    fn new(l: &'a DbcLindbladian, rho: &'a CMat, p: f64, choice: KernelChoice) -> Result<Self> {
        let op = onsager(l, rho, p)?;
        Ok(HessianAt { l, rho, p, op, flow: l.apply_dual(rho), choice })
    }

    fn value(&self, u: &CMat) -> Result<f64> {
        let g = kernel_derivative(self.l, self.rho, self.p, u, self.choice)?;
        let du = self.op.apply(u);
        Ok(hs(&g, &self.flow).re - hs(u, &self.l.apply_dual(&du)).re)
    }
}

/// Hess F_{p,σ}(ρ)[U, U].
pub fn hessian_form(l: &DbcLindbladian, rho: &CMat, p: f64, u: &CMat, choice: KernelChoice) -> Result<f64> {
    l.require_jumps()?;
    check_traceless(u)?;
    HessianAt::new(l, rho, p, choice)?.value(u)
}

/// Sampling settings for [`ricci_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciOptions {
    pub num_states: usize,
    pub seed: u64,
    pub choice: KernelChoice,
}

impl Default for RicciOptions {
    fn default() -> Self {
        RicciOptions { num_states: 64, seed: 0, choice: KernelChoice::Symmetrized }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicciEstimate {
    pub kappa: f64,
    pub samples: usize,
    pub worst_state: CMat,
    pub worst_direction: CMat,
}

/// k-th member of the sampled state family.
pub fn ricci_sample_state(l: &DbcLindbladian, seed: u64, k: usize) -> CMat {
    let mut r = sampling::substream(seed, k as u64);
    let w = MIX_WEIGHTS[k % MIX_WEIGHTS.len()];
    herm_part(&(sampling::density(l.dim(), &mut r) * re(1.0 - w) + l.sigma() * re(w)))
}

/// Smallest ratio Hess[U,U]/⟨U,𝔇U⟩ over traceless U at a fixed ρ, with its minimizer.
pub fn min_curvature_at(l: &DbcLindbladian, rho: &CMat, p: f64, choice: KernelChoice) -> Result<(f64, CMat)> {
    l.require_jumps()?;
    let h = HessianAt::new(l, rho, p, choice)?;
    let basis = traceless_basis(l.dim());
    let n = basis.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no traceless directions in dimension 1".into()));
    }
    let diag: Vec<f64> = basis.iter().map(|e| h.value(e)).collect::<Result<_>>()?;
    let mut qh = DMatrix::<f64>::zeros(n, n);
    let mut qd = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        qh[(i, i)] = diag[i];
        for j in 0..n {
            qd[(i, j)] = hs(&basis[i], &h.op.apply(&basis[j])).re;
        }
        for j in 0..i {
            let s = h.value(&(&basis[i] + &basis[j]))?;
            let v = 0.5 * (s - diag[i] - diag[j]);
            qh[(i, j)] = v;
            qh[(j, i)] = v;
        }
    }
    let qd = (&qd + qd.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(qd).ok_or(Error::NotPrimitive { kernel_dimension: 1 })?;
    let linv = chol.l().try_inverse().ok_or(Error::NotPrimitive { kernel_dimension: 1 })?;
    let m = &linv * &qh * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let c = linv.transpose() * eig.eigenvectors.column(k);
    let mut u = CMat::zeros(l.dim(), l.dim());
    for (ci, e) in c.iter().zip(&basis) {
        u += e * re(*ci);
    }
    Ok((eig.eigenvalues[k], u))
}

/// Sampled Ricci lower bound: minimum over the state family of the generalized eigenvalue.
pub fn ricci_estimate(l: &DbcLindbladian, p: f64, opts: &RicciOptions) -> Result<RicciEstimate> {
    l.require_jumps()?;
    if opts.num_states == 0 {
        return Err(Error::InvalidArgument("need at least one sampled state".into()));
    }
    let results: Vec<Result<(f64, CMat, CMat)>> = (0..opts.num_states)
        .into_par_iter()
        .map(|k| {
            let rho = ricci_sample_state(l, opts.seed, k);
            let (kappa, u) = min_curvature_at(l, &rho, p, opts.choice)?;
            Ok((kappa, rho, u))
        })
        .collect();
    let mut best: Option<(f64, CMat, CMat)> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.0 < b.0) {
            best = Some(r);
        }
    }
    let (kappa, worst_state, worst_direction) = best.expect("at least one sample");
    Ok(RicciEstimate { kappa, samples: opts.num_states, worst_state, worst_direction })
}

/// Functional inequalities implied by a curvature bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    Hwi,
    BecknerFromRicci,
    Tcp,
    Diameter,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::Hwi => "hwi",
            Inequality::BecknerFromRicci => "beckner_from_ricci",
            Inequality::Tcp => "tcp",
            Inequality::Diameter => "diameter",
        }
    }

    fn needs_positive(self) -> bool {
        !matches!(self, Inequality::Hwi)
    }
}

fn production(l: &DbcLindbladian, rho: &CMat, p: f64) -> Result<f64> {
    let x = herm_part(&l.reference.gamma(-1.0, rho));
    Ok(dirichlet_form(l, &x, p)?.value)
}

/// Evaluates each requested inequality on every state (pairs of consecutive states for the diameter).
pub fn inequality_checks(
    l: &DbcLindbladian,
    p: f64,
    kappa: f64,
    states: &[CMat],
    checks: &[Inequality],
    topts: &TransportOptions,
) -> Result<Vec<LedgerEntry>> {
    if checks.iter().any(|c| c.needs_positive()) && !(kappa > 0.0) {
        return Err(Error::NonPositiveCurvature(kappa));
    }
    let sigma = l.sigma();
    let mut out = Vec::new();
    let needs_w = checks.iter().any(|c| matches!(c, Inequality::Hwi | Inequality::Tcp));
    for (i, rho) in states.iter().enumerate() {
        let f = p_divergence(rho, sigma, p)?.value;
        let w = if needs_w { w2p_solve(l, rho, sigma, p, topts)?.0 } else { 0.0 };
        for &c in checks {
            let name = format!("{}[{i}]", c.name());
            match c {
                Inequality::Hwi => {
                    let a = 2.0 / p * w * production(l, rho, p)?.sqrt();
                    let b = 0.5 * kappa * w * w;
                    out.push(LedgerEntry::with_allowance(name, f, a - b, W_TOL * (a + 2.0 * b.abs()) + 1e-12));
                }
                Inequality::BecknerFromRicci => {
                    let rhs = 2.0 * production(l, rho, p)? / (p * p * kappa);
                    out.push(LedgerEntry::with_allowance(name, f, rhs, 1e-9 * (1.0 + rhs)));
                }
                Inequality::Tcp => {
                    let alpha = kappa * p / 2.0;
                    let rhs = (p / alpha * f).max(0.0).sqrt();
                    out.push(LedgerEntry::with_allowance(name, w, rhs, W_TOL * w + 1e-12));
                }
                Inequality::Diameter => {}
            }
        }
    }
    if checks.contains(&Inequality::Diameter) {
        let smin = l.reference.min_eig();
        let bound = 8.0 * (smin.powf(1.0 - p) - 1.0) / (kappa * p * (p - 1.0));
        for (i, pair) in states.windows(2).enumerate() {
            let w = w2p_solve(l, &pair[0], &pair[1], p, topts)?.0;
            let w2 = w * w;
            out.push(LedgerEntry::with_allowance(format!("diameter[{i},{}]", i + 1), w2, bound, 2.0 * W_TOL * w2 + 1e-12));
        }
    }
    Ok(out)
}

/// Consequences of curvature along the semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamic {
    Contraction,
    GradientEstimate,
    Intertwining,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicOptions {
    pub times: Vec<f64>,
    /// Seed for the observables U in the gradient estimate.
    pub seed: u64,
    pub transport: TransportOptions,
}

impl Default for DynamicOptions {
    fn default() -> Self {
        DynamicOptions { times: vec![0.1, 0.5, 1.0], seed: 0, transport: TransportOptions::default() }
    }
}

/// Matrix of X ↦ ∂_jX.
fn partial_superop(l: &DbcLindbladian, j: usize) -> Result<CMat> {
    let d = l.dim();
    let mut m = CMat::zeros(d * d, d * d);
    for b in 0..d {
        for a in 0..d {
            m.set_column(a + b * d, &vec(&l.partial(j, &unit(d, a, b))?));
        }
    }
    Ok(m)
}

/// Contraction of W_{2,p} (consecutive state pairs), the gradient estimate and intertwining.
pub fn dynamic_checks(
    l: &DbcLindbladian,
    p: f64,
    kappa: f64,
    mode: Dynamic,
    states: &[CMat],
    opts: &DynamicOptions,
) -> Result<Vec<LedgerEntry>> {
    l.require_jumps()?;
    let mut out = Vec::new();
    match mode {
        Dynamic::Contraction => {
            for (i, pair) in states.windows(2).enumerate() {
                let w0 = w2p_solve(l, &pair[0], &pair[1], p, &opts.transport)?.0;
                for &t in &opts.times {
                    let a = herm_part(&l.evolve(t, Picture::Schrodinger, &pair[0])?);
                    let b = herm_part(&l.evolve(t, Picture::Schrodinger, &pair[1])?);
                    let wt = w2p_solve(l, &a, &b, p, &opts.transport)?.0;
                    let rhs = (-kappa * t).exp() * w0;
                    out.push(LedgerEntry::with_allowance(format!("contraction[{i},t={t}]"), wt, rhs, W_TOL * rhs + 1e-12));
                }
            }
        }
        Dynamic::GradientEstimate => {
            let mut r = sampling::rng(opts.seed);
            for (i, rho) in states.iter().enumerate() {
                let u = crate::operator_core::traceless_herm(&sampling::hermitian(l.dim(), &mut r));
                for &t in &opts.times {
                    let pu = herm_part(&l.evolve(t, Picture::Heisenberg, &u)?);
                    let lhs = onsager(l, rho, p)?.quadratic(&pu);
                    let rho_t = herm_part(&l.evolve(t, Picture::Schrodinger, rho)?);
                    let rhs = (-2.0 * kappa * t).exp() * onsager(l, &rho_t, p)?.quadratic(&u);
                    out.push(LedgerEntry::with_allowance(format!("gradient_estimate[{i},t={t}]"), lhs, rhs, 1e-8));
                }
            }
        }
        Dynamic::Intertwining => {
            for &t in &opts.times {
                let pt = l.semigroup(t).matrix;
                let decay = re((-kappa * t).exp());
                for j in 0..l.jumps.len() {
                    let dj = partial_superop(l, j)?;
                    let res = (&dj * &pt - &pt * &dj * decay).norm();
                    out.push(LedgerEntry::with_allowance(format!("intertwining[j={j},t={t}]"), res, 0.0, 1e-10));
                }
            }
        }
    }
    Ok(out)
}
