//! Weighted noncommutative L_p norms, power operators, entropy functionals and
//! divergences between states.

use crate::error::{Error, Result};
use crate::operator_core::{abs_power, eigh, eigh_sym, frob, identity, psd_power, re, CMat, Eigh, Scalar};
use crate::state::{check_density, Reference};

/// Eigenvalue threshold for support checks.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Below this distance from 1 the p → 1 limit formulas are used.
pub const P_ONE_TOL: f64 = 1e-4;
/// Small negative divergences above this are clamped to zero.
const CLAMP_TOL: f64 = -1e-10;

/// Hölder conjugate p̂ = p/(p − 1).
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Which divergence a value came from.
#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceKind {
    Umegaki,
    Sandwiched(f64),
    Max,
    PDivergence(f64),
    Chi2(Scalar),
}

/// A divergence together with its kind; `value` is +∞ on support violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub value: f64,
    pub kind: DivergenceKind,
}

impl Divergence {
    fn new(value: f64, kind: DivergenceKind) -> Self {
        let value = if (CLAMP_TOL..0.0).contains(&value) { 0.0 } else { value };
        Divergence { value, kind }
    }

    fn infinite(kind: DivergenceKind) -> Self {
        Divergence { value: f64::INFINITY, kind }
    }
}

/// Relative-entropy flavours accepted by [`relative_entropy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelEntKind {
    Umegaki,
    Sandwiched(f64),
    Max,
}

/// Variance flavours accepted by [`variance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceKind {
    Var,
    QVar(f64),
}

/// ‖X‖_{p,σ} = tr(|Γ_σ^{1/p} X|^p)^{1/p}; p = ∞ gives the operator norm.
pub fn weighted_p_norm(x: &CMat, sigma: &CMat, p: f64) -> Result<f64> {
    let r = Reference::new(sigma)?;
    weighted_p_norm_ref(x, &r, p)
}

pub(crate) fn weighted_p_norm_ref(x: &CMat, r: &Reference, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("p-norm needs p > 0, got {p}")));
    }
    if p.is_infinite() {
        return Ok(singular_values(x).into_iter().fold(0.0, f64::max));
    }
    let y = r.gamma(1.0 / p, x);
    let s: f64 = singular_values(&y).into_iter().map(|v| v.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

fn singular_values(x: &CMat) -> Vec<f64> {
    eigh_sym(&(x.adjoint() * x)).values.into_iter().map(|v| v.max(0.0).sqrt()).collect()
}

/// I_{q,p}(X) = Γ_σ^{−1/q}(|Γ_σ^{1/p} X|^{p/q}).
pub fn power_operator(x: &CMat, sigma: &CMat, q: f64, p: f64) -> Result<CMat> {
    let r = Reference::new(sigma)?;
    power_operator_ref(x, &r, q, p)
}

pub(crate) fn power_operator_ref(x: &CMat, r: &Reference, q: f64, p: f64) -> Result<CMat> {
    if q == 0.0 || p == 0.0 {
        return Err(Error::ZeroExponent);
    }
    let y = r.gamma(1.0 / p, x);
    let a = abs_power(&y, p / q)?;
    Ok(r.gamma(-1.0 / q, &a))
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Ent_{p,σ}(X) for X ≥ 0 and p ≥ 1.
pub fn entropy_functional(x: &CMat, sigma: &CMat, p: f64) -> Result<f64> {
    let r = Reference::new(sigma)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("entropy functional needs p ≥ 1, got {p}")));
    }
    let y = eigh(&r.gamma(1.0 / p, x))?.clamp_psd()?;
    // (Γ^{1/p}X)^p and its logarithm share the eigenbasis of Γ^{1/p}X
    let yp = y.map(|v| v.powf(p));
    let ylog = y.map(|v| xlogx(v.powf(p)));
    let cross = (&yp * r.log()).trace().re;
    let norm_p = yp.trace().re;
    Ok(ylog.trace().re - cross - xlogx(norm_p))
}

/// Restrict (ρ, σ) to the support of σ; `None` when ρ leaks outside.
fn restrict(rho: &CMat, sigma: &CMat) -> Result<Option<(CMat, CMat)>> {
    check_density(rho)?;
    let es = check_density(sigma)?;
    let keep: Vec<usize> = (0..es.dim()).filter(|&k| es.values[k] > SUPPORT_TOL).collect();
    if keep.len() == es.dim() {
        return Ok(Some((rho.clone(), sigma.clone())));
    }
    let d = es.dim();
    let mut w = CMat::zeros(d, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        w.set_column(c, &es.vectors.column(k));
    }
    let rr = w.adjoint() * rho * &w;
    if (1.0 - rr.trace().re).abs() > 1e-10 {
        return Ok(None);
    }
    let ss = w.adjoint() * sigma * &w;
    Ok(Some((crate::operator_core::herm_part(&rr), crate::operator_core::herm_part(&ss))))
}

fn eig_pos(a: &CMat) -> Eigh {
    let mut e = eigh_sym(a);
    for v in &mut e.values {
        *v = v.max(0.0);
    }
    e
}

/// tr((σ^{(1−p)/2p} ρ σ^{(1−p)/2p})^p) = ‖Γ_σ^{−1}ρ‖_{p,σ}^p for full-rank σ.
fn sandwiched_trace(rho: &CMat, sigma: &CMat, p: f64) -> f64 {
    let s = eig_pos(sigma);
    let h = s.map(|v| v.powf((1.0 - p) / (2.0 * p)));
    let m = &h * rho * &h;
    eig_pos(&m).values.iter().map(|v| if *v > 0.0 { v.powf(p) } else { 0.0 }).sum()
}

fn umegaki(rho: &CMat, sigma: &CMat) -> f64 {
    let er = eig_pos(rho);
    let es = eig_pos(sigma);
    let logs = es.map(|v| v.ln());
    let neg = er.values.iter().map(|&v| xlogx(v)).sum::<f64>();
    neg - (rho * logs).trace().re
}

fn d_max(rho: &CMat, sigma: &CMat) -> f64 {
    let es = eig_pos(sigma);
    let h = es.map(|v| 1.0 / v.sqrt());
    eig_pos(&(&h * rho * &h)).max().ln()
}

/// Umegaki, sandwiched Rényi or max-relative entropy.
pub fn relative_entropy(rho: &CMat, sigma: &CMat, kind: RelEntKind) -> Result<Divergence> {
    let tag = match kind {
        RelEntKind::Umegaki => DivergenceKind::Umegaki,
        RelEntKind::Sandwiched(p) => DivergenceKind::Sandwiched(p),
        RelEntKind::Max => DivergenceKind::Max,
    };
    let Some((rho, sigma)) = restrict(rho, sigma)? else {
        return Ok(Divergence::infinite(tag));
    };
    let value = match kind {
        RelEntKind::Umegaki => umegaki(&rho, &sigma),
        RelEntKind::Max => d_max(&rho, &sigma),
        RelEntKind::Sandwiched(p) => {
            if !(p > 0.0) || p == 1.0 {
                return Err(Error::InvalidArgument(format!("sandwiched order must lie in (0,1)∪(1,∞), got {p}")));
            }
            if p.is_infinite() {
                d_max(&rho, &sigma)
            } else {
                sandwiched_trace(&rho, &sigma, p).ln() / (p - 1.0)
            }
        }
    };
    Ok(Divergence::new(value, tag))
}

/// Quantum p-divergence F_{p,σ}(ρ) = (‖Γ_σ^{−1}ρ‖_{p,σ}^p − 1)/(p(p − 1)).
pub fn p_divergence(rho: &CMat, sigma: &CMat, p: f64) -> Result<Divergence> {
    let tag = DivergenceKind::PDivergence(p);
    if !(p > 0.0) || p.is_infinite() {
        return Err(Error::InvalidArgument(format!("p-divergence order must be finite and positive, got {p}")));
    }
    let Some((rho, sigma)) = restrict(rho, sigma)? else {
        return Ok(Divergence::infinite(tag));
    };
    if (p - 1.0).abs() < P_ONE_TOL {
        return Ok(Divergence::new(umegaki(&rho, &sigma), tag));
    }
    let value = (sandwiched_trace(&rho, &sigma, p) - 1.0) / (p * (p - 1.0));
    Ok(Divergence::new(value, tag))
}

/// Var_σ(X) or the q-variance ‖Y‖²_{2,σ} − ‖Y‖²_{q,σ}.
pub fn variance(x: &CMat, sigma: &CMat, kind: VarianceKind) -> Result<f64> {
    let r = Reference::new(sigma)?;
    match kind {
        VarianceKind::Var => {
            let m = (sigma * x).trace();
            let c = x - identity(r.dim()) * m;
            Ok(weighted_p_norm_ref(&c, &r, 2.0)?.powi(2))
        }
        VarianceKind::QVar(q) => {
            if !(1.0..2.0).contains(&q) {
                return Err(Error::InvalidArgument(format!("q-variance needs q ∈ [1,2), got {q}")));
            }
            Ok(weighted_p_norm_ref(x, &r, 2.0)?.powi(2) - weighted_p_norm_ref(x, &r, q)?.powi(2))
        }
    }
}

/// χ²_κ(ρ, σ) = ⟨ρ − σ, R_σ^{−1} κ(Δ_σ)(ρ − σ)⟩.
pub fn chi2_divergence(rho: &CMat, sigma: &CMat, kappa: &Scalar) -> Result<Divergence> {
    let tag = DivergenceKind::Chi2(kappa.clone());
    let Some((rho, sigma)) = restrict(rho, sigma)? else {
        return Ok(Divergence::infinite(tag));
    };
    let e = eig_pos(&sigma);
    let a = e.to_basis(&(&rho - &sigma));
    let n = e.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let ratio = e.values[i] / e.values[k];
            acc += a[(i, k)].norm_sqr() * kappa.eval(ratio) / e.values[k];
        }
    }
    Ok(Divergence::new(acc, tag))
}

/// k_p(c) = (c^p − 1 − p(c − 1))/(p(p − 1)(c − 1)²), with its Taylor series near c = 1.
pub fn k_p(p: f64, c: f64) -> f64 {
    let e = c - 1.0;
    if e.abs() < 1e-3 {
        return 0.5 + (p - 2.0) * e / 6.0 + (p - 2.0) * (p - 3.0) * e * e / 24.0;
    }
    (c.powf(p) - 1.0 - p * e) / (p * (p - 1.0) * e * e)
}

/// (k_p(c), C_σ = 1/σ_min).
pub fn sandwich_constants(sigma: &CMat, p: f64, c: f64) -> Result<(f64, f64)> {
    let r = Reference::new(sigma)?;
    Ok((k_p(p, c), 1.0 / r.min_eig()))
}

/// Relative density Γ_σ^{−1}ρ.
pub fn relative_density(rho: &CMat, sigma: &CMat) -> Result<CMat> {
    let r = Reference::new(sigma)?;
    Ok(r.gamma(-1.0, rho))
}

/// Trace norm ‖A‖₁.
pub fn trace_norm(a: &CMat) -> f64 {
    singular_values(a).into_iter().sum()
}

/// A^r for PSD A.
pub fn psd_pow(a: &CMat, r: f64) -> Result<CMat> {
    psd_power(a, r)
}

/// Relative Frobenius distance, used by several checks.
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    frob(&(a - b)) / frob(a).max(frob(b)).max(f64::MIN_POSITIVE)
}

/// Partial trace over the second factor of C^{d1} ⊗ C^{d2}.
pub fn partial_trace_second(a: &CMat, d1: usize, d2: usize) -> CMat {
    let mut out = CMat::zeros(d1, d1);
    for i in 0..d1 {
        for j in 0..d1 {
            let mut s = re(0.0);
            for k in 0..d2 {
                s += a[(i * d2 + k, j * d2 + k)];
            }
            out[(i, j)] = s;
        }
    }
    out
}
