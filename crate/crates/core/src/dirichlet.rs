//! p-Dirichlet forms, their divided-difference representation, entropy
//! production along the semigroup and the carré du champ calculus.

use crate::entropy::{conjugate, power_operator_ref, P_ONE_TOL};
use crate::error::{Error, Result};
use crate::operator_core::{eigh, eigh_sym, hs, identity, inner_product, re, CMat, DoubleSum, Eigh, InnerKind, Scalar, Scalar2};
use crate::sampling;
use crate::semigroup::DbcLindbladian;

/// Values above −NONNEG_TOL are clamped to zero.
const NONNEG_TOL: f64 = 1e-9;

/// How a Dirichlet value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Definition,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletValue {
    pub value: f64,
    pub p: f64,
    pub route: Route,
}

fn clamp(v: f64) -> f64 {
    if (-NONNEG_TOL..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

fn kms(l: &DbcLindbladian, a: &CMat, b: &CMat) -> Result<f64> {
    Ok(inner_product(InnerKind::Kms(l.sigma()), a, b)?.re)
}

fn require_psd(x: &CMat) -> Result<Eigh> {
    eigh(x)?.clamp_psd()
}

/// 𝓔_{p,𝓛}(X) from its defining pairing with 𝓛X.
pub fn dirichlet_form(l: &DbcLindbladian, x: &CMat, p: f64) -> Result<DirichletValue> {
    if !(p > 0.0) || p.is_infinite() {
        return Err(Error::InvalidArgument(format!("Dirichlet form needs finite p > 0, got {p}")));
    }
    let ex = require_psd(x)?;
    let lx = l.apply(x);
    let r = &l.reference;
    let value = if (p - 1.0).abs() < P_ONE_TOL {
        if ex.min() <= 0.0 {
            return Err(Error::SingularState { min_eig: ex.min() });
        }
        let g = eigh_sym(&r.gamma(1.0, x));
        if g.min() <= 0.0 {
            return Err(Error::SingularState { min_eig: g.min() });
        }
        let a = g.map(f64::ln) - r.log();
        -0.25 * kms(l, &a, &lx)?
    } else {
        let q = conjugate(p);
        let ip = power_operator_ref(x, r, q, p)?;
        -(q * p / 4.0) * kms(l, &ip, &lx)?
    };
    Ok(DirichletValue { value: clamp(value), p, route: Route::Definition })
}

/// Σ_j-representation of 𝓔_{p,𝓛}(X) through the divided difference of f_p.
pub fn dirichlet_representation(l: &DbcLindbladian, x: &CMat, p: f64) -> Result<DirichletValue> {
    l.require_jumps()?;
    let r = &l.reference;
    let y = r.gamma(1.0 / p, x);
    let ey = eigh(&crate::operator_core::herm_part(&y))?;
    if ey.min() <= 0.0 {
        return Err(Error::SingularState { min_eig: ey.min() });
    }
    let near_one = (p - 1.0).abs() < P_ONE_TOL;
    let (f, pref) = if near_one { (Scalar::Log, 0.25) } else { (Scalar::Fp(p), p * p / 4.0) };
    let kernel = Scalar2::DivDiff(f);
    let ps = if near_one { 1.0 } else { p };
    let mut total = 0.0;
    for (j, jt) in l.jumps.iter().enumerate() {
        let a = scaled(&ey, (jt.omega / (2.0 * ps)).exp());
        let b = scaled(&ey, (-jt.omega / (2.0 * ps)).exp());
        let ds = DoubleSum::new(&kernel, a, b)?;
        let g = r.gamma(1.0 / ps, &l.partial(j, x)?);
        total += hs(&g, &ds.apply(&g)).re;
    }
    Ok(DirichletValue { value: clamp(pref * total), p, route: Route::Representation })
}

/// Same eigenvectors, eigenvalues multiplied by `c`.
pub(crate) fn scaled(e: &Eigh, c: f64) -> Eigh {
    Eigh { values: e.values.iter().map(|v| v * c).collect(), vectors: e.vectors.clone() }
}

/// |definition − representation| / (1 + definition).
pub fn representation_check(l: &DbcLindbladian, x: &CMat, p: f64) -> Result<f64> {
    l.require_jumps()?;
    let a = dirichlet_form(l, x, p)?.value;
    let b = dirichlet_representation(l, x, p)?.value;
    Ok((a - b).abs() / (1.0 + a.abs()))
}

/// −d/dt F_{p,σ}(ρ_t) at t = 0, i.e. (4/p²) 𝓔_{p,𝓛}(Γ_σ^{−1}ρ).
pub fn entropy_production(l: &DbcLindbladian, rho: &CMat, p: f64) -> Result<f64> {
    let e = crate::state::check_density(rho)?;
    if e.min() <= crate::STRICT_FLOOR {
        return Err(Error::SingularState { min_eig: e.min() });
    }
    let x = l.reference.gamma(-1.0, rho);
    let x = crate::operator_core::herm_part(&x);
    let pe = if (p - 1.0).abs() < P_ONE_TOL { 1.0 } else { p };
    Ok(4.0 / (pe * pe) * dirichlet_form(l, &x, p)?.value)
}

/// Bilinear form 𝓔₂(X, Y) = −⟨X, 𝓛Y⟩_{σ,1/2}.
pub fn dirichlet_bilinear(l: &DbcLindbladian, x: &CMat, y: &CMat) -> Result<crate::C64> {
    Ok(-inner_product(InnerKind::Kms(l.sigma()), x, &l.apply(y))?)
}

fn require_symmetric(l: &DbcLindbladian) -> Result<()> {
    if l.reference.is_maximally_mixed(1e-10) {
        Ok(())
    } else {
        Err(Error::NotSymmetric)
    }
}

/// Γ(X,Y) (order 1) or Γ₂(X,Y) (order 2).
pub fn carre_du_champ(l: &DbcLindbladian, x: &CMat, y: &CMat, order: u8) -> Result<CMat> {
    require_symmetric(l)?;
    match order {
        1 => Ok(gamma1(l, x, y)),
        2 => {
            let a = gamma1(l, x, &l.apply(y));
            let b = gamma1(l, &l.apply(x), y);
            let c = l.apply(&gamma1(l, x, y));
            Ok((a + b - c) * re(-0.5))
        }
        _ => Err(Error::InvalidArgument(format!("carré du champ order must be 1 or 2, got {order}"))),
    }
}

fn gamma1(l: &DbcLindbladian, x: &CMat, y: &CMat) -> CMat {
    let xd = x.adjoint();
    (l.apply(&(&xd * y)) - &xd * l.apply(y) - l.apply(x).adjoint() * y) * re(0.5)
}

/// min over seeded random Hermitian X of λ_min(Γ₂(X) − αΓ(X)).
pub fn bakry_emery_margin(l: &DbcLindbladian, alpha: f64, samples: usize, seed: u64) -> Result<f64> {
    require_symmetric(l)?;
    let d = l.dim();
    let mut rng = sampling::rng(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x = sampling::hermitian(d, &mut rng);
        let g2 = carre_du_champ(l, &x, &x, 2)?;
        let g1 = carre_du_champ(l, &x, &x, 1)?;
        let m = g2 - g1 * re(alpha);
        worst = worst.min(eigh_sym(&m).min());
    }
    Ok(worst)
}

/// ⟨I/d, A⟩ in the Hilbert–Schmidt pairing.
pub fn normalized_trace(a: &CMat) -> crate::C64 {
    let d = a.nrows();
    hs(&(identity(d) * re(1.0 / d as f64)), a)
}
