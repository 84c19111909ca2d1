use super::eig::eigh_sym;
use super::superop::modular_function;
use super::{hs, CMat, Scalar, C64};
use crate::error::{Error, Result};

/// Inner products on operators.
#[derive(Debug, Clone)]
pub enum InnerKind<'a> {
    HilbertSchmidt,
    /// tr(σ^s X† σ^{1−s} Y).
    SWeighted(&'a CMat, f64),
    Kms(&'a CMat),
    Gns(&'a CMat),
    /// ⟨X, R_σ f(Δ_σ) Y⟩.
    FWeighted(&'a CMat, &'a Scalar),
}

fn spectral(sigma: &CMat) -> Result<super::Eigh> {
    let e = eigh_sym(sigma);
    if e.min() <= crate::STRICT_FLOOR {
        return Err(Error::SingularState { min_eig: e.min() });
    }
    Ok(e)
}

pub fn inner_product(kind: InnerKind<'_>, x: &CMat, y: &CMat) -> Result<C64> {
    match kind {
        InnerKind::HilbertSchmidt => Ok(hs(x, y)),
        InnerKind::SWeighted(sigma, s) => {
            let e = spectral(sigma)?;
            let a = e.map(|v| v.powf(s));
            let b = e.map(|v| v.powf(1.0 - s));
            Ok((a * x.adjoint() * b * y).trace())
        }
        InnerKind::Kms(sigma) => inner_product(InnerKind::SWeighted(sigma, 0.5), x, y),
        InnerKind::Gns(sigma) => inner_product(InnerKind::SWeighted(sigma, 1.0), x, y),
        InnerKind::FWeighted(sigma, f) => {
            let e = spectral(sigma)?;
            let fy = modular_function(&e, |r| f.eval(r)).apply(y);
            Ok(hs(x, &(fy * sigma)))
        }
    }
}
