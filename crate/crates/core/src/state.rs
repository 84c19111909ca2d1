//! Density-matrix validation and the cached spectral data of a reference state.

use crate::error::{Error, Result};
use crate::operator_core::{eigh, CMat, Eigh};

/// Tolerances for density matrices.
pub const DENSITY_MIN_EIG: f64 = -1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-10;

/// Check the density-matrix invariants (Hermitian, PSD, unit trace).
pub fn check_density(rho: &CMat) -> Result<Eigh> {
    let e = eigh(rho)?;
    if e.min() < DENSITY_MIN_EIG {
        return Err(Error::NotDensity(format!("minimum eigenvalue {:.3e}", e.min())));
    }
    let t = rho.trace();
    if (t.re - 1.0).abs() > DENSITY_TRACE_TOL || t.im.abs() > DENSITY_TRACE_TOL {
        return Err(Error::NotDensity(format!("trace {t}")));
    }
    Ok(e)
}

/// A full-rank state together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct Reference {
    pub sigma: CMat,
    pub eig: Eigh,
}

impl Reference {
    pub fn new(sigma: &CMat) -> Result<Self> {
        let eig = check_density(sigma)?;
        if eig.min() <= crate::STRICT_FLOOR {
            return Err(Error::SingularState { min_eig: eig.min() });
        }
        Ok(Reference { sigma: sigma.clone(), eig })
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn min_eig(&self) -> f64 {
        self.eig.min()
    }

    /// σ^r.
    pub fn pow(&self, r: f64) -> CMat {
        self.eig.map(|x| x.powf(r))
    }

    /// log σ.
    pub fn log(&self) -> CMat {
        self.eig.map(f64::ln)
    }

    /// Γ_σ^s X = σ^{s/2} X σ^{s/2}.
    pub fn gamma(&self, s: f64, x: &CMat) -> CMat {
        let h = self.pow(s / 2.0);
        &h * x * &h
    }

    /// True when σ is the maximally mixed state within `tol`.
    pub fn is_maximally_mixed(&self, tol: f64) -> bool {
        let d = self.dim() as f64;
        self.eig.values.iter().all(|v| (v - 1.0 / d).abs() <= tol)
    }
}
