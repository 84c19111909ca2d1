use super::{herm_part, herm_residual, max_abs, re, CMat, Scalar};
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors.
    pub vectors: CMat,
}

/// Eigenvalues in (−PSD_FLOOR, 0) are clamped when a PSD input is expected.
pub const PSD_FLOOR: f64 = 1e-10;

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(a: &CMat) -> Result<Eigh> {
    let residual = herm_residual(a);
    if residual > 1e-12 * (1.0 + max_abs(a)) {
        return Err(Error::NonHermitian { residual });
    }
    Ok(eigh_sym(a))
}

/// Same as [`eigh`] but symmetrizes instead of checking.
pub fn eigh_sym(a: &CMat) -> Eigh {
    let n = a.nrows();
    let se = herm_part(a).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (new, &old) in idx.iter().enumerate() {
        vectors.set_column(new, &se.eigenvectors.column(old));
    }
    Eigh { values, vectors }
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// V diag(f(λ)) V†.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let v = &self.vectors;
        let mut scaled = v.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let fk = re(f(l));
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= fk);
        }
        scaled * v.adjoint()
    }

    /// Rank-one spectral projection onto the k-th eigenvector.
    pub fn projector(&self, k: usize) -> CMat {
        let c = self.vectors.column(k);
        c * c.adjoint()
    }

    /// Express `x` in the eigenbasis: V† X V.
    pub fn to_basis(&self, x: &CMat) -> CMat {
        self.vectors.adjoint() * x * &self.vectors
    }

    /// Inverse of [`Eigh::to_basis`].
    pub fn from_basis(&self, x: &CMat) -> CMat {
        &self.vectors * x * self.vectors.adjoint()
    }

    /// Apply a scalar kernel, checking its domain on the spectrum.
    pub fn apply(&self, f: &Scalar) -> Result<CMat> {
        for &l in &self.values {
            if !f.in_domain(l) {
                return Err(Error::DomainViolation {
                    kernel: f.name(),
                    value: l,
                });
            }
        }
        Ok(self.map(|x| f.eval(x)))
    }

    /// Clamp slightly negative eigenvalues to zero; reject larger violations.
    pub fn clamp_psd(mut self) -> Result<Self> {
        let m = self.min();
        if m < -PSD_FLOOR {
            return Err(Error::NotPsd { min_eig: m });
        }
        for v in &mut self.values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(self)
    }
}

/// f(A) by the spectral theorem.
pub fn matrix_function(a: &CMat, f: &Scalar) -> Result<CMat> {
    eigh(a)?.apply(f)
}

/// A^r for a PSD matrix (negative r requires full rank).
pub fn psd_power(a: &CMat, r: f64) -> Result<CMat> {
    let e = eigh_sym(a).clamp_psd()?;
    if r < 0.0 && e.min() <= 0.0 {
        return Err(Error::SingularState { min_eig: e.min() });
    }
    Ok(e.map(|x| if x == 0.0 { 0.0 } else { x.powf(r) }))
}

/// |A|^r = (A†A)^{r/2}.
pub fn abs_power(a: &CMat, r: f64) -> Result<CMat> {
    let g = a.adjoint() * a;
    psd_power(&g, r / 2.0)
}
