//! Double and triple operator sums over rank-one spectral projections.

use super::{eigh, re, CMat, Eigh, Scalar2};
use crate::error::{Error, Result};

/// Which variable a partial divided difference acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

fn check_domain(f: &Scalar2, a: &Eigh, b: &Eigh) -> Result<()> {
    for &l in &a.values {
        if !f.in_domain_x(l) {
            return Err(Error::DomainViolation { kernel: f.name(), value: l });
        }
    }
    for &m in &b.values {
        if !f.in_domain_y(m) {
            return Err(Error::DomainViolation { kernel: f.name(), value: m });
        }
    }
    Ok(())
}

/// Precomputed Schur multiplier f(A, B) = Σ f(λ_i, μ_k) L_{A_i} R_{B_k}.
#[derive(Debug, Clone)]
pub struct DoubleSum {
    pub a: Eigh,
    pub b: Eigh,
    /// coeff[(i, k)] = f(λ_i, μ_k).
    pub coeff: nalgebra::DMatrix<f64>,
}

impl DoubleSum {
    pub fn new(f: &Scalar2, a: Eigh, b: Eigh) -> Result<Self> {
        check_domain(f, &a, &b)?;
        let (n, m) = (a.dim(), b.dim());
        let mut coeff = nalgebra::DMatrix::zeros(n, m);
        for i in 0..n {
            for k in 0..m {
                coeff[(i, k)] = f.eval(a.values[i], b.values[k]);
            }
        }
        Ok(DoubleSum { a, b, coeff })
    }

    pub fn from_matrices(f: &Scalar2, a: &CMat, b: &CMat) -> Result<Self> {
        DoubleSum::new(f, eigh(a)?, eigh(b)?)
    }

    /// Same spectral data with the coefficients replaced by their reciprocals.
    pub fn inverse(&self) -> DoubleSum {
        DoubleSum {
            a: self.a.clone(),
            b: self.b.clone(),
            coeff: self.coeff.map(|c| 1.0 / c),
        }
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        let mut t = self.a.vectors.adjoint() * x * &self.b.vectors;
        for i in 0..t.nrows() {
            for k in 0..t.ncols() {
                t[(i, k)] *= re(self.coeff[(i, k)]);
            }
        }
        &self.a.vectors * t * self.b.vectors.adjoint()
    }
}

/// f(A, B)(X) with eigenprojections of Hermitian A and B.
pub fn double_sum_apply(f: &Scalar2, a: &CMat, b: &CMat, x: &CMat) -> Result<CMat> {
    Ok(DoubleSum::from_matrices(f, a, b)?.apply(x))
}

/// Triple sum (δ₁f)((A,A),B)[X,Y] or (δ₂f)(A,(B,B))[X,Y].
///
/// First:  Σ δ₁f(λ_a, λ_b, μ_c) A_a X A_b Y B_c.
/// Second: Σ δ₂f(λ_a, μ_b, μ_c) A_a X B_b Y B_c.
pub fn partial_divdiff_apply(
    f: &Scalar2,
    which: Which,
    a: &CMat,
    b: &CMat,
    x: &CMat,
    y: &CMat,
) -> Result<CMat> {
    let ea = eigh(a)?;
    let eb = eigh(b)?;
    check_domain(f, &ea, &eb)?;
    Ok(partial_divdiff_eig(f, which, &ea, &eb, x, y))
}

pub(crate) fn partial_divdiff_eig(
    f: &Scalar2,
    which: Which,
    ea: &Eigh,
    eb: &Eigh,
    x: &CMat,
    y: &CMat,
) -> CMat {
    let n = ea.dim();
    let (xt, yt) = match which {
        Which::First => (ea.to_basis(x), ea.vectors.adjoint() * y * &eb.vectors),
        Which::Second => (ea.vectors.adjoint() * x * &eb.vectors, eb.to_basis(y)),
    };
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for c in 0..n {
            let mut acc = super::C64::new(0.0, 0.0);
            for b in 0..n {
                let w = match which {
                    Which::First => f.delta1(ea.values[a], ea.values[b], eb.values[c]),
                    Which::Second => f.delta2(ea.values[a], eb.values[b], eb.values[c]),
                };
                acc += xt[(a, b)] * yt[(b, c)] * w;
            }
            out[(a, c)] = acc;
        }
    }
    &ea.vectors * out * eb.vectors.adjoint()
}
