//! Superoperators as d²×d² matrices on column-stacked operators,
//! so that vec(AXB) = (Bᵀ ⊗ A) vec(X).

use nalgebra::DVector;

use super::eig::eigh_sym;
use super::{identity, re, CMat, Scalar, C64};
use crate::error::{Error, Result};

/// Column-stacking vectorization.
pub fn vec(x: &CMat) -> DVector<C64> {
    DVector::from_column_slice(x.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &DVector<C64>, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Linear map on d×d operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superop {
    pub dim: usize,
    pub matrix: CMat,
}

impl Superop {
    pub fn new(dim: usize, matrix: CMat) -> Self {
        debug_assert_eq!(matrix.nrows(), dim * dim);
        Superop { dim, matrix }
    }

    pub fn zero(dim: usize) -> Self {
        Superop::new(dim, CMat::zeros(dim * dim, dim * dim))
    }

    pub fn identity(dim: usize) -> Self {
        Superop::new(dim, identity(dim * dim))
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        unvec(&(&self.matrix * vec(x)), self.dim)
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &Superop) -> Superop {
        Superop::new(self.dim, &self.matrix * &other.matrix)
    }

    /// Adjoint with respect to the Hilbert–Schmidt inner product.
    pub fn adjoint(&self) -> Superop {
        Superop::new(self.dim, self.matrix.adjoint())
    }

    pub fn scale(&self, c: f64) -> Superop {
        Superop::new(self.dim, &self.matrix * re(c))
    }

    pub fn add(&self, other: &Superop) -> Superop {
        Superop::new(self.dim, &self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Superop) -> Superop {
        Superop::new(self.dim, &self.matrix - &other.matrix)
    }

    /// Frobenius norm of the d²×d² matrix.
    pub fn norm(&self) -> f64 {
        super::frob(&self.matrix)
    }

    /// X ↦ AX.
    pub fn left(a: &CMat) -> Superop {
        let d = a.nrows();
        Superop::new(d, identity(d).kronecker(a))
    }

    /// X ↦ XB.
    pub fn right(b: &CMat) -> Superop {
        let d = b.nrows();
        Superop::new(d, b.transpose().kronecker(&identity(d)))
    }

    /// X ↦ AXB.
    pub fn sandwich(a: &CMat, b: &CMat) -> Superop {
        Superop::new(a.nrows(), b.transpose().kronecker(a))
    }
}

/// Constructors accepted by [`build_super`].
#[derive(Debug, Clone)]
pub enum SuperKind<'a> {
    Left(&'a CMat),
    Right(&'a CMat),
    /// Δ_σ X = σ X σ⁻¹.
    Modular(&'a CMat),
    /// X ↦ σ^{s/2} X σ^{s/2}.
    GammaPower(&'a CMat, f64),
    /// J_σ^f = R_σ f(Δ_σ).
    JKernel(&'a CMat, &'a Scalar),
}

fn require_full_rank(sigma: &CMat) -> Result<super::Eigh> {
    let e = eigh_sym(sigma);
    if e.min() <= crate::STRICT_FLOOR {
        return Err(Error::SingularState { min_eig: e.min() });
    }
    Ok(e)
}

/// f(Δ_σ) assembled in the eigenbasis of σ, where Δ_σ acts on |i⟩⟨k| by σ_i/σ_k.
pub(crate) fn modular_function(e: &super::Eigh, f: impl Fn(f64) -> f64) -> Superop {
    let d = e.dim();
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        let pi = e.projector(i);
        for k in 0..d {
            let pk = e.projector(k);
            let w = f(e.values[i] / e.values[k]);
            m += pk.transpose().kronecker(&pi) * re(w);
        }
    }
    Superop::new(d, m)
}

pub fn build_super(kind: SuperKind<'_>) -> Result<Superop> {
    Ok(match kind {
        SuperKind::Left(a) => Superop::left(a),
        SuperKind::Right(b) => Superop::right(b),
        SuperKind::Modular(s) => {
            let e = require_full_rank(s)?;
            let inv = e.map(|x| 1.0 / x);
            Superop::sandwich(s, &inv)
        }
        SuperKind::GammaPower(s, t) => {
            let e = require_full_rank(s)?;
            let h = e.map(|x| x.powf(t / 2.0));
            Superop::sandwich(&h, &h)
        }
        SuperKind::JKernel(s, f) => {
            let e = require_full_rank(s)?;
            for i in 0..e.dim() {
                for k in 0..e.dim() {
                    let r = e.values[i] / e.values[k];
                    if !f.in_domain(r) {
                        return Err(Error::DomainViolation { kernel: f.name(), value: r });
                    }
                }
            }
            Superop::right(s).compose(&modular_function(&e, |x| f.eval(x)))
        }
    })
}
