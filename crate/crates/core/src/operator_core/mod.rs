//! Dense complex linear algebra: Hermitian eigensolver, functional calculus,
//! superoperators on column-stacked operators and double operator sums.

mod eig;
mod inner;
mod kernel;
mod schur;
mod superop;

pub use eig::{abs_power, eigh, eigh_sym, matrix_function, psd_power, Eigh, PSD_FLOOR};
pub use inner::{inner_product, InnerKind};
pub use kernel::{Scalar, Scalar2, DEGENERACY_TOL};
pub use schur::{double_sum_apply, partial_divdiff_apply, DoubleSum, Which};
pub use superop::{build_super, unvec, vec, SuperKind, Superop};

use nalgebra::DMatrix;

/// Double-precision complex scalar.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix (column-major storage).
pub type CMat = DMatrix<C64>;

/// Shorthand for a real complex number.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Identity matrix of size `d`.
pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Conjugate transpose.
#[inline]
pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

/// Trace.
pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hilbert–Schmidt inner product tr(A†B).
pub fn hs(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// max |A − A†|.
pub fn herm_residual(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            r = r.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    r
}

/// Hermitian part (A + A†)/2.
pub fn herm_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * re(0.5)
}

/// Commutator [A, B] = AB − BA.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Diagonal matrix with real entries.
pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    let mut m = CMat::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = re(*v);
    }
    m
}

/// Matrix unit |i⟩⟨j| of size d.
pub fn unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = re(1.0);
    m
}

/// The three Pauli matrices (x, y, z).
pub fn paulis() -> [CMat; 3] {
    let z = C64::new(0.0, 0.0);
    let o = re(1.0);
    let i = C64::new(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[z, o, o, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Project onto traceless Hermitian operators.
pub fn traceless_herm(a: &CMat) -> CMat {
    let d = a.nrows();
    let h = herm_part(a);
    let t = h.trace() / re(d as f64);
    h - identity(d) * t
}

/// Hilbert–Schmidt orthonormal basis of traceless Hermitian d×d matrices.
pub fn traceless_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let mut a = CMat::zeros(d, d);
            a[(i, j)] = re(s);
            a[(j, i)] = re(s);
            out.push(a);
            let mut b = CMat::zeros(d, d);
            b[(i, j)] = C64::new(0.0, -s);
            b[(j, i)] = C64::new(0.0, s);
            out.push(b);
        }
    }
    for k in 1..d {
        let n = ((k * (k + 1)) as f64).sqrt();
        let v: Vec<f64> = (0..d)
            .map(|i| match i.cmp(&k) {
                std::cmp::Ordering::Less => 1.0 / n,
                std::cmp::Ordering::Equal => -(k as f64) / n,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        out.push(diag(&v));
    }
    out
}
