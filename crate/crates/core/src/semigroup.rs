//! Detailed-balance Lindbladians: construction from jumps, the Alicki
//! decomposition, derivations ∂_j, evolution and primitivity.

use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::operator_core::{
    commutator, dagger, diag, frob, identity, re, unvec, vec, CMat, Superop, C64,
};
use crate::sampling;
use crate::state::Reference;

/// Tolerance on the modular-eigenvector relation Δ_σ V = e^{−ω} V.
pub const MODULAR_TOL: f64 = 1e-9;
/// Tolerance on the adjoint pairing of jumps.
pub const PAIRING_TOL: f64 = 1e-9;
/// Relative tolerance of the DBC invariants checked at construction.
pub const DBC_TOL: f64 = 1e-9;
/// Relative tolerances used by the Alicki decomposition.
pub const DECOMPOSE_TOL: f64 = 1e-8;

/// A jump operator with its Bohr frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub v: CMat,
    pub omega: f64,
}

/// Heisenberg or Schrödinger picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

/// Spectral summary of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitivityReport {
    pub kernel_dimension: usize,
    /// `None` when every eigenvalue lies in the kernel (for instance d = 1).
    pub spectral_gap: Option<f64>,
    pub eigenvalue_realness_residual: f64,
}

impl PrimitivityReport {
    pub fn is_primitive(&self) -> bool {
        self.kernel_dimension == 1
    }
}

#[derive(Debug)]
struct Spectrum {
    /// S^{1/2} and S^{−1/2} with S = R_σ the GNS matrix.
    s_half: CMat,
    s_half_inv: CMat,
    values: Vec<f64>,
    vectors: CMat,
    /// max |M − M†| of the symmetrized generator.
    asymmetry: f64,
}

/// A σ-detailed-balance Lindbladian with its jump representation.
#[derive(Debug)]
pub struct DbcLindbladian {
    pub reference: Reference,
    pub jumps: Vec<JumpTerm>,
    /// Heisenberg generator 𝓛.
    pub generator: Superop,
    /// Hilbert–Schmidt adjoint 𝓛†.
    pub dual_generator: Superop,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for DbcLindbladian {
    fn clone(&self) -> Self {
        DbcLindbladian {
            reference: self.reference.clone(),
            jumps: self.jumps.clone(),
            generator: self.generator.clone(),
            dual_generator: self.dual_generator.clone(),
            spectrum: OnceLock::new(),
        }
    }
}

/// Superoperator of X ↦ Σ_j e^{−ω_j/2} V_j†[X, V_j] + e^{ω_j/2}[V_j, X] V_j†.
pub fn jump_generator(d: usize, jumps: &[JumpTerm]) -> Superop {
    let mut m = CMat::zeros(d * d, d * d);
    let id = identity(d);
    for j in jumps {
        let v = &j.v;
        let vd = v.adjoint();
        let a = re((-j.omega / 2.0).exp());
        let b = re((j.omega / 2.0).exp());
        m += (v.transpose().kronecker(&vd) - id.kronecker(&(&vd * v))) * a;
        m += (vd.transpose().kronecker(v) - (v * &vd).transpose().kronecker(&id)) * b;
    }
    Superop::new(d, m)
}

fn find_partner(jumps: &[JumpTerm], j: &JumpTerm) -> bool {
    let vd = j.v.adjoint();
    let scale = 1.0 + frob(&j.v);
    jumps
        .iter()
        .any(|k| (k.omega + j.omega).abs() <= PAIRING_TOL && frob(&(&k.v - &vd)) <= PAIRING_TOL * scale)
}

/// Append (V†, −ω) for every jump whose adjoint partner is missing.
pub fn close_pairs(jumps: &[JumpTerm]) -> Vec<JumpTerm> {
    let mut out = jumps.to_vec();
    for j in jumps {
        if !find_partner(&out, j) {
            out.push(JumpTerm { v: j.v.adjoint(), omega: -j.omega });
        }
    }
    out
}

/// Check that each jump is a traceless modular eigenvector.
pub fn validate_jumps(reference: &Reference, jumps: &[JumpTerm]) -> Result<()> {
    let d = reference.dim();
    let sinv = reference.pow(-1.0);
    for (index, j) in jumps.iter().enumerate() {
        if j.v.nrows() != d || j.v.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: j.v.nrows() });
        }
        let n = frob(&j.v);
        let trace = j.v.trace().norm();
        if trace > 1e-10 * n.max(f64::MIN_POSITIVE) {
            return Err(Error::NotTraceless { index, trace });
        }
        let delta = &reference.sigma * &j.v * &sinv;
        let residual = frob(&(delta - &j.v * re((-j.omega).exp())));
        if residual > MODULAR_TOL * n.max(f64::MIN_POSITIVE) {
            return Err(Error::NotModularEigenvector { index, residual: residual / n });
        }
    }
    Ok(())
}

/// Residuals of the DBC invariants, each relative to max(1, ‖𝓛‖).
#[derive(Debug, Clone, Copy)]
pub struct DbcResiduals {
    pub unital: f64,
    pub invariant_state: f64,
    pub gns: f64,
    pub modular: f64,
}

impl DbcResiduals {
    pub fn max(&self) -> f64 {
        self.unital.max(self.invariant_state).max(self.gns).max(self.modular)
    }
}

pub fn dbc_residuals(reference: &Reference, generator: &Superop) -> DbcResiduals {
    let d = reference.dim();
    let scale = generator.norm().max(1.0);
    let s = Superop::right(&reference.sigma);
    let gns = frob(&(&s.matrix * &generator.matrix - generator.matrix.adjoint() * &s.matrix)) / scale;
    let modular_op = Superop::sandwich(&reference.sigma, &reference.pow(-1.0));
    let modular = frob(&(&modular_op.matrix * &generator.matrix - &generator.matrix * &modular_op.matrix)) / scale;
    DbcResiduals {
        unital: frob(&generator.apply(&identity(d))) / scale,
        invariant_state: frob(&generator.adjoint().apply(&reference.sigma)) / scale,
        gns,
        modular,
    }
}

impl DbcLindbladian {
    /// Assemble from an explicit generator and a jump list that reproduces it.
    fn assemble(reference: Reference, jumps: Vec<JumpTerm>, generator: Superop) -> Result<Self> {
        let res = dbc_residuals(&reference, &generator);
        if res.max() > DBC_TOL {
            return Err(Error::NotDbc(format!(
                "unital {:.2e}, invariant {:.2e}, GNS {:.2e}, modular {:.2e}",
                res.unital, res.invariant_state, res.gns, res.modular
            )));
        }
        let dual_generator = generator.adjoint();
        Ok(DbcLindbladian { reference, jumps, generator, dual_generator, spectrum: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn sigma(&self) -> &CMat {
        &self.reference.sigma
    }

    /// 𝓛X.
    pub fn apply(&self, x: &CMat) -> CMat {
        self.generator.apply(x)
    }

    /// 𝓛†ρ.
    pub fn apply_dual(&self, rho: &CMat) -> CMat {
        self.dual_generator.apply(rho)
    }

    /// The same dynamics sped up by a factor c > 0 (jumps scale by √c).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let jumps = self
            .jumps
            .iter()
            .map(|j| JumpTerm { v: &j.v * re(c.sqrt()), omega: j.omega })
            .collect();
        DbcLindbladian::assemble(self.reference.clone(), jumps, self.generator.scale(c))
    }

    pub fn require_jumps(&self) -> Result<()> {
        if self.jumps.is_empty() {
            Err(Error::NoJumps)
        } else {
            Ok(())
        }
    }

    fn jump(&self, j: usize) -> Result<&JumpTerm> {
        self.jumps.get(j).ok_or(Error::IndexOutOfRange { index: j, len: self.jumps.len() })
    }

    /// ∂_j X = [V_j, X].
    pub fn partial(&self, j: usize, x: &CMat) -> Result<CMat> {
        Ok(commutator(&self.jump(j)?.v, x))
    }

    /// KMS adjoint ∂†_{j,σ} B = e^{−ω/2} V† B − e^{ω/2} B V†.
    pub fn partial_adjoint_kms(&self, j: usize, b: &CMat) -> Result<CMat> {
        let jt = self.jump(j)?;
        let vd = jt.v.adjoint();
        Ok(&vd * b * re((-jt.omega / 2.0).exp()) - b * &vd * re((jt.omega / 2.0).exp()))
    }

    /// Hilbert–Schmidt adjoint ∂_j† B = V† B − B V†.
    pub fn partial_adjoint(&self, j: usize, b: &CMat) -> Result<CMat> {
        let vd = self.jump(j)?.v.adjoint();
        Ok(&vd * b - b * &vd)
    }

    /// ∇X = (∂_1 X, …, ∂_J X).
    pub fn gradient(&self, x: &CMat) -> Vec<CMat> {
        self.jumps.iter().map(|j| commutator(&j.v, x)).collect()
    }

    /// div B = −Σ_j ∂_j† B_j.
    pub fn divergence(&self, b: &[CMat]) -> Result<CMat> {
        if b.len() != self.jumps.len() {
            return Err(Error::DimensionMismatch { expected: self.jumps.len(), found: b.len() });
        }
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (j, bj) in b.iter().enumerate() {
            out -= self.partial_adjoint(j, bj)?;
        }
        Ok(out)
    }

    fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let d = self.dim();
            let e = &self.reference.eig;
            let sh = e.map(f64::sqrt);
            let shi = e.map(|x| 1.0 / x.sqrt());
            let s_half = sh.transpose().kronecker(&identity(d));
            let s_half_inv = shi.transpose().kronecker(&identity(d));
            let m = &s_half * &self.generator.matrix * &s_half_inv;
            let asymmetry = crate::operator_core::herm_residual(&m);
            let eig = crate::operator_core::eigh_sym(&m);
            Spectrum { s_half, s_half_inv, values: eig.values, vectors: eig.vectors, asymmetry }
        })
    }

    /// Superoperator e^{t𝓛}.
    pub fn semigroup(&self, t: f64) -> Superop {
        let sp = self.spectrum();
        let scale = sp.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if sp.asymmetry > DECOMPOSE_TOL * scale {
            return Superop::new(self.dim(), (&self.generator.matrix * re(t)).exp());
        }
        let mut v = sp.vectors.clone();
        for (k, &l) in sp.values.iter().enumerate() {
            let w = re((t * l).exp());
            v.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        let core = v * sp.vectors.adjoint();
        Superop::new(self.dim(), &sp.s_half_inv * core * &sp.s_half)
    }

    /// 𝓟_t X (Heisenberg) or 𝓟_t† ρ (Schrödinger).
    pub fn evolve(&self, t: f64, picture: Picture, x: &CMat) -> Result<CMat> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        let p = self.semigroup(t);
        let v = vec(x);
        let out = match picture {
            Picture::Heisenberg => &p.matrix * v,
            Picture::Schrodinger => p.matrix.adjoint() * v,
        };
        Ok(unvec(&out, self.dim()))
    }

    /// Kernel dimension, spectral gap and realness residual of 𝓛.
    pub fn primitivity(&self) -> PrimitivityReport {
        self.primitivity_with(1e-9)
    }

    pub fn primitivity_with(&self, rel_threshold: f64) -> PrimitivityReport {
        let sp = self.spectrum();
        let scale = sp.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let thr = rel_threshold * scale;
        let kernel_dimension = sp.values.iter().filter(|v| v.abs() <= thr).count();
        let spectral_gap = sp
            .values
            .iter()
            .filter(|v| v.abs() > thr)
            .map(|v| -v)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
        PrimitivityReport {
            kernel_dimension,
            spectral_gap,
            eigenvalue_realness_residual: sp.asymmetry / scale.max(1.0),
        }
    }

    /// Spectral gap, failing on non-primitive generators.
    pub fn gap(&self) -> Result<f64> {
        let r = self.primitivity();
        match (r.is_primitive(), r.spectral_gap) {
            (true, Some(g)) => Ok(g),
            _ => Err(Error::NotPrimitive { kernel_dimension: r.kernel_dimension }),
        }
    }

    /// Eigenvector of −𝓛 for the spectral gap (traceless Hermitian, unit σ-KMS norm up to scale).
    pub fn gap_eigenvector(&self) -> Result<CMat> {
        let g = self.gap()?;
        let sp = self.spectrum();
        let d = self.dim();
        let k = sp
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 + g).abs().total_cmp(&(b.1 + g).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let w = &sp.s_half_inv * sp.vectors.column(k);
        let x = unvec(&w, d);
        let h = crate::operator_core::herm_part(&x);
        let a = crate::operator_core::herm_part(&(x * C64::new(0.0, 1.0)));
        Ok(if frob(&h) >= frob(&a) { h } else { a })
    }
}

/// Build 𝓛 from jumps, completing adjoint pairs where needed.
pub fn build_from_jumps(sigma: &CMat, jumps: &[JumpTerm]) -> Result<DbcLindbladian> {
    let reference = Reference::new(sigma)?;
    validate_jumps(&reference, jumps)?;
    let jumps = close_pairs(jumps);
    let generator = jump_generator(reference.dim(), &jumps);
    DbcLindbladian::assemble(reference, jumps, generator)
}

/// Generalized depolarizing generator 𝓛X = γ(tr(σX)I − X).
pub fn depolarizing_generator(sigma: &CMat, gamma: f64) -> Superop {
    let d = sigma.nrows();
    let vi = vec(&identity(d));
    let vs = vec(sigma);
    Superop::new(d, (&vi * vs.adjoint() - identity(d * d)) * re(gamma))
}

/// Generalized depolarizing semigroup with rate γ.
pub fn depolarizing(sigma: &CMat, gamma: f64) -> Result<DbcLindbladian> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let reference = Reference::new(sigma)?;
    let generator = depolarizing_generator(sigma, gamma);
    let jumps = alicki_decompose(&generator, sigma)?;
    DbcLindbladian::assemble(reference, jumps, generator)
}

/// Random DBC generator from matrix units in σ's eigenbasis plus diagonal jumps.
pub fn random_dbc(sigma: &CMat, num_offdiag_pairs: usize, num_diag: usize, seed: u64) -> Result<DbcLindbladian> {
    let reference = Reference::new(sigma)?;
    let d = reference.dim();
    let w = reference.eig.vectors.clone();
    let s = reference.eig.values.clone();
    let mut rng = sampling::rng(seed);

    let mut all: Vec<(usize, usize)> = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            all.push((i, j));
        }
    }
    let want = num_offdiag_pairs.min(all.len());
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    if want + 1 >= d && d > 1 {
        // random spanning tree first
        let mut perm: Vec<usize> = (0..d).collect();
        for k in (1..d).rev() {
            let r = rng.random_range(0..=k);
            perm.swap(k, r);
        }
        for k in 1..d {
            let parent = perm[rng.random_range(0..k)];
            let (a, b) = (perm[k].min(parent), perm[k].max(parent));
            chosen.push((a, b));
        }
    }
    while chosen.len() < want {
        let cand = all[rng.random_range(0..all.len())];
        if !chosen.contains(&cand) {
            chosen.push(cand);
        }
    }

    let mut jumps = Vec::new();
    for &(i, j) in &chosen {
        let (a, b) = if rng.random::<bool>() { (i, j) } else { (j, i) };
        let scale = 0.5 + rng.random::<f64>();
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * rng.random::<f64>());
        let mut u = CMat::zeros(d, d);
        u[(a, b)] = phase * re(scale);
        jumps.push(JumpTerm { v: &w * u * w.adjoint(), omega: (s[b] / s[a]).ln() });
    }
    for _ in 0..num_diag {
        if d < 2 {
            break;
        }
        let g: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = g.iter().sum::<f64>() / d as f64;
        let centered: Vec<f64> = g.iter().map(|x| x - mean).collect();
        let n = centered.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let scale = 0.5 + rng.random::<f64>();
        let vals: Vec<f64> = centered.iter().map(|x| x * scale / n).collect();
        jumps.push(JumpTerm { v: &w * diag(&vals) * w.adjoint(), omega: 0.0 });
    }
    build_from_jumps(sigma, &jumps)
}

/// Orthonormal basis of traceless diagonal matrices (generalized Gell-Mann).
fn diagonal_basis(d: usize) -> Vec<Vec<f64>> {
    (1..d)
        .map(|k| {
            let n = ((k * (k + 1)) as f64).sqrt();
            (0..d)
                .map(|i| if i < k { 1.0 / n } else if i == k { -(k as f64) / n } else { 0.0 })
                .collect()
        })
        .collect()
}

/// GNS-antisymmetric part (G − S⁻¹G†S)/2.
fn gns_anti(g: &CMat, s: &CMat, s_inv: &CMat) -> CMat {
    (g - s_inv * g.adjoint() * s) * re(0.5)
}

/// Relative misfit of the best Hamiltonian explanation of an antisymmetric defect.
fn coherent_misfit(anti: &CMat, s: &CMat, s_inv: &CMat, d: usize) -> f64 {
    // Hermitian basis: E_aa, (E_ab + E_ba)/√2, i(E_ab − E_ba)/√2
    let mut basis = Vec::new();
    for a in 0..d {
        for b in a..d {
            if a == b {
                let mut h = CMat::zeros(d, d);
                h[(a, a)] = re(1.0);
                basis.push(h);
            } else {
                let mut h = CMat::zeros(d, d);
                h[(a, b)] = re(1.0);
                h[(b, a)] = re(1.0);
                basis.push(h.clone());
                let mut k = CMat::zeros(d, d);
                k[(a, b)] = C64::new(0.0, -1.0);
                k[(b, a)] = C64::new(0.0, 1.0);
                basis.push(k);
            }
        }
    }
    let rows = 2 * anti.len();
    let mut a_mat = nalgebra::DMatrix::<f64>::zeros(rows, basis.len());
    for (c, h) in basis.iter().enumerate() {
        let ad = (Superop::left(h).sub(&Superop::right(h))).matrix * C64::new(0.0, 1.0);
        let col = gns_anti(&ad, s, s_inv);
        for (r, z) in col.iter().enumerate() {
            a_mat[(2 * r, c)] = z.re;
            a_mat[(2 * r + 1, c)] = z.im;
        }
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
    for (r, z) in anti.iter().enumerate() {
        rhs[2 * r] = z.re;
        rhs[2 * r + 1] = z.im;
    }
    let svd = a_mat.clone().svd(true, true);
    let Ok(x) = svd.solve(&rhs, 1e-12) else { return f64::INFINITY };
    (&a_mat * x - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE)
}

/// Recover jumps (V_j, ω_j) whose assembled generator reproduces `generator`.
pub fn alicki_decompose(generator: &Superop, sigma: &CMat) -> Result<Vec<JumpTerm>> {
    let reference = Reference::new(sigma)?;
    let d = reference.dim();
    if generator.dim != d {
        return Err(Error::DimensionMismatch { expected: d, found: generator.dim });
    }
    let norm = generator.norm();
    if norm == 0.0 {
        return Ok(Vec::new());
    }

    // detailed balance first; a purely coherent defect is reported separately
    let s = Superop::right(sigma);
    let s_inv = Superop::right(&reference.pow(-1.0));
    let gns = frob(&(&s.matrix * &generator.matrix - generator.matrix.adjoint() * &s.matrix)) / norm.max(1.0);
    if gns > DECOMPOSE_TOL {
        let anti = gns_anti(&generator.matrix, &s.matrix, &s_inv.matrix);
        if coherent_misfit(&anti, &s.matrix, &s_inv.matrix, d) < 1e-6 {
            return Err(Error::ResidualTooLarge(format!(
                "coherent (Hamiltonian) component of relative size {:.3e}",
                frob(&anti) / norm
            )));
        }
        return Err(Error::NotDbc(format!("GNS self-adjointness residual {gns:.3e}")));
    }

    let w = reference.eig.vectors.clone();
    let sv = reference.eig.values.clone();
    // generator in σ's eigenbasis
    let to = w.transpose().kronecker(&w.adjoint());
    let from = w.map(|z| z.conj()).kronecker(&w);
    let m = &to * &generator.matrix * &from;

    // Kossakowski tensor in the matrix-unit basis, K[(a,b),(c,e)] = M[e d + b, c d + a]
    let dd = d * d;
    let mut k = CMat::zeros(dd, dd);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    k[(a * d + b, c * d + e)] = m[(e * d + b, c * d + a)];
                }
            }
        }
    }

    // orthonormal operator basis: I/√d, traceless diagonals, off-diagonal units
    let mut phi = CMat::zeros(dd, dd);
    let mut group_ratio: Vec<f64> = vec![f64::NAN];
    for a in 0..d {
        phi[(a * d + a, 0)] = re(1.0 / (d as f64).sqrt());
    }
    let mut col = 1;
    for h in diagonal_basis(d) {
        for a in 0..d {
            phi[(a * d + a, col)] = re(h[a]);
        }
        group_ratio.push(0.0);
        col += 1;
    }
    for a in 0..d {
        for b in 0..d {
            if a != b {
                phi[(a * d + b, col)] = re(1.0);
                group_ratio.push((sv[a] / sv[b]).ln());
                col += 1;
            }
        }
    }
    let kc = phi.transpose() * &k * phi.map(|z| z.conj());

    // cluster basis indices 1.. by log modular eigenvalue
    let mut order: Vec<usize> = (1..dd).collect();
    order.sort_by(|&x, &y| group_ratio[x].total_cmp(&group_ratio[y]));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for idx in order {
        let r = group_ratio[idx];
        match groups.last_mut() {
            Some((r0, members)) if (r - *r0).abs() <= MODULAR_TOL => members.push(idx),
            _ => groups.push((r, vec![idx])),
        }
    }

    let kc_scale = frob(&kc).max(f64::MIN_POSITIVE);
    let mut jumps = Vec::new();
    for (logr, members) in &groups {
        if *logr < -MODULAR_TOL {
            continue; // covered by adjoint partners of the r > 1 groups
        }
        let n = members.len();
        let mut block = CMat::zeros(n, n);
        for (p, &mu) in members.iter().enumerate() {
            for (q, &nu) in members.iter().enumerate() {
                block[(p, q)] = kc[(mu, nu)];
            }
        }
        let eb = crate::operator_core::eigh_sym(&block);
        let discarded: f64 = eb.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
        if discarded > DECOMPOSE_TOL * kc_scale {
            return Err(Error::ResidualTooLarge(format!(
                "Kossakowski block has negative weight {discarded:.3e}"
            )));
        }
        let top = eb.max().max(0.0);
        for (kk, &gk) in eb.values.iter().enumerate() {
            if gk <= 1e-13 * top.max(kc_scale * 1e-3) || gk <= 0.0 {
                continue;
            }
            let mut lt = CMat::zeros(d, d);
            for (p, &nu) in members.iter().enumerate() {
                let coef = eb.vectors[(p, kk)].conj() * re(gk.sqrt());
                for a in 0..d {
                    for b in 0..d {
                        let f = phi[(a * d + b, nu)];
                        if f != re(0.0) {
                            lt[(a, b)] += coef * f;
                        }
                    }
                }
            }
            let l = &w * lt * w.adjoint();
            let omega = if logr.abs() <= MODULAR_TOL { 0.0 } else { *logr };
            if omega == 0.0 {
                let v = dagger(&l) * re(0.5);
                jumps.push(JumpTerm { v: v.adjoint(), omega: 0.0 });
                jumps.push(JumpTerm { v, omega: 0.0 });
            } else {
                let v = dagger(&l) * re(1.0 / (2f64.sqrt() * (omega / 4.0).exp()));
                jumps.push(JumpTerm { v: v.adjoint(), omega: -omega });
                jumps.push(JumpTerm { v, omega });
            }
        }
    }

    let rebuilt = jump_generator(d, &jumps);
    let residual = frob(&(&rebuilt.matrix - &generator.matrix)) / norm;
    if residual > DECOMPOSE_TOL {
        return Err(Error::ResidualTooLarge(format!("reconstruction residual {residual:.3e}")));
    }
    Ok(jumps)
}

/// Relative Frobenius distance between two generators.
pub fn generator_distance(a: &Superop, b: &Superop) -> f64 {
    frob(&(&a.matrix - &b.matrix)) / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Choi matrix Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|) of a superoperator.
pub fn choi(phi: &Superop) -> CMat {
    let d = phi.dim;
    let mut c = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = re(1.0);
            let out = phi.apply(&e);
            for a in 0..d {
                for b in 0..d {
                    c[(i * d + a, j * d + b)] = out[(a, b)];
                }
            }
        }
    }
    c
}

/// Smallest eigenvalue of a Hermitian matrix (no symmetry check).
pub fn min_eig(a: &CMat) -> f64 {
    crate::operator_core::eigh_sym(a).min()
}
