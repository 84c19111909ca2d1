//! The noncommutative multiplication [ρ]_{p,ω}, the Onsager operator 𝔇_{p,ρ},
//! the induced Riemannian metric, a discretized Benamou–Brenier solver for
//! W_{2,p} and geodesic shooting.

use nalgebra::DVector;

use crate::dirichlet::scaled;
use crate::error::{Error, Result};
use crate::operator_core::{
    eigh, eigh_sym, herm_part, hs, identity, re, traceless_basis, unit, unvec, vec, CMat, DoubleSum, Eigh, Scalar2, Superop,
};
use crate::semigroup::DbcLindbladian;
use crate::state::Reference;

/// Trace components above this are rejected by the pseudo-inverse.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn exponent(p: f64) -> f64 {
    (p - 1.0) / p
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("transport exponent must lie in (1,2], got {p}")))
    }
}

/// [ρ]_{p,ω} = Γ_σ^{1/p̂} ∘ θ_p(e^{ω/2p}Y, e^{−ω/2p}Y) ∘ Γ_σ^{1/p̂} with Y = Γ_σ^{−1/p̂}(ρ).
#[derive(Debug, Clone)]
pub struct MetricKernel {
    pub reference: Reference,
    pub p: f64,
    pub omega: f64,
    /// Spectral data of Y.
    pub y: Eigh,
    core: DoubleSum,
}

impl MetricKernel {
    pub fn new(reference: &Reference, rho: &CMat, p: f64, omega: f64) -> Result<Self> {
        check_p(p)?;
        let g = exponent(p);
        let y = eigh(&herm_part(&reference.gamma(-g, rho)))?;
        if y.min() <= 0.0 {
            return Err(Error::SingularState { min_eig: y.min() });
        }
        let s = (omega / (2.0 * p)).exp();
        let core = DoubleSum::new(&Scalar2::theta(p), scaled(&y, s), scaled(&y, 1.0 / s))?;
        Ok(MetricKernel { reference: reference.clone(), p, omega, y, core })
    }

    /// Left and right spectral arguments e^{±ω/2p}Y.
    pub fn arguments(&self) -> (&Eigh, &Eigh) {
        (&self.core.a, &self.core.b)
    }

    pub fn apply(&self, a: &CMat, direction: Direction) -> CMat {
        let g = exponent(self.p);
        let r = &self.reference;
        match direction {
            Direction::Forward => r.gamma(g, &self.core.apply(&r.gamma(g, a))),
            Direction::Inverse => r.gamma(-g, &self.core.inverse().apply(&r.gamma(-g, a))),
        }
    }

    pub fn superop(&self, direction: Direction) -> Superop {
        let d = self.reference.dim();
        let mut m = CMat::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                m.set_column(i + j * d, &vec(&self.apply(&unit(d, i, j), direction)));
            }
        }
        Superop::new(d, m)
    }
}

/// Σ_{i,k} θ_log(e^{ω/2}λ_k, e^{−ω/2}λ_i) E_k A E_i, the logarithmic-mean multiplication by ρ.
pub fn log_mean_kernel_apply(rho: &CMat, omega: f64, a: &CMat) -> Result<CMat> {
    let e = eigh(&herm_part(rho))?;
    if e.min() <= 0.0 {
        return Err(Error::SingularState { min_eig: e.min() });
    }
    let s = (omega / 2.0).exp();
    Ok(DoubleSum::new(&Scalar2::log_mean(), scaled(&e, s), scaled(&e, 1.0 / s))?.apply(a))
}

/// 𝔇_{p,ρ} = Σ_j ∂_j†([ρ]_{p,ω_j} ∂_j ·), assembled with its spectral pseudo-inverse.
#[derive(Debug, Clone)]
pub struct Onsager {
    pub p: f64,
    pub kernels: Vec<MetricKernel>,
    pub matrix: CMat,
    spectrum: Eigh,
    dim: usize,
}

impl Onsager {
    pub fn new(l: &DbcLindbladian, rho: &CMat, p: f64) -> Result<Self> {
        l.require_jumps()?;
        let kernels = l
            .jumps
            .iter()
            .map(|j| MetricKernel::new(&l.reference, rho, p, j.omega))
            .collect::<Result<Vec<_>>>()?;
        let d = l.dim();
        let mut matrix = CMat::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                matrix.set_column(i + j * d, &vec(&apply_with(l, &kernels, &unit(d, i, j))));
            }
        }
        let spectrum = eigh_sym(&herm_part(&matrix));
        Ok(Onsager { p, kernels, matrix, spectrum, dim: d })
    }

    /// The ρ-independent operator with [ρ] replaced by Γ_σ (the p = 2 metric).
    pub fn flat(l: &DbcLindbladian) -> Result<Self> {
        Onsager::new(l, l.sigma(), 2.0)
    }

    pub fn apply(&self, u: &CMat) -> CMat {
        unvec(&(&self.matrix * vec(u)), self.dim)
    }

    /// 𝔇⁻¹ν on the traceless subspace.
    pub fn pinv(&self, nu: &CMat) -> Result<CMat> {
        let t = nu.trace().norm();
        if t > KERNEL_TOL * (1.0 + crate::operator_core::frob(nu)) {
            return Err(Error::KernelComponent(t));
        }
        let e = &self.spectrum;
        let top = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut c = e.vectors.adjoint() * vec(nu);
        for (k, &v) in e.values.iter().enumerate() {
            c[k] = if v > 1e-12 * top { c[k] / re(v) } else { re(0.0) };
        }
        let u = unvec(&(&e.vectors * c), self.dim);
        let m = u.trace() / re(self.dim as f64);
        Ok(u - identity(self.dim) * m)
    }

    /// g_{p,ρ}(ν₁, ν₂) = ⟨𝔇⁻¹ν₁, ν₂⟩.
    pub fn tensor(&self, nu1: &CMat, nu2: &CMat) -> Result<f64> {
        Ok(hs(&self.pinv(nu1)?, nu2).re)
    }

    /// ⟨U, 𝔇U⟩.
    pub fn quadratic(&self, u: &CMat) -> f64 {
        hs(u, &self.apply(u)).re
    }

    /// Nonzero spectrum of 𝔇 (ascending).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }
}

fn apply_with(l: &DbcLindbladian, kernels: &[MetricKernel], u: &CMat) -> CMat {
    let d = l.dim();
    let mut out = CMat::zeros(d, d);
    for (jt, k) in l.jumps.iter().zip(kernels) {
        let v = &jt.v;
        let w = k.apply(&(v * u - u * v), Direction::Forward);
        let vd = v.adjoint();
        out += &vd * &w - &w * &vd;
    }
    out
}

pub fn onsager(l: &DbcLindbladian, rho: &CMat, p: f64) -> Result<Onsager> {
    Onsager::new(l, rho, p)
}

/// Functional derivative δ_ρF_{p,σ}(ρ) = (p−1)^{−1} Γ_σ^{−1/p̂}((Γ_σ^{−1/p̂}ρ)^{p−1}).
pub fn divergence_derivative(reference: &Reference, rho: &CMat, p: f64) -> Result<CMat> {
    check_p(p)?;
    let g = exponent(p);
    let y = eigh(&herm_part(&reference.gamma(-g, rho)))?;
    if y.min() <= 0.0 {
        return Err(Error::SingularState { min_eig: y.min() });
    }
    let yp = y.map(|v| v.powf(p - 1.0));
    Ok(reference.gamma(-g, &yp) * re(1.0 / (p - 1.0)))
}

/// ‖𝔇_{p,ρ}(δ_ρF) + 𝓛†ρ‖_F / ‖𝓛†ρ‖_F (zero at a stationary point).
pub fn grad_flow_residual(l: &DbcLindbladian, rho: &CMat, p: f64) -> Result<f64> {
    let d = onsager(l, rho, p)?;
    let df = divergence_derivative(&l.reference, rho, p)?;
    let flow = l.apply_dual(rho);
    let num = crate::operator_core::frob(&(d.apply(&df) + &flow));
    let den = crate::operator_core::frob(&flow);
    if den <= 1e-14 {
        return Ok(if num <= 1e-12 { 0.0 } else { num });
    }
    Ok(num / den)
}

/// Which form of the kernel derivative to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    First,
    Second,
    Symmetrized,
}

/// Hermitian G with ⟨G, A⟩ = Σ_j ⟨∂_jU, 𝒦^{(i),j}_{ρ,A}[∂_jU]⟩ for Hermitian A.
pub fn kernel_derivative(l: &DbcLindbladian, rho: &CMat, p: f64, u: &CMat, choice: KernelChoice) -> Result<CMat> {
    l.require_jumps()?;
    check_p(p)?;
    let g = exponent(p);
    let r = &l.reference;
    let d = l.dim();
    let y = eigh(&herm_part(&r.gamma(-g, rho)))?;
    if y.min() <= 0.0 {
        return Err(Error::SingularState { min_eig: y.min() });
    }
    let theta = Scalar2::theta(p);
    let e = &y.vectors;
    let mut first = CMat::zeros(d, d);
    let mut second = CMat::zeros(d, d);
    for jt in &l.jumps {
        let s = (jt.omega / (2.0 * p)).exp();
        let la: Vec<f64> = y.values.iter().map(|v| v * s).collect();
        let rb: Vec<f64> = y.values.iter().map(|v| v / s).collect();
        let w = &jt.v * u - u * &jt.v;
        let z = e.adjoint() * r.gamma(g, &w) * e;
        let mut g1 = CMat::zeros(d, d);
        let mut g2 = CMat::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let w1 = theta.delta1(la[a], la[b], rb[c]);
                    g1[(a, b)] += z[(a, c)] * z[(b, c)].conj() * w1;
                    let w2 = theta.delta2(la[a], rb[b], rb[c]);
                    g2[(b, c)] += z[(a, c)] * z[(a, b)].conj() * w2;
                }
            }
        }
        first += r.gamma(-g, &(e * g1 * e.adjoint())) * re(s);
        second += r.gamma(-g, &(e * g2 * e.adjoint())) * re(1.0 / s);
    }
    let (first, second) = (herm_part(&first), herm_part(&second));
    Ok(match choice {
        KernelChoice::First => first,
        KernelChoice::Second => second,
        KernelChoice::Symmetrized => (first + second) * re(0.5),
    })
}

/// δ_ρH for H(ρ, U) = ½⟨𝔇_{p,ρ}U, U⟩.
pub fn hamiltonian_gradient(l: &DbcLindbladian, rho: &CMat, p: f64, u: &CMat) -> Result<CMat> {
    kernel_derivative(l, rho, p, u, KernelChoice::Symmetrized)
}

/// Solver settings for W_{2,p}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub n: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub floor: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { n: 20, max_iters: 5000, tol: 1e-7, floor: 1e-10 }
    }
}

/// A discrete transport path with midpoint momenta.
#[derive(Debug, Clone)]
pub struct TransportPath {
    pub n: usize,
    pub states: Vec<CMat>,
    /// momenta[k][j] = B_{k,j}.
    pub momenta: Vec<Vec<CMat>>,
    /// Per-interval contributions h·g_{γ̄_k}(ν_k, ν_k).
    pub step_actions: Vec<f64>,
    pub action: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl TransportPath {
    /// max_k ‖(γ_{k+1} − γ_k)/h + div B_k‖_F.
    pub fn continuity_residual(&self, l: &DbcLindbladian) -> Result<f64> {
        let h = 1.0 / self.n as f64;
        let mut worst = 0.0f64;
        for k in 0..self.n {
            let v = (&self.states[k + 1] - &self.states[k]) * re(1.0 / h) + l.divergence(&self.momenta[k])?;
            worst = worst.max(crate::operator_core::frob(&v));
        }
        Ok(worst)
    }
}

struct Discretization<'a> {
    l: &'a DbcLindbladian,
    p: f64,
    rho0: CMat,
    rho1: CMat,
    n: usize,
    basis: Vec<CMat>,
    floor: f64,
}

struct Evaluation {
    action: f64,
    grad: DVector<f64>,
    step_actions: Vec<f64>,
    us: Vec<CMat>,
    operators: Vec<Onsager>,
}

impl Discretization<'_> {
    fn states(&self, x: &DVector<f64>) -> Vec<CMat> {
        let d = self.l.dim();
        let m = self.basis.len();
        let mut out = vec![self.rho0.clone()];
        for k in 0..self.n - 1 {
            let mut g = identity(d) * re(1.0 / d as f64);
            for (i, b) in self.basis.iter().enumerate() {
                g += b * re(x[k * m + i]);
            }
            out.push(g);
        }
        out.push(self.rho1.clone());
        out
    }

    fn params(&self, states: &[CMat]) -> DVector<f64> {
        let m = self.basis.len();
        let mut x = DVector::zeros((self.n - 1) * m);
        for k in 0..self.n - 1 {
            for (i, b) in self.basis.iter().enumerate() {
                x[k * m + i] = hs(b, &states[k + 1]).re;
            }
        }
        x
    }

    fn evaluate(&self, x: &DVector<f64>, want_grad: bool) -> Option<Evaluation> {
        let states = self.states(x);
        for g in &states[1..self.n] {
            if eigh_sym(g).min() < self.floor {
                return None;
            }
        }
        let h = 1.0 / self.n as f64;
        let mut action = 0.0;
        let mut step_actions = Vec::with_capacity(self.n);
        let mut us = Vec::with_capacity(self.n);
        let mut dhs = Vec::with_capacity(self.n);
        let mut operators = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let mid = herm_part(&((&states[k] + &states[k + 1]) * re(0.5)));
            let nu = herm_part(&((&states[k + 1] - &states[k]) * re(1.0 / h)));
            let op = Onsager::new(self.l, &mid, self.p).ok()?;
            let u = herm_part(&op.pinv(&nu).ok()?);
            let gk = hs(&u, &nu).re;
            step_actions.push(h * gk);
            action += h * gk;
            if want_grad {
                dhs.push(hamiltonian_gradient(self.l, &mid, self.p, &u).ok()?);
            }
            us.push(u);
            operators.push(op);
        }
        if !action.is_finite() {
            return None;
        }
        let m = self.basis.len();
        let mut grad = DVector::zeros((self.n - 1) * m);
        if want_grad {
            for k in 1..self.n {
                let gm = (&us[k - 1] - &us[k]) * re(2.0) - (&dhs[k - 1] + &dhs[k]) * re(h);
                for (i, b) in self.basis.iter().enumerate() {
                    grad[(k - 1) * m + i] = hs(b, &gm).re;
                }
            }
        }
        Some(Evaluation { action, grad, step_actions, us, operators })
    }
}

fn lbfgs_direction(g: &DVector<f64>, hist: &[(DVector<f64>, DVector<f64>)]) -> DVector<f64> {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y) in hist.iter().rev() {
        let a = s.dot(&q) / y.dot(s);
        q -= y * a;
        alphas.push(a);
    }
    if let Some((s, y)) = hist.last() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = y.dot(&q) / y.dot(s);
        q += s * (a - b);
    }
    -q
}

/// W_{2,p}(ρ₀, ρ₁) by minimizing the discretized action over interior states.
pub fn w2p_solve(
    l: &DbcLindbladian,
    rho0: &CMat,
    rho1: &CMat,
    p: f64,
    opts: &TransportOptions,
) -> Result<(f64, TransportPath)> {
    l.require_jumps()?;
    check_p(p)?;
    crate::state::check_density(rho0)?;
    crate::state::check_density(rho1)?;
    if opts.n < 1 {
        return Err(Error::InvalidArgument("need at least one interval".into()));
    }
    let d = l.dim();
    let n = opts.n;
    if crate::operator_core::frob(&(rho1 - rho0)) < 1e-14 {
        let states = vec![rho0.clone(); n + 1];
        let momenta = vec![vec![CMat::zeros(d, d); l.jumps.len()]; n];
        let path = TransportPath { n, states, momenta, step_actions: vec![0.0; n], action: 0.0, iterations: 0, converged: true };
        return Ok((0.0, path));
    }
    let disc = Discretization {
        l,
        p,
        rho0: herm_part(rho0),
        rho1: herm_part(rho1),
        n,
        basis: traceless_basis(d),
        floor: opts.floor,
    };
    // linear interpolation, nudged toward σ when it touches the boundary
    let mut init: Vec<CMat> = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            rho0 * re(1.0 - s) + rho1 * re(s)
        })
        .collect();
    if (1..n).any(|k| eigh_sym(&init[k]).min() < 1e-6) {
        for (k, g) in init.iter_mut().enumerate().take(n).skip(1) {
            let eta = 0.05 * (std::f64::consts::PI * k as f64 / n as f64).sin();
            *g = &*g * re(1.0 - eta) + l.sigma() * re(eta);
        }
    }
    let mut x = disc.params(&init);
    let mut cur = disc.evaluate(&x, true).ok_or(Error::SingularState { min_eig: 0.0 })?;
    let mut hist: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut quiet = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let mut dir = lbfgs_direction(&cur.grad, &hist);
        let mut slope = cur.grad.dot(&dir);
        if slope >= 0.0 {
            hist.clear();
            dir = -cur.grad.clone();
            slope = cur.grad.dot(&dir);
        }
        let gnorm = cur.grad.norm();
        if gnorm <= 1e-13 * (1.0 + cur.action) {
            converged = true;
            break;
        }
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let xn = &x + &dir * step;
            if let Some(ev) = disc.evaluate(&xn, true) {
                if ev.action <= cur.action + 1e-4 * step * slope {
                    next = Some((xn, ev));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, ev)) = next else {
            if hist.is_empty() {
                converged = true;
                break;
            }
            hist.clear();
            continue;
        };
        let s = &xn - &x;
        let y = &ev.grad - &cur.grad;
        if s.dot(&y) > 1e-16 * s.norm() * y.norm() {
            hist.push((s, y));
            if hist.len() > 12 {
                hist.remove(0);
            }
        }
        let change = (cur.action - ev.action) / cur.action.max(1e-300);
        x = xn;
        cur = ev;
        if change < opts.tol {
            quiet += 1;
            if quiet >= 5 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let states = disc.states(&x);
    let momenta = cur
        .us
        .iter()
        .zip(&cur.operators)
        .map(|(u, op)| {
            l.jumps
                .iter()
                .zip(&op.kernels)
                .map(|(jt, k)| k.apply(&(&jt.v * u - u * &jt.v), Direction::Forward))
                .collect()
        })
        .collect();
    let path = TransportPath {
        n,
        states,
        momenta,
        step_actions: cur.step_actions,
        action: cur.action,
        iterations,
        converged,
    };
    Ok((path.action.max(0.0).sqrt(), path))
}

/// √⟨ρ₁−ρ₀, 𝔇₂⁻¹(ρ₁−ρ₀)⟩ for the ρ-independent kernel Γ_σ.
pub fn flat_w22(l: &DbcLindbladian, rho0: &CMat, rho1: &CMat) -> Result<f64> {
    let op = Onsager::flat(l)?;
    Ok(op.tensor(&(rho1 - rho0), &(rho1 - rho0))?.max(0.0).sqrt())
}

/// A point of a geodesic in cotangent form.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub t: f64,
    pub rho: CMat,
    pub u: CMat,
}

/// Shooting settings; `floor` is the smallest admissible eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub steps: usize,
    pub floor: f64,
    pub choice: KernelChoice,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { steps: 200, floor: 1e-10, choice: KernelChoice::Symmetrized }
    }
}

fn geodesic_field(l: &DbcLindbladian, p: f64, rho: &CMat, u: &CMat, choice: KernelChoice, floor: f64) -> Result<(CMat, CMat)> {
    let m = eigh_sym(rho).min();
    if m < floor {
        return Err(Error::LeftPositiveCone { min_eig: m });
    }
    let op = onsager(l, rho, p)?;
    let rho_dot = herm_part(&op.apply(u));
    let g = kernel_derivative(l, rho, p, u, choice)?;
    Ok((rho_dot, -crate::operator_core::traceless_herm(&g)))
}

fn rk4_step(l: &DbcLindbladian, p: f64, rho: &CMat, u: &CMat, h: f64, o: &ShootOptions) -> Result<(CMat, CMat)> {
    let f = |r: &CMat, v: &CMat| geodesic_field(l, p, r, v, o.choice, o.floor);
    let (k1r, k1u) = f(rho, u)?;
    let (k2r, k2u) = f(&(rho + &k1r * re(h / 2.0)), &(u + &k1u * re(h / 2.0)))?;
    let (k3r, k3u) = f(&(rho + &k2r * re(h / 2.0)), &(u + &k2u * re(h / 2.0)))?;
    let (k4r, k4u) = f(&(rho + &k3r * re(h)), &(u + &k3u * re(h)))?;
    let w = re(h / 6.0);
    let r = rho + (k1r + &k2r * re(2.0) + &k3r * re(2.0) + k4r) * w;
    let v = u + (k1u + &k2u * re(2.0) + &k3u * re(2.0) + k4u) * w;
    let r = herm_part(&r);
    let m = eigh_sym(&r).min();
    if m < o.floor {
        return Err(Error::LeftPositiveCone { min_eig: m });
    }
    Ok((r, crate::operator_core::traceless_herm(&v)))
}

/// Integrate the geodesic equations from (ρ₀, U₀) up to time `t_end`.
pub fn geodesic_shoot(
    l: &DbcLindbladian,
    rho0: &CMat,
    u0: &CMat,
    p: f64,
    t_end: f64,
    opts: &ShootOptions,
) -> Result<Vec<GeodesicState>> {
    l.require_jumps()?;
    check_p(p)?;
    crate::state::check_density(rho0)?;
    if opts.steps == 0 || !(t_end >= 0.0) {
        return Err(Error::InvalidArgument("need steps ≥ 1 and a nonnegative horizon".into()));
    }
    let t0 = u0.trace().norm();
    if t0 > 1e-12 * (1.0 + crate::operator_core::frob(u0)) {
        return Err(Error::KernelComponent(t0));
    }
    let h = t_end / opts.steps as f64;
    let mut out = vec![GeodesicState { t: 0.0, rho: herm_part(rho0), u: crate::operator_core::traceless_herm(u0) }];
    for _ in 0..opts.steps {
        let last = out.last().expect("trajectory is never empty");
        let (mut t, mut rho, mut u) = (last.t, last.rho.clone(), last.u.clone());
        let target = t + h;
        let mut dt = h;
        let mut halvings = 0;
        while t < target - 1e-15 * target.max(1.0) {
            let step = dt.min(target - t);
            match rk4_step(l, p, &rho, &u, step, opts) {
                Ok((r, v)) => {
                    rho = r;
                    u = v;
                    t += step;
                }
                Err(Error::LeftPositiveCone { min_eig }) => {
                    halvings += 1;
                    if halvings > 20 {
                        return Err(Error::LeftPositiveCone { min_eig });
                    }
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        out.push(GeodesicState { t: target, rho, u });
    }
    Ok(out)
}

/// H(ρ, U) = ½⟨𝔇_{p,ρ}U, U⟩.
pub fn hamiltonian(l: &DbcLindbladian, rho: &CMat, u: &CMat, p: f64) -> Result<f64> {
    Ok(0.5 * onsager(l, rho, p)?.quadratic(u))
}

/// C_p = 2^{2−p}.
pub fn c_p(p: f64) -> f64 {
    2f64.powf(2.0 - p)
}

/// Constant C with ‖ρ₁ − ρ₀‖₁ ≤ C·W_{2,p}(ρ₀, ρ₁).
pub fn trace_distance_constant(l: &DbcLindbladian, p: f64) -> Result<f64> {
    l.require_jumps()?;
    check_p(p)?;
    let g = exponent(p);
    let e = &l.reference.eig;
    let tr: f64 = e.values.iter().map(|s| s.powf((p - 2.0) * g)).sum();
    let smax = e.max();
    let jumps: f64 = l
        .jumps
        .iter()
        .map(|j| {
            let a = (2.0 - p) * j.omega / (2.0 * p);
            let norm = j.v.singular_values().max();
            (a.exp() + (-a).exp()) * norm * norm
        })
        .sum();
    Ok((4.0 / c_p(p) * tr * smax.powf(2.0 * g) * jumps).sqrt())
}
