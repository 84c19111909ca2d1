use beckner::entropy::{p_divergence, trace_norm};
use beckner::operator_core::{diag, eigh, frob, hs, identity, paulis, psd_power, re, traceless_herm, CMat, Scalar};
use beckner::sampling;
use beckner::semigroup::{build_from_jumps, depolarizing, random_dbc, DbcLindbladian, JumpTerm};
use beckner::state::Reference;
use beckner::transport::*;

fn pauli_depol() -> DbcLindbladian {
    let jumps: Vec<JumpTerm> =
        paulis().iter().map(|s| JumpTerm { v: s * re((1.0f64 / 8.0).sqrt()), omega: 0.0 }).collect();
    build_from_jumps(&(identity(2) * re(0.5)), &jumps).unwrap()
}

fn random_model(seed: u64, d: usize) -> (DbcLindbladian, sampling::SeededRng) {
    let mut r = sampling::rng(seed);
    let s = sampling::reference_state(d, 0.3, &mut r);
    (random_dbc(&s, d, 1, seed).unwrap(), r)
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    frob(&(a - b)) / frob(b).max(1e-300)
}

#[test]
fn kernel_at_two_is_gamma() {
    let (l, mut r) = random_model(1, 3);
    let rho = sampling::full_rank_density(3, 0.2, &mut r);
    let k = MetricKernel::new(&l.reference, &rho, 2.0, 0.7).unwrap();
    let a = sampling::ginibre(3, &mut r);
    assert!(rel(&k.apply(&a, Direction::Forward), &l.reference.gamma(1.0, &a)) < 1e-12);
}

#[test]
fn kernel_inverse_and_positivity() {
    let (l, mut r) = random_model(2, 3);
    let rho = sampling::full_rank_density(3, 0.2, &mut r);
    for p in [1.2, 1.6, 2.0] {
        let k = MetricKernel::new(&l.reference, &rho, p, -0.4).unwrap();
        let a = sampling::ginibre(3, &mut r);
        let back = k.apply(&k.apply(&a, Direction::Forward), Direction::Inverse);
        assert!(rel(&back, &a) < 1e-10);
        let m = k.superop(Direction::Forward).matrix;
        assert!(frob(&(&m - m.adjoint())) < 1e-12 * frob(&m));
        assert!(eigh(&m).unwrap().min() > 0.0);
    }
}

#[test]
fn kernel_near_one_matches_log_mean_integral() {
    let mut r = sampling::rng(3);
    let s = sampling::reference_state(3, 0.3, &mut r);
    let reference = Reference::new(&s).unwrap();
    let rho = sampling::full_rank_density(3, 0.3, &mut r);
    let omega = 0.5;
    let a = sampling::ginibre(3, &mut r);
    // midpoint rule for ∫₀¹ e^{ω(1/2−s)} ρ^{1−s} A ρ^s ds
    let n = 2000;
    let mut oracle = CMat::zeros(3, 3);
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        let left = psd_power(&rho, 1.0 - t).unwrap();
        let right = psd_power(&rho, t).unwrap();
        oracle += left * &a * right * re((omega * (0.5 - t)).exp() / n as f64);
    }
    let direct = log_mean_kernel_apply(&rho, omega, &a).unwrap();
    assert!(rel(&direct, &oracle) < 1e-6);
    let k = MetricKernel::new(&reference, &rho, 1.001, omega).unwrap();
    assert!(rel(&k.apply(&a, Direction::Forward), &oracle) < 1e-2);
}

#[test]
fn kernel_at_sigma_is_power_difference_operator() {
    let mut r = sampling::rng(4);
    let s = sampling::reference_state(3, 0.3, &mut r);
    let reference = Reference::new(&s).unwrap();
    let e = &reference.eig;
    for p in [1.3, 1.8] {
        let k = MetricKernel::new(&reference, &s, p, 0.0).unwrap();
        let a = sampling::ginibre(3, &mut r);
        let at = e.to_basis(&a);
        let kappa = Scalar::Kappa(1.0 / p);
        let expect = CMat::from_fn(3, 3, |i, j| {
            let (si, sj) = (e.values[i], e.values[j]);
            at[(i, j)] * re(sj / kappa.eval(si / sj))
        });
        let got = e.to_basis(&k.apply(&a, Direction::Forward));
        assert!(rel(&got, &expect) < 1e-10, "p={p}");
    }
}

#[test]
fn kernel_continuous_in_p() {
    let (l, mut r) = random_model(5, 3);
    let rho = sampling::full_rank_density(3, 0.2, &mut r);
    for p in [1.2, 1.5, 1.9] {
        let a = MetricKernel::new(&l.reference, &rho, p, 0.3).unwrap().superop(Direction::Forward).matrix;
        let b = MetricKernel::new(&l.reference, &rho, p + 1e-4, 0.3).unwrap().superop(Direction::Forward).matrix;
        assert!((a - b).iter().all(|z| z.norm() <= 1e-3));
    }
}

#[test]
fn inverse_kernel_jointly_convex() {
    let (l, mut r) = random_model(6, 3);
    let q = |rho: &CMat, x: &CMat| {
        let k = MetricKernel::new(&l.reference, rho, 1.5, 0.4).unwrap();
        hs(x, &k.apply(x, Direction::Inverse)).re
    };
    for _ in 0..5 {
        let (r0, r1) = (sampling::full_rank_density(3, 0.1, &mut r), sampling::full_rank_density(3, 0.1, &mut r));
        let (x0, x1) = (sampling::ginibre(3, &mut r), sampling::ginibre(3, &mut r));
        for s in [0.25, 0.5, 0.75] {
            let rs = &r0 * re(1.0 - s) + &r1 * re(s);
            let xs = &x0 * re(1.0 - s) + &x1 * re(s);
            assert!(q(&rs, &xs) <= (1.0 - s) * q(&r0, &x0) + s * q(&r1, &x1) + 1e-10);
        }
    }
}

#[test]
fn onsager_kernel_and_positivity() {
    let (l, mut r) = random_model(7, 3);
    let rho = sampling::full_rank_density(3, 0.2, &mut r);
    let d = onsager(&l, &rho, 1.5).unwrap();
    assert!(frob(&d.apply(&identity(3))) < 1e-12);
    for _ in 0..5 {
        let nu = traceless_herm(&sampling::hermitian(3, &mut r));
        assert!(d.tensor(&nu, &nu).unwrap() > 0.0);
        let u = d.pinv(&nu).unwrap();
        assert!(rel(&d.apply(&u), &nu) < 1e-9);
    }
    assert!(matches!(d.pinv(&identity(3)), Err(beckner::Error::KernelComponent(_))));
}

#[test]
fn flat_operator_for_pauli_depolarizing() {
    let l = pauli_depol();
    let d = Onsager::flat(&l).unwrap();
    let mut r = sampling::rng(8);
    let nu = traceless_herm(&sampling::hermitian(2, &mut r));
    assert!(rel(&d.apply(&nu), &(&nu * re(0.5))) < 1e-12);
    let w = flat_w22(&l, &diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap();
    assert!((w - 2.0).abs() < 1e-12);
    assert_eq!(flat_w22(&l, &diag(&[1.0, 0.0]), &diag(&[1.0, 0.0])).unwrap(), 0.0);
}

#[test]
fn gradient_flow_identity() {
    for seed in 0..3 {
        let (l, mut r) = random_model(10 + seed, 3);
        let rho = sampling::full_rank_density(3, 0.2, &mut r);
        for p in [1.3, 1.7, 2.0] {
            assert!(grad_flow_residual(&l, &rho, p).unwrap() <= 1e-8, "seed {seed} p {p}");
        }
        assert!(grad_flow_residual(&l, l.sigma(), 1.5).unwrap() <= 1e-10);
    }
    let l = depolarizing(&diag(&[0.6, 0.3, 0.1]), 1.0).unwrap();
    assert!(grad_flow_residual(&l, &diag(&[0.2, 0.5, 0.3]), 1.4).unwrap() <= 1e-9);
}

#[test]
fn derivative_matches_chain_rule() {
    // δF, first variation of F along a straight line
    let (l, mut r) = random_model(13, 3);
    let rho = sampling::full_rank_density(3, 0.2, &mut r);
    let a = traceless_herm(&sampling::hermitian(3, &mut r));
    let p = 1.6;
    let df = divergence_derivative(&l.reference, &rho, p).unwrap();
    let h = 1e-5;
    let f = |t: f64| p_divergence(&(&rho + &a * re(t)), l.sigma(), p).unwrap().value;
    let fd = (f(h) - f(-h)) / (2.0 * h);
    assert!((fd - hs(&df, &a).re).abs() < 1e-6 * (1.0 + fd.abs()));
}

#[test]
fn hamiltonian_gradient_matches_finite_difference() {
    let (l, mut r) = random_model(14, 3);
    let rho = sampling::full_rank_density(3, 0.2, &mut r);
    let u = traceless_herm(&sampling::hermitian(3, &mut r));
    let a = traceless_herm(&sampling::hermitian(3, &mut r));
    for p in [1.3, 1.75, 2.0] {
        let g = hamiltonian_gradient(&l, &rho, p, &u).unwrap();
        let h = 1e-5;
        let hm = |t: f64| hamiltonian(&l, &(&rho + &a * re(t)), &u, p).unwrap();
        let fd = (hm(h) - hm(-h)) / (2.0 * h);
        assert!((fd - hs(&g, &a).re).abs() < 1e-6 * (1.0 + fd.abs()), "p={p}: {fd} vs {}", hs(&g, &a).re);
        let g1 = kernel_derivative(&l, &rho, p, &u, KernelChoice::First).unwrap();
        let g2 = kernel_derivative(&l, &rho, p, &u, KernelChoice::Second).unwrap();
        assert!(frob(&(&g1 - &g2)) < 1e-9 * (1.0 + frob(&g1)));
    }
}

#[test]
fn identical_endpoints_have_zero_distance() {
    let l = pauli_depol();
    let (w, path) = w2p_solve(&l, &diag(&[0.7, 0.3]), &diag(&[0.7, 0.3]), 1.5, &TransportOptions::default()).unwrap();
    assert_eq!(w, 0.0);
    assert!(path.momenta.iter().flatten().all(|b| frob(b) == 0.0));
}

#[test]
fn solver_matches_flat_distance_at_two() {
    let l = pauli_depol();
    let (r0, r1) = (diag(&[1.0, 0.0]), diag(&[0.0, 1.0]));
    let (w, path) = w2p_solve(&l, &r0, &r1, 2.0, &TransportOptions::default()).unwrap();
    assert!((w - 2.0).abs() <= 0.02, "{w}");
    assert!(path.converged);
    assert!(path.continuity_residual(&l).unwrap() <= 1e-8);
    let mean = path.action / path.n as f64;
    assert!(path.step_actions.iter().all(|a| (a - mean).abs() <= 0.02 * mean));
}

#[test]
fn solver_path_properties_for_random_model() {
    let (l, mut r) = random_model(15, 2);
    let r0 = sampling::full_rank_density(2, 0.3, &mut r);
    let r1 = sampling::full_rank_density(2, 0.3, &mut r);
    let opts = TransportOptions { n: 12, ..Default::default() };
    let p = 1.5;
    let (w01, path) = w2p_solve(&l, &r0, &r1, p, &opts).unwrap();
    assert!(path.converged);
    assert!(path.continuity_residual(&l).unwrap() <= 1e-8);
    let mean = path.action / path.n as f64;
    assert!(path.step_actions.iter().all(|a| (a - mean).abs() <= 0.02 * mean), "{:?}", path.step_actions);
    let (w10, _) = w2p_solve(&l, &r1, &r0, p, &opts).unwrap();
    assert!((w01 - w10).abs() <= 0.01 * w01);
    let r2 = sampling::full_rank_density(2, 0.3, &mut r);
    let (w02, _) = w2p_solve(&l, &r0, &r2, p, &opts).unwrap();
    let (w21, _) = w2p_solve(&l, &r2, &r1, p, &opts).unwrap();
    assert!(w01 <= (w02 + w21) * 1.02);
    let c = trace_distance_constant(&l, p).unwrap();
    assert!(trace_norm(&(&r1 - &r0)) <= c * w01);
}

#[test]
fn squared_distance_convex_in_endpoints() {
    let (l, mut r) = random_model(16, 2);
    let opts = TransportOptions { n: 10, ..Default::default() };
    let p = 1.4;
    let (a0, a1) = (sampling::full_rank_density(2, 0.3, &mut r), sampling::full_rank_density(2, 0.3, &mut r));
    let (b0, b1) = (sampling::full_rank_density(2, 0.3, &mut r), sampling::full_rank_density(2, 0.3, &mut r));
    let w = |x: &CMat, y: &CMat| w2p_solve(&l, x, y, p, &opts).unwrap().0.powi(2);
    let (wa, wb) = (w(&a0, &a1), w(&b0, &b1));
    let s = 0.4;
    let mix = |x: &CMat, y: &CMat| x * re(1.0 - s) + y * re(s);
    let ws = w(&mix(&a0, &b0), &mix(&a1, &b1));
    assert!(ws <= (1.0 - s) * wa + s * wb + 0.02 * ((1.0 - s) * wa + s * wb));
}

#[test]
fn geodesic_rest_and_energy() {
    let (l, mut r) = random_model(17, 3);
    let rho = sampling::full_rank_density(3, 0.3, &mut r);
    let o = ShootOptions { steps: 100, ..Default::default() };
    let still = geodesic_shoot(&l, &rho, &CMat::zeros(3, 3), 1.5, 0.5, &o).unwrap();
    assert!(still.iter().all(|s| frob(&(&s.rho - &rho)) < 1e-14));
    let u0 = traceless_herm(&sampling::hermitian(3, &mut r)) * re(0.05);
    let traj = geodesic_shoot(&l, &rho, &u0, 1.5, 0.5, &o).unwrap();
    let h0 = hamiltonian(&l, &rho, &u0, 1.5).unwrap();
    for s in &traj {
        let h = hamiltonian(&l, &s.rho, &s.u, 1.5).unwrap();
        assert!((h - h0).abs() <= 1e-6 * h0, "t={} drift {}", s.t, (h - h0).abs() / h0);
        assert!(s.u.trace().norm() < 1e-12);
    }
}

#[test]
fn shooting_reaches_solver_endpoint() {
    let (l, mut r) = random_model(18, 2);
    let r0 = sampling::full_rank_density(2, 0.4, &mut r);
    let r1 = sampling::full_rank_density(2, 0.4, &mut r);
    let p = 1.5;
    let opts = TransportOptions { n: 20, ..Default::default() };
    let (w, path) = w2p_solve(&l, &r0, &r1, p, &opts).unwrap();
    let nu0 = (&path.states[1] - &path.states[0]) * re(path.n as f64);
    // second-order one-sided velocity estimate at s = 0
    let nu1 = (&path.states[2] - &path.states[0]) * re(path.n as f64 / 2.0);
    let nu = &nu0 * re(2.0) - nu1;
    let u0 = onsager(&l, &r0, p).unwrap().pinv(&traceless_herm(&nu)).unwrap();
    let traj = geodesic_shoot(&l, &r0, &u0, p, 1.0, &ShootOptions::default()).unwrap();
    let end = &traj.last().unwrap().rho;
    let (gap, _) = w2p_solve(&l, end, &r1, p, &opts).unwrap();
    assert!(gap <= 0.05 * w, "{gap} vs {w}");
}
