//! Cross-checks between independent computation paths.

use rand::Rng as _;
use vqalab::analytic::{mc_mu_global, mc_mu_z, mu_global, mu_local_zero, mu_z, BitTuple};
use vqalab::circuits::{Ansatz, PARAMS_PER_BLOCK};
use vqalab::haar::{first_moment_analytic, monte_carlo, random_hermitian, sample_haar, second_moment_analytic};
use vqalab::linalg::{kron, kron_all, trace, trace_norm, ComplexMatrix, Statevector, C64, ONE, ZERO};
use vqalab::observables::{expectation, finite_difference, grad, Observable};
use vqalab::pauli::{all_coefficients, k_norm_dense, pauli_coefficient, PauliString};
use vqalab::rng::substream;
use vqalab::tensornet::heisenberg_evolve;

fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

fn random_state(n: usize, seed: u64) -> Statevector {
    let mut rng = substream(seed, 0);
    let amps: Vec<C64> = (0..1usize << n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn ansatz_zoo() -> Vec<Ansatz> {
    vec![
        Ansatz::mps(3, 2, 2).unwrap(),
        Ansatz::mps(5, 2, 3).unwrap(),
        Ansatz::mps(6, 3, 2).unwrap(),
        Ansatz::hea(4, 3).unwrap(),
        Ansatz::hea(5, 2).unwrap(),
        Ansatz::qcnn(4, 1).unwrap(),
    ]
}

fn heisenberg_dense(w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> ComplexMatrix {
    let u = ansatz.dense_unitary(theta).unwrap();
    u.adjoint() * w.dense(ansatz.n()).unwrap() * u
}

#[test]
fn tensor_network_matches_dense_coefficients() {
    for (t, ansatz) in ansatz_zoo().iter().enumerate() {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(7, t as u64));
        let observables = [
            Observable::Proj0(n - 1),
            Observable::Proj0(0),
            Observable::ZString(1),
            Observable::GlobalZero,
            Observable::Pauli(PauliString::from_index(n, 4usize.pow(n as u32) - 3)),
        ];
        for w in &observables {
            let dense = all_coefficients(&heisenberg_dense(w, ansatz, &theta)).unwrap();
            let (mps, _) = heisenberg_evolve(w, ansatz, &theta).unwrap();
            let tn = mps.all_coefficients().unwrap();
            let err = dense.iter().zip(&tn).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "{:?} n={n} {w}: max coefficient error {err}", ansatz.kind());
        }
    }
}

#[test]
fn apply_matches_dense_unitary_and_adjoint_inverts() {
    for (t, ansatz) in ansatz_zoo().iter().enumerate() {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(11, t as u64));
        let psi = random_state(n, t as u64);
        let u = ansatz.dense_unitary(&theta).unwrap();
        let fast = ansatz.apply(&theta, &psi).unwrap();
        let slow = psi.apply_dense(&u).unwrap();
        let err = fast.amplitudes().iter().zip(slow.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "apply vs dense: {err}");
        let back = ansatz.apply_adjoint(&theta, &fast).unwrap();
        let err = back.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "adjoint round trip: {err}");
    }
}

#[test]
fn window_embedding_matches_kron() {
    let n = 5;
    let mut rng = substream(3, 0);
    for start in 0..=n - 2 {
        let u = sample_haar(&mut rng, 4);
        let full = kron_all(&[identity(1 << start), u.clone(), identity(1 << (n - start - 2))]);
        let psi = random_state(n, start as u64);
        let mut fast = psi.clone();
        fast.apply_window(start, &u).unwrap();
        let slow = psi.apply_dense(&full).unwrap();
        let err = fast.amplitudes().iter().zip(slow.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}

#[test]
fn pauli_coefficient_examples() {
    for n in 1..=4 {
        let z_last = PauliString::z(n, n - 1).matrix().unwrap();
        let c = pauli_coefficient(&z_last, &PauliString::z(n, n - 1)).unwrap();
        assert!((c - 2f64.powf(n as f64 / 2.0)).abs() < 1e-12);
        assert!(pauli_coefficient(&z_last, &PauliString::z(n, 0)).unwrap().abs() < 1e-12 || n == 1);
        let id = identity(1 << n);
        let c = pauli_coefficient(&id, &PauliString::identity(n)).unwrap();
        assert!((c - 2f64.powf(n as f64 / 2.0)).abs() < 1e-12);
    }
    // |0⟩⟨0| = (I + Z)/2 on one qubit.
    let p0 = Observable::Proj0(0).dense(1).unwrap();
    let c = all_coefficients(&p0).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((c[0] - s).abs() < 1e-12 && c[1].abs() < 1e-12 && (c[2] - s).abs() < 1e-12 && c[3].abs() < 1e-12);
}

#[test]
fn k_norm_brute_force() {
    let n = 3;
    let mut rng = substream(5, 0);
    for _ in 0..5 {
        let w = random_hermitian(&mut rng, 1 << n);
        let mut sum4 = 0.0;
        for p in PauliString::all(n) {
            let m = p.matrix().unwrap();
            let c = trace(&(m * &w)).re / 2f64.powf(n as f64 / 2.0);
            sum4 += c.powi(4);
        }
        let two = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let brute = sum4.powf(0.25) / two;
        assert!((k_norm_dense(&w).unwrap() - brute).abs() < 1e-12);
    }
}

#[test]
fn trace_norm_of_state_difference() {
    // Pure states: ‖ρ − σ‖₁ = 2 √(1 − |⟨ρ|σ⟩|²).
    for seed in 0..5 {
        let a = random_state(3, seed);
        let b = random_state(3, seed + 100);
        let d = a.density_matrix() - b.density_matrix();
        let expect = 2.0 * (1.0 - a.inner(&b).norm_sqr()).sqrt();
        assert!((trace_norm(&d).unwrap() - expect).abs() < 1e-10);
    }
}

#[test]
fn parameter_shift_matches_finite_differences() {
    let ansatz = Ansatz::mps(4, 2, 2).unwrap();
    let sigma = random_state(4, 9);
    for (t, w) in [Observable::LocalAverage, Observable::GlobalZero, Observable::ZString(2)].iter().enumerate() {
        let theta = ansatz.random_params(&mut substream(13, t as u64));
        let g = grad(&sigma, w, &ansatz, &theta).unwrap();
        for (j, gj) in g.iter().enumerate() {
            let fd = finite_difference(&sigma, w, &ansatz, &theta, j, 1e-5).unwrap();
            assert!((gj - fd).abs() < 1e-6, "{w} param {j}: {gj} vs {fd}");
        }
    }
}

#[test]
fn haar_first_and_second_moments() {
    let mut rng = substream(17, 0);
    let dim = 2;
    let ops: Vec<ComplexMatrix> = (0..4).map(|_| random_hermitian(&mut rng, dim)).collect();
    let (a, b, c, d) = (&ops[0], &ops[1], &ops[2], &ops[3]);
    let (re, _) = monte_carlo(200_000, 1, |rng| {
        let u = sample_haar(rng, dim);
        trace(&(b * &u * a * u.adjoint()))
    });
    let exact = first_moment_analytic(a, b).unwrap().re;
    assert!(re.within(exact, 4.0), "first moment {re:?} vs {exact}");
    let (re, _) = monte_carlo(200_000, 2, |rng| {
        let u = sample_haar(rng, dim);
        trace(&(b * &u * a * u.adjoint())) * trace(&(d * &u * c * u.adjoint()))
    });
    let exact = second_moment_analytic(a, b, c, d).unwrap().re;
    assert!(re.within(exact, 4.0), "second moment {re:?} vs {exact}");
}

#[test]
fn haar_left_and_right_invariance() {
    let dim = 4;
    let mut rng = substream(19, 0);
    let v = sample_haar(&mut rng, dim);
    let a = random_hermitian(&mut rng, dim);
    let b = random_hermitian(&mut rng, dim);
    let exact = second_moment_analytic(&a, &b, &a, &b).unwrap().re;
    let f = |u: &ComplexMatrix| {
        let x = trace(&(&b * u * &a * u.adjoint()));
        x * x
    };
    let (left, _) = monte_carlo(100_000, 3, |rng| f(&(&v * sample_haar(rng, dim))));
    let (right, _) = monte_carlo(100_000, 4, |rng| f(&(sample_haar(rng, dim) * &v)));
    assert!(left.within(exact, 4.0), "left {left:?} vs {exact}");
    assert!(right.within(exact, 4.0), "right {right:?} vs {exact}");
}

#[test]
fn partial_haar_on_last_qubits_kills_z_moments() {
    // A on 3 qubits, U Haar on the last 2: first moments of Z_i and cross
    // moments of Z_i Z_j (i ≠ j inside the window) vanish.
    let n = 3;
    let mut rng = substream(23, 0);
    let a = random_hermitian(&mut rng, 1 << n);
    let z1 = PauliString::z(n, 1).matrix().unwrap();
    let z2 = PauliString::z(n, 2).matrix().unwrap();
    let lift = |u: &ComplexMatrix| kron(&identity(2), u);
    let (m1, _) = monte_carlo(100_000, 5, |rng| {
        let v = lift(&sample_haar(rng, 4));
        trace(&(&z2 * &v * &a * v.adjoint()))
    });
    assert!(m1.within(0.0, 4.0), "{m1:?}");
    let (m2, _) = monte_carlo(100_000, 6, |rng| {
        let v = lift(&sample_haar(rng, 4));
        let au = &v * &a * v.adjoint();
        trace(&(&z1 * &au)) * trace(&(&z2 * &au))
    });
    assert!(m2.within(0.0, 4.0), "{m2:?}");
}

fn zero_tuple(n: usize) -> BitTuple {
    [vec![0; n], vec![0; n], vec![0; n], vec![0; n]]
}

#[test]
fn recursion_matches_monte_carlo() {
    let (n, k) = (4, 2);
    let tuples: Vec<BitTuple> = vec![
        zero_tuple(n),
        [vec![0, 1, 0, 0], vec![0, 1, 0, 0], vec![1, 0, 0, 1], vec![1, 0, 0, 1]],
        [vec![0, 1, 1, 0], vec![1, 1, 1, 0], vec![1, 1, 1, 0], vec![0, 1, 1, 0]],
    ];
    let mc = mc_mu_global(n, k, &tuples, 100_000, 29).unwrap();
    for (t, e) in tuples.iter().zip(&mc) {
        let exact = mu_global(n, k, &t[0], &t[1], &t[2], &t[3]).unwrap();
        assert!(e.within(exact, 4.0), "global {t:?}: {e:?} vs {exact}");
    }
    let mc = mc_mu_z(n, k, n - 1, &tuples, 100_000, 31).unwrap();
    for (t, e) in tuples.iter().zip(&mc) {
        let exact = mu_z(n, k, n - 1, &t[0], &t[1], &t[2], &t[3]).unwrap();
        assert!(e.within(exact, 4.0), "local {t:?}: {e:?} vs {exact}");
    }
}

#[test]
fn local_moment_independent_of_qubit_in_last_window() {
    let (n, k) = (5, 2);
    let t = vec![zero_tuple(n)];
    let a = mc_mu_z(n, k, 3, &t, 100_000, 37).unwrap()[0];
    let b = mc_mu_z(n, k, 4, &t, 100_000, 41).unwrap()[0];
    let z = ((a.mean - b.mean) / (a.se.hypot(b.se))).abs();
    assert!(z < 4.0, "{a:?} vs {b:?}");
    let exact = mu_local_zero(n, k).unwrap();
    let z0 = vec![0u8; n];
    assert!((mu_z(n, k, 3, &z0, &z0, &z0, &z0).unwrap() - exact).abs() < 1e-14);
    assert!(a.within(exact, 4.0) && b.within(exact, 4.0));
}

#[test]
fn fixed_rotation_before_first_window_is_absorbed() {
    // C V with V on the first window has the same moments as C.
    let (n, k) = (4, 2);
    let v = sample_haar(&mut substream(43, 0), 1 << k);
    let vals: Vec<f64> = vqalab::rng::map_samples(100_000, 47, |rng, _| {
        let us: Vec<ComplexMatrix> = (0..=n - k).map(|_| sample_haar(rng, 1 << k)).collect();
        let mut phi = Statevector::zero(n);
        for (start, u) in us.iter().enumerate().rev() {
            phi.apply_window(start, &u.adjoint()).unwrap();
        }
        phi.apply_window(0, &v.adjoint()).unwrap();
        phi.amplitudes()[0].norm_sqr().powi(2)
    });
    let e = vqalab::stats::Estimate::mean_of(&vals);
    let z = vec![0u8; n];
    let exact = mu_global(n, k, &z, &z, &z, &z).unwrap();
    assert!(e.within(exact, 4.0), "{e:?} vs {exact}");
}

#[test]
fn transfer_ratio_converges_to_dominant_eigenvalue() {
    let k = 2;
    let mu = |n: usize| {
        let z = vec![0u8; n];
        mu_global(n, k, &z, &z, &z, &z).unwrap()
    };
    let ratio = mu(14) / mu(13);
    assert!((ratio - 0.3).abs() < 1e-6, "{ratio}");
}

#[test]
fn windows_outside_the_light_cone_cancel() {
    // For |0⟩⟨0|_i, windows starting above i never touch it.
    let (n, k) = (6, 2);
    let ansatz = Ansatz::mps(n, k, 3).unwrap();
    let sigma = random_state(n, 53);
    let theta = ansatz.random_params(&mut substream(59, 0));
    for i in 0..n - k {
        let w = Observable::Proj0(i);
        let base = expectation(&sigma, &w, &ansatz, &theta).unwrap();
        let mut scrambled = theta.clone();
        let mut rng = substream(61, i as u64);
        for block in ansatz.blocks() {
            if block.a.min(block.b) > i {
                let o = block.param_offset;
                for x in &mut scrambled[o..o + PARAMS_PER_BLOCK] {
                    *x = rng.gen_range(0.0..std::f64::consts::TAU);
                }
            }
        }
        let moved = expectation(&sigma, &w, &ansatz, &scrambled).unwrap();
        assert!((base - moved).abs() < 1e-12, "qubit {i}: {base} vs {moved}");
    }
}

#[test]
fn outer_z_angles_commute_at_zero_tilt() {
    // With θ = 0 the rotation is R_z(φ + λ), so swapping φ and λ is a no-op.
    let ansatz = Ansatz::hea(3, 2).unwrap();
    let mut theta = ansatz.random_params(&mut substream(67, 0));
    for r in 0..theta.len() / 3 {
        theta[3 * r] = 0.0;
    }
    let mut swapped = theta.clone();
    for r in 0..theta.len() / 3 {
        swapped.swap(3 * r + 1, 3 * r + 2);
    }
    let u = ansatz.dense_unitary(&theta).unwrap();
    let v = ansatz.dense_unitary(&swapped).unwrap();
    assert!((u - v).norm() < 1e-12);
    let zero = ansatz.dense_unitary(&vec![0.0; ansatz.num_params()]).unwrap();
    let mut e0 = Statevector::zero(3);
    e0.amplitudes_mut()[0] = ONE;
    let out = e0.apply_dense(&zero).unwrap();
    assert_eq!(out.amplitudes()[0], ONE);
    assert!(out.amplitudes()[1..].iter().all(|a| *a == ZERO));
}
