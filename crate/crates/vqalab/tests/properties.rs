//! Randomized invariants.

use proptest::prelude::*;
use vqalab::analytic::mu_global;
use vqalab::circuits::Ansatz;
use vqalab::haar::{random_hermitian, sample_haar};
use vqalab::linalg::{hermitian_eigenvalues, kron, trace_norm, ComplexMatrix, Statevector, C64};
use vqalab::observables::{expectation, fidelity, Observable};
use vqalab::pauli::{all_coefficients, all_coefficients_complex, k_norm_dense, PauliString};
use vqalab::rng::substream;
use vqalab::tensornet::{heisenberg_evolve, product_two_norm};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn random_matrix(seed: u64, rows: usize, cols: usize) -> ComplexMatrix {
    use rand::Rng as _;
    let mut rng = substream(seed, 1);
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_state(n: usize, seed: u64) -> Statevector {
    let m = random_matrix(seed, 1 << n, 1);
    let norm = m.norm();
    Statevector::from_amplitudes(m.iter().map(|a| a / norm).collect()).unwrap()
}

fn ansatz_strategy() -> impl Strategy<Value = Ansatz> {
    prop_oneof![
        (3usize..=6, 2usize..=3, 1usize..=3)
            .prop_filter("k <= n", |(n, k, _)| k <= n)
            .prop_map(|(n, k, d)| Ansatz::mps(n, k, d).unwrap()),
        (2usize..=5, 1usize..=3).prop_map(|(n, d)| Ansatz::hea(n, d).unwrap()),
        (1usize..=2).prop_map(|d| Ansatz::qcnn(4, d).unwrap()),
    ]
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3, dc in 1usize..=3) {
        let a = random_matrix(seed, da, da + 1);
        let b = random_matrix(seed ^ 1, db + 1, db);
        let c = random_matrix(seed ^ 2, dc, dc);
        let l = kron(&kron(&a, &b), &c);
        let r = kron(&a, &kron(&b, &c));
        prop_assert!((l - r).norm() < 1e-12);
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = substream(seed, 0);
        let a = random_matrix(seed, dim, dim);
        let u = sample_haar(&mut rng, dim);
        let v = sample_haar(&mut rng, dim);
        let lhs = trace_norm(&(&u * &a * &v)).unwrap();
        prop_assert!((lhs - trace_norm(&a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn hermitian_trace_norm_is_eigenvalue_sum(seed in any::<u64>(), dim in 1usize..=8) {
        let h = random_hermitian(&mut substream(seed, 0), dim);
        let sum: f64 = hermitian_eigenvalues(&h).unwrap().iter().map(|e| e.abs()).sum();
        prop_assert!((trace_norm(&h).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn pauli_expansion_is_complete(seed in any::<u64>(), n in 1usize..=4) {
        let w = random_matrix(seed, 1 << n, 1 << n);
        let c = all_coefficients_complex(&w).unwrap();
        let mut back = ComplexMatrix::zeros(1 << n, 1 << n);
        let scale = 2f64.powf(-(n as f64) / 2.0);
        for (p, ci) in PauliString::all(n).zip(&c) {
            back += p.matrix().unwrap() * (ci * scale);
        }
        prop_assert!((back - w).norm() < 1e-9);
    }

    #[test]
    fn pauli_index_round_trips(n in 1usize..=8, raw in any::<u64>()) {
        let idx = (raw as usize) % 4usize.pow(n as u32);
        let p = PauliString::from_index(n, idx);
        prop_assert_eq!(p.index(), idx);
        let text = p.to_string();
        prop_assert_eq!(text.parse::<PauliString>().unwrap(), p);
    }

    #[test]
    fn k_norm_is_scale_invariant_and_bounded(seed in any::<u64>(), n in 1usize..=4, scale in 0.01f64..100.0) {
        let w = random_hermitian(&mut substream(seed, 0), 1 << n);
        let k = k_norm_dense(&w).unwrap();
        let ks = k_norm_dense(&(&w * C64::new(scale, 0.0))).unwrap();
        prop_assert!((k - ks).abs() < 1e-12);
        prop_assert!(k >= 2f64.powf(-(n as f64) / 2.0) - 1e-12 && k <= 1.0 + 1e-12);
    }

    #[test]
    fn expectations_are_linear_and_consistent(ansatz in ansatz_strategy(), seed in any::<u64>()) {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(seed, 0));
        let sigma = random_state(n, seed);
        let local = expectation(&sigma, &Observable::LocalAverage, &ansatz, &theta).unwrap();
        let mean: f64 = (0..n)
            .map(|i| expectation(&sigma, &Observable::Proj0(i), &ansatz, &theta).unwrap())
            .sum::<f64>() / n as f64;
        prop_assert!((local - mean).abs() < 1e-12);
        let global = expectation(&sigma, &Observable::GlobalZero, &ansatz, &theta).unwrap();
        prop_assert!(global <= local + 1e-12);
    }

    #[test]
    fn perfect_global_fit_implies_perfect_local_fit(ansatz in ansatz_strategy(), seed in any::<u64>()) {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(seed, 0));
        let sigma = ansatz.apply_adjoint(&theta, &Statevector::zero(n)).unwrap();
        let g = expectation(&sigma, &Observable::GlobalZero, &ansatz, &theta).unwrap();
        let l = expectation(&sigma, &Observable::LocalAverage, &ansatz, &theta).unwrap();
        prop_assert!((g - 1.0).abs() < 1e-10 && (l - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_is_unitarily_invariant(ansatz in ansatz_strategy(), seed in any::<u64>()) {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(seed, 0));
        let a = random_state(n, seed);
        let b = random_state(n, seed ^ 7);
        let f = fidelity(&a, &b).unwrap();
        let fu = fidelity(&ansatz.apply(&theta, &a).unwrap(), &ansatz.apply(&theta, &b).unwrap()).unwrap();
        prop_assert!((f - fu).abs() < 1e-12);
        prop_assert!((ansatz.apply(&theta, &a).unwrap().norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn heisenberg_coefficients_are_real(ansatz in ansatz_strategy(), seed in any::<u64>(), q in 0usize..6) {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(seed, 0));
        let w = Observable::Proj0(q % n).dense(n).unwrap();
        let u = ansatz.dense_unitary(&theta).unwrap();
        let c = all_coefficients_complex(&(u.adjoint() * w * u)).unwrap();
        prop_assert!(c.iter().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn tensor_network_preserves_two_norm_and_bond_law(ansatz in ansatz_strategy(), seed in any::<u64>(), q in 0usize..6) {
        let n = ansatz.n();
        let theta = ansatz.random_params(&mut substream(seed, 0));
        for w in [Observable::Proj0(q % n), Observable::GlobalZero] {
            let (mps, stats) = heisenberg_evolve(&w, &ansatz, &theta).unwrap();
            let two = product_two_norm(&w, n).unwrap();
            prop_assert!((mps.two_norm_sqr().sqrt() - two).abs() < 1e-9 * two.max(1.0));
            prop_assert!(stats.max_bond <= 1usize << stats.r_v.min(60));
            for (c, &b) in stats.bonds.iter().enumerate() {
                let side = (c + 1).min(n - c - 1);
                prop_assert!(b <= 4usize.pow(side as u32));
                prop_assert!(b <= 4usize.pow(stats.gates_per_cut[c].min(30) as u32));
            }
            let dense = all_coefficients(&{
                let u = ansatz.dense_unitary(&theta).unwrap();
                u.adjoint() * w.dense(n).unwrap() * u
            }).unwrap();
            let tn = mps.all_coefficients().unwrap();
            prop_assert!(dense.iter().zip(&tn).all(|(a, b)| (a - b).abs() < 1e-9));
        }
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn global_moment_obeys_small_n_bound(n in 3usize..=6, raw in any::<u64>()) {
        let k = 2;
        let bits = |shift: u32| (0..n).map(|j| ((raw >> (shift as usize + j)) & 1) as u8).collect::<Vec<u8>>();
        let (p, q) = (bits(0), bits(8));
        let mu = mu_global(n, k, &p, &q, &q, &p).unwrap();
        prop_assert!(mu.abs() <= 4f64.powi(-((n - k - 1) as i32)) + 1e-15);
        let mu = mu_global(n, k, &p, &p, &q, &q).unwrap();
        prop_assert!(mu.abs() <= 4f64.powi(-((n - k - 1) as i32)) + 1e-15);
    }
}
