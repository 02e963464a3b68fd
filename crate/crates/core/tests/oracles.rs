//! Independent reference computations checked against the optimized paths.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rcstab::linalg::{lu_solve, spectral_radius, DenseMatrix, SparseMatrix};
use rcstab::regularization::{
    input_jacobian, jacobian_matrix, lmnt_matrix, lmnt_matrix_mean_input, lmnt_matrix_reduced,
    state_jacobian,
};
use rcstab::reservoir::{FeatureSeries, Reservoir, ReservoirHyperparams};

fn reservoir(n: usize, m: usize, seed: u64) -> Reservoir {
    let h = ReservoirHyperparams {
        nodes: n,
        avg_degree: 3.0,
        seed,
        ..Default::default()
    };
    Reservoir::build(&h, m).unwrap()
}

fn random_series(res: &Reservoir, t_sync: usize, t_train: usize, seed: u64) -> FeatureSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = res.input_dim();
    let data = DenseMatrix::from_fn(t_sync + t_train + 1, m, |_, _| rng.random_range(-1.5..1.5));
    res.drive_open_loop(&data, t_sync, t_train).unwrap()
}

fn rel_frobenius(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
}

/// `Σ_k ∇_u(j,k) ∇_u(j,k)ᵀ` with every chain product formed densely.
fn naive_summand(series: &FeatureSeries, res: &Reservoir, j: usize, k: usize) -> DenseMatrix {
    let f = res.feature_dim();
    let mut out = DenseMatrix::zeros(f, f);
    for first in j + 1 - k..=j {
        let mut chain =
            input_jacobian(res, series.state_before(first), series.input(first)).unwrap();
        for i in first + 1..=j {
            let g = state_jacobian(res, series.state_before(i), series.input(i)).unwrap();
            chain = g.matmul(&chain).unwrap();
        }
        out.add_scaled(1.0, &chain.matmul_transpose(&chain).unwrap())
            .unwrap();
    }
    out
}

fn naive_lmnt(series: &FeatureSeries, res: &Reservoir, k: usize) -> DenseMatrix {
    let t = series.len();
    let f = res.feature_dim();
    let mut out = DenseMatrix::zeros(f, f);
    for j in k..t {
        out.add_scaled(1.0, &naive_summand(series, res, j, k))
            .unwrap();
    }
    out.scale(1.0 / (t - k) as f64);
    out
}

#[test]
fn lmnt_matches_naive_chain_products() {
    for (n, m, t, k, seed) in [
        (12, 3, 40, 1, 1),
        (20, 4, 60, 3, 2),
        (30, 5, 100, 5, 3),
        (16, 2, 30, 4, 4),
    ] {
        let res = reservoir(n, m, seed);
        let series = random_series(&res, 10, t, seed + 100);
        let fast = lmnt_matrix(&series, &res, k).unwrap();
        let slow = naive_lmnt(&series, &res, k);
        let err = rel_frobenius(fast.matrix(), &slow);
        assert!(err < 1e-10, "N={n} K={k}: relative error {err:e}");
    }
}

#[test]
fn lmnt_with_leak_matches_naive_chain_products() {
    let h = ReservoirHyperparams {
        nodes: 18,
        avg_degree: 4.0,
        leak_rate: 0.35,
        seed: 9,
        ..Default::default()
    };
    let res = Reservoir::build(&h, 3).unwrap();
    let series = random_series(&res, 10, 50, 19);
    let fast = lmnt_matrix(&series, &res, 4).unwrap();
    let err = rel_frobenius(fast.matrix(), &naive_lmnt(&series, &res, 4));
    assert!(err < 1e-10, "relative error {err:e}");
}

#[test]
fn reduced_lmnt_matches_naive_samples() {
    let res = reservoir(20, 3, 5);
    let series = random_series(&res, 10, 80, 6);
    let (k, samples) = (3, 7);
    let fast = lmnt_matrix_reduced(&series, &res, k, samples).unwrap();
    let f = res.feature_dim();
    let mut slow = DenseMatrix::zeros(f, f);
    let span = series.len() - k;
    for i in 0..samples {
        let j = k + (i as f64 * span as f64 / samples as f64).floor() as usize;
        slow.add_scaled(1.0 / samples as f64, &naive_summand(&series, &res, j, k))
            .unwrap();
    }
    assert!(rel_frobenius(fast.matrix(), &slow) < 1e-10);
}

#[test]
fn mean_input_lmnt_matches_naive_fixed_point_chain() {
    let res = reservoir(15, 3, 8);
    let mean = vec![0.1, -0.2, 0.05];
    let k = 3;
    let out = lmnt_matrix_mean_input(&res, &mean, k, 200).unwrap();
    assert!(out.warning.is_none());
    let r = &out.fixed_point;
    let gu = input_jacobian(&res, r, &mean).unwrap();
    let gs = state_jacobian(&res, r, &mean).unwrap();
    let f = res.feature_dim();
    let mut slow = DenseMatrix::zeros(f, f);
    let mut chain = gu;
    for _ in 0..k {
        slow.add_scaled(1.0, &chain.matmul_transpose(&chain).unwrap())
            .unwrap();
        chain = gs.matmul(&chain).unwrap();
    }
    assert!(rel_frobenius(out.matrix.matrix(), &slow) < 1e-10);
}

#[test]
fn jacobian_matrix_matches_dense_sum() {
    let res = reservoir(25, 4, 11);
    let series = random_series(&res, 10, 50, 12);
    let fast = jacobian_matrix(&series, &res).unwrap();
    let f = res.feature_dim();
    let mut slow = DenseMatrix::zeros(f, f);
    for j in 1..series.len() {
        let g = input_jacobian(&res, series.state_before(j), series.input(j)).unwrap();
        slow.add_scaled(1.0, &g.matmul_transpose(&g).unwrap())
            .unwrap();
    }
    slow.scale(1.0 / (series.len() - 1) as f64);
    assert!(rel_frobenius(fast.matrix(), &slow) < 1e-12);
}

/// Feature vector after one update from state `r_prev` with input `u`.
fn next_feature(res: &Reservoir, r_prev: &[f64], u: &[f64]) -> Vec<f64> {
    let r = res.step(r_prev, u).unwrap();
    res.feature(&r, u)
}

#[test]
fn jacobians_match_central_differences() {
    let h = 1e-6;
    for seed in 0..4 {
        let res = reservoir(20, 4, 50 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r: Vec<f64> = (0..20).map(|_| rng.random_range(-0.8..0.8)).collect();
        let u: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = res.feature_dim();

        let ju = input_jacobian(&res, &r, &u).unwrap();
        let mut fd = DenseMatrix::zeros(f, 4);
        for c in 0..4 {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up[c] += h;
            dn[c] -= h;
            let (a, b) = (next_feature(&res, &r, &up), next_feature(&res, &r, &dn));
            for i in 0..f {
                fd[(i, c)] = (a[i] - b[i]) / (2.0 * h);
            }
        }
        assert!(
            rel_frobenius(&ju, &fd) < 1e-6,
            "input jacobian, seed {seed}"
        );

        let js = state_jacobian(&res, &r, &u).unwrap();
        let mut fd = DenseMatrix::zeros(f, f);
        for q in 0..20 {
            let (mut up, mut dn) = (r.clone(), r.clone());
            up[q] += h;
            dn[q] -= h;
            let (a, b) = (next_feature(&res, &up, &u), next_feature(&res, &dn, &u));
            for i in 0..f {
                fd[(i, 1 + 4 + q)] = (a[i] - b[i]) / (2.0 * h);
            }
        }
        assert!(
            rel_frobenius(&js, &fd) < 1e-6,
            "state jacobian, seed {seed}"
        );
    }
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

#[test]
fn spectral_radius_matches_dense_eigenvalues() {
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if rng.random_bool(0.1) {
                    entries.push((i, j, rng.random_range(-1.0..1.0)));
                }
            }
        }
        let sp = SparseMatrix::from_triplets(n, n, &entries).unwrap();
        let ours = spectral_radius(&sp, 1e-12, 100_000).unwrap();
        let oracle = to_nalgebra(&sp.to_dense())
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(
            (ours - oracle).abs() < 1e-6 * oracle.max(1.0),
            "seed {seed}: {ours} vs {oracle}"
        );
    }
}

#[test]
fn reservoir_adjacency_has_requested_radius() {
    let res = reservoir(200, 8, 3);
    let oracle = to_nalgebra(&res.adjacency().to_dense())
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!((oracle - 0.6).abs() < 1e-6, "{oracle}");
}

#[test]
fn lu_solve_matches_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 30;
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        rng.random_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 }
    });
    let b = DenseMatrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0));
    let x = lu_solve(a.clone(), b.clone()).unwrap();
    let oracle = to_nalgebra(&a).try_inverse().unwrap() * to_nalgebra(&b);
    for i in 0..n {
        for c in 0..3 {
            assert!((x[(i, c)] - oracle[(i, c)]).abs() < 1e-12);
        }
    }
}
