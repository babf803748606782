use minindex::calculus::{self, EIGVEC_TOL};
use minindex::dimension::{norm_diagnostics, ValidationOptions};
use minindex::matrix::{max_abs_diff, Matrix};
use minindex::multimatrix::{self, DEFAULT_CLASS_TOL};
use minindex::oracle::{self, OracleConfig};
use minindex::spectral::{self, PfConfig};
use minindex::{decompose_connected, is_connected, pf_data, sample, DimensionMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Any valid integer matrix, connected or not.
fn any_integer_matrix(seed: u64) -> DimensionMatrix {
    let mut r = rng(seed);
    loop {
        let (m, n) = (r.random_range(1..=5), r.random_range(1..=5));
        let raw = Matrix::from_fn(m, n, |_, _| r.random_range(0..=2) as f64);
        if let Ok(d) = DimensionMatrix::from_matrix(raw, ValidationOptions::default()) {
            return d;
        }
    }
}

fn connected(seed: u64) -> DimensionMatrix {
    sample::connected_integer_matrix(&mut rng(seed), 4, 4, 3)
}

fn sorted_blocks(d: &DimensionMatrix) -> Vec<Vec<Vec<u64>>> {
    // Canonical form of a block: rows and columns sorted lexicographically.
    let mut blocks: Vec<Vec<Vec<u64>>> = decompose_connected(d)
        .blocks
        .iter()
        .map(|b| {
            let mut rows: Vec<Vec<u64>> = b.matrix.to_rows().iter().map(|r| r.iter().map(|&x| x as u64).collect()).collect();
            for r in rows.iter_mut() {
                r.sort();
            }
            rows.sort();
            rows
        })
        .collect();
    blocks.sort();
    blocks
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connected_iff_single_block(seed in any::<u64>()) {
        let d = any_integer_matrix(seed);
        let dec = decompose_connected(&d);
        prop_assert_eq!(is_connected(&d), dec.blocks.len() == 1);
        prop_assert_eq!(&dec.reassemble(d.rows(), d.cols()), d.as_matrix());
        for b in &dec.blocks {
            prop_assert!(is_connected(&b.matrix));
        }
        let firsts: Vec<usize> = dec.blocks.iter().map(|b| b.rows[0]).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn permutations_preserve_blocks(seed in any::<u64>()) {
        let d = any_integer_matrix(seed);
        let mut r = rng(seed ^ 0x9e37);
        let mut rp: Vec<usize> = (0..d.rows()).collect();
        let mut cp: Vec<usize> = (0..d.cols()).collect();
        rp.shuffle(&mut r);
        cp.shuffle(&mut r);
        let permuted = Matrix::from_fn(d.rows(), d.cols(), |i, j| d.get(rp[i], cp[j]));
        let p = DimensionMatrix::from_matrix(permuted, ValidationOptions::default()).unwrap();
        prop_assert_eq!(sorted_blocks(&d), sorted_blocks(&p));

        let cfg = PfConfig::default();
        let mut a = decompose_connected(&d).vector_dimension(&cfg).unwrap();
        let mut b = decompose_connected(&p).vector_dimension(&cfg).unwrap();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert!(max_abs_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn one_and_inf_norms_swap_under_transpose(seed in any::<u64>()) {
        let d = any_integer_matrix(seed);
        let n = norm_diagnostics(&d).unwrap();
        let nt = norm_diagnostics(&d.transpose()).unwrap();
        prop_assert_eq!(n.norm_1, nt.norm_inf);
        prop_assert_eq!(n.norm_inf, nt.norm_1);
    }

    #[test]
    fn json_round_trip_is_bit_exact(
        entries in prop::collection::vec(prop::collection::vec((1u64..=999_999_999_999_999u64, 0i32..6), 3), 1..4)
    ) {
        // Decimals with at most 15 significant digits, all ≥ 1.
        let raw: Vec<Vec<f64>> = entries
            .iter()
            .map(|row| row.iter().map(|&(mant, shift)| format!("{}e-{}", mant, shift.min(mant.to_string().len() as i32 - 1)).parse().unwrap()).collect())
            .collect();
        let d = DimensionMatrix::new(&raw).unwrap();
        let back = DimensionMatrix::from_json(&d.to_json(), ValidationOptions::default()).unwrap();
        for (a, b) in d.as_matrix().as_slice().iter().zip(back.as_matrix().as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn pf_data_invariants(seed in any::<u64>()) {
        let d = connected(seed);
        let cfg = PfConfig::default();
        let pf = pf_data(&d, &cfg).unwrap();
        prop_assert!(pf.residual <= cfg.tol);
        prop_assert!((pf.nu_sqrt.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((pf.mu_sqrt.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(pf.nu_sqrt.iter().chain(&pf.mu_sqrt).all(|&x| x > 0.0));

        let pt = pf_data(&d.transpose(), &cfg).unwrap();
        prop_assert!((pt.index() - pf.index()).abs() < 1e-10);
        prop_assert!(max_abs_diff(&pt.nu_sqrt, &pf.mu_sqrt) < 1e-9);
        prop_assert!(max_abs_diff(&pt.mu_sqrt, &pf.nu_sqrt) < 1e-9);
    }

    #[test]
    fn derived_quantities_are_consistent(seed in any::<u64>()) {
        let d = connected(seed);
        let pf = pf_data(&d, &PfConfig::default()).unwrap();
        let e = spectral::minimal_expectation(&d, &pf).unwrap();
        prop_assert!(e.stochasticity_residual() < 1e-10);
        prop_assert!(spectral::index_factorization_residual(&d, &pf, &e) < 1e-10);
        for (i, j, x) in d.as_matrix().iter_indexed() {
            prop_assert_eq!(x > 0.0, e.lambda[(i, j)] > 0.0);
            let mu_over_nu = pf.mu_sqrt[i].powi(2) / pf.nu_sqrt[j].powi(2);
            prop_assert!((e.lambda[(i, j)] - mu_over_nu * e.dual_lambda[(j, i)]).abs() < 1e-10);
        }
        let s = spectral::canonical_states(&d, &pf).unwrap();
        prop_assert!(s.marginal_residual() < 1e-10);
        prop_assert!(spectral::weighted_additivity_check(&d, &pf) < 1e-10);
        let w = spectral::standard_solution_weights(&d, &pf).unwrap();
        prop_assert!(w.row_identity_residual < 1e-10 && w.col_identity_residual < 1e-10);
    }

    #[test]
    fn scale_covariance(seed in any::<u64>(), t in 1.0f64..10.0) {
        let d = connected(seed);
        let cfg = PfConfig::default();
        let a = pf_data(&d, &cfg).unwrap();
        let b = pf_data(&d.scaled(t).unwrap(), &cfg).unwrap();
        prop_assert!((b.d - t * a.d).abs() < 1e-10 * t.max(1.0) * a.d.max(1.0));
        prop_assert!(max_abs_diff(&a.nu_sqrt, &b.nu_sqrt) < 1e-10);
        prop_assert!(max_abs_diff(&a.mu_sqrt, &b.mu_sqrt) < 1e-10);
    }

    #[test]
    fn constant_square_matrices_have_uniform_vectors(n in 1usize..7, v in 1u32..9) {
        let d = DimensionMatrix::from_matrix(Matrix::from_fn(n, n, |_, _| v as f64), ValidationOptions::default()).unwrap();
        let pf = pf_data(&d, &PfConfig::default()).unwrap();
        let u = 1.0 / (n as f64).sqrt();
        prop_assert!(pf.nu_sqrt.iter().chain(&pf.mu_sqrt).all(|x| (x - u).abs() < 1e-12));
    }

    #[test]
    fn markov_trace_restriction(seed in any::<u64>()) {
        let diag = sample::connected_bratteli(&mut rng(seed), 4, 4, 3, 5);
        let pf = pf_data(diag.matrix(), &PfConfig::default()).unwrap();
        let mt = multimatrix::markov_trace(&diag, &pf).unwrap();
        prop_assert!(mt.restriction_residual < 1e-10);
        prop_assert!((mt.s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((mt.t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(mt.s.iter().chain(&mt.t).all(|&x| x > 0.0));
    }

    #[test]
    fn super_extremality_matches_left_state(seed in any::<u64>()) {
        let diag = sample::connected_bratteli(&mut rng(seed), 3, 3, 2, 3);
        let pf = pf_data(diag.matrix(), &PfConfig::default()).unwrap();
        let se = multimatrix::super_extremality(&diag, DEFAULT_CLASS_TOL).unwrap();
        let ex = multimatrix::extremality_report(&diag, &pf, DEFAULT_CLASS_TOL);
        prop_assert_eq!(se.is_super_extremal, ex.omega_l_eq_trace);
        if se.is_super_extremal {
            prop_assert!(ex.omega_r_eq_trace);
            prop_assert!((se.index - se.index.round()).abs() <= 1e-9);
            prop_assert!((se.index - se.dim_ratio).abs() <= 1e-9);
        }
        if diag.alpha().len() == 1 {
            prop_assert!(ex.omega_r_eq_trace);
        }
    }

    #[test]
    fn submultiplicativity_and_norms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (m, n, p) = (r.random_range(1..=4), r.random_range(1..=4), r.random_range(1..=4));
        let d1 = sample::connected_integer_matrix_of_shape(&mut r, m, n, 3);
        let d2 = sample::connected_integer_matrix_of_shape(&mut r, n, p, 3);
        let rep = calculus::compose(&d1, &d2, EIGVEC_TOL).unwrap();
        prop_assert!(rep.c3 <= rep.c1 * rep.c2 + 1e-9);
        prop_assert!(rep.c3.sqrt() <= rep.c1.sqrt() * rep.c2.sqrt() + 1e-9);
        if rep.sufficient_condition_holds {
            prop_assert!((rep.c3 - rep.c1 * rep.c2).abs() <= 1e-8 * rep.c1 * rep.c2);
            prop_assert!(rep.lambda_product_residual.unwrap() <= 1e-8);
        }
        let d3 = calculus::product(&d1, &d2);
        prop_assert!(is_connected(&d3));
    }

    #[test]
    fn transpose_pairs_are_multiplicative(seed in any::<u64>()) {
        let d = connected(seed);
        let rep = calculus::compose(&d, &d.transpose(), EIGVEC_TOL).unwrap();
        prop_assert!(rep.sufficient_condition_holds);
        prop_assert!((rep.c3 - rep.c1 * rep.c2).abs() <= 1e-8 * rep.c1 * rep.c2);
        prop_assert!(rep.lambda_product_residual.unwrap() <= 1e-8);
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dims: Vec<usize> = (0..4).map(|_| r.random_range(1..=4)).collect();
        let a = sample::connected_integer_matrix_of_shape(&mut r, dims[0], dims[1], 3);
        let b = sample::connected_integer_matrix_of_shape(&mut r, dims[1], dims[2], 3);
        let c = sample::connected_integer_matrix_of_shape(&mut r, dims[2], dims[3], 3);
        let left = calculus::product(&calculus::product(&a, &b), &c);
        let right = calculus::product(&a, &calculus::product(&b, &c));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn factor_case_matches_pf(entries in prop::collection::vec(1u32..6, 1..7), column in any::<bool>()) {
        let row = Matrix::from_fn(1, entries.len(), |_, j| entries[j] as f64);
        let m = if column { row.transpose() } else { row };
        let d = DimensionMatrix::from_matrix(m, ValidationOptions::default()).unwrap();
        let f = calculus::factor_case_additivity(&d).unwrap();
        prop_assert!((f.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((f.index - f.sum_of_squares).abs() < 1e-10 * f.sum_of_squares);
        prop_assert!((f.index - spectral::minimal_index(&d).unwrap()).abs() < 1e-10 * f.index);
        // The Perron-Frobenius vector on the non-factor side is proportional to D.
        let pf = pf_data(&d, &PfConfig::default()).unwrap();
        let side = if column { &pf.mu_sqrt } else { &pf.nu_sqrt };
        let norm = f.sum_of_squares.sqrt();
        let expected: Vec<f64> = entries.iter().map(|&x| x as f64 / norm).collect();
        prop_assert!(max_abs_diff(side, &expected) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_is_sandwiched(seed in any::<u64>()) {
        let d = connected(seed);
        let pf = pf_data(&d, &PfConfig::default()).unwrap();
        let closed = spectral::minimal_expectation(&d, &pf).unwrap();
        let at_closed = oracle::index_of_expectation(&d, &closed.lambda).unwrap();
        prop_assert!((at_closed - pf.index()).abs() < 1e-9 * pf.index().max(1.0));
        let sums = oracle::index_row_sums(&d, &closed.lambda).unwrap();
        prop_assert!(sums.iter().all(|s| (s - sums[0]).abs() < 1e-9 * sums[0]));

        let r = oracle::minimize_index(&d, &OracleConfig::default()).unwrap();
        prop_assert!(r.min_value >= pf.index() - 1e-4);
        prop_assert!(r.min_value <= at_closed + 1e-12, "{} vs {}", r.min_value, at_closed);
        prop_assert!(r.min_value >= 1.0);
        prop_assert!(r.argmin.col_sums().iter().all(|s| (s - 1.0).abs() < 1e-8));
        for (i, j, x) in d.as_matrix().iter_indexed() {
            prop_assert_eq!(x > 0.0, r.argmin[(i, j)] > 0.0);
        }
    }

    #[test]
    fn objective_is_convex(seed in any::<u64>()) {
        let d = connected(seed);
        let mut r = rng(seed ^ 0xc0ffee);
        let mut random_feasible = || {
            let mut l = Matrix::from_fn(d.rows(), d.cols(), |i, j| if d.get(i, j) > 0.0 { r.random_range(0.05..1.0) } else { 0.0 });
            let sums = l.col_sums();
            for (i, j, x) in l.clone().iter_indexed() {
                l[(i, j)] = x / sums[j];
            }
            l
        };
        let a = random_feasible();
        let b = random_feasible();
        let mid = Matrix::from_fn(d.rows(), d.cols(), |i, j| 0.5 * (a[(i, j)] + b[(i, j)]));
        let f = |l: &Matrix| oracle::index_of_expectation(&d, l).unwrap();
        prop_assert!(f(&mid) <= 0.5 * (f(&a) + f(&b)) + 1e-10);
    }

    #[test]
    fn oracle_scales_quadratically(seed in any::<u64>()) {
        let d = connected(seed);
        let cfg = OracleConfig::default();
        let base = oracle::minimize_index(&d, &cfg).unwrap().min_value;
        for t in [2.0, 3.0] {
            let scaled = oracle::minimize_index(&d.scaled(t).unwrap(), &cfg).unwrap().min_value;
            prop_assert!((scaled - t * t * base).abs() <= 1e-6 * t * t * base);
        }
    }
}

#[test]
fn realized_indices_round_trip() {
    for k in 1..=100u64 {
        let diag = multimatrix::realize_integer_index(k);
        let se = multimatrix::super_extremality(&diag, DEFAULT_CLASS_TOL).unwrap();
        assert!(se.is_super_extremal, "k = {k}");
        assert!((spectral::minimal_index(diag.matrix()).unwrap() - k as f64).abs() <= 1e-9, "k = {k}");
    }
}

#[test]
fn super_extremal_diagrams_compose_multiplicatively() {
    // Enumerate small diagrams, keep the connected super-extremal ones and
    // compose every pair whose middle algebra agrees.
    let mut found = Vec::new();
    let shapes = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2)];
    let mut r = rng(11);
    for _ in 0..4000 {
        let (m, n) = shapes[r.random_range(0..shapes.len())];
        let d = sample::connected_integer_matrix_of_shape(&mut r, m, n, 2);
        let beta: Vec<u64> = (0..n).map(|_| r.random_range(1..=3)).collect();
        let alpha: Vec<u64> = (0..m).map(|i| (0..n).map(|j| d.get(i, j) as u64 * beta[j]).sum()).collect();
        let diag = multimatrix::validate_bratteli(d, beta, alpha).unwrap();
        if multimatrix::super_extremality(&diag, DEFAULT_CLASS_TOL).unwrap().is_super_extremal {
            found.push(diag);
        }
    }
    let mut pairs = 0;
    for upper in &found {
        for lower in &found {
            if upper.beta() != lower.alpha() {
                continue;
            }
            let rep = calculus::compose(upper.matrix(), lower.matrix(), EIGVEC_TOL).unwrap();
            assert!((rep.c3 - rep.c1 * rep.c2).abs() <= 1e-8 * rep.c1 * rep.c2);
            pairs += 1;
        }
    }
    assert!(pairs > 10, "only {pairs} composable pairs found");
}
