use proptest::prelude::*;
use twoinf::{
    adaptive_power, compute_gap, estimate, estimate_one_to_two, exact_one_to_two, exact_two_to_inf,
    gen_gap_matrix, rademacher_averaging, sufficient_m_twinest, twinest, twinest_pp, DenseMatrix,
    GapMatrixSpec, LinearOp, Method, RngStream,
};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    let mut rng = RngStream::new(seed);
    let mut data = vec![0.0; rows * cols];
    rng.fill_normal(&mut data);
    DenseMatrix::new(rows, cols, data).unwrap()
}

fn gap_matrix(d: usize, gap: f64, seed: u64) -> DenseMatrix<f64> {
    gen_gap_matrix(&GapMatrixSpec::new(d, d, gap, seed).unwrap()).unwrap()
}

fn rel_err(est: f64, exact: f64) -> f64 {
    (est - exact).abs() / exact
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selected_row_norm_is_returned_exactly(
        d in 2usize..20, n in 1usize..12, m in 3usize..40, seed in any::<u64>()
    ) {
        let a = gaussian(d, n, seed);
        let norms = a.row_norms();
        let exact = exact_two_to_inf(&a).value;
        for method in [Method::TwinEst, Method::TwinEstPlusPlus] {
            let e = estimate(method, &a.op(), m, &mut RngStream::new(seed)).unwrap();
            let j = e.selected_row.unwrap();
            prop_assert_eq!(e.value, norms[j]);
            prop_assert!(e.value <= exact);
        }
    }

    #[test]
    fn scaling_by_powers_of_two_is_exact(d in 2usize..15, n in 1usize..10, seed in any::<u64>()) {
        let a = gaussian(d, n, seed);
        for c in [2.0, 0.5, 8.0] {
            let ca = a.scaled(c);
            for method in Method::ALL {
                let e = estimate(method, &a.op(), 6, &mut RngStream::new(seed)).unwrap();
                let f = estimate(method, &ca.op(), 6, &mut RngStream::new(seed)).unwrap();
                prop_assert_eq!(f.value, c * e.value, "{} c={}", method, c);
                prop_assert_eq!(f.selected_row, e.selected_row);
            }
        }
    }

    #[test]
    fn one_to_two_matches_pipeline_on_transpose(
        d in 1usize..12, n in 1usize..12, seed in any::<u64>()
    ) {
        let a = gaussian(d, n, seed);
        let at = a.transpose();
        for method in Method::ALL {
            let lhs = estimate_one_to_two(&a.op(), method, 9, &mut RngStream::new(seed)).unwrap();
            let rhs = estimate(method, &at.op(), 9, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
        prop_assert_eq!(exact_one_to_two(&a).value, exact_two_to_inf(&at).value);
    }

    #[test]
    fn matvec_tally_matches_cost_model(d in 1usize..10, n in 1usize..10, m in 3usize..30, seed in any::<u64>()) {
        let a = gaussian(d, n, seed);
        for method in Method::ALL {
            let op = a.op();
            let e = estimate(method, &op, m, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(op.matvecs(), e.matvecs_used);
            prop_assert_eq!(e.matvecs_used, method.matvec_cost(m));
        }
    }
}

#[test]
fn one_to_two_recovers_max_column_norm() {
    let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
    for seed in 0..20 {
        let e = estimate_one_to_two(&a.op(), Method::TwinEst, 32, &mut RngStream::new(seed)).unwrap();
        assert_eq!(e.value, 20f64.sqrt());
    }
}

#[test]
fn low_rank_matrices_are_recovered_by_deflation() {
    for seed in 0..50 {
        let a = gaussian(60, 5, seed);
        let exact = exact_two_to_inf(&a).value;
        let e = twinest_pp(&a.op(), 18, &mut RngStream::new(seed)).unwrap();
        assert_eq!(e.value, exact, "seed {seed}");
    }
}

#[test]
fn adaptive_power_diverges_on_diagonal_example() {
    // P(|2 X₁| < |X₂|) = (2/π)·arctan(1/2) ≈ 0.2951 for a Gaussian start
    let a = DenseMatrix::from_diag(&[2.0, 1.0]);
    let trials = 10_000;
    let stuck = (0..trials)
        .filter(|&t| adaptive_power(&a.op(), 20, &mut RngStream::new(t)).unwrap().value == 1.0)
        .count();
    let frac = stuck as f64 / trials as f64;
    assert!((0.27..=0.32).contains(&frac), "fraction {frac}");
}

#[test]
fn sufficient_m_agrees_with_direct_evaluation() {
    let a = gap_matrix(50, 0.1, 12);
    let delta = 0.05;
    // direct evaluation with naive loops
    let d = a.rows();
    let mut b = vec![vec![0.0f64; d]; d];
    for i in 0..d {
        for j in 0..d {
            b[i][j] = (0..a.cols()).map(|k| a.get(i, k) * a.get(j, k)).sum();
        }
    }
    let off = (0..d)
        .map(|i| (0..d).filter(|&j| j != i).map(|j| b[i][j] * b[i][j]).sum::<f64>())
        .fold(0.0, f64::max);
    let mut sq: Vec<f64> = (0..d).map(|i| b[i][i]).collect();
    sq.sort_by(|x, y| y.total_cmp(x));
    let gap = sq[0] - sq[1];
    let bound = 8.0 * (2.0 * d as f64 / delta).ln() * off / (gap * gap);
    let expected = bound.floor() as u64 + 1;
    assert_eq!(sufficient_m_twinest(&a, delta).unwrap(), expected);

    // Δ scales by 4 and the off-diagonal term by 16 under A ↦ 2A
    let doubled = sufficient_m_twinest(&a.scaled(2.0), delta).unwrap();
    assert!(doubled.abs_diff(expected) <= 1);
}

#[test]
fn gap_of_synthetic_matrix_matches_construction() {
    let a = gap_matrix(80, 0.1, 3);
    let g = compute_gap(&a, twoinf::estimators::DEFAULT_TIE_TOL).unwrap();
    assert!((g.gap - 0.1).abs() <= 1e-9);
    assert_eq!(g.argmax_set, vec![0]);
}

#[test]
fn twinest_exact_beyond_sufficient_m_on_gap_matrix() {
    let a = gap_matrix(500, 0.1, 1);
    let m = sufficient_m_twinest(&a, 0.05).unwrap() as usize;
    let exact = exact_two_to_inf(&a).value;
    let hits = (0..200u64)
        .filter(|&t| twinest(&a.op(), m, &mut RngStream::new(t)).unwrap().value == exact)
        .count();
    assert!(hits >= 190, "{hits}/200 exact with m = {m}");
}

#[test]
fn twinest_error_shrinks_with_budget() {
    let a = gap_matrix(500, 0.1, 2);
    let exact = exact_two_to_inf(&a).value;
    let mean = |m: usize| {
        (0..200u64)
            .map(|t| rel_err(twinest(&a.op(), m, &mut RngStream::new(t)).unwrap().value, exact))
            .sum::<f64>()
            / 200.0
    };
    let (small, large) = (mean(50), mean(400));
    assert!(large <= small, "m=400: {large}, m=50: {small}");
}

#[test]
fn row_measurement_beats_plain_averaging_at_matched_budget() {
    let a = gap_matrix(500, 0.1, 3);
    let exact = exact_two_to_inf(&a).value;
    let (mut tw, mut ra) = (0.0, 0.0);
    for t in 0..200u64 {
        // 800 matvecs each
        let m_tw = Method::TwinEst.samples_for_budget(800).unwrap();
        let m_ra = Method::RademacherAveraging.samples_for_budget(800).unwrap();
        tw += rel_err(twinest(&a.op(), m_tw, &mut RngStream::new(t)).unwrap().value, exact);
        ra += rel_err(rademacher_averaging(&a.op(), m_ra, &mut RngStream::new(t)).unwrap().value, exact);
    }
    assert!(tw < ra, "twinest {tw} vs averaging {ra}");
}
