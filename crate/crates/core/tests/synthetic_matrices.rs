use nalgebra::DMatrix;
use proptest::prelude::*;
use twoinf::dense::sq_norm2;
use twoinf::matio::{read_matrix, read_matrix_from, write_matrix, write_matrix_to};
use twoinf::{
    compute_gap, exact_two_to_inf, gen_gap_matrix, gen_tall_lowrank, DenseMatrix, GapMatrixSpec,
    TallMatrixSpec,
};

#[test]
fn gap_matrix_has_prescribed_gap_and_norm() {
    let spec = GapMatrixSpec::new(500, 500, 0.1, 2024).unwrap();
    let a: DenseMatrix<f64> = gen_gap_matrix(&spec).unwrap();
    let g = compute_gap(&a, 1e-12).unwrap();
    assert!((g.gap - 0.1).abs() <= 1e-9, "{}", g.gap);
    assert_eq!(g.argmax_set, vec![0]);
    assert!((exact_two_to_inf(&a).value - 1.1f64.sqrt()).abs() <= 1e-9);
    assert!((spec.exact_norm() - 1.1f64.sqrt()).abs() < 1e-15);
    assert_eq!(a, gen_gap_matrix(&spec).unwrap());
}

#[test]
fn uniform_norms_average_one_half() {
    let mut total = 0.0;
    let mut count = 0usize;
    for seed in 0..50 {
        let a: DenseMatrix<f64> = gen_gap_matrix(&GapMatrixSpec::new(100, 100, 0.3, seed).unwrap()).unwrap();
        for i in 2..100 {
            total += sq_norm2(a.row(i));
            count += 1;
        }
    }
    let mean = total / count as f64;
    assert!((mean - 0.5).abs() <= 0.05, "{mean}");
}

#[test]
fn tall_matrix_has_full_column_rank() {
    let a: DenseMatrix<f64> = gen_tall_lowrank(&TallMatrixSpec::new(2000, 50, 8).unwrap()).unwrap();
    let ata = a.t_matmul(&a).unwrap();
    let eig = DMatrix::from_row_slice(50, 50, ata.data()).symmetric_eigen();
    let sv: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    assert_eq!(sv.iter().filter(|&&s| s > 1e-8 * top).count(), 50);

    let brute = (0..2000)
        .map(|i| a.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    assert_eq!(exact_two_to_inf(&a).value, brute);
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gap.bin");
    let a: DenseMatrix<f64> = gen_gap_matrix(&GapMatrixSpec::new(30, 12, 0.2, 1).unwrap()).unwrap();
    write_matrix(&path, &a).unwrap();
    let b: DenseMatrix<f64> = read_matrix(&path).unwrap();
    assert_eq!(a, b);

    let missing = dir.path().join("nope.bin");
    let err = read_matrix::<f64>(&missing).unwrap_err();
    assert!(err.to_string().contains("nope.bin"));
}

proptest! {
    #[test]
    fn bytes_round_trip(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>()) {
        let a: DenseMatrix<f64> = DenseMatrix::from_fn(rows, cols, |i, j| {
            ((seed.wrapping_add((i * 31 + j) as u64)) as f64).sin() * 1e3
        });
        let mut buf = Vec::new();
        write_matrix_to(&a, &mut buf).unwrap();
        let b: DenseMatrix<f64> = read_matrix_from(&buf[..], std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(a, b);
    }
}
