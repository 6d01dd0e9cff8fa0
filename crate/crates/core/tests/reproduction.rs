//! Energy errors on a mesh with decay constants `(1, 0.5)` land on the
//! reference k=1 and k=2 errors; checked on the cheaper leading cells.

use bakhvalov_fem::analysis::{solve_convergence_study, StudyConfig};

fn errors(k: usize, n: Vec<usize>) -> Vec<f64> {
    let mut cfg = StudyConfig::new(k, vec![1e-6], n);
    cfg.beta = (1.0, 0.5);
    let r = solve_convergence_study(&cfg).unwrap();
    assert!(r.all_solved());
    r.table.series(0, 1e-6).into_iter().map(|p| p.1).collect()
}

fn assert_close(got: &[f64], want: &[f64], rel: f64) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= rel * w, "{g:.4e} vs {w:.3e}");
    }
}

#[test]
fn linear_elements() {
    assert_close(&errors(1, vec![8, 16, 32, 64]), &[0.339, 0.167, 0.0834, 0.0418], 0.01);
}

#[test]
fn quadratic_elements() {
    assert_close(&errors(2, vec![8, 16, 32]), &[0.103, 0.0257, 0.00643], 0.01);
}
