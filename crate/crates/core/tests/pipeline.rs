use num_complex::Complex64;

use schatlab::diag_avg::trace_averaged;
use schatlab::kernels::{coefficients, evaluate, CoefficientMatrix, KernelSpec};
use schatlab::powers::{Ladder, Verdict};
use schatlab::sobolev::{mixed_norm, mixed_norm_finiteness, SobolevOrder};
use schatlab::spectral::{
    observed_membership, operator_matrix, predict_membership, schatten_norm, singular_values, trace_eigensum,
    PVerdict, SpectralSummary,
};
use schatlab::torus_fourier::{forward, inverse, FrequencyLattice, GridFunction};

#[test]
fn fourier_round_trip_on_t2() {
    let f = |x: &[f64]| {
        Complex64::new((x[0] + 2.0 * x[1]).cos(), 0.0) + Complex64::from_polar(0.25, 3.0 * x[0] - x[1])
    };
    let grid = GridFunction::from_fn(2, 16, f).unwrap();
    let lattice = FrequencyLattice::new(2, 4).unwrap();
    let c = forward(&grid, &lattice).unwrap();
    let at = |k: [i64; 2]| c[lattice.position(&k).unwrap()];
    assert!((at([1, 2]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    assert!((at([-1, -2]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    assert!((at([3, -1]) - Complex64::new(0.25, 0.0)).norm() < 1e-14);
    let back = inverse(&c, &lattice, 16).unwrap();
    for (a, b) in back.samples.iter().zip(&grid.samples) {
        assert!((a - b).norm() < 1e-13);
    }
}

#[test]
fn coefficient_csv_round_trip_preserves_spectrum() {
    let spec = KernelSpec::product_random(1, 1.5, 1.0, 3).unwrap();
    let c = coefficients(&spec, 12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coeffs.csv");
    c.save_csv(&path).unwrap();
    let back = CoefficientMatrix::load_csv(&path).unwrap();
    assert_eq!(back.lattice().cutoff(), 12);
    let s1 = singular_values(&operator_matrix(&c)).unwrap();
    let s2 = singular_values(&operator_matrix(&back)).unwrap();
    for (a, b) in s1.iter().zip(&s2) {
        assert!((a - b).abs() < 1e-14);
    }
    let ord = SobolevOrder::new(0.5, 0.25).unwrap();
    assert_eq!(mixed_norm(&c, ord), mixed_norm(&back, ord));
}

#[test]
fn pointwise_kernel_matches_coefficients() {
    let spec = KernelSpec::product_random(1, 2.0, 2.0, 9).unwrap();
    let n = 8;
    let c = coefficients(&spec, n).unwrap();
    let lat = c.lattice().clone();
    for &(x, y) in &[(0.3, 1.7), (2.0, 2.0), (5.5, 0.1)] {
        let direct: Complex64 = c
            .entries()
            .iter()
            .map(|e| {
                let k = lat.index(e.row)[0] as f64;
                let l = lat.index(e.col)[0] as f64;
                e.value * Complex64::from_polar(1.0, k * x + l * y)
            })
            .sum();
        let got = evaluate(&spec, &[x], &[y], Some(n)).unwrap();
        assert!((got - direct).norm() < 1e-12, "{got} vs {direct}");
    }
}

#[test]
fn guaranteed_memberships_are_never_observed_divergent() {
    for (a, mu) in [(1.5, 0.6), (2.0, 1.2), (3.0, 2.0)] {
        let spec = KernelSpec::conv_power(1, a).unwrap();
        let ord = SobolevOrder::new(mu / 2.0, mu / 2.0).unwrap();
        let fin = mixed_norm_finiteness(&spec, ord, Ladder::TORUS_1D).unwrap();
        assert_eq!(fin.verdict, Verdict::Convergent, "a = {a}, μ = {mu}");
        let ps = [0.4, 0.6, 0.8, 1.0, 1.5];
        let pred = predict_membership(1, ord.mu1, ord.mu2, &ps, true).unwrap();
        let summary = SpectralSummary::from_coefficients(&coefficients(&spec, 16_384).unwrap()).unwrap();
        for (p, v) in pred.verdicts {
            let obs = observed_membership(&summary.singular_values, p).unwrap().verdict;
            if v == PVerdict::Guaranteed {
                assert_ne!(obs, Verdict::Divergent, "a = {a}, p = {p}");
            }
        }
    }
}

#[test]
fn trace_class_kernel_three_ways() {
    let spec = KernelSpec::product_random(1, 2.0, 2.5, 21).unwrap();
    let n = 32;
    let m = operator_matrix(&coefficients(&spec, n).unwrap());
    let eig = trace_eigensum(&m);
    let avg = trace_averaged(&spec, 24, 128, Some(n)).unwrap();
    assert!((eig - avg).norm() < 1e-6, "{eig} vs {avg}");
    let s = singular_values(&m).unwrap();
    assert!(eig.norm() <= schatten_norm(&s, 1.0).unwrap() + 1e-12);
}
