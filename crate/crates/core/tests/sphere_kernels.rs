use std::f64::consts::{PI, SQRT_2};
use std::io::BufReader;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use szego_core::asymptotics::{fit_leading_order, predicted_limit, KernelSweep};
use szego_core::cutoff::CutoffFunction;
use szego_core::hardy::{
    integrate_weighted_kernel, integrate_window_kernel, monomial_norm, szego_window, szego_window_sweep, NormTable,
};
use szego_core::lattice::{count_weights, enumerate_weights, weight_value, WeightVector};
use szego_core::quadrature::SimplexRule;
use szego_core::sphere::{det_levi, det_levi_closed_form, volume_density, volume_density_closed_form, SpherePoint};

fn weights(v: &[f64]) -> WeightVector {
    WeightVector::new(v.to_vec()).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> SpherePoint {
    let z = (0..dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    SpherePoint::normalized(z).unwrap()
}

#[test]
fn series_table_matches_quadrature_table() {
    for (mu, n, k, degree) in [
        (vec![1.0, SQRT_2], 1, 30.0, 160),
        (vec![2.0, 3.0], 1, 60.0, 160),
        (vec![1.0, SQRT_2, 3f64.sqrt()], 2, 10.0, 60),
        (vec![1.0], 2, 8.0, 40),
    ] {
        let mu = weights(&mu);
        let rule = SimplexRule::new(n, degree).unwrap();
        let a = NormTable::build(&mu, n, k).unwrap();
        let b = NormTable::build_by_quadrature(&mu, n, k, &rule).unwrap();
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            assert_eq!(a.exponent(i), b.exponent(i));
            assert!((a.log_norm(i) - b.log_norm(i)).abs() < 1e-11, "{:?}", a.exponent(i));
        }
    }
}

#[test]
fn trace_identity_in_higher_dimension() {
    let mu = weights(&[1.0, SQRT_2, 3f64.sqrt()]);
    let table = NormTable::build(&mu, 2, 9.0).unwrap();
    let rule = SimplexRule::new(2, 60).unwrap();
    for k in [0.0, 4.0, 9.0] {
        let trace = integrate_window_kernel(&table, k, &rule).unwrap();
        assert!((trace / count_weights(&mu, k) as f64 - 1.0).abs() < 1e-9);
    }
    let tau = CutoffFunction::smooth_bump(0.2, 0.9).unwrap();
    let k = 10.0;
    let expected: f64 = enumerate_weights(&mu, 0.0, k).iter().map(|p| tau.eval(weight_value(&mu, p).unwrap() / k)).sum();
    let trace = integrate_weighted_kernel(&table, &tau, k, &rule).unwrap();
    assert!((trace / expected - 1.0).abs() < 1e-9);
}

#[test]
fn diagonal_five_sphere_closed_form_and_limit() {
    // On S^5 with the diagonal action: dv = 4 dσ, vol = 4π³, and each level m
    // carries C(m+2, 2) orthonormal monomials.
    let mu = weights(&[1.0]);
    let table = NormTable::build(&mu, 2, 200.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let z = random_point(&mut rng, 3);
    let closed = |k: u64| (0..=k).map(|m| ((m + 1) * (m + 2) / 2) as f64).sum::<f64>() / (4.0 * PI.powi(3));
    for k in [0u64, 3, 50, 200] {
        let s = szego_window(&table, k as f64, &z).unwrap();
        assert!((s / closed(k) - 1.0).abs() < 1e-12);
    }
    let ks = [100.0, 200.0];
    let values = szego_window_sweep(&table, &ks, &z).unwrap();
    let sweep = KernelSweep::new(ks.iter().copied().zip(values).collect()).unwrap();
    let fitted = fit_leading_order(&sweep, 3, 1);
    let predicted = predicted_limit(&mu, &z).unwrap();
    assert!((fitted / predicted - 1.0).abs() < 0.02);
}

#[test]
fn geometry_matches_closed_forms_in_higher_dimension() {
    let mu = weights(&[1.0, SQRT_2, 0.7]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let z = random_point(&mut rng, 3);
        let (d, dc) = (det_levi(&mu, &z).unwrap(), det_levi_closed_form(&mu, &z).unwrap());
        assert!((d / dc - 1.0).abs() < 1e-9);
        let (v, vc) = (volume_density(&mu, &z).unwrap(), volume_density_closed_form(&mu, &z).unwrap());
        assert!((v / vc - 1.0).abs() < 1e-9);
    }
}

#[test]
fn cached_table_round_trips_through_a_file() {
    let mu = weights(&[1.0, SQRT_2]);
    let table = NormTable::build(&mu, 1, 200.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    table.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let back = NormTable::read_csv(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, table);
    assert_eq!(back.key(), table.key());
    let z = SpherePoint::from_simplex(&[0.3, 0.7]).unwrap();
    let (a, b) = (szego_window(&table, 200.0, &z).unwrap(), szego_window(&back, 200.0, &z).unwrap());
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn large_exponent_norms_agree_with_a_dense_rule() {
    // A rule of degree 1200 integrates the peaked integrand at |p| ≈ 400.
    let mu = weights(&[1.0, SQRT_2]);
    let rule = SimplexRule::new(1, 1200).unwrap();
    let table = NormTable::build(&mu, 1, 500.0).unwrap();
    for p in [[400i64, 0], [0, 300], [200, 150], [120, 260]] {
        let q = monomial_norm(&mu, &p.into(), &rule).unwrap().ln();
        let s = table.ln_norm_of(&p.into()).unwrap();
        assert!((q - s).abs() < 1e-9, "{p:?}: {q} vs {s}");
    }
}
