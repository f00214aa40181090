use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wavecast::infometrics::{digamma, ksg_mi, ksg_mi_jittered, nmi_curve};
use wavecast::wavelet::Wavelet;
use wavecast::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn gaussian_pair(rho: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        x.push(a);
        y.push(rho * a + (1.0 - rho * rho).sqrt() * b);
    }
    (x, y)
}

fn uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

/// Series-free digamma for integers: psi(m) = -gamma + sum_{j<m} 1/j.
fn digamma_int(m: usize) -> f64 {
    -EULER_GAMMA + (1..m).map(|j| 1.0 / j as f64).sum::<f64>()
}

/// Quadratic-time reference estimator.
fn brute_force_ksg(x: &[f64], y: &[f64], k: usize) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (x[i] - x[j]).abs().max((y[i] - y[j]).abs()))
            .collect();
        d.sort_by(f64::total_cmp);
        let eps = d[k - 1];
        let nx = (0..n).filter(|&j| j != i && (x[i] - x[j]).abs() < eps).count();
        let ny = (0..n).filter(|&j| j != i && (y[i] - y[j]).abs() < eps).count();
        acc += digamma_int(nx + 1) + digamma_int(ny + 1);
    }
    digamma_int(k) + digamma_int(n) - acc / n as f64
}

#[test]
fn digamma_closed_forms() {
    assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-10);
    assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-10);
    // psi(1/2) = -gamma - 2 ln 2
    assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-10);
    for m in 1..60 {
        assert!((digamma(m as f64).unwrap() - digamma_int(m)).abs() < 1e-10);
    }
    assert!(matches!(digamma(0.0), Err(Error::Domain(_))));
    assert!(matches!(digamma(-1.5), Err(Error::Domain(_))));
}

#[test]
fn gaussian_oracle() {
    for rho in [0.0f64, 0.5, 0.9] {
        let (x, y) = gaussian_pair(rho, 10_000, 7);
        let est = ksg_mi(&x, &y, 10).unwrap();
        let truth = -0.5 * (1.0 - rho * rho).ln();
        assert!((est.value - truth).abs() < 0.05, "rho {rho}: {} vs {truth}", est.value);
        assert_eq!((est.k, est.n), (10, 10_000));
    }
}

#[test]
fn independent_uniforms_near_zero() {
    let x = uniforms(10_000, 1);
    let y = uniforms(10_000, 2);
    let est = ksg_mi(&x, &y, 10).unwrap();
    assert!((-0.02..=0.05).contains(&est.raw), "{}", est.raw);
    assert!(est.value >= 0.0);
}

#[test]
fn matches_brute_force() {
    for (seed, rho) in [(1, 0.0), (2, 0.6), (3, 0.95)] {
        let (x, y) = gaussian_pair(rho, 400, seed);
        for k in [1, 3, 10] {
            let fast = ksg_mi(&x, &y, k).unwrap().raw;
            let slow = brute_force_ksg(&x, &y, k);
            assert!((fast - slow).abs() < 1e-9, "k {k}: {fast} vs {slow}");
        }
    }
}

#[test]
fn identical_inputs_are_finite() {
    let x = uniforms(2000, 3);
    let est = ksg_mi(&x, &x, 10).unwrap();
    assert!(est.value.is_finite() && est.value > 2.0);
    let j = ksg_mi_jittered(&x, &x, 10, 5).unwrap();
    assert!(j.value.is_finite() && j.value > 2.0);
}

#[test]
fn input_errors() {
    let x = uniforms(10, 4);
    assert!(matches!(
        ksg_mi(&x, &x, 10),
        Err(Error::InsufficientSamples { k: 10, n: 10 })
    ));
    let mut bad = uniforms(50, 5);
    bad[3] = f64::NAN;
    assert!(matches!(ksg_mi(&bad, &bad, 5), Err(Error::Data(_))));
    assert!(ksg_mi(&x, &x[..5], 2).is_err());
}

#[test]
fn symmetric_in_arguments() {
    let (x, y) = gaussian_pair(0.7, 3000, 8);
    let a = ksg_mi(&x, &y, 10).unwrap().raw;
    let b = ksg_mi(&y, &x, 10).unwrap().raw;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn affine_invariance() {
    let (x, y) = gaussian_pair(0.8, 10_000, 9);
    let base = ksg_mi(&x, &y, 10).unwrap().value;
    let xs: Vec<f64> = x.iter().map(|v| 3.5 * v - 2.0).collect();
    let ys: Vec<f64> = y.iter().map(|v| -0.25 * v + 10.0).collect();
    let moved = ksg_mi(&xs, &ys, 10).unwrap().value;
    assert!((base - moved).abs() < 0.01);
}

fn smooth_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 0.0;
    (0..n)
        .map(|i| {
            level = 0.98 * level + 0.2 * rng.gen_range(-1.0..1.0);
            (i as f64 / 90.0).sin() + level
        })
        .collect()
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &t in &idx[i..=j] {
                r[t] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn nmi_curve_shape() {
    let y = smooth_signal(3000, 10);
    let rates = [0.0, 0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999];
    for w in Wavelet::ALL {
        let curve = nmi_curve(&y, w, &rates, 10, 42).unwrap();
        assert_eq!(curve[0].nmi, 1.0);
        assert!(curve.iter().all(|p| (0.0..=1.0).contains(&p.nmi)));
        let r: Vec<f64> = curve.iter().map(|p| p.rate).collect();
        let v: Vec<f64> = curve.iter().map(|p| p.nmi).collect();
        assert!(spearman(&r, &v) <= 0.0, "{w}: {v:?}");
        // Deterministic for a fixed seed.
        assert_eq!(nmi_curve(&y, w, &rates, 10, 42).unwrap(), curve);
    }
    assert!(nmi_curve(&y, Wavelet::Bior1_1, &[0.5, 0.4], 10, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_symmetry_and_bounds(seed in any::<u64>(), n in 12usize..400, k in 1usize..10, rho in -0.99f64..0.99) {
        let (x, y) = gaussian_pair(rho, n, seed);
        let a = ksg_mi(&x, &y, k).unwrap();
        let b = ksg_mi(&y, &x, k).unwrap();
        prop_assert!((a.raw - b.raw).abs() < 1e-9);
        prop_assert!(a.value >= 0.0);
        prop_assert!((a.raw - brute_force_ksg(&x, &y, k)).abs() < 1e-9);
    }

    #[test]
    fn prop_nmi_in_unit_interval(seed in any::<u64>(), n in 64usize..800, rate in 0.01f64..0.999) {
        let y = smooth_signal(n, seed);
        let curve = nmi_curve(&y, Wavelet::Bior2_8, &[0.0, rate], 5, seed).unwrap();
        prop_assert_eq!(curve[0].nmi, 1.0);
        prop_assert!((0.0..=1.0).contains(&curve[1].nmi));
    }
}
