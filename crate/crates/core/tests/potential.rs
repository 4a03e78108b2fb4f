use loc1d::potential::{
    c2, empirical_autocorrelation, read_raw, sample_potential, write_raw, PotentialSample,
    PotentialSpec,
};

fn spec(n_grid: usize, box_length: f64, seed: u64) -> PotentialSpec {
    PotentialSpec {
        v0: 0.0325,
        sigma_c: 1.0,
        box_length,
        n_grid,
        seed,
    }
}

fn ensemble(s: &PotentialSpec, n: u64) -> Vec<PotentialSample> {
    (0..n).map(|i| sample_potential(s, i).unwrap()).collect()
}

#[test]
fn correlation_values() {
    let s = spec(1600, 200.0, 0);
    let v2 = s.v0 * s.v0;
    assert_eq!(c2(0.0, &s), v2);
    assert!((c2(1.0, &s) / v2 - 0.606_530_659_712_633_4).abs() < 1e-15);
    assert!(c2(40.0, &s) < 1e-300);
    // wrapped distance on the ring
    assert_eq!(c2(199.0, &s), c2(1.0, &s));
    assert_eq!(c2(-3.0, &s), c2(3.0, &s));
}

#[test]
fn spec_validation() {
    assert!(sample_potential(&spec(1600, 40.0, 0), 0).is_err());
    assert!(sample_potential(&spec(1000, 200.0, 0), 0).is_err());
    let mut s = spec(1600, 200.0, 0);
    s.v0 = 0.0;
    assert!(sample_potential(&s, 0).is_err());
    assert!(sample_potential(&spec(1600, 200.0, 0), 0).is_ok());
}

#[test]
fn samples_are_deterministic() {
    let s = spec(1600, 200.0, 42);
    let a = sample_potential(&s, 3).unwrap();
    let b = sample_potential(&s, 3).unwrap();
    assert!(a
        .values
        .iter()
        .zip(&b.values)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    let c = sample_potential(&s, 4).unwrap();
    assert_ne!(a.values, c.values);
    let other_seed = sample_potential(&spec(1600, 200.0, 43), 3).unwrap();
    assert_ne!(a.values, other_seed.values);
}

#[test]
fn ensemble_statistics() {
    let s = spec(1600, 200.0, 11);
    let samples = ensemble(&s, 2000);
    let acf = empirical_autocorrelation(&samples).unwrap();
    let v2 = s.v0 * s.v0;
    let per_sigma = (s.sigma_c / s.spacing()).round() as usize;
    assert!((acf[0] / v2 - 1.0).abs() < 0.05, "lag 0: {}", acf[0] / v2);
    assert!((acf[per_sigma] / c2(1.0, &s) - 1.0).abs() < 0.10);
    assert!((acf[2 * per_sigma] / c2(2.0, &s) - 1.0).abs() < 0.20);

    // mean: the variance of a box average is V0^2 sqrt(2 pi) sigma / L
    let total: f64 = samples.iter().map(|p| p.values.iter().sum::<f64>()).sum();
    let mean = total / (2000.0 * s.n_grid as f64);
    let cells = s.box_length / ((2.0 * std::f64::consts::PI).sqrt() * s.sigma_c);
    assert!(
        mean.abs() < 3.0 * s.v0 / (2000.0 * cells).sqrt(),
        "mean {mean}"
    );

    // Gaussianity of pooled values
    let (mut m2, mut m4) = (0.0, 0.0);
    let mut count = 0.0;
    for p in &samples {
        for &v in &p.values {
            let d = v - mean;
            m2 += d * d;
            m4 += d * d * d * d;
            count += 1.0;
        }
    }
    m2 /= count;
    m4 /= count;
    let excess = m4 / (m2 * m2) - 3.0;
    assert!(excess.abs() < 0.1, "excess kurtosis {excess}");
}

#[test]
fn stationarity_of_halves() {
    let s = spec(1600, 200.0, 5);
    let samples = ensemble(&s, 1000);
    let half = s.n_grid / 2;
    let lag = 8; // one correlation length
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for p in &samples {
        let l: f64 = (0..half - lag)
            .map(|j| p.values[j] * p.values[j + lag])
            .sum::<f64>()
            / (half - lag) as f64;
        let r: f64 = (half..s.n_grid - lag)
            .map(|j| p.values[j] * p.values[j + lag])
            .sum::<f64>()
            / (half - lag) as f64;
        left.push(l);
        right.push(r);
    }
    let n = samples.len() as f64;
    let ml = left.iter().sum::<f64>() / n;
    let mr = right.iter().sum::<f64>() / n;
    let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    let se = ((var(&left, ml) + var(&right, mr)) / n).sqrt();
    assert!((ml - mr).abs() < 4.0 * se, "{ml} vs {mr} (se {se})");
}

#[test]
fn autocorrelation_trivial_cases() {
    let s = spec(1600, 200.0, 9);
    let mut zero = sample_potential(&s, 0).unwrap();
    zero.values.iter_mut().for_each(|v| *v = 0.0);
    let acf = empirical_autocorrelation(&[zero.clone(), zero]).unwrap();
    assert!(acf.iter().all(|&a| a == 0.0));

    let one = sample_potential(&s, 1).unwrap();
    let ms = one.values.iter().map(|v| v * v).sum::<f64>() / one.values.len() as f64;
    let acf = empirical_autocorrelation(std::slice::from_ref(&one)).unwrap();
    assert!((acf[0] - ms).abs() < 1e-14 * ms);

    let other = sample_potential(&spec(1600, 200.0, 10), 0).unwrap();
    assert!(empirical_autocorrelation(&[one, other]).is_err());
}

#[test]
fn raw_dump_round_trip() {
    let s = spec(1600, 200.0, 21);
    let a = sample_potential(&s, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    write_raw(&path, &a).unwrap();
    let b = read_raw(&path).unwrap();
    assert_eq!(a.spec, b.spec);
    assert_eq!(a.realization_index, b.realization_index);
    assert!(a
        .values
        .iter()
        .zip(&b.values)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}
