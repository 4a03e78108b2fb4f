use loc1d::lyapunov::{
    cumulative_dos_white_noise, effective_wavevector, gamma_born, gamma_model,
    gamma_transfer_matrix, gamma_white_noise, lyapunov_along, matched_noise_strength,
    mean_free_paths, thouless_kk_check,
};
use loc1d::potential::{DisorderModel, PotentialSpec};
use num_complex::Complex64;
use proptest::prelude::*;

const MLOG0: f64 = 0.364_505_566_473_613_5;

fn model(v0: f64) -> DisorderModel {
    DisorderModel { v0, sigma_c: 1.0 }
}

/// Composite Simpson rule on [a, b] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn born_matches_quadrature() {
    let m = model(0.0325);
    let e: f64 = 0.5;
    let p = e.sqrt();
    let oracle = simpson(|x| m.c2(x) * (2.0 * p * x).cos(), -40.0, 40.0, 20000) / (8.0 * e);
    let g = gamma_born(e, &m).unwrap();
    assert!((g / oracle - 1.0).abs() < 1e-10);
    assert!((g - 2.435e-4).abs() < 1e-7);
    assert!(gamma_born(0.0, &m).is_err());
    assert!(gamma_born(-1.0, &m).is_err());
    assert!(gamma_born(500.0, &m).unwrap() < 1e-300);
    let g2 = gamma_born(e, &model(0.065)).unwrap();
    assert!((g2 / g - 4.0).abs() < 1e-12);
}

#[test]
fn matched_strength() {
    let m = model(0.0325);
    let oracle = 2.0 * simpson(|x| m.c2(x), -40.0, 40.0, 20000);
    let d0 = matched_noise_strength(0.0, &m);
    assert!((d0 / oracle - 1.0).abs() < 1e-10);
    assert!((d0 - 5.2953e-3).abs() < 1e-7);
    let e = 0.5;
    assert!((matched_noise_strength(e, &m) - 16.0 * e * gamma_born(e, &m).unwrap()).abs() < 1e-18);
    // white-noise limit: sigma -> 0 with V0^2 sigma fixed makes D flat in E
    let narrow = DisorderModel {
        v0: 0.0325 / 1e-3f64.sqrt(),
        sigma_c: 1e-3,
    };
    let r = matched_noise_strength(5.0, &narrow) / matched_noise_strength(0.0, &narrow);
    assert!((r - 1.0).abs() < 1e-4);
}

#[test]
fn white_noise_limits() {
    for d in [1e-3, 5.3e-3, 0.1] {
        let unit = (d / 4.0f64).powf(2.0 / 3.0);
        let e = 100.0 * unit;
        let g = gamma_white_noise(e, d).unwrap();
        assert!((g / (d / (16.0 * e)) - 1.0).abs() < 0.01);
        let g = gamma_white_noise(-e, d).unwrap();
        assert!((g / e.sqrt() - 1.0).abs() < 0.01);
        let g0 = gamma_white_noise(0.0, d).unwrap();
        assert!((g0 / ((d / 4.0).cbrt() * MLOG0) - 1.0).abs() < 1e-12);
        assert!((g0 / ((d / 4.0).cbrt() * 0.364464) - 1.0).abs() < 2e-4);
    }
    assert!(gamma_white_noise(1.0, -1.0).is_err());
}

#[test]
fn model_is_finite_at_zero_energy() {
    let m = model(0.0325);
    let d0 = matched_noise_strength(0.0, &m);
    let g = gamma_model(0.0, &m);
    assert!((g / (MLOG0 * (d0 / 4.0).cbrt()) - 1.0).abs() < 1e-12);
}

#[test]
fn model_is_continuous_and_positive() {
    for v0 in [0.0165, 0.0325] {
        let m = model(v0);
        let unit = (v0 * v0).powf(2.0 / 3.0);
        let mut prev: Option<f64> = None;
        for i in 0..1000 {
            let e = (-10.0 + 20.0 * i as f64 / 999.0) * unit;
            let g = gamma_model(e, &m);
            assert!(g > 0.0 && g.is_finite());
            if let Some(p) = prev {
                assert!((g / p - 1.0).abs() < 0.05, "jump at E={e}");
            }
            prev = Some(g);
        }
    }
}

#[test]
fn model_approaches_born() {
    let m = model(0.0325);
    let unit = (m.v0 * m.v0 * m.sigma_c).powf(2.0 / 3.0);
    let mut e = 20.0 * unit;
    while e < 3.0 {
        let r = gamma_model(e, &m) / gamma_born(e, &m).unwrap();
        assert!((0.98..=1.02).contains(&r), "E={e}: ratio {r}");
        e *= 1.3;
    }
}

#[test]
fn cumulative_dos_limits_and_monotonicity() {
    let d = 5.3e-3;
    let unit = (d / 4.0f64).powf(2.0 / 3.0);
    let e = 100.0 * unit;
    let n = cumulative_dos_white_noise(e, d).unwrap();
    assert!((n / (e.sqrt() / std::f64::consts::PI) - 1.0).abs() < 0.01);
    assert!(cumulative_dos_white_noise(-100.0 * unit, d).unwrap() < 1e-100);
    let mut prev = -1.0;
    for i in 0..100 {
        let e = (-10.0 + 20.0 * i as f64 / 99.0) * unit;
        let n = cumulative_dos_white_noise(e, d).unwrap();
        assert!(n > prev);
        prev = n;
    }
}

#[test]
fn thouless_relation_reproduces_gamma() {
    let d = 5.3e-3;
    let unit = (d / 4.0f64).powf(2.0 / 3.0);
    for i in 0..20 {
        let eps = -6.0 + 18.0 * i as f64 / 19.0;
        let e = eps * unit;
        let kk = thouless_kk_check(e, d).unwrap();
        let g = gamma_white_noise(e, d).unwrap();
        assert!(
            (kk.gamma / g - 1.0).abs() < 1e-3,
            "eps={eps}: {} vs {g}",
            kk.gamma
        );
        assert!(kk.error < 1e-3 * g);
    }
    let kk = thouless_kk_check(0.0, d).unwrap();
    assert!((kk.gamma / gamma_white_noise(0.0, d).unwrap() - 1.0).abs() < 1e-8);
    // deep in the tail the free tunnelling rate dominates
    let e = -40.0 * unit;
    let kk = thouless_kk_check(e, d).unwrap();
    assert!((kk.gamma / (-e).sqrt() - 1.0).abs() < 1e-3);
    assert!(thouless_kk_check(60.0 * unit, d).is_err());
}

#[test]
fn transfer_matrix_free_particle() {
    let zeros = vec![0.0; 400_000];
    let h = 1.0 / 16.0;
    let g = lyapunov_along(&zeros, h, 0.5, zeros.len());
    assert!(g.abs() < 10.0 / (zeros.len() as f64 * h));
    let g = lyapunov_along(&zeros, h / 4.0, -0.5, 100_000);
    assert!((g / 0.5f64.sqrt() - 1.0).abs() < 0.01, "{g}");
}

#[test]
fn transfer_matrix_rejects_coarse_grids() {
    let spec = PotentialSpec {
        v0: 0.0325,
        sigma_c: 1.0,
        box_length: 1000.0,
        n_grid: 16000,
        seed: 1,
    };
    assert!(gamma_transfer_matrix(&spec, 200.0, 1000, 2).is_err());
    assert!(gamma_transfer_matrix(&spec, 0.5, 20000, 2).is_err());
    assert!(gamma_transfer_matrix(&spec, 0.5, 1000, 0).is_err());
}

#[test]
fn transfer_matrix_near_white_noise() {
    // narrow correlation with the grid at sigma/16
    let sigma = 0.1;
    let h = sigma / 16.0;
    let n = 1 << 21;
    let m = DisorderModel {
        v0: 0.8,
        sigma_c: sigma,
    };
    let spec = PotentialSpec {
        v0: m.v0,
        sigma_c: sigma,
        box_length: n as f64 * h,
        n_grid: n,
        seed: 3,
    };
    for e in [-0.02, 0.0, 0.05] {
        let tm = gamma_transfer_matrix(&spec, e, n, 8).unwrap();
        let d = matched_noise_strength(e, &m);
        let exact = gamma_white_noise(e, d).unwrap();
        assert!(
            (tm.gamma - exact).abs() < 3.0 * tm.stderr + 0.01 * exact,
            "E={e}: tm {} +- {} vs {exact}",
            tm.gamma,
            tm.stderr
        );
    }
}

#[test]
fn transfer_matrix_is_deterministic() {
    let spec = PotentialSpec {
        v0: 0.0325,
        sigma_c: 1.0,
        box_length: 1000.0,
        n_grid: 16000,
        seed: 8,
    };
    let a = gamma_transfer_matrix(&spec, 0.3, 16000, 4).unwrap();
    let b = gamma_transfer_matrix(&spec, 0.3, 16000, 4).unwrap();
    assert_eq!(a.gamma.to_bits(), b.gamma.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn mean_free_path_identities() {
    let m = model(0.0325);
    for e in [0.05, 0.5, 1.0, 2.0, 5.0] {
        let mfp = mean_free_paths(e, &m).unwrap();
        let g = gamma_born(e, &m).unwrap();
        assert!((1.0 / mfp.ell_minus / (2.0 * g) - 1.0).abs() < 1e-12);
        // 1/l_0 from the sine integral
        let p = f64::sqrt(e);
        let oracle = simpson(|x| m.c2(x) * (2.0 * p * x).sin(), 0.0, 40.0, 40000) / (2.0 * e);
        assert!((1.0 / mfp.ell_zero / oracle - 1.0).abs() < 1e-9);
    }
    let mfp = mean_free_paths(0.5, &m).unwrap();
    let oracle = simpson(|x| m.c2(x), 0.0, 40.0, 20000) / 1.0;
    assert!((1.0 / mfp.ell_plus / oracle - 1.0).abs() < 1e-10);
    assert!((1.0 / mfp.ell_plus - 1.3238e-3).abs() < 1e-7);
    assert!(mean_free_paths(0.0, &m).is_err());

    let narrow = DisorderModel {
        v0: 0.0325 / 1e-3f64.sqrt(),
        sigma_c: 1e-3,
    };
    let mfp = mean_free_paths(0.5, &narrow).unwrap();
    assert!((mfp.ell_plus / mfp.ell_minus - 1.0).abs() < 1e-5);
    assert!(mfp.ell_zero > 500.0 * mfp.ell_plus);
}

#[test]
fn effective_wavevector_consistency() {
    let m = model(0.0325);
    let e: f64 = 0.5;
    let p = e.sqrt();
    // on-shell Born self-energy by direct quadrature of
    // Sigma = int c2(x) e^{-ipx} e^{ip|x|} / (2ip) dx
    let re = simpson(|x| m.c2(x) * (2.0 * p * x).sin(), 0.0, 40.0, 40000) / (2.0 * p);
    let im = -simpson(|x| m.c2(x) * (1.0 + (2.0 * p * x).cos()), 0.0, 40.0, 40000) / (2.0 * p);
    let sigma = Complex64::new(re, im);
    let pt = effective_wavevector(e, &m).unwrap();
    let direct = (Complex64::new(e, 0.0) - sigma).sqrt();
    assert!(
        (pt - direct).norm() < 1e-6 * p,
        "{pt} vs {direct}: {}",
        (pt - direct).norm() / p
    );
    assert!(pt.im > 0.0);
    let clean = effective_wavevector(e, &model(0.0)).unwrap();
    assert_eq!(clean, Complex64::new(p, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_positive(v0 in 1e-3f64..0.1, e in -0.5f64..5.0) {
        let g = gamma_model(e, &model(v0));
        prop_assert!(g > 0.0 && g.is_finite());
    }

    #[test]
    fn wavevector_decays(v0 in 1e-3f64..0.1, e in 0.01f64..5.0) {
        prop_assert!(effective_wavevector(e, &model(v0)).unwrap().im > 0.0);
    }

    #[test]
    fn white_noise_scaling(d in 1e-4f64..1.0, eps in -5.0f64..5.0) {
        // gamma(E, D) = (D/4)^(1/3) g(E / (D/4)^(2/3))
        let s = (d / 4.0).cbrt();
        let g1 = gamma_white_noise(eps * s * s, d).unwrap();
        let g2 = gamma_white_noise(eps, 4.0).unwrap();
        prop_assert!((g1 / (s * g2) - 1.0).abs() < 1e-12);
    }
}
