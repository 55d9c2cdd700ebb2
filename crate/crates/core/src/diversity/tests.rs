use super::*;
use crate::quad::{integrate_breaks, QuadConfig};
use crate::rng::RandomStream;
use crate::special::ln_rising;

fn a(x: f64) -> Alpha {
    Alpha::new(x).unwrap()
}

fn st(n: usize, k: usize) -> ConditioningState {
    ConditioningState::new(n, k).unwrap()
}

/// `∫ f ds` over `s = e^x`, `x` within `[-20, 3]` of `ln center`.
fn mass<F: Fn(f64) -> f64>(f: F, center: f64) -> f64 {
    let c = center.ln();
    let breaks: Vec<f64> = (0..=23).map(|i| c - 20.0 + i as f64).collect();
    integrate_breaks(|x: f64| f(x.exp()) * x.exp(), &breaks, &QuadConfig::relative(1e-9))
        .unwrap()
        .value
}

#[test]
fn gtilde_normalized_and_moments() {
    for &(al, n, k) in &[(0.5, 10, 3), (0.7, 12, 5)] {
        let g = Gtilde::new(a(al), st(n, k)).unwrap();
        let m0 = mass(|s| g.pdf(s).unwrap(), g.moment(1.0));
        assert!((m0 - 1.0).abs() < 1e-6, "alpha={al}: mass {m0}");
        for r in 1..=3 {
            let rf = r as f64;
            let m = mass(|s| s.powf(rf) * g.pdf(s).unwrap(), g.moment(1.0));
            let want = (ln_rising(k as f64, rf) - ln_rising(n as f64, rf * al)).exp();
            assert!((m / want - 1.0).abs() < 1e-5, "r={r}: {m} vs {want}");
            assert!((g.moment(rf) / want - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn gtilde_grid() {
    let g = Gtilde::new(a(0.5), st(10, 3)).unwrap();
    let grid = DensityGrid::tabulate(|s| g.pdf(s), &GridOptions::default().centered_at(g.moment(1.0))).unwrap();
    grid.check_normalized(1e-6).unwrap();
    assert!(grid.trapezoid_residual() < 1e-10);
    for r in 1..=3 {
        let rf = r as f64;
        assert!((grid.moment(rf) / g.moment(rf) - 1.0).abs() < 1e-4);
    }
}

#[test]
fn pd_theta_zero_is_gtilde() {
    let state = st(10, 3);
    let g = Gtilde::new(a(0.5), state).unwrap();
    let model = GibbsModel::pd(a(0.5), 0.0).unwrap();
    let cond = ConditionalDensity::new(&model, state).unwrap();
    let pd = PdConditional::new(a(0.5), 0.0, state).unwrap();
    for &s in &[0.05, 0.3, 1.0, 2.5, 7.0] {
        let want = g.pdf(s).unwrap();
        assert!((cond.pdf(s).unwrap() / want - 1.0).abs() < 1e-9);
        assert!((pd.pdf(s).unwrap() / want - 1.0).abs() < 1e-9);
    }
}

#[test]
fn pd_fast_path_matches_general() {
    for &(al, th, n, k) in &[(0.5, 1.0, 10, 3), (0.3, 2.5, 7, 4), (0.8, -0.4, 12, 6)] {
        let state = st(n, k);
        let model = GibbsModel::pd(a(al), th).unwrap();
        let cond = ConditionalDensity::new(&model, state).unwrap();
        assert_eq!(cond.normalizer_method(), NormalizerMethod::Closed);
        let pd = PdConditional::new(a(al), th, state).unwrap();
        let mean = pd.moment(1.0).unwrap();
        for i in 0..50 {
            let s = mean * (-3.0 + 6.0 * i as f64 / 49.0).exp();
            let (x, y) = (cond.pdf(s).unwrap(), pd.pdf(s).unwrap());
            if y > 1e-250 {
                assert!((x / y - 1.0).abs() < 1e-8, "alpha={al} s={s}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn pd_normalized_by_weight() {
    let model = GibbsModel::pd(a(0.5), 1.0).unwrap();
    let cond = ConditionalDensity::new(&model, st(10, 3)).unwrap();
    let m0 = mass(|s| cond.pdf(s).unwrap(), cond.gtilde().moment(1.0));
    assert!((m0 - 1.0).abs() < 1e-6, "{m0}");
}

#[test]
fn pd_moments() {
    let state = st(2, 1);
    let m = pd_conditional_moment(a(0.5), 1.0, state, 1.0).unwrap();
    assert!((m - 1.805_41).abs() < 1e-5, "{m}");
    assert_eq!(pd_conditional_moment(a(0.5), 1.0, state, 0.0).unwrap(), 1.0);

    let pd = PdConditional::new(a(0.5), 1.0, st(10, 3)).unwrap();
    let grid = pd.tabulate().unwrap();
    grid.check_normalized(1e-6).unwrap();
    for r in 1..=3 {
        let rf = r as f64;
        let want = pd.moment(rf).unwrap();
        assert!((grid.moment(rf) / want - 1.0).abs() < 1e-5, "r={r}");
    }

    // θ = 0 reduces to the g̃ moments
    let g = Gtilde::new(a(0.7), st(12, 5)).unwrap();
    for r in 0..4 {
        let rf = r as f64;
        let x = pd_conditional_moment(a(0.7), 0.0, st(12, 5), rf).unwrap();
        assert!((x / g.moment(rf) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn moment_sequences_log_convex() {
    for &(al, th) in &[(0.2, 0.0), (0.5, 1.0), (0.9, -0.5), (0.5, 20.0)] {
        let seq = pd_moment_sequence(a(al), th, st(15, 4), 10).unwrap();
        assert_eq!(seq.order(), 10);
        assert!(seq.is_log_convex(1e-9), "alpha={al} theta={th}");
    }
    let bad = MomentSequence::new(vec![1.0, 2.0, 3.0]).unwrap();
    assert!(!bad.is_log_convex(1e-9));
    assert!(MomentSequence::new(vec![2.0, 1.0]).is_err());
}

#[test]
fn chf_series() {
    let state = st(10, 3);
    let c = chf_partial_sum(a(0.5), 1.0, state, 0.0, 12).unwrap();
    assert_eq!((c.re, c.im), (1.0, 0.0));
    assert!(!c.diverging);

    // Taylor coefficients are the moments
    let t = 1e-3;
    let c = chf_partial_sum(a(0.5), 1.0, state, t, 1).unwrap();
    let m1 = pd_conditional_moment(a(0.5), 1.0, state, 1.0).unwrap();
    assert!((c.im / t - m1).abs() < 1e-12);

    // the series converges and agrees with quadrature against the density
    let pd = PdConditional::new(a(0.5), 1.0, state).unwrap();
    let t = 0.5;
    let c = chf_partial_sum(a(0.5), 1.0, state, t, 40).unwrap();
    assert!(c.next_term < 1e-14);
    let re = mass(|s| (t * s).cos() * pd.pdf(s).unwrap(), m1);
    let im = mass(|s| (t * s).sin() * pd.pdf(s).unwrap(), m1);
    assert!((c.re - re).abs() < 1e-8 && (c.im - im).abs() < 1e-8, "{c:?} vs {re} {im}");

    let c = chf_partial_sum(a(0.5), 1.0, state, 50.0, 3).unwrap();
    assert!(c.diverging);
}

#[test]
fn prop4() {
    for &al in &[0.3, 0.5, 0.8] {
        for &th in &[0.0, 1.0] {
            let gap = prop4_check(a(al), th, st(10, 3), 10).unwrap();
            assert!(gap < 1e-10, "alpha={al} theta={th}: {gap}");
        }
    }
    assert!(prop4_check(a(0.5), 1.0, st(10, 3), 0).unwrap() == 0.0);
    assert!(prop4_check(a(0.5), 1.0, st(10, 3), 11).is_err());
}

#[test]
fn prop4_domain() {
    // n/α - k > n - k >= 0 for every valid state
    for n in 1..30 {
        for k in 1..=n {
            assert!(prop4_check(a(0.999), 0.0, st(n, k), 3).is_ok());
        }
    }
}

#[test]
fn gg_matches_generic() {
    let state = st(6, 2);
    let gg = GgConditional::new(a(0.5), 1.0, state).unwrap();
    assert_eq!(gg.normalizer_method(), NormalizerMethod::Sum);
    let model = GibbsModel::gen_gamma(a(0.5), 1.0).unwrap();
    let cond = ConditionalDensity::new(&model, state).unwrap();
    let mean = cond.gtilde().moment(1.0);
    for i in 0..50 {
        let s = mean * (-3.0 + 6.0 * i as f64 / 49.0).exp();
        let (x, y) = (gg.pdf(s).unwrap(), cond.pdf(s).unwrap());
        if y > 1e-250 {
            assert!((x / y - 1.0).abs() < 1e-6, "s={s}: {x} vs {y}");
        }
    }
    let m0 = mass(|s| gg.pdf(s).unwrap(), mean);
    assert!((m0 - 1.0).abs() < 1e-6, "{m0}");
    let m0 = mass(|s| cond.pdf(s).unwrap(), mean);
    assert!((m0 - 1.0).abs() < 1e-5, "{m0}");
}

#[test]
fn gg_fallback_normalizer() {
    let state = st(40, 2);
    let gg = GgConditional::new(a(0.3), 0.5, state).unwrap();
    assert_eq!(gg.normalizer_method(), NormalizerMethod::IntegralFallback);
    let m0 = mass(|s| gg.pdf(s).unwrap(), 1.0);
    assert!((m0 - 1.0).abs() < 1e-6, "{m0}");
}

#[test]
fn gg_small_beta_is_gtilde() {
    let state = st(6, 2);
    let gg = GgConditional::new(a(0.5), 1e-4, state).unwrap();
    let g = Gtilde::new(a(0.5), state).unwrap();
    for &s in &[0.2, 0.6, 1.0, 2.0, 4.0] {
        assert!((gg.pdf(s).unwrap() / g.pdf(s).unwrap() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn normalizer_matches_quadrature() {
    let models = [
        GibbsModel::pd(a(0.5), 1.0).unwrap(),
        GibbsModel::pd(a(0.3), -0.2).unwrap(),
        GibbsModel::gen_gamma(a(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(a(0.7), 3.0).unwrap(),
    ];
    for model in &models {
        for &(n, k) in &[(5, 2), (10, 3)] {
            let cond = ConditionalDensity::new(model, st(n, k)).unwrap();
            let direct = mass(
                |s| model.ln_tilt_diversity(s).exp() * cond.gtilde().pdf(s).unwrap(),
                cond.gtilde().moment(1.0),
            );
            assert!(
                (direct / cond.normalizer() - 1.0).abs() < 1e-5,
                "{} n={n} k={k}: {direct} vs {}",
                model.kind(),
                cond.normalizer()
            );
            // dividing the tilt back out recovers g̃
            for &s in &[0.3, 1.0, 3.0] {
                let back = cond.pdf(s).unwrap() * cond.normalizer() / model.ln_tilt_diversity(s).exp();
                assert!((back / cond.gtilde().pdf(s).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn unconditional_normalized() {
    for model in [
        GibbsModel::pd(a(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(a(0.5), 1.0).unwrap(),
    ] {
        let m0 = mass(|s| unconditional_pdf(&model, s).unwrap(), 1.0);
        assert!((m0 - 1.0).abs() < 1e-6, "{}: {m0}", model.kind());
        let grid = tabulate_unconditional(&model).unwrap();
        grid.check_normalized(1e-6).unwrap();
    }
    let model = GibbsModel::pd(a(0.5), 0.0).unwrap();
    for &s in &[0.1, 1.0, 3.0] {
        let x = unconditional_pdf(&model, s).unwrap();
        assert!((x / crate::stable::ml_pdf(a(0.5), s).unwrap() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn remark2_small() {
    let rng = RandomStream::new(7, 0);
    let out = remark2_check(a(0.5), st(10, 3), 20_000, &rng).unwrap();
    assert!(out.ks < 0.02, "{}", out.ks);
    let again = remark2_check(a(0.5), st(10, 3), 20_000, &rng).unwrap();
    assert_eq!(out.ks, again.ks);
    let out = remark2_check(a(0.6), st(5, 5), 20_000, &rng).unwrap();
    assert!(out.ks < 0.02, "{}", out.ks);
    assert!(remark2_check(a(0.5), st(10, 3), 100, &rng).is_err());
}

#[test]
fn ks_statistic() {
    let mut x = vec![1.0, 2.0, 3.0, 4.0];
    let mut y = vec![1.0, 2.0, 3.0, 4.0];
    assert_eq!(two_sample_ks(&mut x, &mut y), 0.0);
    let mut y = vec![10.0, 20.0];
    assert_eq!(two_sample_ks(&mut x, &mut y), 1.0);
    let mut y = vec![2.5];
    assert_eq!(two_sample_ks(&mut x, &mut y), 0.5);
}

#[test]
fn tilting_structure() {
    let models = [
        GibbsModel::pd(a(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(a(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(a(0.3), 2.0).unwrap(),
    ];
    for model in &models {
        let d = ConditionalDensity::new(model, st(6, 2)).unwrap();
        let center = d.gtilde().moment(1.0);
        for i in 0..20 {
            let s = center * (-2.0 + 0.2 * i as f64).exp();
            // in logs, since the GG tilt underflows at small s
            let back = d.ln_pdf(s).unwrap() + d.normalizer().ln() - model.ln_tilt_diversity(s);
            let want = d.gtilde().ln_pdf(s).unwrap();
            assert!((back - want).exp_m1().abs() < 1e-9, "{} s={s}: {back} vs {want}", model.kind());
        }
    }
}
