use super::*;

fn al(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

/// Block sizes of every set partition of `[n]`, via restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            let k = labels.iter().max().unwrap() + 1;
            let mut sizes = vec![0; k];
            for &l in labels.iter() {
                sizes[l] += 1;
            }
            out.push(sizes);
            return;
        }
        let top = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=top {
            labels.push(l);
            rec(i + 1, n, labels, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

// V^{GG}_{n,k}(α, β) from a 30-digit evaluation of the λ-integral.
const GG_REFERENCE: &[(f64, f64, usize, usize, f64)] = &[
    (0.5, 1.0, 2, 1, 0.596_347_362_323_194_074_341),
    (0.5, 1.0, 2, 2, 0.701_826_318_838_402_962_83),
    (0.5, 1.0, 5, 2, 0.016_193_997_772_304_403_114),
    (0.3, 0.5, 7, 3, 0.000_364_446_426_957_838_453_8),
    (0.8, 2.0, 10, 4, 1.979_745_204_429_076_461_2e-6),
    (0.3, 2.0, 12, 1, 2.729_754_616_522_881_584_1e-9),
    (0.8, 0.5, 12, 12, 0.112_224_290_862_530_866_34),
    (0.5, 1.0, 6, 2, 0.002_807_513_354_317_389_085),
];

#[test]
fn pd_weight_examples() {
    let a = al(0.5);
    assert!((pd_weight(a, 0.5, 1, 1).unwrap() - 1.0).abs() < 1e-15);
    assert!((pd_weight(a, 0.5, 2, 1).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    assert!((pd_weight(a, 0.5, 2, 2).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    let v21 = pd_weight(a, 0.5, 2, 1).unwrap();
    let v22 = pd_weight(a, 0.5, 2, 2).unwrap();
    assert!((0.5 * v21 + v22 - 1.0).abs() < 1e-14);
    assert!(pd_weight(a, -0.5, 2, 1).is_err());
    assert!(pd_weight(a, 1.0, 2, 3).is_err());
}

#[test]
fn gg_integral_matches_reference() {
    for &(a, b, n, k, want) in GG_REFERENCE {
        let got = gg_weight_integral(al(a), b, n, k).unwrap();
        assert!((got / want - 1.0).abs() < 1e-10, "({a},{b},{n},{k}): {got} vs {want}");
    }
    for &(a, b) in &[(0.3, 0.5), (0.8, 2.0)] {
        assert!((gg_weight_integral(al(a), b, 1, 1).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn gg_sum_matches_reference_or_refuses() {
    let mut answered = 0;
    for &(a, b, n, k, want) in GG_REFERENCE {
        match gg_weight_sum(al(a), b, n, k) {
            Ok(got) => {
                answered += 1;
                assert!((got / want - 1.0).abs() < 1e-6, "({a},{b},{n},{k}): {got} vs {want}");
            }
            Err(Error::Precision { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(answered >= 4);
    assert!((gg_weight_sum(al(0.5), 1.0, 1, 1).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn gg_sum_digit_estimate_is_conservative() {
    for &a in &[0.3, 0.5, 0.8] {
        for &b in &[0.5, 1.0, 2.0] {
            for n in 1..=14 {
                for k in 1..=n {
                    let s = gg_weight_sum_with_digits(al(a), b, n, k).unwrap();
                    if s.digits < 3.0 {
                        continue;
                    }
                    let exact = ln_gg_weight_integral(al(a), b, n, k).unwrap();
                    let actual = (s.ln_value - exact).abs().max(1e-17);
                    assert!(
                        actual < 10f64.powf(-s.digits + 0.5),
                        "({a},{b},{n},{k}): estimated {:.1} digits, error {actual:e}",
                        s.digits
                    );
                }
            }
        }
    }
}

#[test]
fn sum_form_refuses_at_large_n() {
    match gg_weight_sum(al(0.3), 0.5, 40, 2) {
        Err(Error::Precision { digits, required }) => {
            assert!(digits < required);
        }
        other => panic!("expected a precision error, got {other:?}"),
    }
}

#[test]
fn gg_table_recursion_and_methods() {
    let model = GibbsModel::gen_gamma(al(0.5), 1.0).unwrap();
    let table = WeightTable::build(&model, 13).unwrap();
    assert!((table.value(1, 1).unwrap() - 1.0).abs() < 1e-12);
    assert!(table.max_recursion_residual(13).unwrap() < 1e-9);
    assert_eq!(table.method(2, 1).unwrap(), WeightMethod::Sum);
}

#[test]
fn pd_table_recursion() {
    let model = GibbsModel::pd(al(0.3), 2.5).unwrap();
    let table = WeightTable::build(&model, 51).unwrap();
    assert!(table.max_recursion_residual(51).unwrap() < 1e-12);
    assert_eq!(table.method(30, 7).unwrap(), WeightMethod::Closed);
    assert!(matches!(table.value(52, 1), Err(Error::Range(_))));
}

#[test]
fn eppf_examples_and_additivity() {
    let pd = GibbsModel::pd(al(0.5), 0.5).unwrap();
    let t = WeightTable::build(&pd, 8).unwrap();
    let p = eppf(&pd, &Composition::new(vec![2]).unwrap(), &t).unwrap();
    assert!((p - 1.0 / 3.0).abs() < 1e-14);
    assert!((eppf(&pd, &Composition::new(vec![1]).unwrap(), &t).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(
        eppf(&pd, &Composition::new(vec![5, 4]).unwrap(), &t),
        Err(Error::Range(_))
    ));

    let models = [
        GibbsModel::pd(al(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(al(0.5), 1.0).unwrap(),
        GibbsModel::pd(al(0.7), -0.3).unwrap(),
        GibbsModel::gen_gamma(al(0.3), 2.0).unwrap(),
    ];
    for model in &models {
        let table = WeightTable::build(model, 8).unwrap();
        for n in 1..=8 {
            let total: f64 = set_partitions(n)
                .into_iter()
                .map(|parts| eppf(model, &Composition::new(parts).unwrap(), &table).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "{} n={n}: {total}", model.kind());
        }
    }
}

#[test]
fn eppf_is_symmetric() {
    let model = GibbsModel::gen_gamma(al(0.4), 1.5).unwrap();
    let table = WeightTable::build(&model, 10).unwrap();
    let a = eppf(&model, &Composition::new(vec![3, 1, 4, 2]).unwrap(), &table).unwrap();
    let b = eppf(&model, &Composition::new(vec![1, 2, 4, 3]).unwrap(), &table).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stirling_numbers() {
    let s = StirlingTable::new(al(0.5), 30).unwrap();
    assert_eq!(s.value(1, 1).unwrap(), 1.0);
    assert!((s.value(2, 1).unwrap() - 0.5).abs() < 1e-15);
    assert!((s.value(2, 2).unwrap() - 1.0).abs() < 1e-15);
    let pd = GibbsModel::pd(al(0.5), 0.5).unwrap();
    let t = WeightTable::build(&pd, 30).unwrap();
    let total: f64 = block_count_pmf(&t, &s, 3).unwrap().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    for n in 1..=30 {
        let total: f64 = block_count_pmf(&t, &s, n).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn prediction_rule() {
    let (a, theta) = (0.5, 1.5);
    let pd = GibbsModel::pd(al(a), theta).unwrap();
    let t = WeightTable::build(&pd, 20).unwrap();
    let p = predict_probs(&t, 1, 1).unwrap();
    assert!((p.p_new - (theta + a) / (theta + 1.0)).abs() < 1e-15);
    let gg = GibbsModel::gen_gamma(al(0.5), 1.0).unwrap();
    let tg = WeightTable::build(&gg, 6).unwrap();
    for n in 1..6 {
        for k in 1..=n {
            let p = predict_probs(&tg, n, k).unwrap();
            assert!((p.total(al(0.5), n, k) - 1.0).abs() < 1e-10);
        }
    }
    let p = predict_probs(&tg, 2, 1).unwrap();
    let want = gg_weight_integral(al(0.5), 1.0, 3, 2).unwrap() / gg_weight_integral(al(0.5), 1.0, 2, 1).unwrap();
    assert!((p.p_new / want - 1.0).abs() < 1e-9);
    assert!(predict_probs(&tg, 6, 1).is_err());
}

#[test]
fn weight_table_csv_round_trip() {
    let model = GibbsModel::gen_gamma(al(0.5), 1.0).unwrap();
    let table = WeightTable::build(&model, 5).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("n,k,V,method\n1,1,"));
    let back = WeightTable::read_csv(&model, buf.as_slice()).unwrap();
    for n in 1..=5 {
        for k in 1..=n {
            assert_eq!(back.value(n, k).unwrap(), table.value(n, k).unwrap());
            assert_eq!(back.method(n, k).unwrap(), table.method(n, k).unwrap());
        }
    }
}

#[test]
fn generic_weight_reproduces_closed_forms() {
    // h ≡ 1
    let flat = GibbsModel::pd(al(0.5), 0.0).unwrap();
    for (n, k) in [(1, 1), (3, 2), (6, 1), (8, 5)] {
        let g = generic_weight(&flat, n, k).unwrap();
        let c = pd_weight(al(0.5), 0.0, n, k).unwrap();
        assert!((g / c - 1.0).abs() < 1e-7, "({n},{k}): {g} vs {c}");
    }
    let pd = GibbsModel::pd(al(0.5), 1.0).unwrap();
    for (n, k) in [(2, 1), (5, 3), (8, 2)] {
        let g = generic_weight(&pd, n, k).unwrap();
        let c = pd_weight(al(0.5), 1.0, n, k).unwrap();
        assert!((g / c - 1.0).abs() < 1e-7, "({n},{k}): {g} vs {c}");
    }
}

#[test]
fn tabulated_tilts() {
    let a = al(0.5);
    let (theta, c): (f64, f64) = (1.0, (ln_gamma(2.0) - ln_gamma(3.0)).exp());
    let tab = TiltTable::from_fn(|t| c * t.powf(-theta), 1e-3, 1e3, 64, TailRule::Power, TailRule::Power).unwrap();
    let model = GibbsModel::tabulated(a, tab).unwrap();
    for (n, k) in [(1, 1), (4, 2), (8, 3)] {
        let g = generic_weight(&model, n, k).unwrap();
        let want = pd_weight(a, theta, n, k).unwrap();
        assert!((g / want - 1.0).abs() < 1e-6, "({n},{k})");
    }

    let beta: f64 = 1.0;
    let rate = beta.powf(1.0 / a.get());
    let tab = TiltTable::from_fn(|t| (beta - rate * t).exp(), 1e-4, 60.0, 4000, TailRule::Power, TailRule::Zero).unwrap();
    let model = GibbsModel::tabulated(a, tab).unwrap();
    for (n, k) in [(2, 1), (4, 3), (6, 2)] {
        let g = generic_weight(&model, n, k).unwrap();
        let want = gg_weight_integral(a, beta, n, k).unwrap();
        assert!((g / want - 1.0).abs() < 1e-5, "({n},{k}): {g} vs {want}");
    }

    let bad = TiltTable::from_fn(|_| 2.0, 1e-3, 1e3, 8, TailRule::Power, TailRule::Power).unwrap();
    assert!(GibbsModel::tabulated(a, bad).is_err());
}

#[test]
fn model_tilts_are_normalized() {
    for model in [
        GibbsModel::pd(al(0.5), 1.0).unwrap(),
        GibbsModel::pd(al(0.2), -0.1).unwrap(),
        GibbsModel::gen_gamma(al(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(al(0.8), 3.0).unwrap(),
    ] {
        let m = model.tilt_mass().unwrap();
        assert!((m - 1.0).abs() < 1e-9, "{}: {m}", model.kind());
    }
}

#[test]
fn composition_validation() {
    assert!(Composition::new(vec![]).is_err());
    assert!(Composition::new(vec![2, 0]).is_err());
    let c = Composition::new(vec![1, 1, 1]).unwrap();
    assert_eq!((c.n(), c.k()), (3, 3));
}
