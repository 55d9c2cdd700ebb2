use approx::assert_relative_eq;
use gibbsdiv::diversity::{pd_moment_sequence, ConditioningState, PdConditional};
use gibbsdiv::special::ln_gamma;
use gibbsdiv::weights::{gg_weight_integral, gg_weight_sum, TailRule, TiltTable};
use gibbsdiv::{Alpha, Composition, Error, GibbsModel, WeightTable};
use proptest::prelude::*;

fn pd_params() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..0.95).prop_flat_map(|a| (Just(a), (-a + 0.05)..5.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pd_recursion_holds((a, theta) in pd_params()) {
        let model = GibbsModel::pd(Alpha::new(a).unwrap(), theta).unwrap();
        let table = WeightTable::build(&model, 40).unwrap();
        prop_assert!(table.max_recursion_residual(40).unwrap() < 1e-10);
    }

    #[test]
    fn prediction_probabilities_sum_to_one((a, theta) in pd_params(), n in 1usize..30, frac in 0.0f64..1.0) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let alpha = Alpha::new(a).unwrap();
        let table = WeightTable::build(&GibbsModel::pd(alpha, theta).unwrap(), n + 1).unwrap();
        let p = table.predict(n, k).unwrap();
        prop_assert!((p.total(alpha, n, k) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pd_moments_are_log_convex((a, theta) in pd_params(), n in 1usize..60, frac in 0.0f64..1.0) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let state = ConditioningState::new(n, k).unwrap();
        let seq = pd_moment_sequence(Alpha::new(a).unwrap(), theta, state, 10).unwrap();
        prop_assert!(seq.log_convexity_violation() <= 1e-12);
    }

    #[test]
    fn gg_sum_agrees_or_refuses(a in 0.1f64..0.9, beta in 0.2f64..4.0, n in 1usize..15, frac in 0.0f64..1.0) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let alpha = Alpha::new(a).unwrap();
        let integral = gg_weight_integral(alpha, beta, n, k).unwrap();
        match gg_weight_sum(alpha, beta, n, k) {
            Ok(sum) => prop_assert!((sum / integral - 1.0).abs() < 1e-6),
            Err(Error::Precision { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn pd_weights_match_closed_form() {
    // V_{n,k} = Π_{i<k}(θ + iα) / (θ+1)_{n-1}
    let alpha = Alpha::new(0.3).unwrap();
    let table = WeightTable::build(&GibbsModel::pd(alpha, 2.0).unwrap(), 6).unwrap();
    let num: f64 = (1..3).map(|i| 2.0 + 0.3 * i as f64).product();
    let den = (ln_gamma(2.0 + 6.0) - ln_gamma(3.0)).exp();
    assert_relative_eq!(table.value(6, 3).unwrap(), num / den, max_relative = 1e-13);
}

#[test]
fn conditional_mean_closed_form() {
    // r = 1: ((θ+kα)/α) Γ(θ+n)/Γ(θ+n+α)
    let d = PdConditional::new(Alpha::new(0.5).unwrap(), 1.0, ConditioningState::new(10, 3).unwrap()).unwrap();
    let want = 5.0 * (ln_gamma(11.0) - ln_gamma(11.5)).exp();
    assert_relative_eq!(d.moment(1.0).unwrap(), want, max_relative = 1e-13);
}

#[test]
fn weight_table_csv_round_trip() {
    let model = GibbsModel::gen_gamma(Alpha::new(0.5).unwrap(), 1.0).unwrap();
    let table = WeightTable::build(&model, 12).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let back = WeightTable::read_csv(&model, buf.as_slice()).unwrap();
    for n in 1..=12 {
        for k in 1..=n {
            assert_relative_eq!(back.value(n, k).unwrap(), table.value(n, k).unwrap(), max_relative = 1e-15);
            assert_eq!(back.method(n, k).unwrap(), table.method(n, k).unwrap());
        }
    }
    assert!(WeightTable::read_csv(&model, &buf[..buf.len() / 2]).is_err());
}

#[test]
fn tabulated_pd_tilt_reproduces_pd() {
    // h(t) = Γ(θ+1)/Γ(θ/α+1) t^{-θ} turns the stable law into PD(α, θ)
    let (a, theta) = (0.5, 1.0);
    let c = (ln_gamma(theta + 1.0) - ln_gamma(theta / a + 1.0)).exp();
    let tilt = TiltTable::from_fn(|t| c * t.powf(-theta), 1e-3, 1e3, 61, TailRule::Power, TailRule::Power).unwrap();
    let mut csv = Vec::new();
    tilt.write_csv(&mut csv).unwrap();
    let tilt = TiltTable::read_csv(csv.as_slice()).unwrap();

    let alpha = Alpha::new(a).unwrap();
    let tabulated = WeightTable::build(&GibbsModel::tabulated(alpha, tilt).unwrap(), 6).unwrap();
    let pd = GibbsModel::pd(alpha, theta).unwrap();
    let closed = WeightTable::build(&pd, 6).unwrap();
    for n in 1..=6 {
        for k in 1..=n {
            assert_relative_eq!(tabulated.value(n, k).unwrap(), closed.value(n, k).unwrap(), max_relative = 1e-6);
        }
    }
    let comp = Composition::new(vec![3, 2, 1]).unwrap();
    assert_relative_eq!(
        gibbsdiv::weights::eppf(&pd, &comp, &closed).unwrap(),
        gibbsdiv::weights::eppf(&pd, &comp, &tabulated).unwrap(),
        max_relative = 1e-6
    );
}
