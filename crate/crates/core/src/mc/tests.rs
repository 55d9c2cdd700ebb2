use super::*;
use crate::grid::GridOptions;
use crate::weights::{block_count_pmf, GibbsModel, StirlingTable};

fn a(x: f64) -> Alpha {
    Alpha::new(x).unwrap()
}

fn pd_table(alpha: f64, theta: f64, nmax: usize) -> WeightTable {
    WeightTable::build(&GibbsModel::pd(a(alpha), theta).unwrap(), nmax).unwrap()
}

fn st(n: usize, k: usize) -> ConditioningState {
    ConditioningState::new(n, k).unwrap()
}

#[test]
fn partition_state_invariants() {
    let p = PartitionState::new(vec![3, 1, 2]).unwrap();
    assert_eq!((p.n(), p.k()), (6, 3));
    assert!(PartitionState::new(vec![2, 0]).is_err());
    assert!(PartitionState::new(vec![]).is_err());
}

#[test]
fn grow_single_item() {
    let table = pd_table(0.5, 1.0, 10);
    let mut rng = RandomStream::new(1, 0);
    for _ in 0..100 {
        assert_eq!(grow_partition(&table, 1, &mut rng).unwrap().block_sizes(), &[1]);
    }
    assert!(matches!(grow_partition(&table, 10, &mut rng), Err(Error::Range(_))));
}

#[test]
fn two_items_split_with_prediction_probability() {
    let table = pd_table(0.5, 0.5, 4);
    let mut rng = RandomStream::new(2, 0);
    let reps = 100_000;
    let split = (0..reps)
        .filter(|_| grow_partition(&table, 2, &mut rng).unwrap().k() == 2)
        .count() as f64
        / reps as f64;
    let p = 2.0 / 3.0;
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    assert!((split - p).abs() < 3.0 * se, "{split}");
}

#[test]
fn block_count_law_matches_weights() {
    let table = pd_table(0.5, 1.0, 8);
    let stirling = StirlingTable::new(a(0.5), 8).unwrap();
    let pmf = block_count_pmf(&table, &stirling, 6).unwrap();
    let mut rng = RandomStream::new(3, 0);
    let mut counts = vec![0u64; 6];
    for _ in 0..100_000 {
        let p = grow_partition(&table, 6, &mut rng).unwrap();
        assert_eq!(p.block_sizes().iter().sum::<usize>(), 6);
        counts[p.k() - 1] += 1;
    }
    let out = chi_square_gof(&counts, &pmf).unwrap();
    assert!(out.p_value > 1e-3, "{out:?}");
}

#[test]
fn chain_basics() {
    let table = pd_table(0.5, 1.0, 30);
    let mut rng = RandomStream::new(4, 0);
    assert_eq!(conditional_block_chain(&table, st(10, 3), 0, &mut rng).unwrap(), 0);
    assert!(matches!(
        conditional_block_chain(&table, st(10, 3), 20, &mut rng),
        Err(Error::Range(_))
    ));
    let pmf = new_block_pmf(&table, st(10, 3), 1).unwrap();
    assert!((pmf[1] - (1.0 + 1.5) / 11.0).abs() < 1e-15);
}

/// Sums the probabilities of all 2^m new/old paths.
fn path_enumeration(table: &WeightTable, state: ConditioningState, m: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; m + 1];
    for mask in 0u32..(1 << m) {
        let (mut n, mut k, mut p) = (state.n, state.k, 1.0);
        for step in 0..m {
            let ln_base = table.ln_value(n, k).unwrap();
            if mask >> step & 1 == 1 {
                p *= (table.ln_value(n + 1, k + 1).unwrap() - ln_base).exp();
                k += 1;
            } else {
                let a = table.model().alpha().get();
                p *= (n as f64 - k as f64 * a) * (table.ln_value(n + 1, k).unwrap() - ln_base).exp();
            }
            n += 1;
        }
        pmf[mask.count_ones() as usize] += p;
    }
    pmf
}

#[test]
fn chain_law_matches_path_sum() {
    for model in [
        GibbsModel::pd(a(0.5), 1.0).unwrap(),
        GibbsModel::gen_gamma(a(0.5), 1.0).unwrap(),
    ] {
        let table = WeightTable::build(&model, 20).unwrap();
        let oracle = path_enumeration(&table, st(10, 3), 5);
        let dp = new_block_pmf(&table, st(10, 3), 5).unwrap();
        for (x, y) in oracle.iter().zip(&dp) {
            assert!((x - y).abs() < 1e-12);
        }
        let reps = 100_000;
        let mut rng = RandomStream::new(5, 0);
        let mut counts = [0u64; 6];
        for _ in 0..reps {
            counts[conditional_block_chain(&table, st(10, 3), 5, &mut rng).unwrap()] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            let p = oracle[j];
            let se = (p * (1.0 - p) / reps as f64).sqrt().max(1e-6);
            assert!((c as f64 / reps as f64 - p).abs() < 3.5 * se, "{} j={j}", model.kind());
        }
    }
}

#[test]
fn chain_matches_full_partitions() {
    let table = pd_table(0.5, 1.0, 13);
    let state = st(6, 3);
    let m = 5;
    let reps = 100_000;
    let mut rng = RandomStream::new(6, 0);
    let mut chain = vec![0u64; m + 1];
    for _ in 0..reps {
        chain[conditional_block_chain(&table, state, m, &mut rng).unwrap()] += 1;
    }
    let mut full = vec![0u64; m + 1];
    let mut accepted = 0;
    while accepted < reps {
        let mut p = grow_partition(&table, state.n, &mut rng).unwrap();
        if p.k() != state.k {
            continue;
        }
        extend_partition(&table, &mut p, m, &mut rng).unwrap();
        full[p.k() - state.k] += 1;
        accepted += 1;
    }
    let out = chi_square_two_sample(&chain, &full).unwrap();
    assert!(out.p_value > 1e-3, "{out:?}");
}

#[test]
fn expected_new_blocks_closed_form() {
    let table = pd_table(0.4, 2.0, 60);
    for m in [1, 7, 40] {
        let pmf = new_block_pmf(&table, st(12, 5), m).unwrap();
        let mean: f64 = pmf.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
        let want = pd_expected_new_blocks(a(0.4), 2.0, st(12, 5), m).unwrap();
        assert!((mean / want - 1.0).abs() < 1e-10, "m={m}: {mean} vs {want}");
    }
}

#[test]
fn gg_mass_balance_holds() {
    let table = WeightTable::build(&GibbsModel::gen_gamma(a(0.3), 2.0).unwrap(), 80).unwrap();
    let mut rng = RandomStream::new(7, 0);
    let s = empirical_diversity(&table, st(10, 4), 60, 50, &rng).unwrap();
    assert_eq!(s.values.len(), 50);
    assert!(grow_partition(&table, 79, &mut rng).is_ok());
}

#[test]
fn sample_metadata_and_csv() {
    let table = pd_table(0.5, 1.0, 200);
    let rng = RandomStream::new(8, 3);
    let s = empirical_diversity(&table, st(10, 3), 100, 20, &rng).unwrap();
    assert_eq!((s.seed, s.stream_base, s.total_blocks_offset), (8, 3, 3));
    assert!(s.values.iter().all(|&v| v >= 0.0));
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.starts_with("rep,value\n0,"));
    let mut meta = Vec::new();
    s.write_metadata(&mut meta).unwrap();
    let v: Value = serde_json::from_slice(&meta).unwrap();
    assert_eq!(v["m"], 100);
    assert_eq!(v["model"]["kind"], "pd");
    assert!(v.get("values").is_none());
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_does_not_matter() {
    let table = pd_table(0.5, 1.0, 600);
    let rng = RandomStream::new(9, 0);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| empirical_diversity(&table, st(10, 3), 500, 200, &rng).unwrap().values)
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn ks_null_case_and_coverage() {
    let grid = DensityGrid::tabulate(|s: f64| Ok((-s).exp()), &GridOptions::default()).unwrap();
    let mut rng = RandomStream::new(10, 0);
    let reps = 10_000;
    let xs: Vec<f64> = (0..reps).map(|_| grid.sample(&mut rng)).collect();
    let d = ks_statistic(&xs, &grid).unwrap();
    assert!(d < 1.63 / (reps as f64).sqrt(), "{d}");
    let far = vec![1e6; 10];
    assert!(matches!(ks_statistic(&far, &grid), Err(Error::Range(_))));
}

#[test]
fn jackknife_moments() {
    let grid = DensityGrid::tabulate(|s: f64| Ok((-s).exp()), &GridOptions::default()).unwrap();
    let mut rng = RandomStream::new(11, 0);
    let small: Vec<f64> = (0..1_000).map(|_| grid.sample(&mut rng)).collect();
    let large: Vec<f64> = (0..10_000).map(|_| grid.sample(&mut rng)).collect();
    let ms = empirical_moments(&small, 2).unwrap();
    let ml = empirical_moments(&large, 2).unwrap();
    assert_eq!(ms.moments.values()[0], 1.0);
    for r in 1..=2 {
        let ratio = ms.std_errors[r] / ml.std_errors[r];
        assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.3, "r={r}: {ratio}");
        // Exp(1) moments are r!
        let want = if r == 1 { 1.0 } else { 2.0 };
        assert!((ml.moments.values()[r] - want).abs() < 3.0 * ml.std_errors[r]);
    }
    // the jackknife SE of a mean is the usual s/sqrt(n)
    let n = small.len() as f64;
    let mean = small.iter().sum::<f64>() / n;
    let var = small.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((ms.std_errors[1] - (var / n).sqrt()).abs() < 1e-12);
    assert!(empirical_moments(&small, 7).is_err());
}

#[test]
fn chi_square_helpers() {
    let out = chi_square_gof(&[50, 50], &[0.5, 0.5]).unwrap();
    assert_eq!(out.statistic, 0.0);
    assert!((out.p_value - 1.0).abs() < 1e-12);
    let out = chi_square_gof(&[90, 10], &[0.5, 0.5]).unwrap();
    assert!(out.p_value < 1e-10);
    let out = chi_square_two_sample(&[30, 70, 0], &[300, 700]).unwrap();
    assert!(out.statistic.abs() < 1e-12);
}

#[test]
fn finite_m_drift_is_monotone() {
    let limit = crate::diversity::pd_conditional_moment(a(0.5), 1.0, st(10, 3), 1.0).unwrap();
    let scaled = |m: usize| pd_expected_new_blocks(a(0.5), 1.0, st(10, 3), m).unwrap() / (m as f64).sqrt();
    let exact: Vec<f64> = [500, 1000, 2000, 4000, 8000].iter().map(|&m| scaled(m)).collect();
    assert!(exact.windows(2).all(|w| w[0] < w[1] && w[1] < limit), "{exact:?} vs {limit}");

    let table = pd_table(0.5, 1.0, 2011);
    let rng = RandomStream::new(11, 0);
    let mean = |m: usize| {
        let s = empirical_diversity(&table, st(10, 3), m, 10_000, &rng).unwrap();
        s.values.iter().sum::<f64>() / s.values.len() as f64
    };
    assert!(mean(1000) < mean(2000));
}
