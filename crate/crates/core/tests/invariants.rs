use gibbscache_core::gibbs::exact::{expected_hit_rate, hit_rates, stationary_distribution};
use gibbscache_core::gibbs::{anneal_beta, validate_beta0, BetaSchedule, GibbsChain, GibbsParams};
use gibbscache_core::model::local_energy;
use gibbscache_core::oracle::enumerate_optimal;
use gibbscache_core::rng::replication_seed;
use gibbscache_core::sim::{run, Learning, SimConfig};
use gibbscache_core::subsets::PlacementSpace;
use gibbscache_core::traffic::estimated_local_energy;
use gibbscache_core::{BsSet, CellTopology, ContentCatalog, Placement};
use proptest::prelude::*;

fn sec6() -> (CellTopology, ContentCatalog) {
    (
        CellTopology::from_intervals(&[(0.0, 6.0), (1.0, 10.0)]).unwrap(),
        ContentCatalog::from_popularities(0.1, &[0.55, 0.45]).unwrap(),
    )
}

fn best() -> Placement {
    Placement::from_columns(2, 1, &[vec![1], vec![0]]).unwrap()
}

#[test]
fn expected_hit_rate_rises_with_beta() {
    let (top, cat) = sec6();
    let rates = cat.rates(&top);
    let space = PlacementSpace::new(2, 2, 1, 100).unwrap();
    let h = hit_rates(&top, &rates, &space);
    let curve: Vec<f64> = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
        .iter()
        .map(|&b| expected_hit_rate(&h, &stationary_distribution(&top, &rates, &space, b).unwrap()))
        .collect();
    assert!(curve.windows(2).all(|w| w[0] <= w[1]), "{curve:?}");
    assert!(curve.iter().all(|&e| e <= 0.765 + 1e-12));
    assert!((curve[0] - 0.625).abs() < 1e-12);
}

/// Fraction of slots on the optimum in each third of an annealed run,
/// against the same average of the exact law at the current β.
#[test]
fn annealed_chain_concentrates_by_thirds() {
    let (top, cat) = sec6();
    let rates = cat.rates(&top);
    let space = PlacementSpace::new(2, 2, 1, 100).unwrap();
    let best_index = space.index_of(&best()).unwrap() as usize;
    let n = 1_000_000u64;
    let start = Placement::uniform(2, 2, &[0]).unwrap();
    let mut chain = GibbsChain::new(&top, start, &GibbsParams::new(BetaSchedule::Annealed { beta0: 1.0 }, 17)).unwrap();
    let mut thirds = [0u64; 3];
    let mut reference = [0.0; 3];
    let mut last_period = u64::MAX;
    let mut pi_best = 0.0;
    for t in 0..n {
        let period = t / 2;
        if period != last_period {
            let pi = stationary_distribution(&top, &rates, &space, anneal_beta(1.0, t, 2)).unwrap();
            pi_best = pi[best_index];
            last_period = period;
        }
        chain.step(&rates);
        let third = (3 * t / n) as usize;
        reference[third] += pi_best;
        if chain.placement() == &best() {
            thirds[third] += 1;
        }
    }
    let size = [n / 3, n / 3, n - 2 * (n / 3)];
    let frac: Vec<f64> = thirds.iter().zip(size).map(|(&c, s)| c as f64 / s as f64).collect();
    let expect: Vec<f64> = reference.iter().zip(size).map(|(&r, s)| r / s as f64).collect();
    assert!(frac.windows(2).all(|w| w[0] <= w[1]), "{frac:?}");
    for (f, e) in frac.iter().zip(&expect) {
        assert!((f - e).abs() < 0.03, "{frac:?} vs {expect:?}");
    }
}

#[test]
fn learned_rates_reproduce_local_energy() {
    let (top, cat) = sec6();
    let mut cfg = SimConfig::new(top.clone(), cat.clone(), 1, BetaSchedule::Fixed(5.0));
    cfg.horizon = 1e5;
    cfg.learning = Some(Learning::default());
    let trace = run(&cfg, 8).unwrap();
    let est = &trace.estimates[0];
    for other in 0..2 {
        for candidate in 0..2 {
            let a = Placement::from_columns(2, 1, &[vec![candidate], vec![other]]).unwrap();
            let truth = local_energy(&top, &cat, &a, 0).unwrap();
            let learned = estimated_local_energy(&top, est, &a, 0).unwrap();
            assert!((learned / truth - 1.0).abs() < 0.03, "{learned} vs {truth}");
        }
    }
}

fn small_instance() -> impl Strategy<Value = (CellTopology, ContentCatalog, usize)> {
    (1usize..=3, 2usize..=4)
        .prop_flat_map(|(n, m)| {
            let masks = (1u64 << n) - 1;
            (
                Just(n),
                prop::collection::vec(prop::option::weighted(0.6, 0.1f64..5.0), masks as usize),
                prop::collection::vec(0.05f64..1.0, m),
                1..=2.min(m - 1),
            )
        })
        .prop_map(|(n, areas, intensities, k)| {
            let mut segments: Vec<(BsSet, f64)> = areas
                .iter()
                .enumerate()
                .filter_map(|(idx, a)| a.map(|a| (BsSet::from_bits(idx as u64 + 1), a)))
                .collect();
            if segments.is_empty() {
                segments.push((BsSet::from_bits((1 << n) - 1), 1.0));
            }
            (
                CellTopology::from_segments(n, segments).unwrap(),
                ContentCatalog::new(intensities).unwrap(),
                k,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The annealed sampler's terminal state, over 50 seeded runs, lands in
    /// the oracle's argmax set about as often as the exact law at the final
    /// β predicts.
    #[test]
    fn annealed_terminal_tracks_oracle((top, cat, k) in small_instance(), seed in any::<u64>()) {
        let opt = enumerate_optimal(&top, &cat, k, 10_000).unwrap();
        prop_assume!(opt.delta > 1e-9);
        let n = top.n_bs();
        let beta0 = match validate_beta0(0.99, opt.delta, opt.h_max, n) {
            Ok(()) => 0.99,
            Err(v) => 0.99 * v.max_admissible,
        };
        let slots = 20_000u64;
        let rates = cat.rates(&top);
        let space = PlacementSpace::new(cat.len(), n, k, 10_000).unwrap();
        let pi = stationary_distribution(&top, &rates, &space, anneal_beta(beta0, slots - 1, n)).unwrap();
        let p: f64 = opt.argmax.iter().map(|b| pi[space.index_of(b).unwrap() as usize]).sum();

        let runs = 50;
        let mut inside = 0;
        for r in 0..runs {
            let start = space.placement(r % space.len());
            let params = GibbsParams::new(BetaSchedule::Annealed { beta0 }, replication_seed(seed, r));
            let mut chain = GibbsChain::new(&top, start, &params).unwrap();
            for _ in 0..slots {
                chain.step(&rates);
            }
            inside += opt.contains_optimum(chain.placement()) as u32;
        }
        let frac = inside as f64 / runs as f64;
        let sd = (p * (1.0 - p) / runs as f64).sqrt();
        prop_assert!((frac - p).abs() <= 4.0 * sd + 0.03, "{frac} vs exact {p}");
    }
}
