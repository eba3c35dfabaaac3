//! Monte Carlo checks against closed-form expectations.

use ogb_core::policies::Ftpl;
use ogb_core::projection::exact_projection;
use ogb_core::run::run_policy;
use ogb_core::theory::{ftpl_zeta, LogBase};
use ogb_core::trace::gen_zipf;
use ogb_core::{LazyState, SamplerState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean occupancy over seeds vs. `C`, in binomial standard errors.
fn occupancy_z(occupancies: &[f64], f: &[f64]) -> f64 {
    let c: f64 = f.iter().sum();
    let var: f64 = f.iter().map(|x| x * (1.0 - x)).sum();
    let mean = occupancies.iter().sum::<f64>() / occupancies.len() as f64;
    (mean - c) / (var / occupancies.len() as f64).sqrt()
}

fn heterogeneous_state(n: usize, c: f64, seed: u64) -> (LazyState, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
    let scale = 1.2 * c / y.iter().sum::<f64>();
    let y: Vec<f64> = y.iter().map(|v| v * scale).collect();
    let f = exact_projection(&y, c).unwrap();
    (LazyState::from_fractional(&f, c).unwrap(), f)
}

#[test]
fn initial_sample_is_unbiased_in_size() {
    let state = LazyState::init_uniform(10_000, 500.0).unwrap();
    let f = state.densify();
    let occ: Vec<f64> = (0..1000).map(|s| SamplerState::new(&state, s).occupancy() as f64).collect();
    let z = occupancy_z(&occ, &f);
    assert!(z.abs() <= 4.0, "z = {z}");

    let (state, f) = heterogeneous_state(10_000, 500.0, 1);
    let occ: Vec<f64> = (0..1000).map(|s| SamplerState::new(&state, 5000 + s).occupancy() as f64).collect();
    let z = occupancy_z(&occ, &f);
    assert!(z.abs() <= 4.0, "z = {z}");
}

#[test]
fn redraw_is_unbiased_in_size() {
    let (state, f) = heterogeneous_state(2000, 100.0, 2);
    let mut sampler = SamplerState::new(&state, 0);
    let occ: Vec<f64> = (1..=1000)
        .map(|s| {
            sampler.redraw_prns(&state, s);
            sampler.occupancy() as f64
        })
        .collect();
    let z = occupancy_z(&occ, &f);
    assert!(z.abs() <= 4.0, "z = {z}");
}

#[test]
fn zipf_counts_follow_the_power_law() {
    let trace = gen_zipf(100, 1_000_000, 1.0, 8).unwrap();
    let counts = trace.counts();
    // Least squares of ln(count) on ln(rank), rank = id + 1.
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (((i + 1) as f64).ln(), (c as f64).ln()))
        .collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    assert!((slope + 1.0).abs() <= 0.05, "slope {slope}");
}

#[test]
fn lfu_settles_on_the_most_popular_items() {
    let trace = gen_zipf(100, 1_000_000, 1.0, 9).unwrap();
    let mut lfu = Ftpl::lfu(100, 10).unwrap();
    run_policy(&mut lfu, &trace).unwrap();
    let cached: Vec<usize> = (0..100).filter(|&i| lfu.is_cached(i)).collect();
    assert_eq!(cached, (0..10).collect::<Vec<_>>());
}

#[test]
fn ftpl_tracks_lfu_on_a_stationary_workload() {
    let (n, c, t) = (1000, 50, 200_000);
    let trace = gen_zipf(n, t, 0.8, 10).unwrap();
    let zeta = ftpl_zeta(n, t as u64, c as f64, LogBase::Natural).unwrap();
    let lfu = run_policy(&mut Ftpl::lfu(n, c).unwrap(), &trace).unwrap();
    let second_half = |hits: &[bool]| hits[t / 2..].iter().filter(|&&h| h).count() as f64 / (t / 2) as f64;
    let lfu_ratio = second_half(&lfu.hits);
    for seed in 0..3 {
        let ftpl = run_policy(&mut Ftpl::new(n, c, zeta, seed).unwrap(), &trace).unwrap();
        let gap = (second_half(&ftpl.hits) - lfu_ratio).abs();
        // Binomial noise of a 10^5-request hit ratio is about 0.0015.
        assert!(gap <= 0.01, "seed {seed}: gap {gap}");
    }
}
