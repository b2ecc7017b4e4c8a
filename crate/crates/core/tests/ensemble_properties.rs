use hillmap::ensemble::*;
use hillmap::transfer::{invariant_quantile, pushforward_genlogistic, StepDensity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn uniform_golden_draws() {
    let golden: Samples = serde_json::from_str(include_str!("golden/uniform_n4_seed42.json")).unwrap();
    let s = sample_initial(&InitialDistribution::uniform(-2.0, 2.0), 4, 42).unwrap();
    assert_eq!(s, golden);
}

#[test]
fn truncated_gamma_rejects_the_exponential_tail() {
    // P(Γ(1,1) > 4) = e^{-4}.
    let s = sample_initial(&InitialDistribution::shifted_gamma(1.0, 1.0, -2.0), 1_000_000, 3).unwrap();
    let p = (-4f64).exp();
    let sigma = (p * (1.0 - p) / s.draws as f64).sqrt();
    assert!((s.out_of_domain_fraction() - p).abs() < 4.0 * sigma, "{}", s.out_of_domain_fraction());
    assert!(s.values.iter().all(|x| (-2.0..=2.0).contains(x)));
}

#[test]
fn clamping_keeps_the_draw_count() {
    let dist = InitialDistribution::shifted_gamma(1.0, 1.0, -2.0).clamped();
    let s = sample_initial(&dist, 200_000, 8).unwrap();
    assert_eq!(s.draws, 200_000);
    let at_edge = s.values.iter().filter(|&&x| x == 2.0).count();
    assert_eq!(at_edge, s.out_of_domain);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dist = InitialDistribution::shifted_gamma(1.0, 1.0, -2.0);
    let one = pool(1).install(|| convergence_experiment(3, &dist, 300_000, 4, 77).unwrap());
    let four = pool(4).install(|| convergence_experiment(3, &dist, 300_000, 4, 77).unwrap());
    assert_eq!(one.to_json(), four.to_json());
    assert_eq!(one.distances_csv(), four.distances_csv());
}

#[test]
fn different_seeds_differ() {
    let dist = InitialDistribution::uniform(-2.0, 2.0);
    let a = sample_initial(&dist, 100, 1).unwrap();
    let b = sample_initial(&dist, 100, 2).unwrap();
    assert_ne!(a.values, b.values);
}

#[test]
fn exact_invariant_samples_sit_at_the_statistical_floor() {
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let xs: Vec<f64> = (0..n).map(|_| invariant_quantile(rng.random::<f64>()).unwrap()).collect();
    let w = wasserstein1_unsorted(&xs).unwrap();
    assert!(w < 5e-3, "{w}");
    assert!(w < 4.0 * noise_floor(n), "{w} vs floor {}", noise_floor(n));
}

#[test]
fn one_step_matches_transfer_prediction() {
    let n = 200_000;
    let u = StepDensity::constant(-2.0, 2.0, 0.25).unwrap();
    for m in 2..=4 {
        let predicted = pushforward_genlogistic(&u, m, 1 << 14).unwrap().to_delta_step();
        let map = hillmap::maps::MapDescriptor::gen_logistic(m).unwrap();
        let mut xs: Vec<f64> = sample_initial(&InitialDistribution::uniform(-2.0, 2.0), n, 5)
            .unwrap()
            .values
            .iter()
            .map(|&x| hillmap::maps::eval_map(&map, x).unwrap())
            .collect();
        xs.sort_by(f64::total_cmp);
        let mut ks: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let f = predicted.mass_between(-2.0, x);
            ks = ks.max((f - i as f64 / n as f64).abs()).max((f - (i + 1) as f64 / n as f64).abs());
        }
        assert!(ks < 3.0 / (n as f64).sqrt(), "m={m}: {ks}");
    }
}

#[test]
fn fitted_slope_follows_the_inverse_square_rate() {
    // Smooth initial densities lose their mⁿ-th cosine modes at rate m⁻²ⁿ.
    let dist = InitialDistribution::shifted_gamma(1.0, 1.0, -2.0);
    let r = convergence_experiment(3, &dist, 1_000_000, 8, 42).unwrap();
    let slope = r.fitted_slope.unwrap();
    let target = -2.0 * 3f64.ln();
    assert!((slope - target).abs() < 0.15 * target.abs(), "{slope}");
    assert_eq!(r.distances.len(), 9);
    assert!(r.distances.iter().all(|&d| d >= 0.0));
}

#[test]
fn report_exports() {
    let r = convergence_experiment(2, &InitialDistribution::uniform(-2.0, 2.0), 20_000, 3, 1).unwrap();
    let back: EnsembleReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    let csv = r.distances_csv();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("iteration,wasserstein1\n0,"));
}
