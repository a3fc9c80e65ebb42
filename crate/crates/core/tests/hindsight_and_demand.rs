use oio::demand::{parse_csv, sample_poisson, uppd_params, DemandSource};
use oio::simulator::{hindsight_best, hindsight_subgradient};
use oio::{Error, FeasibleSet, Loss, NewsvendorLoss, ProductVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cumulative(demands: &[ProductVector], loss: &NewsvendorLoss, y: &ProductVector) -> f64 {
    demands
        .iter()
        .map(|d| oio::loss::newsvendor_cost(y, d, loss).unwrap())
        .sum()
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, periods: usize) -> (Vec<ProductVector>, NewsvendorLoss) {
    let demands = (0..periods)
        .map(|_| (0..n).map(|_| (rng.random::<f64>() * 8.0 * 100.0).round() / 100.0).collect())
        .collect();
    let h: ProductVector = (0..n).map(|_| 0.1 + rng.random::<f64>() * 4.0).collect();
    let p: ProductVector = (0..n).map(|_| 0.1 + rng.random::<f64>() * 50.0).collect();
    (demands, NewsvendorLoss::new(h, p).unwrap())
}

#[test]
fn box_solution_matches_grid_minimization() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let periods = 1 + rng.random_range(0..25);
        let (demands, loss) = random_instance(&mut rng, 1, periods);
        let set = FeasibleSet::uniform_box(1, 10.0);
        let best = hindsight_best(&demands, &Loss::Newsvendor(loss.clone()), &set).unwrap();
        let mut grid_best = (f64::INFINITY, 0.0);
        for k in 0..=100_000 {
            let y = k as f64 * 1e-4;
            let v = cumulative(&demands, &loss, &[y].into());
            if v < grid_best.0 - 1e-12 {
                grid_best = (v, y);
            }
        }
        assert!((best.level[0] - grid_best.1).abs() <= 1e-4 + 1e-12);
        assert!(best.value <= grid_best.0 + 1e-9);
    }
}

#[test]
fn hindsight_beats_random_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (set, n) in [
        (FeasibleSet::uniform_box(3, 6.0), 3),
        (FeasibleSet::Capacity { n: 3, cap: 5.0 }, 3),
        (FeasibleSet::Capacity { n: 4, cap: 50.0 }, 4),
    ] {
        let (demands, loss) = random_instance(&mut rng, n, 60);
        let best = hindsight_best(&demands, &Loss::Newsvendor(loss.clone()), &set).unwrap();
        assert!(set.contains(&best.level, 1e-12));
        for _ in 0..10_000 {
            let raw: ProductVector = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
            let y = set.project(&raw).unwrap();
            let v = cumulative(&demands, &loss, &y);
            assert!(best.value <= v * (1.0 + 1e-7) + 1e-12);
        }
    }
}

#[test]
fn slack_capacity_agrees_with_box_and_averaging() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let (demands, loss) = random_instance(&mut rng, 3, 40);
        let nv = Loss::Newsvendor(loss.clone());
        let boxed = hindsight_best(&demands, &nv, &FeasibleSet::uniform_box(3, 8.0)).unwrap();
        let cap = FeasibleSet::Capacity { n: 3, cap: 30.0 };
        let capped = hindsight_best(&demands, &nv, &cap).unwrap();
        assert!(boxed.level.distance(&capped.level) <= 1e-4 * cap.diameter());
        let slow = hindsight_subgradient(&demands, &loss, &cap, 100_000).unwrap();
        assert!(slow.value >= capped.value - 1e-9);
        assert!(slow.value <= capped.value * 1.05 + 1e-6);
    }
}

#[test]
fn poisson_mean_and_positivity_frequency() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for lambda in [0.5, 1.0, 2.0, 45.0] {
        let draws: Vec<f64> = (0..100_000).map(|_| sample_poisson(lambda, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = (lambda / draws.len() as f64).sqrt();
        assert!((mean - lambda).abs() < 4.0 * se, "lambda {lambda}: mean {mean}");
        let positive = draws.iter().filter(|&&d| d >= 1.0).count() as f64 / draws.len() as f64;
        let mu = -(-lambda).exp_m1();
        let sd = (mu * (1.0 - mu) / draws.len() as f64).sqrt();
        assert!((positive - mu).abs() <= 4.0 * sd + 1e-12, "lambda {lambda}");
    }
}

#[test]
fn uppd_from_stream_frequency() {
    let source = DemandSource::IidPoisson {
        intensities: [1.0, 2.0].into(),
    };
    let mu = uppd_params(&source).unwrap().mu;
    let mut stream = source.stream(99).unwrap();
    let k = 100_000;
    let hits = (0..k)
        .filter(|_| stream.next_demand().unwrap().iter().all(|&d| d >= 1.0))
        .count() as f64;
    let sd = (mu * (1.0 - mu) / k as f64).sqrt();
    assert!((hits / k as f64 - mu).abs() <= 4.0 * sd);
}

#[test]
fn csv_round_trip_and_errors() {
    let data = parse_csv("a,b\n1,2\n3.5,0\n".as_bytes()).unwrap();
    assert_eq!(data.periods(), 2);
    assert_eq!(data.rows()[1], ProductVector::from([3.5, 0.0]));
    match parse_csv("1,2\n3,x\n".as_bytes()) {
        Err(Error::Ingestion { row, .. }) => assert_eq!(row, 2),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(parse_csv("1,2\n-1,0\n".as_bytes()), Err(Error::Ingestion { row: 2, .. })));
}
