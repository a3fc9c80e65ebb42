use oio::demand::DemandSource;
use oio::dynamics::DynamicKind;
use oio::policies::{Cosd, Osd, Policy, StepSize, UpdateStrategy};
use oio::simulator::{dynamics_audit, feasibility_audit, regret, run, Problem, Trajectory};
use oio::{FeasibleSet, Feedback, Loss, NewsvendorLoss, ProductVector};
use proptest::prelude::*;

fn problem(n: usize, dynamic: DynamicKind, set: FeasibleSet) -> Problem {
    Problem {
        dynamic,
        loss: Loss::Newsvendor(NewsvendorLoss::uniform(n, 1.0, 200.0)),
        set,
        feedback: Feedback::Censored,
    }
}

fn poisson(n: usize, lambda: f64) -> DemandSource {
    DemandSource::IidPoisson {
        intensities: ProductVector::filled(n, lambda),
    }
}

fn bitwise(a: &Trajectory, b: &Trajectory) -> bool {
    a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(r, s)| {
            r.y.iter().zip(s.y.iter()).all(|(u, v)| u.to_bits() == v.to_bits())
                && r.x.iter().zip(s.x.iter()).all(|(u, v)| u.to_bits() == v.to_bits())
                && r.loss.to_bits() == s.loss.to_bits()
        })
}

#[test]
fn every_period_cosd_is_osd() {
    for set in [FeasibleSet::uniform_box(3, 10.0), FeasibleSet::Capacity { n: 3, cap: 6.0 }] {
        let pr = problem(3, DynamicKind::Stateless, set.clone());
        let g = pr.gradient_bound();
        let rates = StepSize::gamma_schedule(0.3, set.diameter(), g);
        let mut osd = Osd::new(set.clone(), ProductVector::zeros(3), rates).unwrap();
        let mut cosd = Cosd::new(set.clone(), ProductVector::zeros(3), UpdateStrategy::EveryPeriod, rates).unwrap();
        let a = run(&pr, &poisson(3, 1.5), &mut osd, 2000, 9).unwrap();
        let b = run(&pr, &poisson(3, 1.5), &mut cosd, 2000, 9).unwrap();
        assert!(bitwise(&a, &b));
    }
}

#[test]
fn stateless_maxcosd_is_adaptive_osd() {
    for gamma in [1e-3, 0.05, 0.7, 4.0] {
        let set = FeasibleSet::uniform_box(2, 10.0);
        let pr = problem(2, DynamicKind::Stateless, set.clone());
        let mut osd = Osd::adaptive(set.clone(), ProductVector::zeros(2), gamma).unwrap();
        let mut max = Cosd::maxcosd(set, ProductVector::zeros(2), gamma).unwrap();
        let a = run(&pr, &poisson(2, 1.0), &mut osd, 3000, 4).unwrap();
        let b = run(&pr, &poisson(2, 1.0), &mut max, 3000, 4).unwrap();
        assert!(bitwise(&a, &b), "gamma = {gamma}");
        assert!(b.records.iter().all(|r| r.updated));
    }
}

#[test]
fn osd_stays_feasible_with_demand_bounded_below() {
    // descent step never undershoots the leftover when γ ≤ ρ/D and d ≥ ρ
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = problem(1, DynamicKind::LostSales, set.clone());
    let source = DemandSource::Deterministic {
        sequence: vec![[1.0].into(), [2.5].into(), [1.0].into(), [7.0].into()],
    };
    let mut osd = Osd::with_gamma(set, [0.0].into(), 0.1, pr.gradient_bound()).unwrap();
    let traj = run(&pr, &source, &mut osd, 5000, 0).unwrap();
    assert!(feasibility_audit(&traj).passed());
}

#[test]
fn constant_demand_regret_is_sublinear() {
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = problem(1, DynamicKind::LostSales, set.clone());
    let source = DemandSource::Deterministic { sequence: vec![[3.0].into()] };
    let mut p = Cosd::maxcosd(set, [0.0].into(), 0.1).unwrap();
    let traj = run(&pr, &source, &mut p, 4000, 0).unwrap();
    let report = regret(&traj, &pr).unwrap();
    assert_eq!(report.hindsight_level, ProductVector::from([3.0]));
    assert!(report.regret <= 2.0 * 200.0 * 10.0 * (4000f64).sqrt());
    assert!(report.all_satisfied());
}

fn dynamics() -> impl Strategy<Value = DynamicKind> {
    prop_oneof![
        Just(DynamicKind::Stateless),
        Just(DynamicKind::Backlogging),
        Just(DynamicKind::LostSales),
        (1usize..4).prop_map(|lifetime| DynamicKind::PerishableFifo { lifetime }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maxcosd_is_always_feasible(
        n in 1usize..4,
        dynamic in dynamics(),
        capacity in any::<bool>(),
        bound in 1.0..20.0f64,
        lambda in 0.1..4.0f64,
        gamma in prop_oneof![1e-4..1e-2f64, 1e-2..1.0f64, 1.0..10.0f64],
        h in 0.1..5.0f64,
        ratio in 1.0..300.0f64,
        seed in any::<u64>(),
    ) {
        let set = if capacity {
            FeasibleSet::Capacity { n, cap: bound }
        } else {
            FeasibleSet::uniform_box(n, bound)
        };
        let pr = Problem {
            dynamic,
            loss: Loss::Newsvendor(NewsvendorLoss::uniform(n, h, h * ratio)),
            set: set.clone(),
            feedback: Feedback::Censored,
        };
        let mut p = Cosd::maxcosd(set, ProductVector::zeros(n), gamma).unwrap();
        let traj = run(&pr, &poisson(n, lambda), &mut p, 400, seed).unwrap();
        prop_assert!(feasibility_audit(&traj).passed());
        prop_assert!(dynamics_audit(&traj).passed());
        let report = regret(&traj, &pr).unwrap();
        prop_assert!(report.all_satisfied());
    }
}

#[test]
fn adaptive_rate_shrinks_across_cycle_ends_and_levels_hold_within_cycles() {
    let set = FeasibleSet::uniform_box(2, 10.0);
    let pr = problem(2, DynamicKind::LostSales, set.clone());
    let mut p = Cosd::maxcosd(set, ProductVector::zeros(2), 2.0).unwrap();
    let mut stream = poisson(2, 0.7).stream(21).unwrap();
    let mut committed_etas = Vec::new();
    let mut previous = p.propose().clone();
    let mut first = true;
    let traj = oio::simulator::run_with_recorder(&pr, &mut stream, &mut p, 3000, |r| {
        if !first && !r.updated {
            assert_eq!(r.y, previous);
        }
        first = false;
        previous = r.y.clone();
        Ok(())
    })
    .unwrap();
    assert_eq!(traj.periods, 3000);

    // replay the rates by hand at cycle ends
    let mut p = Cosd::maxcosd(FeasibleSet::uniform_box(2, 10.0), ProductVector::zeros(2), 2.0).unwrap();
    let mut stream = poisson(2, 0.7).stream(21).unwrap();
    oio::simulator::run_with_recorder(&pr, &mut stream, &mut RecordEta(&mut p, &mut committed_etas), 3000, |_| Ok(()))
        .unwrap();
    let positive: Vec<f64> = committed_etas.into_iter().filter(|&e| e > 0.0).collect();
    assert!(positive.len() > 10);
    assert!(positive.windows(2).all(|w| w[1] <= w[0]));
}

struct RecordEta<'a>(&'a mut Cosd, &'a mut Vec<f64>);

impl Policy for RecordEta<'_> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn propose(&self) -> &ProductVector {
        self.0.propose()
    }
    fn observe(&mut self, g: &ProductVector, x: &ProductVector) -> oio::Result<()> {
        self.0.observe(g, x)?;
        if self.0.cycle_mark().updated {
            self.1.push(self.0.last_eta());
        }
        Ok(())
    }
    fn cycle_mark(&self) -> oio::policies::CycleMark {
        self.0.cycle_mark()
    }
}

#[test]
fn osd_steps_are_bounded_by_the_rate() {
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = problem(1, DynamicKind::Stateless, set.clone());
    let gamma = 0.4;
    let mut osd = Osd::with_gamma(set, [0.0].into(), gamma, pr.gradient_bound()).unwrap();
    let traj = run(&pr, &poisson(1, 2.0), &mut osd, 2000, 1).unwrap();
    for w in traj.records.windows(2) {
        let t = w[0].t as f64;
        assert!(w[1].y.distance(&w[0].y) <= gamma * 10.0 / t.sqrt() + 1e-12);
    }
}

#[test]
fn absolute_deviation_regret_meets_the_stateless_bound() {
    // ℓ_t(y) = |y − 3|
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = Problem {
        dynamic: DynamicKind::Stateless,
        loss: Loss::Newsvendor(NewsvendorLoss::uniform(1, 1.0, 1.0)),
        set: set.clone(),
        feedback: Feedback::FullInfo,
    };
    let source = DemandSource::Deterministic { sequence: vec![[3.0].into()] };
    let mut osd = Osd::with_gamma(set, [0.0].into(), 0.5, 1.0).unwrap();
    let traj = run(&pr, &source, &mut osd, 1000, 0).unwrap();
    let r = regret(&traj, &pr).unwrap();
    let bound = oio::simulator::theoretical_bounds(1000, 1.0, 10.0, 0.5, 1.0, 0.5).unwrap();
    assert!(r.regret <= bound.osd_deterministic);
}

#[test]
fn cup_updates_every_period_when_stock_always_sells_out() {
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = problem(1, DynamicKind::LostSales, set.clone());
    let source = DemandSource::Deterministic { sequence: vec![[10.0].into()] };
    let rates = StepSize::gamma_schedule(0.5, 10.0, 200.0);
    let mut p = Cosd::new(set, [0.0].into(), UpdateStrategy::Cup, rates).unwrap();
    let traj = run(&pr, &source, &mut p, 200, 0).unwrap();
    assert!(traj.records.iter().all(|r| r.updated && r.x == ProductVector::from([0.0])));
}

#[test]
fn maxcosd_updates_every_period_under_positive_demand() {
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = problem(1, DynamicKind::LostSales, set.clone());
    let source = DemandSource::Deterministic {
        sequence: vec![[1.0].into(), [3.0].into(), [1.5].into()],
    };
    let mut p = Cosd::maxcosd(set, [0.0].into(), 0.1).unwrap();
    let traj = run(&pr, &source, &mut p, 2000, 0).unwrap();
    assert!(traj.records.iter().all(|r| r.updated));
}

#[test]
fn maxcosd_freezes_once_demand_stops() {
    let set = FeasibleSet::uniform_box(1, 10.0);
    let pr = problem(1, DynamicKind::LostSales, set.clone());
    let mut sequence = vec![ProductVector::from([1.0]); 20];
    sequence.extend(std::iter::repeat_n(ProductVector::from([0.0]), 500));
    let source = DemandSource::Csv(oio::demand::CsvDataset::from_rows(sequence).unwrap());
    let mut p = Cosd::maxcosd(set, [0.0].into(), 0.05).unwrap();
    let traj = run(&pr, &source, &mut p, 520, 0).unwrap();
    let frozen = &traj.records[25..];
    assert!(frozen.iter().all(|r| !r.updated && r.y == frozen[0].y));
    assert!(frozen[0].y[0] > 0.0);
}
