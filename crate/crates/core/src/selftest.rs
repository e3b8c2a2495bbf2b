//! Randomized comparisons of the production solvers against the brute-force
//! references in [`crate::oracle`].

use ndarray::Array2;
use rand::Rng as _;
use serde::Serialize;

use crate::ferrying::{cycle_crossover, qap_cost, run_qap_ga, solve_tsp, GaParams, Permutation, WeightKind, WeightMatrix};
use crate::geometry::Point2;
use crate::oracle;
use crate::rng::{self, Stream};
use crate::transport::{build_problem, solve, CostKind, TransportProblem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

fn random_points(n: usize, rng: &mut rng::Rng) -> Vec<Point2<f64>> {
    (0..n).map(|_| Point2::new(rng.random_range(-4000.0..4000.0), rng.random_range(-4000.0..4000.0))).collect()
}

/// Random transportation instance with at most 6 supply rows, 3 demand
/// columns and margins of at most 3. Every other instance comes from the
/// user/UAV construction, virtual nodes included.
pub fn random_transport_instance(index: usize, rng: &mut rng::Rng) -> TransportProblem<f64> {
    if index % 2 == 0 {
        let n = rng.random_range(1..=2);
        let capacity = rng.random_range(1..=3);
        let m = rng.random_range(1..=5).max(1);
        let users = random_points(m, rng);
        let uavs = random_points(n, rng);
        let r = rng.random_range(500.0..5000.0);
        let kind = match rng.random_range(0..3) {
            0 => CostKind::Indicator(r),
            1 => CostKind::QoS(r),
            _ => CostKind::LeakyQoS(r),
        };
        return build_problem(&users, &uavs, capacity, kind);
    }
    let d = rng.random_range(1..=3);
    let demands: Vec<u64> = (0..d).map(|_| rng.random_range(1..=3)).collect();
    let mut left: u64 = demands.iter().sum();
    let mut supplies = Vec::new();
    while left > 0 {
        let s = rng.random_range(1..=left.min(3));
        supplies.push(s);
        left -= s;
    }
    let cost = Array2::from_shape_fn((supplies.len(), d), |_| rng.random_range(0..20) as f64);
    TransportProblem::new(supplies, demands, cost).expect("balanced by construction")
}

pub fn transport_suite(instances: usize, seed: u64) -> SuiteResult {
    let mut rng = rng::stream(seed, Stream::Heuristics);
    let passed = (0..instances)
        .filter(|&i| {
            let p = random_transport_instance(i, &mut rng);
            let Ok(plan) = solve(&p) else { return false };
            let exact = oracle::min_transport_cost(&p.supplies, &p.demands, &p.cost).expect("balanced");
            let margins = (0..p.supplies.len()).all(|r| plan.flow.row(r).sum() == p.supplies[r])
                && (0..p.demands.len()).all(|c| plan.flow.column(c).sum() == p.demands[c]);
            margins && (plan.total_cost - exact).abs() <= 1e-9 * exact.abs().max(1.0)
        })
        .count();
    SuiteResult { name: "transport", passed, total: instances }
}

pub fn tsp_suite(instances: usize, seed: u64) -> SuiteResult {
    let mut rng = rng::stream(seed, Stream::Ga);
    let passed = (0..instances)
        .filter(|&i| {
            let n = 4 + i % 5;
            let pts = random_points(n, &mut rng);
            let d = Array2::from_shape_fn((n, n), |(a, b)| pts[a].distance(&pts[b]));
            let tour = solve_tsp(&d);
            let cost = qap_cost(&d, &WeightMatrix::new(WeightKind::Cycle, n), &tour).expect("dims");
            let exact = oracle::min_tour_cost(&d);
            oracle::is_bijection(&tour) && (cost - exact).abs() <= 1e-6
        })
        .count();
    SuiteResult { name: "tsp", passed, total: instances }
}

/// Genetic search on six-cluster binary-jump instances; passes when within
/// `tolerance` (relative) of the enumerated optimum.
pub fn qap_suite(instances: usize, seed: u64, tolerance: f64) -> SuiteResult {
    let mut rng = rng::stream(seed, Stream::Placement);
    let mut ga_rng = rng::stream(seed, Stream::Ga);
    let params = GaParams::default();
    let w = WeightMatrix::new(WeightKind::BinaryJump, 6);
    let passed = (0..instances)
        .filter(|_| {
            let pts = random_points(6, &mut rng);
            let d = Array2::from_shape_fn((6, 6), |(a, b)| pts[a].distance(&pts[b]));
            let exact = oracle::min_qap_cost(&d, &w);
            let out = run_qap_ga(&d, &w, &params, &mut ga_rng).expect("dims");
            oracle::is_bijection(&out.best) && out.best_cost <= exact * (1.0 + tolerance) + 1e-9
        })
        .count();
    SuiteResult { name: "qap", passed, total: instances }
}

pub fn crossover_suite(instances: usize, seed: u64) -> SuiteResult {
    let mut rng = rng::stream(seed, Stream::Mobility);
    let passed = (0..instances)
        .filter(|&i| {
            let n = 2 + i % 11;
            let a = Permutation::random(n, &mut rng);
            let b = Permutation::random(n, &mut rng);
            let (c1, c2) = cycle_crossover(&a, &b);
            let (r1, r2) = oracle::cycle_crossover_reference(a.as_slice(), b.as_slice());
            c1.as_slice() == r1 && c2.as_slice() == r2 && oracle::is_bijection(&c1) && oracle::is_bijection(&c2)
        })
        .count();
    SuiteResult { name: "crossover", passed, total: instances }
}

/// Every suite at its default size.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![
        transport_suite(500, seed),
        tsp_suite(50, seed),
        qap_suite(20, seed, 0.05),
        crossover_suite(200, seed),
    ]
}
