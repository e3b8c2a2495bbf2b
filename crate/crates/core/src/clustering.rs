//! Capacity-constrained medoid clustering by alternating minimization.
//!
//! Each iteration first solves the transport problem for the current medoids
//! (optimal capacity-respecting assignment), then moves every medoid to the
//! user position minimizing the summed cost to its assigned users. Both
//! half-steps are exact argmins, so the cost never increases.

use num_traits::Float;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::geometry::{nearest_index, Point2};
use crate::scalar::{lt, Scalar};
use crate::transport::{build_problem, solve, CostKind};

/// Medoids, per-medoid user sets and the cost after each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState<T> {
    pub medoids: Vec<Point2<T>>,
    /// `assignments[i]` holds the indices of users served by medoid `i`;
    /// users absorbed by a virtual UAV appear in no set.
    pub assignments: Vec<Vec<usize>>,
    pub cost_trace: Vec<T>,
}

impl<T: Float + Scalar> ClusterState<T> {
    pub fn new(medoids: Vec<Point2<T>>) -> Self {
        let n = medoids.len();
        Self { medoids, assignments: vec![Vec::new(); n], cost_trace: Vec::new() }
    }

    pub fn last_cost(&self) -> Option<T> {
        self.cost_trace.last().copied()
    }

    /// Cluster index of every user, `None` for unassigned ones.
    pub fn labels(&self, n_users: usize) -> Vec<Option<usize>> {
        let mut labels = vec![None; n_users];
        for (i, members) in self.assignments.iter().enumerate() {
            for &u in members {
                labels[u] = Some(i);
            }
        }
        labels
    }
}

/// Summed cost of the given assignment under the given medoids.
pub fn clustering_cost<T: Float + Scalar>(
    users: &[Point2<T>],
    medoids: &[Point2<T>],
    assignments: &[Vec<usize>],
    kind: CostKind<T>,
) -> T {
    medoids
        .iter()
        .zip(assignments)
        .map(|(m, members)| members.iter().map(|&u| kind.between(*m, users[u])).sum::<T>())
        .sum()
}

/// Optimal capacity-respecting assignment of users to fixed medoids.
pub fn assign<T: Float + Scalar>(
    users: &[Point2<T>],
    medoids: &[Point2<T>],
    capacity: usize,
    kind: CostKind<T>,
) -> (Vec<Vec<usize>>, T) {
    let n = medoids.len();
    let mut assignments = vec![Vec::new(); n];
    if users.is_empty() || n == 0 {
        return (assignments, T::zero());
    }
    let problem = build_problem(users, medoids, capacity, kind);
    let plan = solve(&problem).expect("build_problem yields a balanced problem");
    for (u, row) in plan.flow.outer_iter().take(users.len()).enumerate() {
        if let Some(j) = row.iter().take(n).position(|&f| f > 0) {
            assignments[j].push(u);
        }
    }
    (assignments, plan.total_cost)
}

/// Index of the user position minimizing the summed cost to `members`,
/// searching over all users; lowest index wins ties.
fn best_medoid<T: Float + Scalar>(users: &[Point2<T>], members: &[usize], kind: CostKind<T>) -> usize {
    let mut best: Option<(T, usize)> = None;
    for (c, cand) in users.iter().enumerate() {
        let total: T = members.iter().map(|&u| kind.between(*cand, users[u])).sum();
        if best.is_none_or(|(b, _)| lt(total, b)) {
            best = Some((total, c));
        }
    }
    best.expect("at least one user").1
}

/// Medoid update for fixed assignments. Clusters that received no users keep
/// their previous medoid.
pub fn update_medoids<T: Float + Scalar>(
    users: &[Point2<T>],
    assignments: &[Vec<usize>],
    previous: &[Point2<T>],
    kind: CostKind<T>,
) -> Vec<Point2<T>> {
    assert_eq!(assignments.len(), previous.len(), "one assignment set per medoid");
    assignments
        .par_iter()
        .zip(previous.par_iter())
        .map(|(members, prev)| if members.is_empty() { *prev } else { users[best_medoid(users, members, kind)] })
        .collect()
}

/// One assignment/update pair; appends the updated cost to the trace.
pub fn am_step<T: Float + Scalar>(
    users: &[Point2<T>],
    state: &ClusterState<T>,
    capacity: usize,
    kind: CostKind<T>,
) -> ClusterState<T> {
    let (assignments, _) = assign(users, &state.medoids, capacity, kind);
    let medoids = update_medoids(users, &assignments, &state.medoids, kind);
    let cost = clustering_cost(users, &medoids, &assignments, kind);
    let mut cost_trace = state.cost_trace.clone();
    cost_trace.push(cost);
    ClusterState { medoids, assignments, cost_trace }
}

/// Snap each medoid onto the nearest current user position.
pub fn project_to_users<T: Float + Scalar>(medoids: &[Point2<T>], users: &[Point2<T>]) -> Vec<Point2<T>> {
    medoids
        .iter()
        .map(|m| nearest_index(*m, users).map(|i| users[i]).unwrap_or(*m))
        .collect()
}

/// Run `iterations` AM steps, warm-started from `initial_medoids` after
/// projecting them onto the current user positions.
pub fn run_am<T: Float + Scalar>(
    users: &[Point2<T>],
    initial_medoids: &[Point2<T>],
    capacity: usize,
    kind: CostKind<T>,
    iterations: usize,
) -> ClusterState<T> {
    let mut state = ClusterState::new(project_to_users(initial_medoids, users));
    for _ in 0..iterations {
        state = am_step(users, &state, capacity, kind);
    }
    state
}

/// `n` distinct user positions drawn uniformly.
pub fn random_initial_medoids<T: Float, R: Rng + ?Sized>(users: &[Point2<T>], n: usize, rng: &mut R) -> Vec<Point2<T>> {
    assert!(n <= users.len(), "need at least as many users as medoids");
    sample(rng, users.len(), n).into_iter().map(|i| users[i]).collect()
}
