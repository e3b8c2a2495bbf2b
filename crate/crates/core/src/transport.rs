//! Capacity-constrained user-to-UAV association as an integer transportation
//! problem.
//!
//! Users carry unit supply and each UAV demands `capacity` units. Any mass
//! mismatch is absorbed by a single zero-cost virtual node: a virtual user
//! soaks up spare UAV capacity, a virtual UAV soaks up users that cannot be
//! served. Integer margins make the problem exactly solvable by network flow.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::Array2;
use num_traits::Float;
use thiserror::Error;

use crate::geometry::{distance, Point2};
use crate::scalar::{lt, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("unbalanced problem: total supply {supply} != total demand {demand}")]
    Unbalanced { supply: u64, demand: u64 },
    #[error("cost matrix is {rows}x{cols}, expected {supplies}x{demands}")]
    Shape { rows: usize, cols: usize, supplies: usize, demands: usize },
}

/// Association cost between a real user and a real UAV at distance `d`.
///
/// Pairs involving a virtual node always cost zero; that is handled by
/// [`build_problem`], not here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostKind<T> {
    /// 1 outside the cell range, 0 inside.
    Indicator(T),
    /// 1 outside the cell range, the distance itself inside.
    QoS(T),
    /// `range + 0.01 d` outside the cell range, `d` inside. Not flat beyond
    /// the range, which keeps far users from hopping between clusters.
    LeakyQoS(T),
}

impl<T: Float> CostKind<T> {
    pub fn range(&self) -> T {
        match *self {
            CostKind::Indicator(r) | CostKind::QoS(r) | CostKind::LeakyQoS(r) => r,
        }
    }

    pub fn eval(&self, d: T) -> T {
        match *self {
            CostKind::Indicator(r) => {
                if d > r {
                    T::one()
                } else {
                    T::zero()
                }
            }
            CostKind::QoS(r) => {
                if d > r {
                    T::one()
                } else {
                    d
                }
            }
            CostKind::LeakyQoS(r) => {
                if d > r {
                    r + T::from(0.01).unwrap() * d
                } else {
                    d
                }
            }
        }
    }

    pub fn between(&self, a: Point2<T>, b: Point2<T>) -> T {
        self.eval(distance(a, b))
    }
}

/// Balanced transportation problem: rows supply, columns demand.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem<T> {
    pub supplies: Vec<u64>,
    pub demands: Vec<u64>,
    pub cost: Array2<T>,
    pub virtual_supply_index: Option<usize>,
    pub virtual_demand_index: Option<usize>,
}

impl<T: Scalar> TransportProblem<T> {
    pub fn new(supplies: Vec<u64>, demands: Vec<u64>, cost: Array2<T>) -> Result<Self, TransportError> {
        let (rows, cols) = cost.dim();
        if rows != supplies.len() || cols != demands.len() {
            return Err(TransportError::Shape { rows, cols, supplies: supplies.len(), demands: demands.len() });
        }
        Ok(Self { supplies, demands, cost, virtual_supply_index: None, virtual_demand_index: None })
    }

    pub fn total_supply(&self) -> u64 {
        self.supplies.iter().sum()
    }

    pub fn total_demand(&self) -> u64 {
        self.demands.iter().sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.total_supply() == self.total_demand()
    }
}

/// Optimal integer flow together with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    pub flow: Array2<u64>,
    pub total_cost: T,
}

impl<T: Scalar> TransportPlan<T> {
    /// `sum flow * cost`, recomputed from scratch.
    pub fn evaluate(flow: &Array2<u64>, cost: &Array2<T>) -> T {
        flow.indexed_iter()
            .filter(|(_, &f)| f > 0)
            .map(|((i, j), &f)| cost[[i, j]].times(f))
            .sum()
    }
}

/// Build the user/UAV association problem, adding one aggregated virtual
/// node when total UAV capacity differs from the number of users.
pub fn build_problem<T: Float + Scalar>(
    users: &[Point2<T>],
    uavs: &[Point2<T>],
    capacity: usize,
    kind: CostKind<T>,
) -> TransportProblem<T> {
    let m = users.len();
    let n = uavs.len();
    let total_capacity = (n * capacity) as u64;
    let m_u = m as u64;
    let extra_row = total_capacity > m_u;
    let extra_col = total_capacity < m_u;
    let rows = m + usize::from(extra_row);
    let cols = n + usize::from(extra_col);

    let mut cost = Array2::zeros((rows, cols));
    for (i, u) in users.iter().enumerate() {
        for (j, v) in uavs.iter().enumerate() {
            cost[[i, j]] = kind.between(*u, *v);
        }
    }
    let mut supplies = vec![1u64; m];
    let mut demands = vec![capacity as u64; n];
    let mut virtual_supply_index = None;
    let mut virtual_demand_index = None;
    if extra_row {
        supplies.push(total_capacity - m_u);
        virtual_supply_index = Some(m);
    }
    if extra_col {
        demands.push(m_u - total_capacity);
        virtual_demand_index = Some(n);
    }
    TransportProblem { supplies, demands, cost, virtual_supply_index, virtual_demand_index }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry<T> {
    dist: T,
    node: usize,
}

impl<T: PartialOrd> PartialEq for HeapEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: PartialOrd> Eq for HeapEntry<T> {}
impl<T: PartialOrd> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: PartialOrd> Ord for HeapEntry<T> {
    // reversed: BinaryHeap pops the smallest distance, then the smallest node id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Exact min-cost solution of a balanced transportation problem.
///
/// Successive shortest augmenting paths with Johnson potentials. Rows are
/// drained in index order; each augmentation runs Dijkstra from the current
/// row and stops at the first settled column with residual demand. Node ids
/// put columns before rows, and the heap breaks distance ties by node id, so
/// the returned optimum is a fixed function of the input.
///
/// With floating-point costs, reduced costs that round slightly below zero
/// are clamped, so optimality holds up to rounding. With integer or rational
/// scalars the result is exact.
pub fn solve<T: Scalar>(problem: &TransportProblem<T>) -> Result<TransportPlan<T>, TransportError> {
    let supply = problem.total_supply();
    let demand = problem.total_demand();
    if supply != demand {
        return Err(TransportError::Unbalanced { supply, demand });
    }
    let (s, d) = problem.cost.dim();
    if s != problem.supplies.len() || d != problem.demands.len() {
        return Err(TransportError::Shape { rows: s, cols: d, supplies: problem.supplies.len(), demands: problem.demands.len() });
    }
    let cost = &problem.cost;
    let mut flow = Array2::<u64>::zeros((s, d));
    let mut row_left = problem.supplies.clone();
    let mut col_left = problem.demands.clone();
    // rows currently sending flow into each column
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); d];

    // node ids: columns 0..d, rows d..d+s
    let nodes = s + d;
    let zero = T::zero();
    let mut potential = vec![zero; nodes];
    let mut dist: Vec<Option<T>> = vec![None; nodes];
    let mut settled = vec![false; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let mut heap = BinaryHeap::new();
    let mut touched: Vec<usize> = Vec::new();

    let reduced = |c: T| if lt(c, zero) { zero } else { c };

    for src_row in 0..s {
        while row_left[src_row] > 0 {
            let src = d + src_row;
            for &v in &touched {
                dist[v] = None;
                settled[v] = false;
                parent[v] = usize::MAX;
            }
            touched.clear();
            heap.clear();
            dist[src] = Some(zero);
            touched.push(src);
            heap.push(HeapEntry { dist: zero, node: src });

            let mut target = None;
            while let Some(HeapEntry { dist: du, node: u }) = heap.pop() {
                if settled[u] {
                    continue;
                }
                settled[u] = true;
                if u < d {
                    if col_left[u] > 0 {
                        target = Some((u, du));
                        break;
                    }
                    // residual backward edges col -> row
                    for &r in &col_rows[u] {
                        let v = d + r;
                        if settled[v] {
                            continue;
                        }
                        let rc = reduced(potential[u] - potential[v] - cost[[r, u]]);
                        let nd = du + rc;
                        if dist[v].is_none_or(|old| lt(nd, old)) {
                            if dist[v].is_none() {
                                touched.push(v);
                            }
                            dist[v] = Some(nd);
                            parent[v] = u;
                            heap.push(HeapEntry { dist: nd, node: v });
                        }
                    }
                } else {
                    let r = u - d;
                    for col in 0..d {
                        if settled[col] {
                            continue;
                        }
                        let rc = reduced(cost[[r, col]] + potential[u] - potential[col]);
                        let nd = du + rc;
                        if dist[col].is_none_or(|old| lt(nd, old)) {
                            if dist[col].is_none() {
                                touched.push(col);
                            }
                            dist[col] = Some(nd);
                            parent[col] = u;
                            heap.push(HeapEntry { dist: nd, node: col });
                        }
                    }
                }
            }

            // Balanced margins guarantee a column with residual demand is
            // reachable: the source row can always reach every column.
            let (t, dt) = target.expect("balanced transportation problem has an augmenting path");

            // bottleneck along the path
            let mut amount = row_left[src_row].min(col_left[t]);
            let mut v = t;
            while v != src {
                let p = parent[v];
                if p < d {
                    // backward edge p(col) -> v(row)
                    amount = amount.min(flow[[v - d, p]]);
                }
                v = p;
            }
            let mut v = t;
            while v != src {
                let p = parent[v];
                if p < d {
                    let r = v - d;
                    flow[[r, p]] -= amount;
                    if flow[[r, p]] == 0 {
                        col_rows[p].retain(|&x| x != r);
                    }
                } else {
                    let r = p - d;
                    if flow[[r, v]] == 0 {
                        col_rows[v].push(r);
                    }
                    flow[[r, v]] += amount;
                }
                v = p;
            }
            row_left[src_row] -= amount;
            col_left[t] -= amount;

            for v in 0..nodes {
                let add = if settled[v] { dist[v].unwrap() } else { dt };
                potential[v] = potential[v] + add;
            }
        }
    }

    let total_cost = TransportPlan::evaluate(&flow, cost);
    Ok(TransportPlan { flow, total_cost })
}

/// Fraction of users covered under the best capacity-respecting association
/// with pure range-indicator cost.
///
/// Users absorbed by a virtual UAV (total capacity below the user count) are
/// uncovered. With capacity to spare this is `1 - optimum / M`.
pub fn coverage_fraction<T: Float + Scalar>(users: &[Point2<T>], uavs: &[Point2<T>], capacity: usize, range: T) -> T {
    if users.is_empty() {
        return T::one();
    }
    if uavs.is_empty() {
        return T::zero();
    }
    let problem = build_problem(users, uavs, capacity, CostKind::Indicator(range));
    let plan = solve(&problem).expect("build_problem yields a balanced problem");
    let absorbed = problem
        .virtual_demand_index
        .map(|j| plan.flow.column(j).sum())
        .unwrap_or(0);
    let m = T::from(users.len()).unwrap();
    (m - plan.total_cost - T::from(absorbed).unwrap()) / m
}
