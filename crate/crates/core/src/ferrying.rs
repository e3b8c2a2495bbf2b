//! Rotation planning between clusters.
//!
//! A [`Permutation`] orders the clusters; a [`WeightMatrix`] says which
//! ordered positions a single round of jumps connects. The QAP objective
//! `sum_ij D[pi(i)][pi(j)] w[i][j]` is then the static distance flown per
//! round of one jump size, minimized exactly by [`solve_tsp`] for the cycle
//! pattern and heuristically by [`solve_qap_ga`] for any pattern.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::scalar::{lt, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FerryError {
    #[error("dimension mismatch: distance matrix is {dist}x{dist}, weights {weights}x{weights}, permutation {perm}")]
    Dimension { dist: usize, weights: usize, perm: usize },
    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),
}

/// Bijection on `0..n`: position `i` of the rotation order holds cluster `pi[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, FerryError> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &x in &mapping {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(FerryError::NotPermutation(n));
            }
        }
        Ok(Self(mapping))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.0.swap(a, b);
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Self(inv)
    }
}

impl std::ops::Index<usize> for Permutation {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightKind {
    /// Each position connects to the next one.
    Cycle,
    /// Each position connects to the positions `2^k` ahead, `k < ceil(log2 n)`.
    BinaryJump,
}

/// `ceil(log2(n))`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Jump offsets performed during one round, in order.
pub fn jump_sequence(kind: WeightKind, n: usize) -> Vec<usize> {
    match kind {
        WeightKind::Cycle => vec![1; n.saturating_sub(1)],
        WeightKind::BinaryJump => (0..ceil_log2(n)).rev().map(|k| 1usize << k).collect(),
    }
}

/// Binary circulant weight matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    kind: WeightKind,
    w: Array2<bool>,
    /// distinct offsets `j - i mod n` with `w[i][j] = 1`
    offsets: Vec<usize>,
}

impl WeightMatrix {
    pub fn new(kind: WeightKind, n: usize) -> Self {
        let mut offsets: Vec<usize> = match kind {
            WeightKind::Cycle if n >= 2 => vec![1],
            WeightKind::Cycle => vec![],
            WeightKind::BinaryJump => jump_sequence(kind, n),
        };
        offsets.sort_unstable();
        offsets.dedup();
        let mut w = Array2::from_elem((n, n), false);
        for i in 0..n {
            for &s in &offsets {
                w[[i, (i + s) % n]] = true;
            }
        }
        Self { kind, w, offsets }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.w[[i, j]]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn as_array(&self) -> &Array2<bool> {
        &self.w
    }
}

fn check_dims<T>(dist: &Array2<T>, weights: &WeightMatrix, pi: &Permutation) -> Result<(), FerryError> {
    let n = dist.nrows();
    if dist.ncols() != n || weights.n() != n || pi.len() != n {
        return Err(FerryError::Dimension { dist: n, weights: weights.n(), perm: pi.len() });
    }
    Ok(())
}

/// QAP objective `sum_ij D[pi(i)][pi(j)] * w[i][j]`.
pub fn qap_cost<T: Scalar>(dist: &Array2<T>, weights: &WeightMatrix, pi: &Permutation) -> Result<T, FerryError> {
    check_dims(dist, weights, pi)?;
    Ok(qap_cost_unchecked(dist, weights, pi))
}

fn qap_cost_unchecked<T: Scalar>(dist: &Array2<T>, weights: &WeightMatrix, pi: &Permutation) -> T {
    let n = pi.len();
    let mut acc = T::zero();
    for i in 0..n {
        let a = pi[i];
        for &s in weights.offsets() {
            acc = acc + dist[[a, pi[(i + s) % n]]];
        }
    }
    acc
}

/// `D'[p][q] = D[pi(p)][pi(q)]`: distances re-indexed by rotation position.
pub fn permute_distances<T: Scalar>(dist: &Array2<T>, pi: &Permutation) -> Array2<T> {
    let n = pi.len();
    Array2::from_shape_fn((n, n), |(p, q)| dist[[pi[p], pi[q]]])
}

/// Static distance flown by all UAVs during one full round.
///
/// `dist` must already be indexed by rotation position (see
/// [`permute_distances`]). A cycle round is `n - 1` unit jumps, so its total
/// is `(n - 1) <D, W>_F`; a binary-jumping round makes each jump once, so its
/// total is `<D, W>_F`.
pub fn total_rotation_distance<T: Scalar>(dist: &Array2<T>, weights: &WeightMatrix) -> Result<T, FerryError> {
    let n = dist.nrows();
    if dist.ncols() != n || weights.n() != n {
        return Err(FerryError::Dimension { dist: n, weights: weights.n(), perm: n });
    }
    let frob: T = dist
        .indexed_iter()
        .filter(|((i, j), _)| weights.get(*i, *j))
        .map(|(_, &d)| d)
        .sum();
    Ok(match weights.kind() {
        WeightKind::Cycle => frob.times(n.saturating_sub(1) as u64),
        WeightKind::BinaryJump => frob,
    })
}

const HELD_KARP_MAX: usize = 12;

/// Shortest closed tour through all points, as a rotation order starting at 0.
///
/// Exact (Held-Karp) up to 12 points; nearest neighbour followed by 2-opt
/// beyond that.
pub fn solve_tsp<T: Scalar>(dist: &Array2<T>) -> Permutation {
    let n = dist.nrows();
    assert_eq!(dist.ncols(), n, "distance matrix must be square");
    if n <= 3 {
        return Permutation::identity(n);
    }
    if n <= HELD_KARP_MAX {
        held_karp(dist)
    } else {
        let mut tour = nearest_neighbour(dist);
        two_opt(dist, &mut tour);
        Permutation(tour)
    }
}

fn held_karp<T: Scalar>(dist: &Array2<T>) -> Permutation {
    let n = dist.nrows();
    // subsets of cities 1..n, encoded on bits 0..n-1
    let m = n - 1;
    let full = (1usize << m) - 1;
    let mut dp: Vec<Option<T>> = vec![None; (1 << m) * m];
    let mut from = vec![usize::MAX; (1 << m) * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = Some(dist[[0, j + 1]]);
    }
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let Some(base) = dp[mask * m + j] else { continue };
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = base + dist[[j + 1, k + 1]];
                let slot = &mut dp[next * m + k];
                if slot.is_none_or(|old| lt(cand, old)) {
                    *slot = Some(cand);
                    from[next * m + k] = j;
                }
            }
        }
    }
    let mut best: Option<(T, usize)> = None;
    for j in 0..m {
        let total = dp[full * m + j].unwrap() + dist[[j + 1, 0]];
        if best.is_none_or(|(b, _)| lt(total, b)) {
            best = Some((total, j));
        }
    }
    let (_, mut last) = best.unwrap();
    let mut mask = full;
    let mut rev = Vec::with_capacity(n);
    while last != usize::MAX {
        rev.push(last + 1);
        let prev = from[mask * m + last];
        mask &= !(1 << last);
        last = prev;
    }
    let mut tour = vec![0];
    tour.extend(rev.into_iter().rev());
    Permutation(tour)
}

fn nearest_neighbour<T: Scalar>(dist: &Array2<T>) -> Vec<usize> {
    let n = dist.nrows();
    let mut visited = vec![false; n];
    let mut tour = vec![0];
    visited[0] = true;
    for _ in 1..n {
        let cur = *tour.last().unwrap();
        let mut best: Option<(T, usize)> = None;
        for j in 0..n {
            if !visited[j] && best.is_none_or(|(b, _)| lt(dist[[cur, j]], b)) {
                best = Some((dist[[cur, j]], j));
            }
        }
        let (_, j) = best.unwrap();
        visited[j] = true;
        tour.push(j);
    }
    tour
}

fn two_opt<T: Scalar>(dist: &Array2<T>, tour: &mut [usize]) {
    let n = tour.len();
    // bounded pass count guards against float-rounding ping-pong
    for _ in 0..(50 * n) {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 2..n {
                let (a, b) = (tour[i], tour[i + 1]);
                let (c, e) = (tour[j], tour[(j + 1) % n]);
                if e == a {
                    continue;
                }
                let before = dist[[a, b]] + dist[[c, e]];
                let after = dist[[a, c]] + dist[[b, e]];
                if lt(after, before) {
                    tour[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Cycle crossover (CX).
///
/// Positions are partitioned into cycles by following `a[i] -> b[i] -> the
/// position of that value in a`. The first child copies `a` on even-numbered
/// cycles and `b` on odd ones; the second child does the opposite. Both
/// children are permutations, and equal parents reproduce themselves.
pub fn cycle_crossover(a: &Permutation, b: &Permutation) -> (Permutation, Permutation) {
    let n = a.len();
    assert_eq!(b.len(), n, "parents must have equal length");
    let pos_in_a = a.inverse();
    let mut child_a = vec![usize::MAX; n];
    let mut child_b = vec![usize::MAX; n];
    let mut cycle = 0usize;
    for start in 0..n {
        if child_a[start] != usize::MAX {
            continue;
        }
        let (src_a, src_b) = if cycle % 2 == 0 { (a, b) } else { (b, a) };
        let mut i = start;
        loop {
            child_a[i] = src_a[i];
            child_b[i] = src_b[i];
            i = pos_in_a[b[i]];
            if i == start {
                break;
            }
        }
        cycle += 1;
    }
    (Permutation(child_a), Permutation(child_b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub iterations: usize,
    pub population: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self { iterations: 100, population: 100, crossover_prob: 0.8, mutation_prob: 0.4 }
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome<T> {
    pub best: Permutation,
    pub best_cost: T,
    /// Best cost seen so far, after initialization and after each generation.
    pub history: Vec<T>,
}

/// Genetic search for `min_pi qap_cost(D, W, pi)`.
///
/// Truncation selection keeps the better half of the population; the other
/// half is refilled with children of uniformly drawn survivor pairs, crossed
/// with probability `crossover_prob` (copied otherwise) and mutated with
/// probability `mutation_prob` by swapping two random entries. The best
/// individual ever evaluated is returned.
pub fn run_qap_ga<T: Scalar, R: Rng + ?Sized>(
    dist: &Array2<T>,
    weights: &WeightMatrix,
    params: &GaParams,
    rng: &mut R,
) -> Result<GaOutcome<T>, FerryError> {
    let n = dist.nrows();
    check_dims(dist, weights, &Permutation::identity(n))?;
    let k = params.population.max(2);
    let half = k / 2;

    let mut population: Vec<Permutation> = (0..k).map(|_| Permutation::random(n, rng)).collect();
    let mut costs: Vec<T> = population.iter().map(|p| qap_cost_unchecked(dist, weights, p)).collect();

    let mut best_idx = 0;
    for i in 1..k {
        if lt(costs[i], costs[best_idx]) {
            best_idx = i;
        }
    }
    let mut best = population[best_idx].clone();
    let mut best_cost = costs[best_idx];
    let mut history = vec![best_cost];

    for _ in 0..params.iterations {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| costs[x].partial_cmp(&costs[y]).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y)));
        let survivors: Vec<Permutation> = order[..half].iter().map(|&i| population[i].clone()).collect();
        let survivor_costs: Vec<T> = order[..half].iter().map(|&i| costs[i]).collect();

        let mut children = Vec::with_capacity(k - half);
        while children.len() < k - half {
            let i = rng.random_range(0..half);
            let j = if half > 1 {
                let j = rng.random_range(0..half - 1);
                if j >= i { j + 1 } else { j }
            } else {
                i
            };
            let (c1, c2) = if rng.random::<f64>() < params.crossover_prob {
                cycle_crossover(&survivors[i], &survivors[j])
            } else {
                (survivors[i].clone(), survivors[j].clone())
            };
            children.push(c1);
            if children.len() < k - half {
                children.push(c2);
            }
        }
        for child in &mut children {
            if n >= 2 && rng.random::<f64>() < params.mutation_prob {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                child.swap(a, b);
            }
        }
        let child_costs: Vec<T> = children.iter().map(|p| qap_cost_unchecked(dist, weights, p)).collect();
        for (c, p) in child_costs.iter().zip(&children) {
            if lt(*c, best_cost) {
                best_cost = *c;
                best = p.clone();
            }
        }
        population = survivors.into_iter().chain(children).collect();
        costs = survivor_costs.into_iter().chain(child_costs).collect();
        history.push(best_cost);
    }
    Ok(GaOutcome { best, best_cost, history })
}

pub fn solve_qap_ga<T: Scalar, R: Rng + ?Sized>(
    dist: &Array2<T>,
    weights: &WeightMatrix,
    params: &GaParams,
    rng: &mut R,
) -> Result<Permutation, FerryError> {
    run_qap_ga(dist, weights, params, rng).map(|o| o.best)
}

/// UAV-to-cluster rotation state.
///
/// UAV `i` tracks the cluster at rotation position `(i + alpha) mod n`, i.e.
/// cluster `pi[(i + alpha) mod n]`. With fewer UAVs than clusters (cycle
/// pattern only) the remaining positions are left untracked.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSchedule {
    pi: Permutation,
    kind: WeightKind,
    jumps: Vec<usize>,
    alpha: usize,
    round_position: usize,
    n_uavs: usize,
    resolve_requested: bool,
}

impl RotationSchedule {
    pub fn new(kind: WeightKind, pi: Permutation) -> Self {
        let n = pi.len();
        Self::with_uavs(kind, pi, n)
    }

    /// Schedule for `n_uavs <= pi.len()` UAVs.
    ///
    /// # Panics
    /// If `n_uavs` exceeds the cluster count, or is smaller for binary jumping.
    pub fn with_uavs(kind: WeightKind, pi: Permutation, n_uavs: usize) -> Self {
        let n = pi.len();
        assert!(n_uavs <= n, "more UAVs than clusters");
        assert!(kind == WeightKind::Cycle || n_uavs == n, "untracked clusters are only supported for the cycle pattern");
        Self { jumps: jump_sequence(kind, n), pi, kind, alpha: 0, round_position: 0, n_uavs, resolve_requested: false }
    }

    pub fn n_clusters(&self) -> usize {
        self.pi.len()
    }

    pub fn n_uavs(&self) -> usize {
        self.n_uavs
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn permutation(&self) -> &Permutation {
        &self.pi
    }

    pub fn jump_sequence(&self) -> &[usize] {
        &self.jumps
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn round_position(&self) -> usize {
        self.round_position
    }

    /// `true` between the end of a round and the next [`Self::set_permutation`].
    pub fn resolve_requested(&self) -> bool {
        self.resolve_requested
    }

    pub fn clear_resolve_request(&mut self) {
        self.resolve_requested = false;
    }

    pub fn target(&self, uav: usize) -> usize {
        let n = self.pi.len();
        self.pi[(uav + self.alpha) % n]
    }

    pub fn targets(&self) -> Vec<usize> {
        (0..self.n_uavs).map(|i| self.target(i)).collect()
    }

    /// Apply the next jump. Returns `true` when this completed a round, in
    /// which case a fresh ordering is requested.
    pub fn advance(&mut self) -> bool {
        if self.jumps.is_empty() {
            return false;
        }
        let n = self.pi.len();
        self.alpha = (self.alpha + self.jumps[self.round_position]) % n;
        self.round_position += 1;
        if self.round_position == self.jumps.len() {
            self.round_position = 0;
            self.resolve_requested = true;
            true
        } else {
            false
        }
    }

    pub fn set_permutation(&mut self, pi: Permutation) {
        assert_eq!(pi.len(), self.pi.len(), "cluster count is fixed");
        self.pi = pi;
        self.resolve_requested = false;
    }
}
