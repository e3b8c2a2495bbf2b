//! Brute-force reference solvers.
//!
//! These enumerate the full search space and share no code with the
//! production solvers. They back the unit tests, the acceptance suite and
//! the `selftest` command, so they are kept in the library rather than in a
//! test-only module. Only use them on tiny instances.

use ndarray::Array2;

use crate::ferrying::{Permutation, WeightMatrix};
use crate::scalar::Scalar;

/// Minimum total cost over every integer flow matrix with the given margins.
///
/// Returns `None` when no feasible flow exists (unbalanced margins).
pub fn min_transport_cost<T: Scalar>(supplies: &[u64], demands: &[u64], cost: &Array2<T>) -> Option<T> {
    let s = supplies.len();
    let d = demands.len();
    assert_eq!(cost.dim(), (s, d), "cost shape");
    let mut best: Option<T> = None;
    let mut remaining = demands.to_vec();
    let mut row = vec![0u64; d];
    enumerate_rows(supplies, cost, 0, &mut remaining, &mut row, T::zero(), &mut best);
    best
}

fn enumerate_rows<T: Scalar>(
    supplies: &[u64],
    cost: &Array2<T>,
    r: usize,
    remaining: &mut Vec<u64>,
    row: &mut Vec<u64>,
    acc: T,
    best: &mut Option<T>,
) {
    if r == supplies.len() {
        if remaining.iter().all(|&x| x == 0) && best.is_none_or(|b| acc < b) {
            *best = Some(acc);
        }
        return;
    }
    // distribute supplies[r] units over the columns, column by column
    split_row(supplies, cost, r, 0, supplies[r], remaining, row, acc, best);
}

#[allow(clippy::too_many_arguments)]
fn split_row<T: Scalar>(
    supplies: &[u64],
    cost: &Array2<T>,
    r: usize,
    c: usize,
    left: u64,
    remaining: &mut Vec<u64>,
    row: &mut Vec<u64>,
    acc: T,
    best: &mut Option<T>,
) {
    let d = remaining.len();
    if c == d {
        if left == 0 {
            enumerate_rows(supplies, cost, r + 1, remaining, row, acc, best);
        }
        return;
    }
    let cap = left.min(remaining[c]);
    for amount in 0..=cap {
        row[c] = amount;
        remaining[c] -= amount;
        let add = cost[[r, c]].times(amount);
        split_row(supplies, cost, r, c + 1, left - amount, remaining, row, acc + add, best);
        remaining[c] += amount;
    }
    row[c] = 0;
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Minimum of `sum_ij D[p(i)][p(j)] w[i][j]` over all permutations.
pub fn min_qap_cost<T: Scalar>(dist: &Array2<T>, weights: &WeightMatrix) -> T {
    let n = dist.nrows();
    all_permutations(n)
        .into_iter()
        .map(|p| {
            let mut acc = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if weights.get(i, j) {
                        acc = acc + dist[[p[i], p[j]]];
                    }
                }
            }
            acc
        })
        .fold(None, |best: Option<T>, c| match best {
            Some(b) if b <= c => Some(b),
            _ => Some(c),
        })
        .expect("at least one permutation")
}

/// Shortest closed tour length by enumeration (city 0 fixed first).
pub fn min_tour_cost<T: Scalar>(dist: &Array2<T>) -> T {
    let n = dist.nrows();
    if n < 2 {
        return T::zero();
    }
    all_permutations(n - 1)
        .into_iter()
        .map(|rest| {
            let order: Vec<usize> = std::iter::once(0).chain(rest.into_iter().map(|x| x + 1)).collect();
            (0..n).map(|i| dist[[order[i], order[(i + 1) % n]]]).sum::<T>()
        })
        .fold(None, |best: Option<T>, c| match best {
            Some(b) if b <= c => Some(b),
            _ => Some(c),
        })
        .unwrap()
}

/// Textbook cycle crossover, written from the positional-cycle definition.
pub fn cycle_crossover_reference(a: &[usize], b: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = a.len();
    let mut cycle_of = vec![usize::MAX; n];
    let mut cycle = 0;
    for start in 0..n {
        if cycle_of[start] != usize::MAX {
            continue;
        }
        let mut pos = start;
        while cycle_of[pos] == usize::MAX {
            cycle_of[pos] = cycle;
            let value = b[pos];
            pos = a.iter().position(|&x| x == value).unwrap();
        }
        cycle += 1;
    }
    let pick = |even_from: &[usize], odd_from: &[usize]| -> Vec<usize> {
        (0..n).map(|i| if cycle_of[i] % 2 == 0 { even_from[i] } else { odd_from[i] }).collect()
    };
    (pick(a, b), pick(b, a))
}

/// `true` when the permutation wraps a valid bijection.
pub fn is_bijection(p: &Permutation) -> bool {
    let n = p.len();
    let mut seen = vec![false; n];
    p.as_slice().iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}
