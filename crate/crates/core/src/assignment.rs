//! Minimum-cost linear assignment and k-best enumeration.
//!
//! [`hungarian`] solves a square cost matrix with the O(n^3) potentials form of
//! the Hungarian method and breaks ties toward the lexicographically smallest
//! permutation. [`Murty`] lazily ranks all assignments in nondecreasing cost by
//! partitioning the solution space around each popped solution.
//!
//! Forbidden cells are represented by a finite sentinel larger than
//! `2 n (max |cost| + 1)`, which keeps every sum finite; a solution that uses a
//! forbidden cell marks the subproblem infeasible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column chosen for each row.
    pub perm: Vec<usize>,
    pub cost: f64,
}

impl Assignment {
    fn from_perm(costs: &Mat, perm: Vec<usize>) -> Self {
        let cost = perm.iter().enumerate().map(|(i, &j)| costs[(i, j)]).sum();
        Self { perm, cost }
    }
}

/// Minimum-cost assignment; infinite cells are forbidden.
pub fn hungarian(costs: &Mat) -> Result<Assignment> {
    let mut ops = 0;
    hungarian_counted(costs, &mut ops)
}

/// [`hungarian`] that also accumulates elementary reduced-cost evaluations.
pub fn hungarian_counted(costs: &Mat, ops: &mut u64) -> Result<Assignment> {
    let n = check_square(costs)?;
    if n == 0 {
        return Ok(Assignment { perm: vec![], cost: 0.0 });
    }
    let forbidden: Vec<bool> = costs.as_slice().iter().map(|c| c.is_infinite()).collect();
    if costs.as_slice().contains(&f64::NEG_INFINITY) {
        return Err(Error::Shape("negative infinite cost".into()));
    }
    let work = with_sentinel(costs, &forbidden);
    let perm = solve_lexicographic(&work, &forbidden, n, ops).ok_or(Error::Infeasible)?;
    Ok(Assignment::from_perm(costs, perm))
}

fn check_square(costs: &Mat) -> Result<usize> {
    if !costs.is_square() {
        return Err(Error::Shape(format!("cost matrix must be square, got {}x{}", costs.rows(), costs.cols())));
    }
    if costs.as_slice().iter().any(|c| c.is_nan()) {
        return Err(Error::Shape("NaN cost".into()));
    }
    Ok(costs.rows())
}

fn sentinel_for(values: &[f64], n: usize) -> f64 {
    let max = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    2.0 * n as f64 * (max + 1.0)
}

fn with_sentinel(costs: &Mat, forbidden: &[bool]) -> Vec<f64> {
    let n = costs.rows();
    let big = sentinel_for(costs.as_slice(), n);
    costs
        .as_slice()
        .iter()
        .zip(forbidden)
        .map(|(&c, &f)| if f { big } else { c })
        .collect()
}

/// Potentials-based Hungarian method over a dense row-major `n x n` matrix.
/// Returns the column assigned to each row.
fn solve_dense(c: &[f64], n: usize, ops: &mut u64) -> Vec<usize> {
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                *ops += 1;
                let cur = c[(i0 - 1) * n + j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}

fn perm_cost(c: &[f64], n: usize, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| c[i * n + j]).sum()
}

fn feasible(forbidden: &[bool], n: usize, perm: &[usize]) -> bool {
    perm.iter().enumerate().all(|(i, &j)| !forbidden[i * n + j])
}

/// Optimal assignment of the rows `rows` onto `cols` (same length).
fn solve_sub(c: &[f64], n: usize, rows: &[usize], cols: &[usize], ops: &mut u64) -> (Vec<usize>, f64) {
    let m = rows.len();
    if m == 0 {
        return (vec![], 0.0);
    }
    let sub: Vec<f64> = rows.iter().flat_map(|&r| cols.iter().map(move |&j| c[r * n + j])).collect();
    let local = solve_dense(&sub, m, ops);
    let cost = local.iter().enumerate().map(|(i, &j)| sub[i * m + j]).sum();
    (local.into_iter().map(|j| cols[j]).collect(), cost)
}

/// Optimal feasible permutation, ties resolved toward the lexicographically
/// smallest one. `None` when every optimum uses a forbidden cell.
fn solve_lexicographic(c: &[f64], forbidden: &[bool], n: usize, ops: &mut u64) -> Option<Vec<usize>> {
    let mut cur = solve_dense(c, n, ops);
    if !feasible(forbidden, n, &cur) {
        return None;
    }
    let best = perm_cost(c, n, &cur);
    let scale = n as f64 * c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let mut prefix_cost = 0.0;
    for r in 0..n.saturating_sub(1) {
        let used: Vec<usize> = cur[..r].to_vec();
        for j in 0..cur[r] {
            if used.contains(&j) || forbidden[r * n + j] {
                continue;
            }
            let rows: Vec<usize> = (r + 1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|k| *k != j && !used.contains(k)).collect();
            let (tail, tail_cost) = solve_sub(c, n, &rows, &cols, ops);
            let total = prefix_cost + c[r * n + j] + tail_cost;
            if (total - best).abs() <= tol {
                let mut cand = cur[..r].to_vec();
                cand.push(j);
                cand.extend(tail);
                if feasible(forbidden, n, &cand) {
                    cur = cand;
                    break;
                }
            }
        }
        prefix_cost += c[r * n + cur[r]];
    }
    Some(cur)
}

/// A Murty subproblem: the best assignment that uses every `fixed` cell and
/// none of the `excluded` ones.
#[derive(Debug, Clone)]
pub struct MurtyNode {
    pub fixed: Vec<(usize, usize)>,
    pub excluded: Vec<(usize, usize)>,
    pub best: Assignment,
}

impl PartialEq for MurtyNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MurtyNode {}

impl PartialOrd for MurtyNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MurtyNode {
    // reversed so that BinaryHeap pops the cheapest, then lexicographically
    // smallest, node first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .best
            .cost
            .total_cmp(&self.best.cost)
            .then_with(|| other.best.perm.cmp(&self.best.perm))
    }
}

/// Lazy ranking of assignments in nondecreasing cost.
pub struct Murty {
    costs: Mat,
    base_forbidden: Vec<bool>,
    sentinel: f64,
    queue: BinaryHeap<MurtyNode>,
    ops: u64,
    emitted: usize,
}

impl Murty {
    pub fn new(costs: &Mat) -> Result<Self> {
        let n = check_square(costs)?;
        let base_forbidden: Vec<bool> = costs.as_slice().iter().map(|c| c.is_infinite()).collect();
        let sentinel = sentinel_for(costs.as_slice(), n);
        let mut ops = 0;
        let mut queue = BinaryHeap::new();
        if n > 0 {
            let work = with_sentinel(costs, &base_forbidden);
            if let Some(perm) = solve_lexicographic(&work, &base_forbidden, n, &mut ops) {
                queue.push(MurtyNode { fixed: vec![], excluded: vec![], best: Assignment::from_perm(costs, perm) });
            }
        }
        Ok(Self { costs: costs.clone(), base_forbidden, sentinel, queue, ops, emitted: 0 })
    }

    /// Reduced-cost evaluations spent so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Number of assignments produced so far.
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    fn solve_node(&mut self, fixed: &[(usize, usize)], excluded: &[(usize, usize)]) -> Option<Assignment> {
        let n = self.costs.rows();
        let mut forbidden = self.base_forbidden.clone();
        for &(r, c) in excluded {
            forbidden[r * n + c] = true;
        }
        for &(r, c) in fixed {
            for k in 0..n {
                if k != c {
                    forbidden[r * n + k] = true;
                }
                if k != r {
                    forbidden[k * n + c] = true;
                }
            }
        }
        let work: Vec<f64> = self
            .costs
            .as_slice()
            .iter()
            .zip(&forbidden)
            .map(|(&v, &f)| if f { self.sentinel } else { v })
            .collect();
        let perm = solve_dense(&work, n, &mut self.ops);
        feasible(&forbidden, n, &perm).then(|| Assignment::from_perm(&self.costs, perm))
    }
}

impl Iterator for Murty {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        let node = self.queue.pop()?;
        let n = self.costs.rows();
        let free_rows: Vec<usize> = (0..n).filter(|r| !node.fixed.iter().any(|&(fr, _)| fr == *r)).collect();
        let mut fixed = node.fixed.clone();
        // the last free row has a single column left, so its child is empty
        for &r in free_rows.iter().take(free_rows.len().saturating_sub(1)) {
            let cell = (r, node.best.perm[r]);
            let mut excluded = node.excluded.clone();
            excluded.push(cell);
            if let Some(best) = self.solve_node(&fixed, &excluded) {
                self.queue.push(MurtyNode { fixed: fixed.clone(), excluded, best });
            }
            fixed.push(cell);
        }
        self.emitted += 1;
        Some(node.best)
    }
}

/// Number of permutations of `n`, saturating.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// The `k` cheapest assignments in nondecreasing cost.
pub fn murty_enumerate(costs: &Mat, k: usize) -> Result<Vec<Assignment>> {
    let n = check_square(costs)?;
    let max = factorial(n);
    if k as u128 > max {
        return Err(Error::TooManyAssignments { k: k as u128, max });
    }
    Ok(Murty::new(costs)?.take(k).collect())
}
