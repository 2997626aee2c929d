//! Certified minimization of a quadratic form over the transportation
//! polytope.
//!
//! Every distance functional handled by the exact solvers is, for a fixed
//! exponent or threshold, a quadratic F(π) = Σ_{e,f} S_ef π_e π_f in the
//! coupling entries. On supports with at most three points per side the
//! polytope has at most four free coordinates (the top-left block; the last
//! row and column are affine completions), so the quadratic can be minimized
//! to certified accuracy by branch-and-bound on boxes in those coordinates:
//!
//! * feasibility of a box, and a representative coupling inside it, come
//!   from a bounded transportation flow;
//! * the bound on a box is the exact second-order expansion around the
//!   representative, with the quadratic term relaxed by interval arithmetic
//!   (F is exactly quadratic, so there is no remainder beyond the relaxed
//!   cross terms);
//! * the incumbent starts from caller-provided seeds (vertex enumerations,
//!   polished heuristic couplings) and improves with every node.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use super::flow::bounded_plan;

/// Symmetrized quadratic objective over couplings, dense in cell-pair space.
pub struct QuadraticObjective {
    n: usize,
    m: usize,
    /// Symmetrized coefficients, s[e * nm + f] with nm = n * m.
    s: Vec<f64>,
}

impl QuadraticObjective {
    /// Builds the objective from raw (not necessarily symmetric) pair costs.
    pub fn from_cost(n: usize, m: usize, raw: &[f64]) -> Self {
        let nm = n * m;
        debug_assert_eq!(raw.len(), nm * nm);
        let mut s = vec![0.0; nm * nm];
        for e in 0..nm {
            for f in 0..nm {
                s[e * nm + f] = 0.5 * (raw[e * nm + f] + raw[f * nm + e]);
            }
        }
        QuadraticObjective { n, m, s }
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    /// F(π) = Σ_{e,f} S_ef π_e π_f.
    pub fn eval(&self, plan: &[f64]) -> f64 {
        let nm = self.n * self.m;
        let mut total = 0.0;
        for e in 0..nm {
            let pe = plan[e];
            if pe == 0.0 {
                continue;
            }
            let row = &self.s[e * nm..(e + 1) * nm];
            let mut inner = 0.0;
            for (f, &c) in row.iter().enumerate() {
                inner += c * plan[f];
            }
            total += pe * inner;
        }
        total
    }

    /// ∇F(π) = 2 S π (S is symmetric).
    pub fn gradient(&self, plan: &[f64], out: &mut Vec<f64>) {
        let nm = self.n * self.m;
        out.clear();
        out.resize(nm, 0.0);
        for f in 0..nm {
            let pf = plan[f];
            if pf == 0.0 {
                continue;
            }
            for e in 0..nm {
                out[e] += 2.0 * self.s[e * nm + f] * pf;
            }
        }
    }

    /// Largest absolute coefficient (used for quick scale estimates).
    pub fn max_abs(&self) -> f64 {
        self.s.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }
}

/// Search controls for [`minimize_quadratic`].
pub struct BnbParams {
    /// Certified absolute optimality gap.
    pub gap: f64,
    /// Node budget before giving up on certification.
    pub node_cap: usize,
    /// Return as soon as the incumbent reaches this value (the caller only
    /// needs to know the minimum is at most this).
    pub stop_below: f64,
    /// Abandon branches that provably cannot go below this value (the caller
    /// discards candidates at or above it anyway).
    pub prune_above: f64,
}

impl Default for BnbParams {
    fn default() -> Self {
        BnbParams {
            gap: 5e-8,
            node_cap: 200_000,
            stop_below: f64::NEG_INFINITY,
            prune_above: f64::INFINITY,
        }
    }
}

/// Outcome of the branch-and-bound search.
pub struct BnbOutcome {
    /// Best value found (always achieved by `plan`).
    pub value: f64,
    /// Best coupling found, row-major.
    pub plan: Vec<f64>,
    /// True when the search resolved: every branch explored or pruned within
    /// the gap (the minimum then lies within `gap` of `value`, or at or
    /// above `prune_above`), or the incumbent reached `stop_below` (the
    /// minimum is then at most `value`, which is all the caller asked).
    /// False only on node-budget exhaustion.
    pub certified: bool,
    /// Nodes expanded.
    pub nodes: usize,
}

struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    bound: f64,
    stamp: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.stamp == other.stamp
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // BinaryHeap is a max-heap; reverse for best-first on the bound,
        // with the insertion stamp as a deterministic tie-break.
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.stamp.cmp(&self.stamp))
    }
}

/// Minimizes the quadratic objective over couplings of (wa, wb) to certified
/// accuracy. Requires strictly positive weights (callers restrict to the
/// support first). Seeds are feasible plans used to warm-start the incumbent.
pub fn minimize_quadratic(
    wa: &[f64],
    wb: &[f64],
    obj: &QuadraticObjective,
    seeds: &[Vec<f64>],
    params: &BnbParams,
) -> BnbOutcome {
    let (n, m) = (wa.len(), wb.len());
    debug_assert_eq!(n, obj.rows());
    debug_assert_eq!(m, obj.cols());
    let nm = n * m;
    let free: Vec<(usize, usize)> = (0..n.saturating_sub(1))
        .flat_map(|i| (0..m.saturating_sub(1)).map(move |j| (i, j)))
        .collect();
    let d = free.len();

    // Incumbent from seeds.
    let mut best_plan: Option<Vec<f64>> = None;
    let mut best_value = f64::INFINITY;
    for seed in seeds {
        debug_assert_eq!(seed.len(), nm);
        let v = obj.eval(seed);
        if v < best_value {
            best_value = v;
            best_plan = Some(seed.clone());
        }
    }

    if d == 0 {
        // One marginal is a single point: the polytope is the product.
        let plan: Vec<f64> = if n == 1 {
            wb.to_vec()
        } else {
            wa.to_vec()
        };
        let v = obj.eval(&plan);
        if v < best_value {
            best_value = v;
            best_plan = Some(plan);
        }
        return BnbOutcome {
            value: best_value,
            plan: best_plan.expect("plan for trivial polytope"),
            certified: true,
            nodes: 0,
        };
    }

    // Free-coordinate Hessian H_kl = 2 a_k^T S a_l where a_k is the ±1
    // pattern a free cell imprints on the four affected coupling entries.
    let corner = (n - 1) * m + (m - 1);
    let pattern = |k: usize| -> [(usize, f64); 4] {
        let (i, j) = free[k];
        [
            (i * m + j, 1.0),
            (i * m + (m - 1), -1.0),
            ((n - 1) * m + j, -1.0),
            (corner, 1.0),
        ]
    };
    let mut hessian = vec![0.0; d * d];
    for k in 0..d {
        // u = S a_k.
        let mut u = vec![0.0; nm];
        for (cell, sign) in pattern(k) {
            for e in 0..nm {
                u[e] += sign * obj.s[e * nm + cell];
            }
        }
        for l in 0..d {
            let mut h = 0.0;
            for (cell, sign) in pattern(l) {
                h += sign * u[cell];
            }
            hessian[k * d + l] = 2.0 * h;
        }
    }

    // Box feasibility: bounds on free cells, everything else unconstrained.
    let feasible_point = |lo_box: &[f64], hi_box: &[f64]| -> Option<Vec<f64>> {
        let mut lo = vec![0.0; nm];
        let mut hi = vec![f64::INFINITY; nm];
        for k in 0..d {
            let (i, j) = free[k];
            lo[i * m + j] = lo_box[k];
            hi[i * m + j] = hi_box[k];
        }
        bounded_plan(wa, wb, &lo, &hi)
    };

    let root_lo = vec![0.0; d];
    let root_hi: Vec<f64> = free.iter().map(|&(i, j)| wa[i].min(wb[j])).collect();

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut stamp = 0usize;
    heap.push(Node {
        lo: root_lo,
        hi: root_hi,
        bound: f64::NEG_INFINITY,
        stamp,
    });

    let mut nodes = 0usize;
    let mut certified = true;
    let mut grad = Vec::new();

    while let Some(node) = heap.pop() {
        let cutoff = best_value.min(params.prune_above);
        if node.bound >= cutoff - params.gap {
            // Best-first order: every remaining node is at least as bad.
            break;
        }
        if best_value <= params.stop_below {
            break;
        }
        if nodes >= params.node_cap {
            certified = false;
            break;
        }
        nodes += 1;

        let Some(plan) = feasible_point(&node.lo, &node.hi) else {
            continue;
        };
        let value = obj.eval(&plan);
        if value < best_value {
            best_value = value;
            best_plan = Some(plan.clone());
            if best_value <= params.stop_below {
                break;
            }
        }

        // Second-order lower bound around the representative point.
        obj.gradient(&plan, &mut grad);
        let c: Vec<f64> = free.iter().map(|&(i, j)| plan[i * m + j]).collect();
        let mut linear = 0.0;
        let mut radius = vec![0.0; d];
        for k in 0..d {
            let gk: f64 = pattern(k).iter().map(|&(cell, sign)| sign * grad[cell]).sum();
            let lo_step = node.lo[k] - c[k];
            let hi_step = node.hi[k] - c[k];
            linear += (gk * lo_step).min(gk * hi_step);
            radius[k] = (-lo_step).max(hi_step).max(0.0);
        }
        let mut quad = 0.0;
        for k in 0..d {
            for l in 0..d {
                quad += hessian[k * d + l].abs() * radius[k] * radius[l];
            }
        }
        let bound = value + linear - 0.5 * quad;
        let cutoff = best_value.min(params.prune_above);
        if bound >= cutoff - params.gap {
            continue;
        }

        // Split the widest coordinate at its midpoint.
        let (split, width) = (0..d)
            .map(|k| (k, node.hi[k] - node.lo[k]))
            .fold((0usize, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if width <= 1e-13 {
            // Degenerate box that will not shrink further.
            continue;
        }
        let mid = 0.5 * (node.lo[split] + node.hi[split]);
        for half in 0..2 {
            let mut lo = node.lo.clone();
            let mut hi = node.hi.clone();
            if half == 0 {
                hi[split] = mid;
            } else {
                lo[split] = mid;
            }
            stamp += 1;
            heap.push(Node {
                lo,
                hi,
                bound,
                stamp,
            });
        }
    }

    let plan = best_plan.unwrap_or_else(|| {
        // No seed and the root never produced a point: fall back to the
        // product coupling, which is always feasible.
        let mut p = vec![0.0; nm];
        for i in 0..n {
            for j in 0..m {
                p[i * m + j] = wa[i] * wb[j];
            }
        }
        p
    });
    let value = obj.eval(&plan);
    BnbOutcome {
        value,
        plan,
        certified,
        nodes,
    }
}
