//! Unmeasured correspondence distance between finite spaces.
//!
//! A correspondence is a set of index pairs covering every point of both
//! sides (weights play no role; zero-weight and boundary points are
//! included). Its distortion is the largest separation gap
//! |τ_a(i, i′) − τ_b(j, j′)| over pairs of matched pairs, and the distance
//! is the smallest distortion over correspondences.
//!
//! The exact solver observes that every correspondence contains a minimal
//! one consisting of one chosen partner per left point plus one chosen
//! partner per still-uncovered right point, and that dropping pairs never
//! increases distortion. It binary-searches the candidate distortion levels
//! (the distinct gap values) and decides feasibility of each level by a
//! backtracking search over such minimal covers. Beyond the pair-grid cap
//! it falls back to a greedy assignment with improvement flips.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::solvers::Budget;
use crate::space::FiniteLmms;

/// Pair-grid cap for the exact search (n·m at most this).
pub const EXACT_GRID_CAP: usize = 20;

/// A relation between the index sets of two spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    /// Checks index ranges and two-sided coverage.
    pub fn validate(&self, n: usize, m: usize) -> Result<(), SolveError> {
        let mut cover_a = vec![false; n];
        let mut cover_b = vec![false; m];
        for &(i, j) in &self.pairs {
            if i >= n || j >= m {
                return Err(SolveError::ParameterRange {
                    what: "correspondence pair index",
                    got: i.max(j) as f64,
                });
            }
            cover_a[i] = true;
            cover_b[j] = true;
        }
        if cover_a.iter().any(|c| !c) || cover_b.iter().any(|c| !c) {
            return Err(SolveError::ParameterRange {
                what: "correspondence coverage",
                got: self.pairs.len() as f64,
            });
        }
        Ok(())
    }
}

/// Largest separation gap over pairs of matched pairs.
pub fn distortion(a: &FiniteLmms, b: &FiniteLmms, corr: &Correspondence) -> f64 {
    let mut worst = 0.0f64;
    for &(i, j) in &corr.pairs {
        for &(ip, jp) in &corr.pairs {
            worst = worst.max((a.t(i, ip) - b.t(j, jp)).abs());
        }
    }
    worst
}

/// Outcome of a correspondence-distance computation.
#[derive(Clone, Debug)]
pub struct LghResult {
    pub value: f64,
    pub pairs: Vec<(usize, usize)>,
    /// True when the value was decided by the exhaustive search.
    pub certified: bool,
}

/// Distortion gap between two grid cells e = (i, j), f = (i′, j′), taken
/// over both orders.
fn cell_gap(a: &FiniteLmms, b: &FiniteLmms, e: (usize, usize), f: (usize, usize)) -> f64 {
    let fwd = (a.t(e.0, f.0) - b.t(e.1, f.1)).abs();
    let rev = (a.t(f.0, e.0) - b.t(f.1, e.1)).abs();
    fwd.max(rev)
}

/// Feasibility of distortion level eps: existence of a minimal cover whose
/// cells are pairwise within eps. Left points each choose a partner, then
/// uncovered right points choose one; choices must stay mutually
/// compatible.
fn feasible_cover(
    a: &FiniteLmms,
    b: &FiniteLmms,
    eps: f64,
) -> Option<Vec<(usize, usize)>> {
    let ok = |chosen: &[(usize, usize)], cand: (usize, usize)| -> bool {
        // A cell is always compatible with itself: both spaces vanish on
        // the diagonal, so only cross-pair gaps constrain the choice.
        chosen
            .iter()
            .all(|&c| cell_gap(a, b, c, cand) <= eps + 1e-12)
    };

    fn assign_left(
        n: usize,
        m: usize,
        i: usize,
        chosen: &mut Vec<(usize, usize)>,
        ok: &impl Fn(&[(usize, usize)], (usize, usize)) -> bool,
    ) -> bool {
        if i == n {
            // Cover remaining right points.
            let mut covered = vec![false; m];
            for &(_, j) in chosen.iter() {
                covered[j] = true;
            }
            let missing: Vec<usize> = (0..m).filter(|&j| !covered[j]).collect();
            return assign_right(n, &missing, 0, chosen, ok);
        }
        for j in 0..m {
            let cand = (i, j);
            if ok(chosen, cand) {
                chosen.push(cand);
                if assign_left(n, m, i + 1, chosen, ok) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    fn assign_right(
        n: usize,
        missing: &[usize],
        k: usize,
        chosen: &mut Vec<(usize, usize)>,
        ok: &impl Fn(&[(usize, usize)], (usize, usize)) -> bool,
    ) -> bool {
        if k == missing.len() {
            return true;
        }
        for i in 0..n {
            let cand = (i, missing[k]);
            if ok(chosen, cand) {
                chosen.push(cand);
                if assign_right(n, missing, k + 1, chosen, ok) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::new();
    if assign_left(a.n(), b.n(), 0, &mut chosen, &ok) {
        Some(chosen)
    } else {
        None
    }
}

/// Correspondence distance. Exact (binary search over gap levels with
/// backtracking feasibility) when n·m ≤ [`EXACT_GRID_CAP`]; greedy with
/// improvement flips beyond.
pub fn solve_lgh(a: &FiniteLmms, b: &FiniteLmms, budget: &Budget) -> LghResult {
    let (n, m) = (a.n(), b.n());
    if n == 0 || m == 0 {
        // Empty sides: only the empty correspondence exists when both are
        // empty; distance zero by convention.
        return LghResult {
            value: 0.0,
            pairs: Vec::new(),
            certified: true,
        };
    }
    if n * m <= EXACT_GRID_CAP {
        // Candidate levels: all distinct cell-pair gaps (zero included).
        let mut levels = vec![0.0f64];
        for i in 0..n {
            for j in 0..m {
                for ip in 0..n {
                    for jp in 0..m {
                        levels.push(cell_gap(a, b, (i, j), (ip, jp)));
                    }
                }
            }
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|x, last| *x - *last <= 1e-12);

        // Binary search the smallest feasible level.
        let mut lo = 0usize;
        let mut hi = levels.len() - 1;
        if let Some(pairs) = feasible_cover(a, b, levels[lo]) {
            let corr = Correspondence { pairs };
            return LghResult {
                value: distortion(a, b, &corr),
                pairs: corr.pairs,
                certified: true,
            };
        }
        let mut witness =
            feasible_cover(a, b, levels[hi]).expect("the largest gap level is always feasible");
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            match feasible_cover(a, b, levels[mid]) {
                Some(pairs) => {
                    witness = pairs;
                    hi = mid;
                }
                None => lo = mid,
            }
        }
        let corr = Correspondence { pairs: witness };
        return LghResult {
            value: distortion(a, b, &corr),
            pairs: corr.pairs,
            certified: true,
        };
    }

    // Greedy beyond the cap: each left point picks the partner minimizing
    // the running distortion, then uncovered right points pick likewise;
    // improvement flips follow until stable or out of budget.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        let mut best_j = 0usize;
        let mut best_val = f64::INFINITY;
        for j in 0..m {
            let cand = (i, j);
            let val = pairs
                .iter()
                .map(|&c| cell_gap(a, b, c, cand))
                .fold(0.0f64, f64::max);
            if val < best_val {
                best_val = val;
                best_j = j;
            }
        }
        pairs.push((i, best_j));
    }
    let mut covered = vec![false; m];
    for &(_, j) in &pairs {
        covered[j] = true;
    }
    for j in 0..m {
        if covered[j] {
            continue;
        }
        let mut best_i = 0usize;
        let mut best_val = f64::INFINITY;
        for i in 0..n {
            let cand = (i, j);
            let val = pairs
                .iter()
                .map(|&c| cell_gap(a, b, c, cand))
                .fold(0.0f64, f64::max);
            if val < best_val {
                best_val = val;
                best_i = i;
            }
        }
        pairs.push((best_i, j));
    }

    // Flip passes: replace one pair's partner when it lowers the overall
    // distortion (coverage is rechecked before dropping a pair).
    let corr_value = |pairs: &Vec<(usize, usize)>| -> f64 {
        let c = Correspondence {
            pairs: pairs.clone(),
        };
        distortion(a, b, &c)
    };
    let mut value = corr_value(&pairs);
    for _ in 0..budget.iter_cap.max(1) {
        let mut improved = false;
        for idx in 0..pairs.len() {
            let (i, j) = pairs[idx];
            // Repointing (i, j) to (i, j′) is only allowed when another
            // pair still covers j; i stays covered by the new pair.
            let right_count = pairs.iter().filter(|&&(_, y)| y == j).count();
            if right_count < 2 {
                continue;
            }
            for jp in 0..m {
                if jp == j {
                    continue;
                }
                let mut cand = pairs.clone();
                cand[idx] = (i, jp);
                let v = corr_value(&cand);
                if v < value - 1e-15 {
                    pairs = cand;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }

    LghResult {
        value,
        pairs,
        certified: false,
    }
}
