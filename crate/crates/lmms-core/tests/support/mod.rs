//! Shared test support: brute-force reference implementations ("oracles")
//! coded straight from the definitions, plus the frozen desk-derived values
//! they reproduce.
//!
//! Everything here is deliberately independent of the library's solver
//! machinery: plain lattice scans over the coupling polytope's free block,
//! direct quadruple enumeration, and exhaustive subset searches. The library
//! must agree with these, not the other way around.

#![allow(dead_code)]

use lmms_core::coupling::Coupling;
use lmms_core::space::FiniteLmms;

// ---------------------------------------------------------------------------
// Frozen values for the canonical two-point pair: a = two_point(1.0),
// b = two_point(2.0), both uniform. Derived by hand from the definitions
// (1-parameter coupling polytope pi = [[x, 1/2-x], [1/2-x, x]]):
//
//   * gap-1 quadruple mass is x(1/2-x) + x^2 + (1/2-x)^2 + (1/2-x)x = 1/4
//     for every x, and gap-2 mass is 1/4 - x^2; hence
//   * eps-level distance:  min over x of (1/2 - x^2) clipped by the tail
//     condition = 1/4 at the diagonal x = 1/2;
//   * p-distortion:  (1/4 + 2^p (1/4 - x^2))^{1/p}, minimized at x = 1/2,
//     giving (1/4)^{1/p}: 1/4 at p=1, 1/2 at p=2;
//   * sup-distortion: every coupling supports a gap-1 quadruple, and the
//     diagonal avoids gap 2 -> 1;
//   * box discrepancy: any pair of surviving cells mapping to the relation
//     (a,b) on both sides carries gap |1-2| = 1, so at lambda=1 a full half
//     must be deleted -> 1/2; at lambda=2 deleting length 1/2 is allowed
//     already at eps = 1/4 -> 1/4;
//   * correspondence distance: {(a,a'),(b,b')} has distortion 1 and every
//     other surjective correspondence contains a mixed pair with gap 2 -> 1.
// ---------------------------------------------------------------------------

pub const TWO_POINT_EPS_LEVEL: f64 = 0.25;
pub const TWO_POINT_L1: f64 = 0.25;
pub const TWO_POINT_L2: f64 = 0.5;
pub const TWO_POINT_LSUP: f64 = 1.0;
pub const TWO_POINT_BOX: f64 = 0.5;
pub const TWO_POINT_BOX_LAMBDA2: f64 = 0.25;
pub const TWO_POINT_LGH: f64 = 1.0;

/// Step grid over [0, hi] including both endpoints exactly.
fn grid_points(hi: f64, h: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let mut k = 0u64;
    loop {
        let v = k as f64 * h;
        if v >= hi {
            break;
        }
        pts.push(v);
        k += 1;
    }
    pts.push(hi);
    pts
}

/// Enumerate couplings of (wa, wb) on a lattice: the free (n-1)×(m-1) block
/// ranges over the grid, the last row/column is filled from the marginals,
/// and infeasible (negative) completions are dropped. Intended for fixtures
/// with at most two free coordinates.
pub fn lattice_couplings(wa: &[f64], wb: &[f64], h: f64) -> Vec<Coupling> {
    let (n, m) = (wa.len(), wb.len());
    let free: Vec<(usize, usize)> = (0..n.saturating_sub(1))
        .flat_map(|i| (0..m.saturating_sub(1)).map(move |j| (i, j)))
        .collect();
    assert!(free.len() <= 2, "lattice oracle limited to 2 free coordinates");
    let mut out = Vec::new();
    let mut assign = vec![0.0; free.len()];
    fill_free(&free, 0, &mut assign, wa, wb, h, &mut out);
    out
}

fn fill_free(
    free: &[(usize, usize)],
    k: usize,
    assign: &mut [f64],
    wa: &[f64],
    wb: &[f64],
    h: f64,
    out: &mut Vec<Coupling>,
) {
    if k == free.len() {
        if let Some(c) = complete_coupling(free, assign, wa, wb) {
            out.push(c);
        }
        return;
    }
    let (i, j) = free[k];
    let row_used: f64 = (0..k).filter(|&t| free[t].0 == i).map(|t| assign[t]).sum();
    let col_used: f64 = (0..k).filter(|&t| free[t].1 == j).map(|t| assign[t]).sum();
    let cap = (wa[i] - row_used).min(wb[j] - col_used);
    if cap < -1e-12 {
        return;
    }
    for v in grid_points(cap.max(0.0), h) {
        assign[k] = v;
        fill_free(free, k + 1, assign, wa, wb, h, out);
    }
}

fn complete_coupling(
    free: &[(usize, usize)],
    assign: &[f64],
    wa: &[f64],
    wb: &[f64],
) -> Option<Coupling> {
    let (n, m) = (wa.len(), wb.len());
    let mut pi = vec![0.0; n * m];
    for (t, &(i, j)) in free.iter().enumerate() {
        pi[i * m + j] = assign[t];
    }
    // Last column from row marginals, then last row from column marginals.
    for i in 0..n.saturating_sub(1) {
        let used: f64 = (0..m - 1).map(|j| pi[i * m + j]).sum();
        let rest = wa[i] - used;
        if rest < -1e-12 {
            return None;
        }
        pi[i * m + (m - 1)] = rest.max(0.0);
    }
    for j in 0..m {
        let used: f64 = (0..n - 1).map(|i| pi[i * m + j]).sum();
        let rest = wb[j] - used;
        if rest < -1e-12 {
            return None;
        }
        pi[(n - 1) * m + j] = rest.max(0.0);
    }
    Some(Coupling::from_flat_unchecked(n, m, pi))
}

/// Raw (gap, mass) quadruple stream of a coupling: independent re-derivation
/// of the distortion profile (no sorting, no merging).
pub fn quadruple_gaps(a: &FiniteLmms, b: &FiniteLmms, pi: &Coupling, q: f64) -> Vec<(f64, f64)> {
    let pow = |x: f64| if q == 1.0 { x } else { x.powf(q) };
    let mut raw = Vec::new();
    for i in 0..a.n() {
        for ip in 0..b.n() {
            let me = pi.get(i, ip);
            if me == 0.0 {
                continue;
            }
            for j in 0..a.n() {
                for jp in 0..b.n() {
                    let mf = pi.get(j, jp);
                    if mf == 0.0 {
                        continue;
                    }
                    let gap = (pow(a.t(i, j)) - pow(b.t(ip, jp))).abs();
                    raw.push((gap, me * mf));
                }
            }
        }
    }
    raw
}

/// Smallest eps with mass(gaps > eps) <= eps, by direct scan over the
/// candidate thresholds (gap values and tail masses).
pub fn eps_level_direct(raw: &[(f64, f64)]) -> f64 {
    let tail = |eps: f64| -> f64 {
        raw.iter()
            .filter(|&&(g, _)| g > eps)
            .map(|&(_, m)| m)
            .sum()
    };
    let mut candidates: Vec<f64> = vec![0.0];
    candidates.extend(raw.iter().map(|&(g, _)| g));
    candidates.extend(raw.iter().map(|&(g, _)| tail(g)));
    candidates.push(tail(0.0));
    let mut best = f64::INFINITY;
    for &c in &candidates {
        if c >= 0.0 && c < best && tail(c) <= c {
            best = c;
        }
    }
    best
}

/// (sum mass * gap^p)^{1/p}; infinite p gives the max positive-mass gap.
pub fn lp_direct(raw: &[(f64, f64)], p: f64) -> f64 {
    if p.is_infinite() {
        return raw
            .iter()
            .filter(|&&(_, m)| m > 0.0)
            .map(|&(g, _)| g)
            .fold(0.0, f64::max);
    }
    let s: f64 = raw.iter().map(|&(g, m)| m * g.powf(p)).sum();
    s.powf(1.0 / p)
}

/// Brute-force eps-level distance: min over lattice couplings.
pub fn oracle_l0(a: &FiniteLmms, b: &FiniteLmms, q: f64, h: f64) -> f64 {
    lattice_couplings(a.weights(), b.weights(), h)
        .iter()
        .map(|pi| eps_level_direct(&quadruple_gaps(a, b, pi, q)))
        .fold(f64::INFINITY, f64::min)
}

/// Brute-force p-distortion distance: min over lattice couplings.
pub fn oracle_lp(a: &FiniteLmms, b: &FiniteLmms, p: f64, q: f64, h: f64) -> f64 {
    lattice_couplings(a.weights(), b.weights(), h)
        .iter()
        .map(|pi| lp_direct(&quadruple_gaps(a, b, pi, q), p))
        .fold(f64::INFINITY, f64::min)
}

/// Brute-force sup-distortion distance: min over lattice couplings of the
/// largest supported gap.
pub fn oracle_lsup(a: &FiniteLmms, b: &FiniteLmms, q: f64, h: f64) -> f64 {
    lattice_couplings(a.weights(), b.weights(), h)
        .iter()
        .map(|pi| lp_direct(&quadruple_gaps(a, b, pi, q), f64::INFINITY))
        .fold(f64::INFINITY, f64::min)
}

/// Exhaustive correspondence distance: all subsets of the pair grid with
/// full coverage on both sides, distortion by direct double loop.
pub fn oracle_lgh(a: &FiniteLmms, b: &FiniteLmms) -> f64 {
    let (n, m) = (a.n(), b.n());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    assert!(cells.len() <= 16, "subset oracle limited to 16 cells");
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << cells.len()) {
        let chosen: Vec<(usize, usize)> = cells
            .iter()
            .enumerate()
            .filter(|&(t, _)| mask >> t & 1 == 1)
            .map(|(_, &c)| c)
            .collect();
        let mut rows = vec![false; n];
        let mut cols = vec![false; m];
        for &(i, j) in &chosen {
            rows[i] = true;
            cols[j] = true;
        }
        if !(rows.iter().all(|&r| r) && cols.iter().all(|&c| c)) {
            continue;
        }
        let mut dis: f64 = 0.0;
        for &(i, ip) in &chosen {
            for &(j, jp) in &chosen {
                dis = dis.max((a.t(i, j) - b.t(ip, jp)).abs());
            }
        }
        best = best.min(dis);
    }
    best
}

/// Unit-interval cell decomposition induced by laying out the two spaces'
/// support points in the given orders: returns (length, point_a, point_b)
/// per cell of the common refinement.
pub fn layout_cells(
    a: &FiniteLmms,
    b: &FiniteLmms,
    order_a: &[usize],
    order_b: &[usize],
) -> Vec<(f64, usize, usize)> {
    let mut cells = Vec::new();
    let (mut ka, mut kb) = (0usize, 0usize);
    let mut pos = 0.0f64;
    // Remaining length of the current segment on each side.
    let mut rem_a = a.weight(order_a[0]);
    let mut rem_b = b.weight(order_b[0]);
    while pos < 1.0 - 1e-12 {
        let step = rem_a.min(rem_b);
        cells.push((step, order_a[ka], order_b[kb]));
        pos += step;
        rem_a -= step;
        rem_b -= step;
        if rem_a <= 1e-12 && ka + 1 < order_a.len() {
            ka += 1;
            rem_a = a.weight(order_a[ka]);
        }
        if rem_b <= 1e-12 && kb + 1 < order_b.len() {
            kb += 1;
            rem_b = b.weight(order_b[kb]);
        }
    }
    cells
}

/// Box discrepancy of one layout at scale lambda, by exhaustive deletion-set
/// search: for each subset S of cells the smallest feasible eps is
/// max(largest surviving gap, len(S)/lambda); minimize over S.
pub fn box_of_layout(
    a: &FiniteLmms,
    b: &FiniteLmms,
    cells: &[(f64, usize, usize)],
    lambda: f64,
) -> f64 {
    assert!(cells.len() <= 16, "subset oracle limited to 16 cells");
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cells.len()) {
        let mut deleted = 0.0;
        for (t, &(len, _, _)) in cells.iter().enumerate() {
            if mask >> t & 1 == 1 {
                deleted += len;
            }
        }
        let mut gap: f64 = 0.0;
        for (t, &(_, ia, ib)) in cells.iter().enumerate() {
            if mask >> t & 1 == 1 {
                continue;
            }
            for (u, &(_, ja, jb)) in cells.iter().enumerate() {
                if mask >> u & 1 == 1 {
                    continue;
                }
                gap = gap.max((a.t(ia, ja) - b.t(ib, jb)).abs());
            }
        }
        best = best.min(gap.max(deleted / lambda));
    }
    best
}

// ---------------------------------------------------------------------------
// Deterministic random-instance generators for the property and acceptance
// suites. Spaces are layered causets (sorted event times, random links,
// transitive closure, telescoping separations), so the axioms hold by
// construction; weights are drawn independently and normalized, with an
// occasional zero weight to exercise support handling.
// ---------------------------------------------------------------------------

use lmms_core::rng::DetRng;
use lmms_core::space::TimeMatrix;

/// Random valid space with `n` points, random link density and time scale.
pub fn random_space(n: usize, rng: &mut DetRng) -> FiniteLmms {
    assert!(n > 0);
    let max_tau = rng.range(0.5, 2.0);
    let density = rng.range(0.15, 0.9);
    let mut times: Vec<f64> = (0..n).map(|_| rng.range(0.0, max_tau)).collect();
    times.sort_by(f64::total_cmp);
    let mut linked = vec![false; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            linked[i * n + j] = rng.uniform() < density;
        }
    }
    for k in 0..n {
        for i in 0..k {
            if linked[i * n + k] {
                for j in (k + 1)..n {
                    if linked[k * n + j] {
                        linked[i * n + j] = true;
                    }
                }
            }
        }
    }
    let mut tau = TimeMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if linked[i * n + j] {
                tau.set(i, j, times[j] - times[i]);
            }
        }
    }
    let mut weights: Vec<f64> = (0..n).map(|_| rng.range(0.05, 1.0)).collect();
    // Occasionally zero a weight so generated supports are strict subsets.
    if n >= 2 && rng.uniform() < 0.15 {
        let dead = rng.below(n as u64) as usize;
        weights[dead] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    FiniteLmms::from_parts(tau, weights, None).expect("layered causet is well formed")
}

/// Isomorphic copy under a random permutation of the points.
pub fn relabeled_copy(space: &FiniteLmms, rng: &mut DetRng) -> FiniteLmms {
    let n = space.n();
    let perm = rng.permutation(n);
    let mut tau = TimeMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            tau.set(perm[i], perm[j], space.t(i, j));
        }
    }
    let mut weights = vec![0.0; n];
    for i in 0..n {
        weights[perm[i]] = space.weight(i);
    }
    FiniteLmms::from_parts(tau, weights, None).expect("permutation preserves the axioms")
}

/// Isomorphic-after-quotient copy: one positive-weight point is split into
/// two halves with identical separation rows. Returns None when the space
/// has no support.
pub fn split_point_copy(space: &FiniteLmms, rng: &mut DetRng) -> Option<FiniteLmms> {
    let support = space.support();
    let chosen = *support.get(rng.below(support.len().max(1) as u64) as usize)?;
    let n = space.n();
    let mut tau = TimeMatrix::zeros(n + 1);
    for i in 0..n {
        for j in 0..n {
            tau.set(i, j, space.t(i, j));
        }
    }
    // The clone occupies index n and copies the chosen point's relations.
    for i in 0..n {
        tau.set(i, n, space.t(i, chosen));
        tau.set(n, i, space.t(chosen, i));
    }
    let mut weights: Vec<f64> = space.weights().to_vec();
    let half = weights[chosen] / 2.0;
    weights[chosen] = half;
    weights.push(half);
    Some(FiniteLmms::from_parts(tau, weights, None).expect("split preserves the axioms"))
}

/// Pushforward coupling of a cell layout: the mass of every refinement cell
/// lands on its (point, point) pair.
pub fn coupling_of_layout(
    a: &FiniteLmms,
    b: &FiniteLmms,
    cells: &[(f64, usize, usize)],
) -> Coupling {
    let m = b.n();
    let mut pi = vec![0.0; a.n() * m];
    for &(len, ia, ib) in cells {
        pi[ia * m + ib] += len;
    }
    Coupling::from_flat_unchecked(a.n(), m, pi)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k.is_multiple_of(2) {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Brute-force box distance over contiguous layouts: every ordering pair of
/// the two supports, exhaustive deletion search per layout.
pub fn oracle_box(a: &FiniteLmms, b: &FiniteLmms, lambda: f64) -> f64 {
    let sa = a.support();
    let sb = b.support();
    let mut best = f64::INFINITY;
    for pa in permutations(sa.len()) {
        let order_a: Vec<usize> = pa.iter().map(|&t| sa[t]).collect();
        for pb in permutations(sb.len()) {
            let order_b: Vec<usize> = pb.iter().map(|&t| sb[t]).collect();
            let cells = layout_cells(a, b, &order_a, &order_b);
            best = best.min(box_of_layout(a, b, &cells, lambda));
        }
    }
    best
}
