//! Couplings of weight vectors and per-coupling distortion functionals.
//!
//! A coupling π of two probability weight vectors is a nonnegative n×n′
//! matrix with prescribed row and column sums. The distortion profile of a
//! coupling is the distribution of gaps |τ(x,y)^q − τ′(x′,y′)^q| under π⊗²;
//! every distance in this crate is an infimum over couplings of a functional
//! of this profile:
//!
//! * [`eps_level`] — the smallest ε ≥ 0 with π⊗²\[gap > ε\] ≤ ε (the
//!   ε-level whose infimum over couplings is the distortion distance LΔ₀),
//! * [`lp_distortion`] — (∫ gap^p dπ⊗²)^{1/p}, with p = ∞ the essential
//!   supremum (per-coupling values of LΔ_p and LΔ_∞).

use alloc::vec::Vec;

use crate::error::CouplingError;
use crate::space::FiniteLmms;

/// Absolute tolerance for marginal checks.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Gaps closer than this are aggregated into one profile atom.
pub const GAP_MERGE_TOL: f64 = 1e-12;

/// Nonnegative n×m matrix with prescribed marginals, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    n: usize,
    m: usize,
    pi: Vec<f64>,
}

impl Coupling {
    /// Checked constructor: shape, nonnegativity, and both marginals within
    /// [`MARGINAL_TOL`].
    pub fn new(pi: Vec<f64>, wa: &[f64], wb: &[f64]) -> Result<Self, CouplingError> {
        let (n, m) = (wa.len(), wb.len());
        if pi.len() != n * m {
            return Err(CouplingError::Shape {
                expected: (n, m),
                got: (pi.len(), 1),
            });
        }
        let c = Self { n, m, pi };
        for i in 0..n {
            for j in 0..m {
                let v = c.get(i, j);
                if !v.is_finite() {
                    return Err(CouplingError::NonFinite { i, j });
                }
                if v < -MARGINAL_TOL {
                    return Err(CouplingError::NegativeMass { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            let s = c.row_sum(i);
            if (s - wa[i]).abs() > MARGINAL_TOL {
                return Err(CouplingError::MarginalMismatch {
                    side: "row",
                    index: i,
                    expected: wa[i],
                    got: s,
                });
            }
        }
        for j in 0..m {
            let s = c.col_sum(j);
            if (s - wb[j]).abs() > MARGINAL_TOL {
                return Err(CouplingError::MarginalMismatch {
                    side: "column",
                    index: j,
                    expected: wb[j],
                    got: s,
                });
            }
        }
        Ok(c)
    }

    /// Constructor for matrices whose marginals are correct by construction
    /// (solver internals); debug builds still assert nonnegativity.
    pub fn from_flat_unchecked(n: usize, m: usize, pi: Vec<f64>) -> Self {
        debug_assert_eq!(pi.len(), n * m);
        debug_assert!(pi.iter().all(|&x| x >= -1e-12));
        Self { n, m, pi }
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[i * self.m + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.pi[i * self.m + j] = v;
    }

    pub fn flat(&self) -> &[f64] {
        &self.pi
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.m).map(|j| self.get(i, j)).sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// Entries with positive mass, as (i, j, mass).
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        let mut s = Vec::new();
        for i in 0..self.n {
            for j in 0..self.m {
                let v = self.get(i, j);
                if v > 0.0 {
                    s.push((i, j, v));
                }
            }
        }
        s
    }

    /// Lexicographic comparison of the flattened matrices (total order on
    /// couplings, used for reproducible tie-breaking among equal-value
    /// witnesses).
    pub fn lex_cmp(&self, other: &Coupling) -> core::cmp::Ordering {
        for (a, b) in self.pi.iter().zip(other.pi.iter()) {
            let c = a.total_cmp(b);
            if c != core::cmp::Ordering::Equal {
                return c;
            }
        }
        self.pi.len().cmp(&other.pi.len())
    }
}

/// The product coupling π[i][j] = w_a[i]·w_b[j].
pub fn product_coupling(wa: &[f64], wb: &[f64]) -> Coupling {
    let (n, m) = (wa.len(), wb.len());
    let mut pi = Vec::with_capacity(n * m);
    for &a in wa {
        for &b in wb {
            pi.push(a * b);
        }
    }
    Coupling { n, m, pi }
}

/// Gluing: compose a coupling of (a, mid) with a coupling of (mid, c) into a
/// coupling of (a, c) via pi13[i][k] = Σ_j pi12[i][j]·pi23[j][k]/mid[j],
/// skipping zero-mass middle points. Errors if the inner marginals do not
/// match `mid_weights` within [`MARGINAL_TOL`].
pub fn glue(
    pi12: &Coupling,
    pi23: &Coupling,
    mid_weights: &[f64],
) -> Result<Coupling, CouplingError> {
    if pi12.cols() != mid_weights.len() || pi23.rows() != mid_weights.len() {
        return Err(CouplingError::Shape {
            expected: (mid_weights.len(), mid_weights.len()),
            got: (pi12.cols(), pi23.rows()),
        });
    }
    for (j, &w) in mid_weights.iter().enumerate() {
        let c = pi12.col_sum(j);
        if (c - w).abs() > MARGINAL_TOL {
            return Err(CouplingError::MarginalMismatch {
                side: "inner column",
                index: j,
                expected: w,
                got: c,
            });
        }
        let r = pi23.row_sum(j);
        if (r - w).abs() > MARGINAL_TOL {
            return Err(CouplingError::MarginalMismatch {
                side: "inner row",
                index: j,
                expected: w,
                got: r,
            });
        }
    }
    let (n, k) = (pi12.rows(), pi23.cols());
    let mut pi = alloc::vec![0.0; n * k];
    for j in 0..mid_weights.len() {
        let w = mid_weights[j];
        if w <= 0.0 {
            continue;
        }
        for i in 0..n {
            let left = pi12.get(i, j);
            if left == 0.0 {
                continue;
            }
            for l in 0..k {
                pi[i * k + l] += left * pi23.get(j, l) / w;
            }
        }
    }
    Ok(Coupling { n, m: k, pi })
}

/// Distribution of τ-gaps under π⊗²: sorted atoms of (gap, mass) with gaps
/// merged at absolute tolerance [`GAP_MERGE_TOL`]; masses sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionProfile {
    atoms: Vec<(f64, f64)>,
}

impl DistortionProfile {
    /// Build directly from (gap, mass) pairs; sorts and merges.
    pub fn from_atoms(mut raw: Vec<(f64, f64)>) -> Self {
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (gap, mass) in raw {
            match atoms.last_mut() {
                Some((g, m)) if gap - *g <= GAP_MERGE_TOL => *m += mass,
                _ => atoms.push((gap, mass)),
            }
        }
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    /// Mass strictly above `eps`. Summed from the largest gap downward so
    /// the suffix sums inside [`eps_level`] reproduce these values bit for
    /// bit; the feasibility test there must not drift by even an ulp.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        self.atoms
            .iter()
            .rev()
            .filter(|&&(g, _)| g > eps)
            .map(|&(_, m)| m)
            .sum()
    }

    /// Largest gap carrying positive mass (0 for an all-zero profile).
    pub fn max_positive_gap(&self) -> f64 {
        self.atoms
            .iter()
            .rev()
            .find(|&&(_, m)| m > 0.0)
            .map_or(0.0, |&(g, _)| g)
    }
}

/// Distortion profile of a coupling: for every pair of support entries
/// (i,i′), (j,j′), an atom of mass π[i][i′]·π[j][j′] at gap
/// |τ_a[i][j]^q − τ_b[i′][j′]^q|. The (nn′)² quadruple stream is aggregated
/// on the fly; π⊗² is never materialized.
pub fn distortion_profile(
    a: &FiniteLmms,
    b: &FiniteLmms,
    pi: &Coupling,
    q: f64,
) -> DistortionProfile {
    debug_assert_eq!(pi.rows(), a.n());
    debug_assert_eq!(pi.cols(), b.n());
    let ta = a.tau().entrywise_pow(q);
    let tb = b.tau().entrywise_pow(q);
    let support = pi.support();
    let mut raw = Vec::with_capacity(support.len() * support.len());
    for &(i, ip, mass_e) in &support {
        for &(j, jp, mass_f) in &support {
            let gap = (ta.get(i, j) - tb.get(ip, jp)).abs();
            raw.push((gap, mass_e * mass_f));
        }
    }
    DistortionProfile::from_atoms(raw)
}

/// Smallest ε ≥ 0 with tail-mass(gaps > ε) ≤ ε.
///
/// The tail is the constant `suffix[i + 1]` on each interval
/// `[gap_i, gap_{i+1})` between consecutive stored gaps, so the least
/// feasible ε inside the interval is `max(gap_i, suffix[i + 1])` whenever
/// that stays below the right endpoint. Scanning intervals avoids
/// re-evaluating the tail at derived candidates: a tail value recomputed in
/// a different summation order can come out an ulp larger than the
/// candidate itself, which would wrongly reject the true minimizer. The
/// suffix sums here accumulate from the largest gap downward, matching
/// [`DistortionProfile::tail_mass`] exactly.
pub fn eps_level(profile: &DistortionProfile) -> f64 {
    let atoms = profile.atoms();
    let r = atoms.len();
    if r == 0 {
        return 0.0;
    }
    let mut suffix = alloc::vec![0.0; r + 1];
    for i in (0..r).rev() {
        suffix[i] = suffix[i + 1] + atoms[i].1;
    }
    let mut best = f64::INFINITY;
    let mut check = |left: f64, right: f64, tail: f64| {
        let cand = left.max(tail);
        if cand < right && cand < best {
            best = cand;
        }
    };
    if atoms[0].0 > 0.0 {
        check(0.0, atoms[0].0, suffix[0]);
    }
    for i in 0..r {
        let right = if i + 1 < r { atoms[i + 1].0 } else { f64::INFINITY };
        check(atoms[i].0, right, suffix[i + 1]);
    }
    // The last interval is always feasible (its tail is zero), so a minimum
    // was found.
    best
}

/// (Σ mass·gap^p)^{1/p} for finite p ≥ 1; for p = ∞ (`f64::INFINITY`), the
/// largest gap with positive mass. `q` is already baked into the profile.
pub fn lp_distortion(profile: &DistortionProfile, p: f64) -> f64 {
    debug_assert!(p >= 1.0);
    if p.is_infinite() {
        return profile.max_positive_gap();
    }
    let mut sum = 0.0;
    for &(gap, mass) in profile.atoms() {
        if mass == 0.0 {
            continue;
        }
        let term = if p == 1.0 {
            gap
        } else if p == 2.0 {
            gap * gap
        } else {
            libm::pow(gap, p)
        };
        sum += mass * term;
    }
    if p == 1.0 {
        sum
    } else {
        libm::pow(sum, 1.0 / p)
    }
}

/// Diagonal coupling of a space with itself (requires equal weight vectors).
pub fn diagonal_coupling(w: &[f64]) -> Coupling {
    let n = w.len();
    let mut pi = alloc::vec![0.0; n * n];
    for (i, &wi) in w.iter().enumerate() {
        pi[i * n + i] = wi;
    }
    Coupling { n, m: n, pi }
}

/// North-west-corner vertex of the transportation polytope: rows and columns
/// are consumed greedily in the given orders. Every vertex of the polytope
/// arises this way for some pair of orders, which makes these couplings the
/// natural warm starts and annealing states for the solvers.
pub fn northwest_vertex(
    wa: &[f64],
    wb: &[f64],
    row_order: &[usize],
    col_order: &[usize],
) -> Coupling {
    let (n, m) = (wa.len(), wb.len());
    debug_assert_eq!(row_order.len(), n);
    debug_assert_eq!(col_order.len(), m);
    let mut pi = alloc::vec![0.0; n * m];
    let mut rem_a: Vec<f64> = row_order.iter().map(|&i| wa[i]).collect();
    let mut rem_b: Vec<f64> = col_order.iter().map(|&j| wb[j]).collect();
    let (mut i, mut j) = (0usize, 0usize);
    while i < n && j < m {
        let v = rem_a[i].min(rem_b[j]).max(0.0);
        if v > 0.0 {
            pi[row_order[i] * m + col_order[j]] += v;
        }
        rem_a[i] -= v;
        rem_b[j] -= v;
        if rem_a[i] <= 1e-15 && (i + 1 < n || rem_b[j] <= 1e-15) {
            i += 1;
        } else {
            j += 1;
        }
    }
    // Absorb any residual mass left by an imbalance between the two totals
    // (at most the normalization slack of the inputs). The sink must be a
    // row that carries weight: parking even a 1e-17 residual on a
    // zero-weight point would hand distortion profiles gaps from geometry
    // the support excludes.
    let sink = (0..n)
        .rev()
        .find(|&i| wa[row_order[i]] > 0.0)
        .unwrap_or(n - 1);
    for (jj, &rb) in rem_b.iter().enumerate() {
        if rb > 0.0 {
            pi[row_order[sink] * m + col_order[jj]] += rb;
        }
    }
    Coupling::from_flat_unchecked(n, m, pi)
}

/// Pseudorandom coupling: a convex mixture of the product coupling and a few
/// north-west vertices at random orders. Deterministic in the generator
/// state; useful for property tests and solver restarts.
pub fn random_coupling(wa: &[f64], wb: &[f64], rng: &mut crate::rng::DetRng) -> Coupling {
    let (n, m) = (wa.len(), wb.len());
    let parts = 1 + rng.below(3) as usize;
    let mut weights = Vec::with_capacity(parts + 1);
    for _ in 0..=parts {
        weights.push(rng.uniform() + 1e-3);
    }
    let total: f64 = weights.iter().sum();
    let mut pi = alloc::vec![0.0; n * m];
    let product = product_coupling(wa, wb);
    for (e, &v) in product.flat().iter().enumerate() {
        pi[e] += weights[0] / total * v;
    }
    for w in weights.iter().skip(1) {
        let vertex = northwest_vertex(wa, wb, &rng.permutation(n), &rng.permutation(m));
        for (e, &v) in vertex.flat().iter().enumerate() {
            pi[e] += w / total * v;
        }
    }
    Coupling::from_flat_unchecked(n, m, pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_point;
    use alloc::vec;

    #[test]
    fn product_coupling_of_uniform_two_points_is_quarter() {
        let c = product_coupling(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(c.flat(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn product_coupling_with_degenerate_marginal() {
        let c = product_coupling(&[1.0, 0.0], &[0.5, 0.5]);
        assert_eq!(c.flat(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn coupling_constructor_checks_marginals() {
        assert!(Coupling::new(vec![0.25; 4], &[0.5, 0.5], &[0.5, 0.5]).is_ok());
        assert!(Coupling::new(vec![0.5, 0.0, 0.0, 0.5], &[0.5, 0.5], &[0.25, 0.75]).is_err());
        assert!(Coupling::new(vec![0.6, -0.1, 0.0, 0.5], &[0.5, 0.5], &[0.6, 0.4]).is_err());
    }

    #[test]
    fn glue_identity_with_identity_is_identity() {
        let id = diagonal_coupling(&[0.5, 0.5]);
        let glued = glue(&id, &id, &[0.5, 0.5]).unwrap();
        assert_eq!(glued, id);
    }

    #[test]
    fn glue_with_product_gives_product_of_outer_marginals() {
        // Algebraically: sum_j pi12[i][j] * (w_mid[j] * w_c[k]) / w_mid[j]
        //              = w_a[i] * w_c[k].
        let pi12 = Coupling::new(
            vec![0.3, 0.2, 0.1, 0.4],
            &[0.5, 0.5],
            &[0.4, 0.6],
        )
        .unwrap();
        let wc = [0.25, 0.75];
        let pi23 = product_coupling(&[0.4, 0.6], &wc);
        let glued = glue(&pi12, &pi23, &[0.4, 0.6]).unwrap();
        let expect = product_coupling(&[0.5, 0.5], &wc);
        for (x, y) in glued.flat().iter().zip(expect.flat()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn glue_rejects_marginal_mismatch() {
        let pi12 = product_coupling(&[0.5, 0.5], &[0.4, 0.6]);
        let pi23 = product_coupling(&[0.5, 0.5], &[0.5, 0.5]);
        assert!(glue(&pi12, &pi23, &[0.4, 0.6]).is_err());
    }

    #[test]
    fn profile_of_identical_spaces_under_diagonal_is_single_zero_atom() {
        let s = two_point(1.0);
        let pi = diagonal_coupling(s.weights());
        let p = distortion_profile(&s, &s, &pi, 1.0);
        assert_eq!(p.atoms(), &[(0.0, 1.0)]);
    }

    #[test]
    fn profile_two_point_pair_diagonal_coupling() {
        // Four support-pair combinations: only ((a,a'),(b,b')) has a gap,
        // |1 - 2| = 1, carrying mass 1/2 * 1/2 = 1/4.
        let pi = diagonal_coupling(&[0.5, 0.5]);
        let p = distortion_profile(&two_point(1.0), &two_point(2.0), &pi, 1.0);
        assert_eq!(p.atoms(), &[(0.0, 0.75), (1.0, 0.25)]);
    }

    #[test]
    fn profile_q2_squares_entries_before_gapping() {
        // |1^2 - 2^2| = 3.
        let pi = diagonal_coupling(&[0.5, 0.5]);
        let p = distortion_profile(&two_point(1.0), &two_point(2.0), &pi, 2.0);
        assert_eq!(p.atoms(), &[(0.0, 0.75), (3.0, 0.25)]);
    }

    #[test]
    fn profile_mass_sums_to_one() {
        let pi = product_coupling(&[0.5, 0.5], &[0.5, 0.5]);
        let p = distortion_profile(&two_point(1.0), &two_point(2.0), &pi, 1.0);
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eps_level_of_zero_profile_is_zero() {
        let p = DistortionProfile::from_atoms(vec![(0.0, 1.0)]);
        assert_eq!(eps_level(&p), 0.0);
    }

    #[test]
    fn eps_level_quarter_tail_example() {
        // Tail above 1/4 is exactly 1/4; any smaller eps has tail 1/4 > eps.
        let p = DistortionProfile::from_atoms(vec![(0.0, 0.75), (1.0, 0.25)]);
        assert_eq!(eps_level(&p), 0.25);
    }

    #[test]
    fn eps_level_is_capped_by_mass_condition() {
        // All mass at gap 2: the tail stays 1 until eps reaches 2, but the
        // mass condition 1 <= eps already holds at eps = 1.
        let p = DistortionProfile::from_atoms(vec![(0.0, 0.0), (2.0, 1.0)]);
        assert_eq!(eps_level(&p), 1.0);
    }

    #[test]
    fn eps_level_accepts_a_tail_mass_candidate_at_the_rounding_knife_edge() {
        // The tail above the zero gap (≈ 0.2118) lies below the next gap
        // (≈ 0.4318), so it is the level. These masses once tripped a
        // summation-order inconsistency: the candidate, accumulated in one
        // order, came out an ulp below the tail re-evaluated in the other,
        // and the scan wrongly fell through to the next gap value.
        let p = DistortionProfile::from_atoms(vec![
            (0.0, 0.7881657926830612),
            (0.4317570209128915, 0.10000825995463633),
            (0.4688229449121477, 0.030620224555612766),
            (0.8679603548048599, 0.02745789244725378),
            (0.9005799658250392, 0.053747830359436116),
        ]);
        let eps = eps_level(&p);
        assert!(p.tail_mass(eps) <= eps, "returned level must be feasible");
        assert!((eps - 0.211834207316939).abs() < 1e-12, "eps = {eps}");
        // Nothing smaller is feasible.
        let mut e = 0.0;
        while e < eps - 1e-9 {
            assert!(p.tail_mass(e) > e, "level {e} should be infeasible");
            e += 1e-4;
        }
    }

    #[test]
    fn lp_distortion_matches_hand_computed_moments() {
        let p = DistortionProfile::from_atoms(vec![(0.0, 0.75), (1.0, 0.25)]);
        assert_eq!(lp_distortion(&p, 1.0), 0.25);
        assert_eq!(lp_distortion(&p, 2.0), 0.5);
        assert_eq!(lp_distortion(&p, f64::INFINITY), 1.0);
    }

    #[test]
    fn lp_distortion_ignores_zero_mass_gaps_at_infinity() {
        let p = DistortionProfile::from_atoms(vec![(0.0, 1.0), (5.0, 0.0)]);
        assert_eq!(lp_distortion(&p, f64::INFINITY), 0.0);
    }

    #[test]
    fn lp_distortion_of_identical_spaces_is_zero_for_all_p() {
        let s = two_point(1.0);
        let pi = diagonal_coupling(s.weights());
        let p = distortion_profile(&s, &s, &pi, 1.0);
        for exp in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert_eq!(lp_distortion(&p, exp), 0.0);
        }
    }

    #[test]
    fn northwest_vertex_residual_skips_zero_weight_rows() {
        // 1 − 0.8606… − 0.1393… leaves a ~5e-17 residual on the column;
        // it must land on a carried row, never on the zero-weight point.
        let wa = [0.8606252420561238, 0.13937475794387613, 0.0];
        let wb = [1.0];
        let v = northwest_vertex(&wa, &wb, &[0, 1, 2], &[0]);
        assert_eq!(v.get(2, 0), 0.0);
        let total: f64 = v.flat().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn northwest_vertex_in_natural_order_is_monotone_staircase() {
        let wa = [0.5, 0.3, 0.2];
        let wb = [0.4, 0.6];
        let v = northwest_vertex(&wa, &wb, &[0, 1, 2], &[0, 1]);
        let want = [0.4, 0.1, 0.0, 0.3, 0.0, 0.2];
        for (got, want) in v.flat().iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn northwest_vertex_respects_given_orders() {
        let wa = [0.5, 0.5];
        let wb = [0.5, 0.5];
        // Reversed row order pairs row 1 with column 0 first.
        let v = northwest_vertex(&wa, &wb, &[1, 0], &[0, 1]);
        assert_eq!(v.flat(), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn northwest_vertex_has_at_most_n_plus_m_minus_one_support_cells() {
        let mut rng = crate::rng::DetRng::new(11);
        for _ in 0..50 {
            let n = 2 + rng.below(4) as usize;
            let m = 2 + rng.below(4) as usize;
            let wa = random_weights(n, &mut rng);
            let wb = random_weights(m, &mut rng);
            let v = northwest_vertex(&wa, &wb, &rng.permutation(n), &rng.permutation(m));
            assert!(v.support().len() < n + m);
            check_marginals(&v, &wa, &wb);
        }
    }

    #[test]
    fn random_coupling_has_valid_marginals() {
        let mut rng = crate::rng::DetRng::new(7);
        for _ in 0..50 {
            let n = 1 + rng.below(5) as usize;
            let m = 1 + rng.below(5) as usize;
            let wa = random_weights(n, &mut rng);
            let wb = random_weights(m, &mut rng);
            let c = random_coupling(&wa, &wb, &mut rng);
            check_marginals(&c, &wa, &wb);
        }
    }

    fn random_weights(n: usize, rng: &mut crate::rng::DetRng) -> Vec<f64> {
        let mut w: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.05).collect();
        let s: f64 = w.iter().sum();
        for x in &mut w {
            *x /= s;
        }
        w
    }

    fn check_marginals(c: &Coupling, wa: &[f64], wb: &[f64]) {
        for (i, &w) in wa.iter().enumerate() {
            assert!((c.row_sum(i) - w).abs() < 1e-12, "row {i}");
        }
        for (j, &w) in wb.iter().enumerate() {
            assert!((c.col_sum(j) - w).abs() < 1e-12, "col {j}");
        }
    }
}
