//! Matrix laws and reconstruction experiments.
//!
//! The k-point matrix law of a space is the pushforward of the k-fold
//! product of its weight measure under the snapshot map: draw k points
//! (independently, repeats allowed), record the k×k matrix of time
//! separations. These finite-dimensional distributions determine the space
//! up to measure-preserving time isometry, and this module provides both
//! sides of that correspondence computationally: exact and sampled laws with
//! total-variation comparisons, an exact isomorphy decision by backtracking
//! over the distance quotients, and bump-function families whose integrals
//! against the laws form a discrepancy that vanishes exactly on isomorphic
//! pairs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::SolveError;
use crate::rng::DetRng;
use crate::space::{distance_quotient, noldus_metric, FiniteLmms, SquareMat};

/// Exact law enumeration refuses more tuples than this.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Mass tolerance below which two exact laws count as equal.
pub const LAW_MASS_TOL: f64 = 1e-12;

/// Time-separation snapshot at the given indices (repeats allowed):
/// entry (r, c) is τ(points[r], points[c]).
pub fn matrix_snapshot(space: &FiniteLmms, points: &[usize]) -> SquareMat {
    let k = points.len();
    let mut mat = SquareMat::zeros(k);
    for (r, &pr) in points.iter().enumerate() {
        for (c, &pc) in points.iter().enumerate() {
            mat.set(r, c, space.t(pr, pc));
        }
    }
    mat
}

/// Canonical atom key: entries row-major, each printed with 12 significant
/// digits, comma-joined. Snapshots whose entries agree to that precision
/// share an atom.
pub fn encode_matrix(mat: &SquareMat) -> String {
    let mut out = String::new();
    for (idx, &v) in mat.flat().iter().enumerate() {
        if idx > 0 {
            out.push(',');
        }
        // Adding zero normalizes a negative zero.
        out.push_str(&format!("{:.11e}", v + 0.0));
    }
    out
}

/// Checks that a matrix is the snapshot of some bounded Lorentzian space:
/// nonnegative entries, zero diagonal, and the reverse triangle inequality
/// over all ordered triples of rows.
pub fn snapshot_axioms_ok(mat: &SquareMat, tol: f64) -> bool {
    let k = mat.n();
    for r in 0..k {
        if mat.get(r, r).abs() > tol {
            return false;
        }
        for c in 0..k {
            if mat.get(r, c) < -tol {
                return false;
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            let tij = mat.get(i, j);
            if tij <= tol {
                continue;
            }
            for l in 0..k {
                let tjl = mat.get(j, l);
                if tjl <= tol {
                    continue;
                }
                if tij + tjl > mat.get(i, l) + tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Discrete distribution over snapshot matrices, keyed by [`encode_matrix`].
#[derive(Clone, Debug)]
pub struct MatrixLaw {
    k: usize,
    atoms: BTreeMap<String, (SquareMat, f64)>,
}

impl MatrixLaw {
    fn new(k: usize) -> Self {
        MatrixLaw {
            k,
            atoms: BTreeMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms in canonical key order: (key, matrix, mass).
    pub fn atoms(&self) -> impl Iterator<Item = (&str, &SquareMat, f64)> {
        self.atoms.iter().map(|(k, (m, w))| (k.as_str(), m, *w))
    }

    pub fn mass_of(&self, key: &str) -> f64 {
        self.atoms.get(key).map_or(0.0, |&(_, w)| w)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().map(|&(_, w)| w).sum()
    }

    fn add(&mut self, mat: SquareMat, mass: f64) {
        let key = encode_matrix(&mat);
        self.atoms
            .entry(key)
            .and_modify(|e| e.1 += mass)
            .or_insert((mat, mass));
    }

    /// Total-variation distance: half the mass difference over the key union.
    pub fn tv_distance(&self, other: &MatrixLaw) -> f64 {
        let mut sum = 0.0;
        for (key, &(_, w)) in &self.atoms {
            sum += (w - other.mass_of(key)).abs();
        }
        for (key, &(_, w)) in &other.atoms {
            if !self.atoms.contains_key(key) {
                sum += w;
            }
        }
        0.5 * sum
    }

    /// Integral of a snapshot functional against the law.
    pub fn integrate<F: Fn(&SquareMat) -> f64>(&self, phi: F) -> f64 {
        self.atoms.values().map(|(m, w)| w * phi(m)).sum()
    }
}

/// Exact k-point matrix law by enumerating all support tuples. Refuses
/// instances with more than [`ENUMERATION_CAP`] tuples.
pub fn exact_matrix_law(space: &FiniteLmms, k: usize) -> Result<MatrixLaw, SolveError> {
    let support = space.support();
    let ns = support.len() as u128;
    let tuples = ns.checked_pow(k as u32).unwrap_or(u128::MAX);
    if tuples > ENUMERATION_CAP {
        return Err(SolveError::EnumerationCap {
            needed: tuples,
            cap: ENUMERATION_CAP,
        });
    }
    let mut law = MatrixLaw::new(k);
    let mut tuple = vec![0usize; k];
    loop {
        let points: Vec<usize> = tuple.iter().map(|&t| support[t]).collect();
        let mass: f64 = points.iter().map(|&p| space.weight(p)).product();
        law.add(matrix_snapshot(space, &points), mass);
        // Odometer increment.
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(law);
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < support.len() {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// Monte-Carlo k-point matrix law: `samples` independent k-tuples drawn from
/// the weight measure, each contributing mass 1/samples.
pub fn sample_matrix_law(space: &FiniteLmms, k: usize, samples: usize, seed: u64) -> MatrixLaw {
    let mut rng = DetRng::new(seed);
    let support = space.support();
    let weights: Vec<f64> = support.iter().map(|&p| space.weight(p)).collect();
    let mut law = MatrixLaw::new(k);
    let mass = 1.0 / samples as f64;
    let mut points = vec![0usize; k];
    for _ in 0..samples {
        for slot in points.iter_mut() {
            *slot = support[rng.categorical(&weights)];
        }
        law.add(matrix_snapshot(space, &points), mass);
    }
    law
}

/// Integral of a snapshot functional against the exact k-point law.
pub fn evaluate_polynomial<F: Fn(&SquareMat) -> f64>(
    space: &FiniteLmms,
    k: usize,
    phi: F,
) -> Result<f64, SolveError> {
    Ok(exact_matrix_law(space, k)?.integrate(phi))
}

// ---------------------------------------------------------------------------
// Isomorphy
// ---------------------------------------------------------------------------

/// Result of the exact isomorphy decision.
#[derive(Clone, Debug)]
pub struct IsomorphyReport {
    pub isomorphic: bool,
    /// Class map from the first quotient's points onto the second's.
    pub witness: Option<Vec<usize>>,
    pub quotient_a: FiniteLmms,
    pub quotient_b: FiniteLmms,
}

/// Decides measure-preserving time isometry exactly (up to `tol`): both
/// spaces are reduced to their distance quotients, then a backtracking
/// search looks for a bijection preserving weights and time separations.
/// Candidate lists are pruned by per-point invariants (weight, sorted
/// separation rows and columns, sorted distinction-metric row) before the
/// search starts.
pub fn isomorphy_test(a: &FiniteLmms, b: &FiniteLmms, tol: f64) -> IsomorphyReport {
    let qa = distance_quotient(a, tol).space;
    let qb = distance_quotient(b, tol).space;
    let witness = match_quotients(&qa, &qb, tol);
    IsomorphyReport {
        isomorphic: witness.is_some(),
        witness,
        quotient_a: qa,
        quotient_b: qb,
    }
}

fn sorted_row(space: &FiniteLmms, i: usize, transpose: bool) -> Vec<f64> {
    let n = space.n();
    let mut row: Vec<f64> = (0..n)
        .map(|j| if transpose { space.t(j, i) } else { space.t(i, j) })
        .collect();
    row.sort_by(f64::total_cmp);
    row
}

fn close_slices(x: &[f64], y: &[f64], tol: f64) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= tol)
}

fn match_quotients(qa: &FiniteLmms, qb: &FiniteLmms, tol: f64) -> Option<Vec<usize>> {
    let n = qa.n();
    if n != qb.n() {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let na = noldus_metric(qa);
    let nb = noldus_metric(qb);
    let profile = |space: &FiniteLmms, nm: &SquareMat, i: usize| {
        let mut nrow: Vec<f64> = (0..space.n()).map(|j| nm.get(i, j)).collect();
        nrow.sort_by(f64::total_cmp);
        (
            space.weight(i),
            sorted_row(space, i, false),
            sorted_row(space, i, true),
            nrow,
        )
    };
    let pa: Vec<_> = (0..n).map(|i| profile(qa, &na, i)).collect();
    let pb: Vec<_> = (0..n).map(|i| profile(qb, &nb, i)).collect();

    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = Vec::new();
        for j in 0..n {
            if (pa[i].0 - pb[j].0).abs() <= tol
                && close_slices(&pa[i].1, &pb[j].1, tol)
                && close_slices(&pa[i].2, &pb[j].2, tol)
                && close_slices(&pa[i].3, &pb[j].3, tol)
            {
                c.push(j);
            }
        }
        if c.is_empty() {
            return None;
        }
        candidates.push(c);
    }

    // Assign scarcest points first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));

    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    #[allow(clippy::too_many_arguments)] // backtracking state is clearer spelled out
    fn dfs(
        depth: usize,
        order: &[usize],
        candidates: &[Vec<usize>],
        qa: &FiniteLmms,
        qb: &FiniteLmms,
        tol: f64,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let i = order[depth];
        for &j in &candidates[i] {
            if used[j] {
                continue;
            }
            let consistent = order[..depth].iter().all(|&i2| {
                let j2 = assign[i2].expect("assigned earlier");
                (qa.t(i, i2) - qb.t(j, j2)).abs() <= tol
                    && (qa.t(i2, i) - qb.t(j2, j)).abs() <= tol
            });
            if !consistent {
                continue;
            }
            assign[i] = Some(j);
            used[j] = true;
            if dfs(depth + 1, order, candidates, qa, qb, tol, assign, used) {
                return true;
            }
            assign[i] = None;
            used[j] = false;
        }
        false
    }
    if dfs(0, &order, &candidates, qa, qb, tol, &mut assign, &mut used) {
        Some(assign.into_iter().map(|x| x.expect("complete")).collect())
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Test-function families
// ---------------------------------------------------------------------------

/// Deterministic family of bump test functions on k×k snapshots. Each center
/// B induces φ_B(A) = max(0, 1 − max-norm(A − B)).
pub struct TestFunctionFamily {
    pub k: usize,
    pub centers: Vec<SquareMat>,
}

impl TestFunctionFamily {
    /// Centers are the atoms of the reference law in canonical key order,
    /// followed by axiom-valid grid matrices with off-diagonal entries from
    /// {0, diam/2, diam} (row-major enumeration order), deduplicated, up to
    /// `family_size` in total.
    pub fn build(reference: &MatrixLaw, diameter: f64, family_size: usize) -> Self {
        let k = reference.k();
        let mut centers: Vec<SquareMat> = Vec::new();
        let mut seen: BTreeMap<String, ()> = BTreeMap::new();
        for (key, mat, _) in reference.atoms() {
            if centers.len() >= family_size {
                break;
            }
            if seen.insert(String::from(key), ()).is_none() {
                centers.push(mat.clone());
            }
        }
        // Off-diagonal slots in row-major order.
        let slots: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| (0..k).map(move |c| (r, c)))
            .filter(|&(r, c)| r != c)
            .collect();
        let levels = [0.0, diameter / 2.0, diameter];
        if !slots.is_empty() && diameter > 0.0 {
            let mut choice = vec![0usize; slots.len()];
            'enumerate: loop {
                if centers.len() >= family_size {
                    break;
                }
                let mut mat = SquareMat::zeros(k);
                for (s, &(r, c)) in slots.iter().enumerate() {
                    mat.set(r, c, levels[choice[s]]);
                }
                if snapshot_axioms_ok(&mat, 1e-12) {
                    let key = encode_matrix(&mat);
                    if seen.insert(key, ()).is_none() {
                        centers.push(mat);
                    }
                }
                let mut pos = slots.len();
                loop {
                    if pos == 0 {
                        break 'enumerate;
                    }
                    pos -= 1;
                    choice[pos] += 1;
                    if choice[pos] < levels.len() {
                        break;
                    }
                    choice[pos] = 0;
                }
            }
        }
        TestFunctionFamily { k, centers }
    }

    /// φ_B for the i-th center.
    pub fn bump(&self, i: usize, mat: &SquareMat) -> f64 {
        let center = &self.centers[i];
        let mut dist: f64 = 0.0;
        for (a, b) in mat.flat().iter().zip(center.flat()) {
            dist = dist.max((a - b).abs());
        }
        (1.0 - dist).max(0.0)
    }

    /// Weighted integral discrepancy Σ_i 2^{-i} |∫φ_i dA − ∫φ_i dB| with the
    /// first center at weight 1/2.
    pub fn integral_gap(&self, law_a: &MatrixLaw, law_b: &MatrixLaw) -> f64 {
        let mut weight = 0.5;
        let mut total = 0.0;
        for i in 0..self.centers.len() {
            let ia = law_a.integrate(|m| self.bump(i, m));
            let ib = law_b.integrate(|m| self.bump(i, m));
            total += weight * (ia - ib).abs();
            weight *= 0.5;
        }
        total
    }
}

// ---------------------------------------------------------------------------
// Reconstruction experiment
// ---------------------------------------------------------------------------

/// Per-k comparison of the two spaces' matrix laws.
#[derive(Clone, Debug)]
pub struct KReport {
    pub k: usize,
    /// Laws were enumerated exactly (otherwise sampled).
    pub exact: bool,
    /// Total-variation distance between the two k-laws.
    pub tv_gap: f64,
    /// Weighted bump-integral discrepancy for this k.
    pub family_gap: f64,
    /// Exact mode: tv_gap below [`LAW_MASS_TOL`]. Sampled mode: the
    /// two-sample bootstrap could not distinguish the laws.
    pub equal: bool,
}

/// Full report of the reconstruction experiment.
#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub per_k: Vec<KReport>,
    /// Truncated intrinsic discrepancy Σ_k 2^{-k}·family_gap(k).
    pub intrinsic_estimate: f64,
    /// Verdict of the exact isomorphy decision.
    pub isomorphic: bool,
    /// All per-k law comparisons came out equal.
    pub laws_equal: bool,
    /// The matrix-law route and the isomorphy decision agree.
    pub verdicts_agree: bool,
}

/// Default number of centers per k in experiment families.
pub const DEFAULT_FAMILY_SIZE: usize = 64;

/// Compares the spaces' matrix laws for k = 1..=k_max against the exact
/// isomorphy decision. Laws are enumerated exactly when the tuple count
/// stays within [`ENUMERATION_CAP`], otherwise estimated from `samples`
/// draws with a 200-resample bootstrap deciding equality at three standard
/// deviations.
pub fn reconstruction_experiment(
    a: &FiniteLmms,
    b: &FiniteLmms,
    k_max: usize,
    samples: usize,
    seed: u64,
) -> ReconstructionReport {
    let mut per_k = Vec::with_capacity(k_max);
    let mut intrinsic = 0.0;
    let diameter = crate::space::diameter(a);
    for k in 1..=k_max {
        let exact_pair = match (exact_matrix_law(a, k), exact_matrix_law(b, k)) {
            (Ok(la), Ok(lb)) => Some((la, lb)),
            _ => None,
        };
        let (law_a, law_b, exact) = match exact_pair {
            Some((la, lb)) => (la, lb, true),
            None => (
                sample_matrix_law(a, k, samples, DetRng::substream_seed(seed, 2 * k as u64)),
                sample_matrix_law(b, k, samples, DetRng::substream_seed(seed, 2 * k as u64 + 1)),
                false,
            ),
        };
        let tv_gap = law_a.tv_distance(&law_b);
        let family = TestFunctionFamily::build(&law_a, diameter, DEFAULT_FAMILY_SIZE);
        let family_gap = family.integral_gap(&law_a, &law_b);
        let equal = if exact {
            tv_gap <= LAW_MASS_TOL
        } else {
            !bootstrap_distinguishes(
                &law_a,
                &law_b,
                samples,
                DetRng::substream_seed(seed, 1000 + k as u64),
            )
        };
        intrinsic += libm::pow(0.5, k as f64) * family_gap;
        per_k.push(KReport {
            k,
            exact,
            tv_gap,
            family_gap,
            equal,
        });
    }
    let isomorphic = isomorphy_test(a, b, crate::space::DEFAULT_TOL).isomorphic;
    let laws_equal = per_k.iter().all(|r| r.equal);
    ReconstructionReport {
        per_k,
        intrinsic_estimate: intrinsic,
        isomorphic,
        laws_equal,
        verdicts_agree: isomorphic == laws_equal,
    }
}

/// Two-sample bootstrap on sampled laws: pool the two empirical laws, draw
/// 200 fresh pairs of same-size samples from the pool, and flag the observed
/// total-variation gap as significant when it exceeds the resampled mean by
/// three standard deviations.
pub fn bootstrap_distinguishes(
    law_a: &MatrixLaw,
    law_b: &MatrixLaw,
    samples: usize,
    seed: u64,
) -> bool {
    const RESAMPLES: usize = 200;
    let observed = law_a.tv_distance(law_b);
    // Pooled masses over the key union, in canonical order.
    let mut keys: Vec<&str> = law_a.atoms().map(|(k, _, _)| k).collect();
    for (k, _, _) in law_b.atoms() {
        if law_a.mass_of(k) == 0.0 {
            keys.push(k);
        }
    }
    keys.sort_unstable();
    let pooled: Vec<f64> = keys
        .iter()
        .map(|k| 0.5 * (law_a.mass_of(k) + law_b.mass_of(k)))
        .collect();
    let mut cdf = Vec::with_capacity(pooled.len());
    let mut acc = 0.0;
    for &p in &pooled {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = DetRng::new(seed);
    let draw = |rng: &mut DetRng| -> Vec<u32> {
        let mut counts = vec![0u32; pooled.len()];
        for _ in 0..samples {
            let u = rng.uniform() * total;
            // First index with cdf >= u.
            let mut lo = 0usize;
            let mut hi = cdf.len() - 1;
            while lo < hi {
                let mid = (lo + hi) / 2;
                if cdf[mid] >= u {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            counts[lo] += 1;
        }
        counts
    };
    let mut mean = 0.0;
    let mut sq = 0.0;
    for _ in 0..RESAMPLES {
        let ca = draw(&mut rng);
        let cb = draw(&mut rng);
        let inv = 1.0 / samples as f64;
        let tv: f64 = ca
            .iter()
            .zip(&cb)
            .map(|(&x, &y)| (x as f64 - y as f64).abs())
            .sum::<f64>()
            * 0.5
            * inv;
        mean += tv;
        sq += tv * tv;
    }
    mean /= RESAMPLES as f64;
    let var = (sq / RESAMPLES as f64 - mean * mean).max(0.0);
    let sd = libm::sqrt(var);
    observed > mean + 3.0 * sd
}
