//! Distance solvers: certified exact minimization on small supports,
//! heuristic minimization beyond, and the intrinsic test-function
//! discrepancy.
//!
//! Every metric here is an infimum over couplings of a functional of the
//! distortion profile (see [`crate::coupling`]). The solvers share one
//! pipeline:
//!
//! 1. restrict both spaces to their supports (distances are blind to
//!    zero-weight points) and orient the pair canonically so that solving
//!    (a, b) and (b, a) runs the identical computation;
//! 2. decide isomorphy exactly; isomorphic pairs short-circuit to distance
//!    zero with the class-transport coupling as witness;
//! 3. dispatch on the requested method: `Exact` (certified, supports of at
//!    most three points per side), `FrankWolfe`, `Anneal`, or `Grid`.
//!
//! The exact ε-level solver decomposes the minimization by gap thresholds:
//! for each candidate threshold γ it minimizes the mass above γ — a
//! quadratic in the coupling — by stationary-face enumeration
//! ([`faces`]), and takes the best max(γ, mass). The exact sup solver
//! binary-searches the candidate gap values, deciding feasibility of each
//! level through maximal cliques of the pair-compatibility graph checked
//! by transportation flows. The exact p-distortion solver is a single
//! face-enumeration run on the gap^p quadratic.

pub mod bnb;
pub mod faces;
pub mod flow;
pub mod heuristics;

use alloc::vec;
use alloc::vec::Vec;

use crate::coupling::{
    distortion_profile, eps_level, lp_distortion, northwest_vertex, product_coupling, Coupling,
    DistortionProfile,
};
use crate::error::SolveError;
use crate::space::{FiniteLmms, TimeMatrix};
use bnb::QuadraticObjective;
use faces::{minimize_over_faces, FaceDecomposition};
use flow::bounded_plan;

/// How a distance value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Certified search (branch-and-bound / exhaustive feasibility).
    Exact,
    /// Frank–Wolfe descent on the quadratic (or smoothed) objective.
    FrankWolfe,
    /// Simulated annealing over transportation-polytope vertices.
    Anneal,
    /// Lattice scan over the free coupling coordinates with refinement.
    Grid,
}

/// Resource limits for the solvers.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Branch-and-bound node budget per subproblem.
    pub node_cap: usize,
    /// Iterations per heuristic run.
    pub iter_cap: usize,
    /// Heuristic restarts.
    pub restarts: usize,
    /// Coarse lattice step for [`Method::Grid`].
    pub grid_step: f64,
    /// Certified absolute optimality gap for exact searches.
    pub bnb_gap: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            node_cap: 200_000,
            iter_cap: 200,
            restarts: 8,
            grid_step: 1e-3,
            bnb_gap: 5e-8,
        }
    }
}

/// Largest per-side support for the certified solvers.
pub const EXACT_SUPPORT_CAP: usize = 3;

/// Largest support-point count for the isomorphy pre-check.
const ISO_PRECHECK_CAP: usize = 64;

/// A distance value together with its witness coupling and provenance.
/// The value always equals the functional evaluated on the witness (it is
/// recomputed from the witness at construction).
#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub value: f64,
    pub witness: Coupling,
    pub method: Method,
    /// True only for resolved exact searches: the reported value is then
    /// within the budget's optimality gap of the true distance.
    pub certified: bool,
    /// Nodes, feasibility probes, or heuristic iterations spent.
    pub iterations: usize,
}

/// Which profile functional is being minimized.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Functional {
    EpsLevel,
    Power(f64),
    Sup,
}

impl Functional {
    fn of_profile(self, profile: &DistortionProfile) -> f64 {
        match self {
            Functional::EpsLevel => eps_level(profile),
            Functional::Power(p) => lp_distortion(profile, p),
            Functional::Sup => lp_distortion(profile, f64::INFINITY),
        }
    }
}

// ---------------------------------------------------------------------------
// Support restriction and canonical orientation
// ---------------------------------------------------------------------------

struct Oriented {
    /// Support-restricted sides, possibly swapped.
    a: FiniteLmms,
    b: FiniteLmms,
    /// Original indices of the restricted points.
    map_a: Vec<usize>,
    map_b: Vec<usize>,
    /// Original full sizes (for witness embedding).
    full_a: usize,
    full_b: usize,
    swapped: bool,
}

fn restrict_support(space: &FiniteLmms) -> (FiniteLmms, Vec<usize>) {
    let support = space.support();
    let k = support.len();
    let mut tau = vec![0.0; k * k];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            tau[r * k + c] = space.t(i, j);
        }
    }
    let weights: Vec<f64> = support.iter().map(|&i| space.weight(i)).collect();
    // The boundary point carries zero weight, so restriction drops it.
    let restricted = FiniteLmms::from_parts(
        TimeMatrix::from_flat(k, tau).expect("finite entries"),
        weights,
        None,
    )
    .expect("support restriction of a valid space");
    (restricted, support)
}

/// Total order on spaces used purely to orient a pair canonically so that
/// distance computations are symmetric by construction.
fn space_key_cmp(x: &FiniteLmms, y: &FiniteLmms) -> core::cmp::Ordering {
    use core::cmp::Ordering;
    match x.n().cmp(&y.n()) {
        Ordering::Equal => {}
        other => return other,
    }
    for i in 0..x.n() {
        for j in 0..x.n() {
            match x.t(i, j).total_cmp(&y.t(i, j)) {
                Ordering::Equal => {}
                other => return other,
            }
        }
    }
    for i in 0..x.n() {
        match x.weight(i).total_cmp(&y.weight(i)) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

fn orient(a: &FiniteLmms, b: &FiniteLmms) -> Oriented {
    let (ra, map_a) = restrict_support(a);
    let (rb, map_b) = restrict_support(b);
    if space_key_cmp(&rb, &ra) == core::cmp::Ordering::Less {
        Oriented {
            a: rb,
            b: ra,
            map_a: map_b,
            map_b: map_a,
            full_a: b.n(),
            full_b: a.n(),
            swapped: true,
        }
    } else {
        Oriented {
            a: ra,
            b: rb,
            map_a,
            map_b,
            full_a: a.n(),
            full_b: b.n(),
            swapped: false,
        }
    }
}

impl Oriented {
    /// Scatters a restricted plan back to a coupling over the original
    /// (unrestricted, unswapped) index sets.
    fn embed(&self, plan: &[f64]) -> Coupling {
        let (sn, sm) = (self.a.n(), self.b.n());
        debug_assert_eq!(plan.len(), sn * sm);
        let mut full = vec![0.0; self.full_a * self.full_b];
        for r in 0..sn {
            for c in 0..sm {
                full[self.map_a[r] * self.full_b + self.map_b[c]] = plan[r * sm + c];
            }
        }
        if self.swapped {
            // Rows of the output must index the caller's first space.
            let mut t = vec![0.0; self.full_a * self.full_b];
            for i in 0..self.full_a {
                for j in 0..self.full_b {
                    t[j * self.full_a + i] = full[i * self.full_b + j];
                }
            }
            Coupling::from_flat_unchecked(self.full_b, self.full_a, t)
        } else {
            Coupling::from_flat_unchecked(self.full_a, self.full_b, full)
        }
    }
}

// ---------------------------------------------------------------------------
// Cell geometry shared by the solvers
// ---------------------------------------------------------------------------

/// Precomputed q-powered time matrices and cell indexing for a restricted
/// pair: cell e = i * m + ip couples point i of the first side with point ip
/// of the second.
pub(crate) struct Cells {
    pub n: usize,
    pub m: usize,
    ta: Vec<f64>,
    tb: Vec<f64>,
}

impl Cells {
    pub(crate) fn new(a: &FiniteLmms, b: &FiniteLmms, q: f64) -> Self {
        let (n, m) = (a.n(), b.n());
        let pow = |x: f64| if q == 1.0 { x } else { libm::pow(x, q) };
        let mut ta = vec![0.0; n * n];
        let mut tb = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                ta[i * n + j] = pow(a.t(i, j));
            }
        }
        for i in 0..m {
            for j in 0..m {
                tb[i * m + j] = pow(b.t(i, j));
            }
        }
        Cells { n, m, ta, tb }
    }

    pub(crate) fn cells(&self) -> usize {
        self.n * self.m
    }

    /// q-powered separation τ_a(i, j)^q of the first side.
    pub(crate) fn ta_at(&self, i: usize, j: usize) -> f64 {
        self.ta[i * self.n + j]
    }

    /// q-powered separation τ_b(i, j)^q of the second side.
    pub(crate) fn tb_at(&self, i: usize, j: usize) -> f64 {
        self.tb[i * self.m + j]
    }

    /// |τ_a(i, j)^q − τ_b(i′, j′)^q| for cells e = (i, i′), f = (j, j′).
    pub(crate) fn gap(&self, e: usize, f: usize) -> f64 {
        let (i, ip) = (e / self.m, e % self.m);
        let (j, jp) = (f / self.m, f % self.m);
        (self.ta[i * self.n + j] - self.tb[ip * self.m + jp]).abs()
    }

    /// Dense pair costs c_ef = step(gap(e, f)) for a given transform.
    pub(crate) fn pair_costs<F: Fn(f64) -> f64>(&self, step: F) -> Vec<f64> {
        let nm = self.cells();
        let mut out = vec![0.0; nm * nm];
        for e in 0..nm {
            for f in 0..nm {
                out[e * nm + f] = step(self.gap(e, f));
            }
        }
        out
    }

    /// Sorted distinct gap values (merged within 1e-12), always including 0.
    pub(crate) fn distinct_gaps(&self) -> Vec<f64> {
        let nm = self.cells();
        let mut gaps = Vec::with_capacity(nm * nm + 1);
        gaps.push(0.0);
        for e in 0..nm {
            for f in 0..nm {
                gaps.push(self.gap(e, f));
            }
        }
        gaps.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for g in gaps {
            if out.last().is_none_or(|&last| g - last > 1e-12) {
                out.push(g);
            }
        }
        out
    }

    pub(crate) fn max_gap(&self) -> f64 {
        let nm = self.cells();
        let mut best = 0.0f64;
        for e in 0..nm {
            for f in 0..nm {
                best = best.max(self.gap(e, f));
            }
        }
        best
    }
}

/// All permutations of 0..n (Heap's algorithm); intended for tiny n.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            rec(k - 1, cur, out);
            if k.is_multiple_of(2) {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

/// All north-west vertices over full permutation enumeration (supports of at
/// most four points per side), used as exact-solver seeds.
fn vertex_seeds(wa: &[f64], wb: &[f64]) -> Vec<Vec<f64>> {
    let mut seeds = vec![product_coupling(wa, wb).flat().to_vec()];
    if wa.len() <= 4 && wb.len() <= 4 {
        for pa in permutations(wa.len()) {
            for pb in permutations(wb.len()) {
                seeds.push(northwest_vertex(wa, wb, &pa, &pb).flat().to_vec());
            }
        }
    }
    seeds
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// ε-level distortion distance (the smallest ε such that some coupling puts
/// mass at most ε on gaps above ε), with time separations raised to the
/// power q ≥ 1 first.
pub fn solve_l0(
    a: &FiniteLmms,
    b: &FiniteLmms,
    q: f64,
    method: Method,
    budget: &Budget,
    seed: u64,
) -> Result<DistanceResult, SolveError> {
    solve_metric(a, b, Functional::EpsLevel, q, method, budget, seed)
}

/// p-distortion distance ((∫ gap^p dπ⊗²)^{1/p} minimized over couplings),
/// 1 ≤ p < ∞; infinite p delegates to [`solve_linf`].
pub fn solve_lp(
    a: &FiniteLmms,
    b: &FiniteLmms,
    p: f64,
    q: f64,
    method: Method,
    budget: &Budget,
    seed: u64,
) -> Result<DistanceResult, SolveError> {
    if p.is_nan() || p < 1.0 {
        return Err(SolveError::ParameterRange {
            what: "exponent p",
            got: p,
        });
    }
    if p.is_infinite() {
        return solve_linf(a, b, q, method, budget, seed);
    }
    solve_metric(a, b, Functional::Power(p), q, method, budget, seed)
}

/// Sup-distortion distance (essential supremum of the gap, minimized over
/// couplings).
pub fn solve_linf(
    a: &FiniteLmms,
    b: &FiniteLmms,
    q: f64,
    method: Method,
    budget: &Budget,
    seed: u64,
) -> Result<DistanceResult, SolveError> {
    solve_metric(a, b, Functional::Sup, q, method, budget, seed)
}

fn solve_metric(
    a: &FiniteLmms,
    b: &FiniteLmms,
    functional: Functional,
    q: f64,
    method: Method,
    budget: &Budget,
    seed: u64,
) -> Result<DistanceResult, SolveError> {
    if q.is_nan() || q < 1.0 {
        return Err(SolveError::ParameterRange {
            what: "exponent q",
            got: q,
        });
    }
    let oriented = orient(a, b);
    let (sn, sm) = (oriented.a.n(), oriented.b.n());

    // Isomorphic pairs are at distance zero for every metric; the class
    // transport is the witness.
    if sn <= ISO_PRECHECK_CAP && sm <= ISO_PRECHECK_CAP {
        if let Some(plan) = isomorphism_plan(&oriented.a, &oriented.b) {
            return Ok(finish(
                a,
                b,
                &oriented,
                &plan,
                functional,
                q,
                Method::Exact,
                true,
                0,
            ));
        }
    }

    let cells = Cells::new(&oriented.a, &oriented.b, q);
    let wa: Vec<f64> = (0..sn).map(|i| oriented.a.weight(i)).collect();
    let wb: Vec<f64> = (0..sm).map(|i| oriented.b.weight(i)).collect();

    let (plan, certified, iterations, used_method) = match method {
        Method::Exact => {
            if sn > EXACT_SUPPORT_CAP || sm > EXACT_SUPPORT_CAP {
                return Err(SolveError::TooLargeForExact {
                    n: sn,
                    m: sm,
                    cap: EXACT_SUPPORT_CAP,
                });
            }
            let (plan, certified, iters) = match functional {
                Functional::EpsLevel => exact_eps_level(&cells, &wa, &wb),
                Functional::Power(p) => exact_power(&cells, &wa, &wb, p),
                Functional::Sup => exact_sup(&cells, &wa, &wb),
            };
            (plan, certified, iters, Method::Exact)
        }
        Method::FrankWolfe => {
            let (plan, iters) =
                heuristics::frank_wolfe_metric(&cells, &wa, &wb, functional, budget, seed);
            (plan, false, iters, Method::FrankWolfe)
        }
        Method::Anneal => {
            let (plan, iters) =
                heuristics::anneal_metric(&cells, &wa, &wb, functional, budget, seed);
            (plan, false, iters, Method::Anneal)
        }
        Method::Grid => {
            let (plan, iters) = heuristics::grid_metric(&cells, &wa, &wb, functional, budget)?;
            (plan, false, iters, Method::Grid)
        }
    };

    Ok(finish(
        a,
        b,
        &oriented,
        &plan,
        functional,
        q,
        used_method,
        certified,
        iterations,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &FiniteLmms,
    b: &FiniteLmms,
    oriented: &Oriented,
    plan: &[f64],
    functional: Functional,
    q: f64,
    method: Method,
    certified: bool,
    iterations: usize,
) -> DistanceResult {
    let witness = oriented.embed(plan);
    let profile = distortion_profile(a, b, &witness, q);
    let value = functional.of_profile(&profile);
    DistanceResult {
        value,
        witness,
        method,
        certified,
        iterations,
    }
}

/// Class-transport coupling between two isomorphic restricted spaces, or
/// None when they are not isomorphic.
fn isomorphism_plan(a: &FiniteLmms, b: &FiniteLmms) -> Option<Vec<f64>> {
    let report = crate::reconstruct::isomorphy_test(a, b, crate::space::DEFAULT_TOL);
    let class_map = report.witness?;
    let qa = crate::space::distance_quotient(a, crate::space::DEFAULT_TOL);
    let qb = crate::space::distance_quotient(b, crate::space::DEFAULT_TOL);
    let (n, m) = (a.n(), b.n());
    // Weight of each class on the b side.
    let mut class_weight_b = vec![0.0; qb.space.n()];
    for j in 0..m {
        if let Some(c) = qb.class_of[j] {
            class_weight_b[c] += b.weight(j);
        }
    }
    let mut plan = vec![0.0; n * m];
    for i in 0..n {
        let ca = qa.class_of[i]?;
        let target = class_map[ca];
        for j in 0..m {
            if qb.class_of[j] == Some(target) {
                plan[i * m + j] = a.weight(i) * b.weight(j) / class_weight_b[target];
            }
        }
    }
    Some(plan)
}

// ---------------------------------------------------------------------------
// Exact solvers (restricted supports of at most three points per side)
// ---------------------------------------------------------------------------

/// Exact p-distortion: the gap^p quadratic minimized outright by
/// stationary-face enumeration.
fn exact_power(cells: &Cells, wa: &[f64], wb: &[f64], p: f64) -> (Vec<f64>, bool, usize) {
    let raw = cells.pair_costs(|g| libm::pow(g, p));
    let obj = QuadraticObjective::from_cost(cells.n, cells.m, &raw);
    let dec = FaceDecomposition::new(wa, wb);
    let (_, plan) = minimize_over_faces(&dec, &obj, f64::NEG_INFINITY);
    (plan, true, dec.face_count())
}

/// Exact ε-level distance by threshold decomposition: the distance equals
/// min over candidate thresholds γ of max(γ, m_γ) where m_γ is the smallest
/// coupling mass on gaps above γ — a quadratic with indicator costs,
/// minimized outright by stationary-face enumeration (shared across the
/// thresholds). Thresholds are scanned in increasing order with
/// incumbent-based early termination; a mass search may also stop early
/// once it gets under γ, where the max(γ, ·) clamp makes the exact value
/// irrelevant.
fn exact_eps_level(cells: &Cells, wa: &[f64], wb: &[f64]) -> (Vec<f64>, bool, usize) {
    let thresholds = cells.distinct_gaps();
    let dec = FaceDecomposition::new(wa, wb);
    let mut faces_total = 0usize;

    // Seed incumbent: best ε-level among vertex couplings.
    let seeds = vertex_seeds(wa, wb);
    let mut best_value = f64::INFINITY;
    let mut best_plan: Vec<f64> = seeds[0].clone();
    for plan in &seeds {
        let v = eps_of_plan(cells, plan);
        if v < best_value {
            best_value = v;
            best_plan = plan.clone();
        }
    }

    for &gamma in &thresholds {
        if gamma >= best_value - 1e-15 {
            break;
        }
        // Mass above gamma, minimized over couplings.
        let raw = cells.pair_costs(|g| if g > gamma + 1e-12 { 1.0 } else { 0.0 });
        let obj = QuadraticObjective::from_cost(cells.n, cells.m, &raw);
        let (mass, plan) = minimize_over_faces(&dec, &obj, gamma);
        faces_total += dec.face_count();
        let candidate = gamma.max(mass);
        if candidate < best_value {
            best_value = candidate;
            best_plan = plan;
        }
    }
    (best_plan, true, faces_total)
}

fn eps_of_plan(cells: &Cells, plan: &[f64]) -> f64 {
    let nm = cells.cells();
    let mut atoms = Vec::new();
    for e in 0..nm {
        if plan[e] == 0.0 {
            continue;
        }
        for f in 0..nm {
            if plan[f] == 0.0 {
                continue;
            }
            atoms.push((cells.gap(e, f), plan[e] * plan[f]));
        }
    }
    eps_level(&DistortionProfile::from_atoms(atoms))
}

/// Exact sup-distortion: binary search over the candidate gap values. A
/// level ε is feasible when some maximal clique of the pair-compatibility
/// graph (cells whose mutual gaps stay within ε) carries a transportation
/// plan; cliques are enumerated by Bron–Kerbosch with pivoting.
fn exact_sup(cells: &Cells, wa: &[f64], wb: &[f64]) -> (Vec<f64>, bool, usize) {
    let candidates = cells.distinct_gaps();
    let nm = cells.cells();
    let mut probes = 0usize;

    let feasible = |eps: f64, probes: &mut usize| -> Option<Vec<f64>> {
        *probes += 1;
        let mut adj = vec![false; nm * nm];
        let mut complete = true;
        for e in 0..nm {
            for f in 0..nm {
                let ok = cells.gap(e, f) <= eps + 1e-12 && cells.gap(f, e) <= eps + 1e-12;
                adj[e * nm + f] = ok;
                complete &= ok;
            }
        }
        if complete {
            return bounded_plan(wa, wb, &vec![0.0; nm], &vec![f64::INFINITY; nm]);
        }
        // Enumerate maximal cliques, flow-checking each; feasibility is
        // monotone in the clique, so maximal cliques decide.
        let mut found: Option<Vec<f64>> = None;
        bron_kerbosch(
            &adj,
            nm,
            &mut Vec::new(),
            (0..nm).collect(),
            Vec::new(),
            &mut |clique: &[usize]| -> bool {
                let mut hi = vec![0.0; nm];
                for &e in clique {
                    hi[e] = f64::INFINITY;
                }
                if let Some(plan) = bounded_plan(wa, wb, &vec![0.0; nm], &hi) {
                    found = Some(plan);
                    true
                } else {
                    false
                }
            },
        );
        found
    };

    // Binary search the smallest feasible candidate level.
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    let mut witness = feasible(candidates[hi], &mut probes).expect("max gap always feasible");
    if let Some(plan) = feasible(candidates[lo], &mut probes) {
        return (plan, true, probes);
    }
    // Invariant: lo infeasible, hi feasible.
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match feasible(candidates[mid], &mut probes) {
            Some(plan) => {
                witness = plan;
                hi = mid;
            }
            None => lo = mid,
        }
    }
    (witness, true, probes)
}

/// Bron–Kerbosch with pivoting. `report` returns true to stop the whole
/// enumeration (used to short-circuit once a feasible clique is found).
fn bron_kerbosch(
    adj: &[bool],
    n: usize,
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    report: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if p.is_empty() && x.is_empty() {
        return report(r);
    }
    // Pivot: vertex of p ∪ x with most neighbours in p.
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u * n + v]).count())
        .expect("nonempty p or x");
    let branch: Vec<usize> = p
        .iter()
        .copied()
        .filter(|&v| !adj[pivot * n + v])
        .collect();
    let mut p = p;
    let mut x = x;
    for v in branch {
        let np: Vec<usize> = p.iter().copied().filter(|&u| adj[v * n + u]).collect();
        let nx: Vec<usize> = x.iter().copied().filter(|&u| adj[v * n + u]).collect();
        r.push(v);
        let stop = bron_kerbosch(adj, n, r, np, nx, report);
        r.pop();
        if stop {
            return true;
        }
        p.retain(|&u| u != v);
        x.push(v);
    }
    false
}

// ---------------------------------------------------------------------------
// Intrinsic discrepancy
// ---------------------------------------------------------------------------

/// Deterministic intrinsic discrepancy: Σ_k 2^{-k} · (weighted bump-integral
/// gap between the k-point matrix laws), with bump centers built from the
/// first space's law. Laws are enumerated exactly when small enough,
/// otherwise sampled (10^5 draws per side, seeded deterministically).
pub fn intrinsic_d(
    a: &FiniteLmms,
    b: &FiniteLmms,
    k_max: usize,
    family_size: usize,
    seed: u64,
) -> f64 {
    use crate::reconstruct::{exact_matrix_law, sample_matrix_law, TestFunctionFamily};
    const FALLBACK_SAMPLES: usize = 100_000;
    let diameter = crate::space::diameter(a);
    let mut total = 0.0;
    for k in 1..=k_max {
        let (law_a, law_b) = match (exact_matrix_law(a, k), exact_matrix_law(b, k)) {
            (Ok(la), Ok(lb)) => (la, lb),
            _ => (
                sample_matrix_law(
                    a,
                    k,
                    FALLBACK_SAMPLES,
                    crate::rng::DetRng::substream_seed(seed, 2 * k as u64),
                ),
                sample_matrix_law(
                    b,
                    k,
                    FALLBACK_SAMPLES,
                    crate::rng::DetRng::substream_seed(seed, 2 * k as u64 + 1),
                ),
            ),
        };
        let family = TestFunctionFamily::build(&law_a, diameter, family_size);
        total += libm::pow(0.5, k as f64) * family.integral_gap(&law_a, &law_b);
    }
    total
}
