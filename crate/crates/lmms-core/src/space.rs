//! Finite bounded Lorentzian metric measure spaces.
//!
//! A finite space is a set of labeled points with a *time separation* matrix
//! `tau` (τ[i][j] ≥ 0, zero diagonal, reverse triangle inequality
//! τ(x,y) + τ(y,z) ≤ τ(x,z) whenever both summands are positive), a
//! probability weight per point, and an optional *spacelike boundary* point
//! i⁰ whose τ row and column vanish identically.
//!
//! This module provides the types plus the structural operations: axiom
//! validation, the distance quotient (merging τ-indistinguishable points on
//! the positive-weight support), the distinction (Noldus) metric
//! `n(x,y) = max(sup_z |τ(x,z) − τ(y,z)|, sup_z |τ(z,x) − τ(z,y)|)`,
//! diameter, disjoint unions glued at the boundary point, and the one-point
//! extension that adjoins a boundary.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::StructuralError;

/// Default absolute tolerance for axiom checks and float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Plain square matrix of reals, row-major. Used for τ and for derived
/// matrices such as the Noldus metric.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMat {
    n: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: alloc::vec![0.0; n * n],
        }
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self, StructuralError> {
        if data.len() != n * n {
            return Err(StructuralError::LengthMismatch {
                what: "square matrix entries",
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(StructuralError::NonFiniteEntry {
                what: "matrix entry",
                index: idx,
            });
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    /// Largest entry (0 for an empty matrix).
    pub fn max_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| if x > m { x } else { m })
    }
}

/// Time separation matrix: the τ of a finite space.
///
/// Construction checks only structure (shape, finiteness); the Lorentzian
/// axioms are checked by [`validate`] so that invalid instances can be loaded
/// and reported on rather than rejected opaquely.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeMatrix(SquareMat);

impl TimeMatrix {
    pub fn from_flat(n: usize, tau: Vec<f64>) -> Result<Self, StructuralError> {
        SquareMat::from_flat(n, tau).map(TimeMatrix)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, StructuralError> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(StructuralError::LengthMismatch {
                    what: "tau row",
                    expected: n,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, flat)
    }

    pub fn zeros(n: usize) -> Self {
        TimeMatrix(SquareMat::zeros(n))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0.set(i, j, v);
    }

    pub fn flat(&self) -> &[f64] {
        self.0.flat()
    }

    pub fn max_entry(&self) -> f64 {
        self.0.max_entry()
    }

    /// Entrywise power τ^q (fast path for q = 1).
    pub fn entrywise_pow(&self, q: f64) -> TimeMatrix {
        if q == 1.0 {
            return self.clone();
        }
        let data = self.flat().iter().map(|&x| libm::pow(x, q)).collect();
        TimeMatrix(SquareMat {
            n: self.n(),
            data,
        })
    }
}

/// A finite bounded Lorentzian metric measure space: labeled points, τ,
/// probability weights, optional spacelike-boundary index.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteLmms {
    labels: Vec<String>,
    tau: TimeMatrix,
    weights: Vec<f64>,
    boundary: Option<usize>,
}

impl FiniteLmms {
    pub fn new(
        labels: Vec<String>,
        tau: TimeMatrix,
        weights: Vec<f64>,
        boundary: Option<usize>,
    ) -> Result<Self, StructuralError> {
        let n = tau.n();
        if labels.len() != n {
            return Err(StructuralError::LengthMismatch {
                what: "labels",
                expected: n,
                got: labels.len(),
            });
        }
        if weights.len() != n {
            return Err(StructuralError::LengthMismatch {
                what: "weights",
                expected: n,
                got: weights.len(),
            });
        }
        if let Some(idx) = weights.iter().position(|w| !w.is_finite()) {
            return Err(StructuralError::NonFiniteEntry {
                what: "weight",
                index: idx,
            });
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(StructuralError::DuplicateLabel(a.clone()));
                }
            }
        }
        if let Some(b) = boundary {
            if b >= n {
                return Err(StructuralError::IndexOutOfRange { got: b, n });
            }
        }
        Ok(Self {
            labels,
            tau,
            weights,
            boundary,
        })
    }

    /// Space with auto-generated labels `p0..p{n-1}`.
    pub fn from_parts(
        tau: TimeMatrix,
        weights: Vec<f64>,
        boundary: Option<usize>,
    ) -> Result<Self, StructuralError> {
        let labels = (0..tau.n()).map(|i| format!("p{i}")).collect();
        Self::new(labels, tau, weights, boundary)
    }

    pub fn n(&self) -> usize {
        self.tau.n()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tau(&self) -> &TimeMatrix {
        &self.tau
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boundary(&self) -> Option<usize> {
        self.boundary
    }

    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.tau.get(i, j)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.weights[i] > 0.0).collect()
    }
}

/// One concrete axiom or consistency violation found by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeWeight { index: usize, weight: f64 },
    WeightSum { sum: f64 },
    NegativeEntry { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    ReverseTriangle { i: usize, j: usize, l: usize, sum: f64, direct: f64 },
    BoundaryNonzeroTau { boundary: usize, other: usize, value: f64 },
    BoundaryWeight { boundary: usize, weight: f64 },
    Indistinguishable { i: usize, j: usize },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::NegativeWeight { index, weight } => {
                write!(f, "weight[{index}] = {weight} is negative")
            }
            Violation::WeightSum { sum } => write!(f, "weights sum to {sum}, expected 1"),
            Violation::NegativeEntry { i, j, value } => {
                write!(f, "tau[{i}][{j}] = {value} is negative")
            }
            Violation::NonzeroDiagonal { i, value } => {
                write!(f, "tau[{i}][{i}] = {value}, expected 0")
            }
            Violation::ReverseTriangle { i, j, l, sum, direct } => write!(
                f,
                "reverse triangle fails at ({i},{j},{l}): tau[{i}][{j}] + tau[{j}][{l}] = {sum} > tau[{i}][{l}] = {direct}"
            ),
            Violation::BoundaryNonzeroTau { boundary, other, value } => write!(
                f,
                "boundary point {boundary} has nonzero tau {value} against point {other}"
            ),
            Violation::BoundaryWeight { boundary, weight } => {
                write!(f, "boundary point {boundary} carries weight {weight}")
            }
            Violation::Indistinguishable { i, j } => {
                write!(f, "points {i} and {j} are indistinguishable (zero Noldus distance)")
            }
        }
    }
}

/// Outcome of [`validate`]: hard axiom violations in `errors`, point
/// distinction failures (repairable by quotienting) in `warnings`.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    /// No axiom errors (warnings permitted).
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    /// Neither errors nor warnings.
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }
}

/// Check all axioms at absolute tolerance `tol`: nonnegative weights summing
/// to 1, nonnegative τ with zero diagonal, the reverse triangle inequality,
/// boundary consistency (zero row/column and zero weight), and — as warnings —
/// point distinction.
pub fn validate(space: &FiniteLmms, tol: f64) -> ValidationReport {
    let n = space.n();
    let mut report = ValidationReport::default();

    let mut sum = 0.0;
    for (i, &w) in space.weights().iter().enumerate() {
        if w < -tol {
            report.errors.push(Violation::NegativeWeight { index: i, weight: w });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > tol.max(1e-9) {
        report.errors.push(Violation::WeightSum { sum });
    }

    for i in 0..n {
        let d = space.t(i, i);
        if d.abs() > tol {
            report.errors.push(Violation::NonzeroDiagonal { i, value: d });
        }
        for j in 0..n {
            let v = space.t(i, j);
            if v < -tol {
                report.errors.push(Violation::NegativeEntry { i, j, value: v });
            }
        }
    }

    for i in 0..n {
        for j in 0..n {
            let tij = space.t(i, j);
            if tij <= tol {
                continue;
            }
            for l in 0..n {
                let tjl = space.t(j, l);
                if tjl <= tol {
                    continue;
                }
                let direct = space.t(i, l);
                if tij + tjl > direct + tol {
                    report.errors.push(Violation::ReverseTriangle {
                        i,
                        j,
                        l,
                        sum: tij + tjl,
                        direct,
                    });
                }
            }
        }
    }

    if let Some(b) = space.boundary() {
        for j in 0..n {
            if space.t(b, j).abs() > tol {
                report.errors.push(Violation::BoundaryNonzeroTau {
                    boundary: b,
                    other: j,
                    value: space.t(b, j),
                });
            }
            if space.t(j, b).abs() > tol {
                report.errors.push(Violation::BoundaryNonzeroTau {
                    boundary: b,
                    other: j,
                    value: space.t(j, b),
                });
            }
        }
        if space.weight(b) > tol {
            report.errors.push(Violation::BoundaryWeight {
                boundary: b,
                weight: space.weight(b),
            });
        }
    }

    let noldus = noldus_metric(space);
    for i in 0..n {
        for j in (i + 1)..n {
            if noldus.get(i, j) <= tol {
                report.warnings.push(Violation::Indistinguishable { i, j });
            }
        }
    }

    report
}

/// Distinction metric: `n(x,y) = max over z of |τ(x,z) − τ(y,z)| and
/// |τ(z,x) − τ(z,y)|`. Symmetric with zero diagonal; vanishes exactly on
/// pairs merged by the distance quotient.
pub fn noldus_metric(space: &FiniteLmms) -> SquareMat {
    let n = space.n();
    let mut m = SquareMat::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut gap: f64 = 0.0;
            for z in 0..n {
                gap = gap.max((space.t(i, z) - space.t(j, z)).abs());
                gap = gap.max((space.t(z, i) - space.t(z, j)).abs());
            }
            m.set(i, j, gap);
            m.set(j, i, gap);
        }
    }
    m
}

/// Partition of the point indices into merge classes of the quotient
/// relation (zero Noldus distance at tolerance `tol`).
#[derive(Clone, Debug)]
pub struct PointDistinctionReport {
    pub merge_classes: Vec<Vec<usize>>,
    pub distinguished: bool,
}

/// Merge classes over *all* points (support restriction is the quotient's
/// job, not the report's).
pub fn point_distinction_report(space: &FiniteLmms, tol: f64) -> PointDistinctionReport {
    let classes = merge_classes(space, &(0..space.n()).collect::<Vec<_>>(), tol);
    let distinguished = classes.iter().all(|c| c.len() == 1);
    PointDistinctionReport {
        merge_classes: classes,
        distinguished,
    }
}

/// Group `points` into classes of pairwise Noldus distance ≤ tol, where the
/// sup defining the Noldus gap ranges over `points` only.
fn merge_classes(space: &FiniteLmms, points: &[usize], tol: f64) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for &p in points {
        for class in classes.iter_mut() {
            let rep = class[0];
            let mut gap: f64 = 0.0;
            for &z in points {
                gap = gap.max((space.t(p, z) - space.t(rep, z)).abs());
                gap = gap.max((space.t(z, p) - space.t(z, rep)).abs());
            }
            if gap <= tol {
                class.push(p);
                continue 'outer;
            }
        }
        classes.push(alloc::vec![p]);
    }
    classes
}

/// Result of [`distance_quotient`]: the quotient space plus, per original
/// point index, the index of its class in the quotient (None for dropped
/// zero-weight points).
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: FiniteLmms,
    pub class_of: Vec<Option<usize>>,
}

/// Restrict to the positive-weight support, merge τ-indistinguishable points
/// (weights summed, τ̃ = class-pair mean to absorb float noise ≤ tol), and
/// sort the classes canonically by (weight desc, τ-row lex, label).
pub fn distance_quotient(space: &FiniteLmms, tol: f64) -> Quotient {
    let support = space.support();
    let classes = merge_classes(space, &support, tol);
    let k = classes.len();

    let mut tau = TimeMatrix::zeros(k);
    for (ci, ca) in classes.iter().enumerate() {
        for (cj, cb) in classes.iter().enumerate() {
            let mut acc = 0.0;
            for &x in ca {
                for &y in cb {
                    acc += space.t(x, y);
                }
            }
            tau.set(ci, cj, acc / (ca.len() * cb.len()) as f64);
        }
    }
    // Class-pair means of an exactly-zero diagonal can pick up τ(x,y) terms
    // between merged points; those are zero by indistinguishability against
    // z = x, so force the diagonal.
    for i in 0..k {
        tau.set(i, i, 0.0);
    }

    let weights: Vec<f64> = classes
        .iter()
        .map(|c| c.iter().map(|&x| space.weight(x)).sum())
        .collect();
    let labels: Vec<String> = classes
        .iter()
        .map(|c| space.labels()[c[0]].clone())
        .collect();

    // Canonical order: weight desc, then τ-row lexicographic, then label.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .total_cmp(&weights[a])
            .then_with(|| {
                for j in 0..k {
                    let c = tau.get(a, j).total_cmp(&tau.get(b, j));
                    if c != core::cmp::Ordering::Equal {
                        return c;
                    }
                }
                core::cmp::Ordering::Equal
            })
            .then_with(|| labels[a].cmp(&labels[b]))
    });
    let rank_of: Vec<usize> = {
        let mut r = alloc::vec![0usize; k];
        for (rank, &c) in order.iter().enumerate() {
            r[c] = rank;
        }
        r
    };

    let mut sorted_tau = TimeMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            sorted_tau.set(i, j, tau.get(order[i], order[j]));
        }
    }
    let sorted_weights: Vec<f64> = order.iter().map(|&c| weights[c]).collect();
    let sorted_labels: Vec<String> = order.iter().map(|&c| labels[c].clone()).collect();

    let mut class_of: Vec<Option<usize>> = alloc::vec![None; space.n()];
    for (ci, class) in classes.iter().enumerate() {
        for &x in class {
            class_of[x] = Some(rank_of[ci]);
        }
    }

    let boundary = space.boundary().and_then(|b| class_of[b]);
    let space = FiniteLmms::new(sorted_labels, sorted_tau, sorted_weights, boundary)
        .expect("quotient preserves structural validity");
    Quotient { space, class_of }
}

/// Max of τ over positive-weight pairs; 0 when the support has at most one
/// point.
pub fn diameter(space: &FiniteLmms) -> f64 {
    let support = space.support();
    let mut d: f64 = 0.0;
    for &i in &support {
        for &j in &support {
            d = d.max(space.t(i, j));
        }
    }
    d
}

/// Adjoin a spacelike boundary point: zero τ row/column, zero weight,
/// flagged as boundary. Errors if the space already has one.
pub fn one_point_compactification(space: &FiniteLmms) -> Result<FiniteLmms, StructuralError> {
    if space.boundary().is_some() {
        return Err(StructuralError::AlreadyBounded);
    }
    let n = space.n();
    let mut tau = TimeMatrix::zeros(n + 1);
    for i in 0..n {
        for j in 0..n {
            tau.set(i, j, space.t(i, j));
        }
    }
    let mut weights = space.weights().to_vec();
    weights.push(0.0);
    let mut labels = space.labels().to_vec();
    let mut boundary_label = String::from("i0");
    while labels.contains(&boundary_label) {
        boundary_label.push('_');
    }
    labels.push(boundary_label);
    FiniteLmms::new(labels, tau, weights, Some(n))
}

/// Disjoint union glued at the shared boundary point: τ̂ restricts to each
/// side and vanishes across, weights mix as α on the left and 1−α on the
/// right. Sides lacking a boundary get one adjoined first. Left labels are
/// prefixed `l:`, right labels `r:`, the shared boundary is labeled `i0`.
pub fn disjoint_union(
    a: &FiniteLmms,
    b: &FiniteLmms,
    alpha: f64,
) -> Result<FiniteLmms, StructuralError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(StructuralError::ParameterRange {
            what: "alpha",
            got: alpha,
        });
    }
    let a = match a.boundary() {
        Some(_) => a.clone(),
        None => one_point_compactification(a)?,
    };
    let b = match b.boundary() {
        Some(_) => b.clone(),
        None => one_point_compactification(b)?,
    };
    let (ba, bb) = (a.boundary().unwrap(), b.boundary().unwrap());
    let a_pts: Vec<usize> = (0..a.n()).filter(|&i| i != ba).collect();
    let b_pts: Vec<usize> = (0..b.n()).filter(|&i| i != bb).collect();
    let n = a_pts.len() + b_pts.len() + 1;
    let boundary_idx = n - 1;

    let mut tau = TimeMatrix::zeros(n);
    for (i, &pi) in a_pts.iter().enumerate() {
        for (j, &pj) in a_pts.iter().enumerate() {
            tau.set(i, j, a.t(pi, pj));
        }
    }
    let off = a_pts.len();
    for (i, &pi) in b_pts.iter().enumerate() {
        for (j, &pj) in b_pts.iter().enumerate() {
            tau.set(off + i, off + j, b.t(pi, pj));
        }
    }

    let mut labels: Vec<String> = Vec::with_capacity(n);
    let mut weights: Vec<f64> = Vec::with_capacity(n);
    for &pi in &a_pts {
        labels.push(format!("l:{}", a.labels()[pi]));
        weights.push(alpha * a.weight(pi));
    }
    for &pi in &b_pts {
        labels.push(format!("r:{}", b.labels()[pi]));
        weights.push((1.0 - alpha) * b.weight(pi));
    }
    labels.push("i0".to_string());
    weights.push(alpha * a.weight(ba) + (1.0 - alpha) * b.weight(bb));

    FiniteLmms::new(labels, tau, weights, Some(boundary_idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{split_second_point as duplicated_point_space, two_point};
    use alloc::vec;

    #[test]
    fn two_point_space_validates_clean() {
        let report = validate(&two_point(1.0), DEFAULT_TOL);
        assert!(report.is_clean(), "unexpected violations: {report:?}");
    }

    #[test]
    fn broken_chain_reports_reverse_triangle() {
        // tau(1,2) = 1, tau(2,3) = 1 but tau(1,3) = 1.5 < 2.
        let s = FiniteLmms::new(
            vec!["x".into(), "y".into(), "z".into()],
            TimeMatrix::from_rows(&[
                vec![0.0, 1.0, 1.5],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 0.0],
            ])
            .unwrap(),
            vec![1.0 / 3.0; 3],
            None,
        )
        .unwrap();
        let report = validate(&s, DEFAULT_TOL);
        assert!(!report.is_valid());
        assert!(report.errors.iter().any(|v| matches!(
            v,
            Violation::ReverseTriangle { i: 0, j: 1, l: 2, .. }
        )));
    }

    #[test]
    fn indistinguishable_points_warn_but_stay_valid() {
        let report = validate(&duplicated_point_space(), DEFAULT_TOL);
        assert!(report.is_valid());
        assert_eq!(
            report.warnings,
            vec![Violation::Indistinguishable { i: 1, j: 2 }]
        );
    }

    #[test]
    fn negative_entry_is_an_axiom_error() {
        let s = FiniteLmms::from_parts(
            TimeMatrix::from_rows(&[vec![0.0, -0.5], vec![0.0, 0.0]]).unwrap(),
            vec![0.5, 0.5],
            None,
        )
        .unwrap();
        let report = validate(&s, DEFAULT_TOL);
        assert!(report
            .errors
            .iter()
            .any(|v| matches!(v, Violation::NegativeEntry { i: 0, j: 1, .. })));
    }

    #[test]
    fn boundary_with_mass_or_nonzero_tau_is_an_error() {
        let s = FiniteLmms::new(
            vec!["a".into(), "i0".into()],
            TimeMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            vec![0.5, 0.5],
            Some(1),
        )
        .unwrap();
        let report = validate(&s, DEFAULT_TOL);
        assert!(report
            .errors
            .iter()
            .any(|v| matches!(v, Violation::BoundaryNonzeroTau { .. })));
        assert!(report
            .errors
            .iter()
            .any(|v| matches!(v, Violation::BoundaryWeight { .. })));
    }

    #[test]
    fn noldus_two_point_value_by_direct_evaluation() {
        // Oracle: evaluate the definition by hand over z in {a, b}.
        // z=a: |tau(a,a)-tau(b,a)| = 0, |tau(a,a)-tau(a,b)| = 1.
        // z=b: |tau(a,b)-tau(b,b)| = 1, |tau(b,a)-tau(b,b)| = 0.
        let n = noldus_metric(&two_point(1.0));
        assert_eq!(n.get(0, 1), 1.0);
        assert_eq!(n.get(1, 0), 1.0);
        assert_eq!(n.get(0, 0), 0.0);
    }

    #[test]
    fn noldus_vanishes_on_duplicated_points() {
        let n = noldus_metric(&duplicated_point_space());
        assert_eq!(n.get(1, 2), 0.0);
        assert!(n.get(0, 1) > 0.0);
    }

    #[test]
    fn quotient_merges_duplicated_points() {
        let q = distance_quotient(&duplicated_point_space(), DEFAULT_TOL);
        assert_eq!(q.space.n(), 2);
        assert_eq!(q.space.weights(), &[0.5, 0.5]);
        // Class of b and b'' coincide; a is its own class.
        assert_eq!(q.class_of[1], q.class_of[2]);
        assert_ne!(q.class_of[0], q.class_of[1]);
        // The quotient matrix is that of the two-point space with tau = 1.
        let a_class = q.class_of[0].unwrap();
        let b_class = q.class_of[1].unwrap();
        assert_eq!(q.space.t(a_class, b_class), 1.0);
        assert_eq!(q.space.t(b_class, a_class), 0.0);
        assert!(validate(&q.space, DEFAULT_TOL).is_clean());
    }

    #[test]
    fn quotient_drops_zero_weight_points() {
        let s = FiniteLmms::new(
            vec!["a".into(), "b".into(), "ghost".into()],
            TimeMatrix::from_rows(&[
                vec![0.0, 1.0, 2.0],
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ])
            .unwrap(),
            vec![0.5, 0.5, 0.0],
            None,
        )
        .unwrap();
        let q = distance_quotient(&s, DEFAULT_TOL);
        assert_eq!(q.space.n(), 2);
        assert_eq!(q.class_of[2], None);
    }

    #[test]
    fn quotient_is_idempotent_on_fixture() {
        let q1 = distance_quotient(&duplicated_point_space(), DEFAULT_TOL);
        let q2 = distance_quotient(&q1.space, DEFAULT_TOL);
        assert_eq!(q1.space, q2.space);
    }

    #[test]
    fn diameter_respects_support() {
        assert_eq!(diameter(&two_point(1.0)), 1.0);
        assert_eq!(diameter(&two_point(2.0)), 2.0);
        let half_supported = FiniteLmms::from_parts(
            TimeMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            vec![1.0, 0.0],
            None,
        )
        .unwrap();
        assert_eq!(diameter(&half_supported), 0.0);
    }

    #[test]
    fn compactification_adds_flagged_zero_point() {
        let c = one_point_compactification(&two_point(1.0)).unwrap();
        assert_eq!(c.n(), 3);
        assert_eq!(c.boundary(), Some(2));
        assert_eq!(c.weight(2), 0.0);
        for j in 0..3 {
            assert_eq!(c.t(2, j), 0.0);
            assert_eq!(c.t(j, 2), 0.0);
        }
        // Distances among original points unchanged.
        assert_eq!(c.t(0, 1), 1.0);
        assert!(one_point_compactification(&c).is_err());
        assert!(validate(&c, DEFAULT_TOL).is_clean());
    }

    #[test]
    fn union_of_two_point_space_with_itself_has_five_points_and_zero_cross_tau() {
        let u = disjoint_union(&two_point(1.0), &two_point(1.0), 0.5).unwrap();
        assert_eq!(u.n(), 5);
        assert_eq!(u.boundary(), Some(4));
        // Cross block vanishes.
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(u.t(i, j), 0.0);
                assert_eq!(u.t(j, i), 0.0);
            }
        }
        // Each side keeps its tau and half its mass.
        assert_eq!(u.t(0, 1), 1.0);
        assert_eq!(u.t(2, 3), 1.0);
        assert_eq!(u.weights(), &[0.25, 0.25, 0.25, 0.25, 0.0]);
        assert!(validate(&u, DEFAULT_TOL).is_valid());
    }

    #[test]
    fn union_alpha_one_concentrates_on_left() {
        let u = disjoint_union(&two_point(1.0), &two_point(2.0), 1.0).unwrap();
        let right_mass: f64 = (2..4).map(|i| u.weight(i)).sum();
        assert_eq!(right_mass, 0.0);
        let left_mass: f64 = (0..2).map(|i| u.weight(i)).sum();
        assert!((left_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn union_diameter_is_max_of_sides() {
        let u = disjoint_union(&two_point(1.0), &two_point(2.0), 0.5).unwrap();
        assert_eq!(diameter(&u), diameter(&two_point(1.0)).max(diameter(&two_point(2.0))));
    }

    #[test]
    fn union_rejects_alpha_outside_unit_interval() {
        assert!(disjoint_union(&two_point(1.0), &two_point(2.0), 1.5).is_err());
    }

    #[test]
    fn structural_errors_reject_malformed_input() {
        assert!(TimeMatrix::from_flat(2, vec![0.0; 3]).is_err());
        assert!(TimeMatrix::from_flat(1, vec![f64::NAN]).is_err());
        let tau = TimeMatrix::zeros(2);
        assert!(FiniteLmms::new(
            vec!["a".into(), "a".into()],
            tau.clone(),
            vec![0.5, 0.5],
            None
        )
        .is_err());
        assert!(FiniteLmms::new(
            vec!["a".into(), "b".into()],
            tau,
            vec![0.5, 0.5],
            Some(7)
        )
        .is_err());
    }
}
