//! Exact global minimization of a quadratic form over the transportation
//! polytope by face enumeration.
//!
//! On the restricted supports handled by the certified solvers the polytope
//! lives in at most nine cells. Each face is the set of couplings vanishing
//! outside a fixed cell pattern, and the global minimum is attained in the
//! relative interior of some face, where it is a stationary point of the
//! quadratic restricted to the face's affine hull. Enumerating every cell
//! pattern, solving each restricted stationarity system directly, and
//! keeping the best candidate that lies in the polytope therefore finds the
//! global minimum outright — no iteration budget and no optimality gap
//! beyond linear-algebra roundoff. Branch-and-bound with interval bounds
//! can stall on these objectives: an indefinite quadratic that is flat
//! along a two-dimensional set forces box subdivision down to the gap
//! tolerance across the whole set, which no node budget survives.

use alloc::vec;
use alloc::vec::Vec;

use super::bnb::QuadraticObjective;

/// Relative pivot / consistency tolerance for the tiny linear systems.
const PIVOT_TOL: f64 = 1e-11;
/// Allowed constraint violation when accepting a candidate coupling
/// (weights are normalized, so this is an absolute mass tolerance).
const FEAS_TOL: f64 = 1e-10;

/// Affine hull of one face: the couplings supported on a cell pattern with
/// the prescribed marginals, parametrized as `x0 + basis · y`.
struct Face {
    x0: Vec<f64>,
    /// Null directions of the marginal equations within the pattern, each a
    /// full `nm`-vector (zero outside the pattern). Empty for vertices.
    basis: Vec<Vec<f64>>,
    /// Cells of the pattern (the only coordinates that may move).
    cells: Vec<usize>,
}

/// All nonempty faces of the transportation polytope of `(wa, wb)`,
/// precomputed once so that repeated minimizations (one per threshold in a
/// scan) only pay for the stationarity solves.
pub struct FaceDecomposition {
    n: usize,
    m: usize,
    faces: Vec<Face>,
}

impl FaceDecomposition {
    /// Enumerates every support pattern whose marginal equations are
    /// solvable. Requires strictly positive weights (callers restrict to
    /// the support first) with at most [`MAX_CELLS`] cells in total.
    pub fn new(wa: &[f64], wb: &[f64]) -> Self {
        let (n, m) = (wa.len(), wb.len());
        let nm = n * m;
        debug_assert!(nm <= MAX_CELLS, "face enumeration needs a small grid");
        let mut faces = Vec::new();
        for mask in 1u32..(1 << nm) {
            // Quick reject: every row and column needs a cell to carry its
            // positive weight.
            let mut row_ok = vec![false; n];
            let mut col_ok = vec![false; m];
            let mut cells = Vec::new();
            for e in 0..nm {
                if mask & (1 << e) != 0 {
                    row_ok[e / m] = true;
                    col_ok[e % m] = true;
                    cells.push(e);
                }
            }
            if !(row_ok.iter().all(|&v| v) && col_ok.iter().all(|&v| v)) {
                continue;
            }
            // Marginal equations restricted to the pattern's cells.
            let k = cells.len();
            let rows = n + m;
            let mut a = vec![0.0; rows * k];
            let mut b = vec![0.0; rows];
            for (col, &e) in cells.iter().enumerate() {
                a[(e / m) * k + col] = 1.0;
                a[(n + e % m) * k + col] = 1.0;
            }
            b[..n].copy_from_slice(wa);
            b[n..].copy_from_slice(wb);
            let Some((part, null)) = solve_affine(&mut a, &mut b, rows, k) else {
                continue;
            };
            let embed = |v: &[f64]| -> Vec<f64> {
                let mut full = vec![0.0; nm];
                for (col, &e) in cells.iter().enumerate() {
                    full[e] = v[col];
                }
                full
            };
            faces.push(Face {
                x0: embed(&part),
                basis: null.iter().map(|v| embed(v)).collect(),
                cells,
            });
        }
        FaceDecomposition { n, m, faces }
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    /// Number of nonempty faces (used for work reporting).
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }
}

/// Largest grid size the exhaustive pattern enumeration accepts.
pub const MAX_CELLS: usize = 16;

/// Global minimum of the quadratic over the polytope: the best stationary
/// candidate across all faces, as `(value, coupling)`. `stop_below` permits
/// an early return once some candidate reaches it — the returned value is
/// then still an upper bound on the minimum, which is all a threshold scan
/// needs; pass `f64::NEG_INFINITY` for the true minimum.
pub fn minimize_over_faces(
    dec: &FaceDecomposition,
    obj: &QuadraticObjective,
    stop_below: f64,
) -> (f64, Vec<f64>) {
    debug_assert_eq!(dec.n, obj.rows());
    debug_assert_eq!(dec.m, obj.cols());
    let mut best_value = f64::INFINITY;
    let mut best_plan: Option<Vec<f64>> = None;
    let mut grad = Vec::new();
    for face in &dec.faces {
        let Some(candidate) = face_candidate(face, obj, &mut grad) else {
            continue;
        };
        let value = obj.eval(&candidate);
        if value < best_value {
            best_value = value;
            best_plan = Some(candidate);
            if best_value <= stop_below {
                break;
            }
        }
    }
    // The full-pattern face always yields a candidate (the polytope is
    // nonempty for positive weights), so a plan exists.
    let plan = best_plan.expect("transportation polytope has a feasible face");
    (best_value, plan)
}

/// Stationary point of the quadratic on the face's affine hull, if one lies
/// in the polytope. Faces whose restricted minimum sits on their boundary
/// return None here; the boundary is a smaller pattern enumerated on its
/// own.
fn face_candidate(face: &Face, obj: &QuadraticObjective, grad: &mut Vec<f64>) -> Option<Vec<f64>> {
    let d = face.basis.len();
    if d == 0 {
        return feasible_on(&face.x0, &face.cells).then(|| face.x0.clone());
    }
    // Reduced gradient r_k = uₖ·∇F(x0) and Hessian Q_kl = uₖ·∇F(u_l)
    // (∇F is linear in its argument, so ∇F(u_l) = 2 S u_l).
    let mut r = vec![0.0; d];
    obj.gradient(&face.x0, grad);
    for (k, u) in face.basis.iter().enumerate() {
        r[k] = dot(u, grad);
    }
    let mut q = vec![0.0; d * d];
    for l in 0..d {
        obj.gradient(&face.basis[l], grad);
        for (k, u) in face.basis.iter().enumerate() {
            q[k * d + l] = dot(u, grad);
        }
    }
    let mut rhs: Vec<f64> = r.iter().map(|&v| -v).collect();
    let (y0, kernel) = solve_affine(&mut q, &mut rhs, d, d)?;
    let at = |y: &[f64], z: Option<(&[Vec<f64>], &[f64])>| -> Vec<f64> {
        let mut x = face.x0.clone();
        for (k, u) in face.basis.iter().enumerate() {
            let mut coef = y[k];
            if let Some((kernel, z)) = z {
                for (j, kv) in kernel.iter().enumerate() {
                    coef += kv[k] * z[j];
                }
            }
            axpy(&mut x, coef, u);
        }
        x
    };
    if kernel.is_empty() {
        let x = at(&y0, None);
        return feasible_on(&x, &face.cells).then_some(x);
    }
    // The stationary set is an affine family with a constant value: find
    // any member inside the polytope. The feasible part is a bounded
    // polyhedron (the face is bounded and the parametrization is
    // injective), so if it is nonempty some vertex has `kz` independent
    // active cell constraints — enumerate those basic points.
    let kz = kernel.len();
    let base = at(&y0, None);
    // Constraint per cell: base[c] + row_c · z ≥ 0.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for &c in &face.cells {
        let row: Vec<f64> = (0..kz)
            .map(|j| {
                face.basis
                    .iter()
                    .enumerate()
                    .map(|(k, u)| kernel[j][k] * u[c])
                    .sum()
            })
            .collect();
        if row.iter().all(|&v| v.abs() <= PIVOT_TOL) {
            // Constant along the family: decided outright.
            if base[c] < -FEAS_TOL {
                return None;
            }
        } else {
            rows.push((row, base[c]));
        }
    }
    if rows.len() < kz {
        // Fewer moving constraints than directions cannot pin a bounded
        // set; only the base point remains to try.
        return feasible_on(&base, &face.cells).then_some(base);
    }
    let mut active = vec![0usize; kz];
    basic_points(&rows, kz, &mut active, 0, 0, &mut |z: &[f64]| {
        let x = at(&y0, Some((&kernel, z)));
        feasible_on(&x, &face.cells).then_some(x)
    })
}

/// Tries every size-`kz` subset of constraint rows as an active set,
/// solving for the basic point and handing it to `try_point`; returns the
/// first accepted point.
fn basic_points(
    rows: &[(Vec<f64>, f64)],
    kz: usize,
    active: &mut [usize],
    depth: usize,
    start: usize,
    try_point: &mut dyn FnMut(&[f64]) -> Option<Vec<f64>>,
) -> Option<Vec<f64>> {
    if depth == kz {
        let mut a = vec![0.0; kz * kz];
        let mut b = vec![0.0; kz];
        // Active cells: base[c] + row · z = 0.
        for (i, &ri) in active.iter().enumerate() {
            let (row, basec) = &rows[ri];
            a[i * kz..(i + 1) * kz].copy_from_slice(row);
            b[i] = -basec;
        }
        let (z, kernel) = solve_affine(&mut a, &mut b, kz, kz)?;
        if !kernel.is_empty() {
            return None; // dependent active set; another subset covers it
        }
        return try_point(&z);
    }
    for i in start..rows.len() {
        active[depth] = i;
        if let Some(found) = basic_points(rows, kz, active, depth + 1, i + 1, try_point) {
            return Some(found);
        }
    }
    None
}

fn feasible_on(x: &[f64], cells: &[usize]) -> bool {
    cells.iter().all(|&c| x[c] >= -FEAS_TOL)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &mut [f64], coef: f64, u: &[f64]) {
    if coef == 0.0 {
        return;
    }
    for (xe, ue) in x.iter_mut().zip(u) {
        *xe += coef * ue;
    }
}

/// Row-reduces `A y = b` in place (row-major, `rows × cols`). Returns the
/// particular solution with free variables at zero and one null-basis
/// vector per free column, or None when the system is inconsistent.
fn solve_affine(
    a: &mut [f64],
    b: &mut [f64],
    rows: usize,
    cols: usize,
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let scale = a.iter().fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let rhs_scale = b.iter().fold(scale, |acc, &v| acc.max(v.abs()));
    let tol = PIVOT_TOL * scale;
    let mut pivot_col_of_row = vec![usize::MAX; rows];
    let mut pivot_row_of_col = vec![usize::MAX; cols];
    let mut rank = 0usize;
    for col in 0..cols {
        // Partial pivoting within the unreduced rows.
        let (mut best_row, mut best_abs) = (usize::MAX, tol);
        for row in rank..rows {
            let v = a[row * cols + col].abs();
            if v > best_abs {
                best_abs = v;
                best_row = row;
            }
        }
        if best_row == usize::MAX {
            continue;
        }
        if best_row != rank {
            for c in 0..cols {
                a.swap(rank * cols + c, best_row * cols + c);
            }
            b.swap(rank, best_row);
        }
        let inv = 1.0 / a[rank * cols + col];
        for c in 0..cols {
            a[rank * cols + c] *= inv;
        }
        b[rank] *= inv;
        for row in 0..rows {
            if row == rank {
                continue;
            }
            let f = a[row * cols + col];
            if f == 0.0 {
                continue;
            }
            for c in 0..cols {
                a[row * cols + c] -= f * a[rank * cols + c];
            }
            b[row] -= f * b[rank];
        }
        pivot_col_of_row[rank] = col;
        pivot_row_of_col[col] = rank;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // Consistency: zeroed rows must have (numerically) zero right-hand side.
    for row in rank..rows {
        if b[row].abs() > PIVOT_TOL * rhs_scale.max(1.0) {
            return None;
        }
    }
    let mut particular = vec![0.0; cols];
    for row in 0..rank {
        particular[pivot_col_of_row[row]] = b[row];
    }
    let mut null = Vec::new();
    for col in 0..cols {
        if pivot_row_of_col[col] != usize::MAX {
            continue;
        }
        let mut v = vec![0.0; cols];
        v[col] = 1.0;
        for row in 0..rank {
            v[pivot_col_of_row[row]] = -a[row * cols + col];
        }
        null.push(v);
    }
    Some((particular, null))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_affine_full_rank_system() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![5.0, 10.0];
        let (x, null) = solve_affine(&mut a, &mut b, 2, 2).unwrap();
        assert!(null.is_empty());
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_affine_reports_null_directions() {
        // x + y = 1 in two variables: one free direction.
        let mut a = vec![1.0, 1.0];
        let mut b = vec![1.0];
        let (x, null) = solve_affine(&mut a, &mut b, 1, 2).unwrap();
        assert_eq!(null.len(), 1);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!((null[0][0] + null[0][1]).abs() < 1e-12);
    }

    #[test]
    fn solve_affine_detects_inconsistency() {
        let mut a = vec![1.0, 1.0, 1.0, 1.0];
        let mut b = vec![1.0, 2.0];
        assert!(solve_affine(&mut a, &mut b, 2, 2).is_none());
    }

    #[test]
    fn face_enumeration_counts_two_by_two_patterns() {
        // 2×2 with uniform marginals: patterns must cover both rows and
        // both columns and admit the marginals — the two diagonals and any
        // pattern with three or four cells qualify: 2 + 4 + 1.
        let dec = FaceDecomposition::new(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(dec.faces.len(), 7);
    }

    #[test]
    fn minimizes_a_convex_separable_objective_at_the_product() {
        // S = identity: F(π) = Σ π_e², minimized by the most spread-out
        // coupling, which for uniform marginals is the product (all 1/4).
        let nm = 4;
        let mut raw = vec![0.0; nm * nm];
        for e in 0..nm {
            raw[e * nm + e] = 1.0;
        }
        let obj = QuadraticObjective::from_cost(2, 2, &raw);
        let dec = FaceDecomposition::new(&[0.5, 0.5], &[0.5, 0.5]);
        let (value, plan) = minimize_over_faces(&dec, &obj, f64::NEG_INFINITY);
        assert!((value - 0.25).abs() < 1e-10);
        for &p in &plan {
            assert!((p - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn minimizes_a_concave_objective_at_a_vertex() {
        // S = −identity: F(π) = −Σ π_e² is concave, so the minimum sits at
        // a vertex; for uniform marginals a permutation coupling gives −1/2.
        let nm = 4;
        let mut raw = vec![0.0; nm * nm];
        for e in 0..nm {
            raw[e * nm + e] = -1.0;
        }
        let obj = QuadraticObjective::from_cost(2, 2, &raw);
        let dec = FaceDecomposition::new(&[0.5, 0.5], &[0.5, 0.5]);
        let (value, _) = minimize_over_faces(&dec, &obj, f64::NEG_INFINITY);
        assert!((value + 0.5).abs() < 1e-10);
    }
}
