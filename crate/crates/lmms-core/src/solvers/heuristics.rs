//! Uncertified minimizers used beyond the exact solvers' support cap (and
//! as incumbent polishers inside them).
//!
//! * Frank–Wolfe descent: the p-distortion objective is a quadratic form in
//!   the coupling, so each step minimizes a linear cost over the
//!   transportation polytope (a min-cost flow) and takes the closed-form
//!   best step along the segment. The ε-level objective is handled through
//!   a sigmoid relaxation of the indicator cost with a staged sharpening
//!   schedule; the sup objective through a high-exponent power surrogate.
//!   Pair costs are evaluated lazily (never materialized as an
//!   (nm)²-matrix), with a fast matrix-product gradient for p = 2.
//! * Simulated annealing: a walk over north-west transportation vertices
//!   indexed by order pairs, proposing transpositions, scored by the true
//!   functional.
//! * Grid scan: exhaustive lattice search over the free coupling
//!   coordinates (at most two) with two refinement stages.
//!
//! All routines are deterministic given the seed, and restart r draws from
//! an rng substream indexed by r alone, so restarts can be distributed
//! across workers without changing results.

use alloc::vec;
use alloc::vec::Vec;

use super::flow::min_cost_plan;
use super::{Budget, Cells, Functional};
use crate::coupling::{northwest_vertex, product_coupling, random_coupling, DistortionProfile};
use crate::error::SolveError;
use crate::rng::DetRng;

/// True functional value of a plan (profile built over support pairs).
pub(crate) fn plan_value(cells: &Cells, plan: &[f64], functional: Functional) -> f64 {
    let nm = cells.cells();
    let mut atoms = Vec::new();
    for e in 0..nm {
        if plan[e] <= 0.0 {
            continue;
        }
        for f in 0..nm {
            if plan[f] <= 0.0 {
                continue;
            }
            atoms.push((cells.gap(e, f), plan[e] * plan[f]));
        }
    }
    functional.of_profile(&DistortionProfile::from_atoms(atoms))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Keeps the smaller value; ties within 1e-15 resolve to the
/// lexicographically smaller plan so that restart merging is
/// order-independent.
fn take_if_better(best: &mut (f64, Vec<f64>), value: f64, plan: &[f64]) {
    if value < best.0 - 1e-15 || ((value - best.0).abs() <= 1e-15 && lex_less(plan, &best.1)) {
        *best = (value, plan.to_vec());
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x.clamp(-40.0, 40.0)))
}

fn start_plan(r: usize, wa: &[f64], wb: &[f64], seed: u64) -> Vec<f64> {
    match r {
        0 => product_coupling(wa, wb).flat().to_vec(),
        1 => {
            let ia: Vec<usize> = (0..wa.len()).collect();
            let ib: Vec<usize> = (0..wb.len()).collect();
            northwest_vertex(wa, wb, &ia, &ib).flat().to_vec()
        }
        _ => {
            let mut rng = DetRng::substream(seed, 64 + r as u64);
            random_coupling(wa, wb, &mut rng).flat().to_vec()
        }
    }
}

// ---------------------------------------------------------------------------
// Lazily evaluated pair costs
// ---------------------------------------------------------------------------

enum LazyCost<'a> {
    /// c_ef = gap(e, f)^p.
    Power { cells: &'a Cells, p: f64 },
    /// c_ef = sigmoid((gap(e, f) − eps) / sigma), a smooth indicator proxy.
    Sigmoid {
        cells: &'a Cells,
        eps: f64,
        sigma: f64,
    },
}

impl LazyCost<'_> {
    fn cost(&self, e: usize, f: usize) -> f64 {
        match *self {
            LazyCost::Power { cells, p } => {
                let g = cells.gap(e, f);
                if p == 2.0 {
                    g * g
                } else {
                    libm::pow(g, p)
                }
            }
            LazyCost::Sigmoid { cells, eps, sigma } => sigmoid((cells.gap(e, f) - eps) / sigma),
        }
    }

    /// out_e = Σ_f (c_ef + c_fe) x_f, the gradient of x ↦ Σ c_ef x_e x_f.
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        if let LazyCost::Power { cells, p } = *self {
            if p == 2.0 {
                gradient_squared(cells, x, out);
                return;
            }
        }
        let nm = out.len();
        for e in 0..nm {
            let mut acc = 0.0;
            for f in 0..nm {
                if x[f] != 0.0 {
                    acc += (self.cost(e, f) + self.cost(f, e)) * x[f];
                }
            }
            out[e] = acc;
        }
    }

    /// Σ_ef c_ef x_e x_f (= ½ x·gradient(x)).
    fn eval(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; x.len()];
        self.gradient(x, &mut g);
        0.5 * dot(&g, x)
    }
}

/// Gradient for squared-gap costs via matrix products: with e = (i, i′) and
/// f = (j, j′), (τ_a(i,j) − τ_b(i′,j′))² expands into marginal sums plus a
/// bilinear term Ta·X·Tbᵀ, giving O(n²m + nm²) instead of O((nm)²).
fn gradient_squared(cells: &Cells, x: &[f64], out: &mut [f64]) {
    let (n, m) = (cells.n, cells.m);
    let ta = |i: usize, j: usize| cells.ta_at(i, j);
    let tb = |i: usize, j: usize| cells.tb_at(i, j);
    let mut xr = vec![0.0; n]; // row sums of X (n×m)
    let mut xc = vec![0.0; m]; // column sums
    for j in 0..n {
        for jp in 0..m {
            let v = x[j * m + jp];
            xr[j] += v;
            xc[jp] += v;
        }
    }
    // Forward direction: Σ_f c_ef x_f with c_ef = (ta[i,j] − tb[i′,j′])².
    // a2[i] = Σ_j ta[i,j]² xr[j]; b2[i′] = Σ_j′ tb[i′,j′]² xc[j′];
    // m1[i,i′] = Σ_j Σ_j′ ta[i,j] x[j,j′] tb[i′,j′].
    // Reverse direction uses transposed time matrices.
    let mut a2f = vec![0.0; n];
    let mut a2r = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            a2f[i] += ta(i, j) * ta(i, j) * xr[j];
            a2r[i] += ta(j, i) * ta(j, i) * xr[j];
        }
    }
    let mut b2f = vec![0.0; m];
    let mut b2r = vec![0.0; m];
    for ip in 0..m {
        for jp in 0..m {
            b2f[ip] += tb(ip, jp) * tb(ip, jp) * xc[jp];
            b2r[ip] += tb(jp, ip) * tb(jp, ip) * xc[jp];
        }
    }
    // yf[j, i′] = Σ_j′ x[j, j′] tb[i′, j′]; yr[j, i′] = Σ_j′ x[j, j′] tb[j′, i′]
    let mut yf = vec![0.0; n * m];
    let mut yr = vec![0.0; n * m];
    for j in 0..n {
        for jp in 0..m {
            let v = x[j * m + jp];
            if v == 0.0 {
                continue;
            }
            for ip in 0..m {
                yf[j * m + ip] += v * tb(ip, jp);
                yr[j * m + ip] += v * tb(jp, ip);
            }
        }
    }
    for i in 0..n {
        for ip in 0..m {
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for j in 0..n {
                m1 += ta(i, j) * yf[j * m + ip];
                m2 += ta(j, i) * yr[j * m + ip];
            }
            out[i * m + ip] = a2f[i] + b2f[ip] - 2.0 * m1 + a2r[i] + b2r[ip] - 2.0 * m2;
        }
    }
}

// ---------------------------------------------------------------------------
// Frank–Wolfe
// ---------------------------------------------------------------------------

/// Frank–Wolfe descent with exact line search along each segment. The
/// objective is quadratic, so the step is closed-form; indefinite curvature
/// sends the step to the far endpoint.
fn frank_wolfe_lazy(
    cost: &LazyCost,
    wa: &[f64],
    wb: &[f64],
    start: &[f64],
    iter_cap: usize,
) -> (Vec<f64>, usize) {
    let nm = start.len();
    let mut x = start.to_vec();
    let mut grad = vec![0.0; nm];
    let mut iters = 0usize;
    for _ in 0..iter_cap.max(1) {
        iters += 1;
        cost.gradient(&x, &mut grad);
        let target = min_cost_plan(wa, wb, &grad);
        let delta: Vec<f64> = target.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let b_lin = dot(&grad, &delta);
        if b_lin >= -1e-13 {
            break;
        }
        let a_quad = cost.eval(&delta);
        let t = if a_quad > 0.0 {
            (-b_lin / (2.0 * a_quad)).min(1.0)
        } else {
            1.0
        };
        if t <= 0.0 {
            break;
        }
        for k in 0..nm {
            x[k] = (x[k] + t * delta[k]).max(0.0);
        }
        if t * (-b_lin) < 1e-16 {
            break;
        }
    }
    (x, iters)
}

/// Multi-restart Frank–Wolfe for any of the three functionals.
pub(crate) fn frank_wolfe_metric(
    cells: &Cells,
    wa: &[f64],
    wb: &[f64],
    functional: Functional,
    budget: &Budget,
    seed: u64,
) -> (Vec<f64>, usize) {
    let mut best = (f64::INFINITY, Vec::new());
    let mut total_iters = 0usize;
    for r in 0..budget.restarts.max(1) {
        let start = start_plan(r, wa, wb, seed);
        match functional {
            Functional::Power(p) => {
                let cost = LazyCost::Power { cells, p };
                let (plan, it) = frank_wolfe_lazy(&cost, wa, wb, &start, budget.iter_cap);
                total_iters += it;
                let v = plan_value(cells, &plan, functional);
                take_if_better(&mut best, v, &plan);
            }
            Functional::Sup => {
                // High-exponent power surrogate; scored by the true sup.
                let cost = LazyCost::Power { cells, p: 32.0 };
                let (plan, it) = frank_wolfe_lazy(&cost, wa, wb, &start, budget.iter_cap);
                total_iters += it;
                let v = plan_value(cells, &plan, Functional::Sup);
                take_if_better(&mut best, v, &plan);
            }
            Functional::EpsLevel => {
                // Staged sigmoid sharpening around the running ε estimate.
                let g = cells.max_gap().max(1e-9);
                let mut plan = start;
                let mut eps_ref = plan_value(cells, &plan, Functional::EpsLevel);
                take_if_better(&mut best, eps_ref, &plan);
                for stage in 0..4 {
                    let sigma = (g / 8.0) * libm::pow(0.25, stage as f64);
                    let cost = LazyCost::Sigmoid {
                        cells,
                        eps: eps_ref,
                        sigma,
                    };
                    let (next, it) =
                        frank_wolfe_lazy(&cost, wa, wb, &plan, (budget.iter_cap / 2).max(25));
                    total_iters += it;
                    plan = next;
                    let v = plan_value(cells, &plan, Functional::EpsLevel);
                    take_if_better(&mut best, v, &plan);
                    eps_ref = v;
                }
            }
        }
    }
    (best.1, total_iters)
}

// ---------------------------------------------------------------------------
// Simulated annealing over transportation vertices
// ---------------------------------------------------------------------------

/// Metropolis walk over north-west vertices indexed by order pairs, with
/// transposition proposals and a geometric cooling schedule.
pub(crate) fn anneal_metric(
    cells: &Cells,
    wa: &[f64],
    wb: &[f64],
    functional: Functional,
    budget: &Budget,
    seed: u64,
) -> (Vec<f64>, usize) {
    let (n, m) = (cells.n, cells.m);
    let mut best = (f64::INFINITY, Vec::new());
    let mut total_steps = 0usize;
    for r in 0..budget.restarts.max(1) {
        let mut rng = DetRng::substream(seed, 1000 + r as u64);
        let mut pa: Vec<usize> = if r == 0 {
            (0..n).collect()
        } else {
            rng.permutation(n)
        };
        let mut pb: Vec<usize> = if r == 0 {
            (0..m).collect()
        } else {
            rng.permutation(m)
        };
        let mut plan = northwest_vertex(wa, wb, &pa, &pb).flat().to_vec();
        let mut energy = plan_value(cells, &plan, functional);
        take_if_better(&mut best, energy, &plan);
        let t0 = (0.5 * energy).max(1e-4);
        let steps = budget.iter_cap.max(1);
        for k in 0..steps {
            total_steps += 1;
            let temp = (t0 * libm::pow(0.97, k as f64)).max(1e-12);
            let side_a = rng.below(2) == 0;
            let len = if side_a { n } else { m };
            if len < 2 {
                continue;
            }
            let i = rng.below(len as u64) as usize;
            let mut j = rng.below(len as u64) as usize;
            if j == i {
                j = (j + 1) % len;
            }
            if side_a {
                pa.swap(i, j);
            } else {
                pb.swap(i, j);
            }
            let cand = northwest_vertex(wa, wb, &pa, &pb).flat().to_vec();
            let cand_energy = plan_value(cells, &cand, functional);
            let de = cand_energy - energy;
            let accept = de <= 0.0 || rng.uniform() < libm::exp(-de / temp);
            if accept {
                plan = cand;
                energy = cand_energy;
                take_if_better(&mut best, energy, &plan);
            } else if side_a {
                pa.swap(i, j);
            } else {
                pb.swap(i, j);
            }
        }
        let _ = plan;
    }
    (best.1, total_steps)
}

// ---------------------------------------------------------------------------
// Lattice scan over the free coupling coordinates
// ---------------------------------------------------------------------------

/// Exhaustive lattice scan: supported when the transportation polytope has
/// at most two free coordinates ((n−1)(m−1) ≤ 2). A coarse pass at the
/// budget's grid step is refined twice around the incumbent, reaching a
/// resolution of max(1e-6, step/2500).
pub(crate) fn grid_metric(
    cells: &Cells,
    wa: &[f64],
    wb: &[f64],
    functional: Functional,
    budget: &Budget,
) -> Result<(Vec<f64>, usize), SolveError> {
    let (n, m) = (cells.n, cells.m);
    let d = (n - 1) * (m - 1);
    if d > 2 {
        return Err(SolveError::TooLargeForExact { n, m, cap: 2 });
    }
    let free: Vec<(usize, usize)> = (0..n - 1)
        .flat_map(|i| (0..m - 1).map(move |j| (i, j)))
        .collect();
    let ub: Vec<f64> = free.iter().map(|&(i, j)| wa[i].min(wb[j])).collect();

    let complete = |xfree: &[f64]| -> Option<Vec<f64>> {
        let mut plan = vec![0.0; n * m];
        for (k, &(i, j)) in free.iter().enumerate() {
            plan[i * m + j] = xfree[k];
        }
        for i in 0..n - 1 {
            let partial: f64 = (0..m - 1).map(|j| plan[i * m + j]).sum();
            let rest = wa[i] - partial;
            if rest < -1e-12 {
                return None;
            }
            plan[i * m + (m - 1)] = rest.max(0.0);
        }
        for j in 0..m {
            let partial: f64 = (0..n - 1).map(|i| plan[i * m + j]).sum();
            let rest = wb[j] - partial;
            if rest < -1e-12 {
                return None;
            }
            plan[(n - 1) * m + j] = rest.max(0.0);
        }
        Some(plan)
    };

    let mut evals = 0usize;
    let mut best = (f64::INFINITY, Vec::new());
    let scan = |centers: &[f64], half: &[f64], step: f64, best: &mut (f64, Vec<f64>),
                evals: &mut usize| {
        // Per-dimension candidate coordinates.
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let lo = (centers[k] - half[k]).max(0.0);
                let hi = (centers[k] + half[k]).min(ub[k]);
                let count = libm::ceil((hi - lo) / step) as usize;
                let mut axis: Vec<f64> = (0..=count).map(|t| (lo + t as f64 * step).min(hi)).collect();
                axis.dedup();
                axis
            })
            .collect();
        let mut idx = vec![0usize; d];
        loop {
            let x: Vec<f64> = (0..d).map(|k| axes[k][idx[k]]).collect();
            if let Some(plan) = complete(&x) {
                *evals += 1;
                let v = plan_value(cells, &plan, functional);
                take_if_better(best, v, &plan);
            }
            // Odometer.
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    };

    if d == 0 {
        let plan = complete(&[]).expect("trivial polytope");
        return Ok((plan, 1));
    }

    // Coarse pass over the whole box (step widened in two dimensions to
    // keep the pass bounded), then two refinements around the incumbent.
    let coarse_step = if d == 2 {
        budget
            .grid_step
            .max(ub.iter().cloned().fold(0.0f64, f64::max) / 300.0)
    } else {
        budget.grid_step
    };
    let centers: Vec<f64> = ub.iter().map(|u| u / 2.0).collect();
    let half: Vec<f64> = ub.iter().map(|u| u / 2.0).collect();
    scan(&centers, &half, coarse_step, &mut best, &mut evals);

    let step2 = coarse_step / 50.0;
    let best1: Vec<f64> = free
        .iter()
        .map(|&(i, j)| best.1[i * m + j])
        .collect();
    scan(
        &best1,
        &vec![coarse_step; d],
        step2,
        &mut best,
        &mut evals,
    );

    let step3 = (step2 / 50.0).max(1e-6);
    let best2: Vec<f64> = free
        .iter()
        .map(|&(i, j)| best.1[i * m + j])
        .collect();
    scan(&best2, &vec![step2; d], step3, &mut best, &mut evals);

    Ok((best.1, evals))
}
