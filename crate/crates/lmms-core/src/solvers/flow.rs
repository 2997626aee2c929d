//! Transportation-polytope subroutines shared by the solvers: bounded
//! feasibility via augmenting paths, and linear direction finding (minimum
//! cost plans) via successive shortest paths.
//!
//! All graphs here are tiny (two layers plus source and sink), so the
//! implementations favour clarity and determinism over asymptotics: plain
//! breadth-first augmentation and Bellman–Ford shortest paths, with fixed
//! iteration orders so identical inputs always produce identical plans.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Residual capacity below this is treated as zero.
const RESIDUAL_EPS: f64 = 1e-15;

struct Edge {
    to: usize,
    cap: f64,
    flow: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds a directed edge and its zero-capacity reverse; returns the
    /// forward edge id (reverse is id ^ 1).
    fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, flow: 0.0 });
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            flow: 0.0,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn residual(&self, id: usize) -> f64 {
        self.edges[id].cap - self.edges[id].flow
    }

    /// Edmonds–Karp maximum flow. The augmentation count is bounded by the
    /// number of nodes times edges regardless of capacities being
    /// non-integral, so real-valued weights are safe here.
    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = VecDeque::new();
            queue.push_back(s);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &id in &self.adj[u] {
                    let v = self.edges[id].to;
                    if !seen[v] && self.residual(id) > RESIDUAL_EPS {
                        seen[v] = true;
                        parent[v] = Some(id);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            // Bottleneck along the path, then push.
            let mut bottleneck = f64::INFINITY;
            let mut v = t;
            while v != s {
                let id = parent[v].expect("path edge");
                bottleneck = bottleneck.min(self.residual(id));
                v = self.edges[id ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let id = parent[v].expect("path edge");
                self.edges[id].flow += bottleneck;
                self.edges[id ^ 1].flow -= bottleneck;
                v = self.edges[id ^ 1].to;
            }
            total += bottleneck;
        }
    }
}

/// Feasible transportation plan with per-cell bounds `lo[i*m+j] <= x <=
/// hi[i*m+j]` (upper bounds may be infinite), or `None` when the bounds cut
/// the polytope to nothing. The returned plan is row-major and satisfies the
/// marginals up to flow tolerance.
pub fn bounded_plan(wa: &[f64], wb: &[f64], lo: &[f64], hi: &[f64]) -> Option<Vec<f64>> {
    let (n, m) = (wa.len(), wb.len());
    debug_assert_eq!(lo.len(), n * m);
    debug_assert_eq!(hi.len(), n * m);
    // Shift the lower bounds away: route only the remaining mass.
    let mut need_row = vec![0.0; n];
    let mut need_col = vec![0.0; m];
    for i in 0..n {
        for j in 0..m {
            let l = lo[i * m + j];
            if hi[i * m + j] - l < -1e-12 {
                return None;
            }
            need_row[i] += l;
            need_col[j] += l;
        }
    }
    let mut ra = vec![0.0; n];
    let mut rb = vec![0.0; m];
    for i in 0..n {
        ra[i] = wa[i] - need_row[i];
        if ra[i] < -1e-9 {
            return None;
        }
        ra[i] = ra[i].max(0.0);
    }
    for j in 0..m {
        rb[j] = wb[j] - need_col[j];
        if rb[j] < -1e-9 {
            return None;
        }
        rb[j] = rb[j].max(0.0);
    }

    let source = n + m;
    let sink = n + m + 1;
    let mut net = Network::new(n + m + 2);
    let mut row_edges = Vec::with_capacity(n);
    for (i, &r) in ra.iter().enumerate() {
        row_edges.push(net.add_edge(source, i, r));
    }
    for (j, &r) in rb.iter().enumerate() {
        net.add_edge(n + j, sink, r);
    }
    let mut cell_edges = vec![usize::MAX; n * m];
    for i in 0..n {
        for j in 0..m {
            let cap = (hi[i * m + j] - lo[i * m + j]).max(0.0);
            if cap > RESIDUAL_EPS || cap == f64::INFINITY {
                cell_edges[i * m + j] = net.add_edge(i, n + j, cap);
            }
        }
    }
    let _ = row_edges;

    let pushed = net.max_flow(source, sink);
    let demand_a: f64 = ra.iter().sum();
    let demand_b: f64 = rb.iter().sum();
    if pushed < demand_a.max(demand_b) - 1e-9 {
        return None;
    }
    let mut plan = vec![0.0; n * m];
    for e in 0..n * m {
        let y = if cell_edges[e] == usize::MAX {
            0.0
        } else {
            net.edges[cell_edges[e]].flow.max(0.0)
        };
        plan[e] = lo[e] + y;
    }
    Some(plan)
}

/// Minimum-cost transportation plan for a dense cost matrix, by successive
/// shortest augmenting paths with Bellman–Ford distances (costs may be
/// negative; the residual graph of a shortest-path flow has no negative
/// cycles). Interior arcs are uncapacitated, so each augmentation exhausts a
/// supply or a demand and the loop ends after at most n + m rounds in
/// non-degenerate cases; a generous cap plus a greedy completion guards the
/// degenerate ones.
pub fn min_cost_plan(wa: &[f64], wb: &[f64], cost: &[f64]) -> Vec<f64> {
    let (n, m) = (wa.len(), wb.len());
    debug_assert_eq!(cost.len(), n * m);
    let mut x = vec![0.0; n * m];
    let mut supply: Vec<f64> = wa.to_vec();
    let mut demand: Vec<f64> = wb.to_vec();
    let mut rounds = 0usize;
    let cap = 50 * (n + m) + 16;

    while rounds < cap {
        rounds += 1;
        let remaining: f64 = supply.iter().sum();
        if remaining <= 1e-13 {
            break;
        }
        // Multi-source Bellman–Ford over rows (0..n) and columns (n..n+m).
        let nodes = n + m;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut from: Vec<Option<(usize, usize)>> = vec![None; nodes]; // (node, cell)
        for (i, &s) in supply.iter().enumerate() {
            if s > 1e-13 {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..n {
                if dist[i] == f64::INFINITY {
                    continue;
                }
                for j in 0..m {
                    let nd = dist[i] + cost[i * m + j];
                    if nd < dist[n + j] - 1e-15 {
                        dist[n + j] = nd;
                        from[n + j] = Some((i, i * m + j));
                        changed = true;
                    }
                }
            }
            for j in 0..m {
                if dist[n + j] == f64::INFINITY {
                    continue;
                }
                for i in 0..n {
                    if x[i * m + j] > 1e-13 {
                        let nd = dist[n + j] - cost[i * m + j];
                        if nd < dist[i] - 1e-15 {
                            dist[i] = nd;
                            from[i] = Some((n + j, i * m + j));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // Cheapest reachable column with remaining demand.
        let mut target = None;
        for (j, &d) in demand.iter().enumerate() {
            if d > 1e-13
                && dist[n + j] < f64::INFINITY
                && target.is_none_or(|t: usize| dist[n + j] < dist[n + t])
            {
                target = Some(j);
            }
        }
        let Some(j_star) = target else { break };
        // Trace back to a source row, collecting the bottleneck.
        let mut path: Vec<(bool, usize)> = Vec::new(); // (forward?, cell)
        let mut node = n + j_star;
        let mut bottleneck = demand[j_star];
        while let Some((prev, cell)) = from[node] {
            let forward = prev < n;
            if !forward {
                bottleneck = bottleneck.min(x[cell]);
            }
            path.push((forward, cell));
            node = prev;
        }
        bottleneck = bottleneck.min(supply[node]);
        if bottleneck <= 1e-15 {
            break;
        }
        for &(forward, cell) in &path {
            if forward {
                x[cell] += bottleneck;
            } else {
                x[cell] -= bottleneck;
            }
        }
        supply[node] -= bottleneck;
        demand[j_star] -= bottleneck;
    }

    // Greedy completion of any residual mass (degenerate float leftovers):
    // cheapest cells first in a fixed order.
    let leftover: f64 = supply.iter().sum();
    if leftover > 1e-13 {
        let mut order: Vec<usize> = (0..n * m).collect();
        order.sort_by(|&e, &f| cost[e].total_cmp(&cost[f]).then(e.cmp(&f)));
        for e in order {
            let (i, j) = (e / m, e % m);
            let v = supply[i].min(demand[j]);
            if v > 0.0 {
                x[e] += v;
                supply[i] -= v;
                demand[j] -= v;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_plan_with_free_bounds_matches_marginals() {
        let wa = [0.5, 0.3, 0.2];
        let wb = [0.4, 0.6];
        let lo = vec![0.0; 6];
        let hi = vec![f64::INFINITY; 6];
        let plan = bounded_plan(&wa, &wb, &lo, &hi).expect("feasible");
        for i in 0..3 {
            let s: f64 = (0..2).map(|j| plan[i * 2 + j]).sum();
            assert!((s - wa[i]).abs() < 1e-9);
        }
        for j in 0..2 {
            let s: f64 = (0..3).map(|i| plan[i * 2 + j]).sum();
            assert!((s - wb[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn bounded_plan_detects_infeasible_box() {
        // Forcing both diagonal cells to at least 0.4 overshoots row sums.
        let wa = [0.5, 0.5];
        let wb = [0.5, 0.5];
        let lo = vec![0.4, 0.2, 0.2, 0.4];
        let hi = vec![f64::INFINITY; 4];
        assert!(bounded_plan(&wa, &wb, &lo, &hi).is_none());
    }

    #[test]
    fn bounded_plan_respects_upper_bounds() {
        let wa = [0.5, 0.5];
        let wb = [0.5, 0.5];
        let lo = vec![0.0; 4];
        // Diagonal forbidden: the only plan is the anti-diagonal.
        let hi = vec![0.0, f64::INFINITY, f64::INFINITY, 0.0];
        let plan = bounded_plan(&wa, &wb, &lo, &hi).expect("feasible");
        assert!((plan[1] - 0.5).abs() < 1e-9);
        assert!((plan[2] - 0.5).abs() < 1e-9);
        assert!(plan[0].abs() < 1e-12 && plan[3].abs() < 1e-12);
    }

    #[test]
    fn min_cost_plan_picks_cheap_cells() {
        let wa = [0.5, 0.5];
        let wb = [0.5, 0.5];
        // Diagonal cheap.
        let cost = vec![0.0, 1.0, 1.0, 0.0];
        let plan = min_cost_plan(&wa, &wb, &cost);
        assert!((plan[0] - 0.5).abs() < 1e-9);
        assert!((plan[3] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn min_cost_plan_handles_negative_costs() {
        let wa = [0.6, 0.4];
        let wb = [0.3, 0.7];
        let cost = vec![-2.0, 0.0, 1.0, -1.0];
        let plan = min_cost_plan(&wa, &wb, &cost);
        // Optimal: x00 = 0.3 (cost -2), x01 = 0.3, x11 = 0.4.
        let value: f64 = plan.iter().zip(&cost).map(|(x, c)| x * c).sum();
        assert!((value - (-0.3 * 2.0 - 0.4)).abs() < 1e-9, "value {value}");
        for i in 0..2 {
            let s: f64 = (0..2).map(|j| plan[i * 2 + j]).sum();
            assert!((s - wa[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn min_cost_plan_agrees_with_vertex_enumeration_on_random_instances() {
        use crate::coupling::northwest_vertex;
        let mut rng = crate::rng::DetRng::new(99);
        let perms3 = [
            [0usize, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for _ in 0..40 {
            let mut wa = [0.0; 3];
            let mut wb = [0.0; 3];
            for v in wa.iter_mut().chain(wb.iter_mut()) {
                *v = rng.uniform() + 0.05;
            }
            let sa: f64 = wa.iter().sum();
            let sb: f64 = wb.iter().sum();
            wa.iter_mut().for_each(|v| *v /= sa);
            wb.iter_mut().for_each(|v| *v /= sb);
            let cost: Vec<f64> = (0..9).map(|_| rng.range(-1.0, 1.0)).collect();
            let lp: f64 = min_cost_plan(&wa, &wb, &cost)
                .iter()
                .zip(&cost)
                .map(|(x, c)| x * c)
                .sum();
            // The linear minimum over the polytope is attained at a vertex,
            // and every vertex is a north-west solution for some orders.
            let mut best = f64::INFINITY;
            for pa in &perms3 {
                for pb in &perms3 {
                    let v = northwest_vertex(&wa, &wb, pa, pb);
                    let val: f64 = v.flat().iter().zip(&cost).map(|(x, c)| x * c).sum();
                    best = best.min(val);
                }
            }
            assert!(
                (lp - best).abs() < 1e-9,
                "successive shortest paths {lp} vs vertex enumeration {best}"
            );
        }
    }
}
