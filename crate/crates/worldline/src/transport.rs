//! Bipartite transport kernels: feasibility by max-flow and deterministic
//! coupling selection by min-cost flow.
//!
//! Feasibility of moving one unit of mass from sources to targets along a
//! prescribed set of admissible pairs is decided by Edmonds–Karp max-flow.
//! With rational capacities this is exact; when the flow falls short, the
//! residual cut yields a Hall-type certificate: a set of sources whose mass
//! exceeds the total mass of every target they can reach.
//!
//! Coupling selection runs successive shortest paths with a fixed edge
//! order, so results are deterministic; path costs are floats while flow
//! amounts stay in the caller's arithmetic (exact rationals by default).

// The solvers address several parallel arrays through shared node indices;
// index loops read better than zipped iterators here.
#![allow(clippy::needless_range_loop)]

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arithmetic the flow solvers run in: exact rationals or floats.
pub trait FlowNum: Clone + PartialOrd {
    fn zero() -> Self;
    /// Enough mass to be worth routing (guards float underflow loops).
    fn is_routable(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn sub_assign(&mut self, other: &Self);
    fn as_f64(&self) -> f64;
}

impl FlowNum for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_routable(&self) -> bool {
        self.is_positive()
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= other;
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl FlowNum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_routable(&self) -> bool {
        *self > 1e-15
    }
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    fn sub_assign(&mut self, other: &Self) {
        *self -= *other;
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

fn min3<W: FlowNum>(a: &W, b: &W) -> W {
    if a < b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Sparse transport plan: `(source, target, mass)` triples with positive mass,
/// sorted lexicographically.
pub type Plan<W> = Vec<(usize, usize, W)>;

/// Outcome of the feasibility solve.
#[derive(Debug, Clone)]
pub enum Feasibility<W> {
    /// A full-mass plan exists (returned so callers can reuse it).
    Feasible(Plan<W>),
    /// Hall-type obstruction: `sources` jointly carry `deficit` more mass
    /// than everything they can reach.
    Infeasible { sources: Vec<usize>, deficit: W },
}

impl<W> Feasibility<W> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

struct FlowState<W> {
    m: usize,
    n: usize,
    source_cap: Vec<W>,
    target_cap: Vec<W>,
    /// Flow on admissible arcs, dense `m × n` (desk scale).
    flow: Vec<W>,
    allowed: Vec<bool>,
}

impl<W: FlowNum> FlowState<W> {
    fn new(mu: &[W], nu: &[W], allowed: impl Fn(usize, usize) -> bool) -> Self {
        let (m, n) = (mu.len(), nu.len());
        let mut mask = vec![false; m * n];
        for i in 0..m {
            for j in 0..n {
                mask[i * n + j] = allowed(i, j);
            }
        }
        FlowState {
            m,
            n,
            source_cap: mu.to_vec(),
            target_cap: nu.to_vec(),
            flow: vec![W::zero(); m * n],
            allowed: mask,
        }
    }

    fn plan(&self) -> Plan<W> {
        let mut plan = Vec::new();
        for i in 0..self.m {
            for j in 0..self.n {
                let f = &self.flow[i * self.n + j];
                if f.is_routable() {
                    plan.push((i, j, f.clone()));
                }
            }
        }
        plan
    }

    /// BFS augmentation (Edmonds–Karp). Returns false when no augmenting
    /// path remains.
    fn augment_once(&mut self) -> bool {
        let (m, n) = (self.m, self.n);
        // prev[node]: predecessor encoding; nodes are sources 0..m and
        // targets m..m+n.
        let mut prev = vec![usize::MAX; m + n];
        let mut queue: std::collections::VecDeque<usize> = (0..m)
            .filter(|&i| self.source_cap[i].is_routable())
            .collect();
        let roots: Vec<usize> = queue.iter().copied().collect();
        let mut seen = vec![false; m + n];
        for &i in &roots {
            seen[i] = true;
        }
        let mut reached_target = usize::MAX;
        'bfs: while let Some(node) = queue.pop_front() {
            if node < m {
                for j in 0..n {
                    if self.allowed[node * n + j] && !seen[m + j] {
                        seen[m + j] = true;
                        prev[m + j] = node;
                        if self.target_cap[j].is_routable() {
                            reached_target = j;
                            break 'bfs;
                        }
                        queue.push_back(m + j);
                    }
                }
            } else {
                let j = node - m;
                for i in 0..m {
                    if self.flow[i * n + j].is_routable() && !seen[i] {
                        seen[i] = true;
                        prev[i] = node;
                        queue.push_back(i);
                    }
                }
            }
        }
        if reached_target == usize::MAX {
            return false;
        }
        // Walk back to a root, collecting the path and its bottleneck.
        let mut path = vec![m + reached_target];
        let mut node = m + reached_target;
        while prev[node] != usize::MAX {
            node = prev[node];
            path.push(node);
        }
        path.reverse();
        let root = path[0];
        let mut bottleneck = min3(&self.source_cap[root], &self.target_cap[reached_target]);
        for w in path.windows(2) {
            if w[0] >= m {
                // backward arc target→source carries existing flow
                let (j, i) = (w[0] - m, w[1]);
                bottleneck = min3(&bottleneck, &self.flow[i * n + j]);
            }
        }
        self.source_cap[root].sub_assign(&bottleneck);
        self.target_cap[reached_target].sub_assign(&bottleneck);
        for w in path.windows(2) {
            if w[0] < m {
                let (i, j) = (w[0], w[1] - m);
                self.flow[i * n + j].add_assign(&bottleneck);
            } else {
                let (j, i) = (w[0] - m, w[1]);
                self.flow[i * n + j].sub_assign(&bottleneck);
            }
        }
        true
    }

    /// Sources on the cut side of the final residual graph.
    fn residual_sources(&self) -> (Vec<usize>, W) {
        let (m, n) = (self.m, self.n);
        let mut seen = vec![false; m + n];
        let mut queue: std::collections::VecDeque<usize> = (0..m)
            .filter(|&i| self.source_cap[i].is_routable())
            .collect();
        for &i in &queue {
            seen[i] = true;
        }
        while let Some(node) = queue.pop_front() {
            if node < m {
                for j in 0..n {
                    if self.allowed[node * n + j] && !seen[m + j] {
                        seen[m + j] = true;
                        queue.push_back(m + j);
                    }
                }
            } else {
                let j = node - m;
                for i in 0..m {
                    if self.flow[i * n + j].is_routable() && !seen[i] {
                        seen[i] = true;
                        queue.push_back(i);
                    }
                }
            }
        }
        let sources: Vec<usize> = (0..m).filter(|&i| seen[i]).collect();
        let mut deficit = W::zero();
        for &i in &sources {
            deficit.add_assign(&self.source_cap[i]);
        }
        (sources, deficit)
    }
}

/// Decides whether a full-mass plan from `mu` to `nu` exists along the
/// admissible pairs. Exact for rational weights; `f64` weights route with a
/// small positivity floor and the caller applies its own slack to `deficit`.
pub fn transport_feasibility<W: FlowNum>(
    mu: &[W],
    nu: &[W],
    allowed: impl Fn(usize, usize) -> bool,
) -> Feasibility<W> {
    let mut state = FlowState::new(mu, nu, allowed);
    while state.augment_once() {}
    let (sources, deficit) = state.residual_sources();
    if deficit.is_routable() {
        Feasibility::Infeasible { sources, deficit }
    } else {
        Feasibility::Feasible(state.plan())
    }
}

/// Minimum-cost full-mass plan by successive shortest paths.
///
/// Path selection uses Bellman–Ford with a fixed relaxation order and strict
/// improvement, so among equal-cost plans the lexicographically earliest
/// augmenting paths win: the result is a deterministic function of the
/// inputs. Returns the residual-cut sources if the problem is infeasible.
pub fn min_cost_transport<W: FlowNum>(
    mu: &[W],
    nu: &[W],
    allowed: impl Fn(usize, usize) -> bool,
    cost: impl Fn(usize, usize) -> f64,
) -> Result<Plan<W>, (Vec<usize>, W)> {
    let (m, n) = (mu.len(), nu.len());
    let mut state = FlowState::new(mu, nu, allowed);
    let costs: Vec<f64> = (0..m * n).map(|e| cost(e / n, e % n)).collect();
    loop {
        // Shortest augmenting path from the super-source over the residual
        // graph. Node indexing: 0..m sources, m..m+n targets.
        let mut dist = vec![f64::INFINITY; m + n];
        let mut prev = vec![usize::MAX; m + n];
        for i in 0..m {
            if state.source_cap[i].is_routable() {
                dist[i] = 0.0;
            }
        }
        // Improvements must clear a small epsilon: forward/backward arcs of
        // one edge cancel to rounding noise, and accepting noise-level gains
        // would let the predecessor pointers form cycles.
        let improves = |cand: f64, current: f64| cand + 1e-12 * (1.0 + cand.abs()) < current;
        let mut changed = true;
        let mut rounds = 0usize;
        while changed {
            changed = false;
            rounds += 1;
            if rounds > m + n + 2 {
                break; // zero-cost residual cycles are excluded, guard anyway
            }
            for i in 0..m {
                if dist[i].is_finite() {
                    for j in 0..n {
                        if state.allowed[i * n + j] {
                            let cand = dist[i] + costs[i * n + j];
                            if improves(cand, dist[m + j]) {
                                dist[m + j] = cand;
                                prev[m + j] = i;
                                changed = true;
                            }
                        }
                    }
                }
            }
            for j in 0..n {
                if dist[m + j].is_finite() {
                    for i in 0..m {
                        if state.flow[i * n + j].is_routable() {
                            let cand = dist[m + j] - costs[i * n + j];
                            if improves(cand, dist[i]) {
                                dist[i] = cand;
                                prev[i] = m + j;
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        // Cheapest reachable target with remaining capacity.
        let mut best = usize::MAX;
        for j in 0..n {
            if state.target_cap[j].is_routable() && dist[m + j].is_finite()
                && (best == usize::MAX || dist[m + j] < dist[m + best]) {
                    best = j;
                }
        }
        if best == usize::MAX {
            // No augmenting path left: either done or infeasible.
            let (sources, deficit) = state.residual_sources();
            if deficit.is_routable() {
                return Err((sources, deficit));
            }
            return Ok(state.plan());
        }
        // Reconstruct the path back to a root source; simple paths cannot
        // exceed the node count.
        let mut path = vec![m + best];
        let mut node = m + best;
        while prev[node] != usize::MAX {
            node = prev[node];
            path.push(node);
            assert!(path.len() <= m + n + 2, "predecessor cycle in shortest path");
        }
        path.reverse();
        let root = path[0];
        let mut bottleneck = min3(&state.source_cap[root], &state.target_cap[best]);
        for w in path.windows(2) {
            if w[0] >= m {
                let (j, i) = (w[0] - m, w[1]);
                bottleneck = min3(&bottleneck, &state.flow[i * n + j]);
            }
        }
        state.source_cap[root].sub_assign(&bottleneck);
        state.target_cap[best].sub_assign(&bottleneck);
        for w in path.windows(2) {
            if w[0] < m {
                let (i, j) = (w[0], w[1] - m);
                state.flow[i * n + j].add_assign(&bottleneck);
            } else {
                let (j, i) = (w[0] - m, w[1]);
                state.flow[i * n + j].sub_assign(&bottleneck);
            }
        }
    }
}

/// Total cost of a plan under a cost function, in floats.
pub fn plan_cost<W: FlowNum>(plan: &Plan<W>, cost: impl Fn(usize, usize) -> f64) -> f64 {
    plan.iter().map(|(i, j, w)| w.as_f64() * cost(*i, *j)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn halves() -> Vec<BigRational> {
        vec![ratio(1, 2), ratio(1, 2)]
    }

    #[test]
    fn feasible_when_fully_connected() {
        let r = transport_feasibility(&halves(), &halves(), |_, _| true);
        assert!(r.is_feasible());
    }

    #[test]
    fn infeasible_reports_cut_sources() {
        // Source 0 (mass 1/2) can reach only target 0 (mass 1/4).
        let mu = halves();
        let nu = vec![ratio(1, 4), ratio(3, 4)];
        let r = transport_feasibility(&mu, &nu, |i, j| !(i == 0 && j == 1));
        match r {
            Feasibility::Infeasible { sources, deficit } => {
                assert_eq!(sources, vec![0]);
                assert_eq!(deficit, ratio(1, 4));
            }
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn min_cost_prefers_cheap_assignment() {
        let plan = min_cost_transport(&halves(), &halves(), |_, _| true, |i, j| {
            if i == j {
                1.0
            } else {
                5.0
            }
        })
        .unwrap();
        assert_eq!(plan, vec![(0, 0, ratio(1, 2)), (1, 1, ratio(1, 2))]);
    }

    #[test]
    fn min_cost_splits_when_forced() {
        let mu = vec![ratio(3, 4), ratio(1, 4)];
        let nu = vec![ratio(1, 2), ratio(1, 2)];
        let plan = min_cost_transport(&mu, &nu, |_, _| true, |i, j| ((i as f64) - (j as f64)).abs()).unwrap();
        let total: BigRational = plan.iter().map(|(_, _, w)| w.clone()).sum();
        assert_eq!(total, ratio(1, 1));
        // Row and column sums match the marginals.
        let row0: BigRational = plan.iter().filter(|(i, _, _)| *i == 0).map(|(_, _, w)| w.clone()).sum();
        assert_eq!(row0, ratio(3, 4));
        let col0: BigRational = plan.iter().filter(|(_, j, _)| *j == 0).map(|(_, _, w)| w.clone()).sum();
        assert_eq!(col0, ratio(1, 2));
    }

    #[test]
    fn min_cost_agrees_with_exhaustive_enumeration_on_permutations() {
        // Uniform marginals over 4 atoms: optimal plans are permutation
        // matrices, so brute-force over all 24 permutations is an oracle.
        let w = vec![ratio(1, 4); 4];
        let costs = [
            [3.0, 1.0, 4.0, 1.5],
            [2.0, 6.0, 0.5, 3.0],
            [7.0, 2.5, 1.0, 2.0],
            [4.0, 3.5, 2.0, 0.25],
        ];
        let plan = min_cost_transport(&w, &w, |_, _| true, |i, j| costs[i][j]).unwrap();
        let got = plan_cost(&plan, |i, j| costs[i][j]);

        let mut best = f64::INFINITY;
        let perms = permutations(4);
        for p in perms {
            let c: f64 = (0..4).map(|i| costs[i][p[i]]).sum::<f64>() / 4.0;
            best = best.min(c);
        }
        assert!((got - best).abs() < 1e-12, "got {got}, best {best}");
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q: Vec<usize> = p.iter().map(|&v| if v >= pos { v + 1 } else { v }).collect();
                q.insert(0, pos);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn float_mode_routes_with_slack() {
        let mu = vec![0.5, 0.5];
        let nu = vec![0.5, 0.5 - 1e-12];
        match transport_feasibility(&mu, &nu, |_, _| true) {
            Feasibility::Infeasible { deficit, .. } => assert!(deficit <= 1e-9),
            Feasibility::Feasible(_) => {}
        }
    }
}
