//! Dinic's maximum flow on real capacities, specialised to the bipartite
//! transport graphs used by the Prokhorov solver.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
struct Arc {
    to: usize,
    rev: usize,
    cap: f64,
}

/// Residual capacities below this fraction of the source capacity are
/// treated as exhausted.
const EPS_REL: f64 = 1e-14;

pub struct FlowGraph {
    adj: Vec<Vec<Arc>>,
    eps: f64,
}

impl FlowGraph {
    pub fn new(n: usize) -> Self {
        FlowGraph { adj: vec![Vec::new(); n], eps: 0.0 }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let rf = self.adj[to].len();
        let rt = self.adj[from].len() + usize::from(from == to);
        self.adj[from].push(Arc { to, rev: rf, cap });
        self.adj[to].push(Arc { to: from, rev: rt, cap: 0.0 });
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.adj.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for e in &self.adj[v] {
                if e.cap > self.eps && level[e.to] == u32::MAX {
                    level[e.to] = level[v] + 1;
                    q.push_back(e.to);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    /// Iterative blocking-flow augmentation along the level graph.
    fn augment(&mut self, s: usize, t: usize, level: &[u32], it: &mut [usize]) -> f64 {
        let mut total = 0.0;
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let push = path.iter().map(|&(u, k)| self.adj[u][k].cap).fold(f64::INFINITY, f64::min);
                for &(u, k) in &path {
                    let Arc { to, rev, .. } = self.adj[u][k];
                    self.adj[u][k].cap -= push;
                    self.adj[to][rev].cap += push;
                }
                total += push;
                path.clear();
                v = s;
                continue;
            }
            let mut advanced = false;
            while it[v] < self.adj[v].len() {
                let e = self.adj[v][it[v]];
                if e.cap > self.eps && level[e.to] == level[v] + 1 {
                    path.push((v, it[v]));
                    v = e.to;
                    advanced = true;
                    break;
                }
                it[v] += 1;
            }
            if !advanced {
                if v == s {
                    return total;
                }
                let (u, _) = path.pop().unwrap();
                it[u] += 1;
                v = u;
            }
        }
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let scale: f64 = self.adj[s].iter().map(|e| e.cap).sum();
        self.eps = EPS_REL * scale.max(f64::MIN_POSITIVE);
        let mut total = 0.0;
        while let Some(level) = self.levels(s, t) {
            let mut it = vec![0; self.adj.len()];
            total += self.augment(s, t, &level, &mut it);
        }
        total
    }
}

/// Maximum transport from supplies `a` to demands `b` along the admissible
/// pairs `(i, j)`.
pub fn bipartite_max_flow(a: &[f64], b: &[f64], pairs: impl Iterator<Item = (usize, usize)>) -> f64 {
    let (n, m) = (a.len(), b.len());
    let (s, t) = (n + m, n + m + 1);
    let mut g = FlowGraph::new(n + m + 2);
    for (i, &w) in a.iter().enumerate() {
        g.add_edge(s, i, w);
    }
    for (j, &w) in b.iter().enumerate() {
        g.add_edge(n + j, t, w);
    }
    for (i, j) in pairs {
        g.add_edge(i, n + j, f64::INFINITY);
    }
    g.max_flow(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_networks() {
        // classic example with a cross edge
        let mut g = FlowGraph::new(4);
        g.add_edge(0, 1, 3.0);
        g.add_edge(0, 2, 2.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(1, 3, 2.0);
        g.add_edge(2, 3, 3.0);
        assert!((g.max_flow(0, 3) - 5.0).abs() < 1e-12);

        let f = bipartite_max_flow(&[0.5, 0.5], &[0.7, 0.3], [(0, 0), (1, 0)].into_iter());
        assert!((f - 0.7).abs() < 1e-12);
        let f = bipartite_max_flow(&[1.0], &[1.0], std::iter::empty());
        assert_eq!(f, 0.0);
    }

    #[test]
    fn matches_hall_deficiency_on_random_graphs() {
        use crate::rng::PathRng;
        let mut rng = PathRng::new(11, 0);
        for _ in 0..200 {
            let n = 1 + (rng.uniform() * 5.0) as usize;
            let m = 1 + (rng.uniform() * 5.0) as usize;
            let a: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.01).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.uniform() + 0.01).collect();
            let adj: Vec<Vec<bool>> = (0..n).map(|_| (0..m).map(|_| rng.uniform() < 0.4).collect()).collect();
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|&(i, j)| adj[i][j]).collect();
            let f = bipartite_max_flow(&a, &b, pairs.into_iter());
            // max flow = |a| - max over subsets S of (a(S) - b(N(S)))
            let mut deficiency: f64 = 0.0;
            for mask in 0u32..(1 << n) {
                let sa: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).sum();
                let nb: f64 =
                    (0..m).filter(|&j| (0..n).any(|i| mask >> i & 1 == 1 && adj[i][j])).map(|j| b[j]).sum();
                deficiency = deficiency.max(sa - nb);
            }
            let total: f64 = a.iter().sum();
            assert!((f - (total - deficiency)).abs() < 1e-12, "{f} vs {}", total - deficiency);
        }
    }
}
