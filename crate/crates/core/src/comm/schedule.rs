//! Communication graph and its edge-coloring schedule.

use std::fmt::Write;

use crate::graph::Graph;
use crate::partition::NodeClassification;

const NONE: usize = usize::MAX;

/// Workers as vertices; an edge wherever two workers must exchange data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    graph: Graph,
}

impl CommGraph {
    /// Edge `(p, q)` iff `p` and `q` share a node or one supplies external
    /// node temperatures to the other.
    pub fn from_classification(c: &NodeClassification) -> Self {
        let k = c.parts.len();
        let edges = (0..k).flat_map(|p| c.neighbors(p).into_iter().map(move |q| (p, q)));
        CommGraph { graph: Graph::from_edges(k, edges) }
    }

    pub fn from_edges(workers: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        CommGraph { graph: Graph::from_edges(workers, edges) }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

/// Ordered stages of disjoint worker pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommSchedule {
    workers: usize,
    stages: Vec<Vec<(usize, usize)>>,
}

impl CommSchedule {
    pub fn stages(&self) -> &[Vec<(usize, usize)>] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Partner of `worker` in `stage`, if it is paired there.
    pub fn partner(&self, worker: usize, stage: usize) -> Option<usize> {
        self.stages[stage].iter().find_map(|&(a, b)| {
            if a == worker {
                Some(b)
            } else if b == worker {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Schedule covering every pair of `workers`.
    pub fn complete(workers: usize) -> Self {
        let edges = (0..workers).flat_map(|a| ((a + 1)..workers).map(move |b| (a, b)));
        edge_color_schedule(&Graph::from_edges(workers, edges))
    }

    /// Checks that stages are matchings covering each edge of `graph`
    /// exactly once, within `Δ + 1` stages.
    pub fn validate(&self, graph: &Graph) -> Result<(), String> {
        let mut seen = Vec::new();
        for (s, stage) in self.stages.iter().enumerate() {
            let mut busy = vec![false; self.workers];
            for &(a, b) in stage {
                if a >= b {
                    return Err(format!("stage {s}: pair ({a},{b}) not ordered"));
                }
                if std::mem::replace(&mut busy[a], true) || std::mem::replace(&mut busy[b], true) {
                    return Err(format!("stage {s}: a worker appears twice"));
                }
                seen.push((a, b));
            }
        }
        seen.sort_unstable();
        let expected: Vec<(usize, usize)> = graph.edges().collect();
        if seen != expected {
            return Err("scheduled pairs differ from the graph's edges".into());
        }
        if self.stages.len() > graph.max_degree() + 1 {
            return Err(format!("{} stages exceed max degree + 1 = {}", self.stages.len(), graph.max_degree() + 1));
        }
        Ok(())
    }

    /// `stage,workerA,workerB` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,workerA,workerB\n");
        for (s, stage) in self.stages.iter().enumerate() {
            for (a, b) in stage {
                writeln!(out, "{s},{a},{b}").unwrap();
            }
        }
        out
    }
}

/// Colors of each vertex: `at[v][c]` is the neighbor joined to `v` by an
/// edge of color `c`, or `NONE`.
struct Coloring {
    at: Vec<Vec<usize>>,
}

impl Coloring {
    fn new(n: usize, colors: usize) -> Self {
        Coloring { at: vec![vec![NONE; colors]; n] }
    }

    fn free(&self, v: usize, c: usize) -> bool {
        self.at[v][c] == NONE
    }

    fn color_of(&self, u: usize, v: usize) -> Option<usize> {
        self.at[u].iter().position(|&w| w == v)
    }

    fn set(&mut self, u: usize, v: usize, c: usize) {
        self.at[u][c] = v;
        self.at[v][c] = u;
    }

    fn clear(&mut self, u: usize, v: usize) {
        if let Some(c) = self.color_of(u, v) {
            self.at[u][c] = NONE;
            self.at[v][c] = NONE;
        }
    }

    fn into_stages(self) -> Vec<Vec<(usize, usize)>> {
        let colors = self.at.first().map_or(0, Vec::len);
        let mut stages = vec![Vec::new(); colors];
        for (u, row) in self.at.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != NONE && u < v {
                    stages[c].push((u, v));
                }
            }
        }
        stages.retain(|s| !s.is_empty());
        stages
    }
}

/// Greedy coloring in root-first order: the highest-degree vertex (lowest
/// index on ties), then the rest ascending; each uncolored incident edge
/// gets the lowest color free at both ends.
fn greedy(g: &Graph) -> Coloring {
    let n = g.vertex_count();
    let root = (0..n).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))).unwrap_or(0);
    let mut col = Coloring::new(n, 2 * g.max_degree());
    let order = std::iter::once(root).chain((0..n).filter(|&v| v != root));
    for v in order {
        for &u in g.neighbors(v) {
            if col.color_of(v, u).is_some() {
                continue;
            }
            let c = (0..).find(|&c| col.free(v, c) && col.free(u, c)).expect("2Δ colors always suffice greedily");
            col.set(v, u, c);
        }
    }
    col
}

/// Misra-Gries edge coloring with at most `Δ + 1` colors.
fn misra_gries(g: &Graph) -> Coloring {
    let n = g.vertex_count();
    let colors = g.max_degree() + 1;
    let mut col = Coloring::new(n, colors);
    for (x, y) in g.edges() {
        // maximal fan of x starting at y
        let mut fan = vec![y];
        loop {
            let last = *fan.last().unwrap();
            let next = g.neighbors(x).iter().copied().find(|&w| {
                !fan.contains(&w) && col.color_of(x, w).is_some_and(|c| col.free(last, c))
            });
            match next {
                Some(w) => fan.push(w),
                None => break,
            }
        }
        let c = (0..colors).find(|&c| col.free(x, c)).expect("x has a free color");
        let d = (0..colors).find(|&d| col.free(*fan.last().unwrap(), d)).expect("fan end has a free color");
        // invert the cd-path starting at x
        if c != d {
            let mut path = Vec::new();
            let (mut v, mut want) = (x, d);
            while col.at[v][want] != NONE {
                let w = col.at[v][want];
                path.push((v, w, want));
                v = w;
                want = if want == d { c } else { d };
            }
            for &(a, b, _) in &path {
                col.clear(a, b);
            }
            for &(a, b, k) in &path {
                col.set(a, b, if k == d { c } else { d });
            }
        }
        // shortest fan prefix that is still a fan and ends where d is free
        let w = (0..fan.len())
            .find(|&i| {
                col.free(fan[i], d)
                    && (1..=i).all(|j| col.color_of(x, fan[j]).is_some_and(|cj| col.free(fan[j - 1], cj)))
            })
            .expect("Misra-Gries guarantees a rotatable fan prefix");
        // rotate the fan prefix
        for i in 0..w {
            let ci = col.color_of(x, fan[i + 1]).expect("fan edges are colored");
            col.clear(x, fan[i + 1]);
            col.set(x, fan[i], ci);
        }
        col.set(x, fan[w], d);
    }
    col
}

/// Stage-ordered schedule from an edge coloring of `g`. The greedy order is
/// tried first; if it needs more than `Δ + 1` colors the Misra-Gries
/// coloring is used instead.
pub fn edge_color_schedule(g: &Graph) -> CommSchedule {
    let n = g.vertex_count();
    let stages = greedy(g).into_stages();
    let stages = if stages.len() <= g.max_degree() + 1 {
        stages
    } else {
        log::debug!("greedy coloring used {} stages, falling back", stages.len());
        misra_gries(g).into_stages()
    };
    let schedule = CommSchedule { workers: n, stages };
    debug_assert!(schedule.validate(g).is_ok());
    schedule
}

/// Misra-Gries coloring alone, for comparison.
pub fn vizing_schedule(g: &Graph) -> CommSchedule {
    CommSchedule { workers: g.vertex_count(), stages: misra_gries(g).into_stages() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge_and_triangle() {
        let g = Graph::from_edges(2, [(0, 1)]);
        assert_eq!(edge_color_schedule(&g).stage_count(), 1);
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        let s = edge_color_schedule(&g);
        assert_eq!(s.stage_count(), 3);
        s.validate(&g).unwrap();
    }

    #[test]
    fn five_worker_sample() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (1, 2), (1, 3), (1, 4), (2, 3)]);
        let s = edge_color_schedule(&g);
        s.validate(&g).unwrap();
        assert_eq!(s.stage_count(), 4);
        assert_eq!(s.stages()[2], vec![(0, 2), (1, 3)]);
        assert_eq!(s.partner(4, 2), None);
        assert_eq!(s.to_csv().lines().count(), 7);
    }

    #[test]
    fn misra_gries_is_valid_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let n = rng.gen_range(1..20);
            let m = rng.gen_range(0..3 * n);
            let g = Graph::from_edges(n, (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))));
            vizing_schedule(&g).validate(&g).unwrap();
        }
    }

    #[test]
    fn complete_schedule_pairs_everyone() {
        for w in 1..9 {
            let s = CommSchedule::complete(w);
            for a in 0..w {
                let partners: Vec<usize> = (0..s.stage_count()).filter_map(|st| s.partner(a, st)).collect();
                assert_eq!(partners.len(), w - 1);
            }
        }
    }
}
