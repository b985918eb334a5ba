//! Greedy graph growing followed by boundary refinement.

use crate::graph::Graph;

use super::PartitionError;

pub const DEFAULT_BALANCE_TOL: f64 = 0.05;
const REFINE_PASSES: usize = 20;

fn farthest_unassigned(graph: &Graph, assign: &[usize]) -> Option<usize> {
    let assigned: Vec<usize> = (0..assign.len()).filter(|&v| assign[v] != usize::MAX).collect();
    let sources = if assigned.is_empty() { vec![0] } else { assigned };
    let dist = graph.bfs_distances(sources);
    let mut best: Option<usize> = None;
    for v in 0..assign.len() {
        if assign[v] == usize::MAX && best.is_none_or(|b| dist[v] > dist[b]) {
            best = Some(v);
        }
    }
    best
}

/// Splits the vertices of `graph` into `k` parts of near-equal weight.
///
/// Each part is seeded at the unassigned vertex farthest (in BFS hops) from
/// everything assigned so far (the first from vertex 0) and grown
/// breadth-first, ascending index, until it holds its share of the remaining
/// weight. A boundary-refinement pass then moves vertices that reduce the
/// edge cut, or keep it and improve balance, without exceeding the balance
/// limit. Parts are numbered by their smallest vertex.
pub fn partition_elements(graph: &Graph, weights: &[u32], k: usize, balance_tol: f64) -> Result<Vec<usize>, PartitionError> {
    let n = graph.vertex_count();
    if weights.len() != n {
        return Err(PartitionError::WeightSize { expected: n, got: weights.len() });
    }
    if k == 0 {
        return Err(PartitionError::NoParts);
    }
    let total: u64 = weights.iter().map(|&w| w as u64).sum();
    if (k as u64) > total {
        return Err(PartitionError::TooManyParts { parts: k, elements: total as usize });
    }
    let mut assign = vec![usize::MAX; n];
    let mut part_w = vec![0u64; k];
    let mut queued = vec![usize::MAX; n];
    let mut remaining = total;
    for p in 0..k {
        if p == k - 1 {
            for v in 0..n {
                if assign[v] == usize::MAX {
                    assign[v] = p;
                    part_w[p] += weights[v] as u64;
                }
            }
            break;
        }
        let target = remaining as f64 / (k - p) as f64;
        let mut queue = std::collections::VecDeque::new();
        while (part_w[p] as f64) < target {
            let u = match queue.pop_front() {
                Some(u) => u,
                None => {
                    let seed = farthest_unassigned(graph, &assign).expect("weight remains");
                    queued[seed] = p;
                    seed
                }
            };
            assign[u] = p;
            part_w[p] += weights[u] as u64;
            for &w in graph.neighbors(u) {
                if assign[w] == usize::MAX && queued[w] != p {
                    queued[w] = p;
                    queue.push_back(w);
                }
            }
        }
        remaining -= part_w[p];
    }
    refine(graph, weights, k, balance_tol, total, &mut assign, &mut part_w);
    // canonical numbering by smallest member
    let mut relabel = vec![usize::MAX; k];
    let mut next = 0;
    for p in assign.iter_mut() {
        if relabel[*p] == usize::MAX {
            relabel[*p] = next;
            next += 1;
        }
        *p = relabel[*p];
    }
    Ok(assign)
}

fn refine(graph: &Graph, weights: &[u32], k: usize, tol: f64, total: u64, assign: &mut [usize], part_w: &mut [u64]) {
    let mean = total as f64 / k as f64;
    let max_w = ((mean * (1.0 + tol)).floor() as u64).max(mean.ceil() as u64);
    let mut conn: Vec<(usize, i64)> = Vec::new();
    for _ in 0..REFINE_PASSES {
        let mut moved = 0;
        for v in 0..graph.vertex_count() {
            let p = assign[v];
            let wv = weights[v] as u64;
            conn.clear();
            for &u in graph.neighbors(v) {
                let q = assign[u];
                match conn.iter_mut().find(|c| c.0 == q) {
                    Some(c) => c.1 += 1,
                    None => conn.push((q, 1)),
                }
            }
            let internal = conn.iter().find(|c| c.0 == p).map_or(0, |c| c.1);
            if wv > 0 && part_w[p] <= wv {
                continue;
            }
            let mut best: Option<(i64, u64, usize)> = None;
            for &(q, c) in &conn {
                if q == p || part_w[q] + wv > max_w {
                    continue;
                }
                let gain = c - internal;
                let ok = gain > 0 || (gain == 0 && wv > 0 && part_w[p] > part_w[q] + wv);
                if !ok {
                    continue;
                }
                let key = (gain, part_w[q], q);
                if best.is_none_or(|b| key.0 > b.0 || (key.0 == b.0 && (key.1, key.2) < (b.1, b.2))) {
                    best = Some(key);
                }
            }
            if let Some((_, _, q)) = best {
                assign[v] = q;
                part_w[p] -= wv;
                part_w[q] += wv;
                moved += 1;
            }
        }
        if moved == 0 {
            break;
        }
    }
}
