//! Shortest-path centralities on the hop-count topology (edge iff `w > 0`).

use std::collections::VecDeque;

use super::Graph;
use crate::scalar::Real;

/// Unnormalized betweenness (Brandes). Each unordered pair `{s, t}` counts
/// once, so the middle of a 3-node path scores 1.
pub fn betweenness_centrality<T: Real>(g: &Graph<T>) -> Vec<T> {
    let n = g.node_count();
    let mut score = vec![0.0f64; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        order.clear();
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    score.into_iter().map(|b| T::of(b / 2.0)).collect()
}

/// Closeness: reachable-peer count over summed hop distance, computed within
/// each node's component. Nodes with no reachable peers score 0.
pub fn closeness_centrality<T: Real>(g: &Graph<T>) -> Vec<T> {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    (0..n)
        .map(|s| {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.push_back(s);
            let (mut reached, mut total) = (0usize, 0usize);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in g.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        reached += 1;
                        total += dist[w];
                        queue.push_back(w);
                    }
                }
            }
            if reached == 0 {
                T::zero()
            } else {
                T::of(reached as f64 / total as f64)
            }
        })
        .collect()
}
