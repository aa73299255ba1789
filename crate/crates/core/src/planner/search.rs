use std::cmp::Ordering;

use super::{JointPath, JointPathEntry, Node, PlanGraph};
use crate::num::Real;

/// Single-pass relaxation in vertex-id (layer) order.
struct Relaxed<T> {
    dist: Vec<Option<T>>,
    /// Edge used to enter each vertex; `None` for a source.
    pred: Vec<Option<usize>>,
}

impl<T: Real> Relaxed<T> {
    fn sequence(&self, g: &PlanGraph<T>, mut v: usize) -> Vec<usize> {
        let mut seq = vec![v];
        while let Some(e) = self.pred[v] {
            match g.edges()[e].from {
                Node::Vertex(u) => {
                    seq.push(u);
                    v = u;
                }
                _ => break,
            }
        }
        seq.reverse();
        seq
    }

    /// Orders two ways of arriving somewhere: by weight, then by the vertex
    /// sequence leading there. `None` stands for arriving directly from a source.
    fn compare(&self, g: &PlanGraph<T>, a: (T, Option<usize>), b: (T, Option<usize>)) -> Ordering {
        match a.0.partial_cmp(&b.0) {
            Some(Ordering::Equal) | None => {
                let sa = a.1.map(|u| self.sequence(g, u)).unwrap_or_default();
                let sb = b.1.map(|u| self.sequence(g, u)).unwrap_or_default();
                sa.cmp(&sb)
            }
            Some(o) => o,
        }
    }

    fn run(g: &PlanGraph<T>, sources: &[(usize, T)]) -> Self {
        let n = g.vertices().len();
        let mut r = Self { dist: vec![None; n], pred: vec![None; n] };
        let mut init: Vec<Option<T>> = vec![None; n];
        for &(v, w) in sources {
            init[v] = Some(match init[v] {
                Some(x) if x <= w => x,
                _ => w,
            });
        }
        for v in 0..n {
            let mut best: Option<(T, Option<usize>, Option<usize>)> = init[v].map(|w| (w, None, None));
            for &e in g.incoming(v) {
                let edge = &g.edges()[e];
                let Node::Vertex(u) = edge.from else { continue };
                let Some(du) = r.dist[u] else { continue };
                let cand = du + edge.weight;
                let better = match best {
                    None => true,
                    Some((bw, bu, _)) => r.compare(g, (cand, Some(u)), (bw, bu)) == Ordering::Less,
                };
                if better {
                    best = Some((cand, Some(u), Some(e)));
                }
            }
            if let Some((w, _, e)) = best {
                r.dist[v] = Some(w);
                r.pred[v] = e;
            }
        }
        r
    }

    /// Best exit among `(vertex, exit weight)` pairs.
    fn finish(&self, g: &PlanGraph<T>, exits: &[(usize, T)]) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for &(u, w) in exits {
            let Some(du) = self.dist[u] else { continue };
            let cand = du + w;
            let better = match best {
                None => true,
                Some((bu, bw)) => self.compare(g, (cand, Some(u)), (bw, Some(bu))) == Ordering::Less,
            };
            if better {
                best = Some((u, cand));
            }
        }
        best
    }

    fn extract(&self, g: &PlanGraph<T>, last: usize, total: T) -> JointPath<T> {
        let seq = self.sequence(g, last);
        let mut cost = T::zero();
        let mut v = last;
        let mut edge_costs = Vec::new();
        while let Some(e) = self.pred[v] {
            let edge = &g.edges()[e];
            let Node::Vertex(u) = edge.from else { break };
            edge_costs.push(edge.cost);
            v = u;
        }
        for c in edge_costs.into_iter().rev() {
            cost = cost + c;
        }
        let dl = g.dlambda();
        let mut entries: Vec<JointPathEntry<T>> = Vec::with_capacity(seq.len());
        for &id in &seq {
            let vx = &g.vertices()[id];
            let q = match entries.last() {
                Some(prev) if !g.unwrapped() => {
                    let pv = &g.vertices()[seq[entries.len() - 1]];
                    let d = g.joint_delta(&pv.q, &vx.q);
                    prev.q.iter().zip(d).map(|(&a, b)| a + b).collect()
                }
                _ => vx.q.clone(),
            };
            entries.push(JointPathEntry {
                k: vx.k,
                lambda: T::lit(vx.k as f64) * dl,
                solution: vx.solution,
                q,
                det_j: vx.det_j,
            });
        }
        let rms = (cost / g.length()).sqrt();
        JointPath { entries, cost, total_weight: total, rms }
    }
}

/// Minimum-weight start-to-finish path, or `None` when the finish is
/// unreachable. Ties go to the lexicographically smallest vertex sequence.
pub fn shortest_joint_path<T: Real>(graph: &PlanGraph<T>) -> Option<JointPath<T>> {
    let edges = graph.edges();
    let sources: Vec<(usize, T)> = graph
        .start_edges()
        .iter()
        .filter_map(|&e| match edges[e].to {
            Node::Vertex(v) => Some((v, edges[e].weight)),
            _ => None,
        })
        .collect();
    let exits: Vec<(usize, T)> = graph
        .finish_edges()
        .iter()
        .filter_map(|&e| match edges[e].from {
            Node::Vertex(u) => Some((u, edges[e].weight)),
            _ => None,
        })
        .collect();
    let r = Relaxed::run(graph, &sources);
    let (last, total) = r.finish(graph, &exits)?;
    Some(r.extract(graph, last, total))
}

/// Minimum-weight path from any of `sources` to any of `targets`, using
/// interior edges only. Sources enter with their vertex penalty.
pub fn shortest_path_between<T: Real>(
    graph: &PlanGraph<T>,
    sources: &[usize],
    targets: &[usize],
) -> Option<JointPath<T>> {
    let init: Vec<(usize, T)> = sources.iter().map(|&v| (v, graph.vertices()[v].penalty)).collect();
    let exits: Vec<(usize, T)> = targets.iter().map(|&v| (v, T::zero())).collect();
    let r = Relaxed::run(graph, &init);
    let (last, total) = r.finish(graph, &exits)?;
    Some(r.extract(graph, last, total))
}

/// Metric cost recomputed from path entries (unwrapped joint values).
pub fn path_cost<T: Real>(entries: &[JointPathEntry<T>], dlambda: T) -> T {
    entries
        .windows(2)
        .map(|w| {
            let span = T::lit((w[1].k - w[0].k) as f64) * dlambda;
            w[0].q.iter().zip(&w[1].q).map(|(&a, &b)| (b - a) * (b - a)).sum::<T>() / span
        })
        .fold(T::zero(), |acc, c| acc + c)
}
