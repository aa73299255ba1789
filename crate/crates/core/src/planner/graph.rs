use std::ops::Range;

use super::{Infeasibility, Layer, PlannerConfig, TaskPath};
use crate::error::{Error, Result};
use crate::kinematics::{manipulability_of, wrap_angle, RobotModel};
use crate::linalg::Mat;
use crate::num::Real;

/// One IK solution (or, with joint-limit tracking, one of its in-limit
/// 2pi-representatives) at one path sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T> {
    pub k: usize,
    /// Index of the solution within its layer.
    pub solution: usize,
    /// Joint values; unwrapped representatives when limits are tracked.
    pub q: Vec<T>,
    pub det_j: T,
    /// Added to the weight of every edge entering this vertex.
    pub penalty: T,
    pub approximate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Start,
    Vertex(usize),
    Finish,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub from: Node,
    pub to: Node,
    /// Metric part of the weight; zero on start and finish edges.
    pub cost: T,
    pub weight: T,
    /// Number of samples spanned, counting the start and finish as the
    /// virtual samples `-1` and `K + 1`.
    pub depth: usize,
}

/// Layered DAG over per-sample IK solutions with start and finish vertices.
#[derive(Debug, Clone)]
pub struct PlanGraph<T> {
    vertices: Vec<Vertex<T>>,
    layers: Vec<Range<usize>>,
    edges: Vec<Edge<T>>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    start_out: Vec<usize>,
    finish_in: Vec<usize>,
    dlambda: T,
    length: T,
    unwrapped: bool,
}

impl<T: Real> PlanGraph<T> {
    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Vertex ids of layer `k`.
    pub fn layer(&self, k: usize) -> Range<usize> {
        self.layers[k].clone()
    }

    /// Ids of edges entering vertex `v`.
    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    pub fn start_edges(&self) -> &[usize] {
        &self.start_out
    }

    pub fn finish_edges(&self) -> &[usize] {
        &self.finish_in
    }

    pub fn dlambda(&self) -> T {
        self.dlambda
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Whether vertex joint values are unwrapped representatives, compared
    /// without wrapping.
    pub fn unwrapped(&self) -> bool {
        self.unwrapped
    }

    pub(crate) fn joint_delta(&self, a: &[T], b: &[T]) -> Vec<T> {
        a.iter().zip(b).map(|(&x, &y)| if self.unwrapped { y - x } else { wrap_angle(y - x) }).collect()
    }

    /// Vertices reachable from the start vertex.
    pub fn reachable_from_start(&self) -> Vec<bool> {
        let mut seen = vec![false; self.vertices.len()];
        for &e in &self.start_out {
            if let Node::Vertex(v) = self.edges[e].to {
                seen[v] = true;
            }
        }
        for u in 0..self.vertices.len() {
            if seen[u] {
                for &e in &self.outgoing[u] {
                    if let Node::Vertex(v) = self.edges[e].to {
                        seen[v] = true;
                    }
                }
            }
        }
        seen
    }

    /// Vertices from which the finish vertex is reachable.
    pub fn reaching_finish(&self) -> Vec<bool> {
        let mut seen = vec![false; self.vertices.len()];
        for &e in &self.finish_in {
            if let Node::Vertex(u) = self.edges[e].from {
                seen[u] = true;
            }
        }
        for v in (0..self.vertices.len()).rev() {
            if seen[v] {
                for &e in &self.incoming[v] {
                    if let Node::Vertex(u) = self.edges[e].from {
                        seen[u] = true;
                    }
                }
            }
        }
        seen
    }

    pub(crate) fn infeasibility(&self) -> Infeasibility {
        let seen = self.reachable_from_start();
        let reached: Vec<bool> = self.layers.iter().map(|r| r.clone().any(|v| seen[v])).collect();
        Infeasibility {
            last_reached: reached.iter().rposition(|&r| r),
            first_unreached: reached.iter().position(|&r| !r),
        }
    }

    fn push(&mut self, from: Node, to: Node, cost: T, weight: T, depth: usize) {
        let id = self.edges.len();
        self.edges.push(Edge { from, to, cost, weight, depth });
        match from {
            Node::Start => self.start_out.push(id),
            Node::Vertex(u) => self.outgoing[u].push(id),
            Node::Finish => unreachable!("finish has no outgoing edges"),
        }
        match to {
            Node::Finish => self.finish_in.push(id),
            Node::Vertex(v) => self.incoming[v].push(id),
            Node::Start => unreachable!("start has no incoming edges"),
        }
    }

    fn metric(&self, u: usize, v: usize, depth: usize) -> T {
        let d = self.joint_delta(&self.vertices[u].q, &self.vertices[v].q);
        d.iter().map(|&x| x * x).sum::<T>() / (T::lit(depth as f64) * self.dlambda)
    }

    /// Vertices of layer `k + d` reachable from `u` (in layer `k`) through
    /// admitted interior edges.
    fn reach_within(&self, u: usize, last_layer: usize, mark: &mut [bool]) -> Vec<usize> {
        let hi = self.layers[last_layer].end;
        let lo = u;
        for m in &mut mark[lo..hi] {
            *m = false;
        }
        mark[u] = true;
        for w in lo..hi {
            if !mark[w] {
                continue;
            }
            for &e in &self.outgoing[w] {
                if let Node::Vertex(x) = self.edges[e].to {
                    if x < hi {
                        mark[x] = true;
                    }
                }
            }
        }
        self.layers[last_layer].clone().filter(|&x| mark[x]).collect()
    }
}

/// Zero at the middle of each joint range, growing without bound at its ends.
/// Wrapped values are first moved to their representative nearest the middle.
fn barrier<T: Real>(q: &[T], limits: &[(T, T)], unwrapped: bool) -> T {
    q.iter()
        .zip(limits)
        .map(|(&x, &(lo, hi))| {
            let mid = (lo + hi) * T::lit(0.5);
            let half = (hi - lo) * T::lit(0.5);
            let x = if unwrapped { x } else { mid + wrap_angle(x - mid) };
            let u = ((x - lo) * (hi - x)).max(half * half * T::lit(1e-12));
            half * half / u - T::one()
        })
        .sum()
}

/// All 2pi-shifts of `q` inside `limits`, in lexicographic order of shifts.
fn representatives<T: Real>(q: &[T], limits: &[(T, T)]) -> Vec<Vec<T>> {
    let two_pi = T::PI() + T::PI();
    let per_joint: Vec<Vec<T>> = q
        .iter()
        .zip(limits)
        .map(|(&x, &(lo, hi))| {
            let first = ((lo - x) / two_pi).ceil();
            let mut out = Vec::new();
            let mut j = first;
            while x + two_pi * j <= hi {
                out.push(x + two_pi * j);
                j = j + T::one();
            }
            out
        })
        .collect();
    let mut reps: Vec<Vec<T>> = vec![Vec::new()];
    for choices in &per_joint {
        reps = reps
            .into_iter()
            .flat_map(|r| {
                choices.iter().map(move |&c| {
                    let mut r = r.clone();
                    r.push(c);
                    r
                })
            })
            .collect();
    }
    reps
}

/// Builds the layered graph for `layers` (one per sample of `path`).
pub fn build_plan_graph<T: Real>(
    robot: &RobotModel<T>,
    layers: &[Layer<T>],
    path: &TaskPath<T>,
    cfg: &PlannerConfig<T>,
) -> Result<PlanGraph<T>> {
    let n = robot.dof();
    cfg.validate(n)?;
    if layers.len() != path.len() {
        return Err(Error::InvalidPath(format!("{} layers for {} samples", layers.len(), path.len())));
    }
    let dl = path.dlambda();
    let eps = dl * cfg.eps0_for(n);
    let limits = if cfg.enforce_joint_limits { robot.limits() } else { None };
    let weight_matrix = cfg.manipulability_matrix.unwrap_or_else(|| Mat::identity(n));

    let mut vertices = Vec::new();
    let mut ranges = Vec::with_capacity(layers.len());
    for (k, layer) in layers.iter().enumerate() {
        let begin = vertices.len();
        for (m, s) in layer.solutions.solutions.iter().enumerate() {
            if s.q.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.q.len() });
            }
            if (s.approximate && !cfg.admit_approximate) || (cfg.nonsingular_only && s.det_j == T::zero()) {
                continue;
            }
            let mut penalty = T::zero();
            if cfg.manipulability_weight > T::zero() {
                let j = robot.pose_and_jacobian(&s.q).1;
                let mu = manipulability_of(&j, &weight_matrix);
                penalty = penalty + cfg.manipulability_weight * dl / mu.max(T::lit(1e-9));
            }
            if s.approximate {
                penalty = penalty + cfg.approximate_weight * s.residual;
            }
            let reps = match limits {
                Some(l) => representatives(&s.q, l),
                None => vec![s.q.clone()],
            };
            for q in reps {
                let mut p = penalty;
                if cfg.joint_limit_barrier > T::zero() {
                    if let Some(l) = robot.limits() {
                        p = p + cfg.joint_limit_barrier * dl * barrier(&q, l, limits.is_some());
                    }
                }
                vertices.push(Vertex { k, solution: m, q, det_j: s.det_j, penalty: p, approximate: s.approximate });
            }
        }
        ranges.push(begin..vertices.len());
    }

    let nv = vertices.len();
    let mut g = PlanGraph {
        vertices,
        layers: ranges,
        edges: Vec::new(),
        incoming: vec![Vec::new(); nv],
        outgoing: vec![Vec::new(); nv],
        start_out: Vec::new(),
        finish_in: Vec::new(),
        dlambda: dl,
        length: path.length(),
        unwrapped: limits.is_some(),
    };
    let compatible = |g: &PlanGraph<T>, u: usize, v: usize| {
        !cfg.nonsingular_only || g.vertices[u].det_j.signum() == g.vertices[v].det_j.signum()
    };
    let kk = path.intervals();

    for k in 0..kk {
        for u in g.layer(k) {
            for v in g.layer(k + 1) {
                if compatible(&g, u, v) {
                    let c = g.metric(u, v, 1);
                    if c < eps {
                        let w = c + g.vertices[v].penalty;
                        g.push(Node::Vertex(u), Node::Vertex(v), c, w, 1);
                    }
                }
            }
        }
    }
    let mut mark = vec![false; nv];
    for d in 2..=cfg.skip_depth {
        for k in 0..kk.saturating_sub(d - 1) {
            if k + d > kk {
                break;
            }
            for u in g.layer(k) {
                let reached = g.reach_within(u, k + d, &mut mark);
                for v in g.layer(k + d) {
                    if reached.contains(&v) || !compatible(&g, u, v) {
                        continue;
                    }
                    let c = g.metric(u, v, d);
                    if c < eps {
                        let w = c + g.vertices[v].penalty;
                        g.push(Node::Vertex(u), Node::Vertex(v), c, w, d);
                    }
                }
            }
        }
    }

    for v in g.layer(0) {
        let w = g.vertices[v].penalty;
        g.push(Node::Start, Node::Vertex(v), T::zero(), w, 1);
    }
    for u in g.layer(kk) {
        g.push(Node::Vertex(u), Node::Finish, T::zero(), T::zero(), 1);
    }
    // Start and finish skip connections only to vertices that shallower
    // connections leave unreachable, so skipping an end sample never
    // undercuts a path through it.
    for d in 1..cfg.skip_depth.min(kk + 1) {
        let seen = g.reachable_from_start();
        for v in g.layer(d) {
            if !seen[v] {
                let w = g.vertices[v].penalty;
                g.push(Node::Start, Node::Vertex(v), T::zero(), w, d + 1);
            }
        }
        let reaches = g.reaching_finish();
        for u in g.layer(kk - d) {
            if !reaches[u] {
                g.push(Node::Vertex(u), Node::Finish, T::zero(), T::zero(), d + 1);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representatives_cover_multi_turn_ranges() {
        let pi = std::f64::consts::PI;
        let r = representatives(&[0.5, -3.0], &[(-2.0 * pi, 2.0 * pi), (-pi, pi)]);
        assert_eq!(r.len(), 2);
        assert!((r[0][0] - (0.5 - 2.0 * pi)).abs() < 1e-15 && (r[1][0] - 0.5).abs() < 1e-15);
        assert!(representatives(&[3.0], &[(-1.0, 1.0)]).is_empty());
    }

    #[test]
    fn barrier_vanishes_at_range_middle() {
        assert!(barrier::<f64>(&[0.0, 1.0], &[(-1.0, 1.0), (0.0, 2.0)], false).abs() < 1e-15);
        assert!(barrier(&[0.9], &[(-1.0, 1.0)], true) > 1.0);
    }
}
