use super::{build_layers, build_plan_graph, shortest_path_between, PlannerConfig, TaskPath};
use crate::error::{Error, Result};
use crate::ik::IKConfig;
use crate::kinematics::{wrapped_distance, RobotModel};
use crate::num::Real;

/// Which start solutions of a closed path lead to which end solutions.
///
/// Solution `m` indexes the IK solutions of the (shared) first and last
/// pose, in the order of the first layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatabilityReport<T> {
    /// Joint values of each solution at the closing pose.
    pub solutions: Vec<Vec<T>>,
    /// `connectivity[m][l]` holds the optimal cost of following the path
    /// once from solution `m` to solution `l`, if possible.
    pub connectivity: Vec<Vec<Option<T>>>,
    /// Solutions that return to themselves after one traversal.
    pub regular_solutions: Vec<usize>,
    /// Simple cycles of length at least two in the connectivity relation,
    /// each listed from its smallest member.
    pub cycles: Vec<Vec<usize>>,
    /// Transitions `m -> l`, `l != m`, that lie on no cycle.
    pub nonrepeatable_transitions: Vec<(usize, usize)>,
}

impl<T: Real> RepeatabilityReport<T> {
    pub fn connected(&self, m: usize, l: usize) -> bool {
        self.connectivity[m][l].is_some()
    }
}

/// Follows a closed path from each start solution and classifies the
/// resulting start-to-end transitions.
pub fn analyze_repeatability<T: Real>(
    robot: &RobotModel<T>,
    path: &TaskPath<T>,
    cfg: &PlannerConfig<T>,
    ik_cfg: &IKConfig<T>,
) -> Result<RepeatabilityReport<T>> {
    if !path.is_closed() {
        return Err(Error::InvalidPath("repeatability needs a closed path".into()));
    }
    cfg.validate(robot.dof())?;
    let layers = build_layers(robot, path, ik_cfg)?;
    let first = &layers[0].solutions.solutions;
    let last = &layers[layers.len() - 1].solutions.solutions;
    if first.len() != last.len() {
        return Err(Error::EndpointMismatch(format!(
            "{} solutions at the start, {} at the end",
            first.len(),
            last.len()
        )));
    }
    // Layer-K index matched to each layer-0 solution.
    let mut matched = vec![usize::MAX; first.len()];
    let mut used = vec![false; last.len()];
    for (m, s) in first.iter().enumerate() {
        let best = last
            .iter()
            .enumerate()
            .map(|(l, t)| (l, wrapped_distance(&s.q, &t.q)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        match best {
            Some((l, d)) if d <= ik_cfg.dedup_tol && !used[l] => {
                used[l] = true;
                matched[m] = l;
            }
            _ => {
                return Err(Error::EndpointMismatch(format!("start solution {m} has no counterpart at the end")));
            }
        }
    }

    let graph = build_plan_graph(robot, &layers, path, cfg)?;
    let kk = path.intervals();
    let by_solution =
        |k: usize, m: usize| -> Vec<usize> { graph.layer(k).filter(|&v| graph.vertices()[v].solution == m).collect() };
    let n = first.len();
    let mut connectivity = vec![vec![None; n]; n];
    for (m, row) in connectivity.iter_mut().enumerate() {
        let sources = by_solution(0, m);
        for (l, cell) in row.iter_mut().enumerate() {
            let targets = by_solution(kk, matched[l]);
            *cell = shortest_path_between(&graph, &sources, &targets).map(|p| p.total_weight);
        }
    }

    let regular_solutions: Vec<usize> = (0..n).filter(|&m| connectivity[m][m].is_some()).collect();
    let adj: Vec<Vec<usize>> =
        (0..n).map(|m| (0..n).filter(|&l| l != m && connectivity[m][l].is_some()).collect()).collect();
    let cycles = simple_cycles(&adj);
    let mut nonrepeatable_transitions = Vec::new();
    for m in 0..n {
        for &l in &adj[m] {
            let on_cycle = cycles.iter().any(|c| {
                let len = c.len();
                (0..len).any(|i| c[i] == m && c[(i + 1) % len] == l)
            });
            if !on_cycle {
                nonrepeatable_transitions.push((m, l));
            }
        }
    }
    Ok(RepeatabilityReport {
        solutions: first.iter().map(|s| s.q.clone()).collect(),
        connectivity,
        regular_solutions,
        cycles,
        nonrepeatable_transitions,
    })
}

/// Every simple cycle of a small directed graph without self-loops, each
/// rooted at its smallest vertex.
fn simple_cycles(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn dfs(adj: &[Vec<usize>], root: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let u = *path.last().expect("path starts at root");
        for &v in &adj[u] {
            if v == root {
                out.push(path.clone());
            } else if v > root && !on[v] {
                on[v] = true;
                path.push(v);
                dfs(adj, root, path, on, out);
                path.pop();
                on[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; adj.len()];
    for root in 0..adj.len() {
        let mut path = vec![root];
        on[root] = true;
        dfs(adj, root, &mut path, &mut on, &mut out);
        on[root] = false;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_of_small_graph() {
        let adj = vec![vec![1], vec![0, 2], vec![1], vec![0]];
        let c = simple_cycles(&adj);
        assert_eq!(c, vec![vec![0, 1], vec![1, 2]]);
        assert!(simple_cycles(&[vec![1], vec![]]).is_empty());
    }
}
