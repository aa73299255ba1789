//! Multi-start refinement from a regular joint-space seed grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{refine_unchecked, IKConfig, IKSolution};
use crate::kinematics::{Pose, RobotModel};
use crate::num::Real;

/// Seed `index` of the regular grid: cell centers of `s` equal bins per joint.
fn grid_seed<T: Real>(index: usize, s: usize, n: usize, jitter: Option<&[T]>) -> Vec<T> {
    let two_pi = T::PI() + T::PI();
    let step = two_pi / T::lit(s as f64);
    let mut rem = index;
    (0..n)
        .map(|j| {
            let k = rem % s;
            rem /= s;
            let base = -T::PI() + step * (T::lit(k as f64) + T::lit(0.5));
            base + jitter.map_or(T::zero(), |o| o[j] * step)
        })
        .collect()
}

/// Refines every seed and returns the raw results in canonical seed order.
pub(super) fn candidates<T: Real>(robot: &RobotModel<T>, target: &Pose<T>, cfg: &IKConfig<T>) -> Vec<IKSolution<T>> {
    let n = robot.dof();
    let s = cfg.seeds_for(n);
    let total = s.pow(n as u32);
    let mut passes: Vec<Option<Vec<T>>> = vec![None];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.jitter_seed);
    for _ in 0..cfg.jitter_repeats {
        passes.push(Some((0..n).map(|_| T::lit(rng.gen_range(-0.5..0.5))).collect()));
    }
    passes
        .iter()
        .flat_map(|jit| {
            (0..total)
                .into_par_iter()
                .filter_map(|i| {
                    let q0 = grid_seed(i, s, n, jit.as_deref());
                    refine_unchecked(robot, target, &q0, cfg)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_cell_centers() {
        let seeds: Vec<Vec<f64>> = (0..4).map(|i| grid_seed(i, 4, 1, None)).collect();
        let expected = [-0.75, -0.25, 0.25, 0.75].map(|f| f * std::f64::consts::PI);
        for (s, e) in seeds.iter().zip(expected) {
            assert!((s[0] - e).abs() < 1e-15);
        }
        let a = grid_seed::<f64>(5, 4, 2, None);
        assert!((a[0] - grid_seed::<f64>(1, 4, 1, None)[0]).abs() < 1e-15);
        assert!((a[1] - grid_seed::<f64>(1, 4, 1, None)[0]).abs() < 1e-15);
    }
}
