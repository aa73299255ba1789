//! Randomized identification of cuspidal arms.
//!
//! A robot is cuspidal if two IK solutions of one pose can be joined without
//! crossing a singularity. The search draws random configurations, solves
//! the IK of their poses, and checks whether the straight joint-space segment
//! between any two same-sign solutions keeps `det J` away from zero. A hit is
//! a proof; running out of trials proves nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ik::{solve_all_ik, IKConfig};
use crate::kinematics::{forward_kinematics, jacobian_determinant, Pose, RobotModel};
use crate::num::{golden, Real};

/// Two solutions of one pose joined by a nonsingular straight segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T> {
    pub pose: Pose<T>,
    pub q_a: Vec<T>,
    pub q_b: Vec<T>,
    pub min_abs_detj: T,
    pub interp_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T> {
    ProvenCuspidal(Witness<T>),
    Undetermined { poses_tried: usize, pairs_tested: usize },
}

impl<T> Verdict<T> {
    pub fn is_cuspidal(&self) -> bool {
        matches!(self, Verdict::ProvenCuspidal(_))
    }

    pub fn witness(&self) -> Option<&Witness<T>> {
        match self {
            Verdict::ProvenCuspidal(w) => Some(w),
            Verdict::Undetermined { .. } => None,
        }
    }
}

/// Outcome of scanning `det J` along a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCheck<T> {
    pub nonsingular: bool,
    pub min_abs_detj: T,
    /// Threshold the samples were held to.
    pub singularity_tol: T,
}

/// Relative singularity threshold: `|det J|` below this fraction of the
/// segment's median `|det J|` counts as singular.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-8;

/// Pose agreement required between the two ends of a segment.
const POSE_MATCH_TOL: f64 = 2e-3;

/// Scans `det J` at `samples` evenly spaced points of the straight segment
/// `q_a -> q_b` (coordinates interpolated directly, no wrapping) and refines
/// each local minimum of `|det J|` between them. The segment is nonsingular
/// when the sign never changes and `|det J|` stays above `relative_tol`
/// times the median sampled `|det J|`.
pub fn nonsingular_pair_check<T: Real>(
    robot: &RobotModel<T>,
    q_a: &[T],
    q_b: &[T],
    samples: usize,
    relative_tol: T,
) -> Result<SegmentCheck<T>> {
    if samples < 100 {
        return Err(Error::InvalidConfig(format!("need at least 100 samples, got {samples}")));
    }
    let pa = forward_kinematics(robot, q_a)?;
    let pb = forward_kinematics(robot, q_b)?;
    let (dp, dr) = pa.error_to(&pb);
    let (dp, dr) = if robot.dof() == 3 { (dp, T::zero()) } else { (dp, dr) };
    let tol = T::lit(POSE_MATCH_TOL);
    if dp > tol || dr > tol {
        return Err(Error::PoseMismatch { position: dp.as_f64(), orientation: dr.as_f64() });
    }
    Ok(segment_check(robot, q_a, q_b, samples, relative_tol))
}

pub(crate) fn segment_check<T: Real>(
    robot: &RobotModel<T>,
    q_a: &[T],
    q_b: &[T],
    samples: usize,
    relative_tol: T,
) -> SegmentCheck<T> {
    let last = T::lit((samples - 1) as f64);
    let det_at = |t: T| {
        let q: Vec<T> = q_a.iter().zip(q_b).map(|(&a, &b)| a + (b - a) * t).collect();
        robot.pose_and_jacobian(&q).1.det()
    };
    let t_of = |i: usize| T::lit(i as f64) / last;
    let dets: Vec<T> = (0..samples).map(|i| det_at(t_of(i))).collect();
    let mut mags: Vec<T> = dets.iter().map(|d| d.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = mags[mags.len() / 2];
    let singularity_tol = relative_tol * median;
    let sign = dets[0].signum();
    if !dets.iter().all(|d| d.signum() == sign && d.is_finite()) {
        return SegmentCheck { nonsingular: false, min_abs_detj: mags[0], singularity_tol };
    }
    // `det J` can touch zero between samples without changing sign there;
    // refine every sampled local minimum of `|det J|` on the continuous
    // segment.
    let mut min_abs_detj = mags[0];
    for i in 0..samples {
        let v = dets[i].abs();
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(samples - 1);
        if v > dets[lo].abs() || v > dets[hi].abs() {
            continue;
        }
        let (_, f) = golden(|t| sign * det_at(t), t_of(lo), t_of(hi));
        min_abs_detj = min_abs_detj.min(f.max(T::zero()));
        if f <= singularity_tol {
            break;
        }
    }
    SegmentCheck { nonsingular: min_abs_detj > singularity_tol, min_abs_detj, singularity_tol }
}

/// Draws up to `max_poses` random configurations and tests every same-sign
/// pair of IK solutions of each resulting pose. Reproducible per `seed`.
pub fn identify_cuspidal<T: Real>(
    robot: &RobotModel<T>,
    seed: u64,
    max_poses: usize,
    samples: usize,
    cfg: &IKConfig<T>,
) -> Result<Verdict<T>> {
    if max_poses == 0 {
        return Err(Error::InvalidConfig("max_poses must be at least 1".into()));
    }
    if samples < 100 {
        return Err(Error::InvalidConfig(format!("need at least 100 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rel = T::lit(DEFAULT_RELATIVE_TOL);
    let mut pairs_tested = 0;
    for _ in 0..max_poses {
        let q: Vec<T> =
            (0..robot.dof()).map(|_| T::lit(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))).collect();
        let pose = robot.pose_unchecked(&q);
        let set = solve_all_ik(robot, &pose, cfg)?;
        let sols: Vec<_> = set.exact().collect();
        for i in 0..sols.len() {
            for j in i + 1..sols.len() {
                let (a, b) = (sols[i], sols[j]);
                if a.det_j == T::zero() || a.det_j.signum() != b.det_j.signum() {
                    continue;
                }
                pairs_tested += 1;
                let c = segment_check(robot, &a.q, &b.q, samples, rel);
                if c.nonsingular {
                    return Ok(Verdict::ProvenCuspidal(Witness {
                        pose,
                        q_a: a.q.clone(),
                        q_b: b.q.clone(),
                        min_abs_detj: c.min_abs_detj,
                        interp_samples: samples,
                    }));
                }
            }
        }
    }
    Ok(Verdict::Undetermined { poses_tried: max_poses, pairs_tested })
}

/// Re-checks a witness: both ends reach its pose and the segment stays
/// nonsingular at `samples` points.
pub fn validate_witness<T: Real>(robot: &RobotModel<T>, w: &Witness<T>, samples: usize, pose_tol: T) -> Result<bool> {
    for q in [&w.q_a, &w.q_b] {
        let (dp, dr) = forward_kinematics(robot, q)?.error_to(&w.pose);
        let dr = if robot.dof() == 3 { T::zero() } else { dr };
        if dp > pose_tol || dr > pose_tol {
            return Ok(false);
        }
    }
    let c = nonsingular_pair_check(robot, &w.q_a, &w.q_b, samples, T::lit(DEFAULT_RELATIVE_TOL))?;
    Ok(c.nonsingular)
}

/// `det J` at `samples` evenly spaced points of a straight joint segment.
pub fn determinant_profile<T: Real>(robot: &RobotModel<T>, q_a: &[T], q_b: &[T], samples: usize) -> Result<Vec<T>> {
    let last = T::lit(samples.saturating_sub(1).max(1) as f64);
    (0..samples)
        .map(|i| {
            let t = T::lit(i as f64) / last;
            let q: Vec<T> = q_a.iter().zip(q_b).map(|(&a, &b)| a + (b - a) * t).collect();
            jacobian_determinant(robot, &q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::canonical_3r;

    #[test]
    fn degenerate_segment_is_nonsingular() {
        let r = canonical_3r::<f64>();
        let q = [0.3, -0.7, 1.1];
        let c = nonsingular_pair_check(&r, &q, &q, 100, 1e-8).unwrap();
        assert!(c.nonsingular && c.min_abs_detj > 0.0);
    }

    #[test]
    fn rejects_mismatched_poses_and_few_samples() {
        let r = canonical_3r::<f64>();
        assert!(matches!(
            nonsingular_pair_check(&r, &[0.0; 3], &[1.0, 0.0, 0.0], 100, 1e-8),
            Err(Error::PoseMismatch { .. })
        ));
        assert!(nonsingular_pair_check(&r, &[0.0; 3], &[0.0; 3], 10, 1e-8).is_err());
    }
}
