//! Density snapshots tagged with the scenario they came from, and L¹
//! distances between them.

use crate::error::{Error, Result};
use crate::fv::FvSolver;
use crate::profile::StepFunction;
use crate::scenario::Scenario;
use crate::tracker::History;

const TIME_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub scenario_hash: String,
    pub t: f64,
    pub profile: StepFunction,
    /// Interval on which the profile is meaningful. Unbounded for tracker output.
    pub window: (f64, f64),
}

impl Snapshot {
    pub fn from_history(h: &History, t: f64, scenario_hash: &str) -> Result<Self> {
        Ok(Self {
            scenario_hash: scenario_hash.to_string(),
            t,
            profile: h.snapshot(t)?,
            window: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }
}

/// L¹ distance of two snapshots of the same scenario at the same time, over
/// the intersection of their windows.
pub fn l1_compare(a: &Snapshot, b: &Snapshot) -> Result<f64> {
    if a.scenario_hash != b.scenario_hash {
        return Err(Error::SnapshotMismatch(format!(
            "scenario hashes differ: {} vs {}",
            a.scenario_hash, b.scenario_hash
        )));
    }
    if (a.t - b.t).abs() > TIME_TOL * a.t.abs().max(1.0) {
        return Err(Error::SnapshotMismatch(format!(
            "snapshot times differ: {} vs {}",
            a.t, b.t
        )));
    }
    let lo = a.window.0.max(b.window.0);
    let hi = a.window.1.min(b.window.1);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::SnapshotMismatch("no bounded common window".into()));
    }
    if lo >= hi {
        return Err(Error::SnapshotMismatch(format!(
            "windows do not overlap ({lo} >= {hi})"
        )));
    }
    Ok(a.profile.l1_distance(&b.profile, lo, hi))
}

/// Space-time L¹ distance over `[0, t_end] × [lo, hi]`, by the midpoint rule
/// in time with exact spatial integrals.
pub fn space_time_l1(a: &History, b: &History, window: (f64, f64), time_samples: usize) -> Result<f64> {
    let t_end = a.t_end.min(b.t_end);
    let n = time_samples.max(1);
    let dt = t_end / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let t = (k as f64 + 0.5) * dt;
        total += a.snapshot(t)?.l1_distance(&b.snapshot(t)?, window.0, window.1) * dt;
    }
    Ok(total)
}

/// L¹ distance at `t_end` between the tracker at level `nu` and the Godunov
/// scheme with cell width `dx`. The scheme runs on the tracker's spatial
/// extent widened by how far information can travel, plus one.
pub fn tracker_vs_godunov(sc: &Scenario, nu: u32, dx: f64, cfl: f64) -> Result<f64> {
    let hash = sc.hash();
    let h = sc.solve_at(nu)?;
    let model = sc.model()?;
    let (lo, hi) = h.spatial_extent();
    let margin = model.lipschitz() * sc.t_end + 1.0;
    let mut fv = FvSolver::new(
        &model,
        &sc.initial_profile()?,
        &sc.control_signal()?,
        sc.y0,
        (lo.min(sc.y0) - margin, hi.max(sc.y0) + margin),
        dx,
    )?;
    fv.run(sc.t_end, cfl)?;
    l1_compare(&Snapshot::from_history(&h, sc.t_end, &hash)?, &fv.snapshot(&hash))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(hash: &str, t: f64, values: Vec<f64>, window: (f64, f64)) -> Snapshot {
        Snapshot {
            scenario_hash: hash.into(),
            t,
            profile: StepFunction::new(vec![0.0], values).unwrap(),
            window,
        }
    }

    #[test]
    fn identical_snapshots_are_at_distance_zero() {
        let a = snap("h", 1.0, vec![0.2, 0.7], (-1.0, 1.0));
        assert_eq!(l1_compare(&a, &a.clone()).unwrap(), 0.0);
    }

    #[test]
    fn distance_uses_common_window() {
        let a = snap("h", 1.0, vec![0.2, 0.7], (f64::NEG_INFINITY, f64::INFINITY));
        let b = snap("h", 1.0, vec![0.2, 0.5], (-2.0, 3.0));
        assert!((l1_compare(&a, &b).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = snap("h", 1.0, vec![0.2, 0.7], (-1.0, 1.0));
        assert!(matches!(
            l1_compare(&a, &snap("other", 1.0, vec![0.2, 0.7], (-1.0, 1.0))),
            Err(Error::SnapshotMismatch(_))
        ));
        assert!(l1_compare(&a, &snap("h", 2.0, vec![0.2, 0.7], (-1.0, 1.0))).is_err());
        let open = snap("h", 1.0, vec![0.2, 0.7], (f64::NEG_INFINITY, f64::INFINITY));
        assert!(l1_compare(&open, &open.clone()).is_err());
    }
}
