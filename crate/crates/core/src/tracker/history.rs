//! Complete record of a run, enough to rebuild the solution at any time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::mesh::ControlSignal;
use crate::profile::StepFunction;
use crate::riemann::WaveKind;

use super::ledger::LedgerEntry;

/// A density jump in a time slice: a classical front, or the AV when it
/// carries an undercompressive jump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub x: f64,
    pub speed: f64,
    pub on_av: bool,
    pub left: f64,
    pub right: f64,
}

/// One classical front between its creation and its removal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontRecord {
    pub id: usize,
    pub kind: WaveKind,
    pub left: f64,
    pub right: f64,
    pub speed: f64,
    pub t_birth: f64,
    pub x_birth: f64,
    /// `f64::INFINITY` while alive.
    pub t_death: f64,
}

impl FrontRecord {
    pub fn position(&self, t: f64) -> f64 {
        self.x_birth + self.speed * (t - self.t_birth)
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.t_birth <= t && t < self.t_death
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AvMode {
    /// No density jump along the AV path.
    Free,
    /// A classical shock travels with the AV.
    Classical,
    /// The AV carries the undercompressive jump `(ρ̂_u, ρ̌_u)`.
    Undercompressive,
}

impl AvMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AvMode::Free => "free",
            AvMode::Classical => "classical",
            AvMode::Undercompressive => "undercompressive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "free" => Some(AvMode::Free),
            "classical" => Some(AvMode::Classical),
            "undercompressive" => Some(AvMode::Undercompressive),
            _ => None,
        }
    }
}

/// A maximal time interval on which the AV moves with constant speed and
/// constant traces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub y_start: f64,
    pub speed: f64,
    pub u: f64,
    /// Density immediately behind the AV.
    pub rho_minus: f64,
    /// Density immediately ahead of the AV.
    pub rho_plus: f64,
    pub mode: AvMode,
}

impl AvSegment {
    pub fn position(&self, t: f64) -> f64 {
        self.y_start + self.speed * (t - self.t_start)
    }
}

#[derive(Clone, Debug)]
pub struct History {
    pub model: FluxModel,
    pub nu: u32,
    pub eps_rho: f64,
    pub delta_rho: f64,
    pub delta_u: f64,
    pub control: ControlSignal,
    pub t_end: f64,
    pub far_left: f64,
    pub far_right: f64,
    pub fronts: Vec<FrontRecord>,
    pub av: Vec<AvSegment>,
    pub ledger: Vec<LedgerEntry>,
}

impl History {
    pub fn upsilon0(&self) -> f64 {
        self.ledger.first().map_or(f64::NAN, |e| e.upsilon)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.t_end) {
            return Err(Error::OutOfRange { t, t_end: self.t_end });
        }
        Ok(())
    }

    /// AV segment active at `t` (the later one at a boundary, except at `t_end`).
    pub fn av_segment_at(&self, t: f64) -> Result<&AvSegment> {
        self.check_time(t)?;
        let i = self.av.partition_point(|s| s.t_start <= t);
        self.av
            .get(i.saturating_sub(1))
            .ok_or_else(|| Error::Internal("empty AV history".into()))
    }

    pub fn av_position(&self, t: f64) -> Result<f64> {
        Ok(self.av_segment_at(t)?.position(t))
    }

    /// AV path as `(t, y)` vertices, one per segment start plus the end point.
    pub fn av_trajectory(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.av.iter().map(|s| (s.t_start, s.y_start)).collect();
        if let Some(last) = self.av.last() {
            out.push((last.t_end, last.position(last.t_end)));
        }
        out
    }

    /// Jumps present at time `t`, ordered in space.
    pub fn jumps_at(&self, t: f64) -> Result<Vec<Jump>> {
        let seg = self.av_segment_at(t)?;
        let mut jumps: Vec<Jump> = self
            .fronts
            .iter()
            .filter(|f| f.alive_at(t) || (t == self.t_end && f.t_death == f64::INFINITY))
            .map(|f| Jump {
                x: f.position(t),
                speed: f.speed,
                on_av: false,
                left: f.left,
                right: f.right,
            })
            .collect();
        if seg.mode == AvMode::Undercompressive {
            jumps.push(Jump {
                x: seg.position(t),
                speed: seg.speed,
                on_av: true,
                left: seg.rho_minus,
                right: seg.rho_plus,
            });
        }
        jumps.sort_by(|a, b| {
            a.x.total_cmp(&b.x)
                .then(a.speed.total_cmp(&b.speed))
                .then(a.on_av.cmp(&b.on_av))
        });
        Ok(jumps)
    }

    /// Density profile at time `t`.
    pub fn snapshot(&self, t: f64) -> Result<StepFunction> {
        let jumps = self.jumps_at(t)?;
        let mut xs: Vec<f64> = Vec::with_capacity(jumps.len());
        let mut values = vec![self.far_left];
        for j in jumps {
            if xs.last() == Some(&j.x) {
                *values.last_mut().unwrap() = j.right;
            } else {
                xs.push(j.x);
                values.push(j.right);
            }
        }
        StepFunction::new(xs, values)
    }

    pub fn sample_density(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let snap = self.snapshot(t)?;
        Ok(xs.iter().map(|&x| snap.value_at(x)).collect())
    }

    /// Interval containing every front that ever existed, over `[0, t_end]`.
    pub fn spatial_extent(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for f in &self.fronts {
            let end = f.t_death.min(self.t_end);
            for x in [f.x_birth, f.position(end)] {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        for s in &self.av {
            for x in [s.y_start, s.position(s.t_end)] {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}
