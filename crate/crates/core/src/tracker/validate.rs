//! A-posteriori checks of a stored run, plus deliberate corruption of a
//! history so that the checks themselves can be tested.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::riemann::WaveKind;

use super::history::{AvMode, History};
use super::ledger::{decrease_quantum, judge, Verdict};

const RH_TOL: f64 = 1e-10;
const STATE_TOL: f64 = 1e-10;
const LAW_TOL: f64 = 1e-12;
// Fronts riding with the AV sit at its position up to rounding only.
const TRACE_WINDOW: f64 = 1e-12;
const MASS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub check: &'static str,
    pub t: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub fronts_checked: usize,
    pub segments_checked: usize,
    pub samples_checked: usize,
    pub upsilon0: f64,
    pub max_tv: f64,
    /// Largest absolute mass-balance defect over the sampled times.
    pub max_mass_defect: f64,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, check: &str) -> usize {
        self.violations.iter().filter(|v| v.check == check).count()
    }

    fn flag(&mut self, check: &'static str, t: f64, detail: String) {
        self.violations.push(Violation { check, t, detail });
    }
}

/// Re-checks every front, every AV segment and `samples` evenly spaced time
/// slices of a run.
pub fn validate_solution(h: &History, samples: usize) -> ValidationReport {
    let m = &h.model;
    let mut rep = ValidationReport {
        upsilon0: h.upsilon0(),
        ..Default::default()
    };

    for f in &h.fronts {
        rep.fronts_checked += 1;
        let residual = (f.speed * (f.left - f.right) - (m.flux(f.left) - m.flux(f.right))).abs();
        if residual > RH_TOL {
            rep.flag(
                "rankine_hugoniot",
                f.t_birth,
                format!("front {} residual {residual:e}", f.id),
            );
        }
        match f.kind {
            WaveKind::Shock => {
                if !(f.left < f.right) {
                    rep.flag(
                        "shock_admissibility",
                        f.t_birth,
                        format!("front {} has {} >= {}", f.id, f.left, f.right),
                    );
                }
            }
            WaveKind::Rarefaction => {
                if !(f.right < f.left && f.left <= f.right + h.eps_rho + 1e-12) {
                    rep.flag(
                        "rarefaction_strength",
                        f.t_birth,
                        format!("front {} jumps {} -> {}", f.id, f.left, f.right),
                    );
                }
                let lo = m.flux_prime(f.left) - RH_TOL;
                let hi = m.flux_prime(f.right) + RH_TOL;
                if !(lo <= f.speed && f.speed <= hi) {
                    rep.flag(
                        "rarefaction_speed",
                        f.t_birth,
                        format!("front {} speed {} outside [{lo}, {hi}]", f.id, f.speed),
                    );
                }
            }
            WaveKind::Undercompressive => rep.flag(
                "front_kind",
                f.t_birth,
                format!("front {} is undercompressive but detached from the AV", f.id),
            ),
        }
    }

    for (i, s) in h.av.iter().enumerate() {
        rep.segments_checked += 1;
        check_segment(h, i, &mut rep);
        if s.u != h.control.value_at(s.t_start) {
            rep.flag(
                "control",
                s.t_start,
                format!(
                    "segment {i} uses u={} but the control is {}",
                    s.u,
                    h.control.value_at(s.t_start)
                ),
            );
        }
    }
    for w in h.av.windows(2) {
        let gap = (w[0].position(w[0].t_end) - w[1].y_start).abs();
        if w[0].t_end != w[1].t_start || gap > 1e-9 {
            rep.flag("av_continuity", w[1].t_start, format!("AV path jumps by {gap:e}"));
        }
    }

    let quantum = decrease_quantum(h.delta_rho, h.delta_u, m.beta());
    for pair in h.ledger.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if judge(b.delta_upsilon, a.waves, b.waves, quantum) == Verdict::Violation {
            rep.flag(
                "glimm",
                b.t,
                format!(
                    "event {} dUpsilon={:e} waves {}->{}",
                    b.index, b.delta_upsilon, a.waves, b.waves
                ),
            );
        }
        if (b.upsilon - a.upsilon - b.delta_upsilon).abs() > 1e-9 {
            rep.flag(
                "ledger_consistency",
                b.t,
                format!("event {} increments do not add up", b.index),
            );
        }
    }

    let (lo, hi) = h.spatial_extent();
    let window = (lo - 1.0, hi + 1.0);
    let mass0 = h
        .snapshot(0.0)
        .map(|s| s.integral(window.0, window.1))
        .unwrap_or(f64::NAN);
    for k in 0..samples {
        let t = h.t_end * (k as f64 + 0.5) / samples as f64;
        rep.samples_checked += 1;
        check_slice(h, t, &mut rep);
        if let Ok(snap) = h.snapshot(t) {
            let inflow = t * (m.flux(h.far_left) - m.flux(h.far_right));
            let defect = snap.integral(window.0, window.1) - mass0 - inflow;
            rep.max_mass_defect = rep.max_mass_defect.max(defect.abs());
            if !(defect.abs() <= MASS_TOL * mass0.abs().max(1.0)) {
                rep.flag("mass_balance", t, format!("mass defect {defect:e}"));
            }
        }
    }
    rep
}

fn check_segment(h: &History, i: usize, rep: &mut ValidationReport) {
    let m = &h.model;
    let s = &h.av[i];
    let ydot = s.speed;
    if !(0.0..=m.v_max()).contains(&ydot) {
        rep.flag("av_speed_range", s.t_start, format!("segment {i} speed {ydot}"));
    }
    let cap = m.capacity(ydot);
    for (side, rho) in [("behind", s.rho_minus), ("ahead", s.rho_plus)] {
        let excess = m.flux(rho) - ydot * rho - cap;
        if excess > STATE_TOL {
            rep.flag(
                "trace_constraint",
                s.t_start,
                format!("segment {i}: trace {side} {rho} exceeds capacity by {excess:e}"),
            );
        }
    }
    match s.mode {
        AvMode::Undercompressive => {
            let g = m.geometry_unchecked(s.u);
            if (s.rho_minus - g.hat_rho).abs() > STATE_TOL || (s.rho_plus - g.check_rho).abs() > STATE_TOL {
                rep.flag(
                    "undercompressive_states",
                    s.t_start,
                    format!(
                        "segment {i}: ({}, {}) instead of ({}, {})",
                        s.rho_minus, s.rho_plus, g.hat_rho, g.check_rho
                    ),
                );
            }
            if ydot != s.u {
                rep.flag(
                    "undercompressive_speed",
                    s.t_start,
                    format!("segment {i}: {ydot} != u={}", s.u),
                );
            }
            let defect = m.flux(s.rho_minus) - s.u * s.rho_minus - g.capacity;
            if defect.abs() > STATE_TOL {
                rep.flag(
                    "undercompressive_equality",
                    s.t_start,
                    format!("segment {i}: defect {defect:e}"),
                );
            }
        }
        AvMode::Free | AvMode::Classical => {
            let law = s.u.min(m.speed(s.rho_plus));
            if (ydot - law).abs() > LAW_TOL {
                rep.flag(
                    "av_law",
                    s.t_start,
                    format!("segment {i}: speed {ydot} but min(u, v(trace)) = {law}"),
                );
            }
            if s.mode == AvMode::Free && s.rho_minus != s.rho_plus {
                rep.flag(
                    "av_jump",
                    s.t_start,
                    format!("segment {i}: free AV with a density jump"),
                );
            }
            if s.mode == AvMode::Classical && !(s.rho_minus < s.rho_plus) {
                rep.flag(
                    "shock_admissibility",
                    s.t_start,
                    format!("segment {i}: AV rides a non-entropic jump"),
                );
            }
        }
    }
}

fn check_slice(h: &History, t: f64, rep: &mut ValidationReport) {
    let m = &h.model;
    let jumps = match h.jumps_at(t) {
        Ok(j) => j,
        Err(e) => {
            rep.flag("history", t, e.to_string());
            return;
        }
    };
    let mut state = h.far_left;
    let mut tv = 0.0;
    for j in &jumps {
        if (j.left - state).abs() > 1e-12 {
            rep.flag(
                "chain",
                t,
                format!("jump at x={} starts at {}, expected {state}", j.x, j.left),
            );
        }
        tv += (j.right - j.left).abs();
        state = j.right;
    }
    if (state - h.far_right).abs() > 1e-12 {
        rep.flag("chain", t, format!("profile ends at {state}, expected {}", h.far_right));
    }
    rep.max_tv = rep.max_tv.max(tv);
    if tv > rep.upsilon0 + 1e-9 {
        rep.flag("tv_bound", t, format!("TV={tv} exceeds Upsilon(0)={}", rep.upsilon0));
    }

    let Ok(seg) = h.av_segment_at(t) else {
        return;
    };
    let y = seg.position(t);
    let window = TRACE_WINDOW * y.abs().max(1.0);
    let mut behind = h.far_left;
    for j in jumps.iter().take_while(|j| j.x < y - window) {
        behind = j.right;
    }
    let mut ahead = behind;
    for j in jumps.iter().filter(|j| (j.x - y).abs() <= window) {
        ahead = j.right;
    }
    let ydot = seg.speed;
    let u = h.control.value_at(t);
    if (ahead - seg.rho_plus).abs() > STATE_TOL || (behind - seg.rho_minus).abs() > STATE_TOL {
        rep.flag(
            "trace_mismatch",
            t,
            format!(
                "profile traces ({behind}, {ahead}) differ from recorded ({}, {})",
                seg.rho_minus, seg.rho_plus
            ),
        );
    }
    let cap = m.capacity(ydot);
    for rho in [behind, ahead] {
        if m.flux(rho) - ydot * rho - cap > STATE_TOL {
            rep.flag(
                "trace_constraint",
                t,
                format!("trace {rho} at y={y} violates the constraint"),
            );
        }
    }
    let expected = if seg.mode == AvMode::Undercompressive {
        u
    } else {
        u.min(m.speed(ahead))
    };
    if (ydot - expected).abs() > LAW_TOL {
        rep.flag("av_law", t, format!("AV speed {ydot}, expected {expected}"));
    }
}

/// Deliberate corruptions used to exercise the validator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fault {
    /// Adds `delta` to the speed of front `front`.
    FrontSpeed { front: usize, delta: f64 },
    /// Shifts the state behind the AV on an undercompressive segment.
    UndercompressiveState { segment: usize, delta: f64 },
    /// Replaces both AV traces on a segment by a density inside the band.
    ConstraintTrace { segment: usize },
}

pub fn inject_fault(h: &mut History, fault: Fault) -> Result<()> {
    match fault {
        Fault::FrontSpeed { front, delta } => {
            let f = h
                .fronts
                .get_mut(front)
                .ok_or_else(|| Error::Validation(format!("no front {front}")))?;
            f.speed += delta;
        }
        Fault::UndercompressiveState { segment, delta } => {
            let s =
                h.av.get_mut(segment)
                    .ok_or_else(|| Error::Validation(format!("no AV segment {segment}")))?;
            if s.mode != AvMode::Undercompressive {
                return Err(Error::Validation(format!(
                    "AV segment {segment} is not undercompressive"
                )));
            }
            s.rho_minus += delta;
        }
        Fault::ConstraintTrace { segment } => {
            let model = h.model.clone();
            let s =
                h.av.get_mut(segment)
                    .ok_or_else(|| Error::Validation(format!("no AV segment {segment}")))?;
            let g = model.geometry_unchecked(s.u.min(0.999 * model.v_max()));
            let inside = 0.5 * (g.check_rho + g.hat_rho);
            s.rho_minus = inside;
            s.rho_plus = inside;
            s.speed = g.u;
            s.u = g.u;
            s.mode = AvMode::Free;
        }
    }
    Ok(())
}
