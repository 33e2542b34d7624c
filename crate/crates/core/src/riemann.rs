//! Classical and constrained Riemann solvers.
//!
//! The construction is written once over [`RiemannFlux`], which has two
//! implementations: [`ExactFlux`] works on real densities with continuous
//! rarefaction fans, and the impl on [`Grids`] works on grid indices with the
//! piecewise-linear flux, where every fan becomes a staircase of fronts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::mesh::Grids;

/// Two speeds closer than this are treated as equal when locating the AV
/// inside a self-similar profile.
pub const SPEED_TIE: f64 = 1e-12;

const BAND_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Shock,
    Rarefaction,
    Undercompressive,
}

impl WaveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::Shock => "shock",
            WaveKind::Rarefaction => "rarefaction",
            WaveKind::Undercompressive => "undercompressive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "shock" => Some(WaveKind::Shock),
            "rarefaction" => Some(WaveKind::Rarefaction),
            "undercompressive" => Some(WaveKind::Undercompressive),
            _ => None,
        }
    }
}

/// A single elementary wave. Shocks, grid rarefaction fronts and the
/// undercompressive jump have `speed_lo == speed_hi`; a continuous fan spans
/// `[f'(left), f'(right)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Wave<S> {
    pub left: S,
    pub right: S,
    pub kind: WaveKind,
    pub speed_lo: f64,
    pub speed_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiemannSolution<S> {
    pub left: S,
    pub right: S,
    pub waves: Vec<Wave<S>>,
    /// `ẏ`, absent for the unconstrained solver.
    pub av_speed: Option<f64>,
    /// Number of waves located at or behind the AV. When the solution is
    /// constrained, `waves[av_slot - 1]` is the undercompressive jump.
    pub av_slot: usize,
    pub constrained: bool,
}

impl<S: Copy + PartialEq> RiemannSolution<S> {
    /// State immediately right of the AV.
    pub fn right_trace(&self) -> S {
        if self.av_slot == 0 {
            self.left
        } else {
            self.waves[self.av_slot - 1].right
        }
    }

    /// State immediately left of the AV.
    pub fn left_trace(&self) -> S {
        match self.av_slot {
            0 => self.left,
            k if self.waves[k - 1].speed_lo == self.waves[k - 1].speed_hi
                && Some(self.waves[k - 1].speed_hi) == self.av_speed =>
            {
                self.waves[k - 1].left
            }
            k => self.waves[k - 1].right,
        }
    }
}

/// A flux discretisation the Riemann construction can run on.
pub trait RiemannFlux {
    type State: Copy + PartialEq + std::fmt::Debug;
    type Speed: Copy + std::fmt::Debug;

    fn model(&self) -> &FluxModel;
    fn density(&self, s: Self::State) -> f64;
    fn speed_value(&self, u: Self::Speed) -> f64;
    /// Entropy solution without the AV, ordered left to right.
    fn classical_waves(&self, l: Self::State, r: Self::State) -> Vec<Wave<Self::State>>;
    /// State inside a fan at similarity coordinate `xi`.
    fn fan_state(&self, wave: &Wave<Self::State>, xi: f64) -> Self::State;
    /// `(ρ̌_u, ρ̂_u)`
    fn band(&self, u: Self::Speed) -> (Self::State, Self::State);
    fn strictly_in_band(&self, s: Self::State, u: Self::Speed) -> bool;

    fn speed_law(&self, s: Self::State) -> f64 {
        self.model().speed(self.density(s))
    }
}

/// Value of the self-similar profile at `xi⁺`: every wave whose leading speed
/// is within [`SPEED_TIE`] of `xi` or slower counts as already passed.
pub fn trace_at<F: RiemannFlux>(flux: &F, left: F::State, waves: &[Wave<F::State>], xi: f64) -> F::State {
    let mut state = left;
    for w in waves {
        if w.speed_hi <= xi + SPEED_TIE {
            state = w.right;
        } else if w.speed_lo <= xi + SPEED_TIE {
            return flux.fan_state(w, xi);
        } else {
            break;
        }
    }
    state
}

pub fn classical<F: RiemannFlux>(flux: &F, l: F::State, r: F::State) -> RiemannSolution<F::State> {
    RiemannSolution {
        left: l,
        right: r,
        waves: flux.classical_waves(l, r),
        av_speed: None,
        av_slot: 0,
        constrained: false,
    }
}

/// The constrained solver: undercompressive jump at `u` when the classical
/// trace at `u⁺` lies strictly inside the band, otherwise the classical
/// solution with the AV at the fixed point of `ẏ = min{u, v(trace(ẏ⁺))}`.
pub fn constrained<F: RiemannFlux>(
    flux: &F,
    u: F::Speed,
    l: F::State,
    r: F::State,
) -> Result<RiemannSolution<F::State>> {
    let speed = flux.speed_value(u);
    let waves = flux.classical_waves(l, r);
    let trace = trace_at(flux, l, &waves, speed);
    if flux.strictly_in_band(trace, u) {
        let (check, hat) = flux.band(u);
        let mut out = flux.classical_waves(l, hat);
        out.push(Wave {
            left: hat,
            right: check,
            kind: WaveKind::Undercompressive,
            speed_lo: speed,
            speed_hi: speed,
        });
        let av_slot = out.len();
        out.extend(flux.classical_waves(check, r));
        return Ok(RiemannSolution {
            left: l,
            right: r,
            waves: out,
            av_speed: Some(speed),
            av_slot,
            constrained: true,
        });
    }

    let ydot = av_fixed_point(flux, speed, l, &waves)
        .ok_or_else(|| Error::Internal(format!("no AV speed fixed point for u={speed}, states {l:?}|{r:?}")))?;
    let mut waves = waves;
    let mut av_slot = 0;
    for w in waves.iter_mut() {
        if w.speed_lo == w.speed_hi && (w.speed_hi - ydot).abs() <= SPEED_TIE {
            w.speed_lo = ydot;
            w.speed_hi = ydot;
        }
        if w.speed_hi <= ydot + SPEED_TIE {
            av_slot += 1;
        }
    }
    Ok(RiemannSolution {
        left: l,
        right: r,
        waves,
        av_speed: Some(ydot),
        av_slot,
        constrained: false,
    })
}

fn av_fixed_point<F: RiemannFlux>(flux: &F, u: f64, left: F::State, waves: &[Wave<F::State>]) -> Option<f64> {
    let law = |s: F::State| u.min(flux.speed_law(s));
    let consistent = |c: f64| (law(trace_at(flux, left, waves, c)) - c).abs() <= SPEED_TIE;
    let mut state = left;
    let candidate = law(state);
    if consistent(candidate) {
        return Some(candidate);
    }
    for w in waves {
        if w.speed_lo < w.speed_hi && w.speed_lo <= u && u <= w.speed_hi && consistent(u) {
            return Some(u);
        }
        state = w.right;
        let candidate = law(state);
        if consistent(candidate) {
            return Some(candidate);
        }
    }
    None
}

/// Evaluates the self-similar density profile at `xi = x/t`.
pub fn sample<F: RiemannFlux>(flux: &F, sol: &RiemannSolution<F::State>, xi: f64) -> f64 {
    let mut state = sol.left;
    for w in &sol.waves {
        if xi >= w.speed_hi {
            state = w.right;
        } else if xi > w.speed_lo {
            return flux.density(flux.fan_state(w, xi));
        } else {
            break;
        }
    }
    flux.density(state)
}

/// Real-valued densities with the exact flux.
#[derive(Clone, Copy, Debug)]
pub struct ExactFlux<'a> {
    model: &'a FluxModel,
}

impl<'a> ExactFlux<'a> {
    pub fn new(model: &'a FluxModel) -> Self {
        ExactFlux { model }
    }

    fn check_state(&self, rho: f64) -> Result<()> {
        let r = self.model.rho_max();
        if !(rho >= 0.0 && rho <= r) {
            return Err(Error::Domain(format!("density {rho} outside [0, {r}]")));
        }
        Ok(())
    }
}

impl RiemannFlux for ExactFlux<'_> {
    type State = f64;
    type Speed = f64;

    fn model(&self) -> &FluxModel {
        self.model
    }

    fn density(&self, s: f64) -> f64 {
        s
    }

    fn speed_value(&self, u: f64) -> f64 {
        u
    }

    fn classical_waves(&self, l: f64, r: f64) -> Vec<Wave<f64>> {
        if l < r {
            let s = (self.model.flux(l) - self.model.flux(r)) / (l - r);
            vec![Wave {
                left: l,
                right: r,
                kind: WaveKind::Shock,
                speed_lo: s,
                speed_hi: s,
            }]
        } else if l > r {
            vec![Wave {
                left: l,
                right: r,
                kind: WaveKind::Rarefaction,
                speed_lo: self.model.flux_prime(l),
                speed_hi: self.model.flux_prime(r),
            }]
        } else {
            Vec::new()
        }
    }

    fn fan_state(&self, wave: &Wave<f64>, xi: f64) -> f64 {
        self.model
            .flux_prime_inv(xi)
            .clamp(wave.right.min(wave.left), wave.right.max(wave.left))
    }

    fn band(&self, u: f64) -> (f64, f64) {
        let g = self.model.geometry_unchecked(u);
        (g.check_rho, g.hat_rho)
    }

    fn strictly_in_band(&self, s: f64, u: f64) -> bool {
        self.model.constraint_excess(u, s) > BAND_TOL
    }
}

/// Classical solver with the exact flux.
pub fn classical_riemann(model: &FluxModel, rho_l: f64, rho_r: f64) -> Result<RiemannSolution<f64>> {
    let flux = ExactFlux::new(model);
    flux.check_state(rho_l)?;
    flux.check_state(rho_r)?;
    Ok(classical(&flux, rho_l, rho_r))
}

/// Constrained solver with the exact flux.
pub fn constrained_riemann(model: &FluxModel, u: f64, rho_l: f64, rho_r: f64) -> Result<RiemannSolution<f64>> {
    let flux = ExactFlux::new(model);
    flux.check_state(rho_l)?;
    flux.check_state(rho_r)?;
    let geo = model.geometry_at(u)?;
    constrained(&flux, geo.u, rho_l, rho_r)
}

impl RiemannFlux for Grids {
    /// Density index.
    type State = usize;
    /// Speed index.
    type Speed = usize;

    fn model(&self) -> &FluxModel {
        Grids::model(self)
    }

    fn density(&self, s: usize) -> f64 {
        Grids::density(self, s)
    }

    fn speed_value(&self, u: usize) -> f64 {
        self.speed(u)
    }

    fn classical_waves(&self, l: usize, r: usize) -> Vec<Wave<usize>> {
        if l < r {
            let s = self.chord(l, r);
            vec![Wave {
                left: l,
                right: r,
                kind: WaveKind::Shock,
                speed_lo: s,
                speed_hi: s,
            }]
        } else {
            (r + 1..=l)
                .rev()
                .map(|i| {
                    let s = self.chord(i, i - 1);
                    Wave {
                        left: i,
                        right: i - 1,
                        kind: WaveKind::Rarefaction,
                        speed_lo: s,
                        speed_hi: s,
                    }
                })
                .collect()
        }
    }

    fn fan_state(&self, wave: &Wave<usize>, _xi: f64) -> usize {
        wave.right
    }

    fn band(&self, u: usize) -> (usize, usize) {
        (self.check_index(u), self.hat_index(u))
    }

    fn strictly_in_band(&self, s: usize, u: usize) -> bool {
        self.check_index(u) < s && s < self.hat_index(u)
    }
}

/// Case labels of the shock / rarefaction / constant analysis, computed
/// directly from the data without running the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CaseLabel {
    ConstantUc,
    ConstantFree,
    ConstantVehicleLimited,
    /// `σ < u`, right state in the band.
    ShockSlowerUc,
    ShockSlowerFree,
    ShockSlowerVehicleLimited,
    /// `σ > u`, left state in the band.
    ShockFasterUc,
    ShockFasterFree,
    ShockEqualUc,
    ShockEqualClassical,
    /// Fan slower than `u`, right state in the band, `ρ_l ≤ ρ̂_u`.
    RarefactionSlowerUcShock,
    /// Fan slower than `u`, right state in the band, `ρ_l > ρ̂_u`.
    RarefactionSlowerUcFan,
    RarefactionSlowerFree,
    RarefactionSlowerVehicleLimited,
    /// Fan faster than `u`, left state in the band, `ρ_r ≥ ρ̌_u`.
    RarefactionFasterUcShock,
    /// Fan faster than `u`, left state in the band, `ρ_r < ρ̌_u`.
    RarefactionFasterUcFan,
    RarefactionFasterFree,
    /// Fan straddles `u`: `ρ_l ≤ ρ̂_u`, `ρ_r ≥ ρ̌_u`.
    RarefactionStraddle1,
    /// `ρ_l > ρ̂_u`, `ρ_r ≥ ρ̌_u`.
    RarefactionStraddle2,
    /// `ρ_l ≤ ρ̂_u`, `ρ_r < ρ̌_u`.
    RarefactionStraddle3,
    /// `ρ_l > ρ̂_u`, `ρ_r < ρ̌_u`.
    RarefactionStraddle4,
}

/// What the solver must produce for a given label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedOutcome {
    /// Undercompressive jump, `ẏ = u`.
    Undercompressive,
    /// Classical waves, `ẏ = u`.
    Free,
    /// Classical waves, `ẏ = v(trace) < u`.
    VehicleLimited,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 21] = [
        CaseLabel::ConstantUc,
        CaseLabel::ConstantFree,
        CaseLabel::ConstantVehicleLimited,
        CaseLabel::ShockSlowerUc,
        CaseLabel::ShockSlowerFree,
        CaseLabel::ShockSlowerVehicleLimited,
        CaseLabel::ShockFasterUc,
        CaseLabel::ShockFasterFree,
        CaseLabel::ShockEqualUc,
        CaseLabel::ShockEqualClassical,
        CaseLabel::RarefactionSlowerUcShock,
        CaseLabel::RarefactionSlowerUcFan,
        CaseLabel::RarefactionSlowerFree,
        CaseLabel::RarefactionSlowerVehicleLimited,
        CaseLabel::RarefactionFasterUcShock,
        CaseLabel::RarefactionFasterUcFan,
        CaseLabel::RarefactionFasterFree,
        CaseLabel::RarefactionStraddle1,
        CaseLabel::RarefactionStraddle2,
        CaseLabel::RarefactionStraddle3,
        CaseLabel::RarefactionStraddle4,
    ];

    /// Classifies `(u, ρ_l, ρ_r)`. Fails only for out-of-range input.
    pub fn classify(model: &FluxModel, u: f64, rho_l: f64, rho_r: f64) -> Result<CaseLabel> {
        let g = model.geometry_at(u)?;
        let u = g.u;
        let in_band = |rho: f64| model.constraint_excess(u, rho) > BAND_TOL;
        let slow_vehicle = |rho: f64| model.speed(rho) < u;
        use CaseLabel::*;
        let label = if rho_l == rho_r {
            if in_band(rho_r) {
                ConstantUc
            } else if slow_vehicle(rho_r) {
                ConstantVehicleLimited
            } else {
                ConstantFree
            }
        } else if rho_l < rho_r {
            let sigma = (model.flux(rho_l) - model.flux(rho_r)) / (rho_l - rho_r);
            if sigma < u - SPEED_TIE {
                if in_band(rho_r) {
                    ShockSlowerUc
                } else if slow_vehicle(rho_r) {
                    ShockSlowerVehicleLimited
                } else {
                    ShockSlowerFree
                }
            } else if sigma > u + SPEED_TIE {
                if in_band(rho_l) {
                    ShockFasterUc
                } else {
                    ShockFasterFree
                }
            } else if in_band(rho_r) {
                ShockEqualUc
            } else {
                ShockEqualClassical
            }
        } else {
            let sigma_l = model.flux_prime(rho_l);
            let sigma_r = model.flux_prime(rho_r);
            if sigma_r <= u + SPEED_TIE {
                if in_band(rho_r) {
                    if rho_l <= g.hat_rho {
                        RarefactionSlowerUcShock
                    } else {
                        RarefactionSlowerUcFan
                    }
                } else if slow_vehicle(rho_r) {
                    RarefactionSlowerVehicleLimited
                } else {
                    RarefactionSlowerFree
                }
            } else if sigma_l > u + SPEED_TIE {
                if in_band(rho_l) {
                    if rho_r >= g.check_rho {
                        RarefactionFasterUcShock
                    } else {
                        RarefactionFasterUcFan
                    }
                } else {
                    RarefactionFasterFree
                }
            } else {
                match (rho_l <= g.hat_rho, rho_r >= g.check_rho) {
                    (true, true) => RarefactionStraddle1,
                    (false, true) => RarefactionStraddle2,
                    (true, false) => RarefactionStraddle3,
                    (false, false) => RarefactionStraddle4,
                }
            }
        };
        Ok(label)
    }

    pub fn expected(self, model: &FluxModel, u: f64) -> ExpectedOutcome {
        use CaseLabel::*;
        match self {
            ConstantUc
            | ShockSlowerUc
            | ShockFasterUc
            | ShockEqualUc
            | RarefactionSlowerUcShock
            | RarefactionSlowerUcFan
            | RarefactionFasterUcShock
            | RarefactionFasterUcFan => ExpectedOutcome::Undercompressive,
            RarefactionStraddle1 | RarefactionStraddle2 | RarefactionStraddle3 | RarefactionStraddle4 => {
                // At u = V the band is empty and the AV simply rides the fan edge.
                if u >= model.v_max() {
                    ExpectedOutcome::Free
                } else {
                    ExpectedOutcome::Undercompressive
                }
            }
            ConstantVehicleLimited | ShockSlowerVehicleLimited | RarefactionSlowerVehicleLimited => {
                ExpectedOutcome::VehicleLimited
            }
            ConstantFree
            | ShockSlowerFree
            | ShockFasterFree
            | ShockEqualClassical
            | RarefactionSlowerFree
            | RarefactionFasterFree => ExpectedOutcome::Free,
        }
    }
}

/// Structural checks on an exact-flux solution. Returns one message per
/// violated property; an empty list means the solution is admissible.
pub fn audit_solution(model: &FluxModel, u: f64, sol: &RiemannSolution<f64>) -> Vec<String> {
    let mut issues = Vec::new();
    let mut state = sol.left;
    let mut last_speed = f64::NEG_INFINITY;
    for (i, w) in sol.waves.iter().enumerate() {
        if w.left != state {
            issues.push(format!("wave {i} does not start at the previous state"));
        }
        state = w.right;
        if w.speed_lo < last_speed - SPEED_TIE || w.speed_hi < w.speed_lo {
            issues.push(format!("wave {i} speeds out of order"));
        }
        last_speed = w.speed_hi;
        match w.kind {
            WaveKind::Shock => {
                if !(w.left < w.right) {
                    issues.push(format!("shock {i} is not entropy admissible"));
                }
                let residual = (w.speed_hi * (w.left - w.right) - (model.flux(w.left) - model.flux(w.right))).abs();
                if residual > 1e-12 {
                    issues.push(format!("shock {i} Rankine-Hugoniot residual {residual:e}"));
                }
            }
            WaveKind::Rarefaction => {
                if !(w.left > w.right) {
                    issues.push(format!("fan {i} is not decreasing"));
                }
                if (w.speed_lo - model.flux_prime(w.left)).abs() > 1e-12
                    || (w.speed_hi - model.flux_prime(w.right)).abs() > 1e-12
                {
                    issues.push(format!("fan {i} edges are not characteristic"));
                }
            }
            WaveKind::Undercompressive => {
                let g = model.geometry_unchecked(u);
                if !sol.constrained || w.left != g.hat_rho || w.right != g.check_rho || w.speed_hi != u {
                    issues.push(format!("undercompressive wave {i} has wrong states or speed"));
                }
                let defect = model.flux(w.left) - u * w.left - g.capacity;
                if defect.abs() > 1e-10 {
                    issues.push(format!("undercompressive wave {i} constraint defect {defect:e}"));
                }
            }
        }
    }
    if state != sol.right {
        issues.push("waves do not end at the right state".into());
    }
    let Some(ydot) = sol.av_speed else {
        return issues;
    };
    if !(0.0..=model.v_max()).contains(&ydot) {
        issues.push(format!("AV speed {ydot} outside [0, V]"));
    }
    let flux = ExactFlux::new(model);
    let right = sol.right_trace();
    let left = sol.left_trace();
    let cap = model.capacity(ydot);
    for (side, rho) in [("left", left), ("right", right)] {
        let excess = model.flux(rho) - ydot * rho - cap;
        if excess > 1e-10 {
            issues.push(format!("{side} trace {rho} violates the AV constraint by {excess:e}"));
        }
    }
    if sol.constrained {
        if ydot != u {
            issues.push("constrained solution must move at u".into());
        }
    } else {
        let expected = u.min(model.speed(right));
        let inside = trace_at(&flux, sol.left, &sol.waves, ydot);
        if (expected - ydot).abs() > 1e-12 && (u.min(model.speed(inside)) - ydot).abs() > 1e-12 {
            issues.push(format!("AV speed {ydot} differs from min(u, v(trace)) = {expected}"));
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs() -> FluxModel {
        FluxModel::greenshields(1.0, 1.0, 0.75).unwrap()
    }

    #[test]
    fn classical_examples() {
        let m = gs();
        let s = classical_riemann(&m, 0.4, 0.6).unwrap();
        assert_eq!(s.waves.len(), 1);
        assert_eq!(s.waves[0].kind, WaveKind::Shock);
        assert!(s.waves[0].speed_hi.abs() < 1e-15);
        assert!(classical_riemann(&m, 0.3, 0.3).unwrap().waves.is_empty());
        let r = classical_riemann(&m, 0.8, 0.2).unwrap();
        assert_eq!(r.waves[0].kind, WaveKind::Rarefaction);
        assert!((r.waves[0].speed_lo + 0.6).abs() < 1e-15);
        assert!((r.waves[0].speed_hi - 0.6).abs() < 1e-15);
        assert!(classical_riemann(&m, -0.1, 0.5).is_err());
    }

    #[test]
    fn worked_constrained_example() {
        let m = gs();
        let s = constrained_riemann(&m, 0.1, 0.4, 0.6).unwrap();
        assert!(s.constrained);
        assert_eq!(s.av_speed, Some(0.1));
        assert_eq!(s.waves.len(), 3);
        let w = &s.waves;
        assert_eq!(w[0].kind, WaveKind::Shock);
        assert!((w[0].speed_hi + 0.075).abs() < 1e-12);
        assert!((w[0].right - 0.675).abs() < 1e-12);
        assert_eq!(w[1].kind, WaveKind::Undercompressive);
        assert!((w[1].left - 0.675).abs() < 1e-12 && (w[1].right - 0.225).abs() < 1e-12);
        assert!((w[2].speed_hi - 0.175).abs() < 1e-12);
        assert_eq!(s.av_slot, 2);
        assert!(audit_solution(&m, 0.1, &s).is_empty());
    }

    #[test]
    fn vehicle_limited_shock() {
        let m = gs();
        let s = constrained_riemann(&m, 0.1, 0.05, 0.95).unwrap();
        assert!(!s.constrained);
        assert!((s.av_speed.unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(
            CaseLabel::classify(&m, 0.1, 0.05, 0.95).unwrap(),
            CaseLabel::ShockSlowerVehicleLimited
        );
        assert!(audit_solution(&m, 0.1, &s).is_empty());
    }

    #[test]
    fn constant_data_outside_band() {
        let m = gs();
        let s = constrained_riemann(&m, 0.5, 0.1, 0.1).unwrap();
        assert!(s.waves.is_empty());
        assert_eq!(s.av_speed, Some(0.5));
        let s = constrained_riemann(&m, 0.5, 0.9, 0.9).unwrap();
        assert!((s.av_speed.unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn av_rides_fan_at_u() {
        let m = gs();
        // Fan from 0.9 to 0.0 straddles u = 1 where the band is empty.
        let s = constrained_riemann(&m, 1.0, 0.9, 0.0).unwrap();
        assert!(!s.constrained);
        assert_eq!(s.av_speed, Some(1.0));
        assert!(audit_solution(&m, 1.0, &s).is_empty());
    }

    #[test]
    fn grid_solver_matches_worked_example() {
        let m = gs();
        let g = Grids::build(&m, 2).unwrap();
        // u = 1/6 is a grid speed: ρ̌ = 5/24, ρ̂ = 5/8.
        let k = 1;
        let l = g.density_index(0.375).unwrap();
        let r = g.density_index(0.5).unwrap();
        let s = constrained(&g, k, l, r).unwrap();
        assert!(s.constrained);
        let uc = s.waves[s.av_slot - 1];
        assert_eq!(uc.kind, WaveKind::Undercompressive);
        assert!((g.density(uc.left) - 0.625).abs() < 1e-12);
        assert!((g.density(uc.right) - 5.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn grid_fan_is_staircase() {
        let g = Grids::build(&gs(), 2).unwrap();
        let l = g.density_index(0.875).unwrap();
        let r = g.density_index(0.5).unwrap();
        let s = classical(&g, l, r);
        assert_eq!(s.waves.len(), l - r);
        for w in s.waves.windows(2) {
            assert!(w[0].speed_hi < w[1].speed_hi);
        }
    }

    #[test]
    fn sample_is_self_similar() {
        let m = gs();
        let s = constrained_riemann(&m, 0.3, 0.9, 0.1).unwrap();
        let f = ExactFlux::new(&m);
        for &xi in &[-0.9, -0.2, 0.0, 0.3, 0.31, 0.7] {
            let a = sample(&f, &s, xi);
            let b = sample(&f, &s, (2.5 * xi) / 2.5);
            assert_eq!(a, b);
        }
    }
}
