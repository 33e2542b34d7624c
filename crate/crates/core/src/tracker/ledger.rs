//! Bookkeeping of the Glimm-type functional
//! `Υ = TV(ρ) + 2R + γ + (6/β)·TV(u; (t, ∞))`.

use serde::Serialize;

/// Absolute slack used in every ledger comparison.
pub const LEDGER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Init,
    /// Classical fronts meeting away from the AV.
    Collision,
    /// At least one front reaching the AV.
    AvInteraction,
    ControlJump,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Init => "init",
            EventKind::Collision => "collision",
            EventKind::AvInteraction => "av_interaction",
            EventKind::ControlJump => "control_jump",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "init" => Some(EventKind::Init),
            "collision" => Some(EventKind::Collision),
            "av_interaction" => Some(EventKind::AvInteraction),
            "control_jump" => Some(EventKind::ControlJump),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub index: usize,
    pub t: f64,
    pub kind: EventKind,
    pub tv: f64,
    pub gamma: f64,
    /// `TV(u; (t, ∞))` after the event.
    pub tv_u: f64,
    pub upsilon: f64,
    pub waves: usize,
    pub delta_upsilon: f64,
}

/// Outcome of testing one event against the interaction estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Υ dropped by at least the quantum.
    StrictDecrease,
    /// Υ unchanged and the wave count did not grow.
    Neutral,
    Violation,
}

/// The quantum `min{δ_ρ, 6δ_u/β}` by which Υ must drop when it drops at all.
pub fn decrease_quantum(delta_rho: f64, delta_u: f64, beta: f64) -> f64 {
    delta_rho.min(6.0 * delta_u / beta)
}

pub fn judge(delta_upsilon: f64, waves_before: usize, waves_after: usize, quantum: f64) -> Verdict {
    if delta_upsilon > LEDGER_TOL {
        Verdict::Violation
    } else if delta_upsilon <= -quantum + LEDGER_TOL {
        Verdict::StrictDecrease
    } else if delta_upsilon.abs() <= LEDGER_TOL && waves_after <= waves_before {
        Verdict::Neutral
    } else {
        Verdict::Violation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let q = 0.01;
        assert_eq!(judge(-0.02, 3, 5, q), Verdict::StrictDecrease);
        assert_eq!(judge(0.0, 3, 3, q), Verdict::Neutral);
        assert_eq!(judge(0.0, 3, 4, q), Verdict::Violation);
        assert_eq!(judge(-0.005, 3, 3, q), Verdict::Violation);
        assert_eq!(judge(1e-6, 3, 2, q), Verdict::Violation);
    }

    #[test]
    fn quantum_uses_smaller_term() {
        assert_eq!(decrease_quantum(0.1, 0.01, 2.0), 0.03);
        assert_eq!(decrease_quantum(0.01, 0.1, 2.0), 0.01);
    }
}
