//! Concave traffic flux, the reduced flux of the bottleneck and the derived
//! geometry `(ρ̃_u, ρ̌_u, ρ̂_u, ρ*_u, F_α(u))`.
//!
//! For a control speed `u`, the support line `φ_u(ρ) = F_α(u) + uρ` touches the
//! reduced flux `f_α(ρ) = α f(ρ/α)` at `ρ̃_u` and cuts the full flux `f` at
//! `ρ̌_u < ρ̂_u`. The AV can only pass traffic whose flux relative to the AV
//! does not exceed `F_α(u)`; the band `]ρ̌_u, ρ̂_u[` is exactly the set of
//! states for which that fails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::solve_bracketed;

/// Closed-form flux families with analytic first and second derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FluxFamily {
    /// `f(ρ) = Vρ(1 − ρ/R)`.
    Greenshields,
    /// `f(ρ) = VR·x(1 − x)(1 + c·x)` with `x = ρ/R` and `c ∈ ]−1/2, 1[`.
    SkewedCubic { skew: f64 },
}

impl FluxFamily {
    pub fn name(&self) -> &'static str {
        match self {
            FluxFamily::Greenshields => "greenshields",
            FluxFamily::SkewedCubic { .. } => "skewed_cubic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluxModel {
    family: FluxFamily,
    rho_max: f64,
    v_max: f64,
    alpha: f64,
    beta: f64,
    big_b: f64,
    rho_crit: f64,
}

impl FluxModel {
    pub fn greenshields(rho_max: f64, v_max: f64, alpha: f64) -> Result<Self> {
        Self::new(FluxFamily::Greenshields, rho_max, v_max, alpha)
    }

    pub fn skewed_cubic(rho_max: f64, v_max: f64, skew: f64, alpha: f64) -> Result<Self> {
        Self::new(FluxFamily::SkewedCubic { skew }, rho_max, v_max, alpha)
    }

    /// Builds a model with the family's analytic concavity bounds.
    pub fn new(family: FluxFamily, rho_max: f64, v_max: f64, alpha: f64) -> Result<Self> {
        if !(rho_max.is_finite() && rho_max > 0.0) {
            return Err(Error::Model(format!("R must be positive, got {rho_max}")));
        }
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(Error::Model(format!("V must be positive, got {v_max}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Model(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let scale = v_max / rho_max;
        let (beta, big_b) = match family {
            FluxFamily::Greenshields => (2.0 * scale, 2.0 * scale),
            FluxFamily::SkewedCubic { skew } => {
                if !(skew > -0.5 && skew < 1.0) {
                    return Err(Error::Model(format!(
                        "skewed_cubic needs skew in (-1/2, 1) for strict concavity, got {skew}"
                    )));
                }
                let at_zero = 2.0 * (1.0 - skew);
                let at_max = 2.0 + 4.0 * skew;
                (scale * at_zero.min(at_max), scale * at_zero.max(at_max))
            }
        };
        let mut model = FluxModel {
            family,
            rho_max,
            v_max,
            alpha,
            beta,
            big_b,
            rho_crit: 0.0,
        };
        model.rho_crit = model.flux_prime_inv(0.0);
        model.check_hypotheses()?;
        Ok(model)
    }

    /// Replaces the concavity bounds with user-supplied values, which must
    /// bracket the sampled second derivative.
    pub fn with_concavity_bounds(mut self, beta: f64, big_b: f64) -> Result<Self> {
        if !(beta > 0.0 && big_b >= beta) {
            return Err(Error::Model(format!("need 0 < beta <= B, got beta={beta}, B={big_b}")));
        }
        self.beta = beta;
        self.big_b = big_b;
        self.check_hypotheses()?;
        Ok(self)
    }

    /// Sampling check of the standing assumptions on `f`: endpoints vanish,
    /// `−B ≤ f'' ≤ −β` and `v` strictly decreasing.
    pub fn check_hypotheses(&self) -> Result<()> {
        let scale = self.v_max * self.rho_max;
        if self.flux(0.0).abs() > 1e-12 * scale || self.flux(self.rho_max).abs() > 1e-12 * scale {
            return Err(Error::Model("f(0) and f(R) must vanish".into()));
        }
        let n = 1000;
        let mut prev_v = f64::INFINITY;
        for i in 0..=n {
            let rho = self.rho_max * i as f64 / n as f64;
            let second = self.flux_second(rho);
            if second < -self.big_b - 1e-9 || second > -self.beta + 1e-9 {
                return Err(Error::Model(format!(
                    "f''({rho}) = {second} outside [-B, -beta] = [{}, {}]",
                    -self.big_b, -self.beta
                )));
            }
            if i < n {
                let v = self.speed(rho);
                if v >= prev_v {
                    return Err(Error::Model(format!("v is not decreasing near rho={rho}")));
                }
                prev_v = v;
            }
        }
        Ok(())
    }

    pub fn family(&self) -> FluxFamily {
        self.family
    }
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }
    pub fn v_max(&self) -> f64 {
        self.v_max
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn big_b(&self) -> f64 {
        self.big_b
    }
    /// Density of maximal flux.
    pub fn rho_crit(&self) -> f64 {
        self.rho_crit
    }
    /// Bound on `|f'|` over `[0, R]`.
    pub fn lipschitz(&self) -> f64 {
        self.flux_prime(0.0).abs().max(self.flux_prime(self.rho_max).abs())
    }

    pub fn flux(&self, rho: f64) -> f64 {
        let x = rho / self.rho_max;
        match self.family {
            FluxFamily::Greenshields => self.v_max * rho * (1.0 - x),
            FluxFamily::SkewedCubic { skew } => self.v_max * rho * (1.0 - x) * (1.0 + skew * x),
        }
    }

    pub fn flux_prime(&self, rho: f64) -> f64 {
        let x = rho / self.rho_max;
        match self.family {
            FluxFamily::Greenshields => self.v_max * (1.0 - 2.0 * x),
            FluxFamily::SkewedCubic { skew } => self.v_max * (1.0 + 2.0 * (skew - 1.0) * x - 3.0 * skew * x * x),
        }
    }

    pub fn flux_second(&self, rho: f64) -> f64 {
        let x = rho / self.rho_max;
        let scale = self.v_max / self.rho_max;
        match self.family {
            FluxFamily::Greenshields => -2.0 * scale,
            FluxFamily::SkewedCubic { skew } => scale * (2.0 * (skew - 1.0) - 6.0 * skew * x),
        }
    }

    /// Speed law `v(ρ) = f(ρ)/ρ`, extended by `v(0) = V`.
    pub fn speed(&self, rho: f64) -> f64 {
        let x = rho / self.rho_max;
        match self.family {
            FluxFamily::Greenshields => self.v_max * (1.0 - x),
            FluxFamily::SkewedCubic { skew } => self.v_max * (1.0 - x) * (1.0 + skew * x),
        }
    }

    /// Inverse of `f'`, clamped to `[0, R]`.
    pub fn flux_prime_inv(&self, slope: f64) -> f64 {
        let lo_slope = self.flux_prime(self.rho_max);
        if slope >= self.v_max {
            return 0.0;
        }
        if slope <= lo_slope {
            return self.rho_max;
        }
        match self.family {
            FluxFamily::Greenshields => 0.5 * self.rho_max * (1.0 - slope / self.v_max),
            FluxFamily::SkewedCubic { .. } => solve_bracketed(
                |r| self.flux_prime(r) - slope,
                |r| self.flux_second(r),
                0.0,
                self.rho_max,
            ),
        }
    }

    /// `ρ*_u = v⁻¹(u)`.
    pub fn speed_inv(&self, u: f64) -> f64 {
        if u >= self.v_max {
            return 0.0;
        }
        if u <= 0.0 {
            return self.rho_max;
        }
        match self.family {
            FluxFamily::Greenshields => self.rho_max * (1.0 - u / self.v_max),
            FluxFamily::SkewedCubic { skew } => {
                let r = self.rho_max;
                let vm = self.v_max;
                solve_bracketed(
                    |rho| self.speed(rho) - u,
                    |rho| {
                        let x = rho / r;
                        vm / r * (-(1.0 + skew * x) + skew * (1.0 - x))
                    },
                    0.0,
                    r,
                )
            }
        }
    }

    /// Reduced flux `f_α(ρ) = α f(ρ/α)` on `[0, αR]`.
    pub fn reduced_flux(&self, rho: f64) -> f64 {
        self.alpha * self.flux(rho / self.alpha)
    }

    /// Flux capacity `F_α(u)` past an AV moving at `u`.
    pub fn capacity(&self, u: f64) -> f64 {
        let z = self.flux_prime_inv(u);
        (self.alpha * (self.flux(z) - u * z)).max(0.0)
    }

    /// `f(ρ) − uρ − F_α(u)`: positive exactly inside the band `]ρ̌_u, ρ̂_u[`.
    pub fn constraint_excess(&self, u: f64, rho: f64) -> f64 {
        self.flux(rho) - u * rho - self.capacity(u)
    }

    fn check_domain(&self, u: f64) -> Result<f64> {
        let slack = 1e-12 * self.v_max;
        if !u.is_finite() || u < -slack || u > self.v_max + slack {
            return Err(Error::Domain(format!("control speed {u} outside [0, {}]", self.v_max)));
        }
        Ok(u.clamp(0.0, self.v_max))
    }

    /// All bottleneck quantities at control speed `u ∈ [0, V]`.
    pub fn geometry_at(&self, u: f64) -> Result<BottleneckGeometry> {
        let u = self.check_domain(u)?;
        Ok(self.geometry_unchecked(u))
    }

    pub(crate) fn geometry_unchecked(&self, u: f64) -> BottleneckGeometry {
        if u >= self.v_max {
            return BottleneckGeometry {
                u,
                tilde_rho: 0.0,
                check_rho: 0.0,
                hat_rho: 0.0,
                star_rho: 0.0,
                capacity: 0.0,
            };
        }
        // The maximiser of f(ρ) − uρ is ρ̃_u/α.
        let peak = self.flux_prime_inv(u);
        let capacity = (self.alpha * (self.flux(peak) - u * peak)).max(0.0);
        let excess = |r: f64| self.flux(r) - u * r - capacity;
        let slope = |r: f64| self.flux_prime(r) - u;
        let check_rho = if capacity == 0.0 {
            0.0
        } else {
            solve_bracketed(excess, slope, 0.0, peak)
        };
        let hat_rho = solve_bracketed(excess, slope, peak, self.rho_max);
        BottleneckGeometry {
            u,
            tilde_rho: self.alpha * peak,
            check_rho,
            hat_rho,
            star_rho: self.speed_inv(u),
            capacity,
        }
    }

    pub fn check_rho(&self, u: f64) -> f64 {
        self.geometry_unchecked(u.clamp(0.0, self.v_max)).check_rho
    }

    pub fn hat_rho(&self, u: f64) -> f64 {
        self.geometry_unchecked(u.clamp(0.0, self.v_max)).hat_rho
    }

    /// Slopes `(ρ̌'(u), ρ̂'(u))` from implicit differentiation of the defect
    /// identities. Valid for `u < V`.
    pub fn map_derivatives(&self, u: f64) -> (f64, f64) {
        let g = self.geometry_unchecked(u);
        let d_check = (g.check_rho - g.tilde_rho) / (self.flux_prime(g.check_rho) - u);
        let d_hat = (g.hat_rho - g.tilde_rho) / (self.flux_prime(g.hat_rho) - u);
        (d_check, d_hat)
    }

    /// Solves `ρ̂(u) = rho` for `u`. `rho` is clamped to `[0, ρ̂_0]`.
    pub fn hat_inverse(&self, rho: f64) -> f64 {
        let top = self.hat_rho(0.0);
        if rho >= top {
            return 0.0;
        }
        if rho <= 0.0 {
            return self.v_max;
        }
        solve_bracketed(
            |u| self.hat_rho(u) - rho,
            |u| self.map_derivatives(u).1,
            0.0,
            self.v_max,
        )
    }

    /// Solves `ρ̌(u) = rho` for `u`. `rho` is clamped to `[0, ρ̌_0]`.
    pub fn check_inverse(&self, rho: f64) -> f64 {
        let top = self.check_rho(0.0);
        if rho >= top {
            return 0.0;
        }
        if rho <= 0.0 {
            return self.v_max;
        }
        solve_bracketed(
            |u| self.check_rho(u) - rho,
            |u| self.map_derivatives(u).0,
            0.0,
            self.v_max,
        )
    }

    /// The increasing sequence `ω₀ = 0`, `ω_{n+1} = ρ̂⁻¹(ρ̌(ω_n))`, stopped
    /// at the first term within `tol` of `V`.
    pub fn omega_sequence(&self, tol: f64) -> Result<Vec<f64>> {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let mut seq = vec![0.0];
        for _ in 0..1_000_000 {
            let last = *seq.last().unwrap();
            let next = self.hat_inverse(self.check_rho(last));
            if next <= last {
                return Err(Error::Internal(format!(
                    "omega sequence stalled at {last} (next {next})"
                )));
            }
            seq.push(next);
            if self.v_max - next < tol {
                return Ok(seq);
            }
        }
        Err(Error::Internal(
            "omega sequence did not approach V within 1e6 steps".into(),
        ))
    }

    /// Finite-difference check of the monotonicity and slope bounds of
    /// `u ↦ ρ̌_u` and `u ↦ ρ̂_u` on a uniform sampling of `[0, V]`.
    pub fn check_map_derivative_bounds(&self, samples: usize) -> Result<DerivativeReport> {
        if samples < 2 {
            return Err(Error::Domain("need at least two samples".into()));
        }
        let tol = 1e-9;
        let us: Vec<f64> = (0..samples)
            .map(|i| self.v_max * i as f64 / (samples - 1) as f64)
            .collect();
        let geo: Vec<BottleneckGeometry> = us.iter().map(|&u| self.geometry_unchecked(u)).collect();
        let mut report = DerivativeReport {
            check_slope_range: (f64::INFINITY, f64::NEG_INFINITY),
            hat_slope_range: (f64::INFINITY, f64::NEG_INFINITY),
            violations: Vec::new(),
        };
        for w in geo.windows(2) {
            let du = w[1].u - w[0].u;
            let check = (w[1].check_rho - w[0].check_rho) / du;
            let hat = (w[1].hat_rho - w[0].hat_rho) / du;
            report.check_slope_range.0 = report.check_slope_range.0.min(check);
            report.check_slope_range.1 = report.check_slope_range.1.max(check);
            report.hat_slope_range.0 = report.hat_slope_range.0.min(hat);
            report.hat_slope_range.1 = report.hat_slope_range.1.max(hat);
            if !(check >= -1.0 / self.beta - tol && check < 0.0) {
                report.violations.push(DerivativeViolation {
                    map: MapName::Check,
                    u: w[0].u,
                    slope: check,
                });
            }
            if !(hat.is_finite() && hat < -1.0 / self.big_b + tol) {
                report.violations.push(DerivativeViolation {
                    map: MapName::Hat,
                    u: w[0].u,
                    slope: hat,
                });
            }
        }
        Ok(report)
    }

    /// Which of the two admissible orderings of the bands at `u1 < u2` holds.
    pub fn band_relation(&self, u1: f64, u2: f64) -> Result<BandRelation> {
        if !(u1 < u2) {
            return Err(Error::Domain(format!("need u1 < u2, got {u1}, {u2}")));
        }
        let a = self.geometry_at(u1)?;
        let b = self.geometry_at(u2)?;
        if b.check_rho < a.check_rho && a.check_rho < b.hat_rho && b.hat_rho < a.hat_rho {
            Ok(BandRelation::Overlapping)
        } else if b.check_rho <= b.hat_rho && b.hat_rho <= a.check_rho && a.check_rho < a.hat_rho {
            Ok(BandRelation::Disjoint)
        } else {
            Err(Error::Internal(format!(
                "band ordering violated for u1={u1}, u2={u2}: {a:?} vs {b:?}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BottleneckGeometry {
    pub u: f64,
    pub tilde_rho: f64,
    pub check_rho: f64,
    pub hat_rho: f64,
    pub star_rho: f64,
    /// `F_α(u)`, in vehicles per unit time.
    pub capacity: f64,
}

impl BottleneckGeometry {
    /// True when `rho` lies strictly inside the band where the AV constraint fails.
    pub fn in_band(&self, rho: f64) -> bool {
        self.check_rho < rho && rho < self.hat_rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandRelation {
    /// `ρ̌(u₂) < ρ̌(u₁) < ρ̂(u₂) < ρ̂(u₁)`
    Overlapping,
    /// `ρ̌(u₂) ≤ ρ̂(u₂) ≤ ρ̌(u₁) < ρ̂(u₁)`
    Disjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapName {
    Check,
    Hat,
}

#[derive(Clone, Debug)]
pub struct DerivativeViolation {
    pub map: MapName,
    pub u: f64,
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct DerivativeReport {
    pub check_slope_range: (f64, f64),
    pub hat_slope_range: (f64, f64),
    pub violations: Vec<DerivativeViolation>,
}
