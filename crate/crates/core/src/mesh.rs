//! Coupled density and speed grids, the piecewise-linear flux built on them
//! and the projections of data onto the grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::profile::StepFunction;

const DEDUP_TOL: f64 = 1e-12;
const CLOSURE_TOL: f64 = 1e-10;

/// Piecewise-constant open-loop control `u(t)` on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ControlSignal {
    pub fn constant(u: f64) -> Self {
        ControlSignal {
            times: vec![0.0],
            values: vec![u],
        }
    }

    /// Breakpoints `(t_i, u_i)` with `t_0 = 0`; `u_i` holds on `[t_i, t_{i+1})`.
    pub fn from_breakpoints(points: &[(f64, f64)]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Validation("control needs at least one breakpoint".into()));
        };
        if first.0 != 0.0 {
            return Err(Error::Validation(format!(
                "control must start at t=0, first breakpoint is at t={}",
                first.0
            )));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[0].0 < w[1].0) {
                return Err(Error::Validation(format!(
                    "control breakpoint {} at t={} does not follow t={}",
                    i + 1,
                    w[1].0,
                    w[0].0
                )));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.0.is_finite() && p.1.is_finite() && p.1 >= 0.0) {
                return Err(Error::Validation(format!(
                    "control breakpoint {i} ({}, {}) is invalid",
                    p.0, p.1
                )));
            }
        }
        Ok(ControlSignal {
            times: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        self.values[i.saturating_sub(1)]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Variation from jumps at times strictly after `t`.
    pub fn variation_after(&self, t: f64) -> f64 {
        self.jumps()
            .filter(|&(s, _, _)| s > t)
            .map(|(_, a, b)| (b - a).abs())
            .sum()
    }

    /// Jump instants with their pre- and post-jump values.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.times[1..]
            .iter()
            .zip(self.values.windows(2))
            .map(|(&t, w)| (t, w[0], w[1]))
    }

    /// `∫_0^T |self − other| dt`.
    pub fn l1_distance(&self, other: &ControlSignal, horizon: f64) -> f64 {
        let mut cuts: Vec<f64> = self
            .times
            .iter()
            .chain(&other.times)
            .copied()
            .filter(|&t| t < horizon)
            .collect();
        cuts.push(horizon);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| (self.value_at(w[0]) - other.value_at(w[0])).abs() * (w[1] - w[0]))
            .sum()
    }
}

/// Concave interpolant of `f` through the density grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearFlux {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearFlux {
    pub fn new(model: &FluxModel, breakpoints: &[f64]) -> Self {
        PiecewiseLinearFlux {
            breakpoints: breakpoints.to_vec(),
            values: breakpoints.iter().map(|&r| model.flux(r)).collect(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let n = self.breakpoints.len();
        let i = self.breakpoints.partition_point(|&b| b <= rho).clamp(1, n - 1);
        let (r0, r1) = (self.breakpoints[i - 1], self.breakpoints[i]);
        let (f0, f1) = (self.values[i - 1], self.values[i]);
        f0 + (f1 - f0) * (rho - r0) / (r1 - r0)
    }

    /// Slope on segment `[ρ_i, ρ_{i+1}]`.
    pub fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / (self.breakpoints[i + 1] - self.breakpoints[i])
    }

    pub fn is_strictly_concave(&self) -> bool {
        (1..self.breakpoints.len() - 1).all(|i| self.slope(i) < self.slope(i - 1))
    }
}

/// The grids `M_ν ⊂ [0, R]` and `U_ν ⊂ [0, V]` together with their spacing
/// statistics and the index maps `u_k ↦ (ρ̌, ρ̂)`.
#[derive(Clone, Debug)]
pub struct Grids {
    nu: u32,
    model: FluxModel,
    densities: Vec<f64>,
    speeds: Vec<f64>,
    flux_values: Vec<f64>,
    j_nu: usize,
    check_idx: Vec<usize>,
    hat_idx: Vec<usize>,
    clipped: usize,
    stats: SpacingStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacingStats {
    pub delta_rho: f64,
    pub eps_rho: f64,
    pub delta_u: f64,
    pub eps_u: f64,
    /// `δ_ρ · 2^ν`
    pub c_rho: f64,
    /// `ε_ρ · 2^ν`
    pub big_c_rho: f64,
    /// `δ_u · 2^ν`
    pub c_u: f64,
    /// `ε_u · 2^ν`
    pub big_c_u: f64,
}

fn sort_dedup(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        match out.last() {
            Some(&last) if x - last <= DEDUP_TOL => {}
            _ => out.push(x),
        }
    }
    out
}

fn spacing(xs: &[f64]) -> (f64, f64) {
    xs.windows(2).fold((f64::INFINITY, 0.0f64), |(lo, hi), w| {
        let d = w[1] - w[0];
        (lo.min(d), hi.max(d))
    })
}

/// Index of the nearest entry of a sorted slice, ties going to the lower entry.
fn nearest_index(sorted: &[f64], x: f64) -> usize {
    let i = sorted.partition_point(|&s| s < x);
    if i == 0 {
        return 0;
    }
    if i == sorted.len() {
        return sorted.len() - 1;
    }
    if x - sorted[i - 1] <= sorted[i] - x {
        i - 1
    } else {
        i
    }
}

/// Grid indices bracketing `x`: equal when `x` sits on a grid point.
fn bracket(sorted: &[f64], x: f64) -> (usize, usize) {
    let n = sorted.len();
    let i = nearest_index(sorted, x);
    if (sorted[i] - x).abs() <= 1e-12 * sorted[n - 1].abs().max(1.0) {
        return (i, i);
    }
    let hi = sorted.partition_point(|&s| s < x).clamp(1, n - 1);
    (hi - 1, hi)
}

/// Lazy projection of a sequence onto a sorted grid: each output stays where
/// it was unless that leaves the grid cell of the current input, in which case
/// it moves to the nearest end of that cell. Of the two possible starts (either
/// end of the first cell) the one with smaller variation is returned; that
/// choice never has more variation than the input.
fn lazy_project(sorted: &[f64], xs: &[f64]) -> Vec<usize> {
    let Some(&first) = xs.first() else {
        return Vec::new();
    };
    let run = |start: usize| -> (Vec<usize>, f64) {
        let mut q = start;
        let mut tv = 0.0;
        let out = xs
            .iter()
            .map(|&x| {
                let (lo, hi) = bracket(sorted, x);
                let next = q.clamp(lo, hi);
                tv += (sorted[next] - sorted[q]).abs();
                q = next;
                q
            })
            .collect();
        (out, tv)
    };
    let (lo, hi) = bracket(sorted, first);
    let (a, tv_a) = run(lo);
    if lo == hi {
        return a;
    }
    let (b, tv_b) = run(hi);
    let nearer_hi = nearest_index(sorted, first) == hi;
    if tv_b < tv_a || (tv_b == tv_a && nearer_hi) {
        b
    } else {
        a
    }
}

impl Grids {
    pub fn build(model: &FluxModel, nu: u32) -> Result<Self> {
        if nu == 0 {
            return Err(Error::Domain("refinement index nu must be at least 1".into()));
        }
        if nu > 20 {
            return Err(Error::Domain(format!("refinement index nu={nu} is too large")));
        }
        let r_max = model.rho_max();
        let v_max = model.v_max();
        let scale = (0.5f64).powi(nu as i32);
        let parts = 1usize << nu;

        // Step 1: the chain u_j with ρ̂(u_j) = ρ̌(u_{j-1}), stopped once
        // V − u_{J+1} drops below 2^{-ν}.
        let mut chain = vec![0.0];
        loop {
            let last = *chain.last().unwrap();
            let next = model.hat_inverse(model.check_rho(last));
            if !(next > last) {
                return Err(Error::Internal(format!("speed chain stalled at {last}")));
            }
            if v_max - next < scale * v_max {
                chain.push(next);
                break;
            }
            chain.push(next);
            if chain.len() > 1_000_000 {
                return Err(Error::Internal("speed chain did not terminate".into()));
            }
        }
        let j_nu = chain.len() - 2;
        let u_next = chain[j_nu + 1];
        let u1 = chain[1];

        let mut rho_pts: Vec<f64> = vec![0.0, r_max];
        let mut u_pts: Vec<f64> = chain[..=j_nu].to_vec();
        u_pts.push(v_max);
        for &u in &chain[..=j_nu] {
            rho_pts.push(model.check_rho(u));
        }

        // Step 2: refine [0, u_1] and follow each refined speed up the chain.
        let mut clipped = 0;
        for k in 0..parts {
            let mut u = k as f64 * u1 * scale;
            rho_pts.push(model.hat_rho(u));
            rho_pts.push(model.check_rho(u));
            u_pts.push(u);
            for _ in 1..=j_nu {
                let next = model.hat_inverse(model.check_rho(u));
                if next > u_next {
                    clipped += 1;
                    break;
                }
                u = next;
                rho_pts.push(model.check_rho(u));
                u_pts.push(u);
            }
        }

        // Step 3: uniform refinement above ρ̂_0.
        let hat0 = model.hat_rho(0.0);
        for l in 1..=parts {
            rho_pts.push(hat0 + l as f64 * (r_max - hat0) * scale);
        }

        // Step 4: merge.
        let densities = sort_dedup(rho_pts);
        let speeds = sort_dedup(u_pts);

        let mut check_idx = Vec::with_capacity(speeds.len());
        let mut hat_idx = Vec::with_capacity(speeds.len());
        for &u in &speeds {
            let g = model.geometry_unchecked(u);
            let ci = nearest_index(&densities, g.check_rho);
            let hi = nearest_index(&densities, g.hat_rho);
            let miss = (densities[ci] - g.check_rho)
                .abs()
                .max((densities[hi] - g.hat_rho).abs());
            if miss > CLOSURE_TOL * r_max {
                return Err(Error::Internal(format!(
                    "grid closure failed at u={u}: distance {miss}"
                )));
            }
            check_idx.push(ci);
            hat_idx.push(hi);
        }

        let (delta_rho, eps_rho) = spacing(&densities);
        let (delta_u, eps_u) = spacing(&speeds);
        let factor = parts as f64;
        let stats = SpacingStats {
            delta_rho,
            eps_rho,
            delta_u,
            eps_u,
            c_rho: delta_rho * factor,
            big_c_rho: eps_rho * factor,
            c_u: delta_u * factor,
            big_c_u: eps_u * factor,
        };
        let flux_values = densities.iter().map(|&r| model.flux(r)).collect();
        Ok(Grids {
            nu,
            model: model.clone(),
            densities,
            speeds,
            flux_values,
            j_nu,
            check_idx,
            hat_idx,
            clipped,
            stats,
        })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }
    pub fn model(&self) -> &FluxModel {
        &self.model
    }
    pub fn densities(&self) -> &[f64] {
        &self.densities
    }
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }
    pub fn density(&self, i: usize) -> f64 {
        self.densities[i]
    }
    pub fn speed(&self, k: usize) -> f64 {
        self.speeds[k]
    }
    /// `f` at density index `i`.
    pub fn flux_at(&self, i: usize) -> f64 {
        self.flux_values[i]
    }
    pub fn j_nu(&self) -> usize {
        self.j_nu
    }
    /// Step-2 points that overshot `u_{J+1}` and were dropped.
    pub fn clipped(&self) -> usize {
        self.clipped
    }
    pub fn stats(&self) -> SpacingStats {
        self.stats
    }
    /// Density index of `ρ̌` at speed index `k`.
    pub fn check_index(&self, k: usize) -> usize {
        self.check_idx[k]
    }
    /// Density index of `ρ̂` at speed index `k`.
    pub fn hat_index(&self, k: usize) -> usize {
        self.hat_idx[k]
    }

    pub fn piecewise_flux(&self) -> PiecewiseLinearFlux {
        PiecewiseLinearFlux {
            breakpoints: self.densities.clone(),
            values: self.flux_values.clone(),
        }
    }

    /// Rankine–Hugoniot speed between two density indices (`i != j`).
    pub fn chord(&self, i: usize, j: usize) -> f64 {
        (self.flux_values[i] - self.flux_values[j]) / (self.densities[i] - self.densities[j])
    }

    fn check_density_range(&self, rho: f64) -> Result<()> {
        let r = self.model.rho_max();
        if !(rho >= -1e-12 * r && rho <= r * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("density {rho} outside [0, {r}]")));
        }
        Ok(())
    }

    pub fn density_index(&self, rho: f64) -> Result<usize> {
        self.check_density_range(rho)?;
        Ok(nearest_index(&self.densities, rho))
    }

    pub fn quantize_density(&self, rho: f64) -> Result<f64> {
        Ok(self.densities[self.density_index(rho)?])
    }

    pub fn speed_index(&self, u: f64) -> usize {
        nearest_index(&self.speeds, u)
    }

    /// Projects the values onto `U_ν` without increasing total variation; jumps
    /// that become trivial are removed. Each value lands on an end of its own
    /// grid cell.
    pub fn quantize_control(&self, control: &ControlSignal) -> ControlSignal {
        let mut times = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let idx = lazy_project(&self.speeds, &control.values);
        for (&t, &k) in control.times.iter().zip(&idx) {
            let q = self.speeds[k];
            if values.last() != Some(&q) {
                times.push(t);
                values.push(q);
            }
        }
        ControlSignal { times, values }
    }

    /// Projects a density profile onto `M_ν` piece by piece, in the same lazy
    /// way as [`Grids::quantize_control`], keeping jump locations.
    pub fn quantize_profile(&self, profile: &StepFunction) -> Result<StepFunction> {
        for &v in profile.values() {
            self.check_density_range(v)?;
        }
        let idx = lazy_project(&self.densities, profile.values());
        let values = idx.iter().map(|&i| self.densities[i]).collect();
        Ok(StepFunction::new(profile.jumps().to_vec(), values)?.simplified())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs() -> FluxModel {
        FluxModel::greenshields(1.0, 1.0, 0.75).unwrap()
    }

    #[test]
    fn greenshields_nu2_grid() {
        let g = Grids::build(&gs(), 2).unwrap();
        assert_eq!(g.j_nu(), 1);
        let expected_rho = [
            0.0,
            1.0 / 24.0,
            1.0 / 18.0,
            5.0 / 72.0,
            1.0 / 12.0,
            0.125,
            1.0 / 6.0,
            5.0 / 24.0,
            0.25,
            0.375,
            0.5,
            0.625,
            0.75,
            0.8125,
            0.875,
            0.9375,
            1.0,
        ];
        assert_eq!(g.densities().len(), expected_rho.len());
        for (a, b) in g.densities().iter().zip(expected_rho) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let expected_u = [
            0.0,
            1.0 / 6.0,
            1.0 / 3.0,
            0.5,
            2.0 / 3.0,
            13.0 / 18.0,
            7.0 / 9.0,
            5.0 / 6.0,
            1.0,
        ];
        assert_eq!(g.speeds().len(), expected_u.len());
        for (a, b) in g.speeds().iter().zip(expected_u) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(g.clipped(), 0);
    }

    #[test]
    fn grids_are_nested_and_closed() {
        let coarse = Grids::build(&gs(), 3).unwrap();
        let fine = Grids::build(&gs(), 4).unwrap();
        for &r in coarse.densities() {
            let q = fine.quantize_density(r).unwrap();
            assert!((q - r).abs() < 1e-10);
        }
        for k in 0..fine.speeds().len() {
            let geo = gs().geometry_at(fine.speed(k)).unwrap();
            assert!((fine.density(fine.check_index(k)) - geo.check_rho).abs() < 1e-10);
            assert!((fine.density(fine.hat_index(k)) - geo.hat_rho).abs() < 1e-10);
        }
    }

    #[test]
    fn quantize_density_examples() {
        let g = Grids::build(&gs(), 2).unwrap();
        assert_eq!(g.quantize_density(0.76).unwrap(), 0.75);
        assert_eq!(g.quantize_density(1.0).unwrap(), 1.0);
        assert_eq!(g.quantize_density(0.5).unwrap(), 0.5);
        // Midpoint of 0.75 and 0.8125 goes down.
        assert_eq!(g.quantize_density(0.78125).unwrap(), 0.75);
        assert!(g.quantize_density(1.2).is_err());
    }

    #[test]
    fn quantize_control_example() {
        let g = Grids::build(&gs(), 2).unwrap();
        let u = ControlSignal::from_breakpoints(&[(0.0, 0.6), (1.0, 0.7)]).unwrap();
        let q = g.quantize_control(&u);
        // Both values share the grid point 2/3 as a cell end, so the jump vanishes.
        assert_eq!(q.values(), &[g.speed(4)]);
        assert_eq!(q.total_variation(), 0.0);
        let wide = ControlSignal::from_breakpoints(&[(0.0, 0.1), (1.0, 0.9), (2.0, 0.4)]).unwrap();
        let qw = g.quantize_control(&wide);
        assert_eq!(qw.times(), &[0.0, 1.0, 2.0]);
        assert!(qw.total_variation() <= wide.total_variation());
        for (a, b) in qw.values().iter().zip(wide.values()) {
            assert!((a - b).abs() <= g.stats().eps_u + 1e-12);
        }
        let on_grid = ControlSignal::from_breakpoints(&[(0.0, 0.5), (2.0, 1.0)]).unwrap();
        assert_eq!(g.quantize_control(&on_grid), on_grid);
    }

    #[test]
    fn control_variation_after() {
        let u = ControlSignal::from_breakpoints(&[(0.0, 0.2), (1.0, 0.5), (2.0, 0.1)]).unwrap();
        assert!((u.variation_after(0.5) - 0.7).abs() < 1e-15);
        assert!((u.variation_after(1.0) - 0.4).abs() < 1e-15);
        assert_eq!(u.variation_after(2.0), 0.0);
        assert_eq!(u.value_at(1.0), 0.5);
        assert_eq!(u.value_at(0.99), 0.2);
    }

    #[test]
    fn interpolated_flux_is_concave() {
        let g = Grids::build(&gs(), 3).unwrap();
        let fnu = g.piecewise_flux();
        assert!(fnu.is_strictly_concave());
        for &r in g.densities() {
            assert_eq!(fnu.eval(r), gs().flux(r));
        }
    }

    #[test]
    fn nu_zero_rejected() {
        assert!(matches!(Grids::build(&gs(), 0), Err(Error::Domain(_))));
    }
}
