//! First-order Godunov scheme for the constrained model, kept independent of
//! the front tracker so that the two can be compared.
//!
//! The AV is coupled to the grid through the interface nearest to it. There
//! the Godunov flux is capped by `F_α(w) + w·ρ_d`, the largest ground-frame
//! flux compatible with the constraint when the density just downstream is
//! `ρ_d`, where `ρ_d` is the cell average right of that interface and
//! `w = min{u, v(ρ_d)}` is the AV speed used for the explicit Euler update.

use serde::Serialize;

use crate::compare::Snapshot;
use crate::error::{Error, Result};
use crate::flux::FluxModel;
use crate::mesh::ControlSignal;
use crate::profile::StepFunction;

/// One step on which the cap at the AV interface was binding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapRecord {
    pub t: f64,
    pub dt: f64,
    pub interface: usize,
    pub godunov: f64,
    pub cap: f64,
}

impl CapRecord {
    /// Mass held back during the step.
    pub fn deficit(&self) -> f64 {
        (self.godunov - self.cap) * self.dt
    }
}

#[derive(Clone, Debug)]
pub struct FvSolver {
    model: FluxModel,
    control: ControlSignal,
    x_min: f64,
    dx: f64,
    cells: Vec<f64>,
    t: f64,
    av_y: f64,
    av_speed: f64,
    steps: usize,
    boundary_inflow: f64,
    caps: Vec<CapRecord>,
}

impl FvSolver {
    /// Cell averages of `rho0` on `[x_min, x_min + n·dx]` with `n` the
    /// smallest cell count that reaches `x_max`.
    pub fn new(
        model: &FluxModel,
        rho0: &StepFunction,
        control: &ControlSignal,
        y0: f64,
        (x_min, x_max): (f64, f64),
        dx: f64,
    ) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Validation(format!("cell width {dx} must be positive")));
        }
        if !(x_max > x_min) {
            return Err(Error::Validation(format!("empty domain [{x_min}, {x_max}]")));
        }
        let n = ((x_max - x_min) / dx - 1e-9).ceil().max(1.0) as usize;
        let r = model.rho_max();
        let cells: Vec<f64> = (0..n)
            .map(|i| {
                let a = x_min + i as f64 * dx;
                rho0.integral(a, a + dx) / dx
            })
            .collect();
        if let Some(bad) = cells.iter().find(|&&c| !(-1e-12..=r * (1.0 + 1e-12)).contains(&c)) {
            return Err(Error::Validation(format!("initial density {bad} outside [0, {r}]")));
        }
        let mut solver = Self {
            model: model.clone(),
            control: control.clone(),
            x_min,
            dx,
            cells: cells.into_iter().map(|c| c.clamp(0.0, r)).collect(),
            t: 0.0,
            av_y: y0,
            av_speed: 0.0,
            steps: 0,
            boundary_inflow: 0.0,
            caps: Vec::new(),
        };
        solver.av_speed = solver.av_coupling(control.value_at(0.0)).1;
        Ok(solver)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn av_position(&self) -> f64 {
        self.av_y
    }

    /// Speed used on the most recent step.
    pub fn av_speed(&self) -> f64 {
        self.av_speed
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn window(&self) -> (f64, f64) {
        (self.x_min, self.x_min + self.cells.len() as f64 * self.dx)
    }

    /// Largest stable step `dx / max|f'|`.
    pub fn dt_limit(&self) -> f64 {
        self.dx / self.model.lipschitz()
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.dx
    }

    /// Net mass that entered through the two domain boundaries so far.
    pub fn boundary_inflow(&self) -> f64 {
        self.boundary_inflow
    }

    pub fn cap_log(&self) -> &[CapRecord] {
        &self.caps
    }

    /// Mass held back by the cap, summed over all steps.
    pub fn total_cap_deficit(&self) -> f64 {
        self.caps.iter().map(CapRecord::deficit).sum()
    }

    /// Index of the interface nearest the AV and the AV speed `w`, or `None`
    /// for the interface when the AV has left the domain.
    fn av_coupling(&self, u: f64) -> (Option<usize>, f64) {
        let n = self.cells.len();
        let pos = (self.av_y - self.x_min) / self.dx;
        let k = pos.round();
        let (iface, downstream) = if k < 0.0 || k > n as f64 {
            (None, self.cells[if k < 0.0 { 0 } else { n - 1 }])
        } else {
            let k = k as usize;
            (Some(k), self.cells[k.min(n - 1)])
        };
        (iface, u.min(self.model.speed(downstream)).max(0.0))
    }

    fn godunov(&self, left: f64, right: f64) -> f64 {
        let rc = self.model.rho_crit();
        let demand = self.model.flux(left.min(rc));
        let supply = self.model.flux(right.max(rc));
        demand.min(supply)
    }

    /// Advances by `dt`, which must satisfy the CFL bound.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let limit = self.dt_limit();
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let n = self.cells.len();
        let u = self.control.value_at(self.t);
        let (iface, w) = self.av_coupling(u);
        let cell = |i: isize| self.cells[i.clamp(0, n as isize - 1) as usize];
        let mut fluxes: Vec<f64> = (0..=n as isize).map(|i| self.godunov(cell(i - 1), cell(i))).collect();
        if let Some(k) = iface {
            let rho_d = cell(k as isize);
            let cap = self.model.capacity(w) + w * rho_d;
            if fluxes[k] > cap {
                self.caps.push(CapRecord {
                    t: self.t,
                    dt,
                    interface: k,
                    godunov: fluxes[k],
                    cap,
                });
                fluxes[k] = cap;
            }
        }
        let r = dt / self.dx;
        let rho_max = self.model.rho_max();
        for (i, c) in self.cells.iter_mut().enumerate() {
            *c = (*c - r * (fluxes[i + 1] - fluxes[i])).clamp(0.0, rho_max);
        }
        self.boundary_inflow += dt * (fluxes[0] - fluxes[n]);
        self.av_y += dt * w;
        self.av_speed = w;
        self.t += dt;
        self.steps += 1;
        Ok(())
    }

    /// Steps with `dt = cfl · dx / max|f'|` up to `t_end`, shortening steps so
    /// that control jumps and `t_end` are hit exactly.
    pub fn run(&mut self, t_end: f64, cfl: f64) -> Result<()> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Validation(format!("CFL number {cfl} must lie in (0, 1]")));
        }
        let base = cfl * self.dt_limit();
        while self.t < t_end {
            let next_jump = self
                .control
                .times()
                .iter()
                .copied()
                .find(|&s| s > self.t)
                .unwrap_or(f64::INFINITY);
            let stop = t_end.min(next_jump);
            let dt = base.min(stop - self.t);
            if stop - (self.t + dt) <= 1e-12 * stop.abs().max(1.0) {
                let dt = stop - self.t;
                self.step(dt)?;
                self.t = stop;
            } else {
                self.step(dt)?;
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> StepFunction {
        let jumps = (1..self.cells.len()).map(|i| self.x_min + i as f64 * self.dx).collect();
        StepFunction::new(jumps, self.cells.clone())
            .expect("interfaces are strictly increasing")
            .simplified()
    }

    pub fn snapshot(&self, scenario_hash: &str) -> Snapshot {
        Snapshot {
            scenario_hash: scenario_hash.to_string(),
            t: self.t,
            profile: self.profile(),
            window: self.window(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs() -> FluxModel {
        FluxModel::greenshields(1.0, 1.0, 0.75).unwrap()
    }

    #[test]
    fn full_road_does_not_move() {
        let m = gs();
        let mut fv = FvSolver::new(
            &m,
            &StepFunction::constant(1.0),
            &ControlSignal::constant(0.7),
            0.3,
            (-1.0, 1.0),
            0.01,
        )
        .unwrap();
        fv.run(1.0, 0.9).unwrap();
        assert!((fv.av_position() - 0.3).abs() < 1e-12);
        assert!(fv.cells().iter().all(|&c| (c - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let m = gs();
        let mut fv = FvSolver::new(
            &m,
            &StepFunction::constant(0.3),
            &ControlSignal::constant(0.5),
            0.0,
            (0.0, 1.0),
            0.01,
        )
        .unwrap();
        assert!(matches!(fv.step(0.011), Err(Error::Cfl { .. })));
        assert!(fv.step(0.01).is_ok());
    }

    #[test]
    fn unconstrained_data_is_plain_godunov() {
        // A fast AV on light traffic never triggers the cap.
        let m = gs();
        let rho0 = StepFunction::from_breakpoints(&[(-5.0, 0.1), (0.0, 0.3)]).unwrap();
        let mut fv = FvSolver::new(&m, &rho0, &ControlSignal::constant(1.0), 0.0, (-2.0, 2.0), 0.01).unwrap();
        let mass0 = fv.mass();
        fv.run(1.0, 0.9).unwrap();
        assert!(fv.cap_log().is_empty());
        assert!((fv.mass() - mass0 - fv.boundary_inflow()).abs() < 1e-12);
    }

    #[test]
    fn worked_example_plateaus() {
        let m = gs();
        let rho0 = StepFunction::from_breakpoints(&[(-5.0, 0.4), (0.0, 0.6)]).unwrap();
        let mut fv = FvSolver::new(&m, &rho0, &ControlSignal::constant(0.1), 0.0, (-1.0, 1.0), 1e-3).unwrap();
        let mass0 = fv.mass();
        fv.run(1.0, 0.9).unwrap();
        // Exact solution at t=1: 0.4 | 0.675 on (-0.075, 0.1) | 0.225 on (0.1, 0.175) | 0.6.
        let p = fv.profile();
        assert!((p.value_at(0.01) - 0.675).abs() < 2e-2);
        assert!((p.value_at(0.14) - 0.225).abs() < 2e-2);
        assert!((fv.av_position() - 0.1).abs() < 1e-2);
        assert!(!fv.cap_log().is_empty());
        assert!(fv.total_cap_deficit() > 0.0);
        assert!((fv.mass() - mass0 - fv.boundary_inflow()).abs() < 1e-12);
    }
}
