//! Piecewise-constant functions of one variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A right-continuous step function: `values[0]` on `(-∞, jumps[0])`,
/// `values[i]` on `[jumps[i-1], jumps[i])`, and the last value to `+∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    jumps: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn constant(value: f64) -> Self {
        StepFunction {
            jumps: Vec::new(),
            values: vec![value],
        }
    }

    pub fn new(jumps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != jumps.len() + 1 {
            return Err(Error::Validation(format!(
                "step function needs one more value than jumps ({} jumps, {} values)",
                jumps.len(),
                values.len()
            )));
        }
        for (i, w) in jumps.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::Validation(format!(
                    "jump locations must increase strictly (index {})",
                    i + 1
                )));
            }
        }
        if let Some(i) = jumps.iter().position(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("jump location {i} is not finite")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("value {i} is not finite")));
        }
        Ok(StepFunction { jumps, values })
    }

    /// Builds from breakpoints `(x_i, v_i)`: `v_i` holds on `[x_i, x_{i+1})`,
    /// and the first and last values extend to infinity.
    pub fn from_breakpoints(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("at least one breakpoint is required".into()));
        }
        let jumps = points[1..].iter().map(|p| p.0).collect();
        let values = points.iter().map(|p| p.1).collect();
        if let Some(w) = points.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::Validation(format!(
                "breakpoints must increase strictly: {} then {}",
                w[0].0, w[1].0
            )));
        }
        Self::new(jumps, values)
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let i = self.jumps.partition_point(|&j| j <= x);
        self.values[i]
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Merges neighbouring pieces with identical values.
    pub fn simplified(&self) -> Self {
        let mut jumps = Vec::with_capacity(self.jumps.len());
        let mut values = vec![self.values[0]];
        for (j, &v) in self.jumps.iter().zip(&self.values[1..]) {
            if v != *values.last().unwrap() {
                jumps.push(*j);
                values.push(v);
            }
        }
        StepFunction { jumps, values }
    }

    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        StepFunction {
            jumps: self.jumps.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Exact `∫_a^b g(x) dx`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.integrate_with(a, b, |v| v)
    }

    fn integrate_with<G: Fn(f64) -> f64>(&self, a: f64, b: f64, g: G) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let mut total = 0.0;
        let mut left = a;
        let mut i = self.jumps.partition_point(|&j| j <= a);
        while left < b {
            let right = if i < self.jumps.len() { self.jumps[i].min(b) } else { b };
            total += g(self.values[i]) * (right - left);
            left = right;
            i += 1;
        }
        total
    }

    /// Exact `∫_a^b |self − other| dx`.
    pub fn l1_distance(&self, other: &StepFunction, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .jumps
            .iter()
            .chain(other.jumps.iter())
            .copied()
            .filter(|&x| x > a && x < b)
            .collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.value_at(mid) - other.value_at(mid)).abs() * (w[1] - w[0])
            })
            .sum()
    }

    /// Smallest interval containing every jump, or `None` when constant.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.jumps.first()?, *self.jumps.last()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_is_right_continuous() {
        let s = StepFunction::from_breakpoints(&[(0.0, 1.0), (1.0, 2.0), (3.0, 0.5)]).unwrap();
        assert_eq!(s.value_at(-5.0), 1.0);
        assert_eq!(s.value_at(1.0), 2.0);
        assert_eq!(s.value_at(2.999), 2.0);
        assert_eq!(s.value_at(3.0), 0.5);
        assert_eq!(s.total_variation(), 2.5);
    }

    #[test]
    fn integral_and_distance() {
        let s = StepFunction::new(vec![0.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((s.integral(-1.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((s.integral(0.5, 0.75) - 0.25).abs() < 1e-15);
        let t = StepFunction::new(vec![0.5, 1.5], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((s.l1_distance(&t, -1.0, 3.0) - 1.0).abs() < 1e-15);
        assert_eq!(s.l1_distance(&s, -1.0, 3.0), 0.0);
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        assert!(StepFunction::from_breakpoints(&[(1.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(StepFunction::from_breakpoints(&[]).is_err());
    }

    #[test]
    fn simplify_merges_equal_pieces() {
        let s = StepFunction::new(vec![0.0, 1.0], vec![0.3, 0.3, 0.1]).unwrap();
        let m = s.simplified();
        assert_eq!(m.jumps(), &[1.0]);
        assert_eq!(m.values(), &[0.3, 0.1]);
    }
}
