//! Scenario files: a small TOML subset with one `key = value` per line.
//!
//! ```text
//! flux = "greenshields"          # or "skewed_cubic", which also needs flux_c
//! R = 1.0
//! V = 1.0
//! alpha = 0.75
//! nu = 4
//! rho0 = [[-1.0, 0.4], [0.0, 0.6]]   # (x_i, value on [x_i, x_{i+1}))
//! u = [[0.0, 0.1], [2.0, 0.5]]       # (t_i, value on [t_i, t_{i+1})), t_0 = 0
//! y0 = 0.0
//! t_end = 1.0
//! snapshots = [0.5, 1.0]
//! diagram = true
//! seed = 7
//! ```
//!
//! The first density value also applies left of `x_0`. Optional keys are
//! `beta`, `B` (concavity bounds), `flux_c`, `snapshots`, `diagram` and `seed`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::flux::{FluxFamily, FluxModel};
use crate::mesh::{ControlSignal, Grids};
use crate::profile::StepFunction;
use crate::tracker::{simulate, History};

const KEYS: [&str; 15] = [
    "flux",
    "R",
    "V",
    "alpha",
    "beta",
    "B",
    "flux_c",
    "nu",
    "rho0",
    "u",
    "y0",
    "t_end",
    "snapshots",
    "diagram",
    "seed",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub family: FluxFamily,
    pub rho_max: f64,
    pub v_max: f64,
    pub alpha: f64,
    /// Optional concavity bounds `(β, B)`; both or neither.
    pub concavity: Option<(f64, f64)>,
    pub nu: u32,
    pub rho0: Vec<(f64, f64)>,
    pub control: Vec<(f64, f64)>,
    pub y0: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub diagram: bool,
    pub seed: Option<u64>,
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

struct Fields<'a> {
    text: &'a str,
    table: Table,
}

impl Fields<'_> {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        match line_of(self.text, key) {
            Some(n) => Error::Scenario(format!("line {n}, field `{key}`: {msg}")),
            None => Error::Scenario(format!("field `{key}`: {msg}")),
        }
    }

    fn number(&self, key: &str, v: &Value) -> Result<f64> {
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            other => return Err(self.err(key, format!("expected a number, found {}", other.type_str()))),
        };
        if !x.is_finite() {
            return Err(self.err(key, "value must be finite"));
        }
        Ok(x)
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.table.get(key).map(|v| self.number(key, v)).transpose()
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?
            .ok_or_else(|| self.err(key, "missing required field"))
    }

    fn pairs(&self, key: &str) -> Result<Vec<(f64, f64)>> {
        let v = self
            .table
            .get(key)
            .ok_or_else(|| self.err(key, "missing required field"))?;
        let Value::Array(items) = v else {
            return Err(self.err(key, "expected an array of [a, b] pairs"));
        };
        items
            .iter()
            .enumerate()
            .map(|(i, item)| match item {
                Value::Array(p) if p.len() == 2 => Ok((self.number(key, &p[0])?, self.number(key, &p[1])?)),
                _ => Err(self.err(key, format!("entry {i} is not an [a, b] pair"))),
            })
            .collect()
    }
}

fn fmt_f64(x: f64) -> String {
    // `{:?}` is the shortest representation that parses back to the same bits.
    format!("{x:?}")
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Scenario(e.to_string()))?;
        let f = Fields { text, table };
        if let Some(k) = f.table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(f.err(k, "unknown field"));
        }

        let family_name = match f.table.get("flux") {
            None => return Err(f.err("flux", "missing required field")),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(f.err("flux", "expected a string")),
        };
        let flux_c = f.opt_f64("flux_c")?;
        let family = match (family_name.as_str(), flux_c) {
            ("greenshields", None) => FluxFamily::Greenshields,
            ("greenshields", Some(_)) => return Err(f.err("flux_c", "only used by the skewed_cubic family")),
            ("skewed_cubic", Some(c)) => FluxFamily::SkewedCubic { skew: c },
            ("skewed_cubic", None) => return Err(f.err("flux_c", "required by the skewed_cubic family")),
            (other, _) => return Err(f.err("flux", format!("unknown flux family \"{other}\""))),
        };

        let concavity = match (f.opt_f64("beta")?, f.opt_f64("B")?) {
            (Some(b), Some(bb)) => Some((b, bb)),
            (None, None) => None,
            (Some(_), None) => return Err(f.err("B", "must be given together with beta")),
            (None, Some(_)) => return Err(f.err("beta", "must be given together with B")),
        };

        let nu = match f.table.get("nu") {
            Some(Value::Integer(n)) if (1..=20).contains(n) => *n as u32,
            Some(Value::Integer(n)) => return Err(f.err("nu", format!("{n} is outside 1..=20"))),
            Some(_) => return Err(f.err("nu", "expected an integer")),
            None => return Err(f.err("nu", "missing required field")),
        };

        let snapshots = match f.table.get("snapshots") {
            None => Vec::new(),
            Some(Value::Array(a)) => a.iter().map(|v| f.number("snapshots", v)).collect::<Result<_>>()?,
            Some(_) => return Err(f.err("snapshots", "expected an array of times")),
        };
        let diagram = match f.table.get("diagram") {
            None => false,
            Some(Value::Boolean(b)) => *b,
            Some(_) => return Err(f.err("diagram", "expected true or false")),
        };
        let seed = match f.table.get("seed") {
            None => None,
            Some(Value::Integer(s)) if *s >= 0 => Some(*s as u64),
            Some(_) => return Err(f.err("seed", "expected a non-negative integer")),
        };

        let s = Scenario {
            family,
            rho_max: f.f64("R")?,
            v_max: f.f64("V")?,
            alpha: f.f64("alpha")?,
            concavity,
            nu,
            rho0: f.pairs("rho0")?,
            control: f.pairs("u")?,
            y0: f.f64("y0")?,
            t_end: f.f64("t_end")?,
            snapshots,
            diagram,
            seed,
        };
        s.check().map_err(|(key, msg)| f.err(key, msg))?;
        Ok(s)
    }

    /// Field-level consistency checks, reported as `(field, message)`.
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        for (key, x) in [("R", self.rho_max), ("V", self.v_max)] {
            if !(x > 0.0) {
                return Err((key, format!("must be positive, got {x}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        let model = self.model().map_err(|e| {
            let key = if self.concavity.is_some() { "beta" } else { "flux_c" };
            (key, e.to_string())
        })?;
        if self.rho0.is_empty() {
            return Err(("rho0", "needs at least one breakpoint".into()));
        }
        if let Some(w) = self.rho0.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return Err((
                "rho0",
                format!("positions must increase strictly ({} then {})", w[0].0, w[1].0),
            ));
        }
        if let Some(&(x, v)) = self.rho0.iter().find(|p| !(0.0..=model.rho_max()).contains(&p.1)) {
            return Err(("rho0", format!("density {v} at x={x} outside [0, {}]", model.rho_max())));
        }
        if self.control.first().map(|p| p.0) != Some(0.0) {
            return Err(("u", "the first breakpoint must be at t = 0".into()));
        }
        if let Some(w) = self.control.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return Err((
                "u",
                format!("times must increase strictly ({} then {})", w[0].0, w[1].0),
            ));
        }
        if let Some(&(t, v)) = self.control.iter().find(|p| !(0.0..=model.v_max()).contains(&p.1)) {
            return Err(("u", format!("speed {v} at t={t} outside [0, {}]", model.v_max())));
        }
        if !(self.t_end > 0.0) {
            return Err(("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(0.0..=self.t_end).contains(*t)) {
            return Err(("snapshots", format!("time {t} outside [0, {}]", self.t_end)));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<FluxModel> {
        let m = FluxModel::new(self.family, self.rho_max, self.v_max, self.alpha)?;
        match self.concavity {
            Some((b, bb)) => m.with_concavity_bounds(b, bb),
            None => Ok(m),
        }
    }

    pub fn grids(&self) -> Result<Grids> {
        Grids::build(&self.model()?, self.nu)
    }

    pub fn initial_profile(&self) -> Result<StepFunction> {
        StepFunction::from_breakpoints(&self.rho0)
    }

    pub fn control_signal(&self) -> Result<ControlSignal> {
        ControlSignal::from_breakpoints(&self.control)
    }

    /// Runs the front tracker on this scenario at its own `nu`.
    pub fn solve(&self) -> Result<History> {
        self.solve_at(self.nu)
    }

    pub fn solve_at(&self, nu: u32) -> Result<History> {
        let grids = Grids::build(&self.model()?, nu)?;
        simulate(
            grids,
            &self.initial_profile()?,
            &self.control_signal()?,
            self.y0,
            self.t_end,
        )
    }

    /// Canonical text form; `parse(to_text(s)) == s` holds bit for bit.
    pub fn to_text(&self) -> String {
        let pairs = |ps: &[(f64, f64)]| {
            let items: Vec<String> = ps
                .iter()
                .map(|&(a, b)| format!("[{}, {}]", fmt_f64(a), fmt_f64(b)))
                .collect();
            format!("[{}]", items.join(", "))
        };
        let mut out = String::new();
        let name = self.family.name();
        let _ = writeln!(out, "flux = \"{name}\"");
        if let FluxFamily::SkewedCubic { skew } = self.family {
            let _ = writeln!(out, "flux_c = {}", fmt_f64(skew));
        }
        let _ = writeln!(out, "R = {}", fmt_f64(self.rho_max));
        let _ = writeln!(out, "V = {}", fmt_f64(self.v_max));
        let _ = writeln!(out, "alpha = {}", fmt_f64(self.alpha));
        if let Some((b, bb)) = self.concavity {
            let _ = writeln!(out, "beta = {}", fmt_f64(b));
            let _ = writeln!(out, "B = {}", fmt_f64(bb));
        }
        let _ = writeln!(out, "nu = {}", self.nu);
        let _ = writeln!(out, "rho0 = {}", pairs(&self.rho0));
        let _ = writeln!(out, "u = {}", pairs(&self.control));
        let _ = writeln!(out, "y0 = {}", fmt_f64(self.y0));
        let _ = writeln!(out, "t_end = {}", fmt_f64(self.t_end));
        if !self.snapshots.is_empty() {
            let ts: Vec<String> = self.snapshots.iter().map(|&t| fmt_f64(t)).collect();
            let _ = writeln!(out, "snapshots = [{}]", ts.join(", "));
        }
        if self.diagram {
            let _ = writeln!(out, "diagram = true");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        out
    }

    /// SHA-256 of the canonical text, as 64 lowercase hex digits.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Shape of the randomized scenarios used in sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub family: FluxFamily,
    pub rho_max: f64,
    pub v_max: f64,
    pub alpha: f64,
    pub nu: u32,
    pub max_jumps: usize,
    pub max_control_jumps: usize,
    pub t_end: f64,
    /// Initial jumps are drawn uniformly from `(-x_half, x_half)`.
    pub x_half: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            family: FluxFamily::Greenshields,
            rho_max: 1.0,
            v_max: 1.0,
            alpha: 0.75,
            nu: 4,
            max_jumps: 20,
            max_control_jumps: 10,
            t_end: 5.0,
            x_half: 5.0,
        }
    }
}

/// A reproducible random scenario: between 1 and `max_jumps` density jumps,
/// up to `max_control_jumps` control jumps, and the AV placed in the middle
/// part of the initial data.
pub fn random_scenario(spec: &RandomSpec, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=spec.max_jumps.max(1));
    let mut xs: Vec<f64> = (0..k).map(|_| rng.gen_range(-spec.x_half..spec.x_half)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let rho0: Vec<(f64, f64)> = std::iter::once(-2.0 * spec.x_half)
        .chain(xs)
        .map(|x| (x, rng.gen_range(0.0..spec.rho_max)))
        .collect();
    let j = rng.gen_range(0..=spec.max_control_jumps);
    let mut ts: Vec<f64> = (0..j).map(|_| rng.gen_range(0.0..spec.t_end)).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let control: Vec<(f64, f64)> = std::iter::once(0.0)
        .chain(ts.into_iter().filter(|&t| t > 0.0))
        .map(|t| (t, rng.gen_range(0.0..spec.v_max)))
        .collect();
    let y0 = rng.gen_range(-0.6 * spec.x_half..0.6 * spec.x_half);
    Scenario {
        family: spec.family,
        rho_max: spec.rho_max,
        v_max: spec.v_max,
        alpha: spec.alpha,
        concavity: None,
        nu: spec.nu,
        rho0,
        control,
        y0,
        t_end: spec.t_end,
        snapshots: vec![spec.t_end],
        diagram: false,
        seed: Some(seed),
    }
}

/// The bundled demo: the worked Riemann datum followed by a control change.
pub const DEMO: &str = r#"flux = "greenshields"
R = 1.0
V = 1.0
alpha = 0.75
nu = 4
rho0 = [[-2.0, 0.2], [-1.0, 0.4], [0.0, 0.6], [1.5, 0.3]]
u = [[0.0, 0.1], [1.5, 0.5]]
y0 = 0.0
t_end = 3.0
snapshots = [1.0, 2.0, 3.0]
seed = 0
"#;
