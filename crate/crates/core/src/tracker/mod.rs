//! Event-driven wave-front tracking with a moving bottleneck.
//!
//! The solution is a doubly linked list of nodes stored in an arena. Two
//! sentinels bound the list and one node stands for the AV. Every node
//! carries the grid indices of the densities on either side, and
//! `node.right == next.left` holds along the whole list. The AV node has
//! `left != right` exactly when it carries the undercompressive jump.
//!
//! Node positions are affine in time and evaluated lazily from an anchor.
//! Pairwise meeting times of neighbours sit in a priority queue and are
//! checked for staleness when popped. Every event gathers all nodes that sit
//! at the meeting point and replaces them by the solution of one Riemann
//! problem (constrained when the AV is among them).

mod history;
mod ledger;
mod validate;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

pub use history::{AvMode, AvSegment, FrontRecord, History, Jump};
pub use ledger::{decrease_quantum, judge, EventKind, LedgerEntry, Verdict, LEDGER_TOL};
pub use validate::{inject_fault, validate_solution, Fault, ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::mesh::{ControlSignal, Grids};
use crate::profile::StepFunction;
use crate::riemann::{self, RiemannSolution, Wave, WaveKind};

const HEAD: usize = 0;
const TAIL: usize = 1;
const POSITION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Head,
    Tail,
    Front(WaveKind),
    Av,
}

#[derive(Clone, Debug)]
struct Node {
    role: Role,
    left: usize,
    right: usize,
    speed: f64,
    t0: f64,
    x0: f64,
    prev: usize,
    next: usize,
    alive: bool,
    version: u32,
    record: usize,
}

impl Node {
    fn position(&self, t: f64) -> f64 {
        match self.role {
            Role::Head => f64::NEG_INFINITY,
            Role::Tail => f64::INFINITY,
            _ => self.x0 + self.speed * (t - self.t0),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Meeting {
    t: f64,
    x: f64,
    seq: u64,
    a: usize,
    b: usize,
    va: u32,
    vb: u32,
}

impl PartialEq for Meeting {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Meeting {}
impl PartialOrd for Meeting {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Meeting {
    // Reversed so that the max-heap pops the earliest meeting first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .t
            .total_cmp(&self.t)
            .then(other.x.total_cmp(&self.x))
            .then(other.seq.cmp(&self.seq))
    }
}

/// What happens next, as reported by [`Tracker::next_event`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NextEvent {
    Meeting { t: f64, x: f64 },
    ControlJump { t: f64, from: f64, to: f64 },
}

impl NextEvent {
    pub fn time(&self) -> f64 {
        match *self {
            NextEvent::Meeting { t, .. } | NextEvent::ControlJump { t, .. } => t,
        }
    }
}

/// Live state of one simulation.
pub struct Tracker {
    grids: Grids,
    control: ControlSignal,
    control_idx: Vec<usize>,
    next_jump: usize,
    u_idx: usize,
    nodes: Vec<Node>,
    av: usize,
    time: f64,
    heap: BinaryHeap<Meeting>,
    seq: u64,
    fronts: Vec<FrontRecord>,
    av_segments: Vec<AvSegment>,
    ledger: Vec<LedgerEntry>,
    tv: f64,
    wave_count: usize,
    quantum: f64,
    events: usize,
    cap: usize,
    far_left: usize,
    far_right: usize,
}

impl Tracker {
    /// Projects the data onto the grids and solves every Riemann problem
    /// present at `t = 0`.
    pub fn init(grids: Grids, rho0: &StepFunction, control: &ControlSignal, y0: f64) -> Result<Self> {
        if !y0.is_finite() {
            return Err(Error::Validation(format!("AV start position {y0} is not finite")));
        }
        let v_max = grids.model().v_max();
        if let Some(i) = control.values().iter().position(|&u| u > v_max) {
            return Err(Error::Validation(format!(
                "control value {} at t={} exceeds V={v_max}",
                control.values()[i],
                control.times()[i]
            )));
        }
        let profile = grids.quantize_profile(rho0)?;
        if profile.total_variation() > rho0.total_variation() + 1e-12 {
            return Err(Error::Internal(
                "quantised initial datum has larger total variation".into(),
            ));
        }
        let control = grids.quantize_control(control);
        let control_idx: Vec<usize> = control.values().iter().map(|&u| grids.speed_index(u)).collect();
        let states: Vec<usize> = profile
            .values()
            .iter()
            .map(|&v| grids.density_index(v))
            .collect::<Result<_>>()?;
        let far_left = states[0];
        let far_right = *states.last().unwrap();

        let quantum = {
            let s = grids.stats();
            decrease_quantum(s.delta_rho, s.delta_u, grids.model().beta())
        };
        let jumps_in_u = control.times().len() - 1;
        let mut tracker = Tracker {
            control_idx,
            next_jump: 1,
            u_idx: 0,
            nodes: Vec::new(),
            av: usize::MAX,
            time: 0.0,
            heap: BinaryHeap::new(),
            seq: 0,
            fronts: Vec::new(),
            av_segments: Vec::new(),
            ledger: Vec::new(),
            tv: 0.0,
            wave_count: 0,
            quantum,
            events: 0,
            cap: 0,
            far_left,
            far_right,
            grids,
            control,
        };
        tracker.u_idx = tracker.control_idx[0];
        tracker.nodes.push(Node {
            role: Role::Head,
            left: far_left,
            right: far_left,
            speed: 0.0,
            t0: 0.0,
            x0: 0.0,
            prev: HEAD,
            next: TAIL,
            alive: true,
            version: 0,
            record: usize::MAX,
        });
        tracker.nodes.push(Node {
            role: Role::Tail,
            left: far_right,
            right: far_right,
            speed: 0.0,
            t0: 0.0,
            x0: 0.0,
            prev: HEAD,
            next: TAIL,
            alive: true,
            version: 0,
            record: usize::MAX,
        });

        let jumps = profile.jumps();
        let av_at_jump = jumps.iter().position(|&x| x == y0);
        let av_before = jumps.partition_point(|&x| x < y0);
        let mut tail_of_list = HEAD;
        let mut av_placed = false;
        for (i, &x) in jumps.iter().enumerate() {
            if !av_placed && i == av_before {
                let (l, r) = match av_at_jump {
                    Some(_) => (states[i], states[i + 1]),
                    None => (states[i], states[i]),
                };
                let sol = riemann::constrained(&tracker.grids, tracker.u_idx, l, r)?;
                tail_of_list = tracker.append_solution(tail_of_list, &sol, 0.0, y0, true);
                av_placed = true;
                if av_at_jump.is_some() {
                    continue;
                }
            }
            let sol = riemann::classical(&tracker.grids, states[i], states[i + 1]);
            tail_of_list = tracker.append_solution(tail_of_list, &sol, 0.0, x, false);
        }
        if !av_placed {
            let s = far_right;
            let sol = riemann::constrained(&tracker.grids, tracker.u_idx, s, s)?;
            tail_of_list = tracker.append_solution(tail_of_list, &sol, 0.0, y0, true);
        }
        tracker.link(tail_of_list, TAIL);

        tracker.tv = tracker.total_variation();
        tracker.wave_count = tracker.count_waves();
        tracker.cap = 10 * (tracker.wave_count + jumps_in_u).max(1) * (1usize << (2 * tracker.grids.nu()));
        let upsilon = tracker.upsilon_with(tracker.tv, tracker.gamma(), tracker.control.variation_after(0.0));
        tracker.ledger.push(LedgerEntry {
            index: 0,
            t: 0.0,
            kind: EventKind::Init,
            tv: tracker.tv,
            gamma: tracker.gamma(),
            tv_u: tracker.control.variation_after(0.0),
            upsilon,
            waves: tracker.wave_count,
            delta_upsilon: 0.0,
        });
        tracker.open_av_segment();
        let mut id = tracker.nodes[HEAD].next;
        while id != TAIL {
            tracker.schedule(tracker.nodes[id].prev, id);
            id = tracker.nodes[id].next;
        }
        Ok(tracker)
    }

    pub fn grids(&self) -> &Grids {
        &self.grids
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Quantised control actually used by the run.
    pub fn control(&self) -> &ControlSignal {
        &self.control
    }

    pub fn events_processed(&self) -> usize {
        self.events
    }

    pub fn event_cap(&self) -> usize {
        self.cap
    }

    pub fn wave_count(&self) -> usize {
        self.wave_count
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn av_position(&self) -> f64 {
        self.nodes[self.av].position(self.time)
    }

    pub fn av_speed(&self) -> f64 {
        self.nodes[self.av].speed
    }

    pub fn current_u(&self) -> f64 {
        self.grids.speed(self.u_idx)
    }

    fn upsilon_with(&self, tv: f64, gamma: f64, tv_u: f64) -> f64 {
        let m = self.grids.model();
        tv + 2.0 * m.rho_max() + gamma + 6.0 / m.beta() * tv_u
    }

    fn gamma(&self) -> f64 {
        let av = &self.nodes[self.av];
        let check = self.grids.check_index(self.u_idx);
        let hat = self.grids.hat_index(self.u_idx);
        if av.left != av.right && av.left == hat && av.right == check {
            -2.0 * (self.grids.density(hat) - self.grids.density(check))
        } else {
            0.0
        }
    }

    fn jump_size(&self, id: usize) -> f64 {
        let n = &self.nodes[id];
        (self.grids.density(n.right) - self.grids.density(n.left)).abs()
    }

    fn total_variation(&self) -> f64 {
        let mut tv = 0.0;
        let mut id = self.nodes[HEAD].next;
        while id != TAIL {
            tv += self.jump_size(id);
            id = self.nodes[id].next;
        }
        tv
    }

    fn count_waves(&self) -> usize {
        let mut n = 0;
        let mut id = self.nodes[HEAD].next;
        while id != TAIL {
            if self.nodes[id].left != self.nodes[id].right {
                n += 1;
            }
            id = self.nodes[id].next;
        }
        n
    }

    fn link(&mut self, a: usize, b: usize) {
        self.nodes[a].next = b;
        self.nodes[b].prev = a;
    }

    fn new_front(&mut self, w: &Wave<usize>, t: f64, x: f64) -> usize {
        let id = self.nodes.len();
        let record = self.fronts.len();
        self.fronts.push(FrontRecord {
            id: record,
            kind: w.kind,
            left: self.grids.density(w.left),
            right: self.grids.density(w.right),
            speed: w.speed_hi,
            t_birth: t,
            x_birth: x,
            t_death: f64::INFINITY,
        });
        self.nodes.push(Node {
            role: Role::Front(w.kind),
            left: w.left,
            right: w.right,
            speed: w.speed_hi,
            t0: t,
            x0: x,
            prev: usize::MAX,
            next: usize::MAX,
            alive: true,
            version: 0,
            record,
        });
        id
    }

    /// Creates nodes for `sol` anchored at `(t, x)` and links them after
    /// `after`. Returns the last node created (or `after`).
    fn append_solution(&mut self, after: usize, sol: &RiemannSolution<usize>, t: f64, x: f64, with_av: bool) -> usize {
        let mut last = after;
        for (i, w) in sol.waves.iter().enumerate() {
            if with_av && i == sol.av_slot {
                last = self.place_av(last, sol, t, x);
            }
            if w.kind == WaveKind::Undercompressive {
                continue;
            }
            let id = self.new_front(w, t, x);
            self.link(last, id);
            last = id;
        }
        if with_av && sol.av_slot == sol.waves.len() {
            last = self.place_av(last, sol, t, x);
        }
        last
    }

    fn place_av(&mut self, after: usize, sol: &RiemannSolution<usize>, t: f64, x: f64) -> usize {
        let (left, right) = if sol.constrained {
            let uc = sol.waves[sol.av_slot - 1];
            (uc.left, uc.right)
        } else {
            let s = sol.right_trace();
            (s, s)
        };
        let speed = sol.av_speed.expect("constrained solution carries an AV speed");
        if self.av == usize::MAX {
            self.av = self.nodes.len();
            self.nodes.push(Node {
                role: Role::Av,
                left,
                right,
                speed,
                t0: t,
                x0: x,
                prev: usize::MAX,
                next: usize::MAX,
                alive: true,
                version: 0,
                record: usize::MAX,
            });
        } else {
            let av = &mut self.nodes[self.av];
            av.left = left;
            av.right = right;
            av.speed = speed;
            av.t0 = t;
            av.x0 = x;
            av.version += 1;
        }
        let id = self.av;
        self.link(after, id);
        id
    }

    fn av_mode(&self) -> (AvMode, usize) {
        let av = &self.nodes[self.av];
        if av.left != av.right {
            return (AvMode::Undercompressive, av.left);
        }
        let prev = &self.nodes[av.prev];
        if matches!(prev.role, Role::Front(WaveKind::Shock))
            && prev.speed == av.speed
            && prev.position(self.time) == av.position(self.time)
        {
            (AvMode::Classical, prev.left)
        } else {
            (AvMode::Free, av.left)
        }
    }

    fn open_av_segment(&mut self) {
        let (mode, minus) = self.av_mode();
        let av = &self.nodes[self.av];
        let seg = AvSegment {
            t_start: self.time,
            t_end: f64::INFINITY,
            y_start: av.position(self.time),
            speed: av.speed,
            u: self.grids.speed(self.u_idx),
            rho_minus: self.grids.density(minus),
            rho_plus: self.grids.density(av.right),
            mode,
        };
        if let Some(last) = self.av_segments.last_mut() {
            let same = last.speed == seg.speed
                && last.u == seg.u
                && last.rho_minus == seg.rho_minus
                && last.rho_plus == seg.rho_plus
                && last.mode == seg.mode;
            if same {
                return;
            }
            if last.t_start == seg.t_start {
                *last = seg;
                return;
            }
            last.t_end = self.time;
        }
        self.av_segments.push(seg);
    }

    fn schedule(&mut self, a: usize, b: usize) {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        if matches!(na.role, Role::Head) || matches!(nb.role, Role::Tail) {
            return;
        }
        if !(na.speed > nb.speed) {
            return;
        }
        let gap = (nb.position(self.time) - na.position(self.time)).max(0.0);
        let t = self.time + gap / (na.speed - nb.speed);
        if !t.is_finite() {
            return;
        }
        let x = na.position(t);
        self.seq += 1;
        self.heap.push(Meeting {
            t,
            x,
            seq: self.seq,
            a,
            b,
            va: na.version,
            vb: nb.version,
        });
    }

    fn meeting_is_current(&self, m: &Meeting) -> bool {
        let (na, nb) = (&self.nodes[m.a], &self.nodes[m.b]);
        na.alive && nb.alive && na.next == m.b && na.version == m.va && nb.version == m.vb
    }

    fn peek_meeting(&mut self) -> Option<Meeting> {
        while let Some(top) = self.heap.peek() {
            if self.meeting_is_current(top) {
                return Some(*top);
            }
            self.heap.pop();
        }
        None
    }

    /// Earliest pending event; `None` when nothing will ever happen again.
    pub fn next_event(&mut self) -> Option<NextEvent> {
        let meeting = self.peek_meeting();
        let jump = self.control.times().get(self.next_jump).copied();
        match (meeting, jump) {
            (Some(m), Some(tj)) if m.t <= tj => Some(NextEvent::Meeting { t: m.t, x: m.x }),
            (Some(m), None) => Some(NextEvent::Meeting { t: m.t, x: m.x }),
            (_, Some(tj)) => Some(NextEvent::ControlJump {
                t: tj,
                from: self.control.values()[self.next_jump - 1],
                to: self.control.values()[self.next_jump],
            }),
            (None, None) => None,
        }
    }

    /// Processes the earliest pending event.
    pub fn apply_next(&mut self) -> Result<Option<NextEvent>> {
        let Some(event) = self.next_event() else {
            return Ok(None);
        };
        self.events += 1;
        if self.events > self.cap {
            return Err(Error::EventCap {
                cap: self.cap,
                t: event.time(),
            });
        }
        match event {
            NextEvent::Meeting { t, .. } => {
                let m = self.heap.pop().expect("peeked meeting");
                self.time = t.max(self.time);
                self.resolve(m.a, m.b, None)?;
            }
            NextEvent::ControlJump { t, .. } => {
                self.time = t.max(self.time);
                let k = self.next_jump;
                self.next_jump += 1;
                let av = self.av;
                self.resolve(av, av, Some(self.control_idx[k]))?;
            }
        }
        Ok(Some(event))
    }

    /// Advances to `t_end`, processing every event on the way.
    pub fn run(&mut self, t_end: f64) -> Result<()> {
        if !(t_end > self.time) {
            return Err(Error::Validation(format!(
                "t_end={t_end} must exceed the current time {}",
                self.time
            )));
        }
        while let Some(ev) = self.next_event() {
            if ev.time() > t_end {
                break;
            }
            self.apply_next()?;
        }
        self.time = t_end;
        Ok(())
    }

    /// Replaces every node sitting at the meeting point of `a` and `b` by the
    /// solution of the Riemann problem between the outer states. When
    /// `new_u` is given the control switches to it first.
    fn resolve(&mut self, a: usize, b: usize, new_u: Option<usize>) -> Result<()> {
        let t = self.time;
        let mut xbar = self.nodes[a].position(t);
        let tol = POSITION_TOL * xbar.abs().max(1.0);
        let mut first = a;
        while !matches!(self.nodes[self.nodes[first].prev].role, Role::Head)
            && (self.nodes[self.nodes[first].prev].position(t) - xbar).abs() <= tol
        {
            first = self.nodes[first].prev;
        }
        let mut last = b;
        while !matches!(self.nodes[self.nodes[last].next].role, Role::Tail)
            && (self.nodes[self.nodes[last].next].position(t) - xbar).abs() <= tol
        {
            last = self.nodes[last].next;
        }
        let mut members = vec![first];
        while *members.last().unwrap() != last {
            members.push(self.nodes[*members.last().unwrap()].next);
        }
        let av_in = members.contains(&self.av);
        if av_in {
            xbar = self.nodes[self.av].position(t);
        }
        let before_prev = self.nodes[first].prev;
        let after_next = self.nodes[last].next;
        let left = self.nodes[first].left;
        let right = self.nodes[last].right;

        let tv_before: f64 = members.iter().map(|&id| self.jump_size(id)).sum();
        let gamma_before = self.gamma();
        let waves_before = self.wave_count;
        let dump_before = if av_in || new_u.is_some() {
            self.describe(&members, t)
        } else {
            String::new()
        };
        let (tv_u_before, tv_u_after) = match new_u {
            Some(_) => {
                let after = self.control.variation_after(t);
                let jump = (self.grids.speed(new_u.unwrap()) - self.grids.speed(self.u_idx)).abs();
                (after + jump, after)
            }
            None => {
                let v = self.control.variation_after(t);
                (v, v)
            }
        };
        if let Some(k) = new_u {
            self.u_idx = k;
        }

        for &id in &members {
            if id == self.av {
                continue;
            }
            let node = &mut self.nodes[id];
            node.alive = false;
            let rec = node.record;
            if node.left != node.right {
                self.wave_count -= 1;
            }
            self.fronts[rec].t_death = t;
        }
        if av_in && self.nodes[self.av].left != self.nodes[self.av].right {
            self.wave_count -= 1;
        }

        let sol = if av_in {
            riemann::constrained(&self.grids, self.u_idx, left, right)?
        } else {
            riemann::classical(&self.grids, left, right)
        };
        let end = self.append_solution(before_prev, &sol, t, xbar, av_in);
        self.link(end, after_next);

        let mut tv_after = 0.0;
        let mut id = self.nodes[before_prev].next;
        let mut created = Vec::new();
        while id != after_next {
            tv_after += self.jump_size(id);
            if self.nodes[id].left != self.nodes[id].right {
                self.wave_count += 1;
            }
            created.push(id);
            id = self.nodes[id].next;
        }
        let mut id = before_prev;
        while id != after_next {
            let next = self.nodes[id].next;
            self.schedule(id, next);
            id = next;
        }
        if av_in {
            self.open_av_segment();
        }

        let gamma_after = self.gamma();
        self.tv += tv_after - tv_before;
        let beta = self.grids.model().beta();
        let delta = (tv_after - tv_before) + (gamma_after - gamma_before) + 6.0 / beta * (tv_u_after - tv_u_before);
        let kind = match (new_u.is_some(), av_in) {
            (true, _) => EventKind::ControlJump,
            (false, true) => EventKind::AvInteraction,
            (false, false) => EventKind::Collision,
        };
        let index = self.ledger.len();
        let upsilon = self.upsilon_with(self.tv, gamma_after, tv_u_after);
        self.ledger.push(LedgerEntry {
            index,
            t,
            kind,
            tv: self.tv,
            gamma: gamma_after,
            tv_u: tv_u_after,
            upsilon,
            waves: self.wave_count,
            delta_upsilon: delta,
        });
        if judge(delta, waves_before, self.wave_count, self.quantum) == Verdict::Violation {
            let mut dump = String::new();
            let _ = write!(
                dump,
                "t={t} x={xbar} kind={} u={} dUpsilon={delta:e} waves {waves_before}->{} quantum={:e}; before [{}] after [{}]",
                kind.as_str(),
                self.grids.speed(self.u_idx),
                self.wave_count,
                self.quantum,
                if dump_before.is_empty() { "classical fronts".to_string() } else { dump_before },
                self.describe(&created, t),
            );
            return Err(Error::GlimmViolation { event: index, dump });
        }
        Ok(())
    }

    fn describe(&self, ids: &[usize], t: f64) -> String {
        ids.iter()
            .map(|&id| {
                let n = &self.nodes[id];
                let role = match n.role {
                    Role::Front(k) => k.as_str(),
                    Role::Av => "av",
                    Role::Head => "head",
                    Role::Tail => "tail",
                };
                format!(
                    "{role}({:.6}->{:.6} @{:.6} x={:.6})",
                    self.grids.density(n.left),
                    self.grids.density(n.right),
                    n.speed,
                    n.position(t)
                )
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Current density profile.
    pub fn snapshot(&self) -> StepFunction {
        let mut xs = Vec::new();
        let mut values = vec![self.grids.density(self.far_left)];
        let mut id = self.nodes[HEAD].next;
        while id != TAIL {
            let n = &self.nodes[id];
            if n.left != n.right {
                let x = n.position(self.time);
                let v = self.grids.density(n.right);
                if xs.last().is_some_and(|&l: &f64| x <= l) {
                    *values.last_mut().unwrap() = v;
                } else {
                    xs.push(x);
                    values.push(v);
                }
            }
            id = n.next;
        }
        StepFunction::new(xs, values).expect("ordered front list")
    }

    /// Recomputes Υ from scratch; used to cross-check the incremental ledger.
    pub fn upsilon_now(&self) -> f64 {
        self.upsilon_with(
            self.total_variation(),
            self.gamma(),
            self.control.variation_after(self.time),
        )
    }

    /// Checks `node.right == next.left` and the ordering of positions.
    pub fn check_chain(&self) -> Result<()> {
        let mut id = HEAD;
        let mut last_x = f64::NEG_INFINITY;
        while id != TAIL {
            let next = self.nodes[id].next;
            if self.nodes[id].right != self.nodes[next].left {
                return Err(Error::Internal(format!("broken state chain at node {id}")));
            }
            let x = self.nodes[next].position(self.time);
            if x < last_x - POSITION_TOL * x.abs().max(1.0) {
                return Err(Error::Internal(format!("nodes out of order at node {next}")));
            }
            last_x = x;
            id = next;
        }
        Ok(())
    }

    /// Freezes the run into a [`History`] ending at the current time.
    pub fn history(&self) -> History {
        let mut av = self.av_segments.clone();
        if let Some(last) = av.last_mut() {
            last.t_end = self.time;
        }
        let stats = self.grids.stats();
        History {
            model: self.grids.model().clone(),
            nu: self.grids.nu(),
            eps_rho: stats.eps_rho,
            delta_rho: stats.delta_rho,
            delta_u: stats.delta_u,
            control: self.control.clone(),
            t_end: self.time,
            far_left: self.grids.density(self.far_left),
            far_right: self.grids.density(self.far_right),
            fronts: self.fronts.clone(),
            av,
            ledger: self.ledger.clone(),
        }
    }
}

/// Builds, runs and freezes a simulation in one call.
pub fn simulate(grids: Grids, rho0: &StepFunction, control: &ControlSignal, y0: f64, t_end: f64) -> Result<History> {
    let mut tracker = Tracker::init(grids, rho0, control, y0)?;
    tracker.run(t_end)?;
    Ok(tracker.history())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxModel;

    fn gs() -> FluxModel {
        FluxModel::greenshields(1.0, 1.0, 0.75).unwrap()
    }

    #[test]
    fn constant_data_has_no_fronts() {
        let g = Grids::build(&gs(), 3).unwrap();
        let mut t = Tracker::init(g, &StepFunction::constant(0.1), &ControlSignal::constant(0.5), 0.0).unwrap();
        assert_eq!(t.wave_count(), 0);
        assert!(t.next_event().is_none());
        t.run(2.0).unwrap();
        assert!((t.av_position() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn worked_example_on_grid_speed() {
        // u = 1/6 lies on the nu = 2 grid: ρ̌ = 5/24 and ρ̂ = 5/8.
        let g = Grids::build(&gs(), 2).unwrap();
        let rho0 = StepFunction::new(vec![0.0], vec![0.375, 0.5]).unwrap();
        let mut t = Tracker::init(g, &rho0, &ControlSignal::constant(1.0 / 6.0), 0.0).unwrap();
        assert_eq!(t.wave_count(), 3);
        assert!(t.next_event().is_none());
        t.run(1.0).unwrap();
        let h = t.history();
        assert_eq!(h.av[0].mode, AvMode::Undercompressive);
        let s = h.snapshot(1.0).unwrap();
        assert!((s.value_at(0.0) - 0.625).abs() < 1e-12);
        assert!((s.value_at(0.2) - 5.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn fan_is_split_into_grid_fronts() {
        let g = Grids::build(&gs(), 2).unwrap();
        let rho0 = StepFunction::new(vec![0.0], vec![0.875, 0.5]).unwrap();
        let t = Tracker::init(g, &rho0, &ControlSignal::constant(1.0), -5.0).unwrap();
        // 0.875 → 0.8125 → 0.75 → 0.625 → 0.5
        assert_eq!(t.wave_count(), 4);
    }

    #[test]
    fn shocks_merge() {
        let g = Grids::build(&gs(), 2).unwrap();
        let rho0 = StepFunction::new(vec![0.0, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        let mut t = Tracker::init(g, &rho0, &ControlSignal::constant(0.0), -10.0).unwrap();
        // Speeds 0.5 and -0.5 meet at t = 1, x = 0.5.
        match t.next_event() {
            Some(NextEvent::Meeting { t: tm, x }) => {
                assert!((tm - 1.0).abs() < 1e-12);
                assert!((x - 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        t.run(3.0).unwrap();
        assert_eq!(t.wave_count(), 1);
        t.check_chain().unwrap();
        assert!((t.upsilon_now() - t.ledger().last().unwrap().upsilon).abs() < 1e-12);
    }
}
