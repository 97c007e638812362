//! Event-driven execution of an online strategy at unit speed.
//!
//! The simulator owns time. It jumps from one decision point to the next
//! (a release, the end of a leg or wait, a requested wake-up), records every
//! change of motion in the trace, and asks the strategy what to do through
//! callbacks that only ever see released requests.

use crate::error::{Error, Result};
use crate::instance::{Instance, Problem, Request};
use crate::metric::{Point, Space, EPS};
use serde_json::Value;
use std::collections::VecDeque;
use std::fmt::Write as _;

/// Times closer than this are treated as the same instant.
const TIME_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServiceKind {
    Visit,
    Pickup,
    Delivery,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    MoveTo(Point),
    /// Stay put until an absolute time.
    WaitUntil(f64),
    /// Stay put until the request with this id has been released.
    WaitForRelease(usize),
    /// Marks the point where a request is meant to be served. Service itself
    /// happens automatically whenever the server stands on a released
    /// request's point.
    Service(usize, ServiceKind),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub actions: Vec<Action>,
    pub created_at: f64,
}

impl Plan {
    pub fn new(actions: Vec<Action>, created_at: f64) -> Self {
        Plan { actions, created_at }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Directive {
    /// Keep doing whatever the server is doing.
    Continue,
    /// Drop the plan and head straight for the origin. Irrevocable until the
    /// origin is reached.
    ReturnHome,
    Replace(Plan),
    /// Drop the plan and stand still.
    Idle,
    /// Keep the current activity and call `on_wake` at the given time.
    Wake(f64),
}

/// Online decision maker driven by the simulator.
pub trait Strategy {
    fn name(&self) -> String;
    fn init(&mut self, view: &View) -> Result<Directive>;
    /// Called once per release, in id order, at the release time.
    fn on_release(&mut self, view: &View, id: usize) -> Result<Directive>;
    /// Called when the current plan (or a return home) has been executed.
    fn on_plan_complete(&mut self, view: &View) -> Result<Directive>;
    fn on_wake(&mut self, _view: &View) -> Result<Directive> {
        Ok(Directive::Continue)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Status {
    released: bool,
    picked: bool,
    done: bool,
}

#[derive(Clone, Copy, Debug)]
struct Leg {
    from: Point,
    to: Point,
    start: f64,
}

impl Leg {
    fn end(&self) -> f64 {
        self.start + self.from.dist(&self.to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Release,
    Depart,
    Arrive,
    WaitBegin,
    WaitEnd,
    Checkpoint,
    Service,
    Pickup,
    Delivery,
    PlanReplaced,
    ReturnHome,
    Complete,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Release => "release",
            EventKind::Depart => "depart",
            EventKind::Arrive => "arrive",
            EventKind::WaitBegin => "wait-begin",
            EventKind::WaitEnd => "wait-end",
            EventKind::Checkpoint => "checkpoint",
            EventKind::Service => "service",
            EventKind::Pickup => "pickup",
            EventKind::Delivery => "delivery",
            EventKind::PlanReplaced => "plan-replaced",
            EventKind::ReturnHome => "return-home",
            EventKind::Complete => "complete",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        use EventKind::*;
        [
            Release, Depart, Arrive, WaitBegin, WaitEnd, Checkpoint, Service, Pickup, Delivery,
            PlanReplaced, ReturnHome, Complete,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub pos: Point,
    pub id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub origin: Point,
    pub events: Vec<Event>,
    pub completion_time: f64,
    /// Time each request was served (TSP) or delivered (DARP), by id − 1.
    pub service_times: Vec<f64>,
}

/// Read-only snapshot handed to strategy callbacks.
pub struct View<'a> {
    sim: &'a Simulator<'a>,
}

impl<'a> View<'a> {
    pub fn time(&self) -> f64 {
        self.sim.time
    }

    pub fn position(&self) -> Point {
        self.sim.pos
    }

    pub fn origin(&self) -> Point {
        self.sim.origin
    }

    pub fn space(&self) -> Space {
        self.sim.instance.space
    }

    pub fn problem(&self) -> Problem {
        self.sim.instance.problem
    }

    pub fn at_origin(&self) -> bool {
        self.sim.pos.approx_eq(&self.sim.origin, EPS)
    }

    pub fn is_returning(&self) -> bool {
        self.sim.returning
    }

    /// True when the server has neither a plan nor a leg in progress.
    pub fn is_idle(&self) -> bool {
        self.sim.plan.is_empty() && self.sim.leg.is_none()
    }

    /// Unexecuted part of the current plan. A leg in progress is the first
    /// `MoveTo`.
    pub fn remaining_plan(&self) -> Vec<Action> {
        self.sim.plan.iter().copied().collect()
    }

    /// Released request, or `None` while it is still unknown.
    pub fn request(&self, id: usize) -> Option<&Request> {
        let k = id.checked_sub(1)?;
        self.sim.status.get(k).filter(|s| s.released).map(|_| &self.sim.instance.requests[k])
    }

    pub fn released_count(&self) -> usize {
        self.sim.next_release
    }

    pub fn is_served(&self, id: usize) -> bool {
        self.request(id).is_some() && self.sim.status[id - 1].done
    }

    pub fn is_picked(&self, id: usize) -> bool {
        self.request(id).is_some() && self.sim.status[id - 1].picked
    }

    /// Released requests not yet served (TSP) or delivered (DARP).
    pub fn unserved(&self) -> Vec<Request> {
        self.released_where(|s| !s.done)
    }

    /// Released ride requests not yet picked up.
    pub fn waiting(&self) -> Vec<Request> {
        self.released_where(|s| !s.picked)
    }

    /// Ride requests picked up and not yet delivered.
    pub fn onboard(&self) -> Vec<usize> {
        self.released_where(|s| s.picked && !s.done).into_iter().map(|r| r.id).collect()
    }

    fn released_where(&self, keep: impl Fn(&Status) -> bool) -> Vec<Request> {
        self.sim
            .status
            .iter()
            .zip(&self.sim.instance.requests)
            .filter(|(s, _)| s.released && keep(s))
            .map(|(_, r)| *r)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// A run whose clock passes this value is aborted.
    pub max_time: f64,
    /// Maximum callbacks at a single instant before the run is aborted.
    pub max_callbacks_per_instant: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { max_time: 1e6, max_callbacks_per_instant: 10_000 }
    }
}

struct Simulator<'a> {
    instance: &'a Instance,
    origin: Point,
    time: f64,
    pos: Point,
    plan: VecDeque<Action>,
    leg: Option<Leg>,
    waiting_since: Option<f64>,
    returning: bool,
    plan_done: bool,
    wake: Option<f64>,
    status: Vec<Status>,
    next_release: usize,
    events: Vec<Event>,
    service_times: Vec<f64>,
}

/// Runs `strategy` on `instance` with the default configuration.
pub fn run(instance: &Instance, strategy: &mut dyn Strategy) -> Result<Trace> {
    run_with(instance, strategy, SimConfig::default())
}

pub fn run_with(instance: &Instance, strategy: &mut dyn Strategy, config: SimConfig) -> Result<Trace> {
    let origin = instance.space.origin();
    let n = instance.len();
    let mut sim = Simulator {
        instance,
        origin,
        time: 0.0,
        pos: origin,
        plan: VecDeque::new(),
        leg: None,
        waiting_since: None,
        returning: false,
        plan_done: false,
        wake: None,
        status: vec![Status::default(); n],
        next_release: 0,
        events: Vec::new(),
        service_times: vec![f64::NAN; n],
    };
    if n == 0 {
        return Ok(Trace { origin, events: Vec::new(), completion_time: 0.0, service_times: Vec::new() });
    }
    let d = strategy.init(&View { sim: &sim })?;
    sim.apply(d)?;
    sim.settle();
    sim.callbacks(strategy, &[], config)?;

    loop {
        if sim.finished() {
            sim.record(EventKind::Complete, None);
            let completion_time = sim.time;
            return Ok(Trace {
                origin,
                events: sim.events,
                completion_time,
                service_times: sim.service_times,
            });
        }
        let next = sim.next_time();
        if !next.is_finite() {
            let what = if sim.all_done() { "idles away from the origin" } else { "is stuck with work left" };
            return Err(Error::Protocol(format!("{} {what} at t={}", strategy.name(), sim.time)));
        }
        if next > config.max_time {
            return Err(Error::Divergence(format!(
                "{} passed the time limit {} (next event at {next})",
                strategy.name(),
                config.max_time
            )));
        }
        sim.advance(next);
        let mut released = Vec::new();
        while sim.next_release < n && instance.requests[sim.next_release].release <= sim.time {
            let id = sim.next_release + 1;
            sim.status[id - 1].released = true;
            sim.next_release += 1;
            sim.record(EventKind::Release, Some(id));
            released.push(id);
        }
        if sim.leg.is_none() {
            sim.serve_here();
        }
        sim.callbacks(strategy, &released, config)?;
    }
}

impl<'a> Simulator<'a> {
    fn record(&mut self, kind: EventKind, id: Option<usize>) {
        self.events.push(Event { t: self.time, kind, pos: self.pos, id });
    }

    fn all_done(&self) -> bool {
        self.next_release == self.status.len() && self.status.iter().all(|s| s.done)
    }

    fn finished(&self) -> bool {
        self.all_done() && self.pos.approx_eq(&self.origin, EPS)
    }

    fn callbacks(&mut self, strategy: &mut dyn Strategy, released: &[usize], config: SimConfig) -> Result<()> {
        for &id in released {
            let d = strategy.on_release(&View { sim: self }, id)?;
            self.apply(d)?;
        }
        self.settle();
        let mut budget = config.max_callbacks_per_instant;
        loop {
            if self.finished() {
                return Ok(());
            }
            let d = if self.plan_done {
                self.plan_done = false;
                strategy.on_plan_complete(&View { sim: self })?
            } else if self.wake.is_some_and(|w| w <= self.time + TIME_EPS) {
                self.wake = None;
                strategy.on_wake(&View { sim: self })?
            } else {
                return Ok(());
            };
            self.apply(d)?;
            self.settle();
            budget = budget.checked_sub(1).ok_or_else(|| {
                Error::Divergence(format!("{} loops without progress at t={}", strategy.name(), self.time))
            })?;
        }
    }

    fn apply(&mut self, d: Directive) -> Result<()> {
        match d {
            Directive::Continue => {}
            Directive::Wake(t) => {
                if t < self.time - EPS || !t.is_finite() {
                    return Err(Error::Protocol(format!("wake time {t} lies before now ({})", self.time)));
                }
                self.wake = Some(t);
            }
            Directive::ReturnHome => {
                if self.returning {
                    return Ok(());
                }
                let had_work = !self.plan.is_empty() || self.leg.is_some();
                self.clear_motion();
                if self.pos.approx_eq(&self.origin, EPS) {
                    self.pos = self.origin;
                    self.plan_done = had_work;
                } else {
                    self.record(EventKind::ReturnHome, None);
                    self.plan.push_back(Action::MoveTo(self.origin));
                    self.returning = true;
                }
            }
            Directive::Replace(plan) => {
                if self.returning {
                    return Err(Error::Protocol("plan replaced while returning home".into()));
                }
                self.clear_motion();
                self.record(EventKind::PlanReplaced, None);
                self.plan.extend(plan.actions);
            }
            Directive::Idle => {
                if self.returning {
                    return Err(Error::Protocol("idle requested while returning home".into()));
                }
                if !self.plan.is_empty() || self.leg.is_some() {
                    self.clear_motion();
                    self.record(EventKind::PlanReplaced, None);
                }
            }
        }
        Ok(())
    }

    fn clear_motion(&mut self) {
        self.plan.clear();
        self.leg = None;
        self.plan_done = false;
        if self.waiting_since.take().is_some() {
            self.record(EventKind::WaitEnd, None);
        }
    }

    /// Executes every action that takes no time and starts the next leg or
    /// wait.
    fn settle(&mut self) {
        let had_plan = !self.plan.is_empty();
        while let Some(&action) = self.plan.front() {
            if self.leg.is_some() {
                return;
            }
            self.serve_here();
            match action {
                Action::MoveTo(p) => {
                    if self.pos.approx_eq(&p, EPS) {
                        self.pos = p;
                        self.plan.pop_front();
                    } else {
                        self.leg = Some(Leg { from: self.pos, to: p, start: self.time });
                        self.record(EventKind::Depart, None);
                        return;
                    }
                }
                Action::WaitUntil(t) => {
                    if t <= self.time + TIME_EPS {
                        self.end_wait();
                        self.plan.pop_front();
                    } else {
                        self.begin_wait();
                        return;
                    }
                }
                Action::WaitForRelease(id) => {
                    let released = self.status.get(id.wrapping_sub(1)).is_some_and(|s| s.released);
                    if released {
                        self.end_wait();
                        self.record(EventKind::Checkpoint, Some(id));
                        self.plan.pop_front();
                    } else {
                        self.begin_wait();
                        return;
                    }
                }
                Action::Service(_, _) => {
                    self.plan.pop_front();
                }
            }
        }
        self.serve_here();
        if had_plan && self.plan.is_empty() {
            if self.returning {
                self.returning = false;
                self.pos = self.origin;
            }
            self.plan_done = true;
        }
    }

    fn begin_wait(&mut self) {
        if self.waiting_since.is_none() {
            self.waiting_since = Some(self.time);
            self.record(EventKind::WaitBegin, None);
        }
    }

    fn end_wait(&mut self) {
        if self.waiting_since.take().is_some() {
            self.record(EventKind::WaitEnd, None);
        }
    }

    /// Serves every released request located at the current position.
    fn serve_here(&mut self) {
        for k in 0..self.status.len() {
            let s = self.status[k];
            if !s.released || s.done {
                continue;
            }
            let r = self.instance.requests[k];
            match r.delivery {
                None => {
                    if self.pos.approx_eq(&r.position, EPS) {
                        self.status[k].picked = true;
                        self.status[k].done = true;
                        self.service_times[k] = self.time;
                        self.record(EventKind::Service, Some(r.id));
                    }
                }
                Some(b) => {
                    if !s.picked && self.pos.approx_eq(&r.position, EPS) {
                        self.status[k].picked = true;
                        self.record(EventKind::Pickup, Some(r.id));
                    }
                    if self.status[k].picked && self.pos.approx_eq(&b, EPS) {
                        self.status[k].done = true;
                        self.service_times[k] = self.time;
                        self.record(EventKind::Delivery, Some(r.id));
                    }
                }
            }
        }
    }

    fn next_time(&self) -> f64 {
        let mut next = f64::INFINITY;
        if let Some(r) = self.instance.requests.get(self.next_release) {
            next = next.min(r.release);
        }
        if let Some(w) = self.wake {
            next = next.min(w);
        }
        match (self.leg, self.plan.front()) {
            (Some(leg), _) => {
                next = next.min(leg.end());
                if self.all_done() {
                    if let Some(s) = crossing(&leg, &self.origin) {
                        next = next.min(leg.start + s);
                    }
                }
            }
            (None, Some(Action::WaitUntil(t))) => next = next.min(*t),
            _ => {}
        }
        next.max(self.time)
    }

    fn advance(&mut self, t: f64) {
        self.time = t;
        if let Some(leg) = self.leg {
            let len = leg.from.dist(&leg.to);
            let s = t - leg.start;
            if s >= len - TIME_EPS {
                self.pos = leg.to;
                self.leg = None;
                self.record(EventKind::Arrive, None);
            } else {
                self.pos = leg.from.toward(&leg.to, s);
            }
        }
    }
}

/// Arc length along the leg's interior at which it passes through `target`.
fn crossing(leg: &Leg, target: &Point) -> Option<f64> {
    let len = leg.from.dist(&leg.to);
    if len <= 0.0 {
        return None;
    }
    let (dx, dy) = ((leg.to.x() - leg.from.x()) / len, (leg.to.y() - leg.from.y()) / len);
    let s = (target.x() - leg.from.x()) * dx + (target.y() - leg.from.y()) * dy;
    (s > TIME_EPS && s < len && leg.from.toward(&leg.to, s).approx_eq(target, EPS)).then_some(s)
}

/// Server position at time `t`, reconstructed from the trace events.
pub fn position_at(trace: &Trace, t: f64) -> Result<Point> {
    let events = &trace.events;
    if !(t >= -EPS && t <= trace.completion_time + EPS) {
        return Err(Error::invalid(format!("time {t} outside [0, {}]", trace.completion_time)));
    }
    if events.first().is_none_or(|e| t < e.t) {
        return Ok(trace.origin);
    }
    let k = events.partition_point(|e| e.t <= t);
    let a = &events[k - 1];
    let Some(b) = events.get(k) else { return Ok(a.pos) };
    let frac = (t - a.t) / (b.t - a.t);
    Ok(a.pos.toward(&b.pos, frac * a.pos.dist(&b.pos)))
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    action: usize,
    t0: f64,
    from: Point,
    to: Point,
    wait: f64,
}

impl Segment {
    fn duration(&self) -> f64 {
        self.from.dist(&self.to) + self.wait
    }

    fn at(&self, dt: f64) -> Point {
        self.from.toward(&self.to, dt)
    }
}

fn timeline(start: Point, start_time: f64, actions: &[Action]) -> (Vec<Segment>, f64, Point) {
    let (mut pos, mut t) = (start, start_time);
    let mut segs = Vec::new();
    for (k, a) in actions.iter().enumerate() {
        match *a {
            Action::MoveTo(p) => {
                let seg = Segment { action: k, t0: t, from: pos, to: p, wait: 0.0 };
                t += seg.duration();
                pos = p;
                segs.push(seg);
            }
            Action::WaitUntil(w) if w > t => {
                segs.push(Segment { action: k, t0: t, from: pos, to: pos, wait: w - t });
                t = w;
            }
            _ => {}
        }
    }
    (segs, t, pos)
}

/// Where a plan should be abandoned so that heading straight home arrives by
/// a deadline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurnPoint {
    pub time: f64,
    pub point: Point,
    /// Index of the action in progress at the turn; equals the action count
    /// when the plan can be completed in full.
    pub action: usize,
}

/// Latest moment τ on the plan with τ + d(p(τ), o) ≤ `deadline`.
///
/// Along any unit-speed path τ + d(p(τ), o) never decreases, so the scan
/// walks segments backwards to the last one starting below the deadline and
/// bisects inside it.
pub fn find_t_back(
    origin: Point,
    start: Point,
    start_time: f64,
    actions: &[Action],
    deadline: f64,
) -> Result<TurnPoint> {
    let g = |t: f64, p: &Point| t + p.dist(&origin);
    if g(start_time, &start) > deadline + EPS {
        return Err(Error::InternalConsistency(format!(
            "cannot be home by {deadline}: already needs {}",
            g(start_time, &start)
        )));
    }
    let (segs, end, end_pos) = timeline(start, start_time, actions);
    if g(end, &end_pos) <= deadline {
        return Ok(TurnPoint { time: end, point: end_pos, action: actions.len() });
    }
    let seg = segs
        .iter()
        .rev()
        .find(|s| g(s.t0, &s.from) <= deadline)
        .copied()
        .ok_or_else(|| Error::InternalConsistency("no segment starts before the deadline".into()))?;
    let (mut lo, mut hi) = (0.0, seg.duration());
    if seg.wait > 0.0 {
        lo = (deadline - g(seg.t0, &seg.from)).clamp(0.0, hi);
    } else {
        for _ in 0..64 {
            if hi - lo <= 1e-12 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if g(seg.t0 + mid, &seg.at(mid)) <= deadline {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(TurnPoint { time: seg.t0 + lo, point: seg.at(lo), action: seg.action })
}

/// The plan prefix executed before the turn, followed by the way home.
pub fn truncate_at(actions: &[Action], turn: &TurnPoint, origin: Point) -> Vec<Action> {
    let mut out: Vec<Action> = actions[..turn.action.min(actions.len())].to_vec();
    if let Some(a) = actions.get(turn.action) {
        match a {
            Action::WaitUntil(_) => out.push(Action::WaitUntil(turn.time)),
            _ => out.push(Action::MoveTo(turn.point)),
        }
        out.push(Action::MoveTo(origin));
    }
    out
}

impl Trace {
    /// One JSON object per event.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let coords: Vec<String> = e.pos.coords().iter().map(|c| crate::instance::fmt_num(*c)).collect();
            let id = e.id.map_or("null".to_string(), |i| i.to_string());
            let _ = writeln!(
                out,
                "{{\"t\":{},\"kind\":\"{}\",\"pos\":[{}],\"id\":{}}}",
                crate::instance::fmt_num(e.t),
                e.kind.as_str(),
                coords.join(","),
                id
            );
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace> {
        let mut events = Vec::new();
        for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let field = |name: &str| format!("line {}: {name}", k + 1);
            let v: Value = serde_json::from_str(line)
                .map_err(|e| Error::schema(field("json"), e.to_string()))?;
            let t = v.get("t").and_then(Value::as_f64).ok_or_else(|| Error::schema(field("t"), "missing"))?;
            let kind = v
                .get("kind")
                .and_then(Value::as_str)
                .and_then(EventKind::parse)
                .ok_or_else(|| Error::schema(field("kind"), "missing or unknown"))?;
            let coords: Vec<f64> = v
                .get("pos")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::schema(field("pos"), "missing"))?
                .iter()
                .map(|c| c.as_f64().ok_or_else(|| Error::schema(field("pos"), "not a number")))
                .collect::<Result<_>>()?;
            let pos = Point::from_coords(&coords).map_err(|e| Error::schema(field("pos"), e.to_string()))?;
            let id = match v.get("id") {
                None | Some(Value::Null) => None,
                Some(x) => Some(x.as_u64().ok_or_else(|| Error::schema(field("id"), "not an integer"))? as usize),
            };
            if events.last().is_some_and(|p: &Event| p.t > t) {
                return Err(Error::schema(field("t"), "events out of order"));
            }
            events.push(Event { t, kind, pos, id });
        }
        let completion_time = events.last().map_or(0.0, |e| e.t);
        let n = events.iter().filter(|e| e.kind == EventKind::Release).count();
        let mut service_times = vec![f64::NAN; n];
        for e in &events {
            if matches!(e.kind, EventKind::Service | EventKind::Delivery) {
                if let Some(slot) = e.id.and_then(|i| service_times.get_mut(i.wrapping_sub(1))) {
                    *slot = e.t;
                }
            }
        }
        let origin = events.first().map_or(Point::line(0.0), |e| e.pos.scaled(0.0));
        Ok(Trace { origin, events, completion_time, service_times })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Request;

    /// Serves released requests one at a time in id order, returning home
    /// between them.
    struct Shuttle {
        release_log: Vec<f64>,
    }

    impl Shuttle {
        fn next(&self, view: &View) -> Directive {
            if !view.at_origin() {
                return Directive::ReturnHome;
            }
            match view.unserved().first() {
                Some(r) => Directive::Replace(Plan::new(
                    vec![Action::MoveTo(r.position), Action::MoveTo(view.origin())],
                    view.time(),
                )),
                None => Directive::Idle,
            }
        }
    }

    impl Strategy for Shuttle {
        fn name(&self) -> String {
            "shuttle".into()
        }
        fn init(&mut self, _: &View) -> Result<Directive> {
            Ok(Directive::Idle)
        }
        fn on_release(&mut self, view: &View, _: usize) -> Result<Directive> {
            self.release_log.push(view.time());
            Ok(if view.is_idle() { self.next(view) } else { Directive::Continue })
        }
        fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
            Ok(self.next(view))
        }
    }

    fn line(reqs: &[(f64, f64)]) -> Instance {
        let requests =
            reqs.iter().enumerate().map(|(k, &(t, x))| Request::point(k + 1, t, Point::line(x))).collect();
        Instance::new(Space::line(), Problem::Tsp, requests).unwrap()
    }

    #[test]
    fn empty_instance_completes_at_zero() {
        let trace = run(&line(&[]), &mut Shuttle { release_log: vec![] }).unwrap();
        assert_eq!(trace.completion_time, 0.0);
        assert!(trace.events.is_empty());
        assert_eq!(position_at(&trace, 0.0).unwrap(), Point::line(0.0));
    }

    #[test]
    fn shuttle_run() {
        let inst = line(&[(0.5, 1.0), (1.0, -0.5)]);
        let mut s = Shuttle { release_log: vec![] };
        let trace = run(&inst, &mut s).unwrap();
        assert_eq!(s.release_log, vec![0.5, 1.0]);
        assert!((trace.completion_time - 3.5).abs() < 1e-12);
        assert_eq!(trace.service_times, vec![1.5, 3.0]);
        assert_eq!(position_at(&trace, 0.0).unwrap(), Point::line(0.0));
        assert!((position_at(&trace, 1.0).unwrap().x() - 0.5).abs() < 1e-12);
        assert!((position_at(&trace, 2.75).unwrap().x() + 0.25).abs() < 1e-12);
        assert_eq!(position_at(&trace, trace.completion_time).unwrap(), Point::line(0.0));
        assert!(position_at(&trace, 4.0).is_err());
        let again = run(&inst, &mut Shuttle { release_log: vec![] }).unwrap();
        assert_eq!(trace, again);
        let back = Trace::from_jsonl(&trace.to_jsonl()).unwrap();
        assert_eq!(back.completion_time, trace.completion_time);
        assert_eq!(back.events.len(), trace.events.len());
        assert_eq!(back.service_times, trace.service_times);
    }

    struct Stubborn;
    impl Strategy for Stubborn {
        fn name(&self) -> String {
            "stubborn".into()
        }
        fn init(&mut self, _: &View) -> Result<Directive> {
            Ok(Directive::Idle)
        }
        fn on_release(&mut self, _: &View, _: usize) -> Result<Directive> {
            Ok(Directive::Continue)
        }
        fn on_plan_complete(&mut self, _: &View) -> Result<Directive> {
            Ok(Directive::Continue)
        }
    }

    #[test]
    fn stuck_strategy_is_a_protocol_error() {
        assert!(matches!(run(&line(&[(1.0, 1.0)]), &mut Stubborn), Err(Error::Protocol(_))));
    }

    struct Wanderer;
    impl Strategy for Wanderer {
        fn name(&self) -> String {
            "wanderer".into()
        }
        fn init(&mut self, v: &View) -> Result<Directive> {
            Ok(Directive::Replace(Plan::new(vec![Action::MoveTo(Point::line(1.0)), Action::WaitUntil(2e6)], v.time())))
        }
        fn on_release(&mut self, _: &View, _: usize) -> Result<Directive> {
            Ok(Directive::Continue)
        }
        fn on_plan_complete(&mut self, _: &View) -> Result<Directive> {
            Ok(Directive::Continue)
        }
    }

    #[test]
    fn divergence_guard() {
        assert!(matches!(run(&line(&[(0.0, 5.0)]), &mut Wanderer), Err(Error::Divergence(_))));
    }

    #[test]
    fn t_back_examples() {
        let o = Point::line(0.0);
        let plan = [Action::MoveTo(Point::line(1.0)), Action::MoveTo(o)];
        let turn = find_t_back(o, o, 0.0, &plan, 1.2).unwrap();
        assert!((turn.time - 0.6).abs() < 1e-9);
        assert!((turn.point.x() - 0.6).abs() < 1e-9);
        let turn = find_t_back(o, o, 0.0, &plan, 2.0).unwrap();
        assert_eq!(turn.time, 2.0);
        assert_eq!(turn.action, plan.len());
        let po = Point::plane(0.0, 0.0);
        let plan = [Action::MoveTo(Point::plane(1.0, 0.0)), Action::MoveTo(po)];
        let turn = find_t_back(po, po, 0.0, &plan, 1.0).unwrap();
        assert!((turn.time - 0.5).abs() < 1e-9);
        assert!(find_t_back(o, Point::line(3.0), 0.0, &plan[..0], 1.0).is_err());
    }

    #[test]
    fn truncated_plan_reaches_home_on_deadline() {
        let o = Point::plane(0.0, 0.0);
        let plan = vec![
            Action::MoveTo(Point::plane(1.0, 2.0)),
            Action::WaitUntil(4.0),
            Action::MoveTo(Point::plane(-1.0, 1.0)),
            Action::MoveTo(o),
        ];
        for deadline in [1.0, 3.0, 4.5, 5.0, 6.5] {
            let turn = find_t_back(o, o, 0.0, &plan, deadline).unwrap();
            let cut = truncate_at(&plan, &turn, o);
            let (_, end, end_pos) = timeline(o, 0.0, &cut);
            assert!(end_pos.approx_eq(&o, 1e-12));
            assert!((end - deadline).abs() < 1e-9, "deadline {deadline}: home at {end}");
        }
    }
}
