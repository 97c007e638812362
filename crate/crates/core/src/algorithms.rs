//! Online strategies for OLTSP and OLDARP, with and without predictions.
//!
//! Plans are built at the origin from the released, unserved requests. Ride
//! requests use the exact dial-a-ride solver; point requests use the chosen
//! subsolver. Every strategy falls back to planning at the origin whenever
//! released work remains after its own schedule has run out.

use crate::error::{Error, Result};
use crate::instance::{Prediction, PredictionModel, Problem, Request};
use crate::metric::{Point, Space, EPS};
use crate::offline::{christofides, ExactSolver, Route, WaypointKind};
use crate::sim::{find_t_back, truncate_at, Action, Directive, Plan, ServiceKind, Strategy, View};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubSolver {
    Exact,
    Christofides,
}

impl SubSolver {
    pub fn as_str(self) -> &'static str {
        match self {
            SubSolver::Exact => "exact",
            SubSolver::Christofides => "christofides",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SubSolver::Exact),
            "christofides" => Ok(SubSolver::Christofides),
            other => Err(Error::invalid(format!("unknown subsolver `{other}`"))),
        }
    }
}

fn service_kind(kind: WaypointKind) -> Option<(usize, ServiceKind)> {
    match kind {
        WaypointKind::Depot => None,
        WaypointKind::Visit(i) => Some((i, ServiceKind::Visit)),
        WaypointKind::Pickup(i) => Some((i, ServiceKind::Pickup)),
        WaypointKind::Delivery(i) => Some((i, ServiceKind::Delivery)),
    }
}

/// Executable form of a route that starts where the server stands.
fn route_actions(route: &Route) -> Vec<Action> {
    let mut actions = Vec::with_capacity(2 * route.waypoints.len());
    for w in route.waypoints.iter().skip(1) {
        actions.push(Action::MoveTo(w.point));
        if let Some((id, kind)) = service_kind(w.kind) {
            actions.push(Action::Service(id, kind));
        }
    }
    actions
}

/// Travel distance of a plan from `start`.
fn path_length(start: Point, actions: &[Action]) -> f64 {
    let mut pos = start;
    let mut len = 0.0;
    for a in actions {
        if let Action::MoveTo(p) = a {
            len += pos.dist(p);
            pos = *p;
        }
    }
    len
}

/// Tour from the origin over point requests; kinds carry request ids.
fn point_tour(space: Space, reqs: &[Request], solver: SubSolver) -> Result<Route> {
    match solver {
        SubSolver::Exact => ExactSolver::default().tsp_tour_requests(space, reqs),
        SubSolver::Christofides => {
            let pts: Vec<Point> = reqs.iter().map(|r| r.position).collect();
            let mut route = christofides(space, &pts)?;
            for w in &mut route.waypoints {
                if let WaypointKind::Visit(k) = w.kind {
                    w.kind = WaypointKind::Visit(reqs[k].id);
                }
            }
            Ok(route)
        }
    }
}

/// Tour from the origin over everything released and not yet finished.
fn home_tour(view: &View, solver: SubSolver) -> Result<Option<Route>> {
    let unserved = view.unserved();
    if unserved.is_empty() {
        return Ok(None);
    }
    let route = match view.problem() {
        Problem::Tsp => point_tour(view.space(), &unserved, solver)?,
        Problem::Darp => ExactSolver::default().darp_tour(view.space(), &unserved, &view.onboard())?,
    };
    Ok(Some(route))
}

/// Route for the predicted requests under their predicted release times.
fn predicted_route(space: Space, problem: Problem, preds: &[Request], solver: SubSolver) -> Result<Route> {
    match (problem, solver) {
        (_, SubSolver::Exact) => Ok(ExactSolver::default().timed_opt(space, preds, 0.0)?.0),
        (Problem::Tsp, SubSolver::Christofides) => {
            let mut route = point_tour(space, preds, solver)?;
            route.completion = route.timed_completion(0.0, |k| release_of(preds, k));
            Ok(route)
        }
        (Problem::Darp, SubSolver::Christofides) => {
            Err(Error::invalid("dial-a-ride strategies support only the exact subsolver"))
        }
    }
}

fn release_of(preds: &[Request], kind: WaypointKind) -> f64 {
    match kind {
        WaypointKind::Visit(i) | WaypointKind::Pickup(i) => {
            preds.iter().find(|r| r.id == i).map_or(0.0, |r| r.release)
        }
        _ => 0.0,
    }
}

/// Replays a route's schedule: each stop is left no earlier than the
/// predicted release of its request.
fn replay_actions(route: &Route, preds: &[Request]) -> Vec<Action> {
    let mut actions = Vec::new();
    for w in route.waypoints.iter().skip(1) {
        actions.push(Action::MoveTo(w.point));
        if matches!(w.kind, WaypointKind::Visit(_) | WaypointKind::Pickup(_)) {
            actions.push(Action::WaitUntil(release_of(preds, w.kind)));
        }
    }
    actions
}

fn replace(actions: Vec<Action>, view: &View) -> Directive {
    Directive::Replace(Plan::new(actions, view.time()))
}

/// Plans a fresh tour at the origin, or idles when nothing is pending.
fn plan_from_home(view: &View, solver: SubSolver) -> Result<Directive> {
    Ok(match home_tour(view, solver)? {
        Some(route) => replace(route_actions(&route), view),
        None => Directive::Idle,
    })
}

/// Plans a tour at the origin that is cut short, if needed, so the server is
/// home again exactly at `deadline`.
fn plan_with_deadline(view: &View, solver: SubSolver, deadline: f64) -> Result<Directive> {
    let Some(route) = home_tour(view, solver)? else { return Ok(Directive::Idle) };
    let actions = route_actions(&route);
    let t = view.time();
    if deadline - t > 1e-9 && t + route.length > deadline {
        let turn = find_t_back(view.origin(), view.position(), t, &actions, deadline)?;
        if turn.time - t <= 1e-9 {
            return Ok(Directive::Idle);
        }
        return Ok(replace(truncate_at(&actions, &turn, view.origin()), view));
    }
    Ok(replace(actions, view))
}

/// Plan-at-home: tours start only at the origin; a release while moving
/// sends the server home only if it lies strictly farther from the origin
/// than the server.
#[derive(Clone, Debug)]
pub struct Pah {
    solver: SubSolver,
    delay: f64,
    flip_far_test: bool,
}

impl Pah {
    pub fn new(solver: SubSolver) -> Self {
        Pah { solver, delay: 0.0, flip_far_test: false }
    }

    /// Stays at the origin until `delay` before behaving as plain PAH.
    pub fn delayed(solver: SubSolver, delay: f64) -> Result<Self> {
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::invalid("delay must be finite and non-negative"));
        }
        Ok(Pah { solver, delay, flip_far_test: false })
    }

    /// Inverts the far/near comparison. Only useful to show that the bound
    /// checks catch a broken rule.
    #[doc(hidden)]
    pub fn with_flipped_test(mut self) -> Self {
        self.flip_far_test = true;
        self
    }

    fn home(&self, view: &View) -> Result<Directive> {
        if view.time() < self.delay {
            return Ok(Directive::Idle);
        }
        plan_from_home(view, self.solver)
    }
}

/// Far/near decision shared by PAH and the PAH phases of LAR-NID.
fn pah_on_release(view: &View, id: usize, flip: bool) -> Directive {
    let Some(r) = view.request(id) else { return Directive::Continue };
    let o = view.origin();
    let far = r.position.dist(&o) > view.position().dist(&o);
    if far != flip {
        Directive::ReturnHome
    } else {
        Directive::Continue
    }
}

impl Strategy for Pah {
    fn name(&self) -> String {
        if self.delay > 0.0 {
            format!("pah-delayed:{}", self.delay)
        } else {
            "pah".into()
        }
    }

    fn init(&mut self, _view: &View) -> Result<Directive> {
        Ok(if self.delay > 0.0 { Directive::Wake(self.delay) } else { Directive::Idle })
    }

    fn on_release(&mut self, view: &View, id: usize) -> Result<Directive> {
        if view.is_returning() || view.time() < self.delay {
            return Ok(Directive::Continue);
        }
        if view.at_origin() {
            return self.home(view);
        }
        Ok(pah_on_release(view, id, self.flip_far_test))
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        if !view.at_origin() {
            return Ok(Directive::ReturnHome);
        }
        self.home(view)
    }

    fn on_wake(&mut self, view: &View) -> Result<Directive> {
        if view.at_origin() && view.is_idle() {
            return self.home(view);
        }
        Ok(Directive::Continue)
    }
}

/// Returns home on every release and replans there. Works for both problems;
/// rides already on board stay on board.
#[derive(Clone, Debug)]
pub struct Redesign {
    solver: SubSolver,
}

impl Redesign {
    pub fn new(solver: SubSolver) -> Self {
        Redesign { solver }
    }
}

fn redesign_on_release(view: &View, solver: SubSolver) -> Result<Directive> {
    if view.is_returning() {
        Ok(Directive::Continue)
    } else if view.at_origin() {
        plan_from_home(view, solver)
    } else {
        Ok(Directive::ReturnHome)
    }
}

fn go_home_or_plan(view: &View, solver: SubSolver) -> Result<Directive> {
    if view.at_origin() {
        plan_from_home(view, solver)
    } else {
        Ok(Directive::ReturnHome)
    }
}

impl Strategy for Redesign {
    fn name(&self) -> String {
        "redesign".into()
    }

    fn init(&mut self, view: &View) -> Result<Directive> {
        check_solver(view.problem(), self.solver)?;
        Ok(Directive::Idle)
    }

    fn on_release(&mut self, view: &View, _id: usize) -> Result<Directive> {
        redesign_on_release(view, self.solver)
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        go_home_or_plan(view, self.solver)
    }
}

fn check_solver(problem: Problem, solver: SubSolver) -> Result<()> {
    if problem == Problem::Darp && solver == SubSolver::Christofides {
        return Err(Error::invalid("dial-a-ride strategies support only the exact subsolver"));
    }
    Ok(())
}

/// Replays the offline optimum of the predicted requests, then falls back to
/// [`Redesign`] with the exact subsolver for anything left over.
#[derive(Clone, Debug)]
pub struct FollowPrediction {
    predicted: Vec<Request>,
    replaying: bool,
}

impl FollowPrediction {
    pub fn new(predicted: Vec<Request>) -> Self {
        FollowPrediction { predicted, replaying: false }
    }
}

impl Strategy for FollowPrediction {
    fn name(&self) -> String {
        "follow-pred".into()
    }

    fn init(&mut self, view: &View) -> Result<Directive> {
        let route = predicted_route(view.space(), view.problem(), &self.predicted, SubSolver::Exact)?;
        let actions = replay_actions(&route, &self.predicted);
        if actions.is_empty() {
            return Ok(Directive::Idle);
        }
        self.replaying = true;
        Ok(replace(actions, view))
    }

    fn on_release(&mut self, view: &View, _id: usize) -> Result<Directive> {
        if self.replaying {
            return Ok(Directive::Continue);
        }
        redesign_on_release(view, SubSolver::Exact)
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        self.replaying = false;
        go_home_or_plan(view, SubSolver::Exact)
    }
}

/// Waits at the origin until the predicted last release, then serves
/// whatever has been released without ever interrupting a tour.
#[derive(Clone, Debug)]
pub struct WaitThenServe {
    t_hat: f64,
    solver: SubSolver,
}

impl WaitThenServe {
    pub fn new(t_hat: f64, solver: SubSolver) -> Result<Self> {
        if !(t_hat >= 0.0 && t_hat.is_finite()) {
            return Err(Error::invalid("predicted last release must be finite and non-negative"));
        }
        Ok(WaitThenServe { t_hat, solver })
    }
}

impl Strategy for WaitThenServe {
    fn name(&self) -> String {
        "wait-then-serve".into()
    }

    fn init(&mut self, view: &View) -> Result<Directive> {
        check_solver(view.problem(), self.solver)?;
        Ok(Directive::Wake(self.t_hat))
    }

    fn on_release(&mut self, view: &View, _id: usize) -> Result<Directive> {
        if view.time() >= self.t_hat && view.is_idle() && view.at_origin() {
            return plan_from_home(view, self.solver);
        }
        Ok(Directive::Continue)
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        go_home_or_plan(view, self.solver)
    }

    fn on_wake(&mut self, view: &View) -> Result<Directive> {
        if view.is_idle() && view.at_origin() {
            return plan_from_home(view, self.solver);
        }
        Ok(Directive::Continue)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NidPhase {
    /// Before the boundary: plan at home, always back by the boundary.
    Guarded,
    /// Boundary passed, waiting for the first pending request.
    AwaitWork,
    /// Following the predicted schedule.
    Replay,
    /// Predicted schedule done: plain planning at home.
    Leftover,
}

/// Learning-augmented routing without identities. Spends the first
/// λ·|T̂| time units on guarded planning at home, then replays the predicted
/// optimum T̂ once work is pending, then cleans up what is left. Point
/// requests use PAH rules outside the replay; ride requests use Redesign
/// rules.
#[derive(Clone, Debug)]
pub struct LarNid {
    predicted: Vec<Request>,
    lambda: f64,
    solver: SubSolver,
    phase: NidPhase,
    boundary: f64,
    replay: Vec<Action>,
}

impl LarNid {
    pub fn new(predicted: Vec<Request>, lambda: f64, solver: SubSolver) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::invalid(format!("confidence level {lambda} outside (0, 1]")));
        }
        Ok(LarNid {
            predicted,
            lambda,
            solver,
            phase: NidPhase::Guarded,
            boundary: 0.0,
            replay: Vec::new(),
        })
    }

    /// Time at which the guarded phase ends (λ·|T̂|); known after `init`.
    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    fn start_replay(&mut self, view: &View) -> Result<Directive> {
        if view.unserved().is_empty() {
            self.phase = NidPhase::AwaitWork;
            return Ok(Directive::Idle);
        }
        if self.replay.is_empty() {
            self.phase = NidPhase::Leftover;
            return plan_from_home(view, self.solver);
        }
        self.phase = NidPhase::Replay;
        Ok(replace(self.replay.clone(), view))
    }

    fn moving_release(&self, view: &View, id: usize) -> Directive {
        match view.problem() {
            Problem::Tsp => pah_on_release(view, id, false),
            Problem::Darp => Directive::ReturnHome,
        }
    }
}

impl Strategy for LarNid {
    fn name(&self) -> String {
        format!("lar-nid:{}", self.lambda)
    }

    fn init(&mut self, view: &View) -> Result<Directive> {
        check_solver(view.problem(), self.solver)?;
        let route = predicted_route(view.space(), view.problem(), &self.predicted, self.solver)?;
        self.boundary = self.lambda * route.completion;
        self.replay = replay_actions(&route, &self.predicted);
        if self.boundary <= 0.0 {
            self.phase = NidPhase::AwaitWork;
            return Ok(Directive::Idle);
        }
        Ok(Directive::Wake(self.boundary))
    }

    fn on_release(&mut self, view: &View, id: usize) -> Result<Directive> {
        match self.phase {
            NidPhase::Guarded => {
                if view.is_returning() {
                    Ok(Directive::Continue)
                } else if view.at_origin() {
                    if view.time() >= self.boundary - EPS {
                        return self.start_replay(view);
                    }
                    plan_with_deadline(view, self.solver, self.boundary)
                } else {
                    Ok(self.moving_release(view, id))
                }
            }
            NidPhase::AwaitWork => {
                if view.at_origin() && view.is_idle() {
                    self.start_replay(view)
                } else {
                    Ok(Directive::Continue)
                }
            }
            NidPhase::Replay => Ok(Directive::Continue),
            NidPhase::Leftover => {
                if view.is_returning() {
                    Ok(Directive::Continue)
                } else if view.at_origin() {
                    plan_from_home(view, self.solver)
                } else {
                    Ok(self.moving_release(view, id))
                }
            }
        }
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        if !view.at_origin() {
            return Ok(Directive::ReturnHome);
        }
        match self.phase {
            NidPhase::Guarded if view.time() < self.boundary - EPS => {
                plan_with_deadline(view, self.solver, self.boundary)
            }
            NidPhase::Guarded | NidPhase::AwaitWork => self.start_replay(view),
            NidPhase::Replay | NidPhase::Leftover => {
                self.phase = NidPhase::Leftover;
                plan_from_home(view, self.solver)
            }
        }
    }

    fn on_wake(&mut self, view: &View) -> Result<Directive> {
        if self.phase == NidPhase::Guarded && view.at_origin() && view.is_idle() {
            return self.start_replay(view);
        }
        Ok(Directive::Continue)
    }
}

/// Follows the predicted optimum and serves each actual request right after
/// its predicted partner, waiting at the partner until the actual release.
/// With `check_last` set (LAR-ID), the n-th release triggers a comparison
/// between finishing the predicted route and going home to serve what is
/// left with a fresh tour.
#[derive(Clone, Debug)]
pub struct Trusting {
    predicted: Vec<Request>,
    solver: SubSolver,
    check_last: bool,
    switched: bool,
    decided: bool,
}

impl Trusting {
    pub fn lar_trust(predicted: Vec<Request>) -> Self {
        Trusting { predicted, solver: SubSolver::Exact, check_last: false, switched: false, decided: false }
    }

    pub fn lar_id(predicted: Vec<Request>, solver: SubSolver) -> Self {
        Trusting { predicted, solver, check_last: true, switched: false, decided: false }
    }

    /// True once LAR-ID has abandoned the predicted route.
    pub fn switched(&self) -> bool {
        self.switched
    }

    fn insert(&self, view: &View, id: usize) -> Vec<Action> {
        let mut plan = view.remaining_plan();
        let Some(r) = view.request(id).copied() else { return plan };
        let mut markers =
            plan.iter().enumerate().filter(|(_, a)| **a == Action::WaitForRelease(id)).map(|(k, _)| k);
        let first = markers.next();
        let second = markers.next();
        match r.delivery {
            None => {
                if !view.is_served(id) {
                    let at = first.map_or(plan.len().saturating_sub(1), |k| k + 1);
                    plan.splice(at..at, [Action::MoveTo(r.position), Action::Service(id, ServiceKind::Visit)]);
                }
            }
            Some(b) => {
                if !view.is_served(id) {
                    let at = second.map_or(plan.len().saturating_sub(1), |k| k + 1);
                    plan.splice(at..at, [Action::MoveTo(b), Action::Service(id, ServiceKind::Delivery)]);
                }
                if !view.is_picked(id) {
                    let at = first.map_or(plan.len().saturating_sub(1), |k| k + 1);
                    plan.splice(at..at, [Action::MoveTo(r.position), Action::Service(id, ServiceKind::Pickup)]);
                }
            }
        }
        plan
    }
}

impl Strategy for Trusting {
    fn name(&self) -> String {
        if self.check_last { "lar-id" } else { "lar-trust" }.into()
    }

    fn init(&mut self, view: &View) -> Result<Directive> {
        check_solver(view.problem(), self.solver)?;
        let route = predicted_route(view.space(), view.problem(), &self.predicted, self.solver)?;
        let mut actions = Vec::new();
        for w in route.waypoints.iter().skip(1) {
            actions.push(Action::MoveTo(w.point));
            if let Some(id) = w.kind.id() {
                actions.push(Action::WaitForRelease(id));
            }
        }
        if actions.is_empty() {
            return Ok(Directive::Idle);
        }
        Ok(replace(actions, view))
    }

    fn on_release(&mut self, view: &View, id: usize) -> Result<Directive> {
        if self.switched {
            return Ok(Directive::Continue);
        }
        if view.is_idle() {
            return go_home_or_plan(view, self.solver);
        }
        let plan = self.insert(view, id);
        if self.check_last && !self.decided && view.released_count() == self.predicted.len() {
            self.decided = true;
            if plan.iter().any(|a| matches!(a, Action::WaitForRelease(j) if view.request(*j).is_none())) {
                return Err(Error::InternalConsistency("waiting for a release after the last one".into()));
            }
            let keep = path_length(view.position(), &plan);
            let tour = home_tour(view, self.solver)?.map_or(0.0, |r| r.length);
            let restart = view.position().dist(&view.origin()) + tour;
            if keep > restart + 1e-9 {
                self.switched = true;
                return Ok(Directive::ReturnHome);
            }
        }
        Ok(replace(plan, view))
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        go_home_or_plan(view, self.solver)
    }
}

/// Redesign rules plus a gadget that brings the server home exactly at the
/// predicted last release time.
#[derive(Clone, Debug)]
pub struct LarLast {
    t_hat: f64,
    solver: SubSolver,
}

impl LarLast {
    pub fn new(t_hat: f64, solver: SubSolver) -> Result<Self> {
        if !(t_hat >= 0.0 && t_hat.is_finite()) {
            return Err(Error::invalid("predicted last release must be finite and non-negative"));
        }
        Ok(LarLast { t_hat, solver })
    }

    fn home(&self, view: &View) -> Result<Directive> {
        plan_with_deadline(view, self.solver, self.t_hat)
    }
}

impl Strategy for LarLast {
    fn name(&self) -> String {
        "lar-last".into()
    }

    fn init(&mut self, view: &View) -> Result<Directive> {
        check_solver(view.problem(), self.solver)?;
        Ok(Directive::Idle)
    }

    fn on_release(&mut self, view: &View, _id: usize) -> Result<Directive> {
        if view.is_returning() {
            Ok(Directive::Continue)
        } else if view.at_origin() {
            self.home(view)
        } else {
            Ok(Directive::ReturnHome)
        }
    }

    fn on_plan_complete(&mut self, view: &View) -> Result<Directive> {
        if view.at_origin() {
            self.home(view)
        } else {
            Ok(Directive::ReturnHome)
        }
    }
}

/// Strategy selector as written on the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategySpec {
    Pah,
    PahDelayed(f64),
    Redesign,
    FollowPred,
    WaitThenServe,
    LarNid(f64),
    LarTrust,
    LarId,
    LarLast,
    DarpRedesign,
    LadarTrust,
    LadarNid(f64),
    LadarId,
    LadarLast,
}

impl StrategySpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::invalid(format!("`{head}` needs `:<{what}>`")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad {what} in `{s}`: {e}")))
        };
        let spec = match head {
            "pah" => StrategySpec::Pah,
            "pah-delayed" => StrategySpec::PahDelayed(num("t0")?),
            "redesign" => StrategySpec::Redesign,
            "follow-pred" => StrategySpec::FollowPred,
            "wait-then-serve" => StrategySpec::WaitThenServe,
            "lar-nid" => StrategySpec::LarNid(num("lambda")?),
            "lar-trust" => StrategySpec::LarTrust,
            "lar-id" => StrategySpec::LarId,
            "lar-last" => StrategySpec::LarLast,
            "darp-redesign" => StrategySpec::DarpRedesign,
            "ladar-trust" => StrategySpec::LadarTrust,
            "ladar-nid" => StrategySpec::LadarNid(num("lambda")?),
            "ladar-id" => StrategySpec::LadarId,
            "ladar-last" => StrategySpec::LadarLast,
            other => return Err(Error::invalid(format!("unknown strategy `{other}`"))),
        };
        let takes_arg = matches!(
            spec,
            StrategySpec::PahDelayed(_) | StrategySpec::LarNid(_) | StrategySpec::LadarNid(_)
        );
        if arg.is_some() && !takes_arg {
            return Err(Error::invalid(format!("`{head}` takes no parameter")));
        }
        if let Some(l) = spec.lambda() {
            if !(l > 0.0 && l <= 1.0) {
                return Err(Error::invalid(format!("confidence level {l} outside (0, 1]")));
            }
        }
        Ok(spec)
    }

    /// Strategy family without parameters.
    pub fn family(&self) -> &'static str {
        match self {
            StrategySpec::Pah => "pah",
            StrategySpec::PahDelayed(_) => "pah-delayed",
            StrategySpec::Redesign => "redesign",
            StrategySpec::FollowPred => "follow-pred",
            StrategySpec::WaitThenServe => "wait-then-serve",
            StrategySpec::LarNid(_) => "lar-nid",
            StrategySpec::LarTrust => "lar-trust",
            StrategySpec::LarId => "lar-id",
            StrategySpec::LarLast => "lar-last",
            StrategySpec::DarpRedesign => "darp-redesign",
            StrategySpec::LadarTrust => "ladar-trust",
            StrategySpec::LadarNid(_) => "ladar-nid",
            StrategySpec::LadarId => "ladar-id",
            StrategySpec::LadarLast => "ladar-last",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            StrategySpec::LarNid(l) | StrategySpec::LadarNid(l) => Some(*l),
            _ => None,
        }
    }

    pub fn problem(&self) -> Problem {
        match self {
            StrategySpec::DarpRedesign
            | StrategySpec::LadarTrust
            | StrategySpec::LadarNid(_)
            | StrategySpec::LadarId
            | StrategySpec::LadarLast => Problem::Darp,
            _ => Problem::Tsp,
        }
    }

    /// Prediction model the strategy consumes, if any.
    pub fn model(&self) -> Option<PredictionModel> {
        match self {
            StrategySpec::Pah | StrategySpec::PahDelayed(_) | StrategySpec::Redesign | StrategySpec::DarpRedesign => {
                None
            }
            StrategySpec::FollowPred | StrategySpec::LarNid(_) | StrategySpec::LadarNid(_) => {
                Some(PredictionModel::Nid)
            }
            StrategySpec::LarTrust | StrategySpec::LarId | StrategySpec::LadarTrust | StrategySpec::LadarId => {
                Some(PredictionModel::Id)
            }
            StrategySpec::WaitThenServe | StrategySpec::LarLast | StrategySpec::LadarLast => {
                Some(PredictionModel::Last)
            }
        }
    }

    /// Instantiates a fresh strategy for one run.
    pub fn build(
        &self,
        solver: SubSolver,
        problem: Problem,
        prediction: Option<&Prediction>,
    ) -> Result<Box<dyn Strategy + Send>> {
        if problem != self.problem() {
            return Err(Error::invalid(format!(
                "strategy `{}` does not apply to {} instances",
                self,
                problem.as_str()
            )));
        }
        check_solver(problem, solver)?;
        let sequence = || -> Result<Vec<Request>> {
            match prediction {
                Some(Prediction::Nid(r)) | Some(Prediction::Id(r)) => Ok(r.clone()),
                _ => Err(Error::invalid(format!("`{self}` needs a predicted request sequence"))),
            }
        };
        let paired = || -> Result<Vec<Request>> {
            match prediction {
                Some(Prediction::Id(r)) => Ok(r.clone()),
                _ => Err(Error::invalid(format!("`{self}` needs an id prediction"))),
            }
        };
        let last = || -> Result<f64> {
            match prediction {
                Some(Prediction::Last(t)) => Ok(*t),
                _ => Err(Error::invalid(format!("`{self}` needs a last-arrival prediction"))),
            }
        };
        Ok(match *self {
            StrategySpec::Pah => Box::new(Pah::new(solver)),
            StrategySpec::PahDelayed(t0) => Box::new(Pah::delayed(solver, t0)?),
            StrategySpec::Redesign | StrategySpec::DarpRedesign => Box::new(Redesign::new(solver)),
            StrategySpec::FollowPred => Box::new(FollowPrediction::new(sequence()?)),
            StrategySpec::WaitThenServe => Box::new(WaitThenServe::new(last()?, solver)?),
            StrategySpec::LarNid(l) | StrategySpec::LadarNid(l) => Box::new(LarNid::new(sequence()?, l, solver)?),
            StrategySpec::LarTrust | StrategySpec::LadarTrust => Box::new(Trusting::lar_trust(paired()?)),
            StrategySpec::LarId | StrategySpec::LadarId => Box::new(Trusting::lar_id(paired()?, solver)),
            StrategySpec::LarLast | StrategySpec::LadarLast => Box::new(LarLast::new(last()?, solver)?),
        })
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::PahDelayed(t) => write!(f, "pah-delayed:{t}"),
            StrategySpec::LarNid(l) => write!(f, "lar-nid:{l}"),
            StrategySpec::LadarNid(l) => write!(f, "ladar-nid:{l}"),
            other => f.write_str(other.family()),
        }
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::instance::{gen_random, perturb_prediction, Instance, Noise, RandomParams};
    use crate::metric::SpaceKind;
    use crate::sim::{position_at, run, Event, EventKind, Trace};
    use proptest::prelude::*;

    const TSP: &[&str] = &[
        "pah", "pah-delayed:1", "redesign", "follow-pred", "wait-then-serve", "lar-nid:0.5", "lar-trust", "lar-id",
        "lar-last",
    ];
    const DARP: &[&str] = &["darp-redesign", "ladar-trust", "ladar-nid:0.5", "ladar-id", "ladar-last"];

    fn scenario(problem: Problem, plane: bool, n: usize, seed: u64) -> (Instance, Prediction) {
        let space = if plane { SpaceKind::Plane } else { SpaceKind::Line };
        let inst = gen_random(&RandomParams { problem, space, n, ..Default::default() }, seed);
        let pred = perturb_prediction(&inst, Noise { time: 0.5, pos: 0.5 }, seed ^ 0x5eed).unwrap();
        (inst, pred)
    }

    fn prediction_for(spec: &StrategySpec, pred: &Prediction) -> Option<Prediction> {
        let reqs = pred.requests().unwrap();
        spec.model().map(|m| match m {
            PredictionModel::Nid => Prediction::Nid(reqs.to_vec()),
            PredictionModel::Id => pred.clone(),
            PredictionModel::Last => Prediction::Last(reqs.iter().map(|r| r.release).fold(0.0, f64::max)),
        })
    }

    fn simulate(name: &str, solver: SubSolver, inst: &Instance, pred: &Prediction) -> Trace {
        let spec = StrategySpec::parse(name).unwrap();
        let p = prediction_for(&spec, pred);
        let mut s = spec.build(solver, inst.problem, p.as_ref()).unwrap();
        run(inst, s.as_mut()).unwrap()
    }

    fn motion(events: &[Event], before: f64) -> Vec<Event> {
        events.iter().filter(|e| e.t < before - 1e-9 && e.kind != EventKind::Complete).cloned().collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn completion_scales_linearly(seed in any::<u64>(), plane in any::<bool>(), darp in any::<bool>(), k in 0usize..3) {
            let c = [0.5, 2.0, 4.0][k];
            let problem = if darp { Problem::Darp } else { Problem::Tsp };
            let (inst, pred) = scenario(problem, plane, 4, seed);
            let (sinst, spred) = (inst.scaled(c), pred.scaled(c));
            for name in if darp { DARP } else { TSP } {
                for solver in [SubSolver::Exact, SubSolver::Christofides] {
                    if darp && solver == SubSolver::Christofides {
                        continue;
                    }
                    let spec = StrategySpec::parse(name).unwrap();
                    let scaled_name = match spec {
                        StrategySpec::PahDelayed(t) => format!("pah-delayed:{}", t * c),
                        _ => name.to_string(),
                    };
                    let z = simulate(name, solver, &inst, &pred).completion_time;
                    let zc = simulate(&scaled_name, solver, &sinst, &spred).completion_time;
                    prop_assert!((zc - c * z).abs() <= 1e-6 * (1.0 + c * z), "{name}: {zc} vs {c}·{z}");
                }
            }
        }

        #[test]
        fn server_moves_at_unit_speed(seed in any::<u64>(), plane in any::<bool>(), darp in any::<bool>()) {
            let problem = if darp { Problem::Darp } else { Problem::Tsp };
            let (inst, pred) = scenario(problem, plane, 5, seed);
            for name in if darp { DARP } else { TSP } {
                let trace = simulate(name, SubSolver::Exact, &inst, &pred);
                for w in trace.events.windows(2) {
                    prop_assert!(w[0].pos.dist(&w[1].pos) <= w[1].t - w[0].t + 1e-9, "{name}");
                }
                let last = trace.events.last().unwrap();
                prop_assert!(last.pos.norm() < 1e-9);
                for (r, &s) in inst.requests.iter().zip(&trace.service_times) {
                    prop_assert!(s >= r.release - 1e-9 && s <= trace.completion_time + 1e-9);
                }
            }
        }

        #[test]
        fn no_clairvoyance(seed in any::<u64>(), plane in any::<bool>(), cut in 1usize..5) {
            let (inst, pred) = scenario(Problem::Tsp, plane, 5, seed);
            let tau = inst.requests[cut].release;
            prop_assume!(inst.requests[cut - 1].release < tau - 1e-6);
            let mut altered = inst.requests.clone();
            for r in &mut altered[cut..] {
                r.position = r.position.scaled(-0.5);
            }
            let other = Instance::new(inst.space, inst.problem, altered).unwrap();
            for name in TSP {
                let full = simulate(name, SubSolver::Exact, &inst, &pred);
                let part = simulate(name, SubSolver::Exact, &other, &pred);
                prop_assert_eq!(motion(&full.events, tau), motion(&part.events, tau), "{}", name);
            }
        }

        #[test]
        fn trust_keeps_predicted_order(seed in any::<u64>(), plane in any::<bool>(), darp in any::<bool>()) {
            let problem = if darp { Problem::Darp } else { Problem::Tsp };
            let (inst, pred) = scenario(problem, plane, 4, seed);
            let preds = pred.requests().unwrap();
            let route = predicted_route(inst.space, problem, preds, SubSolver::Exact).unwrap();
            let expected: Vec<usize> = route.waypoints.iter().filter_map(|w| w.kind.id()).collect();
            let trace = run(&inst, &mut Trusting::lar_trust(preds.to_vec())).unwrap();
            let seen: Vec<usize> =
                trace.events.iter().filter(|e| e.kind == EventKind::Checkpoint).map(|e| e.id.unwrap()).collect();
            prop_assert_eq!(&seen, &expected);
            for e in trace.events.iter().filter(|e| e.kind == EventKind::Checkpoint) {
                prop_assert!(e.t >= inst.request(e.id.unwrap()).unwrap().release - 1e-9);
            }
        }

        #[test]
        fn lar_id_takes_the_cheaper_branch(seed in any::<u64>(), plane in any::<bool>()) {
            let (inst, pred) = scenario(Problem::Tsp, plane, 5, seed);
            let preds = pred.requests().unwrap().to_vec();
            let trust = run(&inst, &mut Trusting::lar_trust(preds.clone())).unwrap();
            let z_id = run(&inst, &mut Trusting::lar_id(preds, SubSolver::Exact)).unwrap().completion_time;
            let t_n = inst.last_release().unwrap();
            let here = position_at(&trust, t_n).unwrap();
            let left: Vec<Request> = inst
                .requests
                .iter()
                .zip(&trust.service_times)
                .filter(|(_, &s)| s > t_n)
                .map(|(r, _)| *r)
                .collect();
            let tour = if left.is_empty() {
                0.0
            } else {
                ExactSolver::default().tsp_tour_requests(inst.space, &left).unwrap().length
            };
            let restart = t_n + here.norm() + tour;
            let best = trust.completion_time.min(restart);
            prop_assert!((z_id - best).abs() <= 1e-6, "lar-id {z_id}, trust {}, restart {restart}", trust.completion_time);
        }

        #[test]
        fn lar_nid_is_home_at_boundary(seed in any::<u64>(), plane in any::<bool>(), darp in any::<bool>(), k in 0usize..3) {
            let lambda = [0.25, 0.5, 1.0][k];
            let problem = if darp { Problem::Darp } else { Problem::Tsp };
            let (inst, pred) = scenario(problem, plane, 4, seed);
            let mut s = LarNid::new(pred.requests().unwrap().to_vec(), lambda, SubSolver::Exact).unwrap();
            let trace = run(&inst, &mut s).unwrap();
            if trace.completion_time > s.boundary() {
                prop_assert!(position_at(&trace, s.boundary()).unwrap().norm() < 1e-6);
            }
        }
    }
}
