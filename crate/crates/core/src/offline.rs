//! Offline solvers: exact release-time dynamic programs for tours and rides,
//! Christofides' heuristic, and a brute-force oracle for tests.
//!
//! Every exact solver runs through one subset DP. A job is a request with one
//! stop (visit) or two stops (pickup then delivery); the state records how many
//! stops of each job are done, encoded in mixed radix. Forward values are
//! earliest arrival times; a backward pass of latest feasible times lets the
//! reconstruction pick the lexicographically smallest optimal order by id.

use crate::error::{Error, Result};
use crate::instance::{Instance, Problem, Request};
use crate::metric::{Point, Space};

pub const DEFAULT_TSP_LIMIT: usize = 14;
pub const DEFAULT_DARP_LIMIT: usize = 9;
/// Largest odd-degree vertex set the exact matching accepts.
pub const MATCHING_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaypointKind {
    Depot,
    Visit(usize),
    Pickup(usize),
    Delivery(usize),
}

impl WaypointKind {
    pub fn id(&self) -> Option<usize> {
        match *self {
            WaypointKind::Depot => None,
            WaypointKind::Visit(i) | WaypointKind::Pickup(i) | WaypointKind::Delivery(i) => Some(i),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    pub point: Point,
    pub kind: WaypointKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub waypoints: Vec<Waypoint>,
    /// Pure travel distance.
    pub length: f64,
    /// Travel plus forced waiting under the release times used to build it.
    pub completion: f64,
}

impl Route {
    fn from_points(start: Point, stops: Vec<Waypoint>, origin: Point) -> Route {
        let mut waypoints = Vec::with_capacity(stops.len() + 2);
        waypoints.push(Waypoint { point: start, kind: WaypointKind::Depot });
        waypoints.extend(stops);
        if waypoints.len() > 1 || !start.approx_eq(&origin, 0.0) {
            waypoints.push(Waypoint { point: origin, kind: WaypointKind::Depot });
        }
        let length = waypoints.windows(2).map(|w| w[0].point.dist(&w[1].point)).sum();
        Route { waypoints, length, completion: length }
    }

    /// Visits in order, excluding the depot anchors.
    pub fn stops(&self) -> impl Iterator<Item = &Waypoint> {
        self.waypoints.iter().filter(|w| w.kind != WaypointKind::Depot)
    }

    /// Completion time when departing at `start_time` and never serving a
    /// stop before `ready(kind)`.
    pub fn timed_completion(&self, start_time: f64, ready: impl Fn(WaypointKind) -> f64) -> f64 {
        let mut t = start_time;
        for w in self.waypoints.windows(2) {
            t = (t + w[0].point.dist(&w[1].point)).max(ready(w[1].kind));
        }
        t
    }
}

#[derive(Clone, Copy, Debug)]
struct Stop {
    point: Point,
    ready: f64,
    kind: WaypointKind,
}

#[derive(Clone, Debug)]
struct Job {
    stops: Vec<Stop>,
    done: usize,
}

impl Job {
    fn visit(id: usize, point: Point, ready: f64) -> Job {
        Job { stops: vec![Stop { point, ready, kind: WaypointKind::Visit(id) }], done: 0 }
    }

    fn ride(r: &Request, with_release: bool, onboard: bool) -> Job {
        let b = r.delivery.expect("ride request without delivery");
        Job {
            stops: vec![
                Stop {
                    point: r.position,
                    ready: if with_release { r.release } else { 0.0 },
                    kind: WaypointKind::Pickup(r.id),
                },
                Stop { point: b, ready: 0.0, kind: WaypointKind::Delivery(r.id) },
            ],
            done: usize::from(onboard),
        }
    }
}

struct Solution {
    stops: Vec<Waypoint>,
    value: f64,
}

/// Optimal route from `start` at `start_time` through every remaining stop and
/// back to `origin`. Jobs must be sorted by id.
fn solve(start: Point, start_time: f64, origin: Point, jobs: &[Job]) -> Solution {
    let mut radix = Vec::with_capacity(jobs.len());
    let mut weight = Vec::with_capacity(jobs.len());
    let mut offset = Vec::with_capacity(jobs.len());
    let (mut w, mut k) = (1usize, 1usize);
    let (mut init, mut full) = (0usize, 0usize);
    for job in jobs {
        radix.push(job.stops.len() + 1);
        weight.push(w);
        offset.push(k);
        init += job.done * w;
        full += job.stops.len() * w;
        w *= job.stops.len() + 1;
        k += job.stops.len();
    }
    let states = w;
    let slots = k;
    let mut points = vec![start; slots];
    for (j, job) in jobs.iter().enumerate() {
        for (s, stop) in job.stops.iter().enumerate() {
            points[offset[j] + s] = stop.point;
        }
    }
    let stage = |state: usize, j: usize| (state / weight[j]) % radix[j];
    let next = |state: usize, j: usize| -> Option<(usize, usize, &Stop)> {
        let s = stage(state, j);
        (s < jobs[j].stops.len()).then(|| (state + weight[j], offset[j] + s, &jobs[j].stops[s]))
    };

    let inf = f64::INFINITY;
    let mut earliest = vec![inf; states * slots];
    earliest[init * slots] = start_time;
    for state in init..=full {
        for last in 0..slots {
            let t = earliest[state * slots + last];
            if t == inf {
                continue;
            }
            for j in 0..jobs.len() {
                if let Some((ns, nl, stop)) = next(state, j) {
                    let arrive = (t + points[last].dist(&stop.point)).max(stop.ready);
                    let cell = &mut earliest[ns * slots + nl];
                    if arrive < *cell {
                        *cell = arrive;
                    }
                }
            }
        }
    }
    let value = (0..slots)
        .map(|l| earliest[full * slots + l] + points[l].dist(&origin))
        .fold(inf, f64::min);

    let tol = 1e-9 * value.abs().max(1.0);
    let mut latest = vec![-inf; states * slots];
    for l in 0..slots {
        latest[full * slots + l] = value - points[l].dist(&origin);
    }
    for state in (init..full).rev() {
        for last in 0..slots {
            let mut best = -inf;
            for j in 0..jobs.len() {
                if let Some((ns, nl, stop)) = next(state, j) {
                    let limit = latest[ns * slots + nl];
                    if stop.ready <= limit + tol {
                        best = best.max(limit - points[last].dist(&stop.point));
                    }
                }
            }
            latest[state * slots + last] = best;
        }
    }

    let mut stops = Vec::new();
    let (mut state, mut last, mut t) = (init, 0usize, start_time);
    while state != full {
        let mut choice: Option<(usize, usize, f64)> = None;
        let mut fallback: Option<(usize, usize, f64, f64)> = None;
        for j in 0..jobs.len() {
            if let Some((ns, nl, stop)) = next(state, j) {
                let arrive = (t + points[last].dist(&stop.point)).max(stop.ready);
                let slack = latest[ns * slots + nl] - arrive;
                if slack >= -tol {
                    choice = Some((ns, nl, arrive));
                    break;
                }
                if fallback.is_none_or(|f| slack > f.3) {
                    fallback = Some((ns, nl, arrive, slack));
                }
            }
        }
        let (ns, nl, arrive) = choice.or(fallback.map(|f| (f.0, f.1, f.2))).expect("stage left");
        let j = offset.iter().rposition(|&o| o <= nl).expect("slot owner");
        let stop = &jobs[j].stops[nl - offset[j]];
        stops.push(Waypoint { point: stop.point, kind: stop.kind });
        state = ns;
        last = nl;
        t = arrive;
    }
    Solution { stops, value }
}

fn finish(start: Point, start_time: f64, origin: Point, jobs: &[Job], sol: Solution) -> Route {
    let mut route = Route::from_points(start, sol.stops, origin);
    let ready = |kind: WaypointKind| {
        jobs.iter()
            .flat_map(|j| j.stops.iter())
            .find(|s| s.kind == kind)
            .map_or(0.0, |s| s.ready)
    };
    route.completion = route.timed_completion(start_time, ready);
    route
}

/// Exact solvers with configurable size limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactSolver {
    pub tsp_limit: usize,
    pub darp_limit: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        ExactSolver { tsp_limit: DEFAULT_TSP_LIMIT, darp_limit: DEFAULT_DARP_LIMIT }
    }
}

impl ExactSolver {
    fn check(&self, n: usize, problem: Problem) -> Result<()> {
        let limit = match problem {
            Problem::Tsp => self.tsp_limit,
            Problem::Darp => self.darp_limit,
        };
        if n > limit {
            return Err(Error::Capacity(format!(
                "{n} requests exceed the exact {} limit of {limit}; use christofides",
                problem.as_str()
            )));
        }
        Ok(())
    }

    /// Shortest closed tour from the origin through `points`, ignoring release
    /// times. Waypoint kinds are `Visit(k)` with `k` the index into `points`.
    pub fn tsp_tour(&self, space: Space, points: &[Point]) -> Result<Route> {
        self.check(points.len(), Problem::Tsp)?;
        check_points(space, points)?;
        let jobs: Vec<Job> = points.iter().enumerate().map(|(k, p)| Job::visit(k, *p, 0.0)).collect();
        let o = space.origin();
        let sol = solve(o, 0.0, o, &jobs);
        Ok(finish(o, 0.0, o, &jobs, sol))
    }

    /// Shortest tour over the given point requests, ignoring release times.
    pub fn tsp_tour_requests(&self, space: Space, requests: &[Request]) -> Result<Route> {
        self.check(requests.len(), Problem::Tsp)?;
        let jobs = sorted_jobs(requests, |r| Job::visit(r.id, r.position, 0.0));
        let o = space.origin();
        let sol = solve(o, 0.0, o, &jobs);
        Ok(finish(o, 0.0, o, &jobs, sol))
    }

    /// Earliest return to the origin when each request may only be served
    /// after its release, starting from the origin at `start_time`.
    pub fn oltsp_opt(&self, instance: &Instance, start_time: f64) -> Result<(Route, f64)> {
        if instance.problem != Problem::Tsp {
            return Err(Error::invalid("oltsp_opt needs a tsp instance"));
        }
        self.timed_opt(instance.space, &instance.requests, start_time)
    }

    /// Same as [`ExactSolver::oltsp_opt`] over a bare request list (ids need
    /// not be contiguous or sorted).
    pub fn timed_opt(&self, space: Space, requests: &[Request], start_time: f64) -> Result<(Route, f64)> {
        let darp = requests.iter().any(|r| r.delivery.is_some());
        self.check(requests.len(), if darp { Problem::Darp } else { Problem::Tsp })?;
        let jobs = sorted_jobs(requests, |r| {
            if darp {
                Job::ride(r, true, false)
            } else {
                Job::visit(r.id, r.position, r.release)
            }
        });
        let o = space.origin();
        let sol = solve(o, start_time, o, &jobs);
        let value = sol.value;
        Ok((finish(o, start_time, o, &jobs, sol), value))
    }

    /// Shortest ride route from the origin serving `requests`; ids listed in
    /// `onboard` are already loaded and only need delivery.
    pub fn darp_tour(&self, space: Space, requests: &[Request], onboard: &[usize]) -> Result<Route> {
        self.check(requests.len(), Problem::Darp)?;
        if let Some(r) = requests.iter().find(|r| r.delivery.is_none()) {
            return Err(Error::invalid(format!("request {} has no delivery point", r.id)));
        }
        let jobs = sorted_jobs(requests, |r| Job::ride(r, false, onboard.contains(&r.id)));
        let o = space.origin();
        let sol = solve(o, 0.0, o, &jobs);
        Ok(finish(o, 0.0, o, &jobs, sol))
    }

    pub fn oldarp_opt(&self, instance: &Instance, start_time: f64) -> Result<(Route, f64)> {
        if instance.problem != Problem::Darp {
            return Err(Error::invalid("oldarp_opt needs a darp instance"));
        }
        self.timed_opt(instance.space, &instance.requests, start_time)
    }

    /// Offline optimum of either problem from time zero.
    pub fn opt(&self, instance: &Instance) -> Result<f64> {
        Ok(self.timed_opt(instance.space, &instance.requests, 0.0)?.1)
    }
}

fn sorted_jobs(requests: &[Request], make: impl Fn(&Request) -> Job) -> Vec<Job> {
    let mut sorted: Vec<&Request> = requests.iter().collect();
    sorted.sort_by_key(|r| r.id);
    sorted.into_iter().map(make).collect()
}

fn check_points(space: Space, points: &[Point]) -> Result<()> {
    match points.iter().find(|p| !space.contains(p)) {
        Some(p) => Err(Error::invalid(format!("point {p:?} does not belong to the {} space", space.kind.as_str()))),
        None => Ok(()),
    }
}

pub fn tsp_tour(space: Space, points: &[Point]) -> Result<Route> {
    ExactSolver::default().tsp_tour(space, points)
}

pub fn oltsp_opt(instance: &Instance, start_time: f64) -> Result<(Route, f64)> {
    ExactSolver::default().oltsp_opt(instance, start_time)
}

pub fn darp_tour(space: Space, requests: &[Request], onboard: &[usize]) -> Result<Route> {
    ExactSolver::default().darp_tour(space, requests, onboard)
}

pub fn oldarp_opt(instance: &Instance, start_time: f64) -> Result<(Route, f64)> {
    ExactSolver::default().oldarp_opt(instance, start_time)
}

/// Offline optimum of either problem with the default limits.
pub fn offline_opt(instance: &Instance) -> Result<f64> {
    ExactSolver::default().opt(instance)
}

/// Christofides' heuristic over the origin and `points`: minimum spanning
/// tree, exact minimum-weight matching of odd vertices, Euler circuit, then
/// shortcuts. Waypoint kinds are `Visit(k)` with `k` the index into `points`.
pub fn christofides(space: Space, points: &[Point]) -> Result<Route> {
    check_points(space, points)?;
    let o = space.origin();
    if points.is_empty() {
        return Ok(Route::from_points(o, Vec::new(), o));
    }
    let mut verts = Vec::with_capacity(points.len() + 1);
    verts.push(o);
    verts.extend_from_slice(points);
    let n = verts.len();
    let d = |a: usize, b: usize| verts[a].dist(&verts[b]);

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(2 * n);
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    key[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| key[a].total_cmp(&key[b]))
            .expect("vertex left");
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            edges.push((parent[u], u));
        }
        for v in 0..n {
            if !in_tree[v] && d(u, v) < key[v] {
                key[v] = d(u, v);
                parent[v] = u;
            }
        }
    }

    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let odd: Vec<usize> = (0..n).filter(|&v| degree[v] % 2 == 1).collect();
    if odd.len() > MATCHING_LIMIT {
        return Err(Error::Capacity(format!(
            "{} odd-degree vertices exceed the exact matching limit of {MATCHING_LIMIT}",
            odd.len()
        )));
    }
    for (a, b) in min_weight_matching(&odd, &d) {
        edges.push((a, b));
    }

    let circuit = euler_circuit(n, &edges);
    let mut seen = vec![false; n];
    seen[0] = true;
    let stops = circuit
        .into_iter()
        .filter(|&v| !std::mem::replace(&mut seen[v], true))
        .map(|v| Waypoint { point: verts[v], kind: WaypointKind::Visit(v - 1) })
        .collect();
    Ok(Route::from_points(o, stops, o))
}

/// Exact minimum-weight perfect matching by DP over subsets.
fn min_weight_matching(odd: &[usize], d: &impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let m = odd.len();
    if m == 0 {
        return Vec::new();
    }
    let full = (1usize << m) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    let mut pick = vec![0u8; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let c = best[rest & !(1 << j)] + d(odd[i], odd[j]);
            if c < best[mask] {
                best[mask] = c;
                pick[mask] = j as u8;
            }
        }
    }
    let mut pairs = Vec::with_capacity(m / 2);
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let j = pick[mask] as usize;
        pairs.push((odd[i], odd[j]));
        mask &= !(1 << i) & !(1 << j);
    }
    pairs
}

/// Hierholzer's algorithm on a connected multigraph with even degrees,
/// starting and ending at vertex 0.
fn euler_circuit(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    for list in &mut adj {
        list.sort_unstable();
        list.reverse();
    }
    let mut used = vec![false; edges.len()];
    let mut stack = vec![0usize];
    let mut circuit = Vec::with_capacity(edges.len() + 1);
    while let Some(&v) = stack.last() {
        while adj[v].last().is_some_and(|&(_, e)| used[e]) {
            adj[v].pop();
        }
        match adj[v].pop() {
            Some((u, e)) => {
                used[e] = true;
                stack.push(u);
            }
            None => {
                circuit.push(v);
                stack.pop();
            }
        }
    }
    circuit.reverse();
    circuit
}

pub const BRUTE_TSP_LIMIT: usize = 8;
pub const BRUTE_DARP_LIMIT: usize = 6;

/// Offline optimum by exhaustive enumeration of service orders. Independent
/// of the DP and meant for cross-checking it.
pub fn brute_force_opt(instance: &Instance) -> Result<f64> {
    let o = instance.space.origin();
    let reqs = &instance.requests;
    match instance.problem {
        Problem::Tsp => {
            if reqs.len() > BRUTE_TSP_LIMIT {
                return Err(Error::Capacity(format!("brute force handles at most {BRUTE_TSP_LIMIT} requests")));
            }
            let mut left: Vec<usize> = (0..reqs.len()).collect();
            Ok(brute_tsp(reqs, o, 0.0, o, &mut left))
        }
        Problem::Darp => {
            if reqs.len() > BRUTE_DARP_LIMIT {
                return Err(Error::Capacity(format!("brute force handles at most {BRUTE_DARP_LIMIT} requests")));
            }
            let mut stage = vec![0u8; reqs.len()];
            Ok(brute_darp(reqs, o, 0.0, o, &mut stage))
        }
    }
}

fn brute_tsp(reqs: &[Request], at: Point, t: f64, o: Point, left: &mut Vec<usize>) -> f64 {
    if left.is_empty() {
        return t + at.dist(&o);
    }
    let mut best = f64::INFINITY;
    for k in 0..left.len() {
        let r = reqs[left[k]];
        let arrive = (t + at.dist(&r.position)).max(r.release);
        let idx = left.swap_remove(k);
        best = best.min(brute_tsp(reqs, r.position, arrive, o, left));
        left.push(idx);
        let last = left.len() - 1;
        left.swap(k, last);
    }
    best
}

fn brute_darp(reqs: &[Request], at: Point, t: f64, o: Point, stage: &mut [u8]) -> f64 {
    let mut best = f64::INFINITY;
    let mut any = false;
    for k in 0..reqs.len() {
        let r = reqs[k];
        let (target, ready) = match stage[k] {
            0 => (r.position, r.release),
            1 => (r.delivery.expect("ride"), 0.0),
            _ => continue,
        };
        any = true;
        let arrive = (t + at.dist(&target)).max(ready);
        stage[k] += 1;
        best = best.min(brute_darp(reqs, target, arrive, o, stage));
        stage[k] -= 1;
    }
    if any {
        best
    } else {
        t + at.dist(&o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_adversarial, gen_random, Adversarial, RandomParams};
    use crate::metric::SpaceKind;

    fn line_tsp(reqs: &[(f64, f64)]) -> Instance {
        let requests =
            reqs.iter().enumerate().map(|(k, &(t, x))| Request::point(k + 1, t, Point::line(x))).collect();
        Instance::new(Space::line(), Problem::Tsp, requests).unwrap()
    }

    fn line_darp(reqs: &[(f64, f64, f64)]) -> Instance {
        let requests = reqs
            .iter()
            .enumerate()
            .map(|(k, &(t, a, b))| Request::ride(k + 1, t, Point::line(a), Point::line(b)))
            .collect();
        Instance::new(Space::line(), Problem::Darp, requests).unwrap()
    }

    fn check_route(route: &Route, origin: Point) {
        assert!(route.waypoints.first().unwrap().point.approx_eq(&origin, 1e-12));
        assert!(route.waypoints.last().unwrap().point.approx_eq(&origin, 1e-12));
        let len: f64 = route.waypoints.windows(2).map(|w| w[0].point.dist(&w[1].point)).sum();
        assert!((len - route.length).abs() < 1e-9);
        assert!(route.completion >= route.length - 1e-9);
        for (k, w) in route.waypoints.iter().enumerate() {
            if let WaypointKind::Delivery(id) = w.kind {
                if let Some(p) = route.waypoints.iter().position(|x| x.kind == WaypointKind::Pickup(id)) {
                    assert!(p < k, "delivery of {id} before pickup");
                }
            }
        }
    }

    #[test]
    fn tour_examples() {
        let empty = tsp_tour(Space::line(), &[]).unwrap();
        assert_eq!(empty.length, 0.0);
        assert_eq!(empty.waypoints.len(), 1);
        let square = [
            Point::plane(0.0, 0.0),
            Point::plane(1.0, 0.0),
            Point::plane(1.0, 1.0),
            Point::plane(0.0, 1.0),
        ];
        let r = tsp_tour(Space::plane(), &square).unwrap();
        assert!((r.length - 4.0).abs() < 1e-12);
        check_route(&r, Point::plane(0.0, 0.0));
        let r = tsp_tour(Space::line(), &[Point::line(0.3), Point::line(1.0)]).unwrap();
        assert!((r.length - 2.0).abs() < 1e-12);
        assert!(tsp_tour(Space::line(), &[Point::plane(1.0, 1.0)]).is_err());
    }

    #[test]
    fn timed_examples() {
        let (route, z) = oltsp_opt(&line_tsp(&[(0.5, 1.0), (1.0, 0.3)]), 0.0).unwrap();
        assert!((z - 2.0).abs() < 1e-12);
        assert_eq!(route.stops().map(|w| w.kind).collect::<Vec<_>>(), vec![
            WaypointKind::Visit(1),
            WaypointKind::Visit(2)
        ]);
        assert_eq!(oltsp_opt(&line_tsp(&[(3.0, 1.0)]), 0.0).unwrap().1, 4.0);
        let (inst, _) = gen_adversarial(Adversarial::Lb2Perfect).unwrap();
        assert_eq!(oltsp_opt(&inst, 0.0).unwrap().1, 2.0);
        let (inst, _) = gen_adversarial(Adversarial::Lb2).unwrap();
        assert_eq!(oltsp_opt(&inst, 0.0).unwrap().1, 1.0);
        for d in [0.1, 0.3, 0.7, 0.9] {
            let (inst, _) = gen_adversarial(Adversarial::Lb1Perfect(d)).unwrap();
            assert!((oltsp_opt(&inst, 0.0).unwrap().1 - 2.0).abs() < 1e-12);
        }
        let (_, z) = oltsp_opt(&line_tsp(&[(0.0, 1.0)]), 5.0).unwrap();
        assert_eq!(z, 7.0);
    }

    #[test]
    fn lexicographic_tie_break() {
        let (route, _) = oltsp_opt(&line_tsp(&[(0.0, -1.0), (0.0, 1.0)]), 0.0).unwrap();
        assert_eq!(route.stops().next().unwrap().kind, WaypointKind::Visit(1));
        let (route, _) = oltsp_opt(&line_tsp(&[(0.0, 1.0), (0.0, -1.0)]), 0.0).unwrap();
        assert_eq!(route.stops().next().unwrap().kind, WaypointKind::Visit(1));
    }

    #[test]
    fn darp_examples() {
        let one = line_darp(&[(0.0, 1.0, 2.0)]);
        let r = darp_tour(Space::line(), &one.requests, &[]).unwrap();
        assert_eq!(r.length, 4.0);
        check_route(&r, Point::line(0.0));
        let r = darp_tour(Space::line(), &one.requests, &[1]).unwrap();
        assert_eq!(r.length, 4.0);
        assert_eq!(r.stops().count(), 1);
        let two = line_darp(&[(0.0, 1.0, 1.5), (0.0, 0.5, 2.0)]);
        let r = darp_tour(Space::line(), &two.requests, &[]).unwrap();
        assert_eq!(r.length, 4.0);
        check_route(&r, Point::line(0.0));
        assert_eq!(oldarp_opt(&line_darp(&[(1.0, 1.0, 2.0)]), 0.0).unwrap().1, 4.0);
        assert_eq!(oldarp_opt(&line_darp(&[(3.0, 1.0, 1.0)]), 0.0).unwrap().1, 4.0);
        assert_eq!(oldarp_opt(&line_darp(&[]), 0.0).unwrap().1, 0.0);
    }

    #[test]
    fn capacity_limits() {
        let pts: Vec<Point> = (0..15).map(|k| Point::line(k as f64)).collect();
        assert!(matches!(tsp_tour(Space::line(), &pts), Err(Error::Capacity(_))));
        let small = ExactSolver { tsp_limit: 2, darp_limit: 1 };
        assert!(small.tsp_tour(Space::line(), &pts[..3]).is_err());
        assert!(small.tsp_tour(Space::line(), &pts[..2]).is_ok());
    }

    #[test]
    fn christofides_examples() {
        let square = [Point::plane(1.0, 0.0), Point::plane(1.0, 1.0), Point::plane(0.0, 1.0)];
        let r = christofides(Space::plane(), &square).unwrap();
        assert!((r.length - 4.0).abs() < 1e-12);
        check_route(&r, Point::plane(0.0, 0.0));
        let r = christofides(Space::plane(), &[Point::plane(3.0, 4.0)]).unwrap();
        assert_eq!(r.length, 10.0);
        assert_eq!(christofides(Space::line(), &[]).unwrap().length, 0.0);
    }

    #[test]
    fn christofides_within_factor() {
        for seed in 0..60 {
            let params = RandomParams { n: 8, space: SpaceKind::Plane, ..Default::default() };
            let pts: Vec<Point> = gen_random(&params, seed).requests.iter().map(|r| r.position).collect();
            let c = christofides(Space::plane(), &pts).unwrap();
            let t = tsp_tour(Space::plane(), &pts).unwrap();
            assert!(c.length <= 1.5 * t.length + 1e-9);
            assert!(c.length >= t.length - 1e-9);
            assert_eq!(c.stops().count(), 8);
        }
    }

    #[test]
    fn dp_matches_brute_force() {
        for seed in 0..40 {
            for (problem, n) in [(Problem::Tsp, 6), (Problem::Darp, 4)] {
                let params = RandomParams { n, problem, space: SpaceKind::Plane, ..Default::default() };
                let inst = gen_random(&params, seed);
                let dp = offline_opt(&inst).unwrap();
                let bf = brute_force_opt(&inst).unwrap();
                assert!((dp - bf).abs() <= 1e-9, "seed {seed}: {dp} vs {bf}");
                let (route, _) = ExactSolver::default().timed_opt(inst.space, &inst.requests, 0.0).unwrap();
                assert!((route.completion - dp).abs() <= 1e-9);
                check_route(&route, inst.space.origin());
            }
        }
    }

    #[test]
    fn zero_releases_reduce_to_tour() {
        for seed in 0..20 {
            let params = RandomParams { n: 6, horizon: 0.0, ..Default::default() };
            let inst = gen_random(&params, seed);
            let pts: Vec<Point> = inst.requests.iter().map(|r| r.position).collect();
            let tour = tsp_tour(inst.space, &pts).unwrap();
            assert!((offline_opt(&inst).unwrap() - tour.length).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_limits() {
        assert_eq!(brute_force_opt(&line_tsp(&[])).unwrap(), 0.0);
        let params = RandomParams { n: 9, ..Default::default() };
        assert!(brute_force_opt(&gen_random(&params, 0)).is_err());
    }
}
