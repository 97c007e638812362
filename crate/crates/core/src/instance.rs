//! Requests, instances, predictions, error measures, generators and the JSON
//! instance format.

use crate::error::{Error, Result};
use crate::metric::{Point, Space, SpaceKind, EPS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    Tsp,
    Darp,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Tsp => "tsp",
            Problem::Darp => "darp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tsp" => Ok(Problem::Tsp),
            "darp" => Ok(Problem::Darp),
            other => Err(Error::invalid(format!("unknown problem `{other}`"))),
        }
    }
}

/// A released request. Point requests (TSP) have no delivery; ride requests
/// (DARP) are picked up at `position` and dropped at `delivery`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Request {
    pub id: usize,
    pub release: f64,
    pub position: Point,
    pub delivery: Option<Point>,
}

impl Request {
    pub fn point(id: usize, release: f64, position: Point) -> Self {
        Request { id, release, position, delivery: None }
    }

    pub fn ride(id: usize, release: f64, pickup: Point, delivery: Point) -> Self {
        Request { id, release, position: pickup, delivery: Some(delivery) }
    }

    pub fn pickup(&self) -> Point {
        self.position
    }

    fn scaled(&self, c: f64) -> Self {
        Request {
            id: self.id,
            release: self.release * c,
            position: self.position.scaled(c),
            delivery: self.delivery.map(|d| d.scaled(c)),
        }
    }

    /// Distance between paired positions: |p̂ − p| for points, summed over
    /// pickup and delivery for rides.
    fn position_gap(&self, other: &Request) -> f64 {
        let mut gap = self.position.dist(&other.position);
        if let (Some(a), Some(b)) = (self.delivery, other.delivery) {
            gap += a.dist(&b);
        }
        gap
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub space: Space,
    pub problem: Problem,
    pub requests: Vec<Request>,
}

impl Instance {
    /// Validates ordering, ids, dimensions and request shape.
    pub fn new(space: Space, problem: Problem, requests: Vec<Request>) -> Result<Self> {
        validate_requests(space, problem, &requests, "requests", true)?;
        Ok(Instance { space, problem, requests })
    }

    pub fn empty(space: Space, problem: Problem) -> Self {
        Instance { space, problem, requests: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn request(&self, id: usize) -> Option<&Request> {
        self.requests.get(id.wrapping_sub(1))
    }

    pub fn last_release(&self) -> Option<f64> {
        self.requests.last().map(|r| r.release)
    }

    /// Multiplies every coordinate and every release time by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Instance {
            space: self.space,
            problem: self.problem,
            requests: self.requests.iter().map(|r| r.scaled(c)).collect(),
        }
    }
}

fn validate_requests(
    space: Space,
    problem: Problem,
    requests: &[Request],
    field: &str,
    actual: bool,
) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for (k, r) in requests.iter().enumerate() {
        let at = |name: &str| format!("{field}[{k}].{name}");
        if !r.release.is_finite() || r.release < 0.0 {
            return Err(Error::schema(at("t"), "release time must be finite and non-negative"));
        }
        if actual {
            if r.id != k + 1 {
                return Err(Error::schema(at("id"), format!("expected id {}, found {}", k + 1, r.id)));
            }
            if k > 0 && r.release < requests[k - 1].release {
                return Err(Error::schema(at("t"), "release times must be non-decreasing"));
            }
        } else if r.id == 0 || !seen.insert(r.id) {
            return Err(Error::schema(at("id"), format!("id {} is zero or repeated", r.id)));
        }
        let key = if problem == Problem::Tsp { "p" } else { "a" };
        if !space.contains(&r.position) {
            return Err(Error::schema(at(key), format!("expected {} coordinates", space.dim())));
        }
        match (problem, r.delivery) {
            (Problem::Tsp, Some(_)) => {
                return Err(Error::schema(at("b"), "point requests carry no delivery"))
            }
            (Problem::Darp, None) => return Err(Error::schema(at("b"), "missing delivery point")),
            (Problem::Darp, Some(b)) if !space.contains(&b) => {
                return Err(Error::schema(at("b"), format!("expected {} coordinates", space.dim())))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Side information handed to an online strategy before the first release.
#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    /// A predicted request sequence of any length, unrelated to actual ids.
    Nid(Vec<Request>),
    /// One predicted request per actual request, paired by id.
    Id(Vec<Request>),
    /// The predicted release time of the final request.
    Last(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionModel {
    Nid,
    Id,
    Last,
}

impl PredictionModel {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictionModel::Nid => "nid",
            PredictionModel::Id => "id",
            PredictionModel::Last => "last",
        }
    }
}

impl Prediction {
    pub fn model(&self) -> PredictionModel {
        match self {
            Prediction::Nid(_) => PredictionModel::Nid,
            Prediction::Id(_) => PredictionModel::Id,
            Prediction::Last(_) => PredictionModel::Last,
        }
    }

    /// Predicted requests for the sequence models.
    pub fn requests(&self) -> Option<&[Request]> {
        match self {
            Prediction::Nid(r) | Prediction::Id(r) => Some(r),
            Prediction::Last(_) => None,
        }
    }

    /// Predicted requests sorted by id.
    pub fn sorted_requests(&self) -> Option<Vec<Request>> {
        let mut reqs = self.requests()?.to_vec();
        reqs.sort_by_key(|r| r.id);
        Some(reqs)
    }

    /// Checks the prediction against the instance it accompanies.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        match self {
            Prediction::Nid(reqs) => validate_requests(
                instance.space,
                instance.problem,
                reqs,
                "prediction.requests",
                false,
            ),
            Prediction::Id(reqs) => {
                validate_requests(instance.space, instance.problem, reqs, "prediction.requests", false)?;
                if reqs.len() != instance.len() || reqs.iter().any(|r| r.id > instance.len()) {
                    return Err(Error::schema(
                        "prediction.requests",
                        "id predictions must pair one-to-one with the actual request ids",
                    ));
                }
                Ok(())
            }
            Prediction::Last(t) => {
                if t.is_finite() && *t >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::schema("prediction.t_hat", "must be finite and non-negative"))
                }
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Prediction::Nid(r) => Prediction::Nid(r.iter().map(|x| x.scaled(c)).collect()),
            Prediction::Id(r) => Prediction::Id(r.iter().map(|x| x.scaled(c)).collect()),
            Prediction::Last(t) => Prediction::Last(t * c),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub eps_time: Option<f64>,
    pub eps_pos: Option<f64>,
    pub eps_last: Option<f64>,
}

impl ErrorReport {
    /// Errors defined for the prediction's model; the rest stay `None`.
    pub fn measure(prediction: Option<&Prediction>, actual: &Instance) -> Result<Self> {
        let mut report = ErrorReport::default();
        match prediction {
            Some(p @ Prediction::Id(_)) => {
                report.eps_time = Some(error_time(p, actual)?);
                report.eps_pos = Some(error_pos(p, actual)?);
            }
            Some(p @ Prediction::Last(_)) if !actual.is_empty() => {
                report.eps_last = Some(error_last(p, actual)?);
            }
            _ => {}
        }
        Ok(report)
    }
}

fn paired<'a>(pred: &'a Prediction, actual: &'a Instance) -> Result<Vec<(&'a Request, &'a Request)>> {
    let Prediction::Id(reqs) = pred else {
        return Err(Error::invalid("paired errors need an id prediction"));
    };
    if reqs.len() != actual.len() {
        return Err(Error::invalid(format!(
            "prediction has {} requests, instance has {}",
            reqs.len(),
            actual.len()
        )));
    }
    reqs.iter()
        .map(|p| {
            actual
                .request(p.id)
                .map(|a| (p, a))
                .ok_or_else(|| Error::invalid(format!("predicted id {} has no actual partner", p.id)))
        })
        .collect()
}

/// Largest paired release-time gap.
pub fn error_time(pred: &Prediction, actual: &Instance) -> Result<f64> {
    Ok(paired(pred, actual)?
        .into_iter()
        .map(|(p, a)| (p.release - a.release).abs())
        .fold(0.0, f64::max))
}

/// Summed paired position gap (pickup plus delivery for rides).
pub fn error_pos(pred: &Prediction, actual: &Instance) -> Result<f64> {
    Ok(paired(pred, actual)?.into_iter().map(|(p, a)| p.position_gap(a)).sum())
}

/// Signed error of the predicted final release time.
pub fn error_last(pred: &Prediction, actual: &Instance) -> Result<f64> {
    let Prediction::Last(t_hat) = pred else {
        return Err(Error::invalid("error_last needs a last-arrival prediction"));
    };
    let t_n = actual
        .last_release()
        .ok_or_else(|| Error::invalid("error_last is undefined on an empty instance"))?;
    Ok(t_hat - t_n)
}

/// True when the predicted request multiset equals the actual one, comparing
/// release times and positions within `tol` and ignoring ids.
pub fn prediction_matches(pred: &Prediction, actual: &Instance, tol: f64) -> bool {
    let Some(reqs) = pred.requests() else { return false };
    if reqs.len() != actual.len() {
        return false;
    }
    let mut used = vec![false; reqs.len()];
    actual.requests.iter().all(|a| {
        let hit = reqs.iter().enumerate().position(|(k, p)| {
            !used[k] && (p.release - a.release).abs() <= tol && p.position_gap(a) <= tol
        });
        match hit {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomParams {
    pub problem: Problem,
    pub space: SpaceKind,
    pub n: usize,
    /// Release times are drawn from [0, horizon].
    pub horizon: f64,
    /// Coordinates are drawn from [-radius, radius].
    pub radius: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { problem: Problem::Tsp, space: SpaceKind::Line, n: 5, horizon: 4.0, radius: 2.0 }
    }
}

fn random_point(rng: &mut ChaCha8Rng, kind: SpaceKind, radius: f64) -> Point {
    match kind {
        SpaceKind::Line => Point::line(rng.random_range(-radius..=radius)),
        SpaceKind::Plane => {
            Point::plane(rng.random_range(-radius..=radius), rng.random_range(-radius..=radius))
        }
    }
}

/// Uniform random instance, deterministic in `(params, seed)`.
pub fn gen_random(params: &RandomParams, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<(f64, Point, Option<Point>)> = (0..params.n)
        .map(|_| {
            let t = rng.random_range(0.0..=params.horizon);
            let p = random_point(&mut rng, params.space, params.radius);
            let b = (params.problem == Problem::Darp)
                .then(|| random_point(&mut rng, params.space, params.radius));
            (t, p, b)
        })
        .collect();
    draws.sort_by(|x, y| x.0.total_cmp(&y.0));
    let requests = draws
        .into_iter()
        .enumerate()
        .map(|(k, (t, p, b))| Request { id: k + 1, release: t, position: p, delivery: b })
        .collect();
    Instance { space: Space::new(params.space), problem: params.problem, requests }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Noise {
    pub time: f64,
    pub pos: f64,
}

/// Paired prediction obtained by Gaussian jitter of every release time and
/// coordinate. Times are clamped at zero.
pub fn perturb_prediction(actual: &Instance, noise: Noise, seed: u64) -> Result<Prediction> {
    if !(noise.time >= 0.0 && noise.pos >= 0.0) {
        return Err(Error::invalid("noise levels must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = Normal::new(0.0, noise.time).map_err(|e| Error::invalid(e.to_string()))?;
    let dp = Normal::new(0.0, noise.pos).map_err(|e| Error::invalid(e.to_string()))?;
    let jitter = |p: Point, rng: &mut ChaCha8Rng| match p.dim() {
        1 => Point::line(p.x() + dp.sample(rng)),
        _ => Point::plane(p.x() + dp.sample(rng), p.y() + dp.sample(rng)),
    };
    let reqs = actual
        .requests
        .iter()
        .map(|r| {
            let release = (r.release + dt.sample(&mut rng)).max(0.0);
            let position = jitter(r.position, &mut rng);
            let delivery = r.delivery.map(|b| jitter(b, &mut rng));
            Request { id: r.id, release, position, delivery }
        })
        .collect();
    Ok(Prediction::Id(reqs))
}

/// Hand-built instance families that stress consistency and robustness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Adversarial {
    /// Prediction {(δ,δ),(1,1)}, actual {(δ,δ)}.
    Lb1(f64),
    /// Actual equals the prediction {(δ,δ),(1,1)}.
    Lb1Perfect(f64),
    /// Prediction {(0.5,0.5),(1,1)}, actual {(0.5,0.5),(1,0)}.
    Lb2,
    /// Actual equals the prediction {(0.5,0.5),(1,1)}.
    Lb2Perfect,
    /// Predicted request (0, 1+M) against actual (0, 1).
    TrustBlowup(f64),
    /// Predicted last arrival M against a single actual request (1, 1).
    LateTn(f64),
}

impl Adversarial {
    pub fn parse(kind: &str, param: f64) -> Result<Self> {
        match kind {
            "lb1" => Ok(Adversarial::Lb1(param)),
            "lb1-perfect" => Ok(Adversarial::Lb1Perfect(param)),
            "lb2" => Ok(Adversarial::Lb2),
            "lb2-perfect" => Ok(Adversarial::Lb2Perfect),
            "trust-blowup" => Ok(Adversarial::TrustBlowup(param)),
            "late-tn" => Ok(Adversarial::LateTn(param)),
            other => Err(Error::invalid(format!("unknown instance family `{other}`"))),
        }
    }
}

pub fn gen_adversarial(kind: Adversarial) -> Result<(Instance, Prediction)> {
    let line = Space::line();
    let pt = |id, t, x| Request::point(id, t, Point::line(x));
    let build = |reqs: Vec<Request>| Instance::new(line, Problem::Tsp, reqs);
    match kind {
        Adversarial::Lb1(d) | Adversarial::Lb1Perfect(d) => {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::invalid("δ must lie in (0, 1)"));
            }
            let predicted = vec![pt(1, d, d), pt(2, 1.0, 1.0)];
            let actual = if matches!(kind, Adversarial::Lb1(_)) {
                vec![pt(1, d, d)]
            } else {
                predicted.clone()
            };
            Ok((build(actual)?, Prediction::Nid(predicted)))
        }
        Adversarial::Lb2 | Adversarial::Lb2Perfect => {
            let predicted = vec![pt(1, 0.5, 0.5), pt(2, 1.0, 1.0)];
            let actual = if kind == Adversarial::Lb2 {
                vec![pt(1, 0.5, 0.5), pt(2, 1.0, 0.0)]
            } else {
                predicted.clone()
            };
            Ok((build(actual)?, Prediction::Id(predicted)))
        }
        Adversarial::TrustBlowup(m) => {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::invalid("M must be finite and non-negative"));
            }
            Ok((build(vec![pt(1, 0.0, 1.0)])?, Prediction::Id(vec![pt(1, 0.0, 1.0 + m)])))
        }
        Adversarial::LateTn(m) => {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::invalid("M must be finite and non-negative"));
            }
            Ok((build(vec![pt(1, 1.0, 1.0)])?, Prediction::Last(m)))
        }
    }
}

/// An instance together with its optional prediction, as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub instance: Instance,
    pub prediction: Option<Prediction>,
}

/// Renders a number with at most 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let mut s = format!("{rounded}");
    if !s.contains('.') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn write_point(out: &mut String, p: &Point) {
    out.push('[');
    for (k, c) in p.coords().iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&fmt_num(*c));
    }
    out.push(']');
}

fn write_requests(out: &mut String, reqs: &[Request]) {
    out.push('[');
    for (k, r) in reqs.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"id\":{},\"t\":{},", r.id, fmt_num(r.release));
        match r.delivery {
            None => {
                out.push_str("\"p\":");
                write_point(out, &r.position);
            }
            Some(b) => {
                out.push_str("\"a\":");
                write_point(out, &r.position);
                out.push_str(",\"b\":");
                write_point(out, &b);
            }
        }
        out.push('}');
    }
    out.push(']');
}

impl Scenario {
    pub fn new(instance: Instance, prediction: Option<Prediction>) -> Result<Self> {
        if let Some(p) = &prediction {
            p.validate(&instance)?;
        }
        Ok(Scenario { instance, prediction })
    }

    /// Canonical single-line JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"space\":{{\"kind\":\"{}\"}},\"problem\":\"{}\",\"requests\":",
            self.instance.space.kind.as_str(),
            self.instance.problem.as_str()
        );
        write_requests(&mut out, &self.instance.requests);
        out.push_str(",\"prediction\":");
        match &self.prediction {
            None => out.push_str("null"),
            Some(Prediction::Last(t)) => {
                let _ = write!(out, "{{\"model\":\"last\",\"t_hat\":{}}}", fmt_num(*t));
            }
            Some(p) => {
                let _ = write!(out, "{{\"model\":\"{}\",\"requests\":", p.model().as_str());
                write_requests(&mut out, p.requests().unwrap_or(&[]));
                out.push('}');
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| Error::schema("$", format!("malformed JSON: {e}")))?;
        let kind = root
            .get("space")
            .and_then(|s| s.get("kind"))
            .and_then(Value::as_str)
            .ok_or_else(|| Error::schema("space.kind", "missing or not a string"))?;
        let space = Space::new(
            SpaceKind::parse(kind).map_err(|e| Error::schema("space.kind", e.to_string()))?,
        );
        let problem = root
            .get("problem")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::schema("problem", "missing or not a string"))?;
        let problem = Problem::parse(problem).map_err(|e| Error::schema("problem", e.to_string()))?;
        let requests = parse_requests(root.get("requests"), "requests", space, problem)?;
        let instance = Instance::new(space, problem, requests)?;
        let prediction = match root.get("prediction") {
            None | Some(Value::Null) => None,
            Some(p) => {
                let model = p
                    .get("model")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::schema("prediction.model", "missing or not a string"))?;
                Some(match model {
                    "last" => Prediction::Last(number(p.get("t_hat"), "prediction.t_hat")?),
                    "nid" => Prediction::Nid(parse_requests(
                        p.get("requests"),
                        "prediction.requests",
                        space,
                        problem,
                    )?),
                    "id" => Prediction::Id(parse_requests(
                        p.get("requests"),
                        "prediction.requests",
                        space,
                        problem,
                    )?),
                    other => {
                        return Err(Error::schema("prediction.model", format!("unknown model `{other}`")))
                    }
                })
            }
        };
        Scenario::new(instance, prediction)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn number(v: Option<&Value>, field: &str) -> Result<f64> {
    v.and_then(Value::as_f64)
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::schema(field, "missing or not a finite number"))
}

fn parse_point(v: Option<&Value>, field: &str, space: Space) -> Result<Point> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema(field, "missing or not an array"))?;
    let coords = arr
        .iter()
        .enumerate()
        .map(|(k, c)| number(Some(c), &format!("{field}[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    if coords.len() != space.dim() {
        return Err(Error::schema(
            field,
            format!("expected {} coordinates, found {}", space.dim(), coords.len()),
        ));
    }
    Point::from_coords(&coords).map_err(|e| Error::schema(field, e.to_string()))
}

fn parse_requests(v: Option<&Value>, field: &str, space: Space, problem: Problem) -> Result<Vec<Request>> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema(field, "missing or not an array"))?;
    arr.iter()
        .enumerate()
        .map(|(k, r)| {
            let at = |name: &str| format!("{field}[{k}].{name}");
            let id = r
                .get("id")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::schema(at("id"), "missing or not a non-negative integer"))?;
            let release = number(r.get("t"), &at("t"))?;
            Ok(match problem {
                Problem::Tsp => Request::point(id as usize, release, parse_point(r.get("p"), &at("p"), space)?),
                Problem::Darp => Request::ride(
                    id as usize,
                    release,
                    parse_point(r.get("a"), &at("a"), space)?,
                    parse_point(r.get("b"), &at("b"), space)?,
                ),
            })
        })
        .collect()
}

/// Paired requests agree within the geometric tolerance.
pub fn same_request(a: &Request, b: &Request) -> bool {
    (a.release - b.release).abs() <= EPS && a.position_gap(b) <= EPS
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_inst(reqs: &[(f64, f64)]) -> Instance {
        let requests = reqs
            .iter()
            .enumerate()
            .map(|(k, &(t, x))| Request::point(k + 1, t, Point::line(x)))
            .collect();
        Instance::new(Space::line(), Problem::Tsp, requests).unwrap()
    }

    fn id_pred(reqs: &[(f64, f64)]) -> Prediction {
        Prediction::Id(
            reqs.iter()
                .enumerate()
                .map(|(k, &(t, x))| Request::point(k + 1, t, Point::line(x)))
                .collect(),
        )
    }

    #[test]
    fn time_error_examples() {
        let actual = line_inst(&[(1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(error_time(&id_pred(&[(1.0, 0.0), (2.0, 0.0)]), &actual).unwrap(), 0.0);
        let actual = line_inst(&[(1.5, 0.0), (1.8, 0.0)]);
        assert!((error_time(&id_pred(&[(1.0, 0.0), (2.0, 0.0)]), &actual).unwrap() - 0.5).abs() < 1e-12);
        let actual = line_inst(&[(3.0, 0.0)]);
        assert_eq!(error_time(&id_pred(&[(0.0, 0.0)]), &actual).unwrap(), 3.0);
        assert!(error_time(&Prediction::Last(1.0), &actual).is_err());
        assert!(error_time(&id_pred(&[(0.0, 0.0), (1.0, 0.0)]), &actual).is_err());
    }

    #[test]
    fn position_error_examples() {
        let actual = line_inst(&[(0.5, 0.5), (1.0, 0.0)]);
        assert_eq!(error_pos(&id_pred(&[(0.5, 0.5), (1.0, 0.0)]), &actual).unwrap(), 0.0);
        assert_eq!(error_pos(&id_pred(&[(0.5, 0.5), (1.0, 1.0)]), &actual).unwrap(), 1.0);
        let ride = Instance::new(
            Space::line(),
            Problem::Darp,
            vec![Request::ride(1, 0.0, Point::line(1.5), Point::line(2.0))],
        )
        .unwrap();
        let pred = Prediction::Id(vec![Request::ride(1, 0.0, Point::line(1.0), Point::line(2.0))]);
        assert_eq!(error_pos(&pred, &ride).unwrap(), 0.5);
    }

    #[test]
    fn last_error_examples() {
        let actual = line_inst(&[(1.0, 1.0), (2.0, 1.0)]);
        assert_eq!(error_last(&Prediction::Last(2.0), &actual).unwrap(), 0.0);
        assert_eq!(error_last(&Prediction::Last(1.0), &actual).unwrap(), -1.0);
        assert_eq!(error_last(&Prediction::Last(5.0), &actual).unwrap(), 3.0);
        assert!(error_last(&Prediction::Last(5.0), &line_inst(&[])).is_err());
    }

    #[test]
    fn random_generation() {
        let params = RandomParams { n: 0, ..Default::default() };
        assert!(gen_random(&params, 3).is_empty());
        let params = RandomParams { n: 6, space: SpaceKind::Plane, radius: 1.5, ..Default::default() };
        let a = gen_random(&params, 1);
        assert_eq!(a, gen_random(&params, 1));
        assert_eq!(a.len(), 6);
        assert!(Instance::new(a.space, a.problem, a.requests.clone()).is_ok());
        for r in &a.requests {
            assert!(r.position.x().abs() <= 1.5 && r.position.y().abs() <= 1.5);
            assert!((0.0..=params.horizon).contains(&r.release));
        }
        assert_ne!(a, gen_random(&params, 2));
    }

    #[test]
    fn perturbation() {
        let params = RandomParams { n: 5, ..Default::default() };
        let actual = gen_random(&params, 9);
        let zero = perturb_prediction(&actual, Noise { time: 0.0, pos: 0.0 }, 4).unwrap();
        assert_eq!(error_time(&zero, &actual).unwrap(), 0.0);
        assert_eq!(error_pos(&zero, &actual).unwrap(), 0.0);
        let noisy = perturb_prediction(&actual, Noise { time: 1.0, pos: 1.0 }, 4).unwrap();
        assert_eq!(noisy, perturb_prediction(&actual, Noise { time: 1.0, pos: 1.0 }, 4).unwrap());
        assert!(error_pos(&noisy, &actual).unwrap() > 0.0);
        assert!(noisy.requests().unwrap().iter().all(|r| r.release >= 0.0));
    }

    #[test]
    fn adversarial_shapes() {
        let (inst, pred) = gen_adversarial(Adversarial::Lb1(0.1)).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(pred.requests().unwrap().len(), 2);
        let (inst, pred) = gen_adversarial(Adversarial::Lb2).unwrap();
        assert_eq!(error_pos(&pred, &inst).unwrap(), 1.0);
        assert_eq!(error_time(&pred, &inst).unwrap(), 0.0);
        let (inst, pred) = gen_adversarial(Adversarial::LateTn(100.0)).unwrap();
        assert_eq!(error_last(&pred, &inst).unwrap(), 99.0);
        assert!(Adversarial::parse("nope", 1.0).is_err());
        assert!(gen_adversarial(Adversarial::Lb1(1.5)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let (inst, pred) = gen_adversarial(Adversarial::Lb1(0.5)).unwrap();
        let s = Scenario::new(inst, Some(pred)).unwrap();
        let text = s.to_json();
        assert_eq!(
            text,
            "{\"space\":{\"kind\":\"line\"},\"problem\":\"tsp\",\"requests\":[{\"id\":1,\"t\":0.5,\"p\":[0.5]}],\
             \"prediction\":{\"model\":\"nid\",\"requests\":[{\"id\":1,\"t\":0.5,\"p\":[0.5]},{\"id\":2,\"t\":1.0,\"p\":[1.0]}]}}\n"
        );
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_darp_and_last() {
        let inst = Instance::new(
            Space::plane(),
            Problem::Darp,
            vec![Request::ride(1, 0.25, Point::plane(1.0, -2.0), Point::plane(0.1, 0.2))],
        )
        .unwrap();
        let s = Scenario::new(inst, Some(Prediction::Last(1.5))).unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn json_schema_errors() {
        let decreasing = r#"{"space":{"kind":"line"},"problem":"tsp","requests":[{"id":1,"t":2,"p":[1]},{"id":2,"t":1,"p":[1]}],"prediction":null}"#;
        match Scenario::from_json(decreasing) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "requests[1].t"),
            other => panic!("unexpected {other:?}"),
        }
        let missing_b = r#"{"space":{"kind":"line"},"problem":"darp","requests":[{"id":1,"t":0,"a":[1]}],"prediction":null}"#;
        match Scenario::from_json(missing_b) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "requests[0].b"),
            other => panic!("unexpected {other:?}"),
        }
        let wrong_dim = r#"{"space":{"kind":"plane"},"problem":"tsp","requests":[{"id":1,"t":0,"p":[1]}],"prediction":null}"#;
        match Scenario::from_json(wrong_dim) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "requests[0].p"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(Scenario::from_json("{"), Err(Error::Schema { .. })));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(1.0), "1.0");
        assert_eq!(fmt_num(-0.0), "0.0");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(123_456_789.123_456_78), "123456789.123");
    }

    #[test]
    fn matching_ignores_ids() {
        let actual = line_inst(&[(0.1, 0.1), (1.0, 1.0)]);
        let pred = Prediction::Nid(vec![
            Request::point(7, 1.0, Point::line(1.0)),
            Request::point(3, 0.1, Point::line(0.1)),
        ]);
        assert!(prediction_matches(&pred, &actual, 1e-9));
        let (inst, pred) = gen_adversarial(Adversarial::Lb1(0.1)).unwrap();
        assert!(!prediction_matches(&pred, &inst, 1e-9));
    }
}
