//! Closed-form globally hyperbolic spacetime models in 1+1 dimensions.
//!
//! Three models with exact causal relations are provided: Minkowski space,
//! the flat cylinder (compact spatial circle), and a spatially flat FLRW
//! model with scale factor `a(t) = 1 + eps·t²`. In the global-time chart the
//! metric takes the split form `g = -α dT² + ḡ`; all models here use lapse
//! `α ≡ 1` and conformal completion factor `θ ≡ 1`, so the auxiliary
//! Riemannian metric is `h = α dT² + ḡ` and the causal speed bound is
//! `√(2θα) = √2`.
//!
//! Causal predicates are exact on the given coordinates: Minkowski uses
//! `Δt ≥ |Δx|`, the cylinder uses the circle arc distance, and FLRW compares
//! conformal-time differences (fixed-step Simpson quadrature with error
//! below 1e-10 on the working window). Callers needing robustness against
//! boundary-of-cone roundoff pass an explicit slack.

use serde::{Deserialize, Serialize};

use crate::curves::CausalCurve;
use crate::{Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;

/// A point of the spacetime in global-time coordinates.
///
/// `x` is a plain spatial coordinate for Minkowski/FLRW and an angle in
/// `[0, 2π)` on the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub fn new(t: f64, x: f64) -> Self {
        Event { t, x }
    }
}

/// Total-order key for events, used to merge and sort atoms deterministically.
///
/// Equality is bitwise on the normalized coordinates (`-0.0` folds to `0.0`),
/// which is exactly the merge rule for pushforward atoms.
#[derive(Debug, Clone, Copy)]
pub struct EventKey {
    t: f64,
    x: f64,
}

impl EventKey {
    pub fn event(&self) -> Event {
        Event { t: self.t, x: self.x }
    }
}

fn norm_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

impl From<&Event> for EventKey {
    fn from(p: &Event) -> Self {
        EventKey {
            t: norm_zero(p.t),
            x: norm_zero(p.x),
        }
    }
}

impl PartialEq for EventKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for EventKey {}

impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EventKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.t
            .total_cmp(&other.t)
            .then_with(|| self.x.total_cmp(&other.x))
    }
}

/// Point of the Euclidean embedding space. Flat models use the first two
/// coordinates; the cylinder embeds into all three as `(t, cos x, sin x)`.
pub type EmbeddedPoint = [f64; 3];

pub fn euclidean_distance(a: &EmbeddedPoint, b: &EmbeddedPoint) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x % TAU;
    if y < 0.0 {
        y += TAU;
    }
    if y >= TAU {
        y = 0.0;
    }
    y
}

/// Signed shorter-arc displacement from `from` to `to`, in `(-π, π]`.
/// Ties at arc distance exactly π break toward positive orientation.
pub fn signed_arc(from: f64, to: f64) -> f64 {
    let mut d = wrap_angle(to - from);
    if d > std::f64::consts::PI {
        d -= TAU;
    }
    d
}

/// Circle arc distance between two angles.
pub fn arc_distance(a: f64, b: f64) -> f64 {
    signed_arc(a, b).abs()
}

/// The spacetime models with closed-form causal structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpacetimeModel {
    /// 1+1 Minkowski space, `g = -dt² + dx²`.
    Minkowski,
    /// Flat cylinder `ℝ × S¹`, `g = -dt² + dθ²`.
    Cylinder,
    /// Spatially flat FLRW with `a(t) = 1 + eps·t²`, `g = -dt² + a(t)²dx²`.
    Flrw { eps: f64 },
}

impl SpacetimeModel {
    /// Lapse `α` of the split metric; identically 1 for all three models.
    pub fn lapse(&self, _p: &Event) -> f64 {
        1.0
    }

    /// Conformal completion factor `θ`; fixed to 1 (any other admissible
    /// choice only rescales the speed bound).
    pub fn completion_factor(&self, _p: &Event) -> f64 {
        1.0
    }

    pub fn scale_factor(&self, t: f64) -> f64 {
        match self {
            SpacetimeModel::Flrw { eps } => 1.0 + eps * t * t,
            _ => 1.0,
        }
    }

    /// Spatial metric `ḡ` applied to a spatial velocity.
    fn spatial_norm_sq(&self, t: f64, v: f64) -> f64 {
        let a = self.scale_factor(t);
        a * a * v * v
    }

    /// Checks coordinate validity for this model.
    pub fn validate_event(&self, p: &Event) -> Result<()> {
        if !p.t.is_finite() || !p.x.is_finite() {
            return Err(Error::InvalidEvent(format!(
                "non-finite coordinates ({}, {})",
                p.t, p.x
            )));
        }
        if matches!(self, SpacetimeModel::Cylinder) && !(0.0..TAU).contains(&p.x) {
            return Err(Error::InvalidEvent(format!(
                "cylinder angle {} outside [0, 2π)",
                p.x
            )));
        }
        if let SpacetimeModel::Flrw { eps } = self {
            if *eps < 0.0 {
                return Err(Error::InvalidEvent(format!("negative FLRW eps {eps}")));
            }
        }
        Ok(())
    }

    /// Conformal time `τ(t) = ∫₀ᵗ ds/a(s)`, by fixed-step Simpson quadrature
    /// with step chosen so the quadrature error stays below 1e-10 on the
    /// working window. Identity for the static models.
    pub fn conformal_time(&self, t: f64) -> f64 {
        match self {
            SpacetimeModel::Flrw { eps } if *eps > 0.0 => simpson_conformal(*eps, t),
            _ => t,
        }
    }

    /// `p ⪯ q`: a future-directed causal curve runs from `p` to `q`.
    pub fn causally_precedes(&self, p: &Event, q: &Event) -> bool {
        self.precedes_with_slack(p, q, 0.0)
    }

    /// Cone test with caller-supplied slack `eps ≥ 0`; the predicate itself
    /// stays exact at `eps = 0`.
    pub fn precedes_with_slack(&self, p: &Event, q: &Event, eps: f64) -> bool {
        match self {
            SpacetimeModel::Minkowski => q.t - p.t + eps >= (q.x - p.x).abs(),
            SpacetimeModel::Cylinder => q.t - p.t + eps >= arc_distance(p.x, q.x),
            SpacetimeModel::Flrw { .. } => {
                self.conformal_time(q.t) - self.conformal_time(p.t) + eps >= (q.x - p.x).abs()
            }
        }
    }

    /// `p ≪ q`: strict cone inequality (chronological precedence).
    pub fn chronologically_precedes(&self, p: &Event, q: &Event) -> bool {
        match self {
            SpacetimeModel::Minkowski => q.t - p.t > (q.x - p.x).abs(),
            SpacetimeModel::Cylinder => q.t - p.t > arc_distance(p.x, q.x),
            SpacetimeModel::Flrw { .. } => {
                self.conformal_time(q.t) - self.conformal_time(p.t) > (q.x - p.x).abs()
            }
        }
    }

    /// True iff some element of `set` causally precedes `q`.
    pub fn in_causal_future_of_set(&self, set: &[Event], q: &Event) -> Result<bool> {
        if set.is_empty() {
            return Err(Error::EmptySet("causal future of empty set".into()));
        }
        Ok(set.iter().any(|p| self.causally_precedes(p, q)))
    }

    /// Deterministic connecting causal curve from `p` to `q` sampled on
    /// `grid`: affine in the conformal chart for Minkowski/FLRW, shorter-arc
    /// rotation on the cylinder (ties at arc distance π break positively).
    ///
    /// Endpoint samples are `p` and `q` exactly.
    pub fn connecting_causal_curve(&self, p: &Event, q: &Event, grid: &[f64]) -> Result<CausalCurve> {
        if grid.is_empty() {
            return Err(Error::Grid("empty time grid".into()));
        }
        let tol = 1e-9 * (1.0 + p.t.abs().max(q.t.abs()));
        if (grid[0] - p.t).abs() > tol || (grid[grid.len() - 1] - q.t).abs() > tol {
            return Err(Error::Grid(format!(
                "grid endpoints [{}, {}] inconsistent with curve endpoints [{}, {}]",
                grid[0],
                grid[grid.len() - 1],
                p.t,
                q.t
            )));
        }
        if grid.len() == 1 {
            if p != q {
                return Err(Error::Grid(
                    "one-point grid requires coincident endpoints".into(),
                ));
            }
            return CausalCurve::new(vec![p.t], vec![*p]);
        }
        if !self.causally_precedes(p, q) {
            return Err(Error::NotCausal { from: *p, to: *q });
        }
        let mut points = Vec::with_capacity(grid.len());
        points.push(*p);
        for &t in &grid[1..grid.len() - 1] {
            points.push(self.interpolate_segment(p, q, t));
        }
        points.push(*q);
        let mut times = grid.to_vec();
        // Pin the endpoint times to the events' exact coordinates.
        times[0] = p.t;
        let last = times.len() - 1;
        times[last] = q.t;
        CausalCurve::new(times, points)
    }

    /// Point at time `t` on the canonical connecting curve from `p` to `q`.
    pub(crate) fn interpolate_segment(&self, p: &Event, q: &Event, t: f64) -> Event {
        if p.t == q.t {
            return *p;
        }
        match self {
            SpacetimeModel::Minkowski => {
                let r = (t - p.t) / (q.t - p.t);
                Event::new(t, p.x + (q.x - p.x) * r)
            }
            SpacetimeModel::Cylinder => {
                let r = (t - p.t) / (q.t - p.t);
                Event::new(t, wrap_angle(p.x + signed_arc(p.x, q.x) * r))
            }
            SpacetimeModel::Flrw { .. } => {
                let (tp, tq, tt) = (
                    self.conformal_time(p.t),
                    self.conformal_time(q.t),
                    self.conformal_time(t),
                );
                let r = if tq == tp { 0.0 } else { (tt - tp) / (tq - tp) };
                Event::new(t, p.x + (q.x - p.x) * r)
            }
        }
    }

    /// Riemannian speed `√(h(γ', γ'))` of the tangent `(dT=1, v)` at `p`.
    ///
    /// For causal tangents this is bounded by `√(2θα) = √2`.
    pub fn metric_speed(&self, p: &Event, v: f64) -> f64 {
        let h = self.completion_factor(p)
            * (self.lapse(p) + self.spatial_norm_sq(p.t, v));
        h.sqrt()
    }

    /// Causal speed bound `√(2θα)` at `p`.
    pub fn speed_bound(&self, p: &Event) -> f64 {
        (2.0 * self.completion_factor(p) * self.lapse(p)).sqrt()
    }

    /// Closed isometric-for-`h` embedding into Euclidean space: the identity
    /// chart for the flat models, `(t, cos x, sin x)` for the cylinder.
    pub fn embed(&self, p: &Event) -> EmbeddedPoint {
        match self {
            SpacetimeModel::Cylinder => [p.t, p.x.cos(), p.x.sin()],
            _ => [p.t, p.x, 0.0],
        }
    }

    pub fn embedding_dim(&self) -> usize {
        match self {
            SpacetimeModel::Cylinder => 3,
            _ => 2,
        }
    }

    /// Wraps a spatial coordinate into the model's chart.
    pub fn wrap_x(&self, x: f64) -> f64 {
        match self {
            SpacetimeModel::Cylinder => wrap_angle(x),
            _ => x,
        }
    }
}

/// Simpson quadrature of `∫₀ᵗ ds/(1+eps·s²)`.
///
/// Error per Simpson theory is `|t|·h⁴/180·max|f⁗| ≤ |t|·h⁴·24·eps²/180`;
/// the step resolves to keep the total below 1e-10.
fn simpson_conformal(eps: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let span = t.abs();
    let h_bound = (1e-10 * 180.0 / (24.0 * eps * eps * span.max(1.0))).powf(0.25);
    let h_target = h_bound.min(1e-2);
    let n = ((span / h_target).ceil() as usize).max(2);
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = t / n as f64;
    let f = |s: f64| 1.0 / (1.0 + eps * s * s);
    // Kahan-compensated accumulation keeps the sum deterministic and tight.
    let mut sum = f(0.0) + f(t);
    let mut comp = 0.0;
    for k in 1..n {
        let coeff = if k % 2 == 1 { 4.0 } else { 2.0 };
        let term = coeff * f(k as f64 * h);
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum * h / 3.0
}

/// Global time functions ("observer clocks"). `Canonical` is valid on every
/// model; `Boost` and `Sheared` only on Minkowski, where their gradients are
/// past-directed timelike for parameters below light speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TemporalFunction {
    /// `T(p) = t`.
    Canonical,
    /// `T(p) = (t - v·x)/√(1-v²)`, `|v| < 1`.
    Boost { v: f64 },
    /// `T(p) = t + λ·tanh(x)`, `|λ| < 1`.
    Sheared { lambda: f64 },
}

impl TemporalFunction {
    pub fn eval(&self, p: &Event) -> f64 {
        match self {
            TemporalFunction::Canonical => p.t,
            TemporalFunction::Boost { v } => (p.t - v * p.x) / (1.0 - v * v).sqrt(),
            TemporalFunction::Sheared { lambda } => p.t + lambda * p.x.tanh(),
        }
    }

    /// Gradient `(∂_t T, ∂_x T)` in model coordinates.
    pub fn gradient(&self, p: &Event) -> (f64, f64) {
        match self {
            TemporalFunction::Canonical => (1.0, 0.0),
            TemporalFunction::Boost { v } => {
                let g = (1.0 - v * v).sqrt();
                (1.0 / g, -v / g)
            }
            TemporalFunction::Sheared { lambda } => {
                let c = p.x.cosh();
                (1.0, lambda / (c * c))
            }
        }
    }

    /// Whether this clock is an admissible Cauchy temporal function on the
    /// given model.
    pub fn validate_for(&self, model: &SpacetimeModel) -> Result<()> {
        match self {
            TemporalFunction::Canonical => Ok(()),
            TemporalFunction::Boost { v } => {
                if !matches!(model, SpacetimeModel::Minkowski) {
                    return Err(Error::InvalidFrame(
                        "boost frames are defined on Minkowski only".into(),
                    ));
                }
                if v.abs() >= 1.0 {
                    return Err(Error::InvalidFrame(format!("boost speed |{v}| ≥ 1")));
                }
                Ok(())
            }
            TemporalFunction::Sheared { lambda } => {
                if !matches!(model, SpacetimeModel::Minkowski) {
                    return Err(Error::InvalidFrame(
                        "sheared frames are defined on Minkowski only".into(),
                    ));
                }
                if lambda.abs() >= 1.0 {
                    return Err(Error::InvalidFrame(format!("shear |{lambda}| ≥ 1")));
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    const MINK: SpacetimeModel = SpacetimeModel::Minkowski;
    const CYL: SpacetimeModel = SpacetimeModel::Cylinder;
    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn minkowski_cone_membership() {
        assert!(MINK.causally_precedes(&Event::new(0.0, 0.0), &Event::new(1.0, 0.5)));
        assert!(!MINK.causally_precedes(&Event::new(0.0, 0.0), &Event::new(1.0, 1.5)));
        // Null boundary: causal but not chronological.
        assert!(MINK.causally_precedes(&Event::new(0.0, 0.0), &Event::new(1.0, 1.0)));
        assert!(!MINK.chronologically_precedes(&Event::new(0.0, 0.0), &Event::new(1.0, 1.0)));
        assert!(MINK.chronologically_precedes(&Event::new(0.0, 0.0), &Event::new(1.0, 0.5)));
    }

    #[test]
    fn cylinder_uses_arc_distance() {
        // Antipodal points reachable in time π along either arc.
        assert!(CYL.causally_precedes(&Event::new(0.0, 0.0), &Event::new(PI, PI)));
        assert!(!CYL.causally_precedes(&Event::new(0.0, 0.0), &Event::new(1.0, PI)));
        // Wrap-around: from angle 6.0 to 0.5 the short way is < 1.
        assert!(CYL.causally_precedes(&Event::new(0.0, 6.0), &Event::new(1.0, 0.5)));
    }

    #[test]
    fn flrw_with_unit_scale_matches_minkowski() {
        let flrw = SpacetimeModel::Flrw { eps: 0.0 };
        let mut rng = SplitMix64::new(7);
        for _ in 0..200 {
            let p = Event::new(rng.f64_in(-3.0, 3.0), rng.f64_in(-3.0, 3.0));
            let q = Event::new(rng.f64_in(-3.0, 3.0), rng.f64_in(-3.0, 3.0));
            assert_eq!(
                flrw.causally_precedes(&p, &q),
                MINK.causally_precedes(&p, &q)
            );
            assert_eq!(
                flrw.chronologically_precedes(&p, &q),
                MINK.chronologically_precedes(&p, &q)
            );
        }
    }

    #[test]
    fn conformal_time_matches_closed_form() {
        // Independent oracle: ∫₀ᵗ ds/(1+eps s²) = arctan(√eps·t)/√eps.
        for eps in [0.05, 0.1, 0.5, 1.0] {
            let model = SpacetimeModel::Flrw { eps };
            for t in [-7.0, -2.0, -0.3, 0.0, 0.4, 1.0, 3.5, 6.4] {
                let exact = (eps.sqrt() * t).atan() / eps.sqrt();
                assert!(
                    (model.conformal_time(t) - exact).abs() < 1e-10,
                    "eps={eps} t={t}"
                );
            }
        }
    }

    #[test]
    fn causal_future_of_set() {
        let set = vec![Event::new(0.0, 0.0), Event::new(0.0, 5.0)];
        assert!(MINK.in_causal_future_of_set(&set, &Event::new(2.0, 1.0)).unwrap());
        // Reachable only via the second point.
        assert!(MINK.in_causal_future_of_set(&set, &Event::new(1.0, 4.5)).unwrap());
        assert!(!MINK
            .in_causal_future_of_set(&[Event::new(0.0, 0.0)], &Event::new(-1.0, 0.0))
            .unwrap());
        assert!(MINK.in_causal_future_of_set(&[], &Event::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn connecting_curve_is_affine_on_minkowski() {
        let grid = [0.0, 0.5, 1.0];
        let curve = MINK
            .connecting_causal_curve(&Event::new(0.0, 0.0), &Event::new(1.0, 0.5), &grid)
            .unwrap();
        assert_eq!(curve.points()[1], Event::new(0.5, 0.25));
        assert_eq!(curve.points()[0], Event::new(0.0, 0.0));
        assert_eq!(curve.points()[2], Event::new(1.0, 0.5));
    }

    #[test]
    fn connecting_curve_degenerate_point() {
        let p = Event::new(2.0, 1.0);
        let curve = MINK.connecting_causal_curve(&p, &p, &[2.0]).unwrap();
        assert_eq!(curve.points(), &[p]);
    }

    #[test]
    fn connecting_curve_rejects_acausal_pairs() {
        let r = MINK.connecting_causal_curve(&Event::new(0.0, 0.0), &Event::new(1.0, 2.0), &[0.0, 1.0]);
        assert!(matches!(r, Err(Error::NotCausal { .. })));
    }

    #[test]
    fn cylinder_connecting_curve_takes_shorter_arc() {
        let grid = [0.0, PI / 2.0, PI];
        let curve = CYL
            .connecting_causal_curve(&Event::new(0.0, 0.0), &Event::new(PI, PI), &grid)
            .unwrap();
        // Antipodal tie broken toward positive orientation; every sub-step
        // must itself pass the cylinder predicate.
        let mid = curve.points()[1];
        assert!((mid.t - PI / 2.0).abs() < 1e-15);
        assert!((mid.x - PI / 2.0).abs() < 1e-12);
        for k in 0..curve.len() - 1 {
            assert!(CYL.precedes_with_slack(&curve.points()[k], &curve.points()[k + 1], 1e-12));
        }
    }

    #[test]
    fn metric_speed_examples() {
        // Null tangent on Minkowski: h = dt² + dx² gives √2.
        assert!((MINK.metric_speed(&Event::new(0.0, 0.0), 1.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((MINK.metric_speed(&Event::new(0.0, 0.0), 0.0) - 1.0).abs() < 1e-15);
        // FLRW with a = 2 at t chosen accordingly: v = 1/2 is null, h = 2.
        let eps = 1.0;
        let model = SpacetimeModel::Flrw { eps };
        let t = 1.0; // a(1) = 2
        assert!((model.scale_factor(t) - 2.0).abs() < 1e-15);
        assert!((model.metric_speed(&Event::new(t, 0.0), 0.5) - 2f64.sqrt()).abs() < 1e-15);
        assert!(model.metric_speed(&Event::new(t, 0.0), 0.5) <= model.speed_bound(&Event::new(t, 0.0)) + 1e-15);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(MINK.embed(&Event::new(1.0, 2.0)), [1.0, 2.0, 0.0]);
        let e = CYL.embed(&Event::new(1.0, 0.0));
        assert_eq!(e, [1.0, 1.0, 0.0]);
        let e = CYL.embed(&Event::new(0.0, PI / 2.0));
        assert!((e[1]).abs() < 1e-15 && (e[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn causal_relation_is_a_partial_order() {
        let models = [MINK, CYL, SpacetimeModel::Flrw { eps: 0.3 }];
        let mut rng = SplitMix64::new(11);
        for model in models {
            for _ in 0..300 {
                let mut ev = || {
                    let t = rng.f64_in(-2.0, 2.0);
                    let x = model.wrap_x(rng.f64_in(-4.0, 4.0));
                    Event::new(t, x)
                };
                let (p, q, r) = (ev(), ev(), ev());
                // Reflexivity.
                assert!(model.causally_precedes(&p, &p));
                // Antisymmetry.
                if model.causally_precedes(&p, &q) && model.causally_precedes(&q, &p) {
                    assert_eq!(p, q);
                }
                // Transitivity.
                if model.causally_precedes(&p, &q) && model.causally_precedes(&q, &r) {
                    assert!(model.causally_precedes(&p, &r));
                }
                // Push-up: p ≪ q ⪯ r ⇒ p ≪ r.
                if model.chronologically_precedes(&p, &q) && model.causally_precedes(&q, &r) {
                    assert!(model.chronologically_precedes(&p, &r));
                }
                if model.chronologically_precedes(&p, &q) {
                    assert!(model.causally_precedes(&p, &q));
                }
            }
        }
    }

    #[test]
    fn temporal_functions_validate_per_model() {
        assert!(TemporalFunction::Canonical.validate_for(&CYL).is_ok());
        assert!(TemporalFunction::Boost { v: 0.5 }.validate_for(&MINK).is_ok());
        assert!(TemporalFunction::Boost { v: 0.5 }.validate_for(&CYL).is_err());
        assert!(TemporalFunction::Boost { v: 1.0 }.validate_for(&MINK).is_err());
        assert!(TemporalFunction::Sheared { lambda: 0.5 }.validate_for(&MINK).is_ok());
        assert!(TemporalFunction::Sheared { lambda: 0.5 }
            .validate_for(&SpacetimeModel::Flrw { eps: 0.1 })
            .is_err());
    }

    #[test]
    fn temporal_gradients_are_timelike_on_minkowski() {
        // Level-set slope |∂_x T| < |∂_t T| everywhere ⇔ past-directed
        // timelike gradient in these coordinates.
        let frames = [
            TemporalFunction::Boost { v: 0.3 },
            TemporalFunction::Boost { v: -0.85 },
            TemporalFunction::Sheared { lambda: 0.5 },
            TemporalFunction::Sheared { lambda: -0.99 },
        ];
        let mut rng = SplitMix64::new(3);
        for frame in frames {
            for _ in 0..200 {
                let p = Event::new(rng.f64_in(-5.0, 5.0), rng.f64_in(-5.0, 5.0));
                let (gt, gx) = frame.gradient(&p);
                assert!(gx.abs() < gt.abs(), "{frame:?} at {p:?}");
            }
        }
    }

    #[test]
    fn clocks_increase_strictly_along_causal_curves() {
        let frames = [
            TemporalFunction::Canonical,
            TemporalFunction::Boost { v: 0.3 },
            TemporalFunction::Boost { v: -0.6 },
            TemporalFunction::Sheared { lambda: 0.5 },
        ];
        let mut rng = SplitMix64::new(23);
        let grid = crate::curves::uniform_grid(0.0, 2.0, 60);
        for _ in 0..100 {
            let curve = crate::fixtures::random_causal_curve(&MINK, &grid, &mut rng);
            for frame in &frames {
                let values: Vec<f64> = curve.points().iter().map(|p| frame.eval(p)).collect();
                assert!(
                    values.windows(2).all(|w| w[1] > w[0]),
                    "{frame:?} stalls along a causal curve"
                );
            }
        }
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(signed_arc(0.0, PI), PI); // tie breaks positive
        assert!((signed_arc(0.0, PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
    }
}
