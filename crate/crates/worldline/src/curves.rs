//! Causal curves parametrized by global time, sampled on a time grid.
//!
//! A curve stores one event per grid time, with the canonical time value of
//! the `k`-th sample equal to the `k`-th grid time. Between samples the
//! curve is understood as the model's connecting causal curve (affine in the
//! appropriate chart), which keeps interpolants causal by construction.
//!
//! Besides validation, differentiation and concatenation, this module
//! carries the two proximity functionals on curve space: the sup-distance of
//! the Euclidean embeddings (the uniform topology) and the `H¹` pairing
//! against test vector fields (the weak Sobolev topology). The library's
//! convergence probes check that the two notions of closeness track each
//! other on constructed sequences.

use serde::{Deserialize, Serialize};

use crate::spacetime::{signed_arc, EmbeddedPoint, Event, SpacetimeModel, TemporalFunction};
use crate::{Error, Result};

/// A sampled future-directed causal curve with `T(γ(t)) = t` on its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalCurve {
    times: Vec<f64>,
    points: Vec<Event>,
}

/// Outcome of curve validation: either valid or the first offending index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveCheck {
    Valid,
    ViolationAt(usize),
}

impl CurveCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, CurveCheck::Valid)
    }
}

impl CausalCurve {
    /// Builds a curve from matching grids and samples. Shape errors (length
    /// mismatch, non-increasing grid) are rejected here; causality is a
    /// separate, model-aware check ([`CausalCurve::validate`]).
    pub fn new(times: Vec<f64>, points: Vec<Event>) -> Result<Self> {
        if times.is_empty() || times.len() != points.len() {
            return Err(Error::Grid(format!(
                "curve needs matching nonempty grids: {} times, {} points",
                times.len(),
                points.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Grid("curve grid not strictly increasing".into()));
        }
        Ok(CausalCurve { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Event] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> &Event {
        &self.points[0]
    }

    pub fn end(&self) -> &Event {
        &self.points[self.points.len() - 1]
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Checks both curve invariants against the canonical clock: adjacent
    /// samples causally ordered (sufficient by transitivity) and the
    /// parametrization `T∘γ = id` on the grid. `slack` loosens only the cone
    /// test, for curves assembled from rounded coordinates.
    pub fn validate(&self, model: &SpacetimeModel, slack: f64) -> CurveCheck {
        self.validate_in_frame(model, &TemporalFunction::Canonical, slack, 1e-9)
    }

    /// Validation against an arbitrary temporal function: sample `k` must
    /// satisfy `|T_B(γ_k) − times[k]| ≤ param_tol`.
    pub fn validate_in_frame(
        &self,
        model: &SpacetimeModel,
        frame: &TemporalFunction,
        slack: f64,
        param_tol: f64,
    ) -> CurveCheck {
        for (k, p) in self.points.iter().enumerate() {
            if model.validate_event(p).is_err() {
                return CurveCheck::ViolationAt(k);
            }
            if (frame.eval(p) - self.times[k]).abs() > param_tol {
                return CurveCheck::ViolationAt(k);
            }
        }
        for k in 0..self.len() - 1 {
            if !model.precedes_with_slack(&self.points[k], &self.points[k + 1], slack) {
                return CurveCheck::ViolationAt(k + 1);
            }
        }
        CurveCheck::Valid
    }

    /// Spatial velocity at sample `k`: central difference at interior
    /// indices, one-sided at the ends. Cylinder displacements are measured
    /// along the shorter signed arc.
    pub fn derivative(&self, model: &SpacetimeModel, k: usize) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::Grid("derivative needs at least two samples".into()));
        }
        let (i, j) = if k == 0 {
            (0, 1)
        } else if k == self.len() - 1 {
            (self.len() - 2, self.len() - 1)
        } else {
            (k - 1, k + 1)
        };
        let dx = self.displacement(model, i, j);
        Ok(dx / (self.times[j] - self.times[i]))
    }

    fn displacement(&self, model: &SpacetimeModel, i: usize, j: usize) -> f64 {
        match model {
            SpacetimeModel::Cylinder => {
                // Accumulate per-step arcs so multi-step displacements do not
                // alias across the branch cut.
                (i..j)
                    .map(|k| signed_arc(self.points[k].x, self.points[k + 1].x))
                    .sum()
            }
            _ => self.points[j].x - self.points[i].x,
        }
    }

    /// Event on the interpolated curve at canonical time `t` inside the grid.
    pub fn sample_at(&self, model: &SpacetimeModel, t: f64) -> Result<Event> {
        let (a, b) = self.interval();
        if t < a || t > b {
            return Err(Error::Range(format!("time {t} outside curve interval [{a}, {b}]")));
        }
        match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(k) => Ok(self.points[k]),
            Err(k) => Ok(model.interpolate_segment(&self.points[k - 1], &self.points[k], t)),
        }
    }

    /// Reparametrizes by the temporal function `frame`: the result satisfies
    /// `T_B(γ̃(τ)) = τ` at every new grid point (up to interpolation) and its
    /// image lies on the piecewise-interpolated image of `self`.
    ///
    /// `T_B ∘ γ` must be strictly increasing along the samples; violations
    /// beyond 1e-12 are hard errors (the clock is not temporal for this
    /// curve). Inversion is monotone piecewise-linear.
    pub fn reparametrize(
        &self,
        model: &SpacetimeModel,
        frame: &TemporalFunction,
        new_grid: &[f64],
    ) -> Result<CausalCurve> {
        if new_grid.is_empty() {
            return Err(Error::Grid("empty reparametrization grid".into()));
        }
        let clock: Vec<f64> = self.points.iter().map(|p| frame.eval(p)).collect();
        for w in clock.windows(2) {
            if w[1] - w[0] <= -1e-12 {
                return Err(Error::NonMonotone(format!(
                    "clock decreases from {} to {}",
                    w[0], w[1]
                )));
            }
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(format!(
                    "clock stalls at {} (needs strict increase)",
                    w[0]
                )));
            }
        }
        let lo = clock[0];
        let hi = clock[clock.len() - 1];
        let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        let mut points = Vec::with_capacity(new_grid.len());
        for &tau in new_grid {
            if tau < lo - tol || tau > hi + tol {
                return Err(Error::Range(format!(
                    "target time {tau} outside clock range [{lo}, {hi}]"
                )));
            }
            let tau_c = tau.clamp(lo, hi);
            let k = match clock.binary_search_by(|v| v.total_cmp(&tau_c)) {
                Ok(k) => {
                    points.push(self.points[k]);
                    continue;
                }
                Err(k) => k,
            };
            // Linearize the clock in canonical time along the bracketing
            // segment (the segment itself is parametrized by canonical time
            // regardless of the curve's own grid clock).
            let (p0, p1) = (&self.points[k - 1], &self.points[k]);
            let (c0, c1) = (clock[k - 1], clock[k]);
            let t = if p1.t > p0.t {
                p0.t + (p1.t - p0.t) * (tau_c - c0) / (c1 - c0)
            } else {
                p0.t
            };
            points.push(model.interpolate_segment(p0, p1, t));
        }
        CausalCurve::new(new_grid.to_vec(), points)
    }

    /// Concatenation of two curves meeting exactly at the shared endpoint;
    /// the duplicate junction sample is dropped.
    pub fn concatenate(first: &CausalCurve, second: &CausalCurve) -> Result<CausalCurve> {
        if first.end() != second.start() {
            return Err(Error::EndpointMismatch(format!(
                "({}, {}) != ({}, {})",
                first.end().t,
                first.end().x,
                second.start().t,
                second.start().x
            )));
        }
        let mut times = first.times.clone();
        let mut points = first.points.clone();
        times.extend_from_slice(&second.times[1..]);
        points.extend_from_slice(&second.points[1..]);
        CausalCurve::new(times, points)
    }

    /// Restriction to every `stride`-th sample (keeping both endpoints must
    /// be arranged by the caller choosing a stride dividing the grid).
    pub fn subsample(&self, stride: usize) -> Result<CausalCurve> {
        if stride == 0 || !(self.len() - 1).is_multiple_of(stride) {
            return Err(Error::Grid(format!(
                "stride {stride} does not divide {} grid steps",
                self.len() - 1
            )));
        }
        let times = self.times.iter().copied().step_by(stride).collect();
        let points = self.points.iter().copied().step_by(stride).collect();
        CausalCurve::new(times, points)
    }
}

/// Sup-distance of the Euclidean embeddings over `window`, evaluated on the
/// union of both curves' sample times (plus the window ends).
pub fn uniform_distance(
    model: &SpacetimeModel,
    a: &CausalCurve,
    b: &CausalCurve,
    window: (f64, f64),
) -> Result<f64> {
    let grid = merged_window_grid(&[a, b], window)?;
    let mut sup = 0.0f64;
    for &t in &grid {
        let pa = model.embed(&a.sample_at(model, t)?);
        let pb = model.embed(&b.sample_at(model, t)?);
        sup = sup.max(crate::spacetime::euclidean_distance(&pa, &pb));
    }
    Ok(sup)
}

fn merged_window_grid(curves: &[&CausalCurve], window: (f64, f64)) -> Result<Vec<f64>> {
    let (w0, w1) = window;
    if w0 >= w1 {
        return Err(Error::Range(format!("empty window [{w0}, {w1}]")));
    }
    for c in curves {
        let (a, b) = c.interval();
        if w0 < a - 1e-12 || w1 > b + 1e-12 {
            return Err(Error::Range(format!(
                "window [{w0}, {w1}] not covered by curve on [{a}, {b}]"
            )));
        }
    }
    let mut grid: Vec<f64> = vec![w0, w1];
    for c in curves {
        grid.extend(c.times().iter().copied().filter(|&t| t > w0 && t < w1));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// A test vector field on a time window, with values and derivatives in the
/// embedding space. The standard battery holds constants, linear ramps and
/// one bump per coordinate — a separating family at desk scale.
#[derive(Debug, Clone)]
pub enum TestVector {
    Constant([f64; 3]),
    /// `t ↦ t·direction`.
    Ramp([f64; 3]),
    /// Smooth bump in coordinate `coord`, centered mid-window.
    Bump { coord: usize, center: f64, radius: f64 },
}

impl TestVector {
    pub fn value(&self, t: f64) -> [f64; 3] {
        match self {
            TestVector::Constant(v) => *v,
            TestVector::Ramp(v) => [v[0] * t, v[1] * t, v[2] * t],
            TestVector::Bump { coord, center, radius } => {
                let mut out = [0.0; 3];
                out[*coord] = bump_profile((t - center) / radius);
                out
            }
        }
    }

    pub fn deriv(&self, t: f64) -> [f64; 3] {
        match self {
            TestVector::Constant(_) => [0.0; 3],
            TestVector::Ramp(v) => *v,
            TestVector::Bump { coord, center, radius } => {
                let mut out = [0.0; 3];
                out[*coord] = bump_profile_deriv((t - center) / radius) / radius;
                out
            }
        }
    }

    /// Constants, ramps and bumps spanning the first `dim` coordinates.
    pub fn standard_battery(dim: usize, window: (f64, f64)) -> Vec<TestVector> {
        let center = 0.5 * (window.0 + window.1);
        let radius = 0.4 * (window.1 - window.0);
        let mut battery = Vec::new();
        for coord in 0..dim {
            let mut e = [0.0; 3];
            e[coord] = 1.0;
            battery.push(TestVector::Constant(e));
            battery.push(TestVector::Ramp(e));
            battery.push(TestVector::Bump { coord, center, radius });
        }
        battery
    }
}

/// The standard compactly supported profile `exp(−1/(1−u²))` on `|u| < 1`.
pub fn bump_profile(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

pub fn bump_profile_deriv(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let d = 1.0 - u * u;
        bump_profile(u) * (-2.0 * u / (d * d))
    } else {
        0.0
    }
}

/// Combined speed-bound and Lipschitz audit of a sampled curve: every
/// difference-quotient tangent must obey `metric_speed ≤ √(2θα) + 10Δt`,
/// and (on the flat models, where the embedding is h-isometric) every
/// sample pair must obey the Lipschitz estimate
/// `|i(γ(t)) − i(γ(s))| ≤ |t−s|·max √(2θα)` up to roundoff.
pub fn validate_speed_and_lipschitz(
    model: &SpacetimeModel,
    curve: &CausalCurve,
    dt: f64,
    check_lipschitz: bool,
) -> bool {
    for k in 0..curve.len() {
        let v = match curve.derivative(model, k) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let p = &curve.points()[k];
        if model.metric_speed(p, v) > model.speed_bound(p) + 10.0 * dt {
            return false;
        }
    }
    if check_lipschitz {
        let embedded: Vec<_> = curve.points().iter().map(|p| model.embed(p)).collect();
        for i in 0..curve.len() {
            let bound_i = model.speed_bound(&curve.points()[i]);
            for j in i + 1..curve.len() {
                let span = curve.times()[j] - curve.times()[i];
                let dist = crate::spacetime::euclidean_distance(&embedded[i], &embedded[j]);
                if dist > span * bound_i.max(model.speed_bound(&curve.points()[j])) + 1e-9 {
                    return false;
                }
            }
        }
    }
    true
}

/// `H¹` pairing `∫ (i∘γ)·v + ∫ (i∘γ)'·v'` over `window` by trapezoid
/// quadrature on the curve's samples; the curve derivative is the
/// per-segment difference quotient of the embedding.
pub fn h1_pairing(
    model: &SpacetimeModel,
    curve: &CausalCurve,
    v: &TestVector,
    window: (f64, f64),
) -> Result<f64> {
    let grid = merged_window_grid(&[curve], window)?;
    let embedded: Vec<EmbeddedPoint> = grid
        .iter()
        .map(|&t| Ok(model.embed(&curve.sample_at(model, t)?)))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for k in 0..grid.len() - 1 {
        let dt = grid[k + 1] - grid[k];
        // L² part: trapezoid of (i∘γ)·v.
        let f0 = dot(&embedded[k], &v.value(grid[k]));
        let f1 = dot(&embedded[k + 1], &v.value(grid[k + 1]));
        total += 0.5 * dt * (f0 + f1);
        // Derivative part: (i∘γ)' is constant on the segment.
        let dgamma = [
            (embedded[k + 1][0] - embedded[k][0]) / dt,
            (embedded[k + 1][1] - embedded[k][1]) / dt,
            (embedded[k + 1][2] - embedded[k][2]) / dt,
        ];
        let g0 = dot(&dgamma, &v.deriv(grid[k]));
        let g1 = dot(&dgamma, &v.deriv(grid[k + 1]));
        total += 0.5 * dt * (g0 + g1);
    }
    Ok(total)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Uniform grid `a, a+dt, …, b` with exactly `steps` intervals.
pub fn uniform_grid(a: f64, b: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 1 && b > a);
    let dt = (b - a) / steps as f64;
    let mut grid: Vec<f64> = (0..=steps).map(|k| a + k as f64 * dt).collect();
    grid[steps] = b;
    grid
}
