//! The discrete vector field tangent to a curve measure, and its defining
//! residual suite.
//!
//! For a curve measure reproducing an evolution, the field applied to a test
//! function `Φ` at an atom `q` of a slice is the mass-weighted average of
//! the difference quotients `(Φ∘γ)'` over the curves passing through `q` —
//! the atomic conditional expectation realizing the curve-measure pairing.
//! Central differences are used at interior grid times, one-sided at the
//! ends; test functions must vanish near the boundary slices, so the ends
//! never enter residuals.
//!
//! The suite checks the field's defining properties: the continuity equation
//! (`∫ XΦ dη = 0`), clock normalization (`X(ΦT) − X(Φ)T = Φ`), the chain
//! rule, and causality against a battery of causal functions. A weighted sum
//! of difference quotients against matched trapezoid weights telescopes, so
//! the continuity residual for fields built this way is a pure float-noise
//! quantity (see the residual tests); the other residuals decay at second
//! order under grid refinement.

use std::collections::BTreeMap;

use crate::curve_measures::CurveMeasure;
use crate::measures::{trapezoid_weight, Evolution};
use crate::rational;
use crate::spacetime::{Event, EventKey, SpacetimeModel, TemporalFunction};
use crate::test_functions::{BumpFunction, CausalTestFunction};
use crate::{Error, Result};

/// Values of `XΦ` on the atoms of `η` (one map per grid time).
#[derive(Debug, Clone)]
pub struct FieldEvaluation {
    times: Vec<f64>,
    values: Vec<BTreeMap<EventKey, f64>>,
}

impl FieldEvaluation {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Value at slice `k`, atom `q`; requesting an event carrying no mass is
    /// an error.
    pub fn value(&self, k: usize, q: &Event) -> Result<f64> {
        self.values
            .get(k)
            .and_then(|m| m.get(&EventKey::from(q)))
            .copied()
            .ok_or_else(|| {
                Error::Grid(format!("no η-mass at slice {k}, event ({}, {})", q.t, q.x))
            })
    }

    /// Overwrites the value at an existing atom.
    pub fn set(&mut self, k: usize, q: &Event, value: f64) -> Result<()> {
        let slot = self
            .values
            .get_mut(k)
            .and_then(|m| m.get_mut(&EventKey::from(q)))
            .ok_or_else(|| {
                Error::Grid(format!("no η-mass at slice {k}, event ({}, {})", q.t, q.x))
            })?;
        *slot = value;
        Ok(())
    }

    fn zip_map(&self, other: &FieldEvaluation, f: impl Fn(f64, f64) -> f64) -> FieldEvaluation {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .map(|(k, va)| (*k, f(*va, b[k])))
                    .collect::<BTreeMap<_, _>>()
            })
            .collect();
        FieldEvaluation {
            times: self.times.clone(),
            values,
        }
    }
}

/// A curve measure paired with the evolution it reproduces; the marginal
/// match at every grid time is verified once here, after which fields for
/// any number of test functions can be built.
pub struct FieldContext<'a> {
    pub sigma: &'a CurveMeasure,
    pub ev: &'a Evolution,
}

impl<'a> FieldContext<'a> {
    pub fn new(sigma: &'a CurveMeasure, ev: &'a Evolution) -> Result<Self> {
        if sigma.times() != ev.times() {
            return Err(Error::Grid(
                "curve measure and evolution live on different grids".into(),
            ));
        }
        for k in 0..ev.len() {
            if sigma.pushforward_at_index(k)?.atoms() != ev.slices()[k].atoms() {
                return Err(Error::MarginalMismatch(format!(
                    "pushforward at grid index {k} does not reproduce the slice"
                )));
            }
        }
        Ok(FieldContext { sigma, ev })
    }

    /// The field applied to a scalar function, evaluated on every η-atom.
    pub fn build(&self, phi: impl Fn(&Event) -> f64) -> FieldEvaluation {
        let times = self.ev.times().to_vec();
        let n = times.len();
        let mut num: Vec<BTreeMap<EventKey, f64>> = vec![BTreeMap::new(); n];
        let mut den: Vec<BTreeMap<EventKey, f64>> = vec![BTreeMap::new(); n];
        for (curve, w) in self.sigma.atoms() {
            let wf = rational::to_f64(w);
            let samples: Vec<f64> = curve.points().iter().map(&phi).collect();
            for k in 0..n {
                let (i, j) = if k == 0 {
                    (0, 1)
                } else if k == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (k - 1, k + 1)
                };
                let quotient = (samples[j] - samples[i]) / (times[j] - times[i]);
                let key = EventKey::from(&curve.points()[k]);
                *num[k].entry(key).or_insert(0.0) += wf * quotient;
                *den[k].entry(key).or_insert(0.0) += wf;
            }
        }
        let values = num
            .into_iter()
            .zip(den)
            .map(|(nk, dk)| {
                nk.into_iter()
                    .map(|(key, v)| (key, v / dk[&key]))
                    .collect::<BTreeMap<_, _>>()
            })
            .collect();
        FieldEvaluation { times, values }
    }

    fn max_step(&self) -> f64 {
        self.ev
            .times()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    fn require_interior_support(&self, phi: &BumpFunction) -> Result<()> {
        let margin = 2.0 * self.max_step();
        if !phi.fits_inside(self.ev.interval(), margin) {
            return Err(Error::TestFunction(format!(
                "bump support {:?} not inside the open slab {:?} with margin {margin}",
                phi.support_t(),
                self.ev.interval()
            )));
        }
        Ok(())
    }
}

/// Builds the field for one test function (validating the marginal match).
pub fn build_field(
    sigma: &CurveMeasure,
    ev: &Evolution,
    phi: impl Fn(&Event) -> f64,
) -> Result<FieldEvaluation> {
    Ok(FieldContext::new(sigma, ev)?.build(phi))
}

/// `∫ g dη` for a field evaluation, trapezoid in time.
pub fn integrate_field_against_eta(ev: &Evolution, field: &FieldEvaluation) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (k, slice) in ev.slices().iter().enumerate() {
        let wk = trapezoid_weight(ev.times(), k);
        for (q, w) in slice.atoms() {
            let term = wk * rational::to_f64(w) * field.value(k, q).expect("atom has a value");
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
    }
    sum
}

/// Continuity residual `|∫ XΦ dη|`. The bump's support must sit strictly
/// inside the open slab (two grid steps of margin).
pub fn continuity_residual(ctx: &FieldContext, phi: &BumpFunction) -> Result<f64> {
    ctx.require_interior_support(phi)?;
    let field = ctx.build(|p| phi.eval(p));
    Ok(integrate_field_against_eta(ctx.ev, &field).abs())
}

/// Clock-normalization residual: `max_q |X(ΦT)(q) − X(Φ)(q)·T(q) − Φ(q)|`.
pub fn clock_normalization_residual(
    ctx: &FieldContext,
    phi: &BumpFunction,
    clock: &TemporalFunction,
) -> Result<f64> {
    ctx.require_interior_support(phi)?;
    let x_phi_t = ctx.build(|p| phi.eval(p) * clock.eval(p));
    let x_phi = ctx.build(|p| phi.eval(p));
    let mut worst = 0.0f64;
    for (k, slice) in ctx.ev.slices().iter().enumerate() {
        for (q, _) in slice.atoms() {
            let r = x_phi_t.value(k, q)? - x_phi.value(k, q)? * clock.eval(q) - phi.eval(q);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Smooth outer composition `Θ: ℝ^L → ℝ` with `Θ(0) = 0`.
pub trait SmoothMap {
    fn arity(&self) -> usize;
    fn eval(&self, args: &[f64]) -> f64;
    fn grad(&self, args: &[f64]) -> Vec<f64>;
}

/// `Θ(a, b) = a·b` (the Leibniz rule as a chain-rule instance).
pub struct ProductMap;

impl SmoothMap for ProductMap {
    fn arity(&self) -> usize {
        2
    }
    fn eval(&self, a: &[f64]) -> f64 {
        a[0] * a[1]
    }
    fn grad(&self, a: &[f64]) -> Vec<f64> {
        vec![a[1], a[0]]
    }
}

/// `Θ(a) = a²`.
pub struct SquareMap;

impl SmoothMap for SquareMap {
    fn arity(&self) -> usize {
        1
    }
    fn eval(&self, a: &[f64]) -> f64 {
        a[0] * a[0]
    }
    fn grad(&self, a: &[f64]) -> Vec<f64> {
        vec![2.0 * a[0]]
    }
}

/// `Θ(a, b) = a` (identity in the first slot).
pub struct FirstSlotMap;

impl SmoothMap for FirstSlotMap {
    fn arity(&self) -> usize {
        2
    }
    fn eval(&self, a: &[f64]) -> f64 {
        a[0]
    }
    fn grad(&self, _a: &[f64]) -> Vec<f64> {
        vec![1.0, 0.0]
    }
}

/// Chain-rule residual:
/// `max_q |X(Θ(Φ₁…Φ_L))(q) − Σ_l ∂_lΘ(Φ(q))·XΦ_l(q)|`.
pub fn chain_rule_residual(
    ctx: &FieldContext,
    theta: &dyn SmoothMap,
    phis: &[BumpFunction],
) -> Result<f64> {
    if phis.len() != theta.arity() {
        return Err(Error::TestFunction(format!(
            "Θ has arity {}, got {} test functions",
            theta.arity(),
            phis.len()
        )));
    }
    let zero = vec![0.0; theta.arity()];
    if theta.eval(&zero).abs() > 1e-15 {
        return Err(Error::TestFunction(
            "Θ(0,…,0) must vanish (composite would lose compact support)".into(),
        ));
    }
    for phi in phis {
        ctx.require_interior_support(phi)?;
    }
    let composite = ctx.build(|p| {
        let args: Vec<f64> = phis.iter().map(|phi| phi.eval(p)).collect();
        theta.eval(&args)
    });
    let parts: Vec<FieldEvaluation> = phis.iter().map(|phi| ctx.build(|p| phi.eval(p))).collect();
    let mut worst = 0.0f64;
    for (k, slice) in ctx.ev.slices().iter().enumerate() {
        for (q, _) in slice.atoms() {
            let args: Vec<f64> = phis.iter().map(|phi| phi.eval(q)).collect();
            let grad = theta.grad(&args);
            let mut rhs = 0.0;
            for (l, g) in grad.iter().enumerate() {
                rhs += g * parts[l].value(k, q)?;
            }
            worst = worst.max((composite.value(k, q)? - rhs).abs());
        }
    }
    Ok(worst)
}

/// Causality residual: `min_q X(Φf)(q) − X(Φ)(q)·f(q)` for a nonnegative
/// bump and a causal function; nonnegative up to discretization for causal
/// curve measures, and strictly negative when an acausal curve hides inside.
pub fn causality_residual(
    ctx: &FieldContext,
    model: &SpacetimeModel,
    f: &CausalTestFunction,
    phi: &BumpFunction,
) -> Result<f64> {
    ctx.require_interior_support(phi)?;
    let x_phi_f = ctx.build(|p| phi.eval(p) * f.eval(model, p));
    let x_phi = ctx.build(|p| phi.eval(p));
    let mut worst = f64::INFINITY;
    for (k, slice) in ctx.ev.slices().iter().enumerate() {
        for (q, _) in slice.atoms() {
            if phi.eval(q) < 0.0 {
                return Err(Error::TestFunction("Φ must be nonnegative".into()));
            }
            let r = x_phi_f.value(k, q)? - x_phi.value(k, q)? * f.eval(model, q);
            worst = worst.min(r);
        }
    }
    Ok(if worst == f64::INFINITY { 0.0 } else { worst })
}

/// The time profile `Λ(t_k) = ∫ g dμ_{t_k}` of a scalar function.
pub fn lambda_curve(ev: &Evolution, g: impl Fn(&Event) -> f64) -> Vec<f64> {
    ev.slices().iter().map(|s| s.integrate(&g)).collect()
}

/// The time profile of a field evaluation.
pub fn lambda_of_field(ev: &Evolution, field: &FieldEvaluation) -> Vec<f64> {
    ev.slices()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.atoms()
                .iter()
                .map(|(q, w)| rational::to_f64(w) * field.value(k, q).expect("atom"))
                .sum()
        })
        .collect()
}

/// Weak-derivative check: central differences of `Λ(Φ)` against `Λ(XΦ)`,
/// maximum over interior grid times.
pub fn lambda_derivative_residual(
    ctx: &FieldContext,
    phi: &BumpFunction,
) -> Result<f64> {
    ctx.require_interior_support(phi)?;
    let field = ctx.build(|p| phi.eval(p));
    let profile = lambda_curve(ctx.ev, |p| phi.eval(p));
    let flux = lambda_of_field(ctx.ev, &field);
    let times = ctx.ev.times();
    let mut worst = 0.0f64;
    for k in 1..times.len() - 1 {
        let diff = (profile[k + 1] - profile[k - 1]) / (times[k + 1] - times[k - 1]);
        worst = worst.max((diff - flux[k]).abs());
    }
    Ok(worst)
}

/// Smooth compactly supported partition of unity in the time variable:
/// telescoping differences of smooth steps, cut off by a smooth window
/// factor whose plateau contains the declared window. The pieces sum to one
/// identically on the window and vanish a few transition widths outside it.
#[derive(Debug, Clone)]
pub struct TimePartition {
    window: (f64, f64),
    /// Interior knots; piece `j` lives between knots `j-1` and `j`.
    knots: Vec<f64>,
    half_width: f64,
}

fn smooth_step(u: f64) -> f64 {
    // 0 below 0, 1 above 1, smooth in between.
    let b = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let num = b(u);
    let den = num + b(1.0 - u);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl TimePartition {
    /// `pieces ≥ 1` pieces over `window`, with transition half-width a third
    /// of the knot spacing.
    pub fn uniform(window: (f64, f64), pieces: usize) -> Self {
        assert!(pieces >= 1 && window.1 > window.0);
        let (a, b) = window;
        let gap = (b - a) / pieces as f64;
        let knots = (1..pieces).map(|j| a + j as f64 * gap).collect();
        TimePartition {
            window,
            knots,
            half_width: gap / 3.0,
        }
    }

    pub fn piece_count(&self) -> usize {
        self.knots.len() + 1
    }

    /// Descending transition centered at `center`.
    fn step_down(&self, center: f64, t: f64) -> f64 {
        1.0 - smooth_step((t - (center - self.half_width)) / (2.0 * self.half_width))
    }

    /// Smooth cutoff: 1 on `[a − w, b + w]`, 0 beyond `±3w`, making every
    /// piece compactly supported.
    fn cutoff(&self, t: f64) -> f64 {
        let w = self.half_width;
        let ascent = smooth_step((t - (self.window.0 - 3.0 * w)) / (2.0 * w));
        ascent * self.step_down(self.window.1 + 2.0 * w, t)
    }

    pub fn eval_piece(&self, j: usize, t: f64) -> f64 {
        let left = if j == 0 {
            1.0
        } else {
            self.step_down(self.knots[j - 1], t)
        };
        let right = if j == self.knots.len() {
            0.0
        } else {
            self.step_down(self.knots[j], t)
        };
        (left - right) * self.cutoff(t)
    }

    pub fn sum(&self, t: f64) -> f64 {
        (0..self.piece_count()).map(|j| self.eval_piece(j, t)).sum()
    }
}

/// Extends the field to a non-compactly-supported smooth `Ψ` through a
/// partition of unity: `XΨ := Σ_j X(φ_j Ψ)`. The partition must sum to one
/// on the whole slab (checked at every atom). The result is independent of
/// the partition up to float roundoff, and `Ψ ≡ 1` extends to zero.
pub fn extend_field(
    ctx: &FieldContext,
    psi: impl Fn(&Event) -> f64,
    partition: &TimePartition,
) -> Result<FieldEvaluation> {
    for slice in ctx.ev.slices() {
        for (q, _) in slice.atoms() {
            let s = partition.sum(q.t);
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Partition(format!(
                    "partition sums to {s} at t={}",
                    q.t
                )));
            }
        }
    }
    let mut total: Option<FieldEvaluation> = None;
    for j in 0..partition.piece_count() {
        let piece = ctx.build(|p| partition.eval_piece(j, p.t) * psi(p));
        total = Some(match total {
            None => piece,
            Some(acc) => acc.zip_map(&piece, |a, b| a + b),
        });
    }
    Ok(total.expect("partition has at least one piece"))
}

/// First-order tolerance schedule for the continuity residual.
pub fn tol_continuity(dt: f64, phi: &BumpFunction) -> f64 {
    10.0 * dt * phi.sup_norm()
}

/// Second-order tolerance schedule for clock/Leibniz residuals.
pub fn tol_second_order(dt: f64) -> f64 {
    10.0 * dt * dt
}
