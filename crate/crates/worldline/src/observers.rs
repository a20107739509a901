//! General covariance: transforming curve measures, η-measures and fields
//! between global clocks, with the two observer-independent invariants.
//!
//! Two observers describing the same transported quantity with different
//! Cauchy temporal functions are related by curve-by-curve reparametrization
//! of the curve measure, by the density `X_A T_B` for the η-measures
//! (`η_B = X_A T_B · η_A`), and by the reciprocal rescaling of the fields
//! (`X_B = X_A / X_A T_B`). What does not depend on the observer at all:
//! the measure on unparametrized worldlines ([`deparametrize`]) and the
//! Radon 4-current pairing `∫ XΨ·φ dη` ([`invariant_current_check`]).

use crate::curve_measures::CurveMeasure;
use crate::curves::{uniform_grid, CausalCurve};
use crate::field::{extend_field, FieldContext, FieldEvaluation, TimePartition};
use crate::measures::{trapezoid_weight, SliceMeasure};
use crate::rational::{self, Weight};
use crate::spacetime::{Event, EventKey, SpacetimeModel, TemporalFunction};
use crate::test_functions::BumpFunction;
use crate::{Error, Result};

/// A global observer: an admissible clock plus the slice grid it reads.
#[derive(Debug, Clone)]
pub struct ObserverFrame {
    pub clock: TemporalFunction,
    pub grid: Vec<f64>,
}

impl ObserverFrame {
    pub fn new(model: &SpacetimeModel, clock: TemporalFunction, grid: Vec<f64>) -> Result<Self> {
        clock.validate_for(model)?;
        if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Grid("frame grid must strictly increase".into()));
        }
        Ok(ObserverFrame { clock, grid })
    }

    /// Uniform frame grid spanning the intersection of the clock ranges of
    /// all curves of `sigma`, with the given number of steps.
    pub fn covering(
        model: &SpacetimeModel,
        sigma: &CurveMeasure,
        clock: TemporalFunction,
        steps: usize,
    ) -> Result<Self> {
        clock.validate_for(model)?;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (curve, _) in sigma.atoms() {
            lo = lo.max(clock.eval(curve.start()));
            hi = hi.min(clock.eval(curve.end()));
        }
        if lo >= hi {
            return Err(Error::Range(
                "curve clock ranges have empty intersection".into(),
            ));
        }
        Self::new(model, clock, uniform_grid(lo, hi, steps))
    }
}

/// Reparametrizes every curve of `sigma` by the frame's clock; weights are
/// untouched. Pushforwards of the result define the evolution seen by the
/// new observer.
pub fn transform_sigma(
    model: &SpacetimeModel,
    sigma: &CurveMeasure,
    frame: &ObserverFrame,
) -> Result<CurveMeasure> {
    let atoms = sigma
        .atoms()
        .iter()
        .map(|(curve, w)| {
            Ok((
                curve.reparametrize(model, &frame.clock, &frame.grid)?,
                w.clone(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    // Nonlinear clocks land between interpolation nodes: allow a
    // second-order parametrization slack on top of roundoff.
    let max_step = sigma
        .times()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    let param_tol = 1e-9 + 10.0 * max_step * max_step;
    CurveMeasure::new_in_frame(model, atoms, frame.clock, 1e-9, param_tol)
}

/// The change-of-observer data at the level of `η` and `X`: the clock rate
/// `X_A T_B` evaluated on every atom of `η_A`.
pub struct FrameChange {
    pub clock_rate: FieldEvaluation,
}

impl FrameChange {
    /// Computes `X_A T_B` by partition-of-unity extension and checks it is
    /// strictly positive everywhere (it must be, for a temporal function
    /// against a causal field).
    pub fn new(ctx: &FieldContext, frame_b: &TemporalFunction) -> Result<Self> {
        let partition = TimePartition::uniform(ctx.ev.interval(), default_pieces(ctx.ev.len()));
        let clock_rate = extend_field(ctx, |p| frame_b.eval(p), &partition)?;
        for (k, slice) in ctx.ev.slices().iter().enumerate() {
            for (q, _) in slice.atoms() {
                let rate = clock_rate.value(k, q)?;
                if rate <= 0.0 {
                    return Err(Error::InvalidFrame(format!(
                        "clock rate {rate} ≤ 0 at slice {k}: field is acausal or the frame invalid"
                    )));
                }
            }
        }
        Ok(FrameChange { clock_rate })
    }

    /// `η_B`-weight of an atom, given its `η_A` weight.
    pub fn eta_weight(&self, k: usize, q: &Event, eta_a_weight: f64) -> Result<f64> {
        Ok(eta_a_weight * self.clock_rate.value(k, q)?)
    }

    /// `X_B Φ = X_A Φ / (X_A T_B)` on every atom.
    pub fn rescale(&self, x_a: &FieldEvaluation, ctx: &FieldContext) -> Result<FieldEvaluation> {
        let mut out = x_a.clone();
        for (k, slice) in ctx.ev.slices().iter().enumerate() {
            for (q, _) in slice.atoms() {
                let rate = self.clock_rate.value(k, q)?;
                out.set(k, q, x_a.value(k, q)? / rate)?;
            }
        }
        Ok(out)
    }
}

fn default_pieces(grid_len: usize) -> usize {
    (grid_len / 8).clamp(2, 6)
}

/// Smooth, not necessarily compactly supported observables for the
/// invariant-current battery.
#[derive(Debug, Clone, Copy)]
pub struct SmoothObservable {
    pub id: &'static str,
    pub f: fn(&Event) -> f64,
}

/// Per-model battery of smooth observables.
pub fn observable_battery(model: &SpacetimeModel) -> Vec<SmoothObservable> {
    match model {
        SpacetimeModel::Cylinder => vec![
            SmoothObservable { id: "time", f: |p| p.t },
            SmoothObservable { id: "cos_x", f: |p| p.x.cos() },
            SmoothObservable { id: "sin_x", f: |p| p.x.sin() },
        ],
        _ => vec![
            SmoothObservable { id: "time", f: |p| p.t },
            SmoothObservable { id: "space", f: |p| p.x },
            SmoothObservable { id: "arctan_null", f: |p| (p.t - p.x).atan() },
        ],
    }
}

/// One side of the Radon-4-current pairing: `∫ XΨ·φ dη` over a frame's
/// grid, built from that frame's curve-measure context.
pub fn current_pairing(
    ctx: &FieldContext,
    psi: &SmoothObservable,
    phi: &BumpFunction,
) -> Result<f64> {
    let partition = TimePartition::uniform(ctx.ev.interval(), default_pieces(ctx.ev.len()));
    let x_psi = extend_field(ctx, psi.f, &partition)?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (k, slice) in ctx.ev.slices().iter().enumerate() {
        let wk = trapezoid_weight(ctx.ev.times(), k);
        for (q, w) in slice.atoms() {
            let term = wk * rational::to_f64(w) * x_psi.value(k, q)? * phi.eval(q);
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
    }
    Ok(sum)
}

/// Worst relative discrepancy of the current pairing between two frames'
/// descriptions of the same curve measure, over the `(Ψ, φ)` battery.
pub fn invariant_current_check(
    ctx_a: &FieldContext,
    ctx_b: &FieldContext,
    psis: &[SmoothObservable],
    phis: &[BumpFunction],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for psi in psis {
        for phi in phis {
            let lhs = current_pairing(ctx_a, psi, phi)?;
            let rhs = current_pairing(ctx_b, psi, phi)?;
            let rel = (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1e-12);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// Slice of `η_A` at frame-B time `τ`, realized through the curve measure:
/// each curve contributes its crossing of the `T_B = τ` level with its own
/// weight. Agrees with the pushforward of [`transform_sigma`] at grid times.
pub fn disintegrate_eta(
    model: &SpacetimeModel,
    sigma: &CurveMeasure,
    frame: &ObserverFrame,
    tau: f64,
) -> Result<SliceMeasure> {
    let mut merged: std::collections::BTreeMap<EventKey, Weight> = Default::default();
    for (curve, w) in sigma.atoms() {
        let crossing = curve.reparametrize(model, &frame.clock, &[tau])?;
        let key = EventKey::from(&crossing.points()[0]);
        merged
            .entry(key)
            .and_modify(|acc| *acc += w.clone())
            .or_insert_with(|| w.clone());
    }
    let atoms: Vec<(Event, Weight)> = merged.into_iter().map(|(k, w)| (k.event(), w)).collect();
    let max_step = sigma
        .times()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    SliceMeasure::new_in_frame(tau, atoms, &frame.clock, 1e-9 + 10.0 * max_step * max_step, 0.0)
}

/// A probability measure on unparametrized worldlines: atoms are canonical
/// representatives (images resampled on a uniform canonical grid), so frame
/// changes of the underlying curve measure leave it fixed.
#[derive(Debug, Clone)]
pub struct WorldlineMeasure {
    atoms: Vec<(CausalCurve, Weight)>,
}

impl WorldlineMeasure {
    pub fn atoms(&self) -> &[(CausalCurve, Weight)] {
        &self.atoms
    }

    /// Structural comparison up to a per-sample tolerance.
    pub fn approx_eq(&self, other: &WorldlineMeasure, tol: f64) -> bool {
        self.max_deviation(other).is_some_and(|d| d <= tol)
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|((_, wa), (_, wb))| wa == wb)
    }

    /// Largest per-sample coordinate deviation between matching atoms, or
    /// `None` when the structures differ.
    pub fn max_deviation(&self, other: &WorldlineMeasure) -> Option<f64> {
        if self.atoms.len() != other.atoms.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for ((ca, _), (cb, _)) in self.atoms.iter().zip(&other.atoms) {
            if ca.len() != cb.len() {
                return None;
            }
            for (p, q) in ca.points().iter().zip(cb.points()) {
                worst = worst.max((p.t - q.t).abs()).max((p.x - q.x).abs());
            }
        }
        Some(worst)
    }
}

fn curves_close(a: &CausalCurve, b: &CausalCurve, tol: f64) -> bool {
    a.len() == b.len()
        && a.points()
            .iter()
            .zip(b.points())
            .all(|(p, q)| (p.t - q.t).abs() <= tol && (p.x - q.x).abs() <= tol)
}

/// Forgets the parametrization: every curve is resampled at a uniform
/// canonical grid over its own canonical span (`samples` points), and curves
/// with coincident images (within 1e-9 per sample) merge.
pub fn deparametrize(
    model: &SpacetimeModel,
    sigma: &CurveMeasure,
    samples: usize,
) -> Result<WorldlineMeasure> {
    assert!(samples >= 2);
    let mut reps: Vec<(CausalCurve, Weight)> = Vec::new();
    for (curve, w) in sigma.atoms() {
        let (t0, t1) = (curve.start().t, curve.end().t);
        let grid = uniform_grid(t0, t1, samples - 1);
        let rep = curve.reparametrize(model, &TemporalFunction::Canonical, &grid)?;
        match reps.iter_mut().find(|(r, _)| curves_close(r, &rep, 1e-9)) {
            Some((_, acc)) => *acc += w.clone(),
            None => reps.push((rep, w.clone())),
        }
    }
    reps.sort_by(|(a, _), (b, _)| {
        a.points()
            .iter()
            .zip(b.points())
            .map(|(p, q)| EventKey::from(p).cmp(&EventKey::from(q)))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(WorldlineMeasure { atoms: reps })
}
