//! Reference instances and seeded random generators used by the demos and
//! the verification suites.
//!
//! The first demo is a single subluminal worldline on Minkowski space,
//! `γ(t) = (t, 0.3·sin t)` over one period: its Dirac evolution is causal,
//! the curve-space measure is the Dirac mass at the curve, and every field
//! residual is tiny.
//!
//! The second demo is the rotating-dust family on the cylinder: a uniform
//! angular lattice whose slices never change, carried by curve bundles that
//! rotate an integer number of lattice slots per grid step. Different drifts
//! give *different* curve measures with bit-identical evolutions — the
//! non-uniqueness of the curve-space description made concrete. Lattice
//! angles are generated by table lookup so that pushforward atoms match the
//! slice atoms exactly.

use crate::curve_measures::CurveMeasure;
use crate::curves::{uniform_grid, CausalCurve};
use crate::measures::{Evolution, SliceMeasure};
use crate::rational::{self, Weight};
use crate::rng::SplitMix64;
use crate::spacetime::{Event, SpacetimeModel, TAU};
use crate::test_functions::BumpFunction;
use crate::Result;

/// The demo worldline `γ(t) = (t, 0.3 sin t)` sampled over `[0, 2π]`.
pub fn sine_curve(steps: usize) -> CausalCurve {
    let grid = uniform_grid(0.0, TAU, steps);
    let points = grid.iter().map(|&t| Event::new(t, 0.3 * t.sin())).collect();
    CausalCurve::new(grid, points).expect("valid grid")
}

/// Dirac evolution along the demo worldline.
pub fn sine_dirac_evolution(steps: usize) -> Evolution {
    let curve = sine_curve(steps);
    let slices = curve
        .points()
        .iter()
        .map(|p| SliceMeasure::dirac(*p))
        .collect();
    Evolution::new(slices).expect("valid evolution")
}

/// Interior bumps riding the demo worldline: `count` bumps centered on the
/// curve, evenly spaced in time, well inside the slab.
pub fn sine_interior_bumps(count: usize) -> Vec<BumpFunction> {
    (0..count)
        .map(|i| {
            let t = 1.2 + (TAU - 2.4) * (i as f64 + 0.5) / count as f64;
            BumpFunction::new((t, 0.3 * t.sin()), (1.0, 0.8), false).expect("valid bump")
        })
        .collect()
}

/// The uniform angular lattice `θ_i = i·2π/n`, by table.
pub fn cylinder_lattice(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * (TAU / n as f64)).collect()
}

/// The constant cylinder evolution: every slice is the uniform measure on
/// the `n`-point lattice, over a grid of `steps` equal steps spanning
/// `[0, 2π]`.
pub fn cylinder_constant_evolution(n: usize, steps: usize) -> Evolution {
    let lattice = cylinder_lattice(n);
    let grid = uniform_grid(0.0, TAU, steps);
    let slices = grid
        .iter()
        .map(|&t| {
            let atoms = lattice
                .iter()
                .map(|&x| (Event::new(t, x), rational::ratio(1, n as i64)))
                .collect();
            SliceMeasure::new(t, atoms).expect("lattice slice")
        })
        .collect();
    Evolution::new(slices).expect("constant evolution")
}

/// Rotating curve bundle over the constant evolution: curve `i` moves by
/// `slots` lattice positions per grid step (drift `a = slots·steps/n` in
/// angle per unit time for the `[0, 2π]` window). Slot arithmetic plus
/// table lookup keeps pushforwards bit-identical to the lattice slices.
pub fn cylinder_rotating_sigma(n: usize, steps: usize, slots: usize) -> Result<CurveMeasure> {
    let model = SpacetimeModel::Cylinder;
    let lattice = cylinder_lattice(n);
    let grid = uniform_grid(0.0, TAU, steps);
    let atoms = (0..n)
        .map(|i| {
            let points = (0..=steps)
                .map(|k| Event::new(grid[k], lattice[(i + k * slots) % n]))
                .collect();
            Ok((
                CausalCurve::new(grid.clone(), points)?,
                rational::ratio(1, n as i64),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    CurveMeasure::new(&model, atoms, 1e-12)
}

/// Angular drift speed of a rotating bundle, in angle per unit time.
pub fn cylinder_drift(n: usize, steps: usize, slots: usize) -> f64 {
    let dt = TAU / steps as f64;
    slots as f64 * (TAU / n as f64) / dt
}

/// Interior bumps for the cylinder window, spatially periodic.
pub fn cylinder_interior_bumps(count: usize) -> Vec<BumpFunction> {
    (0..count)
        .map(|i| {
            let t = 1.2 + (TAU - 2.4) * (i as f64 + 0.5) / count as f64;
            let x = (i as f64 * TAU / count as f64) % TAU;
            BumpFunction::new((t, x), (1.0, 0.8), true).expect("valid bump")
        })
        .collect()
}

/// A random causal curve on the grid: a subluminal random walk (95% of the
/// local cone radius per step).
pub fn random_causal_curve(
    model: &SpacetimeModel,
    grid: &[f64],
    rng: &mut SplitMix64,
) -> CausalCurve {
    let mut x = model.wrap_x(rng.f64_in(-1.5, 1.5));
    let mut points = Vec::with_capacity(grid.len());
    points.push(Event::new(grid[0], x));
    for w in grid.windows(2) {
        let cone = match model {
            SpacetimeModel::Cylinder => (w[1] - w[0]).min(std::f64::consts::PI),
            _ => model.conformal_time(w[1]) - model.conformal_time(w[0]),
        };
        let dx = rng.f64_in(-0.95, 0.95) * cone;
        x = model.wrap_x(x + dx);
        points.push(Event::new(w[1], x));
    }
    CausalCurve::new(grid.to_vec(), points).expect("random walk stays causal")
}

/// A random curve measure: up to `max_curves` random causal curves with
/// random rational weights.
pub fn random_curve_measure(
    model: &SpacetimeModel,
    grid: &[f64],
    max_curves: usize,
    rng: &mut SplitMix64,
) -> CurveMeasure {
    let count = 1 + rng.usize_below(max_curves);
    let raw: Vec<(CausalCurve, Weight)> = (0..count)
        .map(|_| {
            (
                random_causal_curve(model, grid, rng),
                rational::ratio(rng.i64_in(1, 8), 1),
            )
        })
        .collect();
    let total: Weight = raw.iter().map(|(_, w)| w.clone()).sum();
    let atoms = raw
        .into_iter()
        .map(|(c, w)| (c, w / total.clone()))
        .collect();
    CurveMeasure::new(model, atoms, 1e-12).expect("random bundle is a curve measure")
}

/// A random causal evolution: the pushforward family of a random curve
/// bundle (causal by construction, up to `max_atoms` atoms per slice).
pub fn random_causal_evolution(
    model: &SpacetimeModel,
    grid: &[f64],
    max_atoms: usize,
    rng: &mut SplitMix64,
) -> Evolution {
    random_curve_measure(model, grid, max_atoms, rng)
        .induced_evolution()
        .expect("pushforward family")
}
