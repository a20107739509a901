//! Batteries of test objects the verification suites quantify over:
//! compactly supported bumps, smooth bounded causal functions, and the
//! exhaustion family `φ_n ∘ f`.
//!
//! The causal functions are nondecreasing along every future-directed causal
//! curve. On Minkowski the null-coordinate arctans do the job in closed
//! form. On the other models the battery pairs `arctan(t)` with compositions
//! `φ_n ∘ f_K`, where `f_K` measures signed (conformal) time since the
//! earliest causal arrival from a finite event set `K` — a Lipschitz causal
//! function vanishing on the future cone boundary of `K`. It is not smooth
//! on the cone itself, so causality checks involving it run at first-order
//! tolerances.

use serde::{Deserialize, Serialize};

use crate::curves::{bump_profile, bump_profile_deriv, CausalCurve};
use crate::spacetime::{arc_distance, signed_arc, Event, SpacetimeModel};
use crate::{Error, Result};

/// Product bump `Φ(t,x) = β((t−t₀)/r_t)·β((x−x₀)/r_x)` with
/// `β(u) = exp(−1/(1−u²))` inside the unit interval and zero outside.
/// On the cylinder the spatial factor wraps periodically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub center_t: f64,
    pub center_x: f64,
    pub radius_t: f64,
    pub radius_x: f64,
    pub periodic: bool,
}

impl BumpFunction {
    pub fn new(center: (f64, f64), radii: (f64, f64), periodic: bool) -> Result<Self> {
        if radii.0 <= 0.0 || radii.1 <= 0.0 {
            return Err(Error::TestFunction("bump radii must be positive".into()));
        }
        if periodic && radii.1 >= std::f64::consts::PI {
            return Err(Error::TestFunction(
                "periodic bump support diameter must stay below 2π".into(),
            ));
        }
        Ok(BumpFunction {
            center_t: center.0,
            center_x: center.1,
            radius_t: radii.0,
            radius_x: radii.1,
            periodic,
        })
    }

    fn dx(&self, x: f64) -> f64 {
        if self.periodic {
            signed_arc(self.center_x, x)
        } else {
            x - self.center_x
        }
    }

    pub fn eval(&self, p: &Event) -> f64 {
        let ut = (p.t - self.center_t) / self.radius_t;
        let ux = self.dx(p.x) / self.radius_x;
        bump_profile(ut) * bump_profile(ux)
    }

    /// Analytic gradient `(∂_t Φ, ∂_x Φ)`.
    pub fn gradient(&self, p: &Event) -> (f64, f64) {
        let ut = (p.t - self.center_t) / self.radius_t;
        let ux = self.dx(p.x) / self.radius_x;
        (
            bump_profile_deriv(ut) / self.radius_t * bump_profile(ux),
            bump_profile(ut) * bump_profile_deriv(ux) / self.radius_x,
        )
    }

    /// Supremum of the bump, attained at the center: `e⁻¹·e⁻¹`.
    pub fn sup_norm(&self) -> f64 {
        (-2.0f64).exp()
    }

    /// Open temporal support `(t₀ − r_t, t₀ + r_t)`.
    pub fn support_t(&self) -> (f64, f64) {
        (self.center_t - self.radius_t, self.center_t + self.radius_t)
    }

    /// Whether the support sits strictly inside the open slab with the given
    /// margin from both ends.
    pub fn fits_inside(&self, window: (f64, f64), margin: f64) -> bool {
        let (lo, hi) = self.support_t();
        lo >= window.0 + margin && hi <= window.1 - margin
    }
}

/// Signed time since the earliest causal arrival from a finite source set:
/// `f_K(p) = τ(t_p) − min_k (τ(t_k) + dist(x_p, x_k))`, in the conformal
/// chart of the model. Positive strictly inside the causal future of `K`,
/// zero on the cone boundary, negative outside; nondecreasing along every
/// causal curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSurrogate {
    pub sources: Vec<Event>,
}

impl ConeSurrogate {
    fn spatial_dist(&self, model: &SpacetimeModel, a: f64, b: f64) -> f64 {
        match model {
            SpacetimeModel::Cylinder => arc_distance(a, b),
            _ => (a - b).abs(),
        }
    }

    pub fn eval(&self, model: &SpacetimeModel, p: &Event) -> f64 {
        let tau = model.conformal_time(p.t);
        let arrival = self
            .sources
            .iter()
            .map(|k| model.conformal_time(k.t) + self.spatial_dist(model, p.x, k.x))
            .fold(f64::INFINITY, f64::min);
        tau - arrival
    }

    /// Gradient away from the kink set (cone boundaries and argmin ties).
    pub fn gradient(&self, model: &SpacetimeModel, p: &Event) -> (f64, f64) {
        let dt = 1.0 / model.scale_factor(p.t);
        let k = self
            .sources
            .iter()
            .min_by(|a, b| {
                let da = model.conformal_time(a.t) + self.spatial_dist(model, p.x, a.x);
                let db = model.conformal_time(b.t) + self.spatial_dist(model, p.x, b.x);
                da.total_cmp(&db)
            })
            .expect("cone surrogate needs sources");
        let dx = match model {
            SpacetimeModel::Cylinder => {
                let s = signed_arc(k.x, p.x);
                if s == 0.0 {
                    0.0
                } else {
                    -s.signum()
                }
            }
            _ => -(p.x - k.x).signum(),
        };
        (dt, dx)
    }
}

/// Smooth (or Lipschitz, for the cone surrogate) bounded causal functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CausalTestFunction {
    /// `arctan(t − x)` on Minkowski.
    NullMinus,
    /// `arctan(t + x)` on Minkowski.
    NullPlus,
    /// `arctan(t)` on any model.
    TimeOnly,
    /// `φ_n ∘ f_K`, with `φ_n(y) = exp(−1/(n·y))` for positive `y`.
    PhiN { n: u32, cone: ConeSurrogate },
}

fn phi_n(n: u32, y: f64) -> f64 {
    if y > 0.0 {
        (-1.0 / (n as f64 * y)).exp()
    } else {
        0.0
    }
}

fn phi_n_deriv(n: u32, y: f64) -> f64 {
    if y > 0.0 {
        phi_n(n, y) / (n as f64 * y * y)
    } else {
        0.0
    }
}

impl CausalTestFunction {
    pub fn eval(&self, model: &SpacetimeModel, p: &Event) -> f64 {
        match self {
            CausalTestFunction::NullMinus => (p.t - p.x).atan(),
            CausalTestFunction::NullPlus => (p.t + p.x).atan(),
            CausalTestFunction::TimeOnly => p.t.atan(),
            CausalTestFunction::PhiN { n, cone } => phi_n(*n, cone.eval(model, p)),
        }
    }

    pub fn gradient(&self, model: &SpacetimeModel, p: &Event) -> (f64, f64) {
        match self {
            CausalTestFunction::NullMinus => {
                let d = 1.0 / (1.0 + (p.t - p.x) * (p.t - p.x));
                (d, -d)
            }
            CausalTestFunction::NullPlus => {
                let d = 1.0 / (1.0 + (p.t + p.x) * (p.t + p.x));
                (d, d)
            }
            CausalTestFunction::TimeOnly => (1.0 / (1.0 + p.t * p.t), 0.0),
            CausalTestFunction::PhiN { n, cone } => {
                let y = cone.eval(model, p);
                let (gt, gx) = cone.gradient(model, p);
                let d = phi_n_deriv(*n, y);
                (d * gt, d * gx)
            }
        }
    }

    /// Stable identifier for reports.
    pub fn id(&self) -> String {
        match self {
            CausalTestFunction::NullMinus => "null_minus".into(),
            CausalTestFunction::NullPlus => "null_plus".into(),
            CausalTestFunction::TimeOnly => "time_only".into(),
            CausalTestFunction::PhiN { n, .. } => format!("phi{n}_of_cone"),
        }
    }

    /// Per-model battery: the three arctans on Minkowski; `arctan(t)` plus
    /// the exhaustion family on the other models. `window` places the cone
    /// sources at the window start.
    pub fn battery(model: &SpacetimeModel, window: (f64, f64)) -> Vec<CausalTestFunction> {
        match model {
            SpacetimeModel::Minkowski => vec![
                CausalTestFunction::NullMinus,
                CausalTestFunction::NullPlus,
                CausalTestFunction::TimeOnly,
            ],
            _ => {
                let cone = ConeSurrogate {
                    sources: vec![Event::new(window.0, model.wrap_x(0.0))],
                };
                vec![
                    CausalTestFunction::TimeOnly,
                    CausalTestFunction::PhiN { n: 2, cone: cone.clone() },
                    CausalTestFunction::PhiN { n: 8, cone },
                ]
            }
        }
    }
}

/// True iff `f ∘ γ` is nondecreasing on the sample grid (tolerance −1e-12).
pub fn is_causal_along(
    model: &SpacetimeModel,
    f: &CausalTestFunction,
    curve: &CausalCurve,
) -> bool {
    let values: Vec<f64> = curve.points().iter().map(|p| f.eval(model, p)).collect();
    values.windows(2).all(|w| w[1] - w[0] >= -1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::uniform_grid;
    use crate::rng::SplitMix64;

    const MINK: SpacetimeModel = SpacetimeModel::Minkowski;
    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn bump_center_value_and_support() {
        let bump = BumpFunction::new((1.0, 0.5), (0.5, 0.5), false).unwrap();
        let center = bump.eval(&Event::new(1.0, 0.5));
        assert!((center - (-2.0f64).exp()).abs() < 1e-15);
        assert!((center - 0.1353).abs() < 1e-3);
        // Outside the support: identically zero, with zero gradient.
        let outside = Event::new(2.0, 0.5);
        assert_eq!(bump.eval(&outside), 0.0);
        assert_eq!(bump.gradient(&outside), (0.0, 0.0));
    }

    #[test]
    fn periodic_bump_wraps() {
        let bump = BumpFunction::new((0.0, 0.1), (1.0, 0.5), true).unwrap();
        // Just across the branch cut from the center.
        let p = Event::new(0.0, crate::spacetime::TAU - 0.1);
        assert!(bump.eval(&p) > 0.0);
        assert!(BumpFunction::new((0.0, 0.0), (1.0, 4.0), true).is_err());
    }

    #[test]
    fn arctan_null_coordinate_values() {
        let f = CausalTestFunction::NullMinus;
        assert!((f.eval(&MINK, &Event::new(1.0, 0.0)) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = SplitMix64::new(13);
        let h = 1e-5;
        let bump = BumpFunction::new((0.0, 0.0), (1.3, 0.9), false).unwrap();
        for _ in 0..200 {
            let p = Event::new(rng.f64_in(-1.2, 1.2), rng.f64_in(-0.8, 0.8));
            let (gt, gx) = bump.gradient(&p);
            let nt = (bump.eval(&Event::new(p.t + h, p.x)) - bump.eval(&Event::new(p.t - h, p.x)))
                / (2.0 * h);
            let nx = (bump.eval(&Event::new(p.t, p.x + h)) - bump.eval(&Event::new(p.t, p.x - h)))
                / (2.0 * h);
            assert!((gt - nt).abs() < 1e-6, "at {p:?}: {gt} vs {nt}");
            assert!((gx - nx).abs() < 1e-6, "at {p:?}: {gx} vs {nx}");
        }
        for f in CausalTestFunction::battery(&MINK, (0.0, 1.0)) {
            for _ in 0..100 {
                let p = Event::new(rng.f64_in(-2.0, 2.0), rng.f64_in(-2.0, 2.0));
                let (gt, gx) = f.gradient(&MINK, &p);
                let nt = (f.eval(&MINK, &Event::new(p.t + h, p.x))
                    - f.eval(&MINK, &Event::new(p.t - h, p.x)))
                    / (2.0 * h);
                let nx = (f.eval(&MINK, &Event::new(p.t, p.x + h))
                    - f.eval(&MINK, &Event::new(p.t, p.x - h)))
                    / (2.0 * h);
                assert!((gt - nt).abs() < 1e-6 && (gx - nx).abs() < 1e-6, "{}", f.id());
            }
        }
    }

    #[test]
    fn cone_surrogate_gradient_away_from_kinks() {
        let mut rng = SplitMix64::new(17);
        let cone = ConeSurrogate {
            sources: vec![Event::new(0.0, 0.0)],
        };
        let f = CausalTestFunction::PhiN { n: 3, cone };
        let h = 1e-6;
        let mut checked = 0;
        for _ in 0..400 {
            let p = Event::new(rng.f64_in(0.2, 2.0), rng.f64_in(-2.0, 2.0));
            // Stay away from the cone boundary and the spatial kink at x=0.
            if (p.t - p.x.abs()).abs() < 0.1 || p.x.abs() < 0.1 {
                continue;
            }
            checked += 1;
            let (gt, gx) = f.gradient(&MINK, &p);
            let nt = (f.eval(&MINK, &Event::new(p.t + h, p.x))
                - f.eval(&MINK, &Event::new(p.t - h, p.x)))
                / (2.0 * h);
            let nx = (f.eval(&MINK, &Event::new(p.t, p.x + h))
                - f.eval(&MINK, &Event::new(p.t, p.x - h)))
                / (2.0 * h);
            assert!((gt - nt).abs() < 1e-5 && (gx - nx).abs() < 1e-5);
        }
        assert!(checked > 100);
    }

    #[test]
    fn causal_functions_are_monotone_along_valid_curves() {
        let models = [
            MINK,
            SpacetimeModel::Cylinder,
            SpacetimeModel::Flrw { eps: 0.2 },
        ];
        let mut rng = SplitMix64::new(19);
        for model in models {
            let battery = CausalTestFunction::battery(&model, (0.0, 2.0));
            for _ in 0..1000 {
                let curve =
                    crate::fixtures::random_causal_curve(&model, &uniform_grid(0.0, 2.0, 40), &mut rng);
                for f in &battery {
                    assert!(is_causal_along(&model, f, &curve), "{model:?} {}", f.id());
                }
            }
        }
    }

    #[test]
    fn causal_function_flags_spacelike_zigzag() {
        // A zig-zag exiting the cone: arctan(t−x) decreases on the zag.
        let times = uniform_grid(0.0, 1.0, 4);
        let points = vec![
            Event::new(times[0], 0.0),
            Event::new(times[1], 0.8),
            Event::new(times[2], -0.8),
            Event::new(times[3], 0.8),
            Event::new(times[4], 0.0),
        ];
        let zigzag = CausalCurve::new(times, points).unwrap();
        assert!(!is_causal_along(&MINK, &CausalTestFunction::NullMinus, &zigzag));
        // Constant functions are trivially causal along anything.
        let cone = ConeSurrogate { sources: vec![Event::new(5.0, 0.0)] };
        let vanishing = CausalTestFunction::PhiN { n: 1, cone };
        assert!(is_causal_along(&MINK, &vanishing, &zigzag));
    }

    #[test]
    fn phi_n_family_increases_toward_the_indicator() {
        let cone = ConeSurrogate {
            sources: vec![Event::new(0.0, 0.0)],
        };
        // Strictly inside the future cone: φ_n(f) must increase with n
        // toward 1; outside it is exactly 0 for every n.
        let inside = Event::new(2.0, 0.3);
        let outside = Event::new(0.5, 2.0);
        let mut last = 0.0;
        for n in [1u32, 2, 4, 8, 16, 64] {
            let f = CausalTestFunction::PhiN { n, cone: cone.clone() };
            let v = f.eval(&MINK, &inside);
            assert!(v > last);
            last = v;
            assert_eq!(f.eval(&MINK, &outside), 0.0);
        }
        assert!(last > 0.9);
    }
}
