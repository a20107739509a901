//! Property tests for the structural invariants: order axioms of the causal
//! relation, marginal exactness of couplings, invariance under measure
//! rescaling, and reparametrization round trips.

use proptest::prelude::*;

use worldline::curves::{uniform_grid, CausalCurve};
use worldline::measures::{
    causal_coupling_feasible, compose_couplings, find_causal_coupling, ArithMode, SliceMeasure,
};
use worldline::rational::{self, ratio};
use worldline::spacetime::{Event, SpacetimeModel, TemporalFunction};

const MINK: SpacetimeModel = SpacetimeModel::Minkowski;

fn event_strategy() -> impl Strategy<Value = Event> {
    (-4.0..4.0f64, -4.0..4.0f64).prop_map(|(t, x)| Event::new(t, x))
}

fn model_strategy() -> impl Strategy<Value = SpacetimeModel> {
    prop_oneof![
        Just(SpacetimeModel::Minkowski),
        Just(SpacetimeModel::Cylinder),
        (0.0..1.0f64).prop_map(|eps| SpacetimeModel::Flrw { eps }),
    ]
}

fn wrap(model: &SpacetimeModel, p: Event) -> Event {
    Event::new(p.t, model.wrap_x(p.x))
}

proptest! {
    #[test]
    fn causal_precedence_is_a_partial_order(
        model in model_strategy(),
        p in event_strategy(),
        q in event_strategy(),
        r in event_strategy(),
    ) {
        let (p, q, r) = (wrap(&model, p), wrap(&model, q), wrap(&model, r));
        prop_assert!(model.causally_precedes(&p, &p));
        if model.causally_precedes(&p, &q) && model.causally_precedes(&q, &p) {
            prop_assert_eq!(p, q);
        }
        if model.causally_precedes(&p, &q) && model.causally_precedes(&q, &r) {
            prop_assert!(model.causally_precedes(&p, &r));
        }
        // Push-up: chronology absorbs causality on either side.
        if model.chronologically_precedes(&p, &q) && model.causally_precedes(&q, &r) {
            prop_assert!(model.chronologically_precedes(&p, &r));
        }
        if model.causally_precedes(&p, &q) && model.chronologically_precedes(&q, &r) {
            prop_assert!(model.chronologically_precedes(&p, &r));
        }
    }

    #[test]
    fn chronology_implies_causality(
        model in model_strategy(),
        p in event_strategy(),
        q in event_strategy(),
    ) {
        let (p, q) = (wrap(&model, p), wrap(&model, q));
        if model.chronologically_precedes(&p, &q) {
            prop_assert!(model.causally_precedes(&p, &q));
        }
    }

    #[test]
    fn couplings_reproduce_marginals_exactly(
        xs in prop::collection::vec((-2.0..2.0f64, 1..9i64), 1..5),
        ys in prop::collection::vec((-2.0..2.0f64, 1..9i64), 1..5),
        gap in 0.5..4.0f64,
    ) {
        let mu = SliceMeasure::normalized(
            0.0,
            xs.iter().map(|&(x, w)| (Event::new(0.0, x), ratio(w, 1))).collect(),
        ).unwrap();
        let nu = SliceMeasure::normalized(
            gap,
            ys.iter().map(|&(x, w)| (Event::new(gap, x), ratio(w, 1))).collect(),
        ).unwrap();
        match find_causal_coupling(&MINK, &mu, &nu) {
            // validate() checks row/column sums exactly and causal support.
            Ok(c) => prop_assert!(c.validate(&MINK).is_ok()),
            Err(_) => prop_assert!(
                !causal_coupling_feasible(&MINK, &mu, &nu, ArithMode::Rational).unwrap()
            ),
        }
    }

    #[test]
    fn feasibility_is_invariant_under_rescaling(
        xs in prop::collection::vec((-2.0..2.0f64, 1..9i64), 1..5),
        ys in prop::collection::vec((-2.0..2.0f64, 1..9i64), 1..5),
        scale in 1..100i64,
    ) {
        let build = |time: f64, data: &[(f64, i64)], c: i64| {
            SliceMeasure::normalized(
                time,
                data.iter().map(|&(x, w)| (Event::new(time, x), ratio(w * c, 1))).collect(),
            ).unwrap()
        };
        let plain = causal_coupling_feasible(
            &MINK, &build(0.0, &xs, 1), &build(1.0, &ys, 1), ArithMode::Rational).unwrap();
        let scaled = causal_coupling_feasible(
            &MINK, &build(0.0, &xs, scale), &build(1.0, &ys, scale), ArithMode::Rational).unwrap();
        prop_assert_eq!(plain, scaled);
    }

    #[test]
    fn coupling_composition_reaches_across_the_chain(
        xs in prop::collection::vec((-1.0..1.0f64, 1..5i64), 1..4),
        ys in prop::collection::vec((-1.0..1.0f64, 1..5i64), 1..4),
        zs in prop::collection::vec((-1.0..1.0f64, 1..5i64), 1..4),
    ) {
        // Slices far enough apart that both legs are feasible: gluing the
        // two couplings must give a valid causal coupling of the ends.
        let build = |time: f64, data: &[(f64, i64)]| {
            SliceMeasure::normalized(
                time,
                data.iter().map(|&(x, w)| (Event::new(time, x), ratio(w, 1))).collect(),
            ).unwrap()
        };
        let a = build(0.0, &xs);
        let b = build(3.0, &ys);
        let c = build(6.0, &zs);
        let ab = find_causal_coupling(&MINK, &a, &b).unwrap();
        let bc = find_causal_coupling(&MINK, &b, &c).unwrap();
        let ac = compose_couplings(&MINK, &ab, &bc).unwrap();
        prop_assert!(ac.validate(&MINK).is_ok());
        prop_assert_eq!(ac.source, a);
        prop_assert_eq!(ac.target, c);
    }

    #[test]
    fn weight_strings_round_trip(p in 1..2000i64, q in 1..2000i64) {
        let w = ratio(p, q);
        prop_assert_eq!(rational::parse(&rational::format(&w)).unwrap(), w);
    }

    #[test]
    fn reparametrization_round_trip_preserves_samples(
        v in -0.8..0.8f64,
        x0 in -1.0..1.0f64,
        amplitude in 0.0..0.25f64,
    ) {
        let grid = uniform_grid(0.0, 2.0, 128);
        let points = grid.iter().map(|&t| Event::new(t, x0 + amplitude * t.sin())).collect();
        let curve = CausalCurve::new(grid.clone(), points).unwrap();
        let frame = TemporalFunction::Boost { v };
        let lo = frame.eval(curve.start());
        let hi = frame.eval(curve.end());
        let tilde = curve.reparametrize(&MINK, &frame, &uniform_grid(lo, hi, 128)).unwrap();
        let back = tilde.reparametrize(&MINK, &TemporalFunction::Canonical, &grid).unwrap();
        // Interpolating through the intermediate grid cuts corners at
        // O(curvature · Δt²); the curvature here is the sine amplitude.
        let dt = grid[1] - grid[0];
        let tol = 1e-9 + 20.0 * amplitude * dt * dt;
        for (p, q) in back.points().iter().zip(curve.points()) {
            prop_assert!((p.x - q.x).abs() < tol && (p.t - q.t).abs() < 1e-9);
        }
    }

    #[test]
    fn connecting_curves_are_causal_and_pinned(
        model in model_strategy(),
        p in event_strategy(),
        dx in -3.0..3.0f64,
        span in 0.5..3.0f64,
    ) {
        let p = wrap(&model, p);
        let q = wrap(&model, Event::new(p.t + span, p.x + dx));
        prop_assume!(model.causally_precedes(&p, &q));
        let grid = uniform_grid(p.t, q.t, 16);
        let curve = model.connecting_causal_curve(&p, &q, &grid).unwrap();
        prop_assert_eq!(curve.points()[0], p);
        prop_assert_eq!(*curve.end(), q);
        prop_assert!(curve.validate(&model, 1e-12).is_valid());
    }
}
