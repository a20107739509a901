//! Finite measures on causal-curve space.
//!
//! A curve measure is a weighted family of causal curves sharing one time
//! grid. Evaluating all curves at a grid time pushes the measure down to a
//! slice measure; evaluating at two times yields a coupling, which is always
//! causal — that is the easy direction of the equivalence between the
//! curve-space and slice-measure descriptions.
//!
//! The constructive direction is [`dyadic_construct_sigma`]: given a causal
//! evolution, couple adjacent dyadic slices, lift every mass-carrying pair
//! through the deterministic connecting curve, and fold the pieces with
//! measure concatenation. Marginals at dyadic times are reproduced exactly
//! in rational arithmetic. The choice of coupling per step is the min-cost
//! one; any causal coupling would do, and distinct choices genuinely yield
//! distinct curve measures for one and the same evolution (non-uniqueness is
//! intrinsic, not an artifact).

use crate::curves::CausalCurve;
use crate::measures::{Coupling, Evolution, SliceMeasure};
use crate::rational::{self, Weight};
use crate::spacetime::{Event, EventKey, SpacetimeModel, TemporalFunction};
use crate::transport;
use crate::{Error, Result};

/// Atomic probability measure on the space of causal curves over a common
/// grid. The grid belongs to a clock (`frame`): curves are parametrized so
/// the frame's time of the `k`-th sample is the `k`-th grid time. The
/// canonical frame is the default; reparametrized measures keep track of
/// theirs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMeasure {
    times: Vec<f64>,
    atoms: Vec<(CausalCurve, Weight)>,
    frame: TemporalFunction,
    param_tol: f64,
}

impl CurveMeasure {
    /// Builds a canonical-frame curve measure: curves must share the grid
    /// bit-for-bit, be causal (up to `slack` on the cone test), carry
    /// positive weights summing to one exactly. Identical curves merge.
    pub fn new(
        model: &SpacetimeModel,
        atoms: Vec<(CausalCurve, Weight)>,
        slack: f64,
    ) -> Result<Self> {
        Self::new_in_frame(model, atoms, TemporalFunction::Canonical, slack, 1e-9)
    }

    /// Curve measure parametrized by an arbitrary clock; `param_tol` bounds
    /// `|T_B(γ_k) − times[k]|` (interpolation slack for nonlinear clocks).
    pub fn new_in_frame(
        model: &SpacetimeModel,
        atoms: Vec<(CausalCurve, Weight)>,
        frame: TemporalFunction,
        slack: f64,
        param_tol: f64,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySet("curve measure without atoms".into()));
        }
        let times = atoms[0].0.times().to_vec();
        for (curve, w) in &atoms {
            if curve.times() != times.as_slice() {
                return Err(Error::Grid("curve atoms on mismatched grids".into()));
            }
            if !rational::is_positive(w) {
                return Err(Error::Parse("nonpositive curve weight".into()));
            }
            if !curve
                .validate_in_frame(model, &frame, slack, param_tol)
                .is_valid()
            {
                return Err(Error::NotCausal {
                    from: *curve.start(),
                    to: *curve.end(),
                });
            }
        }
        let mut merged = merge_identical(atoms);
        let total: Weight = merged.iter().map(|(_, w)| w.clone()).sum();
        if total != rational::one() {
            return Err(Error::Parse(format!(
                "curve weights sum to {}, not 1",
                rational::format(&total)
            )));
        }
        sort_atoms(&mut merged);
        Ok(CurveMeasure {
            times,
            atoms: merged,
            frame,
            param_tol,
        })
    }

    pub fn dirac(model: &SpacetimeModel, curve: CausalCurve) -> Result<Self> {
        Self::new(model, vec![(curve, rational::one())], 0.0)
    }

    pub fn frame(&self) -> &TemporalFunction {
        &self.frame
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn atoms(&self) -> &[(CausalCurve, Weight)] {
        &self.atoms
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    fn index_of_time(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * (1.0 + t.abs());
        match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(k) => Ok(k),
            Err(k) => {
                if k > 0 && (self.times[k - 1] - t).abs() <= tol {
                    Ok(k - 1)
                } else if k < self.times.len() && (self.times[k] - t).abs() <= tol {
                    Ok(k)
                } else {
                    Err(Error::Grid(format!("time {t} not on the curve-measure grid")))
                }
            }
        }
    }

    /// Pushforward under evaluation at grid time `t`: curves landing on the
    /// same event (exact coordinate equality) merge into one atom.
    pub fn pushforward_eval(&self, t: f64) -> Result<SliceMeasure> {
        let k = self.index_of_time(t)?;
        self.pushforward_at_index(k)
    }

    pub fn pushforward_at_index(&self, k: usize) -> Result<SliceMeasure> {
        let mut merged: std::collections::BTreeMap<EventKey, Weight> = Default::default();
        for (curve, w) in &self.atoms {
            let key = EventKey::from(&curve.points()[k]);
            merged
                .entry(key)
                .and_modify(|acc| *acc += w.clone())
                .or_insert_with(|| w.clone());
        }
        let atoms: Vec<(Event, Weight)> = merged.into_iter().map(|(key, w)| (key.event(), w)).collect();
        match self.frame {
            TemporalFunction::Canonical => SliceMeasure::new(self.times[k], atoms),
            frame => SliceMeasure::new_in_frame(self.times[k], atoms, &frame, self.param_tol, 0.0),
        }
    }

    /// The family of pushforwards at every grid time, as an evolution.
    pub fn induced_evolution(&self) -> Result<Evolution> {
        let slices: Result<Vec<SliceMeasure>> =
            (0..self.times.len()).map(|k| self.pushforward_at_index(k)).collect();
        Evolution::new(slices?)
    }

    /// Pushforward under joint evaluation at `s ≤ t`. The result is checked
    /// to be a valid causal coupling — evaluation pairs of causal curves are
    /// causally related by construction, and the marginals are the two
    /// single-time pushforwards.
    pub fn joint_pushforward(&self, model: &SpacetimeModel, s: f64, t: f64) -> Result<Coupling> {
        let ks = self.index_of_time(s)?;
        let kt = self.index_of_time(t)?;
        if ks > kt {
            return Err(Error::TimeOrder(format!("joint pushforward needs {s} ≤ {t}")));
        }
        let source = self.pushforward_at_index(ks)?;
        let target = self.pushforward_at_index(kt)?;
        let find = |slice: &SliceMeasure, p: &Event| -> usize {
            let key = EventKey::from(p);
            slice
                .atoms()
                .binary_search_by(|(q, _)| EventKey::from(q).cmp(&key))
                .expect("pushforward atom must exist")
        };
        let mut mass: std::collections::BTreeMap<(usize, usize), Weight> = Default::default();
        for (curve, w) in &self.atoms {
            let i = find(&source, &curve.points()[ks]);
            let j = find(&target, &curve.points()[kt]);
            mass.entry((i, j))
                .and_modify(|acc| *acc += w.clone())
                .or_insert_with(|| w.clone());
        }
        let coupling = Coupling {
            source,
            target,
            mass: mass.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
        };
        coupling.validate(model)?;
        Ok(coupling)
    }

    /// Restriction to every `stride`-th grid time (frame preserved).
    pub fn subsample(&self, model: &SpacetimeModel, stride: usize) -> Result<CurveMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|(c, w)| Ok((c.subsample(stride)?, w.clone())))
            .collect::<Result<Vec<_>>>()?;
        CurveMeasure::new_in_frame(model, atoms, self.frame, 1e-12, self.param_tol)
    }
}

fn sort_atoms(atoms: &mut [(CausalCurve, Weight)]) {
    atoms.sort_by(|(a, _), (b, _)| curve_order(a, b));
}

fn curve_order(a: &CausalCurve, b: &CausalCurve) -> std::cmp::Ordering {
    for (p, q) in a.points().iter().zip(b.points()) {
        let o = EventKey::from(p).cmp(&EventKey::from(q));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    a.points().len().cmp(&b.points().len())
}

fn merge_identical(atoms: Vec<(CausalCurve, Weight)>) -> Vec<(CausalCurve, Weight)> {
    let mut sorted = atoms;
    sort_atoms(&mut sorted);
    let mut merged: Vec<(CausalCurve, Weight)> = Vec::with_capacity(sorted.len());
    for (curve, w) in sorted {
        match merged.last_mut() {
            Some((prev, acc)) if prev.points() == curve.points() => *acc += w,
            _ => merged.push((curve, w)),
        }
    }
    merged
}

/// Concatenation of curve measures meeting at `b`: the junction marginals
/// must agree exactly, and at each junction atom the incoming and outgoing
/// curves pair up with product weights `u·v/m(q)` (the atomic disintegration
/// product rule). Pushforwards before the junction come from the first
/// factor, after it from the second.
pub fn concatenate_curve_measures(
    model: &SpacetimeModel,
    first: &CurveMeasure,
    second: &CurveMeasure,
) -> Result<CurveMeasure> {
    let b = first.interval().1;
    if (second.interval().0 - b).abs() > 1e-12 * (1.0 + b.abs()) {
        return Err(Error::Grid(format!(
            "concatenation intervals do not abut: {} vs {}",
            b,
            second.interval().0
        )));
    }
    let left = first.pushforward_eval(b)?;
    let right = second.pushforward_eval(second.interval().0)?;
    if left.atoms() != right.atoms() {
        return Err(Error::MarginalMismatch(
            "junction pushforwards differ between the factors".into(),
        ));
    }
    let mut joined: Vec<(CausalCurve, Weight)> = Vec::new();
    for (q, mass) in left.atoms() {
        let key = EventKey::from(q);
        let incoming: Vec<&(CausalCurve, Weight)> = first
            .atoms()
            .iter()
            .filter(|(c, _)| EventKey::from(c.end()) == key)
            .collect();
        let outgoing: Vec<&(CausalCurve, Weight)> = second
            .atoms()
            .iter()
            .filter(|(c, _)| EventKey::from(c.start()) == key)
            .collect();
        for (cin, u) in &incoming {
            for (cout, v) in &outgoing {
                let w = u.clone() * v.clone() / mass.clone();
                joined.push((CausalCurve::concatenate(cin, cout)?, w));
            }
        }
    }
    CurveMeasure::new(model, joined, 1e-12)
}

/// Builds a curve measure reproducing a causal evolution at all dyadic times
/// of the given level: per dyadic step, take the deterministic min-cost
/// causal coupling, lift every mass-carrying pair through the connecting
/// causal curve sampled on the evolution's own grid, and fold the step
/// measures by concatenation.
///
/// The evolution grid must contain every dyadic time. Marginal exactness at
/// dyadic times is verified before returning.
pub fn dyadic_construct_sigma(
    model: &SpacetimeModel,
    ev: &Evolution,
    level: u32,
) -> Result<CurveMeasure> {
    let (a, b) = ev.interval();
    let pieces = 1usize << level;
    let mut indices = Vec::with_capacity(pieces + 1);
    for i in 0..=pieces {
        let t = a + (b - a) * i as f64 / pieces as f64;
        indices.push(ev.grid_index(t).map_err(|_| {
            Error::Grid(format!(
                "evolution grid misses dyadic time {t} (level {level})"
            ))
        })?);
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Grid("dyadic times collapse on the grid".into()));
    }

    let mut sigma: Option<CurveMeasure> = None;
    for w in indices.windows(2) {
        let (i0, i1) = (w[0], w[1]);
        let mu = &ev.slices()[i0];
        let nu = &ev.slices()[i1];
        let coupling = crate::measures::find_causal_coupling(model, mu, nu).map_err(|e| match e {
            Error::Infeasible { certificate, deficit, .. } => Error::Infeasible {
                step: Some((ev.times()[i0], ev.times()[i1])),
                certificate,
                deficit,
            },
            other => other,
        })?;
        let grid = &ev.times()[i0..=i1];
        let mut atoms = Vec::with_capacity(coupling.mass.len());
        for (ai, bj, wt) in &coupling.mass {
            let p = &mu.atoms()[*ai].0;
            let q = &nu.atoms()[*bj].0;
            atoms.push((model.connecting_causal_curve(p, q, grid)?, wt.clone()));
        }
        let piece = CurveMeasure::new(model, atoms, 1e-12)?;
        sigma = Some(match sigma {
            None => piece,
            Some(acc) => concatenate_curve_measures(model, &acc, &piece)?,
        });
    }
    let sigma = sigma.expect("at least one dyadic step");

    // Checked postcondition: dyadic marginals reproduce the input exactly.
    for (i, &k) in indices.iter().enumerate() {
        let push = sigma.pushforward_at_index(k)?;
        if push.atoms() != ev.slices()[k].atoms() {
            return Err(Error::MarginalMismatch(format!(
                "dyadic marginal at index {i} differs from the input slice"
            )));
        }
    }
    Ok(sigma)
}

/// Extends every curve by rest segments so the measure lives on `full_grid`,
/// of which the current grid must be a contiguous sub-block. Pushforwards
/// outside the original window equal the original endpoint measures
/// transported at rest.
pub fn pad_with_rest_curves(
    model: &SpacetimeModel,
    sigma: &CurveMeasure,
    full_grid: &[f64],
) -> Result<CurveMeasure> {
    let inner = sigma.times();
    let start = full_grid
        .windows(inner.len().min(full_grid.len()))
        .position(|w| w == inner)
        .ok_or_else(|| Error::Grid("inner grid is not a contiguous block of the full grid".into()))?;
    let atoms = sigma
        .atoms()
        .iter()
        .map(|(curve, w)| {
            let mut times = Vec::with_capacity(full_grid.len());
            let mut points = Vec::with_capacity(full_grid.len());
            for &t in &full_grid[..start] {
                times.push(t);
                points.push(Event::new(t, curve.start().x));
            }
            times.extend_from_slice(curve.times());
            points.extend_from_slice(curve.points());
            for &t in &full_grid[start + inner.len()..] {
                times.push(t);
                points.push(Event::new(t, curve.end().x));
            }
            Ok((CausalCurve::new(times, points)?, w.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    CurveMeasure::new(model, atoms, 1e-12)
}

/// Exact 1-Wasserstein distance between two atomic curve measures under the
/// uniform embedding distance on `window` as ground cost (transportation LP
/// at desk scale, solved by min-cost flow).
pub fn wasserstein_curve_distance(
    model: &SpacetimeModel,
    a: &CurveMeasure,
    b: &CurveMeasure,
    window: (f64, f64),
) -> Result<f64> {
    let mut costs = vec![0.0; a.atoms().len() * b.atoms().len()];
    let n = b.atoms().len();
    for (i, (ca, _)) in a.atoms().iter().enumerate() {
        for (j, (cb, _)) in b.atoms().iter().enumerate() {
            costs[i * n + j] = crate::curves::uniform_distance(model, ca, cb, window)?;
        }
    }
    let mu: Vec<Weight> = a.atoms().iter().map(|(_, w)| w.clone()).collect();
    let nu: Vec<Weight> = b.atoms().iter().map(|(_, w)| w.clone()).collect();
    let plan = transport::min_cost_transport(&mu, &nu, |_, _| true, |i, j| costs[i * n + j])
        .map_err(|_| Error::MarginalMismatch("wasserstein marginals off".into()))?;
    Ok(transport::plan_cost(&plan, |i, j| costs[i * n + j]))
}
