//! Atomic probability measures on time slices and causal precedence between
//! them.
//!
//! A measure on the slice `T⁻¹(t)` is a finite list of weighted atoms. One
//! slice causally precedes another when a *causal coupling* exists: a joint
//! measure with the two as marginals giving full mass to causally related
//! pairs. At atomic scale that is exactly a transport feasibility problem on
//! the bipartite graph of causally related atom pairs, decided here by exact
//! max-flow.
//!
//! The dual description — `μ(J⁺(K)) ≤ ν(J⁺(K))` for every compact `K` — is
//! implemented as [`upset_characterization_check`] over finite families of
//! event sets; at desk scale, subsets of the earlier support suffice for
//! counterexample certificates, and infeasibility always surfaces one.

use num_traits::Zero;

use crate::rational::{self, Weight};
use crate::spacetime::{Event, EventKey, SpacetimeModel, TemporalFunction};
use crate::transport::{self, Feasibility};
use crate::{Error, Result};

/// Arithmetic mode for feasibility decisions: exact rational flow (default)
/// or float flow with slack `1e-9` for large instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArithMode {
    #[default]
    Rational,
    Float,
}

pub const FLOAT_SLACK: f64 = 1e-9;

/// Atomic probability measure supported on one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMeasure {
    time: f64,
    atoms: Vec<(Event, Weight)>,
}

impl SliceMeasure {
    /// Canonical-frame slice: every atom sits at `t = time` exactly, weights
    /// are positive and sum to one exactly. Duplicate events merge.
    pub fn new(time: f64, atoms: Vec<(Event, Weight)>) -> Result<Self> {
        Self::build(time, atoms, |p| p.t == time, 0.0)
    }

    /// Slice of an arbitrary clock: atoms satisfy `|T_B(p) − time| ≤ tol`,
    /// and the weight sum may deviate by `sum_tol` (float mode inputs).
    pub fn new_in_frame(
        time: f64,
        atoms: Vec<(Event, Weight)>,
        frame: &TemporalFunction,
        tol: f64,
        sum_tol: f64,
    ) -> Result<Self> {
        Self::build(time, atoms, |p| (frame.eval(p) - time).abs() <= tol, sum_tol)
    }

    /// Normalizes raw positive masses to total one (exactly, in rationals).
    pub fn normalized(time: f64, atoms: Vec<(Event, Weight)>) -> Result<Self> {
        let total: Weight = atoms.iter().map(|(_, w)| w.clone()).sum();
        if !rational::is_positive(&total) {
            return Err(Error::Parse("measure with nonpositive total mass".into()));
        }
        let scaled = atoms
            .into_iter()
            .map(|(p, w)| (p, w / total.clone()))
            .collect();
        Self::new(time, scaled)
    }

    fn build(
        time: f64,
        atoms: Vec<(Event, Weight)>,
        on_slice: impl Fn(&Event) -> bool,
        sum_tol: f64,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptySet("slice measure without atoms".into()));
        }
        let mut merged: std::collections::BTreeMap<EventKey, Weight> = Default::default();
        for (p, w) in atoms {
            if !on_slice(&p) {
                return Err(Error::InvalidEvent(format!(
                    "atom at t={} off the slice time {time}",
                    p.t
                )));
            }
            if !rational::is_positive(&w) {
                return Err(Error::Parse("nonpositive atom weight".into()));
            }
            let key = EventKey::from(&p);
            merged
                .entry(key)
                .and_modify(|acc| *acc += w.clone())
                .or_insert(w);
        }
        let atoms: Vec<(Event, Weight)> = merged
            .into_iter()
            .map(|(k, w)| (k.event(), w))
            .collect();
        let total: Weight = atoms.iter().map(|(_, w)| w.clone()).sum();
        let deviation = (rational::to_f64(&total) - 1.0).abs();
        if sum_tol == 0.0 {
            if total != rational::one() {
                return Err(Error::Parse(format!(
                    "slice weights sum to {}, not 1",
                    rational::format(&total)
                )));
            }
        } else if deviation > sum_tol {
            return Err(Error::Parse(format!(
                "slice weights sum off by {deviation} (tolerance {sum_tol})"
            )));
        }
        Ok(SliceMeasure { time, atoms })
    }

    pub fn dirac(p: Event) -> Self {
        SliceMeasure {
            time: p.t,
            atoms: vec![(p, rational::one())],
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Atoms in deterministic (event-key) order.
    pub fn atoms(&self) -> &[(Event, Weight)] {
        &self.atoms
    }

    pub fn events(&self) -> Vec<Event> {
        self.atoms.iter().map(|(p, _)| *p).collect()
    }

    /// Mass of the causal future `J⁺(set)` under this measure.
    pub fn mass_in_future_of(&self, model: &SpacetimeModel, set: &[Event]) -> Result<Weight> {
        let mut mass = Weight::zero();
        for (p, w) in &self.atoms {
            if model.in_causal_future_of_set(set, p)? {
                mass += w.clone();
            }
        }
        Ok(mass)
    }

    /// Integral of a scalar function against this measure (in floats).
    pub fn integrate(&self, f: impl Fn(&Event) -> f64) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (p, w) in &self.atoms {
            let term = rational::to_f64(w) * f(p);
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        sum
    }
}

/// A time-indexed family of slice measures on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    times: Vec<f64>,
    slices: Vec<SliceMeasure>,
}

impl Evolution {
    pub fn new(slices: Vec<SliceMeasure>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::EmptySet("evolution without slices".into()));
        }
        let times: Vec<f64> = slices.iter().map(|s| s.time()).collect();
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::TimeOrder("slice times not strictly increasing".into()));
        }
        Ok(Evolution { times, slices })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[SliceMeasure] {
        &self.slices
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of grid time `t` (within a tight absolute tolerance).
    pub fn grid_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * (1.0 + t.abs());
        match self
            .times
            .binary_search_by(|v| v.total_cmp(&t))
        {
            Ok(k) => Ok(k),
            Err(k) => {
                if k > 0 && (self.times[k - 1] - t).abs() <= tol {
                    Ok(k - 1)
                } else if k < self.times.len() && (self.times[k] - t).abs() <= tol {
                    Ok(k)
                } else {
                    Err(Error::Grid(format!("time {t} not on the evolution grid")))
                }
            }
        }
    }

    /// Every `stride`-th slice (stride must divide the step count).
    pub fn subsample(&self, stride: usize) -> Result<Evolution> {
        if stride == 0 || !(self.len() - 1).is_multiple_of(stride) {
            return Err(Error::Grid(format!(
                "stride {stride} does not divide {} steps",
                self.len() - 1
            )));
        }
        Evolution::new(self.slices.iter().step_by(stride).cloned().collect())
    }
}

/// A causal coupling between two slice measures: sparse nonnegative mass on
/// causally related atom pairs with the two slices as marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub source: SliceMeasure,
    pub target: SliceMeasure,
    /// `(source atom index, target atom index, mass)`, lexicographic.
    pub mass: Vec<(usize, usize, Weight)>,
}

impl Coupling {
    /// Checks both marginal conditions exactly and causality of every
    /// mass-carrying pair.
    pub fn validate(&self, model: &SpacetimeModel) -> Result<()> {
        let m = self.source.atoms().len();
        let n = self.target.atoms().len();
        let mut row = vec![Weight::zero(); m];
        let mut col = vec![Weight::zero(); n];
        for (i, j, w) in &self.mass {
            if *i >= m || *j >= n {
                return Err(Error::MarginalMismatch("coupling index out of range".into()));
            }
            if !rational::is_positive(w) {
                return Err(Error::MarginalMismatch("nonpositive coupling mass".into()));
            }
            let p = &self.source.atoms()[*i].0;
            let q = &self.target.atoms()[*j].0;
            if !model.causally_precedes(p, q) {
                return Err(Error::NotCausal { from: *p, to: *q });
            }
            row[*i] += w.clone();
            col[*j] += w.clone();
        }
        for (i, (_, w)) in self.source.atoms().iter().enumerate() {
            if row[i] != *w {
                return Err(Error::MarginalMismatch(format!(
                    "row {i} sums to {}, expected {}",
                    rational::format(&row[i]),
                    rational::format(w)
                )));
            }
        }
        for (j, (_, w)) in self.target.atoms().iter().enumerate() {
            if col[j] != *w {
                return Err(Error::MarginalMismatch(format!(
                    "column {j} sums to {}, expected {}",
                    rational::format(&col[j]),
                    rational::format(w)
                )));
            }
        }
        Ok(())
    }
}

fn check_orientation(mu: &SliceMeasure, nu: &SliceMeasure) -> Result<()> {
    if mu.time() > nu.time() {
        return Err(Error::TimeOrder(format!(
            "source slice at {} is later than target at {}",
            mu.time(),
            nu.time()
        )));
    }
    Ok(())
}

/// Is there any causal coupling of `mu` and `nu`? Decided by max-flow over
/// the causally related atom pairs.
pub fn causal_coupling_feasible(
    model: &SpacetimeModel,
    mu: &SliceMeasure,
    nu: &SliceMeasure,
    mode: ArithMode,
) -> Result<bool> {
    check_orientation(mu, nu)?;
    let allowed = |i: usize, j: usize| {
        model.causally_precedes(&mu.atoms()[i].0, &nu.atoms()[j].0)
    };
    match mode {
        ArithMode::Rational => {
            let muw: Vec<Weight> = mu.atoms().iter().map(|(_, w)| w.clone()).collect();
            let nuw: Vec<Weight> = nu.atoms().iter().map(|(_, w)| w.clone()).collect();
            Ok(transport::transport_feasibility(&muw, &nuw, allowed).is_feasible())
        }
        ArithMode::Float => {
            let muw: Vec<f64> = mu.atoms().iter().map(|(_, w)| rational::to_f64(w)).collect();
            let nuw: Vec<f64> = nu.atoms().iter().map(|(_, w)| rational::to_f64(w)).collect();
            match transport::transport_feasibility(&muw, &nuw, allowed) {
                Feasibility::Feasible(_) => Ok(true),
                Feasibility::Infeasible { deficit, .. } => Ok(deficit <= FLOAT_SLACK),
            }
        }
    }
}

/// The deterministic causal coupling: among feasible plans, minimum cost for
/// the squared Euclidean distance of embedded points, ties broken by the
/// solver's fixed lexicographic atom order. Infeasibility returns an up-set
/// certificate.
pub fn find_causal_coupling(
    model: &SpacetimeModel,
    mu: &SliceMeasure,
    nu: &SliceMeasure,
) -> Result<Coupling> {
    check_orientation(mu, nu)?;
    let muw: Vec<Weight> = mu.atoms().iter().map(|(_, w)| w.clone()).collect();
    let nuw: Vec<Weight> = nu.atoms().iter().map(|(_, w)| w.clone()).collect();
    let cost = |i: usize, j: usize| {
        let a = model.embed(&mu.atoms()[i].0);
        let b = model.embed(&nu.atoms()[j].0);
        let d = crate::spacetime::euclidean_distance(&a, &b);
        d * d
    };
    let allowed =
        |i: usize, j: usize| model.causally_precedes(&mu.atoms()[i].0, &nu.atoms()[j].0);
    match transport::min_cost_transport(&muw, &nuw, allowed, cost) {
        Ok(mass) => {
            let coupling = Coupling {
                source: mu.clone(),
                target: nu.clone(),
                mass,
            };
            coupling.validate(model)?;
            Ok(coupling)
        }
        Err((sources, deficit)) => Err(Error::Infeasible {
            step: None,
            certificate: sources.iter().map(|&i| mu.atoms()[i].0).collect(),
            deficit: rational::to_f64(&deficit),
        }),
    }
}

/// Checks `μ(J⁺(K)) ≤ ν(J⁺(K))` over a family of finite event sets.
/// Returns whether all pass and the worst margin `min_K ν(J⁺K) − μ(J⁺K)`.
pub fn upset_characterization_check(
    model: &SpacetimeModel,
    mu: &SliceMeasure,
    nu: &SliceMeasure,
    family: &[Vec<Event>],
) -> Result<(bool, f64)> {
    check_orientation(mu, nu)?;
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for set in family {
        if set.is_empty() {
            continue;
        }
        let mu_mass = mu.mass_in_future_of(model, set)?;
        let nu_mass = nu.mass_in_future_of(model, set)?;
        if nu_mass < mu_mass {
            ok = false;
        }
        let margin = rational::to_f64(&nu_mass) - rational::to_f64(&mu_mass);
        if margin < worst {
            worst = margin;
        }
    }
    if worst == f64::INFINITY {
        worst = 0.0;
    }
    Ok((ok, worst))
}

/// Default set family for the characterization check: all singletons, all
/// subsets of the earlier support up to size 3, and the full support.
pub fn default_k_family(mu: &SliceMeasure) -> Vec<Vec<Event>> {
    k_family_up_to(mu, 3)
}

/// Subsets of the support up to `max_size`, plus the full support.
pub fn k_family_up_to(mu: &SliceMeasure, max_size: usize) -> Vec<Vec<Event>> {
    let events = mu.events();
    let n = events.len();
    let mut family: Vec<Vec<Event>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn extend(
        events: &[Event],
        start: usize,
        depth: usize,
        stack: &mut Vec<usize>,
        family: &mut Vec<Vec<Event>>,
    ) {
        if depth == 0 {
            return;
        }
        for i in start..events.len() {
            stack.push(i);
            family.push(stack.iter().map(|&j| events[j]).collect());
            extend(events, i + 1, depth - 1, stack, family);
            stack.pop();
        }
    }
    extend(&events, 0, max_size.max(1), &mut stack, &mut family);
    if n > max_size.max(1) {
        family.push(events);
    }
    family
}

/// Every subset of the support (desk-scale form of quantifying over all
/// compacts; exponential, callers cap the atom count).
pub fn all_subsets_family(mu: &SliceMeasure) -> Vec<Vec<Event>> {
    let events = mu.events();
    let n = events.len();
    assert!(n <= 16, "exhaustive subset family needs small supports");
    let mut family = Vec::with_capacity((1 << n) - 1);
    for mask in 1u32..(1 << n) {
        family.push(
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| events[i])
                .collect(),
        );
    }
    family
}

/// A T-evolution is causal iff every adjacent pair of slices admits a
/// causal coupling; chain causality across the grid then follows from
/// explicit coupling composition ([`compose_couplings`]), not assumption.
pub fn is_causal_evolution(
    model: &SpacetimeModel,
    ev: &Evolution,
    mode: ArithMode,
) -> Result<bool> {
    for k in 0..ev.len() - 1 {
        if !causal_coupling_feasible(model, &ev.slices()[k], &ev.slices()[k + 1], mode)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Glues two couplings sharing the middle measure, distributing mass
/// proportionally through each middle atom. The result is a valid causal
/// coupling of the outer measures (push-up plus transitivity of `⪯`).
pub fn compose_couplings(
    model: &SpacetimeModel,
    first: &Coupling,
    second: &Coupling,
) -> Result<Coupling> {
    if first.target != second.source {
        return Err(Error::MarginalMismatch(
            "couplings do not share the middle measure".into(),
        ));
    }
    let mid = &first.target;
    let mut entries: std::collections::BTreeMap<(usize, usize), Weight> = Default::default();
    for (jm, (_, mid_w)) in mid.atoms().iter().enumerate() {
        let incoming: Vec<&(usize, usize, Weight)> =
            first.mass.iter().filter(|(_, j, _)| *j == jm).collect();
        let outgoing: Vec<&(usize, usize, Weight)> =
            second.mass.iter().filter(|(i, _, _)| *i == jm).collect();
        for (i, _, wi) in &incoming {
            for (_, k, wk) in &outgoing {
                let w = wi.clone() * wk.clone() / mid_w.clone();
                entries
                    .entry((*i, *k))
                    .and_modify(|acc| *acc += w.clone())
                    .or_insert(w);
            }
        }
    }
    let coupling = Coupling {
        source: first.source.clone(),
        target: second.target.clone(),
        mass: entries.into_iter().map(|((i, k), w)| (i, k, w)).collect(),
    };
    coupling.validate(model)?;
    Ok(coupling)
}

/// Trapezoidal-in-time quadrature of `t ↦ ∫ f dμ_t` over the evolution grid.
pub fn eta_integral(ev: &Evolution, f: impl Fn(&Event) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (k, slice) in ev.slices().iter().enumerate() {
        let term = trapezoid_weight(ev.times(), k) * slice.integrate(&f);
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

/// Trapezoid weight of grid node `k`: half the adjacent step at the ends,
/// half the straddling span inside.
pub fn trapezoid_weight(times: &[f64], k: usize) -> f64 {
    let last = times.len() - 1;
    if times.len() == 1 {
        return 0.0;
    }
    if k == 0 {
        0.5 * (times[1] - times[0])
    } else if k == last {
        0.5 * (times[last] - times[last - 1])
    } else {
        0.5 * (times[k + 1] - times[k - 1])
    }
}
