//! Arc Hamiltonians, truncated Lagrangians and the critical lower bounds.
//!
//! Each arc of the stored orientation carries one evaluator `H(s, mu)`; the
//! inverse arc is served by `H~(s, mu) = H(|arc| - s, -mu)`. The scheme only
//! consumes the truncated Lagrangian
//!
//! ```text
//! L~(s, lambda) = max_{mu in I} (lambda mu - H(s, mu))   for |lambda| <= beta0
//!               = +inf                                   otherwise
//! ```
//!
//! which is evaluated in closed form for quadratic Hamiltonians and by a
//! convex line search over the momentum window `I` otherwise.

use std::fmt;
use std::sync::Arc as Shared;

use crate::error::{Error, Result};
use crate::network::Network;
use crate::optim::{golden_iterations, golden_section, minimize_convex};

pub type ScalarFn = Shared<dyn Fn(f64) -> f64 + Send + Sync>;
pub type HamiltonianFn = Shared<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Momentum tolerance of the numerical Legendre transform.
pub const MOMENTUM_TOL: f64 = 1e-10;
/// Uniform `s` samples used for the envelope `a_arc` before local refinement.
pub const ENVELOPE_SAMPLES: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

/// `H(s, mu) = curvature * (mu + shift(s))^2 + offset(s)`, with curvature > 0.
#[derive(Clone)]
pub struct QuadraticForm {
    curvature: f64,
    shift: ScalarFn,
    offset: ScalarFn,
}

impl fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadraticForm")
            .field("curvature", &self.curvature)
            .finish_non_exhaustive()
    }
}

impl QuadraticForm {
    pub fn new(
        curvature: f64,
        shift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        offset: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(curvature > 0.0, "quadratic curvature must be positive");
        Self {
            curvature,
            shift: Shared::new(shift),
            offset: Shared::new(offset),
        }
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn shift(&self, s: f64) -> f64 {
        (self.shift)(s)
    }

    pub fn offset(&self, s: f64) -> f64 {
        (self.offset)(s)
    }

    pub fn hamiltonian(&self, s: f64, mu: f64) -> f64 {
        let m = mu + (self.shift)(s);
        self.curvature * m * m + (self.offset)(s)
    }

    pub fn lagrangian(&self, s: f64, lambda: f64) -> f64 {
        lambda * lambda / (4.0 * self.curvature) - (self.shift)(s) * lambda - (self.offset)(s)
    }

    pub fn momentum_derivative(&self, s: f64, mu: f64) -> f64 {
        2.0 * self.curvature * (mu + (self.shift)(s))
    }

    /// Momentum attaining the supremum in the Legendre transform at `lambda`.
    pub fn conjugate_maximizer(&self, s: f64, lambda: f64) -> f64 {
        lambda / (2.0 * self.curvature) - (self.shift)(s)
    }

    pub fn min_value(&self, s: f64) -> f64 {
        (self.offset)(s)
    }

    pub fn argmin(&self, s: f64) -> f64 {
        -(self.shift)(s)
    }
}

/// Hamiltonian of one stored arc, optionally with a closed form.
#[derive(Clone)]
pub struct ArcHamiltonian {
    eval: HamiltonianFn,
    closed_form: Option<QuadraticForm>,
}

impl fmt::Debug for ArcHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArcHamiltonian")
            .field("closed_form", &self.closed_form)
            .finish_non_exhaustive()
    }
}

impl ArcHamiltonian {
    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Shared::new(f),
            closed_form: None,
        }
    }

    pub fn quadratic(
        curvature: f64,
        shift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        offset: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let q = QuadraticForm::new(curvature, shift, offset);
        let eval = q.clone();
        Self {
            eval: Shared::new(move |s, mu| eval.hamiltonian(s, mu)),
            closed_form: Some(q),
        }
    }

    /// Attaches a closed form equal to the evaluator (checked by the model).
    pub fn with_closed_form(mut self, q: QuadraticForm) -> Self {
        self.closed_form = Some(q);
        self
    }

    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = None;
        self
    }

    #[inline]
    pub fn eval(&self, s: f64, mu: f64) -> f64 {
        (self.eval)(s, mu)
    }

    pub fn closed_form(&self) -> Option<&QuadraticForm> {
        self.closed_form.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    /// Momentum window `I = [mu_min, mu_max]`.
    pub mu_interval: (f64, f64),
    /// Largest admissible slope.
    pub beta0: f64,
}

impl TruncationParams {
    pub fn new(mu_min: f64, mu_max: f64, beta0: f64) -> Result<Self> {
        if !(mu_min < mu_max) {
            return Err(Error::ParameterConstraint(format!(
                "momentum window [{mu_min}, {mu_max}] is empty"
            )));
        }
        if !(beta0 > 0.0) || !beta0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta0",
                value: beta0,
            });
        }
        Ok(Self {
            mu_interval: (mu_min, mu_max),
            beta0,
        })
    }

    /// `I = [-beta0 - pad, beta0 + pad]`.
    pub fn symmetric(beta0: f64, pad: f64) -> Result<Self> {
        Self::new(-beta0 - pad, beta0 + pad, beta0)
    }
}

/// Per-arc Hamiltonians of a network together with their truncation.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    name: String,
    arcs: Vec<ArcHamiltonian>,
    lengths: Vec<f64>,
    truncation: TruncationParams,
}

/// Lower critical bounds of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalBounds {
    /// `max_s min_mu H_arc(s, mu)` per arc.
    pub a_gamma: Vec<f64>,
    /// Max of `a_gamma`; a lower bound for the critical value.
    pub a0: f64,
    /// Minimal flux limiter per vertex: max of `a_gamma` over incident arcs.
    pub flux_limiters: Vec<f64>,
}

impl HamiltonianModel {
    /// Builds a model, widening the momentum window `[-beta0 - pad, beta0 + pad]`
    /// until every conjugate maximizer for `|lambda| <= beta0` is interior.
    pub fn new(
        name: impl Into<String>,
        net: &Network,
        arcs: Vec<ArcHamiltonian>,
        beta0: f64,
    ) -> Result<Self> {
        let name = name.into();
        let mut pad = 1.0;
        loop {
            let truncation = TruncationParams::symmetric(beta0, pad)?;
            let model = Self::unchecked(name.clone(), net, arcs.clone(), truncation)?;
            match model.validate_window() {
                Ok(()) => return Ok(model),
                Err(Error::NonCoercive { .. }) if pad < 1e6 => pad *= 4.0,
                Err(e) => return Err(e),
            }
        }
    }

    /// Builds a model with a fixed momentum window; fails if a conjugate
    /// maximizer touches its boundary.
    pub fn with_truncation(
        name: impl Into<String>,
        net: &Network,
        arcs: Vec<ArcHamiltonian>,
        truncation: TruncationParams,
    ) -> Result<Self> {
        let model = Self::unchecked(name.into(), net, arcs, truncation)?;
        model.validate_window()?;
        Ok(model)
    }

    fn unchecked(
        name: String,
        net: &Network,
        arcs: Vec<ArcHamiltonian>,
        truncation: TruncationParams,
    ) -> Result<Self> {
        if arcs.len() != net.num_arcs() {
            return Err(Error::ModelArity {
                expected: net.num_arcs(),
                found: arcs.len(),
            });
        }
        let model = Self {
            name,
            arcs,
            lengths: net.arcs().iter().map(|a| a.length).collect(),
            truncation,
        };
        model.check_closed_forms()?;
        Ok(model)
    }

    fn check_closed_forms(&self) -> Result<()> {
        for (arc, h) in self.arcs.iter().enumerate() {
            let Some(q) = h.closed_form() else { continue };
            let len = self.lengths[arc];
            for i in 0..=8 {
                let s = len * i as f64 / 8.0;
                for mu in [-3.0, -1.0, -0.25, 0.0, 0.5, 2.0, 5.0] {
                    let (a, b) = (h.eval(s, mu), q.hamiltonian(s, mu));
                    if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
                        return Err(Error::ParameterConstraint(format!(
                            "closed form on arc {arc} disagrees with its evaluator at s = {s}, mu = {mu}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_window(&self) -> Result<()> {
        let (lo, hi) = self.truncation.mu_interval;
        let margin = 1e-6 * (hi - lo);
        let beta0 = self.truncation.beta0;
        for arc in 0..self.arcs.len() {
            let len = self.lengths[arc];
            for i in 0..=64 {
                let s = len * i as f64 / 64.0;
                for lambda in [-beta0, beta0] {
                    let mu = self.conjugate_maximizer(arc, s, lambda);
                    if mu <= lo + margin || mu >= hi - margin {
                        return Err(Error::NonCoercive { arc, lo, hi });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn truncation(&self) -> TruncationParams {
        self.truncation
    }

    pub fn beta0(&self) -> f64 {
        self.truncation.beta0
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc_length(&self, arc: usize) -> f64 {
        self.lengths[arc]
    }

    pub fn arc(&self, arc: usize) -> &ArcHamiltonian {
        &self.arcs[arc]
    }

    pub fn has_closed_forms(&self) -> bool {
        self.arcs.iter().all(|h| h.closed_form().is_some())
    }

    /// Maps `(direction, s, x)` to forward coordinates `(s', sign)` so that
    /// the value at `x` equals the forward value at `sign * x`.
    fn forward_coords(&self, arc: usize, direction: Direction, s: f64) -> Result<(f64, f64)> {
        let len = *self.lengths.get(arc).ok_or(Error::ArcOutOfRange(arc))?;
        let slack = 1e-12 * len;
        if !(s >= -slack && s <= len + slack) {
            return Err(Error::OutOfDomain { s, length: len });
        }
        let s = s.clamp(0.0, len);
        Ok(match direction {
            Direction::Forward => (s, 1.0),
            Direction::Reverse => (len - s, -1.0),
        })
    }

    pub fn eval_hamiltonian(
        &self,
        arc: usize,
        direction: Direction,
        s: f64,
        mu: f64,
    ) -> Result<f64> {
        let (s, sign) = self.forward_coords(arc, direction, s)?;
        Ok(self.arcs[arc].eval(s, sign * mu))
    }

    /// `L~(s, lambda)`; `+inf` outside `[-beta0, beta0]`.
    pub fn truncated_lagrangian(
        &self,
        arc: usize,
        direction: Direction,
        s: f64,
        lambda: f64,
    ) -> Result<f64> {
        let (s, sign) = self.forward_coords(arc, direction, s)?;
        Ok(self.lagrangian_forward(arc, s, sign * lambda))
    }

    /// Same as [`truncated_lagrangian`](Self::truncated_lagrangian) but always
    /// through the numerical Legendre transform.
    pub fn numerical_lagrangian(
        &self,
        arc: usize,
        direction: Direction,
        s: f64,
        lambda: f64,
    ) -> Result<f64> {
        let (s, sign) = self.forward_coords(arc, direction, s)?;
        let lambda = sign * lambda;
        if lambda.abs() > self.truncation.beta0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.numeric_conjugate(arc, s, lambda).1)
    }

    pub(crate) fn lagrangian_forward(&self, arc: usize, s: f64, lambda: f64) -> f64 {
        if lambda.abs() > self.truncation.beta0 {
            return f64::INFINITY;
        }
        match self.arcs[arc].closed_form() {
            Some(q) => q.lagrangian(s, lambda),
            None => self.numeric_conjugate(arc, s, lambda).1,
        }
    }

    /// `(argmax, max)` of `lambda mu - H(s, mu)` over the momentum window.
    fn numeric_conjugate(&self, arc: usize, s: f64, lambda: f64) -> (f64, f64) {
        let h = &self.arcs[arc];
        let (lo, hi) = self.truncation.mu_interval;
        let (mu, v) = minimize_convex(|mu| h.eval(s, mu) - lambda * mu, lo, hi, MOMENTUM_TOL);
        (mu, -v)
    }

    fn conjugate_maximizer(&self, arc: usize, s: f64, lambda: f64) -> f64 {
        match self.arcs[arc].closed_form() {
            Some(q) => q.conjugate_maximizer(s, lambda),
            None => self.numeric_conjugate(arc, s, lambda).0,
        }
    }

    /// `dH/dmu` on the stored orientation; central differences without a
    /// closed form.
    #[inline]
    pub(crate) fn momentum_derivative(&self, arc: usize, s: f64, mu: f64) -> f64 {
        let h = &self.arcs[arc];
        match h.closed_form() {
            Some(q) => q.momentum_derivative(s, mu),
            None => {
                let step = 1e-5 * mu.abs().max(1.0);
                (h.eval(s, mu + step) - h.eval(s, mu - step)) / (2.0 * step)
            }
        }
    }

    #[inline]
    pub(crate) fn hamiltonian_forward(&self, arc: usize, s: f64, mu: f64) -> f64 {
        self.arcs[arc].eval(s, mu)
    }

    /// `min_mu H(s, mu)` on the momentum window.
    fn momentum_min(&self, arc: usize, s: f64) -> Result<f64> {
        let h = &self.arcs[arc];
        if let Some(q) = h.closed_form() {
            return Ok(q.min_value(s));
        }
        let (lo, hi) = self.truncation.mu_interval;
        let (mu, v) = minimize_convex(|mu| h.eval(s, mu), lo, hi, MOMENTUM_TOL);
        let margin = 1e-7 * (hi - lo);
        if mu <= lo + margin || mu >= hi - margin {
            return Err(Error::NonCoercive { arc, lo, hi });
        }
        Ok(v)
    }

    /// `a_arc = max_s min_mu H(s, mu)`, sampled on a uniform `s` grid and
    /// refined around the best sample.
    pub fn arc_lower_envelope(&self, arc: usize, direction: Direction) -> Result<f64> {
        let len = *self.lengths.get(arc).ok_or(Error::ArcOutOfRange(arc))?;
        let n = ENVELOPE_SAMPLES;
        let h = len / (n - 1) as f64;
        let at = |s: f64| -> Result<f64> {
            let (s, _) = self.forward_coords(arc, direction, s)?;
            self.momentum_min(arc, s)
        };
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..n {
            let v = at(i as f64 * h)?;
            if v > best.1 {
                best = (i, v);
            }
        }
        let a = best.0.saturating_sub(1) as f64 * h;
        let b = ((best.0 + 1).min(n - 1) as f64 * h).min(len);
        let neg = |s: f64| at(s).map(|v| -v).unwrap_or(f64::INFINITY);
        let tol = 1e-12 * len.max(1.0);
        let (_, v) = golden_section(neg, a, b, tol, golden_iterations(b - a, tol));
        Ok(best.1.max(-v))
    }

    /// `a_arc` for every arc, `a0`, and the minimal flux limiters.
    pub fn compute_critical_bounds(&self, net: &Network) -> Result<CriticalBounds> {
        if net.num_arcs() != self.arcs.len() {
            return Err(Error::ModelArity {
                expected: net.num_arcs(),
                found: self.arcs.len(),
            });
        }
        let mut a_gamma = Vec::with_capacity(self.arcs.len());
        for arc in 0..self.arcs.len() {
            let fwd = self.arc_lower_envelope(arc, Direction::Forward)?;
            let rev = self.arc_lower_envelope(arc, Direction::Reverse)?;
            if (fwd - rev).abs() > 1e-8 * (1.0 + fwd.abs()) {
                return Err(Error::ParameterConstraint(format!(
                    "envelope of arc {arc} depends on orientation: {fwd} vs {rev}"
                )));
            }
            a_gamma.push(fwd);
        }
        let a0 = a_gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let flux_limiters = (0..net.num_vertices())
            .map(|v| {
                net.incidence(v)
                    .iter()
                    .map(|&(arc, _)| a_gamma[arc])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Ok(CriticalBounds {
            a_gamma,
            a0,
            flux_limiters,
        })
    }
}
