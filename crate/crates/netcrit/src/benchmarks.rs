//! Built-in benchmark problems on a triangle and on a traffic circle.
//!
//! Arcs are straight segments and the Hamiltonians are written in the
//! segment parameter `t = s / |arc|` in `[0, 1]`. The triangle sides have unit
//! length, so `t = s` there. The traffic circle keeps its Euclidean lengths by
//! default ([`CircleGeometry::Euclidean`]); [`CircleGeometry::UnitParameter`]
//! shrinks every arc to unit length instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{ArcHamiltonian, HamiltonianModel, QuadraticForm};
use crate::network::{build_network, min_spacing, ArcSpec, Network};

pub const CASE_NAMES: [&str; 4] = [
    "triangle-dep",
    "triangle-indep",
    "circle-dep",
    "circle-indep",
];

/// What is known about the critical value of a case.
#[derive(Debug, Clone, PartialEq)]
pub enum KnownCritical {
    Exact(f64),
    Reference {
        value: f64,
        provenance: String,
    },
    /// Parameters off the closed-form family.
    Unknown,
}

impl KnownCritical {
    pub fn value(&self) -> Option<f64> {
        match self {
            KnownCritical::Exact(c) | KnownCritical::Reference { value: c, .. } => Some(*c),
            KnownCritical::Unknown => None,
        }
    }
}

/// Time-step rules of the benchmark sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtPolicy {
    /// `min spacing / beta0`, an admissible pair.
    Beta0Ratio,
    /// `dx / 2`.
    HalfDx,
    /// `dx^(5/6)`.
    Dx56,
}

impl DtPolicy {
    pub const ALL: [DtPolicy; 3] = [DtPolicy::Dx56, DtPolicy::HalfDx, DtPolicy::Beta0Ratio];

    pub fn as_str(self) -> &'static str {
        match self {
            DtPolicy::Beta0Ratio => "beta0-ratio",
            DtPolicy::HalfDx => "half-dx",
            DtPolicy::Dx56 => "dx-56",
        }
    }

    /// Only the beta0 ratio yields admissible pairs.
    pub fn is_admissible(self) -> bool {
        self == DtPolicy::Beta0Ratio
    }
}

impl fmt::Display for DtPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DtPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta0-ratio" | "beta0_ratio" => Ok(DtPolicy::Beta0Ratio),
            "half-dx" | "half_dx" => Ok(DtPolicy::HalfDx),
            "dx-56" | "dx_56" => Ok(DtPolicy::Dx56),
            _ => Err(Error::Config(format!("unknown dt policy {s:?}"))),
        }
    }
}

/// Time step prescribed by `policy` on `net` at resolution `dx`.
pub fn delta_t_policy(policy: DtPolicy, net: &Network, dx: f64, beta0: f64) -> f64 {
    match policy {
        DtPolicy::Beta0Ratio => min_spacing(net, dx) / beta0,
        DtPolicy::HalfDx => dx / 2.0,
        DtPolicy::Dx56 => dx.powf(5.0 / 6.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircleGeometry {
    #[default]
    Euclidean,
    UnitParameter,
}

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: String,
    pub network: Network,
    pub model: HamiltonianModel,
    pub beta0: f64,
    pub known: KnownCritical,
    pub default_policies: Vec<DtPolicy>,
}

impl BenchmarkCase {
    pub fn exact_c(&self) -> Option<f64> {
        match self.known {
            KnownCritical::Exact(c) => Some(c),
            _ => None,
        }
    }

    pub fn reference_c(&self) -> Option<f64> {
        match self.known {
            KnownCritical::Reference { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Exact value if known, otherwise the reference value.
    pub fn target(&self) -> Option<f64> {
        self.known.value()
    }
}

/// Builds a case by registry name.
pub fn by_name(name: &str) -> Result<BenchmarkCase> {
    match name {
        "triangle-dep" => triangle_dependent(2.0 / 3.0, 0.5, 1.0),
        "triangle-indep" => triangle_independent(1.0, 0.0, 1.0),
        "circle-dep" => Ok(traffic_circle_dependent()),
        "circle-indep" => Ok(traffic_circle_independent()),
        _ => Err(Error::Config(format!(
            "unknown case {name:?}; known cases: {}",
            CASE_NAMES.join(", ")
        ))),
    }
}

fn closed_form_tolerance(a: f64, formula: f64) -> bool {
    (a - formula).abs() <= 1e-12 * formula.abs().max(1.0)
}

/// The triangle `(0,0) -> (1/2, sqrt(3)/2) -> (1,0) -> (0,0)`.
pub fn triangle_network() -> Network {
    let r3 = 3f64.sqrt();
    build_network(
        &[vec![0.0, 0.0], vec![0.5, r3 / 2.0], vec![1.0, 0.0]],
        &[
            ArcSpec::with_length(0, 1, 1.0),
            ArcSpec::with_length(1, 2, 1.0),
            ArcSpec::with_length(2, 0, 1.0),
        ],
    )
    .expect("triangle is a valid network")
}

/// `A` for which the s-dependent triangle has critical value `C`.
pub fn triangle_dependent_a(b: f64, c: f64) -> f64 {
    c.sqrt() - 1.0 + 2.0 / (6.0 * b) * (c.powf(1.5) - (c - 2.0 * b).powf(1.5))
}

/// `A` for which the s-independent triangle has critical value `C`.
pub fn triangle_independent_a(b: f64, c: f64) -> f64 {
    c.sqrt() - 1.0 + (c - b).sqrt()
}

fn nonnegative(a: f64, b: f64, c: f64) -> Result<()> {
    for (name, v) in [("A", a), ("B", b), ("C", c)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::ParameterConstraint(format!(
                "{name} = {v} must be finite and nonnegative"
            )));
        }
    }
    Ok(())
}

/// Triangle with `H1 = (mu + 2s)^2`, `H2 = mu^2 + 2Bs`,
/// `H3 = (mu + A - 1 + 2s)(mu + 2A) + C`; needs `B > 0` and `C >= 2B`.
pub fn triangle_dependent(a: f64, b: f64, c: f64) -> Result<BenchmarkCase> {
    nonnegative(a, b, c)?;
    if !(b > 0.0) {
        return Err(Error::ParameterConstraint(format!(
            "B = {b} must be positive"
        )));
    }
    if c < 2.0 * b {
        return Err(Error::ParameterConstraint(format!(
            "need C >= 2B, got C = {c}, B = {b}"
        )));
    }
    let net = triangle_network();
    let beta0 = 12.0;
    let h3 = ArcHamiltonian::from_fn(move |s, mu| (mu + a - 1.0 + 2.0 * s) * (mu + 2.0 * a) + c)
        .with_closed_form(QuadraticForm::new(
            1.0,
            move |s| (3.0 * a - 1.0 + 2.0 * s) / 2.0,
            move |s| {
                let d = (2.0 * s - 1.0 - a) / 2.0;
                c - d * d
            },
        ));
    let arcs = vec![
        ArcHamiltonian::quadratic(1.0, |s| 2.0 * s, |_| 0.0),
        ArcHamiltonian::quadratic(1.0, |_| 0.0, move |s| 2.0 * b * s),
        h3,
    ];
    let model = HamiltonianModel::new("triangle-dep", &net, arcs, beta0)?;
    let known = if closed_form_tolerance(a, triangle_dependent_a(b, c)) {
        KnownCritical::Exact(c)
    } else {
        KnownCritical::Unknown
    };
    Ok(BenchmarkCase {
        name: "triangle-dep".into(),
        network: net,
        model,
        beta0,
        known,
        default_policies: DtPolicy::ALL.to_vec(),
    })
}

/// Triangle with `H1 = (mu + 1)^2`, `H2 = mu^2 + B`, `H3 = (mu + A)(mu + 2A) + C`;
/// needs `C >= B >= 0`.
pub fn triangle_independent(a: f64, b: f64, c: f64) -> Result<BenchmarkCase> {
    nonnegative(a, b, c)?;
    if b > c {
        return Err(Error::ParameterConstraint(format!(
            "need C >= B, got C = {c}, B = {b}"
        )));
    }
    let net = triangle_network();
    let beta0 = 9.1;
    let h3 = ArcHamiltonian::from_fn(move |_, mu| (mu + a) * (mu + 2.0 * a) + c).with_closed_form(
        QuadraticForm::new(1.0, move |_| 1.5 * a, move |_| c - a * a / 4.0),
    );
    let arcs = vec![
        ArcHamiltonian::quadratic(1.0, |_| 1.0, |_| 0.0),
        ArcHamiltonian::quadratic(1.0, |_| 0.0, move |_| b),
        h3,
    ];
    let model = HamiltonianModel::new("triangle-indep", &net, arcs, beta0)?;
    let known = if closed_form_tolerance(a, triangle_independent_a(b, c)) {
        KnownCritical::Exact(c)
    } else {
        KnownCritical::Unknown
    };
    Ok(BenchmarkCase {
        name: "triangle-indep".into(),
        network: net,
        model,
        beta0,
        known,
        default_policies: DtPolicy::ALL.to_vec(),
    })
}

/// Vertex coordinates of the traffic circle.
pub const CIRCLE_VERTICES: [[f64; 2]; 8] = [
    [-2.0, 0.0],
    [-1.0, 0.0],
    [0.0, 2.0],
    [0.0, 1.0],
    [2.0, 0.0],
    [1.0, 0.0],
    [0.0, -2.0],
    [0.0, -1.0],
];

/// `(tail, head)` of the twelve traffic circle arcs.
pub const CIRCLE_ARCS: [(usize, usize); 12] = [
    (0, 1),
    (0, 2),
    (0, 6),
    (1, 3),
    (1, 7),
    (2, 3),
    (2, 4),
    (3, 5),
    (4, 5),
    (4, 6),
    (5, 7),
    (6, 7),
];

/// Arc groups: outer ring, inner ring, radial spokes.
const OUTER: [usize; 4] = [1, 2, 6, 9];
const INNER: [usize; 4] = [3, 4, 7, 10];

pub fn traffic_circle_network(geometry: CircleGeometry) -> Network {
    let positions: Vec<Vec<f64>> = CIRCLE_VERTICES.iter().map(|p| p.to_vec()).collect();
    let specs: Vec<ArcSpec> = CIRCLE_ARCS
        .iter()
        .map(|&(t, h)| match geometry {
            CircleGeometry::UnitParameter => ArcSpec::with_length(t, h, 1.0),
            CircleGeometry::Euclidean => ArcSpec::new(t, h),
        })
        .collect();
    build_network(&positions, &specs).expect("traffic circle is a valid network")
}

fn circle_case(
    name: &str,
    geometry: CircleGeometry,
    beta0: f64,
    inner: impl Fn(f64) -> ArcHamiltonian,
    reference: f64,
    beta_label: &str,
) -> BenchmarkCase {
    let net = traffic_circle_network(geometry);
    let arcs = (0..12)
        .map(|i| {
            if OUTER.contains(&i) {
                ArcHamiltonian::quadratic(0.5, |_| -1.0, |_| -5.0)
            } else if INNER.contains(&i) {
                inner(net.arcs()[i].length)
            } else {
                ArcHamiltonian::quadratic(0.5, |_| 0.0, |_| -5.0)
            }
        })
        .collect();
    let model = HamiltonianModel::new(name, &net, arcs, beta0).expect("circle model is coercive");
    BenchmarkCase {
        name: name.into(),
        network: net,
        model,
        beta0,
        known: KnownCritical::Reference {
            value: reference,
            provenance: format!(
                "layer-increment estimate at dx = 1.25e-2, dt = min spacing / {beta_label}, \
                 eps = dx / 10, rounded to three significant figures"
            ),
        },
        default_policies: DtPolicy::ALL.to_vec(),
    }
}

/// Traffic circle whose inner ring carries `(mu + 4t)^2 / 4`.
pub fn traffic_circle_dependent() -> BenchmarkCase {
    traffic_circle_dependent_with(CircleGeometry::default())
}

pub fn traffic_circle_dependent_with(geometry: CircleGeometry) -> BenchmarkCase {
    circle_case(
        "circle-dep",
        geometry,
        9.5,
        |len| ArcHamiltonian::quadratic(0.25, move |s| 4.0 * s / len, |_| 0.0),
        0.259,
        "9.5",
    )
}

/// Traffic circle whose inner ring carries `(mu + 2)^2 / 2 - 2`.
pub fn traffic_circle_independent() -> BenchmarkCase {
    traffic_circle_independent_with(CircleGeometry::default())
}

pub fn traffic_circle_independent_with(geometry: CircleGeometry) -> BenchmarkCase {
    circle_case(
        "circle-indep",
        geometry,
        7.5,
        |_| ArcHamiltonian::quadratic(0.5, |_| 2.0, |_| -2.0),
        -1.50,
        "7.5",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_every_case() {
        for name in CASE_NAMES {
            let case = by_name(name).unwrap();
            assert_eq!(case.name, name);
            assert_eq!(case.model.beta0(), case.beta0);
            assert!(case.target().is_some());
        }
        assert!(matches!(by_name("square"), Err(Error::Config(_))));
    }

    #[test]
    fn triangle_a_formulas() {
        assert!((triangle_dependent_a(0.5, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(triangle_independent_a(0.0, 1.0), 1.0);
        // B = C leaves A = sqrt(C) - 1
        assert!((triangle_independent_a(4.0, 4.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_constraints() {
        assert!(matches!(
            triangle_dependent(2.0 / 3.0, 0.6, 1.0),
            Err(Error::ParameterConstraint(_))
        ));
        assert!(triangle_dependent(2.0 / 3.0, 0.0, 1.0).is_err());
        assert!(triangle_independent(1.0, 2.0, 1.0).is_err());
        assert!(triangle_independent(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn known_values() {
        let c = by_name("triangle-dep").unwrap();
        assert_eq!(c.exact_c(), Some(1.0));
        assert_eq!(c.reference_c(), None);
        assert_eq!(c.beta0, 12.0);
        assert_eq!(by_name("triangle-indep").unwrap().beta0, 9.1);
        let c = traffic_circle_dependent();
        assert_eq!(c.reference_c(), Some(0.259));
        assert_eq!(c.exact_c(), None);
        let c = traffic_circle_independent();
        assert_eq!(c.reference_c(), Some(-1.50));
        assert_eq!(c.beta0, 7.5);
        let off = triangle_independent(1.1, 0.0, 1.0).unwrap();
        assert_eq!(off.known, KnownCritical::Unknown);
    }

    #[test]
    fn circle_lengths() {
        let net = traffic_circle_network(CircleGeometry::Euclidean);
        let r2 = 2f64.sqrt();
        assert!((net.arcs()[0].length - 1.0).abs() < 1e-15);
        assert!((net.arcs()[1].length - 2.0 * r2).abs() < 1e-15);
        assert!((net.arcs()[3].length - r2).abs() < 1e-15);
        let net = traffic_circle_network(CircleGeometry::UnitParameter);
        assert!(net.arcs().iter().all(|a| a.length == 1.0));
        assert_eq!(net.num_vertices(), 8);
        assert_eq!(net.num_arcs(), 12);
    }

    #[test]
    fn time_step_policies() {
        let net = triangle_network();
        assert!((delta_t_policy(DtPolicy::Beta0Ratio, &net, 0.1, 12.0) - 0.1 / 12.0).abs() < 1e-17);
        assert!(
            (delta_t_policy(DtPolicy::Dx56, &net, 0.1, 12.0) - 0.146_779_926_762_206_9).abs()
                < 1e-12
        );
        assert_eq!(delta_t_policy(DtPolicy::HalfDx, &net, 0.2, 12.0), 0.1);
        for p in DtPolicy::ALL {
            assert_eq!(p.as_str().parse::<DtPolicy>().unwrap(), p);
        }
    }
}
