//! Embedded networks and their space-time grids.
//!
//! A [`Network`] stores one arc per orientation class: the inverse arc is never
//! materialized, the Hamiltonian layer evaluates it through the compatibility
//! identity. A [`SpaceTimeGrid`] places `N = ceil(|arc| / dx)` uniform cells on
//! every arc and shares a single node per vertex between all incident arcs.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub position: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub id: usize,
    /// Vertex at `s = 0`.
    pub tail: usize,
    /// Vertex at `s = length`.
    pub head: usize,
    pub length: f64,
}

/// Which end of an arc touches a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Tail,
    Head,
}

/// Input description of one arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub tail: usize,
    pub head: usize,
    /// Overrides the Euclidean distance between the endpoints (curved arcs,
    /// or arcs parametrized on a fixed interval).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

impl ArcSpec {
    pub fn new(tail: usize, head: usize) -> Self {
        Self {
            tail,
            head,
            length: None,
        }
    }

    pub fn with_length(tail: usize, head: usize, length: f64) -> Self {
        Self {
            tail,
            head,
            length: Some(length),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    incidence: Vec<Vec<(usize, Endpoint)>>,
}

/// Builds a connected network from vertex coordinates and arc descriptions.
pub fn build_network(positions: &[Vec<f64>], specs: &[ArcSpec]) -> Result<Network> {
    if specs.is_empty() {
        return Err(Error::NoArcs);
    }
    let dim = positions.first().map_or(0, Vec::len);
    for (id, p) in positions.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                vertex: id,
                expected: dim,
                found: p.len(),
            });
        }
    }

    let n = positions.len();
    let mut arcs = Vec::with_capacity(specs.len());
    let mut incidence = vec![Vec::new(); n];
    for (id, spec) in specs.iter().enumerate() {
        for v in [spec.tail, spec.head] {
            if v >= n {
                return Err(Error::UnknownVertex { arc: id, vertex: v });
            }
        }
        if spec.tail == spec.head {
            return Err(Error::LoopArc {
                arc: id,
                vertex: spec.tail,
            });
        }
        let length = spec
            .length
            .unwrap_or_else(|| euclidean(&positions[spec.tail], &positions[spec.head]));
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::NonpositiveLength { arc: id, length });
        }
        arcs.push(Arc {
            id,
            tail: spec.tail,
            head: spec.head,
            length,
        });
        incidence[spec.tail].push((id, Endpoint::Tail));
        incidence[spec.head].push((id, Endpoint::Head));
    }

    let vertices = positions
        .iter()
        .enumerate()
        .map(|(id, p)| Vertex {
            id,
            position: p.clone(),
        })
        .collect();
    let net = Network {
        vertices,
        arcs,
        incidence,
    };
    if let Some(v) = net.first_unreachable() {
        return Err(Error::Disconnected(v));
    }
    Ok(net)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Network {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> Result<&Arc> {
        self.arcs.get(id).ok_or(Error::ArcOutOfRange(id))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs touching `vertex`, with the end that touches it.
    pub fn incidence(&self, vertex: usize) -> &[(usize, Endpoint)] {
        &self.incidence[vertex]
    }

    /// Point of `arc` at arc-length `s`, assuming a straight segment.
    pub fn point_on_arc(&self, arc: usize, s: f64) -> Result<Vec<f64>> {
        let a = self.arc(arc)?;
        if !(0.0..=a.length).contains(&s) {
            return Err(Error::OutOfDomain {
                s,
                length: a.length,
            });
        }
        let t = s / a.length;
        let p = &self.vertices[a.tail].position;
        let q = &self.vertices[a.head].position;
        Ok(p.iter().zip(q).map(|(x, y)| x + t * (y - x)).collect())
    }

    fn first_unreachable(&self) -> Option<usize> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(arc, end) in &self.incidence[v] {
                let a = &self.arcs[arc];
                let w = match end {
                    Endpoint::Tail => a.head,
                    Endpoint::Head => a.tail,
                };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// On-disk network description.
///
/// ```toml
/// vertices = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]]
///
/// [[arcs]]
/// tail = 0
/// head = 1
///
/// [[arcs]]
/// tail = 1
/// head = 2
/// length = 1.2   # optional, defaults to the Euclidean distance
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub vertices: Vec<Vec<f64>>,
    pub arcs: Vec<ArcSpec>,
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<Network> {
        build_network(&self.vertices, &self.arcs)
    }
}

/// Uniform cell count and spacing of an arc for a requested `dx`.
pub fn arc_resolution(length: f64, dx: f64) -> (usize, f64) {
    let n = ((length / dx).ceil() as usize).max(1);
    (n, length / n as f64)
}

/// Smallest effective spacing over all arcs for a requested `dx`.
pub fn min_spacing(net: &Network, dx: f64) -> f64 {
    net.arcs()
        .iter()
        .map(|a| arc_resolution(a.length, dx).1)
        .fold(f64::INFINITY, f64::min)
}

/// Where a global grid node sits on the network.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeLocation {
    /// A vertex node, listed with every `(arc, s)` alias that reaches it.
    Vertex {
        vertex: usize,
        aliases: Vec<(usize, f64)>,
    },
    Interior {
        arc: usize,
        index: usize,
        s: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    delta_x: f64,
    delta_t: f64,
    horizon: f64,
    beta0: f64,
    nodes_per_arc: Vec<usize>,
    effective_spacing: Vec<f64>,
    num_time_layers: usize,
    admissible: bool,
    num_vertices: usize,
    arc_ends: Vec<(usize, usize)>,
    arc_lengths: Vec<f64>,
    /// Global id of the first interior node of each arc.
    arc_offsets: Vec<usize>,
    num_nodes: usize,
    /// Reverse map for interior nodes: `(arc, index)` by `id - num_vertices`.
    interior: Vec<(usize, usize)>,
}

/// Builds the space-time grid; with `enforce_admissible`, rejects pairs that
/// violate `dt <= min spacing / beta0` (or the size constraints).
pub fn build_grid(
    net: &Network,
    delta_x: f64,
    delta_t: f64,
    horizon: f64,
    beta0: f64,
    enforce_admissible: bool,
) -> Result<SpaceTimeGrid> {
    for (name, value) in [
        ("dx", delta_x),
        ("dt", delta_t),
        ("T", horizon),
        ("beta0", beta0),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter { name, value });
        }
    }

    let nv = net.num_vertices();
    let mut nodes_per_arc = Vec::with_capacity(net.num_arcs());
    let mut effective_spacing = Vec::with_capacity(net.num_arcs());
    let mut arc_offsets = Vec::with_capacity(net.num_arcs());
    let mut interior = Vec::new();
    let mut next = nv;
    for a in net.arcs() {
        let (n, h) = arc_resolution(a.length, delta_x);
        nodes_per_arc.push(n);
        effective_spacing.push(h);
        arc_offsets.push(next);
        for i in 1..n {
            interior.push((a.id, i));
        }
        next += n - 1;
    }
    let num_time_layers = ((horizon / delta_t).ceil() as usize).max(1);

    let min_h = effective_spacing
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let limit = min_h / beta0;
    let size_ok = net.arcs().iter().all(|a| delta_x < a.length) && delta_t < horizon;
    // A relative slack of a few ulps lets dt = min spacing / beta0 pass.
    let cfl_ok = delta_t <= limit * (1.0 + 1e-12);
    if enforce_admissible {
        if !size_ok {
            return Err(Error::InadmissibleGrid(format!(
                "need dx < |arc| for every arc and dt < T (dx = {delta_x}, dt = {delta_t}, T = {horizon})"
            )));
        }
        if !cfl_ok {
            return Err(Error::InadmissiblePair { delta_t, limit });
        }
    }

    Ok(SpaceTimeGrid {
        delta_x,
        delta_t,
        horizon,
        beta0,
        nodes_per_arc,
        effective_spacing,
        num_time_layers,
        admissible: size_ok && cfl_ok,
        num_vertices: nv,
        arc_ends: net.arcs().iter().map(|a| (a.tail, a.head)).collect(),
        arc_lengths: net.arcs().iter().map(|a| a.length).collect(),
        arc_offsets,
        num_nodes: next,
        interior,
    })
}

impl SpaceTimeGrid {
    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    /// Requested time step.
    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// Step the scheme actually marches with: `T / ceil(T / dt)`.
    pub fn time_step(&self) -> f64 {
        self.horizon / self.num_time_layers as f64
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn nodes_per_arc(&self) -> &[usize] {
        &self.nodes_per_arc
    }

    pub fn effective_spacing(&self) -> &[f64] {
        &self.effective_spacing
    }

    pub fn min_effective_spacing(&self) -> f64 {
        self.effective_spacing
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn num_time_layers(&self) -> usize {
        self.num_time_layers
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_arcs(&self) -> usize {
        self.nodes_per_arc.len()
    }

    pub fn arc_length(&self, arc: usize) -> f64 {
        self.arc_lengths[arc]
    }

    pub fn arc_ends(&self, arc: usize) -> (usize, usize) {
        self.arc_ends[arc]
    }

    /// Arc-length coordinate `s_i = i |arc| / N` of node `i` on `arc`.
    pub fn node_position(&self, arc: usize, i: usize) -> f64 {
        let n = self.nodes_per_arc[arc];
        if i == n {
            self.arc_lengths[arc]
        } else {
            i as f64 * self.arc_lengths[arc] / n as f64
        }
    }

    /// Global id of node `i` (0..=N) on `arc`. Endpoints alias vertex ids.
    pub fn node_index(&self, arc: usize, i: usize) -> Result<usize> {
        let n = *self
            .nodes_per_arc
            .get(arc)
            .ok_or(Error::ArcOutOfRange(arc))?;
        let (tail, head) = self.arc_ends[arc];
        match i {
            0 => Ok(tail),
            i if i == n => Ok(head),
            i if i < n => Ok(self.arc_offsets[arc] + i - 1),
            _ => Err(Error::NodeOutOfRange(i)),
        }
    }

    #[inline]
    pub(crate) fn node_index_unchecked(&self, arc: usize, i: usize) -> usize {
        let n = self.nodes_per_arc[arc];
        if i == 0 {
            self.arc_ends[arc].0
        } else if i == n {
            self.arc_ends[arc].1
        } else {
            self.arc_offsets[arc] + i - 1
        }
    }

    /// Inverse of [`node_index`](Self::node_index).
    pub fn node_coordinate(&self, id: usize) -> Result<NodeLocation> {
        if id >= self.num_nodes {
            return Err(Error::NodeOutOfRange(id));
        }
        if id < self.num_vertices {
            let mut aliases = Vec::new();
            for (arc, &(tail, head)) in self.arc_ends.iter().enumerate() {
                if tail == id {
                    aliases.push((arc, 0.0));
                }
                if head == id {
                    aliases.push((arc, self.arc_lengths[arc]));
                }
            }
            return Ok(NodeLocation::Vertex {
                vertex: id,
                aliases,
            });
        }
        let (arc, index) = self.interior[id - self.num_vertices];
        Ok(NodeLocation::Interior {
            arc,
            index,
            s: self.node_position(arc, index),
        })
    }
}

/// Real values on the spatial grid, one per global node id.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &SpaceTimeGrid, value: f64) -> Self {
        Self {
            values: vec![value; grid.num_nodes()],
        }
    }

    /// Samples `f(arc, s)` at every node; vertices use their first alias.
    pub fn from_fn(grid: &SpaceTimeGrid, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        let mut values = vec![f64::NAN; grid.num_nodes()];
        for arc in 0..grid.num_arcs() {
            for i in 0..=grid.nodes_per_arc()[arc] {
                let id = grid.node_index_unchecked(arc, i);
                if values[id].is_nan() {
                    values[id] = f(arc, grid.node_position(arc, i));
                }
            }
        }
        Self { values }
    }

    pub fn from_values(grid: &SpaceTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::LayerSize {
                expected: grid.num_nodes(),
                found: values.len(),
            });
        }
        let f = Self { values };
        f.check_finite()?;
        Ok(f)
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, grid: &SpaceTimeGrid, arc: usize, i: usize) -> Result<f64> {
        Ok(self.values[grid.node_index(arc, i)?])
    }

    pub fn set(&mut self, grid: &SpaceTimeGrid, arc: usize, i: usize, value: f64) -> Result<()> {
        let id = grid.node_index(arc, i)?;
        self.values[id] = value;
        Ok(())
    }

    /// Values along `arc` in order of increasing `s`, endpoints included.
    pub fn arc_values(&self, grid: &SpaceTimeGrid, arc: usize) -> Vec<f64> {
        (0..=grid.nodes_per_arc()[arc])
            .map(|i| self.values[grid.node_index_unchecked(arc, i)])
            .collect()
    }

    pub fn shifted(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + a).collect(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(node) => Err(Error::NonFiniteLayer { node }),
            None => Ok(()),
        }
    }

    /// Node-wise maximum absolute difference.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
