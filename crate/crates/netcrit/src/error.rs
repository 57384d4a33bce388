use thiserror::Error;

/// Errors produced while building networks, grids, models and running the scheme.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("network has no arcs")]
    NoArcs,
    #[error("arc {arc} is a loop at vertex {vertex}")]
    LoopArc { arc: usize, vertex: usize },
    #[error("arc {arc} references unknown vertex {vertex}")]
    UnknownVertex { arc: usize, vertex: usize },
    #[error("arc {arc} has nonpositive length {length}")]
    NonpositiveLength { arc: usize, length: f64 },
    #[error("vertex {vertex} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("network is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(usize),

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("inadmissible pair: dt = {delta_t} exceeds min spacing / beta0 = {limit}")]
    InadmissiblePair { delta_t: f64, limit: f64 },
    #[error("inadmissible grid: {0}")]
    InadmissibleGrid(String),
    #[error("node id {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("arc id {0} is out of range")]
    ArcOutOfRange(usize),

    #[error("s = {s} lies outside [0, {length}]")]
    OutOfDomain { s: f64, length: f64 },
    #[error("model has {found} arc Hamiltonians, network has {expected} arcs")]
    ModelArity { expected: usize, found: usize },
    #[error("Hamiltonian on arc {arc} is not coercive on the momentum window [{lo}, {hi}]")]
    NonCoercive { arc: usize, lo: f64, hi: f64 },
    #[error("empty feasible slope set at s = {s}")]
    EmptyFeasibleSet { s: f64 },
    #[error("{0}")]
    ParameterConstraint(String),

    #[error("grid function has {found} values, grid has {expected} nodes")]
    LayerSize { expected: usize, found: usize },
    #[error("non-finite value in the layer at node {node}")]
    NonFiniteLayer { node: usize },
    #[error("time {0} is not a grid time")]
    NotGridTime(f64),
    #[error("outer period {params} does not match grid horizon {grid}")]
    PeriodMismatch { params: f64, grid: f64 },

    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
