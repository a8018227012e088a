use thiserror::Error;

/// Everything that can go wrong between reading a mesh and reporting an energy.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("face {face} references vertex {index}, but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        n_vertices: usize,
    },

    #[error("mesh validation failed: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate arc: projected tangent vanishes (normal parallel to chord)")]
    DegenerateArc,

    #[error("element {element}: {source}")]
    Element {
        element: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("singular kernel evaluation at coincident points")]
    Singularity,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("GMRES did not converge after {iterations} iterations (best relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{0}")]
    WrongOperation(String),
}

impl Error {
    pub(crate) fn in_element(self, element: usize) -> Self {
        Error::Element {
            element,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
