use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix size {0} is not odd (expected 2k+1)")]
    EvenSize(usize),
    #[error("matrix is not skew-symmetric (max |a + aᵀ| = {0:e})")]
    NotSkew(f64),
    #[error("element lies outside the required subspace (offending component norm {0:e})")]
    OutsideSubspace(f64),
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("metric is degenerate at {point:?} (min eigenvalue {min_eigenvalue:e})")]
    DegenerateMetric { point: Vec<f64>, min_eigenvalue: f64 },
    #[error("parametrization Jacobian is rank deficient at {0:?}")]
    RankDeficient(Vec<f64>),
    #[error("unit normal is ill-defined at {0:?}")]
    IllDefinedNormal(Vec<f64>),
    #[error("dimension {0} is not odd")]
    EvenDimension(usize),
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("degenerate basis while building an orthonormal frame")]
    DegenerateFrame,
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ambient structure is not nearly Kähler (max |∇̃_X J(X)| = {0:e})")]
    NotNearlyKahler(f64),
    #[error("structure validation failed: max violation {violation:e} exceeds {tol:e}")]
    InvalidStructure { violation: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
