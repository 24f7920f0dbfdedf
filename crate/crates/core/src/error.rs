use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("invalid lattice configuration: {0}")]
    InvalidConfig(String),
    /// κ₁ = κ₂ = 0: the principal-axis angle has no meaning.
    #[error("principal-axis angle undefined for vanishing spring constants")]
    UndefinedAngle,
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    NotConverged { estimate: f64, tolerance: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RamanError {
    #[error("domain error: {0}")]
    Domain(String),
    /// A red/blue area pair that would imply a negative temperature.
    #[error("unphysical sideband areas: A_red = {a_red} must be below A_blue = {a_blue}")]
    Unphysical { a_red: f64, a_blue: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("invalid detuning grid: {0}")]
    InvalidGrid(String),
    #[error("invalid thermal state: {0}")]
    InvalidThermal(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Raman(#[from] RamanError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoolingError {
    #[error("invalid cooling protocol: {0}")]
    InvalidProtocol(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Raman(#[from] RamanError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("fit needs more data points ({data}) than free parameters ({params})")]
    TooFewData { data: usize, params: usize },
    #[error("invalid initial guess for `{name}`: {reason}")]
    InvalidGuess { name: String, reason: String },
    #[error("model returned {got} residuals, expected {expected}")]
    ResidualCount { expected: usize, got: usize },
    #[error("model produced a non-finite residual at the initial guess")]
    NonFinite,
    #[error("invalid fit input: {0}")]
    InvalidInput(String),
    #[error("area window [{lo}, {hi}] Hz lies outside the spectrum span [{span_lo}, {span_hi}] Hz")]
    WindowOutOfRange { lo: f64, hi: f64, span_lo: f64, span_hi: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Raman(#[from] RamanError),
}

/// Crate-level error carrying the module it came from.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice: {0}")]
    Lattice(#[from] LatticeError),
    #[error("specfun: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("raman: {0}")]
    Raman(#[from] RamanError),
    #[error("spectrum: {0}")]
    Spectrum(#[from] SpectrumError),
    #[error("cooling: {0}")]
    Cooling(#[from] CoolingError),
    #[error("fit: {0}")]
    Fit(#[from] FitError),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Lattice(_) => "lattice",
            Error::Quadrature(_) => "specfun",
            Error::Raman(_) => "raman",
            Error::Spectrum(_) => "spectrum",
            Error::Cooling(_) => "cooling",
            Error::Fit(_) => "fit",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
