use std::fmt;

use serde::Serialize;

/// Error record written to stderr as JSON on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    /// "config", "io", or the library module that raised the error.
    pub module: &'static str,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            module: "config",
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            module: "io",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}

impl From<sideband_core::Error> for Failure {
    fn from(e: sideband_core::Error) -> Self {
        Self {
            module: e.module(),
            message: e.to_string(),
        }
    }
}

macro_rules! from_core {
    ($($t:ident),*) => {
        $(
            impl From<sideband_core::error::$t> for Failure {
                fn from(e: sideband_core::error::$t) -> Self {
                    sideband_core::Error::from(e).into()
                }
            }
        )*
    };
}

from_core!(LatticeError, QuadratureError, RamanError, SpectrumError, CoolingError, FitError);

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::io(e.to_string())
    }
}
