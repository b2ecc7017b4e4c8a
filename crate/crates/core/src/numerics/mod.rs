//! Shared numerical kernels: adaptive Runge–Kutta integration, bracketed root
//! finding and quadrature for integrands with endpoint or interior
//! singularities.

mod ivp;
mod quad;
mod roots;

pub use ivp::{integrate_ivp, FnField, VectorField};
pub use quad::{quad_singular, QuadResult};
pub use roots::find_root;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Accuracy targets shared by the integrator, root finder and quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl ToleranceSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_steps: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::InvalidArgument(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if !(rel_tol >= 0.0) || !rel_tol.is_finite() {
            return Err(Error::InvalidArgument(format!("rel_tol must be non-negative, got {rel_tol}")));
        }
        if max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        Ok(Self { abs_tol, rel_tol, max_steps })
    }

    /// Defaults for ODE integration.
    pub fn ivp() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_steps: 1_000_000 }
    }

    /// Defaults for bracketed root finding.
    pub fn root() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 0.0, max_steps: 500 }
    }

    /// Defaults for singular quadrature.
    pub fn quad() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_steps: 20_000 }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        Self::new(self.abs_tol, self.rel_tol, self.max_steps).map(|_| ())
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self::ivp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceSpec::new(0.0, 0.0, 1).is_err());
        assert!(ToleranceSpec::new(1e-8, -1.0, 1).is_err());
        assert!(ToleranceSpec::new(1e-8, 0.0, 0).is_err());
        assert!(ToleranceSpec::new(1e-8, 0.0, 1).is_ok());
    }
}
