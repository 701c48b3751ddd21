//! Numerical tolerances and the dense-materialization cap.

use std::sync::OnceLock;

/// All numerical thresholds used by invariant checks, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise deviation from the adjoint.
    pub herm: f64,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd: f64,
    /// Trace slack for semi-density and density checks.
    pub trace: f64,
    /// Eigenvalues at or below this are exact zeros for log and inverse.
    pub support: f64,
    /// Eigenvalues at or below this are outside the support of a pseudo-inverse.
    pub rank: f64,
    /// Smallest trace that may be normalized.
    pub norm: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        herm: 1e-10,
        psd: 1e-10,
        trace: 1e-9,
        support: 1e-10,
        rank: 1e-10,
        norm: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Threshold for projector equality and zero tests (operator norm).
pub const PROJ_TOL: f64 = 1e-8;

/// Default largest dimension a dense operator may have.
pub const DEFAULT_DENSE_CAP: usize = 8192;

/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "QMDL_DENSE_CAP";

/// Largest dimension any dense operation may produce.
pub fn dense_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(DENSE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&v: &usize| v > 0)
            .unwrap_or(DEFAULT_DENSE_CAP)
    })
}

pub(crate) fn check_cap(dim: usize) -> crate::Result<()> {
    let cap = dense_cap();
    if dim > cap {
        Err(crate::Error::SizeCap { dim, cap })
    } else {
        Ok(())
    }
}

/// `base^exp` for dimensions, saturating instead of overflowing.
pub(crate) fn checked_pow(base: usize, exp: usize) -> crate::Result<usize> {
    let mut out: usize = 1;
    for _ in 0..exp {
        out = out.checked_mul(base).ok_or(crate::Error::SizeCap {
            dim: usize::MAX,
            cap: dense_cap(),
        })?;
        check_cap(out)?;
    }
    Ok(out)
}
