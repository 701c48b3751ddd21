//! Hermitian eigendecomposition and the functional calculus built on it.

use nalgebra::DMatrix;

use super::{HermOp, Op, C64};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Eigen-decomposition `T = V diag(λ) V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Op {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = C64::new(f(lambda), 0.0);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        Op::from_matrix_unchecked(scaled * self.vectors.adjoint())
    }

    pub fn reconstruct(&self) -> Op {
        self.map(|x| x)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Column `j` of the eigenvector matrix.
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j).iter().copied().collect()
    }
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
pub fn eigh(t: &HermOp) -> Spectrum {
    eigh_raw(t.as_op())
}

pub(crate) fn eigh_raw(t: &Op) -> Spectrum {
    let d = t.dim();
    if d == 0 {
        return Spectrum {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let h = t.hermitian_part().into_matrix();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Spectrum { values, vectors }
}

/// Applies `f` to the eigenvalues of `t`.
pub fn func_calculus(t: &HermOp, f: impl Fn(f64) -> f64) -> HermOp {
    HermOp::from_op_unchecked(eigh(t).map(f))
}

/// How eigenvalues near zero are treated by the PSD functional calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportMode {
    /// Eigenvalues in `[-psd, support]` are exact zeros: mapped to zero by
    /// roots and powers, excluded (mapped to zero) by logarithms.
    #[default]
    Lenient,
    /// Logarithms fail on any eigenvalue `<= support`; roots and powers
    /// fail on negative eigenvalues.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn ln_scale(self) -> f64 {
        match self {
            LogBase::Bits => std::f64::consts::LN_2,
            LogBase::Nats => 1.0,
        }
    }

    pub fn log(self, x: f64) -> f64 {
        x.ln() / self.ln_scale()
    }

    pub fn tag(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

fn check_psd(spec: &Spectrum) -> Result<()> {
    let min = spec.min();
    if min < -Tolerances::DEFAULT.psd {
        return Err(Error::Domain(min));
    }
    Ok(())
}

/// `T^p` for positive semidefinite `T` and `p > 0`.
pub fn power_psd(t: &HermOp, p: f64, mode: SupportMode) -> Result<HermOp> {
    let spec = eigh(t);
    check_psd(&spec)?;
    let cut = Tolerances::DEFAULT.support;
    let lenient = mode == SupportMode::Lenient;
    Ok(HermOp::from_op_unchecked(spec.map(|x| {
        if x <= 0.0 || (lenient && x <= cut) {
            0.0
        } else {
            x.powf(p)
        }
    })))
}

pub fn sqrt_psd(t: &HermOp, mode: SupportMode) -> Result<HermOp> {
    let spec = eigh(t);
    check_psd(&spec)?;
    let cut = Tolerances::DEFAULT.support;
    let lenient = mode == SupportMode::Lenient;
    Ok(HermOp::from_op_unchecked(spec.map(|x| {
        if x <= 0.0 || (lenient && x <= cut) {
            0.0
        } else {
            x.sqrt()
        }
    })))
}

/// Matrix logarithm on the support of a positive semidefinite operator.
pub fn log_psd(t: &HermOp, base: LogBase, mode: SupportMode) -> Result<HermOp> {
    let spec = eigh(t);
    check_psd(&spec)?;
    let cut = Tolerances::DEFAULT.support;
    if mode == SupportMode::Strict {
        if let Some(&bad) = spec.values.iter().find(|&&x| x <= cut) {
            return Err(Error::Domain(bad));
        }
    }
    Ok(HermOp::from_op_unchecked(spec.map(|x| {
        if x <= cut {
            0.0
        } else {
            base.log(x)
        }
    })))
}

/// Pseudo-inverse square root: eigenvalues above `rank_tol` go to
/// `λ^(-1/2)`, the rest to zero.
pub fn pinv_sqrt(t: &HermOp, rank_tol: f64) -> Result<HermOp> {
    let spec = eigh(t);
    check_psd(&spec)?;
    Ok(HermOp::from_op_unchecked(spec.map(|x| {
        if x > rank_tol {
            1.0 / x.sqrt()
        } else {
            0.0
        }
    })))
}

/// Projector onto the eigenspaces with eigenvalue above `tol`.
pub(crate) fn support_projector(t: &HermOp, tol: f64) -> Op {
    eigh(t).map(|x| if x > tol { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// Largest singular value.
    pub op_norm: f64,
    /// `sqrt(Tr(T†T))`.
    pub trace_inner_norm: f64,
}

/// Operator norm and trace-inner-product norm.
pub fn norms(t: &Op) -> Norms {
    // Largest eigenvalue of T†T is the squared largest singular value.
    let gram = t.adjoint() * t;
    let top = eigh_raw(&gram).max().max(0.0);
    Norms {
        op_norm: top.sqrt(),
        trace_inner_norm: t.frobenius(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::Density;

    #[test]
    fn pauli_x_spectrum_and_norms() {
        let x = HermOp::new(Op::pauli_x()).unwrap();
        let s = eigh(&x);
        assert!((s.values[0] + 1.0).abs() < 1e-14);
        assert!((s.values[1] - 1.0).abs() < 1e-14);
        let n = norms(&Op::pauli_x());
        assert!((n.op_norm - 1.0).abs() < 1e-14);
        assert!((n.trace_inner_norm - 2f64.sqrt()).abs() < 1e-14);
        let z = norms(&Op::zeros(3));
        assert_eq!(z.op_norm, 0.0);
        assert_eq!(z.trace_inner_norm, 0.0);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let t = HermOp::new(Op::diag(&[4.0, 9.0])).unwrap();
        let r = sqrt_psd(&t, SupportMode::Strict).unwrap();
        assert!(r.max_abs_diff(&Op::diag(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn pinv_sqrt_examples() {
        let t = HermOp::new(Op::diag(&[4.0, 0.0])).unwrap();
        let r = pinv_sqrt(&t, 1e-10).unwrap();
        assert!(r.max_abs_diff(&Op::diag(&[0.5, 0.0])) < 1e-14);
        let i = HermOp::new(Op::identity(3)).unwrap();
        assert!(pinv_sqrt(&i, 1e-10).unwrap().max_abs_diff(&Op::identity(3)) < 1e-14);
    }

    #[test]
    fn log_support_modes() {
        let rho = Density::new(Op::diag(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            log_psd(&rho, LogBase::Bits, SupportMode::Strict),
            Err(Error::Domain(_))
        ));
        let l = log_psd(&rho, LogBase::Bits, SupportMode::Lenient).unwrap();
        assert!(l.max_abs_diff(&Op::zeros(2)) < 1e-14);
        let half = Density::maximally_mixed(2);
        let l = log_psd(&half, LogBase::Bits, SupportMode::Strict).unwrap();
        assert!(l.max_abs_diff(&Op::diag(&[-1.0, -1.0])) < 1e-14);
    }

    #[test]
    fn negative_input_is_a_domain_error() {
        let t = HermOp::new(Op::diag(&[1.0, -0.5])).unwrap();
        assert!(matches!(sqrt_psd(&t, SupportMode::Lenient), Err(Error::Domain(_))));
    }
}
