//! Dense complex-matrix kernel.
//!
//! [`Op`] is a square complex matrix with finite entries. The wrappers
//! [`HermOp`], [`SemiDensity`] and [`Density`] add progressively stricter
//! invariants, checked once at construction against [`Tolerances::DEFAULT`].
//! Every wrapper dereferences to the weaker type, so read-only operations
//! written for `Op` accept all of them.

mod literal;
mod spectral;
mod tensor;

pub use literal::MatrixLiteral;
pub use spectral::{
    eigh, func_calculus, log_psd, norms, pinv_sqrt, power_psd, sqrt_psd, LogBase, Norms, Spectrum,
    SupportMode,
};
pub(crate) use spectral::support_projector;
pub use tensor::{apply_site, partial_trace, tensor, tensor_power};

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;
use nalgebra::Complex;

use crate::tol::{check_cap, Tolerances};
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    m: DMatrix<C64>,
}

impl Op {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        check_cap(m.nrows())?;
        Ok(Op { m })
    }

    /// Builds from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Op::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds from real row-major rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Op::from_rows(dim, &data)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Op { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Op {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Op {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Op { m }
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn outer(v: &[C64]) -> Self {
        let d = v.len();
        Op {
            m: DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()),
        }
    }

    pub fn pauli_x() -> Self {
        Op::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("static 2x2")
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        Op::from_rows(2, &[C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]).expect("static 2x2")
    }

    pub fn pauli_z() -> Self {
        Op::diag(&[1.0, -1.0])
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Op::from_real_rows(&[&[s, s], &[s, -s]]).expect("static 2x2")
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn adjoint(&self) -> Op {
        Op {
            m: self.m.adjoint(),
        }
    }

    pub fn scale(&self, s: f64) -> Op {
        Op { m: &self.m * C64::new(s, 0.0) }
    }

    pub fn scale_c(&self, s: C64) -> Op {
        Op { m: &self.m * s }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Op) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the adjoint.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm, the trace-inner-product norm `sqrt(Tr(T†T))`.
    pub fn frobenius(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator (spectral) norm.
    pub fn op_norm(&self) -> f64 {
        norms(self).op_norm
    }

    pub fn commutator(&self, other: &Op) -> Op {
        self * other - other * self
    }

    /// `(T + T†)/2`, used to strip rounding noise from results that are
    /// Hermitian in exact arithmetic.
    pub fn hermitian_part(&self) -> Op {
        Op {
            m: (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    pub(crate) fn check_same_dim(&self, other: &Op) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint() * self;
        prod.max_abs_diff(&Op::identity(self.dim()))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&Op> for &Op {
            type Output = Op;
            fn $f(self, rhs: &Op) -> Op {
                Op { m: &self.m $op &rhs.m }
            }
        }
        impl $tr<Op> for Op {
            type Output = Op;
            fn $f(self, rhs: Op) -> Op {
                Op { m: self.m $op rhs.m }
            }
        }
        impl $tr<&Op> for Op {
            type Output = Op;
            fn $f(self, rhs: &Op) -> Op {
                Op { m: self.m $op &rhs.m }
            }
        }
        impl $tr<Op> for &Op {
            type Output = Op;
            fn $f(self, rhs: Op) -> Op {
                Op { m: &self.m $op rhs.m }
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        Op { m: -&self.m }
    }
}

/// A Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermOp(Op);

impl HermOp {
    pub fn new(op: Op) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > Tolerances::DEFAULT.herm {
            return Err(Error::NotHermitian(defect));
        }
        Ok(HermOp(op))
    }

    /// Takes the Hermitian part of an operator known to be Hermitian up to
    /// rounding.
    pub(crate) fn from_op_unchecked(op: Op) -> Self {
        HermOp(op.hermitian_part())
    }

    pub fn as_op(&self) -> &Op {
        &self.0
    }

    pub fn into_op(self) -> Op {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(self).values.first().copied().unwrap_or(0.0)
    }
}

impl Deref for HermOp {
    type Target = Op;
    fn deref(&self) -> &Op {
        &self.0
    }
}

/// A positive semidefinite operator with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiDensity(HermOp);

impl SemiDensity {
    pub fn new(op: Op) -> Result<Self> {
        SemiDensity::from_herm(HermOp::new(op)?)
    }

    pub fn from_herm(h: HermOp) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        let tr = h.trace();
        if tr.re > 1.0 + tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::TraceOutOfRange { re: tr.re, im: tr.im });
        }
        let min = h.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::NotPsd(min));
        }
        Ok(SemiDensity(h))
    }

    pub fn as_herm(&self) -> &HermOp {
        &self.0
    }

    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    /// Normalization `T / Tr(T)`.
    pub fn normalize(&self) -> Result<Density> {
        normalize(self)
    }
}

impl Deref for SemiDensity {
    type Target = HermOp;
    fn deref(&self) -> &HermOp {
        &self.0
    }
}

/// A density matrix: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Density(SemiDensity);

impl Density {
    pub fn new(op: Op) -> Result<Self> {
        Density::from_semi(SemiDensity::new(op)?)
    }

    pub fn from_semi(s: SemiDensity) -> Result<Self> {
        let tr = s.trace();
        if (tr.re - 1.0).abs() > Tolerances::DEFAULT.trace {
            return Err(Error::TraceOutOfRange { re: tr.re, im: tr.im });
        }
        Ok(Density(s))
    }

    /// Wraps an operator that is a density matrix up to rounding.
    pub(crate) fn from_op_unchecked(op: Op) -> Self {
        Density(SemiDensity(HermOp::from_op_unchecked(op)))
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Density::new(Op::diag(p))
    }

    /// Pure state `|v><v|` of a normalized vector.
    pub fn pure(v: &[C64]) -> Result<Self> {
        Density::new(Op::outer(v))
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Density::from_op_unchecked(Op::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn as_semi(&self) -> &SemiDensity {
        &self.0
    }

    pub fn into_semi(self) -> SemiDensity {
        self.0
    }

    /// `w · ρ` as a semi-density matrix, for `0 < w <= 1`.
    pub fn weighted(&self, w: f64) -> Result<SemiDensity> {
        SemiDensity::new(self.scale(w))
    }
}

impl Deref for Density {
    type Target = SemiDensity;
    fn deref(&self) -> &SemiDensity {
        &self.0
    }
}

impl AsRef<Op> for Op {
    fn as_ref(&self) -> &Op {
        self
    }
}

impl AsRef<Op> for HermOp {
    fn as_ref(&self) -> &Op {
        &self.0
    }
}

impl AsRef<Op> for SemiDensity {
    fn as_ref(&self) -> &Op {
        self.0.as_op()
    }
}

impl AsRef<Op> for Density {
    fn as_ref(&self) -> &Op {
        self.0 .0.as_op()
    }
}

/// Maps a nonzero semi-density matrix to its density matrix `T / Tr(T)`.
pub fn normalize(t: &SemiDensity) -> Result<Density> {
    let tr = t.trace().re;
    if tr <= Tolerances::DEFAULT.norm {
        return Err(Error::ZeroTrace(tr));
    }
    Ok(Density::from_op_unchecked(t.scale(1.0 / tr)))
}
