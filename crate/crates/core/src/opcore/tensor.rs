//! Kronecker products, partial traces and single-site actions on
//! multipartite operators.

use nalgebra::DMatrix;

use super::{Op, C64};
use crate::tol::check_cap;
use crate::{Error, Result};

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &Op, b: &Op) -> Result<Op> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::SizeCap { dim: usize::MAX, cap: crate::tol::dense_cap() })?;
    check_cap(dim)?;
    Ok(Op::from_matrix_unchecked(a.matrix().kronecker(b.matrix())))
}

/// `A^{⊗n}`; `n = 0` gives the 1×1 identity.
pub fn tensor_power(a: &Op, n: usize) -> Result<Op> {
    crate::tol::checked_pow(a.dim(), n)?;
    let mut out = Op::identity(1);
    for _ in 0..n {
        out = tensor(&out, a)?;
    }
    Ok(out)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_dims(t: &Op, dims: &[usize], site: usize) -> Result<()> {
    let total: usize = dims.iter().product();
    if total != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: t.dim(),
        });
    }
    if site >= dims.len() {
        return Err(Error::DimensionMismatch {
            expected: dims.len(),
            found: site,
        });
    }
    Ok(())
}

/// Traces out factor `site` of an operator on `dims[0] ⊗ dims[1] ⊗ …`.
pub fn partial_trace(t: &Op, dims: &[usize], site: usize) -> Result<Op> {
    check_dims(t, dims, site)?;
    let d = dims[site];
    let st = strides(dims)[site];
    let out_dim = t.dim() / d;
    // Split an index of the reduced space into (high, low) around the site.
    let expand = |r: usize, x: usize| {
        let high = r / st;
        let low = r % st;
        high * st * d + x * st + low
    };
    let m = t.matrix();
    let out = DMatrix::from_fn(out_dim, out_dim, |i, j| {
        (0..d).map(|x| m[(expand(i, x), expand(j, x))]).sum::<C64>()
    });
    Ok(Op::from_matrix_unchecked(out))
}

/// `(I ⊗ L ⊗ I) T (I ⊗ R ⊗ I)` with `L`, `R` acting on factor `site`.
/// A missing side is the identity.
pub fn apply_site(
    t: &Op,
    dims: &[usize],
    site: usize,
    left: Option<&Op>,
    right: Option<&Op>,
) -> Result<Op> {
    check_dims(t, dims, site)?;
    let d = dims[site];
    for op in [left, right].into_iter().flatten() {
        if op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: op.dim(),
            });
        }
    }
    let st = strides(dims)[site];
    let n = t.dim();
    let digit = |a: usize| (a / st) % d;
    let with = |a: usize, x: usize| a - digit(a) * st + x * st;

    let mut m = t.matrix().clone();
    if let Some(l) = left {
        let l = l.matrix();
        let src = m.clone();
        m = DMatrix::from_fn(n, n, |a, b| {
            let ad = digit(a);
            (0..d).map(|x| l[(ad, x)] * src[(with(a, x), b)]).sum()
        });
    }
    if let Some(r) = right {
        let r = r.matrix();
        let src = m.clone();
        m = DMatrix::from_fn(n, n, |a, b| {
            let bd = digit(b);
            (0..d).map(|y| src[(a, with(b, y))] * r[(y, bd)]).sum()
        });
    }
    Ok(Op::from_matrix_unchecked(m))
}
