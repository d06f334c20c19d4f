//! Subsystem bookkeeping on tensor-product spaces: embeddings, partial traces and
//! factor permutations. Factor 0 is the most significant index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};

/// Splits every full-space index into a (selected-slots, remaining-slots) pair:
/// `full = slot_offsets[a] + rest_offsets[r]`.
#[derive(Debug, Clone)]
pub struct SlotSplit {
    pub slot_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl SlotSplit {
    pub fn new(dims: &[usize], slots: &[usize]) -> Result<Self> {
        check_slots(dims, slots)?;
        let total = dims.len();
        let mut strides = vec![1usize; total];
        for k in (0..total.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let rest: Vec<usize> = (0..total).filter(|k| !slots.contains(k)).collect();
        Ok(Self {
            slot_offsets: offsets(dims, &strides, slots),
            rest_offsets: offsets(dims, &strides, &rest),
        })
    }

    #[inline]
    pub fn slot_dim(&self) -> usize {
        self.slot_offsets.len()
    }

    #[inline]
    pub fn rest_dim(&self) -> usize {
        self.rest_offsets.len()
    }
}

fn offsets(dims: &[usize], strides: &[usize], slots: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in slots {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for i in 0..dims[s] {
                next.push(base + i * strides[s]);
            }
        }
        out = next;
    }
    out
}

fn check_slots(dims: &[usize], slots: &[usize]) -> Result<()> {
    for (i, &s) in slots.iter().enumerate() {
        if s >= dims.len() {
            return Err(Error::InvalidSlots(format!(
                "slot {} out of range for {} factors",
                s,
                dims.len()
            )));
        }
        if slots[..i].contains(&s) {
            return Err(Error::InvalidSlots(format!("slot {} repeated", s)));
        }
    }
    Ok(())
}

pub fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Operator acting as `op` on `slots` (in the given order) and as the identity elsewhere.
pub fn embed(op: &ComplexMatrix, dims: &[usize], slots: &[usize]) -> Result<ComplexMatrix> {
    let split = SlotSplit::new(dims, slots)?;
    if !op.is_square() || op.rows() != split.slot_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {}x{} embedded on slots of total dimension {}",
            op.rows(),
            op.cols(),
            split.slot_dim()
        )));
    }
    let d = total_dim(dims);
    let mut out = ComplexMatrix::zeros(d, d);
    for &r in &split.rest_offsets {
        for (a, &ra) in split.slot_offsets.iter().enumerate() {
            for (b, &cb) in split.slot_offsets.iter().enumerate() {
                let v = op[(a, b)];
                if v != ZERO {
                    out[(ra + r, cb + r)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace of a square operator keeping `keep` (output factors in that order).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidSlots("empty keep list".into()));
    }
    let split = SlotSplit::new(dims, keep)?;
    if !m.is_square() || m.rows() != total_dim(dims) {
        return Err(Error::DimensionMismatch(format!(
            "matrix of size {}x{} on factors {:?}",
            m.rows(),
            m.cols(),
            dims
        )));
    }
    Ok(partial_trace_split(m, &split))
}

pub(crate) fn partial_trace_split(m: &ComplexMatrix, split: &SlotSplit) -> ComplexMatrix {
    let ds = split.slot_dim();
    let mut out = ComplexMatrix::zeros(ds, ds);
    for (a, &ra) in split.slot_offsets.iter().enumerate() {
        for (b, &cb) in split.slot_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &r in &split.rest_offsets {
                acc += m[(ra + r, cb + r)];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Reorders factors so that `order[k]` becomes factor `k` of the result.
pub fn permute_factors(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    if order.len() != dims.len() {
        return Err(Error::InvalidSlots(format!(
            "permutation of length {} for {} factors",
            order.len(),
            dims.len()
        )));
    }
    let split = SlotSplit::new(dims, order)?;
    let d = total_dim(dims);
    if !m.is_square() || m.rows() != d {
        return Err(Error::DimensionMismatch(format!(
            "matrix of size {}x{} on factors {:?}",
            m.rows(),
            m.cols(),
            dims
        )));
    }
    let off = &split.slot_offsets;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| m[(off[i], off[j])]))
}

/// Brings `slots` to the front: the result acts on `slots ⊗ rest` with the selected factors
/// leading, so an embedded operator becomes `op ⊗ I_rest`.
pub(crate) fn move_to_front(m: &ComplexMatrix, split: &SlotSplit) -> ComplexMatrix {
    let dr = split.rest_dim();
    let d = split.slot_dim() * dr;
    let full = |k: usize| split.slot_offsets[k / dr] + split.rest_offsets[k % dr];
    ComplexMatrix::from_fn(d, d, |i, j| m[(full(i), full(j))])
}

/// `(op ⊗ I_rest) · x` for `x` in front-loaded layout.
pub(crate) fn left_apply_front(op: &ComplexMatrix, x: &ComplexMatrix, rest: usize) -> ComplexMatrix {
    let ds = op.rows();
    let cols = x.cols();
    let mut out = ComplexMatrix::zeros(ds * rest, cols);
    for a in 0..ds {
        for b in 0..ds {
            let u = op[(a, b)];
            if u == ZERO {
                continue;
            }
            for r in 0..rest {
                let src = x.row(b * rest + r);
                let dst_row = (a * rest + r) * cols;
                let dst = &mut out.data_mut()[dst_row..dst_row + cols];
                for (o, &s) in dst.iter_mut().zip(src) {
                    *o += u * s;
                }
            }
        }
    }
    out
}

/// `x · (op ⊗ I_rest)†` for `x` in front-loaded layout.
pub(crate) fn right_apply_dagger_front(x: &ComplexMatrix, op: &ComplexMatrix, rest: usize) -> ComplexMatrix {
    let ds = op.rows();
    let rows = x.rows();
    let mut out = ComplexMatrix::zeros(rows, ds * rest);
    for i in 0..rows {
        let xr = x.row(i);
        for a in 0..ds {
            for r in 0..rest {
                let mut acc = ZERO;
                for b in 0..ds {
                    acc += xr[b * rest + r] * op[(a, b)].conj();
                }
                out[(i, a * rest + r)] = acc;
            }
        }
    }
    out
}

/// Partial trace over the trailing `rest` factor of a front-loaded operator.
#[cfg(test)]
pub(crate) fn trace_rest_front(x: &ComplexMatrix, rest: usize) -> ComplexMatrix {
    let ds = x.rows() / rest;
    ComplexMatrix::from_fn(ds, ds, |a, b| {
        let mut acc = ZERO;
        for r in 0..rest {
            acc += x[(a * rest + r, b * rest + r)];
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{C64, ONE};

    fn x_gate() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    fn swap(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d * d, d * d, |i, j| {
            let (a, b) = (j / d, j % d);
            if i == b * d + a {
                ONE
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn embed_single_factor_is_identity_map() {
        let u = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(embed(&u, &[3], &[0]).unwrap(), u);
    }

    #[test]
    fn embed_adjacent_slot() {
        let e = embed(&x_gate(), &[2, 2], &[1]).unwrap();
        assert_eq!(e, ComplexMatrix::identity(2).kron(&x_gate()));
    }

    #[test]
    fn embed_swap_on_outer_slots_reverses_kets() {
        let e = embed(&swap(2), &[2, 2, 2], &[0, 2]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let mut ket = vec![ZERO; 8];
                    ket[a * 4 + b * 2 + c] = ONE;
                    let out = e.matvec(&ket);
                    let mut expect = vec![ZERO; 8];
                    expect[c * 4 + b * 2 + a] = ONE;
                    assert_eq!(out, expect, "|{}{}{}>", a, b, c);
                }
            }
        }
    }

    #[test]
    fn embed_rejects_bad_slots() {
        assert!(matches!(
            embed(&swap(2), &[2, 2, 2], &[0, 0]),
            Err(Error::InvalidSlots(_))
        ));
        assert!(matches!(
            embed(&x_gate(), &[2, 2], &[2]),
            Err(Error::InvalidSlots(_))
        ));
        assert!(matches!(
            embed(&x_gate(), &[3, 2], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn out_of_order_slots_transpose_the_factors() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(0.0, (i * j) as f64 + 1.0));
        let ab = embed(&a.kron(&b), &[3, 2], &[1, 0]).unwrap();
        assert!(ab.max_abs_diff(&b.kron(&a)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[]),
            Err(Error::InvalidSlots(_))
        ));
        assert!(partial_trace(&m, &[2, 2], &[3]).is_err());
    }

    #[test]
    fn partial_trace_keep_all_in_order_is_identity_op() {
        let m = ComplexMatrix::from_fn(6, 6, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(partial_trace(&m, &[2, 3], &[0, 1]).unwrap(), m);
    }

    #[test]
    fn front_layout_helpers_agree_with_embed() {
        let dims = [2, 3, 2];
        let slots = [2, 0];
        let split = SlotSplit::new(&dims, &slots).unwrap();
        let u = ComplexMatrix::from_fn(4, 4, |i, j| C64::new((i * 4 + j) as f64 * 0.1, (i as f64) - (j as f64)));
        let x = ComplexMatrix::from_fn(12, 12, |i, j| C64::new((i + j) as f64, (i * j) as f64 * 0.01));
        let full = embed(&u, &dims, &slots).unwrap().matmul(&x);
        let xf = move_to_front(&x, &split);
        let front = left_apply_front(&u, &xf, split.rest_dim());
        assert!(move_to_front(&full, &split).max_abs_diff(&front) < 1e-12);
        let right = x.matmul(&embed(&u, &dims, &slots).unwrap().dagger());
        let rf = right_apply_dagger_front(&xf, &u, split.rest_dim());
        assert!(move_to_front(&right, &split).max_abs_diff(&rf) < 1e-12);
        let pt = partial_trace(&x, &dims, &slots).unwrap();
        assert!(pt.max_abs_diff(&trace_rest_front(&xf, split.rest_dim())) < 1e-12);
    }
}
