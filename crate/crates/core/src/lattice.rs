//! Rectangular lattices anchored at the origin.
//!
//! Node coordinates are integer multiples of a per-coordinate spacing, so two
//! lattices with the same spacing share every node they both contain. Linear
//! indices are row-major with the last coordinate fastest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    spacing: Vec<f64>,
    lo: Vec<i64>,
    dims: Vec<usize>,
    strides: Vec<usize>,
}

const SNAP_EPS: f64 = 1e-9;

impl Lattice {
    /// All lattice nodes inside the closed box `bounds` (one `(lo, hi)` per coordinate).
    pub fn for_box(bounds: &[(f64, f64)], spacing: &[f64]) -> Result<Self> {
        if bounds.len() != spacing.len() || bounds.is_empty() {
            return Err(Error::input("box and spacing dimensions differ"));
        }
        let mut lo = Vec::with_capacity(bounds.len());
        let mut hi = Vec::with_capacity(bounds.len());
        for (&(a, b), &s) in bounds.iter().zip(spacing) {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::input(format!("spacing must be positive, got {s}")));
            }
            if !(a <= b) {
                return Err(Error::input(format!("empty interval [{a}, {b}]")));
            }
            let l = (a / s - SNAP_EPS).ceil() as i64;
            let h = (b / s + SNAP_EPS).floor() as i64;
            if h < l {
                return Err(Error::input(format!("interval [{a}, {b}] contains no node at spacing {s}")));
            }
            lo.push(l);
            hi.push(h);
        }
        Self::from_index_box(spacing.to_vec(), lo, hi)
    }

    pub fn from_index_box(spacing: Vec<f64>, lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        let dims: Vec<usize> = lo.iter().zip(&hi).map(|(&l, &h)| (h - l + 1).max(0) as usize).collect();
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t > 0 && t < u32::MAX as usize => {}
            Some(0) => return Err(Error::input("lattice has no nodes")),
            _ => return Err(Error::input("lattice too large for 32-bit node indices")),
        }
        let mut strides = vec![1usize; dims.len()];
        for c in (0..dims.len().saturating_sub(1)).rev() {
            strides[c] = strides[c + 1] * dims[c + 1];
        }
        Ok(Lattice { spacing, lo, dims, strides })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> Vec<i64> {
        self.lo.iter().zip(&self.dims).map(|(&l, &d)| l + d as i64 - 1).collect()
    }

    /// Linear index of the node with integer coordinates `idx`, if inside.
    #[inline]
    pub fn index_of(&self, idx: &[i64]) -> Option<usize> {
        let mut lin = 0usize;
        for c in 0..idx.len() {
            let off = idx[c] - self.lo[c];
            if off < 0 || off as usize >= self.dims[c] {
                return None;
            }
            lin += off as usize * self.strides[c];
        }
        Some(lin)
    }

    #[inline]
    pub fn coords_into(&self, node: usize, out: &mut [i64]) {
        let mut rem = node;
        for c in 0..self.dims.len() {
            out[c] = self.lo[c] + (rem / self.strides[c]) as i64;
            rem %= self.strides[c];
        }
    }

    pub fn coords_of(&self, node: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.coords_into(node, &mut out);
        out
    }

    #[inline]
    pub fn point_into(&self, node: usize, out: &mut [f64]) {
        let mut rem = node;
        for c in 0..self.dims.len() {
            out[c] = (self.lo[c] + (rem / self.strides[c]) as i64) as f64 * self.spacing[c];
            rem %= self.strides[c];
        }
    }

    pub fn point_of(&self, node: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(node, &mut out);
        out
    }

    /// Integer coordinates of the nearest lattice point (not necessarily inside).
    #[inline]
    pub fn snap_into(&self, p: &[f64], out: &mut [i64]) {
        for c in 0..p.len() {
            out[c] = (p[c] / self.spacing[c]).round() as i64;
        }
    }

    /// Nearest node inside the lattice box, if the snapped point is inside.
    pub fn nearest(&self, p: &[f64]) -> Option<usize> {
        if p.len() != self.dim() {
            return None;
        }
        let mut idx = vec![0; p.len()];
        self.snap_into(p, &mut idx);
        self.index_of(&idx)
    }

    /// Whether `p` lies in the closed bounding box of the nodes.
    pub fn covers(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().enumerate().all(|(c, &x)| {
                let f = x / self.spacing[c];
                f >= self.lo[c] as f64 - SNAP_EPS && f <= (self.lo[c] + self.dims[c] as i64 - 1) as f64 + SNAP_EPS
            })
    }

    /// Lower cell corner and fractional offsets for multilinear interpolation.
    pub(crate) fn locate(&self, p: &[f64], base: &mut [i64], frac: &mut [f64]) -> bool {
        if !self.covers(p) {
            return false;
        }
        for c in 0..p.len() {
            let f = p[c] / self.spacing[c];
            let hi = self.lo[c] + self.dims[c] as i64 - 1;
            let mut i0 = f.floor() as i64;
            let mut t = f - i0 as f64;
            if (1.0 - t) < SNAP_EPS {
                i0 += 1;
                t = 0.0;
            } else if t < SNAP_EPS {
                t = 0.0;
            }
            if i0 > hi {
                i0 = hi;
                t = 0.0;
            }
            if i0 < self.lo[c] {
                i0 = self.lo[c];
                t = 0.0;
            }
            if i0 == hi && t > 0.0 {
                // only reachable within SNAP_EPS of the upper face
                t = 0.0;
            }
            base[c] = i0;
            frac[c] = t;
        }
        true
    }
}
