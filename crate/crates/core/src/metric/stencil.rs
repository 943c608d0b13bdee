//! Lattice-compatible horizontal moves.
//!
//! A move is a primitive integer vector `a ∈ Z^m`; the edge it generates from
//! `x` is the horizontal flow `x·(h a, 0)`, i.e. the unit control `a/|a|` held
//! for duration `h|a|`. Moves are grouped in symmetry classes (all sign changes
//! and coordinate permutations of one vector) and classes are added in order
//! of increasing length, so valid stencil sizes are cumulative class counts:
//! 4, 8, 16, 24, 32 for `m = 2`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ENTRY: i64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StencilDescriptor", into = "StencilDescriptor")]
pub struct Stencil {
    m: usize,
    moves: Vec<Vec<i64>>,
    controls: Vec<Vec<f64>>,
    norms: Vec<f64>,
    opposite: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StencilDescriptor {
    pub rank: usize,
    pub directions: usize,
}

impl TryFrom<StencilDescriptor> for Stencil {
    type Error = Error;
    fn try_from(d: StencilDescriptor) -> Result<Self> {
        Stencil::new(d.rank, d.directions)
    }
}

impl From<Stencil> for StencilDescriptor {
    fn from(s: Stencil) -> Self {
        StencilDescriptor { rank: s.m, directions: s.len() }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Symmetry classes in increasing length, each a sorted list of moves.
fn classes(m: usize) -> Vec<Vec<Vec<i64>>> {
    let mut by_key: BTreeMap<(i64, Vec<i64>), Vec<Vec<i64>>> = BTreeMap::new();
    let side = (2 * MAX_ENTRY + 1) as usize;
    let total = side.pow(m as u32);
    for code in 0..total {
        let mut rem = code;
        let v: Vec<i64> = (0..m)
            .map(|_| {
                let d = (rem % side) as i64 - MAX_ENTRY;
                rem /= side;
                d
            })
            .rev()
            .collect();
        let g = v.iter().fold(0, |acc, &x| gcd(acc, x));
        if g != 1 {
            continue;
        }
        let norm2: i64 = v.iter().map(|x| x * x).sum();
        // beyond this length the enumeration box no longer holds every class
        if norm2 > MAX_ENTRY * MAX_ENTRY {
            continue;
        }
        let mut key: Vec<i64> = v.iter().map(|x| x.abs()).collect();
        key.sort_unstable_by(|a, b| b.cmp(a));
        by_key.entry((norm2, key)).or_default().push(v);
    }
    by_key
        .into_values()
        .map(|mut c| {
            c.sort();
            c
        })
        .collect()
}

impl Stencil {
    /// Stencil holding exactly `directions` moves in `Z^m`.
    pub fn new(m: usize, directions: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("stencil rank must be positive"));
        }
        let mut moves = Vec::new();
        for class in classes(m) {
            if moves.len() == directions {
                break;
            }
            moves.extend(class);
        }
        if moves.len() != directions {
            return Err(Error::input(format!(
                "{directions} directions is not a valid stencil size for rank {m}; valid sizes are {:?}",
                Self::valid_sizes(m)
            )));
        }
        let norms: Vec<f64> = moves.iter().map(|a| (a.iter().map(|x| (x * x) as f64).sum::<f64>()).sqrt()).collect();
        let controls = moves
            .iter()
            .zip(&norms)
            .map(|(a, &n)| a.iter().map(|&x| x as f64 / n).collect())
            .collect();
        let opposite = moves
            .iter()
            .map(|a| {
                let neg: Vec<i64> = a.iter().map(|x| -x).collect();
                moves.iter().position(|b| *b == neg).expect("classes are closed under negation")
            })
            .collect();
        Ok(Stencil { m, moves, controls, norms, opposite })
    }

    /// Default for the rank: 16 moves in the plane, axes plus face diagonals otherwise.
    pub fn default_for(m: usize) -> Result<Self> {
        let sizes = Self::valid_sizes(m);
        let n = match m {
            2 => 16,
            _ => sizes[1.min(sizes.len() - 1)],
        };
        Self::new(m, n)
    }

    /// Cumulative class sizes.
    pub fn valid_sizes(m: usize) -> Vec<usize> {
        classes(m)
            .iter()
            .scan(0, |acc, c| {
                *acc += c.len();
                Some(*acc)
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Integer displacement of move `k` in first-layer lattice units.
    pub fn displacement(&self, k: usize) -> &[i64] {
        &self.moves[k]
    }

    pub fn displacement_f64(&self, k: usize) -> Vec<f64> {
        self.moves[k].iter().map(|&x| x as f64).collect()
    }

    /// Unit control `a/|a|`.
    pub fn control(&self, k: usize) -> &[f64] {
        &self.controls[k]
    }

    /// `|a|`: the duration of move `k` in units of the spacing.
    pub fn norm(&self, k: usize) -> f64 {
        self.norms[k]
    }

    pub fn opposite(&self, k: usize) -> usize {
        self.opposite[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_sizes() {
        assert_eq!(Stencil::valid_sizes(2), vec![4, 8, 16, 24, 32]);
        assert_eq!(Stencil::valid_sizes(1), vec![2]);
        assert_eq!(&Stencil::valid_sizes(3)[..3], &[6, 18, 26]);
    }

    #[test]
    fn four_neighbors() {
        let s = Stencil::new(2, 4).unwrap();
        let mut moves: Vec<_> = (0..4).map(|k| s.displacement(k).to_vec()).collect();
        moves.sort();
        assert_eq!(moves, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert!((0..4).all(|k| s.norm(k) == 1.0));
    }

    #[test]
    fn sixteen_directions_are_primitive_and_symmetric() {
        let s = Stencil::new(2, 16).unwrap();
        for k in 0..16 {
            let a = s.displacement(k);
            let b = s.displacement(s.opposite(k));
            assert_eq!(a[0], -b[0]);
            assert_eq!(a[1], -b[1]);
            let c = s.control(k);
            assert!(((c[0] * c[0] + c[1] * c[1]).sqrt() - 1.0).abs() < 1e-15);
        }
        assert!((0..16).any(|k| s.displacement(k) == [2, 1]));
    }

    #[test]
    fn invalid_sizes_rejected() {
        assert!(Stencil::new(2, 12).is_err());
        assert!(Stencil::new(2, 2).is_err());
        assert!(Stencil::new(0, 4).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = Stencil::new(2, 8).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"rank":2,"directions":8}"#);
        let back: Stencil = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
