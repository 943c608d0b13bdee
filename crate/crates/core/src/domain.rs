//! Bounded domains: a closed coordinate box, optionally cut down by a predicate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Predicate;
use crate::group::GroupSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interior: Option<Predicate>,
}

impl DomainSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::input("domain box needs at least one coordinate"));
        }
        for &(a, b) in &bounds {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::input(format!("domain interval [{a}, {b}] is empty or unbounded")));
            }
        }
        Ok(DomainSpec { bounds, interior: None })
    }

    pub fn with_interior(mut self, predicate: Predicate) -> Result<Self> {
        if predicate.arity() > self.bounds.len() {
            return Err(Error::input(format!(
                "interior predicate refers to coordinate {} of a {}-dimensional box",
                predicate.arity(),
                self.bounds.len()
            )));
        }
        self.interior = Some(predicate);
        Ok(self)
    }

    /// Checks dimensions after deserialization.
    pub fn validate(&self, g: &GroupSpec) -> Result<()> {
        if self.bounds.len() != g.dim() {
            return Err(Error::input(format!(
                "domain box has {} coordinates, group dimension is {}",
                self.bounds.len(),
                g.dim()
            )));
        }
        let copy = DomainSpec::new(self.bounds.clone())?;
        if let Some(p) = &self.interior {
            copy.with_interior(p.clone())?;
        }
        Ok(())
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn interior(&self) -> Option<&Predicate> {
        self.interior.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn in_box(&self, p: &[f64]) -> bool {
        const EPS: f64 = 1e-12;
        p.iter().zip(&self.bounds).all(|(&x, &(a, b))| x >= a - EPS * a.abs().max(1.0) && x <= b + EPS * b.abs().max(1.0))
    }

    /// Membership in the closure `Ω̄` (closed box and predicate).
    pub fn contains(&self, p: &[f64]) -> bool {
        self.in_box(p) && self.interior.as_ref().map_or(true, |pred| pred.eval(p))
    }

    /// Euclidean diameter of the box.
    pub fn box_diameter(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    /// Largest absolute first-layer coordinate in the box.
    fn first_layer_reach(&self, g: &GroupSpec) -> f64 {
        self.bounds[..g.rank()].iter().map(|&(a, b)| a.abs().max(b.abs())).fold(0.0, f64::max)
    }

    /// A box containing every point reachable from `Ω̄` by a horizontal curve of
    /// Euclidean control length `margin`: first-layer coordinates widen by
    /// `margin`, layer `j` by `(R + margin)^j - R^j` times the largest structure
    /// constant, with `R` the first-layer reach of the box.
    pub fn enlarged(&self, g: &GroupSpec, margin: f64) -> Result<DomainSpec> {
        if !(margin >= 0.0) {
            return Err(Error::input(format!("margin must be nonnegative, got {margin}")));
        }
        let reach = self.first_layer_reach(g);
        let c = crate::metric::graph::bracket_bound(g);
        let layers = g.coordinate_layers();
        let bounds = self
            .bounds
            .iter()
            .zip(layers)
            .map(|(&(a, b), j)| {
                let w = if j == 1 {
                    margin
                } else {
                    c.max(1.0) * ((reach + margin).powi(j as i32) - reach.powi(j as i32))
                };
                (a - w, b + w)
            })
            .collect();
        DomainSpec::new(bounds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_with_predicate() {
        let d = DomainSpec::new(vec![(0.0, 1.0), (0.0, 1.0)])
            .unwrap()
            .with_interior(Predicate::parse("(x1 - 0.5)^2 + (x2 - 0.5)^2 <= 0.25").unwrap())
            .unwrap();
        assert!(d.contains(&[0.5, 0.5]));
        assert!(d.contains(&[1.0, 0.5]));
        assert!(!d.contains(&[0.0, 0.0]));
        assert!(!d.contains(&[1.5, 0.5]));
    }

    #[test]
    fn enlarged_heisenberg_box() {
        let g = GroupSpec::heisenberg1();
        let d = DomainSpec::new(vec![(-0.5, 0.5), (-0.5, 0.5), (-0.1, 0.1)]).unwrap();
        let e = d.enlarged(&g, 0.25).unwrap();
        assert_eq!(e.bounds()[0], (-0.75, 0.75));
        // (0.5 + 0.25)^2 - 0.5^2 = 0.3125, bracket bound 1
        assert!((e.bounds()[2].1 - 0.4125).abs() < 1e-12);
    }

    #[test]
    fn serde_shape() {
        let d: DomainSpec = serde_json::from_str(r#"{"box": [[0, 1], [0, 2]], "interior": "x1 < x2"}"#).unwrap();
        assert_eq!(d.bounds(), &[(0.0, 1.0), (0.0, 2.0)]);
        assert!(d.contains(&[0.2, 0.5]));
        assert!(!d.contains(&[0.7, 0.5]));
    }
}
