//! Refinement study of graph distances against Korányi and Euclidean distances.

use serde::Serialize;

use super::graph::{HorizontalGraph, Metric};
use super::search::{search, SearchOptions};
use super::stencil::Stencil;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::group::{euclidean, GroupSpec, Point};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub pair: usize,
    pub spacing: f64,
    pub graph: f64,
    pub koranyi: f64,
    pub euclidean: f64,
    pub ratio_koranyi: f64,
    pub ratio_euclidean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Per spacing, the least-squares slope of `log graph` against `log euclidean`.
    pub slopes: Vec<(f64, f64)>,
    /// Per spacing, the smallest and largest `graph / koranyi`.
    pub koranyi_band: Vec<(f64, f64, f64)>,
    /// Pairs whose successive refinement changes fail to shrink.
    pub unstable: Vec<usize>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_slope(&lx, &ly)
}

/// Graph distances for `pairs` at each spacing (decreasing), with the
/// Korányi and Euclidean distances of the snapped endpoints.
pub fn convergence_probe(
    g: &GroupSpec,
    dom: &DomainSpec,
    metric: &Metric,
    pairs: &[(Point, Point)],
    spacings: &[f64],
    stencil: &Stencil,
) -> Result<ProbeTable> {
    if spacings.len() < 2 || spacings.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::input("convergence probe needs at least two spacings in decreasing order"));
    }
    if pairs.is_empty() {
        return Err(Error::input("convergence probe needs at least one pair"));
    }
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut koranyi_band = Vec::new();
    for &h in spacings {
        let graph = HorizontalGraph::with_stencil(g, dom, h, stencil.clone())?;
        let mut per_spacing = Vec::with_capacity(pairs.len());
        for (i, (x, y)) in pairs.iter().enumerate() {
            let a = graph.node_near(x)?;
            let b = graph.node_near(y)?;
            let opts = SearchOptions { targets: vec![b], ..Default::default() };
            let d = search(&graph, metric, &[(a, 0.0)], &opts)?.value(b);
            let (pa, pb) = (Point(graph.point(a)), Point(graph.point(b)));
            let kor = g.koranyi_dist(&pa, &pb)?;
            let diff: Vec<f64> = pa.iter().zip(pb.iter()).map(|(u, v)| v - u).collect();
            let eu = euclidean(&diff);
            per_spacing.push(ProbeRow {
                pair: i,
                spacing: h,
                graph: d,
                koranyi: kor,
                euclidean: eu,
                ratio_koranyi: d / kor,
                ratio_euclidean: d / eu,
            });
        }
        let usable: Vec<&ProbeRow> = per_spacing.iter().filter(|r| r.graph > 0.0 && r.euclidean > 0.0).collect();
        let xs: Vec<f64> = usable.iter().map(|r| r.euclidean).collect();
        let ys: Vec<f64> = usable.iter().map(|r| r.graph).collect();
        slopes.push((h, loglog_slope(&xs, &ys).unwrap_or(f64::NAN)));
        let ratios = usable.iter().map(|r| r.ratio_koranyi);
        let lo = ratios.clone().fold(f64::INFINITY, f64::min);
        let hi = ratios.fold(f64::NEG_INFINITY, f64::max);
        koranyi_band.push((h, lo, hi));
        rows.extend(per_spacing);
    }
    let np = pairs.len();
    let unstable = (0..np)
        .filter(|&i| {
            let series: Vec<f64> = (0..spacings.len()).map(|s| rows[s * np + i].graph).collect();
            let steps: Vec<f64> = series.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            steps.windows(2).any(|w| w[1] > w[0] + 1e-12)
        })
        .collect();
    Ok(ProbeTable { rows, slopes, koranyi_band, unstable })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.2, 0.4, 0.8];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 0.5).abs() < 1e-12);
        assert!(fit_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn abelian_ratio_is_one() {
        let g = GroupSpec::abelian(2).unwrap();
        let dom = DomainSpec::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let pairs = vec![(Point::new([0.0, 0.0]), Point::new([1.0, 0.0])), (Point::new([0.0, 0.0]), Point::new([1.0, 1.0]))];
        let t = convergence_probe(&g, &dom, &Metric::Cc, &pairs, &[0.25, 0.125], &Stencil::new(2, 16).unwrap()).unwrap();
        assert_eq!(t.rows.len(), 4);
        for r in &t.rows {
            assert!((r.ratio_euclidean - 1.0).abs() < 1e-12);
        }
        assert!(t.unstable.is_empty());
    }

    #[test]
    fn rejects_bad_spacings() {
        let g = GroupSpec::abelian(2).unwrap();
        let dom = DomainSpec::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let pairs = vec![(Point::new([0.0, 0.0]), Point::new([1.0, 0.0]))];
        let s = Stencil::new(2, 4).unwrap();
        assert!(convergence_probe(&g, &dom, &Metric::Cc, &pairs, &[0.25], &s).is_err());
        assert!(convergence_probe(&g, &dom, &Metric::Cc, &pairs, &[0.125, 0.25], &s).is_err());
    }
}
