//! CSV import and export. Floats are written with 17 significant digits so
//! that every value round-trips bit for bit; lines end in `\n`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::Point;
use crate::hopf_lax::{BoundaryDatum, Provenance};
use crate::metric::{DistanceField, Path};

/// `{:.16e}`; non-finite values print as `inf`, `-inf` and `NaN`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(w: &mut impl Write, first: Option<&str>, n: usize, last: &str) -> Result<()> {
    let mut cols: Vec<String> = first.map(str::to_owned).into_iter().collect();
    cols.extend((1..=n).map(|i| format!("y{i}")));
    cols.push(last.to_owned());
    writeln!(w, "{}", cols.join(","))?;
    Ok(())
}

fn row(w: &mut impl Write, first: Option<usize>, coords: &[f64], last: f64) -> Result<()> {
    let mut line = String::with_capacity(24 * (coords.len() + 2));
    if let Some(i) = first {
        line.push_str(&i.to_string());
        line.push(',');
    }
    for c in coords {
        line.push_str(&fmt_f64(*c));
        line.push(',');
    }
    line.push_str(&fmt_f64(last));
    line.push('\n');
    w.write_all(line.as_bytes())?;
    Ok(())
}

/// `node_index,y1..yn,value` for every reached node.
pub fn write_distance_csv(w: &mut impl Write, field: &DistanceField) -> Result<()> {
    let lat = field.lattice();
    header(w, Some("node_index"), lat.dim(), "value")?;
    let mut p = vec![0.0; lat.dim()];
    for (n, &v) in field.values().iter().enumerate() {
        if v.is_finite() {
            lat.point_into(n, &mut p);
            row(w, Some(n), &p, v)?;
        }
    }
    Ok(())
}

/// `step,y1..yn,cumcost`.
pub fn write_path_csv(w: &mut impl Write, path: &Path) -> Result<()> {
    let n = path.points.first().map_or(0, Vec::len);
    header(w, Some("step"), n, "cumcost")?;
    for (i, (p, c)) in path.points.iter().zip(&path.cumcost).enumerate() {
        row(w, Some(i), p, *c)?;
    }
    Ok(())
}

/// `y1..yn,w` for every node of `u` that is not `NaN`.
pub fn write_solution_csv(w: &mut impl Write, u: &ScalarField) -> Result<()> {
    let lat = u.lattice();
    header(w, None, lat.dim(), "w")?;
    let mut p = vec![0.0; lat.dim()];
    for (n, &v) in u.values().iter().enumerate() {
        if !v.is_nan() {
            lat.point_into(n, &mut p);
            row(w, None, &p, v)?;
        }
    }
    Ok(())
}

/// `y1..yn,g`.
pub fn write_boundary_csv(w: &mut impl Write, datum: &BoundaryDatum) -> Result<()> {
    let n = datum.samples()[0].0.coords().len();
    header(w, None, n, "g")?;
    for (p, g) in datum.samples() {
        row(w, None, p.coords(), *g)?;
    }
    Ok(())
}

/// Reads `y1..yn,g` with a header line. The datum is marked tabulated.
pub fn read_boundary_csv(r: impl Read) -> Result<BoundaryDatum> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let width = rdr.headers().map_err(csv_err)?.len();
    if width < 2 {
        return Err(Error::input("boundary CSV needs at least one coordinate column and g"));
    }
    let mut samples = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::input(format!("row {}: {s:?}: {e}", line + 1))))
            .collect::<Result<_>>()?;
        let (g, y) = vals.split_last().expect("width checked");
        samples.push((Point::new(y.to_vec()), *g));
    }
    BoundaryDatum::new(samples, Provenance::Tabulated)
}

fn csv_err(e: csv::Error) -> Error {
    Error::input(format!("boundary CSV: {e}"))
}
