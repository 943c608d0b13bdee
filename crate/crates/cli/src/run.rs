//! Task dispatch, artifact writing and the run manifest.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use subhj_core::export::{fmt_f64, read_boundary_csv, write_boundary_csv, write_distance_csv, write_path_csv, write_solution_csv};
use subhj_core::hopf_lax::{check_bcc, default_margin, global_graph, solve_dirichlet, BoundaryDatum};
use subhj_core::metric::{convergence_probe, extract_path, search, SearchOptions};
use subhj_core::verify::{
    ae_subsolution_check, comparison_harness, monge_report, stability_harness, Requirement,
};
use subhj_core::{
    validate, Direction, DomainSpec, Field, FnField, Formula, GroupSpec, Hamiltonian, HorizontalGraph, Metric, Point,
    Stencil,
};

use crate::config::*;

#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Validation(String),
    Task(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Task(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Validation(m) | Failure::Task(m) => m,
        }
    }
}

impl From<subhj_core::Error> for Failure {
    fn from(e: subhj_core::Error) -> Self {
        Failure::Task(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Task(e.to_string())
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Validation(e.to_string())
}

fn bad_params(e: impl ToString) -> Failure {
    Failure::Parse(format!("params: {}", e.to_string()))
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub spacing: Option<f64>,
}

struct Ctx {
    cfg: RunConfig,
    base: PathBuf,
    out: PathBuf,
    files: BTreeSet<String>,
    rng: ChaCha8Rng,
    h: Hamiltonian,
    k: Hamiltonian,
    stencil: Stencil,
}

impl Ctx {
    fn g(&self) -> &GroupSpec {
        &self.cfg.group
    }

    fn omega(&self) -> &DomainSpec {
        &self.cfg.domain
    }

    fn spacing(&self) -> f64 {
        self.cfg.grid.spacing
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, Failure> {
        self.files.insert(name.to_owned());
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Task(e.to_string()))?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    fn write_csv(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> subhj_core::Result<()>,
    ) -> Result<(), Failure> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn domain_graph(&self) -> Result<HorizontalGraph, Failure> {
        Ok(HorizontalGraph::with_stencil(self.g(), self.omega(), self.spacing(), self.stencil.clone())?)
    }

    fn extended_graph(&self) -> Result<HorizontalGraph, Failure> {
        let margin = self.cfg.margin.unwrap_or_else(|| default_margin(self.omega(), self.h.alpha()));
        log::info!("building extended graph, margin {margin}");
        Ok(global_graph(self.g(), self.omega(), self.spacing(), self.stencil.clone(), margin)?)
    }

    fn formula(&self, src: &str) -> Result<Formula, Failure> {
        let f = Formula::parse(src).map_err(|e| Failure::Parse(format!("{src:?}: {e}")))?;
        if f.arity() > self.g().dim() {
            return Err(invalid(format!("{src:?} refers to coordinate {} of a {}-dimensional group", f.arity(), self.g().dim())));
        }
        Ok(f)
    }

    fn boundary(&self, b: &BoundarySpec) -> Result<BoundaryDatum, Failure> {
        match b {
            BoundarySpec::Formula { formula } => {
                let f = self.formula(formula)?;
                Ok(BoundaryDatum::from_fn(self.g(), self.omega(), self.spacing(), |y| f.eval(y))?)
            }
            BoundarySpec::Csv { csv } => {
                let path = resolve(&self.base, csv);
                let file = File::open(&path).map_err(|e| Failure::Task(format!("{}: {e}", path.display())))?;
                read_boundary_csv(file).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
            }
        }
    }

    fn params<T: serde::de::DeserializeOwned>(&self) -> Result<T, Failure> {
        serde_json::from_value(self.cfg.params.clone()).map_err(bad_params)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn domain_samples(rng: &mut ChaCha8Rng, omega: &DomainSpec, n: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p: Vec<f64> = omega.bounds().iter().map(|&(a, b)| rng.random_range(a..=b)).collect();
        if omega.contains(&p) {
            out.push(Point::new(p));
        }
    }
    out
}

fn setup(cfg: RunConfig, base: PathBuf, out: PathBuf) -> Result<Ctx, Failure> {
    let h = cfg.hamiltonian.build().map_err(invalid)?;
    let k = cfg.hamiltonian.build_extension(&cfg.domain).map_err(invalid)?;
    cfg.domain.validate(&cfg.group).map_err(invalid)?;
    let m = cfg.group.rank();
    let stencil = match cfg.grid.stencil_directions {
        Some(d) => Stencil::new(m, d),
        None => Stencil::default_for(m),
    }
    .map_err(invalid)?;
    if !(cfg.grid.spacing > 0.0 && cfg.grid.spacing.is_finite()) {
        return Err(invalid(format!("spacing must be positive, got {}", cfg.grid.spacing)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = domain_samples(&mut rng, &cfg.domain, 64);
    let report = validate(&h, &cfg.group, &samples).map_err(invalid)?;
    fs::create_dir_all(&out).map_err(|e| Failure::Task(format!("{}: {e}", out.display())))?;
    let mut ctx = Ctx { cfg, base, out, files: BTreeSet::new(), rng, h, k, stencil };
    ctx.write_json("validation.json", &report)?;
    if !report.passed {
        return Err(Failure::Validation(format!(
            "hamiltonian violates its declared bounds at {} of {} samples",
            report.violations.len(),
            report.samples
        )));
    }
    Ok(ctx)
}

fn distance(ctx: &mut Ctx) -> Result<(), Failure> {
    let p: DistanceParams = ctx.params()?;
    let graph = if p.extended { ctx.extended_graph()? } else { ctx.domain_graph()? };
    let metric = match p.metric {
        MetricKind::Cc => Metric::Cc,
        MetricKind::Optical if p.extended => Metric::Optical(ctx.k.clone()),
        MetricKind::Optical => Metric::Optical(ctx.h.clone()),
        MetricKind::Koranyi => Metric::Koranyi,
    };
    let src = graph.node_near(&p.source)?;
    let mut rows = Vec::new();
    if matches!(metric, Metric::Koranyi) {
        for t in &p.targets {
            let n = graph.node_near(t)?;
            let (a, b) = (Point::new(graph.point(src)), Point::new(graph.point(n)));
            let v = if p.reverse { ctx.g().koranyi_dist(&b, &a)? } else { ctx.g().koranyi_dist(&a, &b)? };
            rows.push(json!({"target": t, "node": graph.point(n), "value": v}));
        }
    } else {
        let direction = if p.reverse { Direction::Reverse } else { Direction::Forward };
        let field = search(&graph, &metric, &[(src, 0.0)], &SearchOptions { direction, ..Default::default() })?;
        ctx.write_csv("distance.csv", |w| write_distance_csv(w, &field))?;
        for (i, t) in p.targets.iter().enumerate() {
            let n = graph.node_near(t)?;
            let v = field.value(n);
            if v.is_finite() {
                let path = extract_path(&field, n)?;
                ctx.write_csv(&format!("path_{i}.csv"), |w| write_path_csv(w, &path))?;
            }
            rows.push(json!({"target": t, "node": graph.point(n), "value": v.is_finite().then_some(v)}));
        }
    }
    ctx.write_json(
        "distances.json",
        &json!({"metric": metric.name(), "source": graph.point(src), "reverse": p.reverse, "targets": rows}),
    )
}

fn probe_values(u: &dyn Field, probes: &[Point]) -> Vec<serde_json::Value> {
    probes
        .iter()
        .map(|x| json!({"point": x.0, "w": u.value_at(x).ok().filter(|v| v.is_finite())}))
        .collect()
}

fn solve(ctx: &mut Ctx) -> Result<(), Failure> {
    let p: SolveParams = ctx.params()?;
    let graph = ctx.extended_graph()?;
    let datum = ctx.boundary(&p.boundary)?;
    ctx.write_csv("boundary.csv", |w| write_boundary_csv(w, &datum))?;
    let bcc = check_bcc(&graph, &ctx.k, &datum)?;
    ctx.write_json("bcc.json", &bcc)?;
    if !bcc.passed && !p.override_bcc {
        return Err(Failure::Task(format!(
            "boundary data violate the compatibility condition (margin {}); set override_bcc to solve anyway",
            bcc.margin
        )));
    }
    let sol = solve_dirichlet(&graph, &ctx.k, ctx.omega(), &datum, p.override_bcc)?;
    ctx.write_csv("w.csv", |w| write_solution_csv(w, &sol.u))?;
    let probes = match &p.probes {
        Some(set) => set.points(&mut ctx.rng, &ctx.cfg.domain).map_err(invalid)?,
        None => Vec::new(),
    };
    let summary = json!({
        "status": sol.status(),
        "overridden": sol.overridden,
        "attainment_error": sol.attainment_error,
        "hamiltonian_hash": sol.hamiltonian_hash,
        "graph_nodes": graph.len(),
        "boundary_samples": datum.len(),
        "probes": probe_values(&sol.u, &probes),
    });
    ctx.write_json("solve.json", &summary)
}

fn requirement(r: Require) -> Requirement {
    match r {
        Require::Solution => Requirement::Solution,
        Require::Subsolution => Requirement::Subsolution,
        Require::Supersolution => Requirement::Supersolution,
    }
}

fn verify(ctx: &mut Ctx) -> Result<(), Failure> {
    let p: VerifyParams = ctx.params()?;
    let opts = residual_options(&p.radii, p.r, p.tau).map_err(bad_params)?;
    let probes = p.probes.points(&mut ctx.rng, &ctx.cfg.domain).map_err(invalid)?;
    let graph = ctx.extended_graph()?;
    let field: Box<dyn Field + Sync> = match &p.field {
        FieldSpec::HopfLax { boundary, override_bcc } => {
            let datum = ctx.boundary(boundary)?;
            Box::new(solve_dirichlet(&graph, &ctx.k, ctx.omega(), &datum, *override_bcc)?.u)
        }
        FieldSpec::Cone { vertex } => {
            let v = graph.node_near(vertex)?;
            let f = search(&graph, &Metric::Optical(ctx.k.clone()), &[(v, 0.0)], &SearchOptions::default())?;
            Box::new(f.to_scalar_field())
        }
        FieldSpec::Formula { formula } => {
            let f = ctx.formula(formula)?;
            Box::new(FnField(move |x: &[f64]| f.eval(x)))
        }
    };
    let req = requirement(p.require);
    let report = monge_report(field.as_ref(), &ctx.k, &graph, &probes, &opts)?;
    let verdicts: Vec<_> = report.records.iter().map(|r| r.verdict(req)).collect();
    let passed = report.all(req);
    ctx.write_json(
        "residual.json",
        &json!({"require": format!("{:?}", p.require).to_lowercase(), "passed": passed, "verdicts": verdicts, "report": report}),
    )?;
    if let Some(ae) = &p.ae {
        let r = ae_subsolution_check(field.as_ref(), &ctx.h, ctx.g(), &probes, ae.h_fd, ae.tau_fd)?;
        ctx.write_json("ae.json", &r)?;
    }
    if passed {
        Ok(())
    } else {
        let bad = verdicts.iter().filter(|v| matches!(v, subhj_core::verify::ResidualClass::Violated { .. })).count();
        Err(Failure::Task(format!("{bad} of {} probes fail the {:?} requirement", probes.len(), p.require)))
    }
}

/// Affine data in the horizontal coordinates with slope at most `0.8 / alpha`,
/// so the compatibility condition holds for every extension.
fn random_affine(rng: &mut ChaCha8Rng, m: usize, alpha: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let len = rng.random_range(0.0..=0.8 / alpha);
    let mut coef: Vec<f64> = dir.iter().map(|x| x / norm * len).collect();
    coef.push(rng.random_range(-0.5..=0.5));
    coef
}

fn eval_affine(c: &[f64], y: &[f64]) -> f64 {
    let (b, a) = c.split_last().expect("nonempty");
    a.iter().zip(y).map(|(a, y)| a * y).sum::<f64>() + b
}

fn compare(ctx: &mut Ctx) -> Result<(), Failure> {
    let p: CompareParams = ctx.params()?;
    let graph = ctx.extended_graph()?;
    let mut cases = Vec::new();
    for pair in &p.pairs {
        cases.push((ctx.boundary(&pair.sub)?, ctx.boundary(&pair.sup)?, None));
    }
    let (m, alpha) = (ctx.g().rank(), ctx.h.alpha());
    for _ in 0..p.random {
        let a = random_affine(&mut ctx.rng, m, alpha);
        let b = random_affine(&mut ctx.rng, m, alpha);
        let lift = ctx.rng.random_range(0.0..=0.2);
        let sub = BoundaryDatum::from_fn(ctx.g(), ctx.omega(), ctx.spacing(), |y| eval_affine(&a, y))?;
        let shift = sub.samples().iter().map(|(y, g)| g - eval_affine(&b, &y.0)).fold(f64::NEG_INFINITY, f64::max);
        let sup = sub.map_values(|y, _| eval_affine(&b, y) + shift + lift);
        cases.push((sub, sup, Some(json!({"sub": a, "super": b, "shift": shift + lift}))));
    }
    if cases.is_empty() {
        return Err(bad_params("compare needs `pairs` or `random`"));
    }
    let mut reports = Vec::new();
    let mut failed = 0;
    for (sub, sup, coef) in &cases {
        let u = solve_dirichlet(&graph, &ctx.k, ctx.omega(), sub, false)?;
        let v = solve_dirichlet(&graph, &ctx.k, ctx.omega(), sup, false)?;
        let r = comparison_harness(&ctx.k, &graph, ctx.omega(), &u.u, &v.u, p.tol)?;
        failed += usize::from(!r.passed);
        reports.push(json!({"report": r, "affine": coef}));
    }
    ctx.write_json("compare.json", &json!({"passed": failed == 0, "cases": reports}))?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Task(format!("{failed} of {} comparisons fail", cases.len())))
    }
}

fn stability(ctx: &mut Ctx) -> Result<(), Failure> {
    let p: StabilityParams = ctx.params()?;
    let opts = residual_options(&p.radii, p.r, p.tau).map_err(bad_params)?;
    let seq: Vec<Hamiltonian> = p.sequence.iter().map(|d| d.build()).collect::<Result<_, _>>().map_err(invalid)?;
    let pairs = p.pairs.pairs(&mut ctx.rng, &ctx.cfg.domain).map_err(invalid)?;
    let probes = p.probes.points(&mut ctx.rng, &ctx.cfg.domain).map_err(invalid)?;
    let graph = ctx.extended_graph()?;
    let datum = ctx.boundary(&p.boundary)?;
    let report = stability_harness(&seq, &ctx.h, &graph, ctx.omega(), &datum, &pairs, &probes, &opts)
        .map_err(|e| match e {
            subhj_core::Error::Input(m) => Failure::Validation(m),
            e => e.into(),
        })?;
    ctx.write_json("stability.json", &report)?;
    if report.pair_monotone && report.solution_monotone && report.residual_ok {
        Ok(())
    } else {
        Err(Failure::Task("deviations are not monotone or the limit fails the residual check".into()))
    }
}

fn probe(ctx: &mut Ctx) -> Result<(), Failure> {
    let p: ProbeParams = ctx.params()?;
    let metric = match p.metric {
        MetricKind::Cc => Metric::Cc,
        MetricKind::Optical => Metric::Optical(ctx.h.clone()),
        MetricKind::Koranyi => return Err(invalid("probe compares graph distances; use `cc` or `optical`")),
    };
    let spacings = p.spacings.clone().unwrap_or_else(|| vec![ctx.spacing(), ctx.spacing() / 2.0]);
    let pairs: Vec<(Point, Point)> = p.pairs.iter().map(|(a, b)| (Point::new(a.clone()), Point::new(b.clone()))).collect();
    let table = convergence_probe(ctx.g(), ctx.omega(), &metric, &pairs, &spacings, &ctx.stencil)?;
    ctx.write_csv("probe.csv", |w| {
        writeln!(w, "pair,spacing,graph,koranyi,euclidean,ratio_koranyi,ratio_euclidean,slope")?;
        for r in &table.rows {
            let slope = table.slopes.iter().find(|s| s.0 == r.spacing).map_or(f64::NAN, |s| s.1);
            let cols = [r.spacing, r.graph, r.koranyi, r.euclidean, r.ratio_koranyi, r.ratio_euclidean, slope];
            let cols: Vec<String> = cols.iter().map(|&v| fmt_f64(v)).collect();
            writeln!(w, "{},{}", r.pair, cols.join(","))?;
        }
        Ok(())
    })?;
    ctx.write_json("probe.json", &table)
}

fn dispatch(ctx: &mut Ctx, task: Task) -> Result<(), Failure> {
    match task {
        Task::Distance => distance(ctx),
        Task::Solve => solve(ctx),
        Task::Verify => verify(ctx),
        Task::Compare => compare(ctx),
        Task::Stability => stability(ctx),
        Task::Probe => probe(ctx),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    task: &'static str,
    config: String,
    config_sha256: Option<String>,
    seed: Option<u64>,
    spacing: Option<f64>,
    status: &'static str,
    exit_code: i32,
    error: Option<&'a str>,
    files: Vec<String>,
    timestamp: u64,
}

/// Runs `task` from the config at `path` and returns the exit status. The
/// manifest is written whenever an output directory is known.
pub fn run(task: Task, path: &Path, ov: &Overrides) -> i32 {
    let bytes = fs::read(path);
    let config_sha256 = bytes.as_ref().ok().map(|b| sha256_hex(b));
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let parsed = match &bytes {
        Ok(b) => serde_json::from_slice::<RunConfig>(b).map_err(|e| Failure::Parse(format!("{}: {e}", path.display()))),
        Err(e) => Err(Failure::Parse(format!("{}: {e}", path.display()))),
    };
    let out = ov
        .out
        .clone()
        .or_else(|| parsed.as_ref().ok().and_then(|c| c.output.as_ref().map(|o| resolve(&base, o))))
        .unwrap_or_else(|| PathBuf::from("subhj-out"));
    let mut seed = None;
    let mut spacing = None;
    let mut files = BTreeSet::new();
    let result = parsed.and_then(|mut cfg| {
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(h) = ov.spacing {
            cfg.grid.spacing = h;
        }
        seed = Some(cfg.seed);
        spacing = Some(cfg.grid.spacing);
        if let Some(t) = cfg.task {
            if t != task {
                return Err(invalid(format!("config is for `{}` but `{}` was requested", t.name(), task.name())));
            }
        }
        let mut ctx = setup(cfg, base.clone(), out.clone())?;
        let r = dispatch(&mut ctx, task);
        files = std::mem::take(&mut ctx.files);
        r
    });
    let code = result.as_ref().map_or_else(Failure::code, |_| 0);
    if let Err(e) = &result {
        eprintln!("subhj {}: {}", task.name(), e.message());
    }
    files.insert("manifest.json".into());
    let manifest = Manifest {
        tool: "subhj",
        version: env!("CARGO_PKG_VERSION"),
        task: task.name(),
        config: path.display().to_string(),
        config_sha256,
        seed,
        spacing,
        status: if code == 0 { "ok" } else { "failed" },
        exit_code: code,
        error: result.as_ref().err().map(Failure::message),
        files: files.into_iter().collect(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    let written = fs::create_dir_all(&out).and_then(|_| {
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(out.join("manifest.json"), text)
    });
    if let Err(e) = written {
        eprintln!("subhj: cannot write manifest in {}: {e}", out.display());
        return code.max(1);
    }
    code
}
