//! Subcommands: each turns a validated model into a [`Report`].

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use serde_json::json;

use crate::ansatz5d::{einstein_checks, kernel_comparison, ClosedFormVariant, SourceSpec};
use crate::deformations::einstein_pair;
use crate::expr::Expr;
use crate::geometry::{
    assemble_full_metric, canonical_dconnection, curvature, einstein, einstein_mixed, levi_civita,
    nonmetricity, ricci, scalar, torsion, ComponentField, Connection, NGeometry,
};
use crate::solver::{
    assemble, solve_h_sector, solve_n, solve_v_ode, solve_v_vacuum, solve_w,
    Constants, HMode, HSolution, NSolution, OdeProblem, OdeTolerance, Part, Parts, Provenance,
    RayGrid, RayTable, RelaxOptions, Sampled, SolutionBundle, VSolution, VerifyTolerance,
};

use super::model::{HSection, Model, ModelFile, VSection};
use super::report::{
    evaluate, Artifact, Column, DomainCensus, Equation, Evaluation, Group, Plan, Report, Table,
};
use super::HarnessError;

/// Components the `geometry` command can dump.
pub const GEOMETRY_COMPONENTS: [&str; 12] = [
    "g", "N", "W", "Omega", "Gamma", "T", "Q", "R", "Ric", "scalar", "G", "LC",
];

/// Tolerance names and defaults.
pub const TOLERANCES: [(&str, f64); 9] = [
    ("closed_form", 1e-8),
    ("zero_pattern", 1e-10),
    ("structure", 1e-9),
    ("relative_floor", 1e-6),
    ("residual", 1e-6),
    ("einstein", 1e-6),
    ("sampled", 1e-5),
    ("lc", 1e-10),
    ("domain_fraction", 0.01),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Geometry,
    AnsatzVerify,
    Solve,
    Residuals,
    LcCompare,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Check,
        Command::Geometry,
        Command::AnsatzVerify,
        Command::Solve,
        Command::Residuals,
        Command::LcCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Geometry => "geometry",
            Command::AnsatzVerify => "ansatz-verify",
            Command::Solve => "solve",
            Command::Residuals => "residuals",
            Command::LcCompare => "lc-compare",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Command, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Grid override, see [`super::GridSpec::apply_override`].
    pub grid: Option<String>,
    pub tolerances: Vec<(String, f64)>,
    pub seed: Option<u64>,
    /// Record wall-clock time in the report (breaks byte-identity).
    pub timing: bool,
}

/// Run `f` on a pool of `jobs` threads, or on rayon's default pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

pub fn run(command: Command, mut file: ModelFile, opts: &RunOptions) -> Result<Report, HarnessError> {
    let start = Instant::now();
    if let Some(g) = &opts.grid {
        file.grid.apply_override(g)?;
    }
    for (k, v) in &opts.tolerances {
        file.tolerances.insert(k.clone(), *v);
    }
    if let Some(s) = opts.seed {
        file.seed = s;
    }
    let model = Model::from_file(file)?;
    let mut report = match command {
        Command::Check => check(&model),
        Command::Geometry => geometry(&model),
        Command::AnsatzVerify => ansatz_verify(&model),
        Command::Solve => solve(&model),
        Command::Residuals => residuals(&model),
        Command::LcCompare => lc_compare(&model),
    }?;
    if opts.timing {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

pub fn default_tolerance(name: &str) -> Option<f64> {
    TOLERANCES.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
}

fn tol(model: &Model, name: &str) -> f64 {
    model.tolerance(name, default_tolerance(name).expect("known tolerance"))
}

fn grid_points(model: &Model) -> Vec<Vec<f64>> {
    model.file.grid.points(&model.chart, model.file.seed)
}

fn finish(
    command: Command,
    model: &Model,
    plan: &Plan,
    points: &[Vec<f64>],
    details: serde_json::Value,
) -> Result<Report, HarnessError> {
    let eval = evaluate(&model.chart, plan, points, tol(model, "domain_fraction"))?;
    Ok(Report::new(
        command.name(),
        model.file.name.clone(),
        model.file.seed,
        eval,
        true,
        details,
    ))
}

fn need_geometry(model: &Model, command: Command) -> Result<&NGeometry, HarnessError> {
    model.geometry.as_ref().ok_or_else(|| {
        HarnessError::Invalid(format!(
            "{} needs a metric, nconnection or ansatz section",
            command.name()
        ))
    })
}

fn empty_eval(model: &Model) -> Evaluation {
    Evaluation {
        equations: Vec::new(),
        domain: DomainCensus::empty(tol(model, "domain_fraction")),
        table: Table {
            coordinates: model.chart.names().iter().map(|s| s.to_string()).collect(),
            ..Table::default()
        },
    }
}

fn check(model: &Model) -> Result<Report, HarnessError> {
    let f = &model.file;
    let sections: Vec<&str> = [
        ("metric", f.metric.is_some()),
        ("nconnection", f.nconnection.is_some()),
        ("ansatz", f.ansatz.is_some()),
        ("source", f.source.is_some()),
        ("solve", f.solve.is_some()),
        ("geometry", f.geometry.is_some()),
    ]
    .into_iter()
    .filter_map(|(n, present)| present.then_some(n))
    .collect();
    let details = json!({
        "chart": {
            "horizontal": model.chart.horizontal_names(),
            "vertical": model.chart.vertical_names(),
        },
        "sections": sections,
        "parameters": f.parameters,
        "grid_points": f.grid.len(&model.chart),
    });
    Ok(Report::new(
        Command::Check.name(),
        f.name.clone(),
        f.seed,
        empty_eval(model),
        true,
        details,
    ))
}

fn field_columns(f: &ComponentField) -> Vec<(String, Expr)> {
    f.iter().map(|(ix, e)| (f.key(&ix), e.clone())).collect()
}

/// Lazily built tensors shared by several geometry components.
struct Derived<'a> {
    geo: &'a NGeometry,
    conn: Option<Connection>,
    riemann: Option<ComponentField>,
    ric: Option<ComponentField>,
}

impl Derived<'_> {
    fn conn(&mut self) -> &Connection {
        let geo = self.geo;
        self.conn
            .get_or_insert_with(|| canonical_dconnection(geo).to_connection())
    }

    fn riemann(&mut self) -> &ComponentField {
        if self.riemann.is_none() {
            let r = curvature(self.geo, self.conn());
            self.riemann = Some(r);
        }
        self.riemann.as_ref().expect("set above")
    }

    fn ric(&mut self) -> &ComponentField {
        if self.ric.is_none() {
            let r = ricci(self.riemann());
            self.ric = Some(r);
        }
        self.ric.as_ref().expect("set above")
    }

    fn columns(&mut self, name: &str) -> Vec<(String, Expr)> {
        let geo = self.geo;
        match name {
            "g" => field_columns(&assemble_full_metric(geo.metric(), geo.nconnection())),
            "N" => {
                let (n, m) = (geo.n(), geo.m());
                let c = geo.chart();
                (0..n)
                    .flat_map(|i| (0..m).map(move |a| (i, a)))
                    .map(|(i, a)| {
                        let key = format!("N_{}^{}", c.name(i), c.name(n + a));
                        (key, geo.nconnection().get(i, a).clone())
                    })
                    .collect()
            }
            "W" => field_columns(geo.anholonomy()),
            "Omega" => field_columns(geo.omega()),
            "Gamma" => field_columns(self.conn().field()),
            "T" => {
                let t = torsion(geo, self.conn());
                field_columns(&t)
            }
            "Q" => {
                let q = nonmetricity(geo, self.conn());
                field_columns(&q)
            }
            "R" => field_columns(&self.riemann().clone()),
            "Ric" => field_columns(&self.ric().clone()),
            "scalar" => vec![("R".to_string(), scalar(geo, self.ric()))],
            "G" => {
                let ric = self.ric().clone();
                let s = scalar(geo, &ric);
                field_columns(&einstein_mixed(geo, &einstein(geo, &ric, &s)))
            }
            "LC" => field_columns(levi_civita(geo).field()),
            _ => unreachable!("component names are validated with the model"),
        }
    }
}

fn geometry(model: &Model) -> Result<Report, HarnessError> {
    let geo = need_geometry(model, Command::Geometry)?;
    let section = model.file.geometry.as_ref();
    let names: Vec<String> = match section {
        Some(s) => s.components.clone(),
        None => vec!["g".into(), "N".into()],
    };
    let points = match section.and_then(|s| s.points.clone()) {
        Some(p) => p,
        None => grid_points(model),
    };
    let mut d = Derived {
        geo,
        conn: None,
        riemann: None,
        ric: None,
    };
    let mut plan = Plan {
        guards: geo.determinants().to_vec(),
        ..Plan::default()
    };
    for name in &names {
        let mut g = Group::new(name.as_str(), None);
        for (k, e) in d.columns(name) {
            g.push(k, Column::Value(e));
        }
        plan.groups.push(g);
    }
    let details = json!({ "components": names });
    finish(Command::Geometry, model, &plan, &points, details)
}

fn ansatz_verify(model: &Model) -> Result<Report, HarnessError> {
    let a = model
        .ansatz
        .as_ref()
        .ok_or_else(|| HarnessError::Invalid("ansatz-verify needs an ansatz section".into()))?;
    let invalid = |e: crate::ansatz5d::AnsatzError| HarnessError::Invalid(e.to_string());
    let cmp = kernel_comparison(a, ClosedFormVariant::KernelConsistent).map_err(invalid)?;
    let checks = einstein_checks(a, &model.source_or_vacuum()).map_err(invalid)?;
    let floor = tol(model, "relative_floor");
    let mut plan = Plan {
        guards: cmp.guards.clone(),
        preconditions: vec![("h5*".into(), cmp.h5_star.clone())],
        ..Plan::default()
    };
    for (name, closed, kernel) in &cmp.pairs {
        let mut g = Group::new(name.as_str(), Some(tol(model, "closed_form")));
        g.push("relative", Column::Rel(closed.clone(), kernel.clone(), floor));
        plan.groups.push(g);
    }
    let mut zeros = Group::new("zero-pattern", Some(tol(model, "zero_pattern")));
    for (name, e) in &cmp.zeros {
        zeros.push(name.as_str(), Column::Value(e.clone()));
    }
    plan.groups.push(zeros);
    for (name, exprs) in &checks.structure {
        let mut g = Group::new(name.as_str(), Some(tol(model, "structure")));
        for (k, e) in exprs.iter().enumerate() {
            g.push((k + 1).to_string(), Column::Value(e.clone()));
        }
        plan.groups.push(g);
    }
    let points = grid_points(model);
    let mut report = finish(
        Command::AnsatzVerify,
        model,
        &plan,
        &points,
        json!({ "variant": ClosedFormVariant::KernelConsistent }),
    )?;
    let max_relative = report.equations[..cmp.pairs.len()]
        .iter()
        .map(|e| e.max)
        .fold(0.0, f64::max);
    report.details["max_relative"] = json!(max_relative);
    Ok(report)
}

/// `Υ^α_β` for a non-ansatz geometry, if the model gives one.
fn mixed_source(model: &Model) -> Result<Option<ComponentField>, HarnessError> {
    if let Some(m) = &model.mixed_source {
        return Ok(Some(m.clone()));
    }
    match &model.source {
        Some(s) if (model.chart.n(), model.chart.m()) == (3, 2) => Ok(Some(s.mixed())),
        Some(_) => Err(HarnessError::Invalid(
            "upsilon2/upsilon4 sources need a 3 + 2 chart; give source.mixed".into(),
        )),
        None => Ok(None),
    }
}

fn residuals(model: &Model) -> Result<Report, HarnessError> {
    let points = grid_points(model);
    let tolerance = Some(tol(model, "residual"));
    let mut plan = Plan::default();
    if let (Some(a), None) = (&model.ansatz, &model.mixed_source) {
        let c = einstein_checks(a, &model.source_or_vacuum())
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
        plan.guards = c.guards;
        for (name, exprs) in &c.equations {
            let mut g = Group::new(name.as_str(), tolerance);
            for (k, e) in exprs.iter().enumerate() {
                g.push((k + 1).to_string(), Column::Value(e.clone()));
            }
            plan.groups.push(g);
        }
        return finish(Command::Residuals, model, &plan, &points, json!({ "form": "ansatz" }));
    }
    let geo = need_geometry(model, Command::Residuals)?;
    let conn = canonical_dconnection(geo).to_connection();
    let ric = ricci(&curvature(geo, &conn));
    let s = scalar(geo, &ric);
    let g_mixed = einstein_mixed(geo, &einstein(geo, &ric, &s));
    let source = mixed_source(model)?;
    let mut g = Group::new("G-Upsilon", tolerance);
    for (ix, e) in g_mixed.iter() {
        let u = source.as_ref().map_or_else(Expr::zero, |u| u.get(&ix).clone());
        g.push(g_mixed.key(&ix), Column::Diff(e.clone(), u));
    }
    plan.guards = geo.determinants().to_vec();
    plan.groups.push(g);
    finish(Command::Residuals, model, &plan, &points, json!({ "form": "general" }))
}

fn lc_compare(model: &Model) -> Result<Report, HarnessError> {
    let geo = need_geometry(model, Command::LcCompare)?;
    let conn = canonical_dconnection(geo).to_connection();
    let (gc, gl) = einstein_pair(geo, &conn);
    let tolerance = Some(tol(model, "lc"));
    let mut plan = Plan {
        guards: geo.determinants().to_vec(),
        ..Plan::default()
    };
    let mut diff = Group::new("G_canonical-G_LC", tolerance);
    for (ix, e) in gc.iter() {
        diff.push(gc.key(&ix), Column::Diff(e.clone(), gl.get(&ix).clone()));
    }
    plan.groups.push(diff);
    if let Some(u) = mixed_source(model)? {
        let mut g = Group::new("G_LC-Upsilon", tolerance);
        for (ix, e) in gl.iter() {
            g.push(gl.key(&ix), Column::Diff(e.clone(), u.get(&ix).clone()));
        }
        plan.groups.push(g);
    }
    let points = grid_points(model);
    let details = json!({ "nconnection_zero": geo.nconnection().is_zero() });
    let mut report = finish(Command::LcCompare, model, &plan, &points, details)?;
    report.details["also_solves_lc"] = json!(report.pass);
    Ok(report)
}

/// Rays through the distinct `(x1, x2, x3)` of `points`, sampled at `v`.
fn rays(points: &[Vec<f64>], v: Vec<f64>) -> RayGrid {
    let mut seen = BTreeMap::new();
    let mut rays = Vec::new();
    for p in points {
        let x = [p[0], p[1], p[2]];
        if seen.insert(x.map(f64::to_bits), ()).is_none() {
            rays.push(x);
        }
    }
    RayGrid { rays, v }
}

fn distinct_v(points: &[Vec<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = points.iter().map(|p| p[3]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
        .collect()
}

fn ray_artifact(name: &str, t: &RayTable) -> Artifact {
    let header = ["x1", "x2", "x3", "v", "value", "derivative"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for (r, x) in t.grid.rays.iter().enumerate() {
        for (k, v) in t.grid.v.iter().enumerate() {
            rows.push(vec![x[0], x[1], x[2], *v, t.values[r][k], t.derivative[r][k]]);
        }
    }
    Artifact {
        name: name.to_string(),
        header,
        rows,
    }
}

fn sampled_artifact(name: &str, s: &Sampled) -> Artifact {
    match s {
        Sampled::Rays(t) => ray_artifact(name, t),
        Sampled::Conformal(g) => {
            let mut rows = Vec::new();
            for (i, a) in g.x2.iter().enumerate() {
                for (j, b) in g.x3.iter().enumerate() {
                    rows.push(vec![*a, *b, g.at(i, j)]);
                }
            }
            Artifact {
                name: name.to_string(),
                header: ["x2", "x3", "psi"].map(String::from).to_vec(),
                rows,
            }
        }
    }
}

fn solve(model: &Model) -> Result<Report, HarnessError> {
    let s = model
        .file
        .solve
        .as_ref()
        .ok_or_else(|| HarnessError::Invalid("solve needs a solve section".into()))?;
    let cx = Model::context(&model.file, &model.chart);
    let source: SourceSpec = model.source_or_vacuum();
    let mut points = grid_points(model);
    let mut notes: Vec<String> = Vec::new();

    let (g2, g3) = match &s.h {
        HSection::Verify { g2, g3 } => {
            let (g2, g3) = (cx.parse("solve.h.g2", g2)?, cx.parse("solve.h.g3", g3)?);
            let u4 = source.upsilon4.scale(source.k);
            solve_h_sector(&g2, &u4, HMode::Verify { g3: g3.clone() }, &points)?;
            (Part::user(g2), Part::user(g3))
        }
        HSection::Conformal {
            boundary,
            x2,
            x3,
            counts,
            tol: t,
            max_sweeps,
        } => {
            let defaults = RelaxOptions::default();
            let mode = HMode::Conformal {
                boundary: cx.parse("solve.h.boundary", boundary)?,
                x2: (x2[0], x2[1]),
                x3: (x3[0], x3[1]),
                counts: (counts[0], counts[1]),
                options: RelaxOptions {
                    tol: t.unwrap_or(defaults.tol),
                    max_sweeps: max_sweeps.unwrap_or(defaults.max_sweeps),
                },
            };
            let u4 = source.upsilon4.scale(source.k);
            let HSolution::Conformal(grid) = solve_h_sector(&Expr::one(), &u4, mode, &points)? else {
                unreachable!("conformal mode returns a grid")
            };
            let sampled = Sampled::Conformal(grid);
            (
                Part::Sampled(sampled.clone(), Provenance::Relaxed),
                Part::Sampled(sampled, Provenance::Relaxed),
            )
        }
    };

    let mut constants = Constants {
        n1: cx.triple("solve.n1", &s.n1)?,
        n2: cx.triple("solve.n2", &s.n2)?,
        v0: s.v0,
        ..Constants::default()
    };
    let (h4, h5) = match &s.v {
        VSection::Vacuum { h5, h0 } => {
            let h5 = cx.parse("solve.v.h5", h5)?;
            constants.h0 = cx.parse("solve.v.h0", h0)?;
            let VSolution::Vacuum { h4, .. } = solve_v_vacuum(&h5, &constants.h0, &points)? else {
                unreachable!("vacuum branch returns h4")
            };
            (Part::Expr(h4, Provenance::ClosedForm), Part::user(h5))
        }
        VSection::Ode {
            h4,
            h5_0,
            h5s_0,
            v0,
            v,
            samples,
        } => {
            let h4 = cx.parse("solve.v.h4", h4)?;
            let grid = rays(&points, linspace(v[0], v[1], *samples));
            let problem = OdeProblem {
                h4: h4.clone(),
                upsilon2: source.upsilon2.scale(source.k),
                v0: *v0,
                h5_0: cx.parse("solve.v.h5_0", h5_0)?,
                h5s_0: cx.parse("solve.v.h5s_0", h5s_0)?,
                grid: grid.clone(),
                tolerance: OdeTolerance::default(),
            };
            let VSolution::Ode(t) = solve_v_ode(&problem)? else {
                unreachable!("ODE branch returns a table")
            };
            points = grid.points();
            (Part::user(h4), Part::Sampled(Sampled::Rays(t), Provenance::OdeIntegrated))
        }
    };

    let user_w = cx.triple("solve.w", &s.w)?;
    let (w, n): ([Part; 3], [Part; 3]) = match (h4.expr(), h5.expr()) {
        (Some(h4e), Some(h5e)) => {
            let w = solve_w(h4e, h5e, &user_w, &points)?.map(|(e, p)| Part::Expr(e, p));
            let grid = rays(&points, distinct_v(&points));
            let mut n = Vec::new();
            for i in 0..3 {
                let part = match solve_n(h4e, h5e, &constants.n1[i], &constants.n2[i], s.v0, &grid)? {
                    NSolution::Expr(e, p) => Part::Expr(e, p),
                    NSolution::Table(t) => Part::Sampled(Sampled::Rays(t), Provenance::Quadrature),
                };
                n.push(part);
            }
            (w, n.try_into().expect("three n_i"))
        }
        _ => {
            notes.push("h5 is sampled: w is user-given and n = n1".into());
            (
                user_w.map(Part::user),
                constants.n1.clone().map(Part::user),
            )
        }
    };

    let parts = Parts {
        g1: s.g1,
        g2,
        g3,
        h4,
        h5,
        w,
        n,
        source: source.clone(),
        constants,
    };
    let tolerance = VerifyTolerance {
        einstein: tol(model, "einstein"),
        sampled: tol(model, "sampled"),
    };
    let bundle = assemble(parts, &points, tolerance)?;
    bundle_report(model, bundle, &points, tolerance, notes)
}

fn bundle_report(
    model: &Model,
    bundle: SolutionBundle,
    points: &[Vec<f64>],
    tolerance: VerifyTolerance,
    notes: Vec<String>,
) -> Result<Report, HarnessError> {
    let vr = bundle.report.as_ref().expect("assemble attaches a report");
    let eval = if bundle.sampled.is_empty() {
        let c = einstein_checks(&bundle.ansatz, &bundle.source)
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
        let mut plan = Plan {
            guards: c.guards,
            ..Plan::default()
        };
        for (name, exprs) in c.structure.iter().chain(&c.equations) {
            let mut g = Group::new(name.as_str(), Some(tolerance.einstein));
            for (k, e) in exprs.iter().enumerate() {
                g.push((k + 1).to_string(), Column::Value(e.clone()));
            }
            plan.groups.push(g);
        }
        evaluate(&model.chart, &plan, points, tol(model, "domain_fraction"))?
    } else {
        let mut eval = empty_eval(model);
        eval.table.points = points.to_vec();
        for c in &vr.sectors {
            let worst = c.stat.worst.map(|(i, v)| (i, c.name.as_str(), v));
            let mut e = Equation::from_values(&c.name, 1, Some(c.tolerance), worst, points);
            e.max = c.stat.max;
            e.mean = c.stat.mean;
            e.l2 = c.stat.l2;
            e.pass = c.pass;
            eval.equations.push(e);
        }
        eval
    };
    let slots: BTreeMap<String, String> = [
        ("g2", &bundle.ansatz.g2),
        ("g3", &bundle.ansatz.g3),
        ("h4", &bundle.ansatz.h4),
        ("h5", &bundle.ansatz.h5),
    ]
    .into_iter()
    .map(|(k, e)| (k.to_string(), e))
    .chain((0..3).map(|i| (format!("w{}", i + 1), &bundle.ansatz.w[i])))
    .chain((0..3).map(|i| (format!("n{}", i + 1), &bundle.ansatz.n[i])))
    .map(|(k, e)| {
        let text = if bundle.sampled.contains_key(&k) {
            "sampled".to_string()
        } else {
            e.to_string()
        };
        (k, text)
    })
    .collect();
    let c = &bundle.constants;
    let details = json!({
        "bundle_status": bundle.status,
        "provenance": bundle.provenance,
        "functions": slots,
        "g1": bundle.ansatz.g1,
        "constants": {
            "h0": c.h0.to_string(),
            "n1": c.n1.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "n2": c.n2.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "v0": c.v0,
        },
        "sampled": bundle.sampled.keys().collect::<Vec<_>>(),
        "failures": vr.failures,
        "unchecked": vr.unchecked,
        "notes": notes,
    });
    let mut report = Report::new(
        Command::Solve.name(),
        model.file.name.clone(),
        model.file.seed,
        eval,
        vr.failures.is_empty(),
        details,
    );
    report.artifacts = bundle
        .sampled
        .iter()
        .map(|(name, s)| sampled_artifact(name, s))
        .collect();
    Ok(report)
}
