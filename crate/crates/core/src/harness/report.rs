//! Grid evaluation of named residual groups and the report built from it.

use serde::Serialize;

use crate::expr::Expr;
use crate::geometry::SplitChart;
use crate::sample::{rel_dev, Evaluator, PointError};

use super::HarnessError;

pub const REPORT_SCHEMA: u32 = 1;
pub const TOOL: &str = "nconn";
pub const DEFAULT_DOMAIN_FRACTION: f64 = 0.01;
const MAX_EXAMPLES: usize = 10;

/// One evaluated quantity per grid point.
#[derive(Debug, Clone)]
pub enum Column {
    /// The value itself; statistics use its magnitude.
    Value(Expr),
    /// `a − b`.
    Diff(Expr, Expr),
    /// `|a − b| / max(|a|, |b|, floor)`.
    Rel(Expr, Expr, f64),
}

impl Column {
    fn exprs(&self) -> Vec<Expr> {
        match self {
            Column::Value(e) => vec![e.clone()],
            Column::Diff(a, b) | Column::Rel(a, b, _) => vec![a.clone(), b.clone()],
        }
    }

    fn value(&self, v: &[f64]) -> f64 {
        match self {
            Column::Value(_) => v[0],
            Column::Diff(..) => v[0] - v[1],
            Column::Rel(_, _, floor) => rel_dev(v[0], v[1], *floor),
        }
    }
}

/// Columns reported together against one tolerance (none for dumps).
#[derive(Debug, Clone)]
pub struct Group {
    pub name: String,
    pub tolerance: Option<f64>,
    pub columns: Vec<(String, Column)>,
}

impl Group {
    pub fn new(name: impl Into<String>, tolerance: Option<f64>) -> Group {
        Group {
            name: name.into(),
            tolerance,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, c: Column) {
        self.columns.push((name.into(), c));
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plan {
    pub groups: Vec<Group>,
    /// Block determinants; a value below the singular threshold fails the point.
    pub guards: Vec<Expr>,
    /// Named expressions that must not vanish (`|value| < 1e-12`) at a point.
    pub preconditions: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub index: usize,
    pub point: Vec<f64>,
    pub component: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equation {
    pub name: String,
    pub components: usize,
    pub max: f64,
    pub mean: f64,
    /// Euclidean norm over all components and points.
    pub l2: f64,
    pub worst: Option<Worst>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Equation {
    pub fn from_values<'a>(
        name: &str,
        components: usize,
        tolerance: Option<f64>,
        values: impl IntoIterator<Item = (usize, &'a str, f64)>,
        points: &[Vec<f64>],
    ) -> Equation {
        let (mut max, mut sum, mut sq, mut count) = (0.0f64, 0.0, 0.0, 0usize);
        let mut worst: Option<(usize, &str, f64)> = None;
        let mut finite = true;
        for (i, c, v) in values {
            let a = v.abs();
            if !a.is_finite() {
                finite = false;
            }
            if worst.map_or(true, |(_, _, w)| a > w.abs() || (a.is_nan() && !w.is_nan())) {
                worst = Some((i, c, v));
            }
            max = max.max(a);
            sum += a;
            sq += a * a;
            count += 1;
        }
        Equation {
            name: name.to_string(),
            components,
            max,
            mean: if count > 0 { sum / count as f64 } else { 0.0 },
            l2: sq.sqrt(),
            worst: worst.map(|(index, c, value)| Worst {
                index,
                point: points[index].clone(),
                component: c.to_string(),
                value,
            }),
            tolerance,
            pass: finite && tolerance.map_or(true, |t| max < t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainExample {
    pub index: usize,
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCensus {
    /// Points where an expression left its domain.
    pub domain: usize,
    /// Points with a singular metric block.
    pub singular: usize,
    /// Points where a precondition vanished.
    pub precondition: usize,
    pub fraction: f64,
    pub threshold: f64,
    pub exceeded: bool,
    pub examples: Vec<DomainExample>,
}

impl DomainCensus {
    pub fn empty(threshold: f64) -> DomainCensus {
        DomainCensus {
            domain: 0,
            singular: 0,
            precondition: 0,
            fraction: 0.0,
            threshold,
            exceeded: false,
            examples: Vec::new(),
        }
    }

    pub fn failed(&self) -> usize {
        self.domain + self.singular + self.precondition
    }

    fn record(&mut self, index: usize, point: &[f64], kind: Failure, reason: String) {
        match kind {
            Failure::Domain => self.domain += 1,
            Failure::Singular => self.singular += 1,
            Failure::Precondition => self.precondition += 1,
        }
        if self.examples.len() < MAX_EXAMPLES {
            self.examples.push(DomainExample {
                index,
                point: point.to_vec(),
                reason,
            });
        }
    }

    pub fn finish(&mut self, points: usize) {
        self.fraction = if points == 0 {
            0.0
        } else {
            self.failed() as f64 / points as f64
        };
        self.exceeded = self.fraction > self.threshold;
    }
}

enum Failure {
    Domain,
    Singular,
    Precondition,
}

/// Per-point column values; `None` where the point failed.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub coordinates: Vec<String>,
    pub columns: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub rows: Vec<Option<Vec<f64>>>,
}

/// Extra CSV output, such as a sampled solver table.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub struct Evaluation {
    pub equations: Vec<Equation>,
    pub domain: DomainCensus,
    pub table: Table,
}

/// Evaluate every group at every point. Results do not depend on the
/// thread count: points are evaluated in order and reduced sequentially.
pub fn evaluate(
    chart: &SplitChart,
    plan: &Plan,
    points: &[Vec<f64>],
    domain_threshold: f64,
) -> Result<Evaluation, HarnessError> {
    let mut exprs = Vec::new();
    for g in &plan.groups {
        for (_, c) in &g.columns {
            exprs.extend(c.exprs());
        }
    }
    let n_values = exprs.len();
    exprs.extend(plan.preconditions.iter().map(|(_, e)| e.clone()));
    let ev = Evaluator::new(chart, &exprs, &plan.guards, &Default::default())?;

    let mut census = DomainCensus::empty(domain_threshold);
    let mut rows = Vec::with_capacity(points.len());
    for (i, (r, p)) in ev.eval_many(points).into_iter().zip(points).enumerate() {
        let v = match r {
            Ok(v) => v,
            Err(e) => {
                let kind = match e {
                    PointError::Domain(_) => Failure::Domain,
                    PointError::Singular(_) => Failure::Singular,
                };
                census.record(i, p, kind, e.to_string());
                rows.push(None);
                continue;
            }
        };
        let vanished = plan
            .preconditions
            .iter()
            .zip(&v[n_values..])
            .find(|(_, x)| x.abs() < 1e-12);
        if let Some(((name, _), x)) = vanished {
            census.record(i, p, Failure::Precondition, format!("{name} = {x:e}"));
            rows.push(None);
            continue;
        }
        let mut row = Vec::new();
        let mut k = 0;
        for g in &plan.groups {
            for (_, c) in &g.columns {
                let width = c.exprs().len();
                row.push(c.value(&v[k..k + width]));
                k += width;
            }
        }
        rows.push(Some(row));
    }
    census.finish(points.len());

    let mut equations = Vec::new();
    let mut columns = Vec::new();
    let mut offset = 0;
    for g in &plan.groups {
        let names: Vec<&str> = g.columns.iter().map(|(n, _)| n.as_str()).collect();
        let values = rows.iter().enumerate().filter_map(|(i, r)| r.as_ref().map(|r| (i, r)));
        let values = values.flat_map(|(i, r)| {
            names
                .iter()
                .enumerate()
                .map(move |(j, n)| (i, *n, r[offset + j]))
        });
        equations.push(Equation::from_values(&g.name, names.len(), g.tolerance, values, points));
        columns.extend(names.iter().map(|n| format!("{}:{}", g.name, n)));
        offset += names.len();
    }
    Ok(Evaluation {
        equations,
        domain: census,
        table: Table {
            coordinates: chart.names().iter().map(|s| s.to_string()).collect(),
            columns,
            points: points.to_vec(),
            rows,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    ToleranceFailure,
    DomainFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ToleranceFailure => 1,
            Status::DomainFailure => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model: Option<String>,
    pub seed: u64,
    pub points: usize,
    pub equations: Vec<Equation>,
    pub domain: DomainCensus,
    pub pass: bool,
    pub status: Status,
    pub details: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
    #[serde(skip)]
    pub table: Table,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl Report {
    /// A report whose status follows from its equations and census.
    /// `extra_pass` folds in checks that are not equations.
    pub fn new(
        command: &str,
        model: Option<String>,
        seed: u64,
        eval: Evaluation,
        extra_pass: bool,
        details: serde_json::Value,
    ) -> Report {
        let tol_ok = extra_pass && eval.equations.iter().all(|e| e.pass);
        let status = if eval.domain.exceeded {
            Status::DomainFailure
        } else if !tol_ok {
            Status::ToleranceFailure
        } else {
            Status::Pass
        };
        Report {
            schema: REPORT_SCHEMA,
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            model,
            seed,
            points: eval.table.points.len(),
            equations: eval.equations,
            domain: eval.domain,
            pass: status == Status::Pass,
            status,
            details,
            runtime_seconds: None,
            table: eval.table,
            artifacts: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}
