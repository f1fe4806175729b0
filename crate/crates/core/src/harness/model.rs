//! Model files: JSON documents naming a chart, the geometric data as
//! expression strings, sources, solve requests, a grid and tolerances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ansatz5d::{Ansatz5D, SourceSpec};
use crate::expr::{parse, Expr, Node, Scope};
use crate::geometry::{ComponentField, DMetric, NConnection, NGeometry, Slot, SlotKind, SplitChart};

use super::grid::GridSpec;
use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub schema: Option<u32>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub chart: Option<ChartSection>,
    /// Named constants usable in every expression.
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub metric: Option<MetricSection>,
    /// `n × m` table of `N_i^a`.
    #[serde(default)]
    pub nconnection: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub ansatz: Option<AnsatzSection>,
    #[serde(default)]
    pub source: Option<SourceSection>,
    #[serde(default)]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub geometry: Option<GeometrySection>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSection {
    pub horizontal: Vec<String>,
    pub vertical: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub g: Vec<Vec<String>>,
    pub h: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    #[serde(default = "one")]
    pub g1: f64,
    #[serde(default = "one_str")]
    pub g2: String,
    #[serde(default = "one_str")]
    pub g3: String,
    #[serde(default = "one_str")]
    pub h4: String,
    #[serde(default = "one_str")]
    pub h5: String,
    #[serde(default = "zeros")]
    pub w: [String; 3],
    #[serde(default = "zeros")]
    pub n: [String; 3],
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    #[serde(default)]
    pub upsilon2: Option<String>,
    #[serde(default)]
    pub upsilon4: Option<String>,
    #[serde(default)]
    pub k: Option<f64>,
    /// Mixed `Υ^α_β` as a `dim × dim` table, for non-ansatz models.
    #[serde(default)]
    pub mixed: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HSection {
    Verify {
        g2: String,
        g3: String,
    },
    Conformal {
        boundary: String,
        x2: [f64; 2],
        x3: [f64; 2],
        #[serde(default = "default_counts")]
        counts: [usize; 2],
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        max_sweeps: Option<usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VSection {
    Vacuum {
        h5: String,
        #[serde(default = "one_str")]
        h0: String,
    },
    Ode {
        h4: String,
        h5_0: String,
        h5s_0: String,
        #[serde(default)]
        v0: f64,
        v: [f64; 2],
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    #[serde(default = "one")]
    pub g1: f64,
    pub h: HSection,
    pub v: VSection,
    /// Used where `β` vanishes.
    #[serde(default = "zeros")]
    pub w: [String; 3],
    #[serde(default = "zeros")]
    pub n1: [String; 3],
    #[serde(default = "ones")]
    pub n2: [String; 3],
    #[serde(default)]
    pub v0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub components: Vec<String>,
    /// Explicit points; the grid is used when absent.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
}

fn one() -> f64 {
    1.0
}
fn one_str() -> String {
    "1".into()
}
fn zeros() -> [String; 3] {
    ["0".into(), "0".into(), "0".into()]
}
fn ones() -> [String; 3] {
    ["1".into(), "1".into(), "1".into()]
}
fn default_counts() -> [usize; 2] {
    [17, 17]
}
fn default_samples() -> usize {
    33
}

/// A validated model: expressions parsed under the chart with parameters
/// substituted.
#[derive(Debug)]
pub struct Model {
    pub file: ModelFile,
    pub chart: SplitChart,
    pub geometry: Option<NGeometry>,
    pub ansatz: Option<Ansatz5D>,
    pub source: Option<SourceSpec>,
    pub mixed_source: Option<ComponentField>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<ModelFile, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Schema(e.to_string()))
    }
}

pub struct ExprContext<'a> {
    pub scope: Scope,
    pub params: &'a BTreeMap<String, f64>,
}

impl ExprContext<'_> {
    pub fn parse(&self, section: &str, text: &str) -> Result<Expr, HarnessError> {
        let e = parse(text, &self.scope).map_err(|source| HarnessError::Expression {
            section: section.to_string(),
            text: text.to_string(),
            source,
        })?;
        Ok(e.substitute(&|n| match n {
            Node::Param(p) => self.params.get(&**p).map(|v| Expr::constant(*v)),
            _ => None,
        }))
    }

    fn table(&self, section: &str, rows: &[Vec<String>]) -> Result<Vec<Vec<Expr>>, HarnessError> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, t)| self.parse(&format!("{section}[{i}][{j}]"), t))
                    .collect()
            })
            .collect()
    }

    pub fn triple(&self, section: &str, t: &[String; 3]) -> Result<[Expr; 3], HarnessError> {
        Ok([
            self.parse(&format!("{section}[0]"), &t[0])?,
            self.parse(&format!("{section}[1]"), &t[1])?,
            self.parse(&format!("{section}[2]"), &t[2])?,
        ])
    }
}

impl Model {
    pub fn context<'a>(file: &'a ModelFile, chart: &SplitChart) -> ExprContext<'a> {
        ExprContext {
            scope: Scope::new(chart.names(), file.parameters.keys().cloned()),
            params: &file.parameters,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Model, HarnessError> {
        if let Some(v) = file.schema {
            if v != SCHEMA_VERSION {
                return Err(HarnessError::Schema(format!(
                    "schema {v} is not supported (expected {SCHEMA_VERSION})"
                )));
            }
        }
        let uses_ansatz = file.ansatz.is_some() || file.solve.is_some();
        let chart = match &file.chart {
            Some(c) => SplitChart::new(c.horizontal.clone(), c.vertical.clone())
                .map_err(|e| HarnessError::Schema(format!("chart: {e}")))?,
            None => SplitChart::five_dimensional(),
        };
        if uses_ansatz && chart != SplitChart::five_dimensional() {
            return Err(HarnessError::Schema(
                "ansatz and solve sections need the chart x1 x2 x3 | v y5".into(),
            ));
        }
        if uses_ansatz && (file.metric.is_some() || file.nconnection.is_some()) {
            return Err(HarnessError::Schema(
                "give either an ansatz/solve section or metric/nconnection, not both".into(),
            ));
        }
        let cx = Model::context(&file, &chart);

        let ansatz = match &file.ansatz {
            Some(a) => Some(Ansatz5D {
                g1: a.g1,
                g2: cx.parse("ansatz.g2", &a.g2)?,
                g3: cx.parse("ansatz.g3", &a.g3)?,
                h4: cx.parse("ansatz.h4", &a.h4)?,
                h5: cx.parse("ansatz.h5", &a.h5)?,
                w: cx.triple("ansatz.w", &a.w)?,
                n: cx.triple("ansatz.n", &a.n)?,
            }),
            None => None,
        };
        let geometry = if let Some(a) = &ansatz {
            Some(crate::ansatz5d::build(a).map_err(|e| HarnessError::Invalid(e.to_string()))?)
        } else if file.metric.is_some() || file.nconnection.is_some() {
            let (n, m) = (chart.n(), chart.m());
            let metric = match &file.metric {
                Some(s) => DMetric::new(cx.table("metric.g", &s.g)?, cx.table("metric.h", &s.h)?)
                    .map_err(|e| HarnessError::Invalid(format!("metric: {e}")))?,
                None => DMetric::diagonal(vec![Expr::one(); n], vec![Expr::one(); m]),
            };
            let nconn = match &file.nconnection {
                Some(rows) => NConnection::from_rows(cx.table("nconnection", rows)?)
                    .map_err(|e| HarnessError::Invalid(format!("nconnection: {e}")))?,
                None => NConnection::zero(n, m),
            };
            Some(
                NGeometry::new(chart.clone(), metric, nconn)
                    .map_err(|e| HarnessError::Invalid(e.to_string()))?,
            )
        } else {
            None
        };

        let (mut source, mut mixed_source) = (None, None);
        if let Some(s) = &file.source {
            if s.mixed.is_some() && (s.upsilon2.is_some() || s.upsilon4.is_some()) {
                return Err(HarnessError::Schema(
                    "source: give either upsilon2/upsilon4 or mixed".into(),
                ));
            }
            if let Some(rows) = &s.mixed {
                let d = chart.dim();
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(HarnessError::Schema(format!("source.mixed must be {d} x {d}")));
                }
                let t = cx.table("source.mixed", rows)?;
                let k = s.k.unwrap_or(1.0);
                let slots = [Slot::up(SlotKind::Full), Slot::down(SlotKind::Full)];
                mixed_source = Some(ComponentField::from_fn("Upsilon", &slots, chart.n(), chart.m(), |x| {
                    t[x[0]][x[1]].scale(k)
                }));
            } else {
                let spec = SourceSpec {
                    upsilon2: cx.parse("source.upsilon2", s.upsilon2.as_deref().unwrap_or("0"))?,
                    upsilon4: cx.parse("source.upsilon4", s.upsilon4.as_deref().unwrap_or("0"))?,
                    k: s.k.unwrap_or(1.0),
                };
                spec.validate().map_err(|e| HarnessError::Invalid(format!("source: {e}")))?;
                source = Some(spec);
            }
        }
        if let Some(s) = &file.solve {
            validate_solve(&cx, s)?;
        }
        if let Some(g) = &file.geometry {
            for c in &g.components {
                if !super::run::GEOMETRY_COMPONENTS.contains(&c.as_str()) {
                    return Err(HarnessError::Schema(format!(
                        "geometry: unknown component '{c}' (known: {})",
                        super::run::GEOMETRY_COMPONENTS.join(", ")
                    )));
                }
            }
            if let Some(pts) = &g.points {
                if pts.iter().any(|p| p.len() != chart.dim()) {
                    return Err(HarnessError::Schema(format!(
                        "geometry.points must have {} coordinates",
                        chart.dim()
                    )));
                }
            }
        }
        for (name, v) in &file.tolerances {
            if super::run::default_tolerance(name).is_none() {
                let known: Vec<&str> = super::run::TOLERANCES.iter().map(|(n, _)| *n).collect();
                return Err(HarnessError::Schema(format!(
                    "tolerances: unknown name '{name}' (known: {})",
                    known.join(", ")
                )));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(HarnessError::Schema(format!("tolerances: bad value for {name}")));
            }
        }
        file.grid.validate(&chart)?;
        Ok(Model {
            file,
            chart,
            geometry,
            ansatz,
            source,
            mixed_source,
        })
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.file.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn source_or_vacuum(&self) -> SourceSpec {
        self.source.clone().unwrap_or_else(SourceSpec::vacuum)
    }
}

fn validate_solve(cx: &ExprContext, s: &SolveSection) -> Result<(), HarnessError> {
    match &s.h {
        HSection::Verify { g2, g3 } => {
            cx.parse("solve.h.g2", g2)?;
            cx.parse("solve.h.g3", g3)?;
        }
        HSection::Conformal { boundary, .. } => {
            cx.parse("solve.h.boundary", boundary)?;
        }
    }
    match &s.v {
        VSection::Vacuum { h5, h0 } => {
            cx.parse("solve.v.h5", h5)?;
            cx.parse("solve.v.h0", h0)?;
        }
        VSection::Ode { h4, h5_0, h5s_0, samples, .. } => {
            cx.parse("solve.v.h4", h4)?;
            cx.parse("solve.v.h5_0", h5_0)?;
            cx.parse("solve.v.h5s_0", h5s_0)?;
            if *samples < 2 {
                return Err(HarnessError::Schema("solve.v.samples must be at least 2".into()));
            }
        }
    }
    cx.triple("solve.w", &s.w)?;
    cx.triple("solve.n1", &s.n1)?;
    cx.triple("solve.n2", &s.n2)?;
    Ok(())
}
