//! Run configuration, the report model and its JSON / CSV renderings.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{analyze_grid, classify_samples, MaxResiduals, SampleAnalysis, SampleGrid, Verdict, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::normal_bundle::{tension, NBPoint, DEFAULT_FIBER_BOUND};
use crate::oracle::{fd_bitension, oracle_bitension, oracle_e3, oracle_tension, FD_STEP};
use crate::surface::{Domain, SurfaceKind, SurfacePatch};
use crate::vector::{norm6, sub6};
use crate::{bitension::bitension_t0, frame::principal_data_at};

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_GRID: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Analyze,
    Classify,
    VerifyOracle,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn default_grid() -> [usize; 2] {
    [9, 9]
}

fn default_fiber() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceKind,
    /// Defaults to the catalog domain of the surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
    #[serde(default = "default_fiber")]
    pub t: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mode: Mode,
    /// Also run the finite-difference bitension check (verify-oracle only).
    #[serde(default)]
    pub finite_differences: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn new(surface: SurfaceKind) -> Self {
        RunConfig {
            surface,
            domain: None,
            grid: default_grid(),
            t: default_fiber(),
            tol: default_tol(),
            mode: Mode::default(),
            finite_differences: false,
            out: None,
            format: Format::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.iter().any(|&n| n < MIN_GRID) {
            return Err(Error::ConfigParse(format!(
                "grid {}x{} is smaller than {MIN_GRID}x{MIN_GRID}",
                self.grid[0], self.grid[1]
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::ConfigParse(format!("tolerance must be positive and finite, got {}", self.tol)));
        }
        if self.t.is_empty() {
            return Err(Error::ConfigParse("at least one fibre sample is required".into()));
        }
        if let Some(&t) = self.t.iter().find(|t| !t.is_finite() || t.abs() > DEFAULT_FIBER_BOUND) {
            return Err(Error::FiberOutOfRange { t, bound: DEFAULT_FIBER_BOUND });
        }
        Ok(())
    }

    pub fn patch(&self) -> Result<SurfacePatch> {
        let domain = self.domain.unwrap_or_else(|| self.surface.default_domain());
        SurfacePatch::new(self.surface.clone(), domain)
    }
}

/// Oracle disagreement at one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleDeltas {
    /// `|τ_closed - τ_oracle|`; absent where the closed form is unavailable.
    pub tension: Option<f64>,
    pub e3comp: Option<f64>,
    /// Only at `t = 0`.
    pub bitension: Option<f64>,
    /// Finite differences against the jet oracle, when requested.
    pub finite_difference: Option<f64>,
}

/// One `(point, t)` sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub index: usize,
    pub u: f64,
    pub v: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub tau_norm: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub e3comp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDeltas>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub tension: f64,
    pub e3comp: f64,
    pub bitension: f64,
    pub finite_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub points: usize,
    pub records: usize,
    pub umbilic_points: usize,
    /// Umbilic points where curvature derivatives (and `P`, `Q`, `e3comp`) are undefined.
    pub unreliable_points: usize,
    pub max: MaxResiduals,
    pub mean: MaxResiduals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_max: Option<OracleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub config: RunConfig,
    /// `None` when the classification was inconclusive; see `inconclusive`.
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<String>,
    pub summary: Summary,
    pub records: Vec<Record>,
}

impl Report {
    pub fn is_inconclusive(&self) -> bool {
        self.inconclusive.is_some()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => render_json(self),
            Format::Csv => Ok(render_csv(self)),
        }
    }
}

fn mean_residuals(samples: &[SampleAnalysis]) -> MaxResiduals {
    let n = samples.len().max(1) as f64;
    let fibers = samples.iter().map(|s| s.fibers.len()).sum::<usize>().max(1) as f64;
    let e3_count = samples.iter().map(|s| s.residuals.e3comp.len()).sum::<usize>().max(1) as f64;
    let sum = |f: &dyn Fn(&SampleAnalysis) -> f64| samples.iter().map(f).sum::<f64>();
    MaxResiduals {
        c1: sum(&|s| s.residuals.c1) / n,
        c2: sum(&|s| s.residuals.c2) / n,
        c3: sum(&|s| s.residuals.c3) / n,
        c4: sum(&|s| s.residuals.c4) / n,
        e3comp: sum(&|s| s.residuals.e3comp.iter().map(|(_, v)| v.abs()).sum()) / e3_count,
        tension: sum(&|s| s.fibers.iter().map(|f| f.tau_norm).sum()) / fibers,
        bitension_t0: sum(&|s| norm6(&s.residuals.bitension_t0)) / n,
    }
}

fn oracle_deltas(patch: &SurfacePatch, uv: [f64; 2], t: f64, finite_differences: bool) -> Result<OracleDeltas> {
    let pd = principal_data_at(patch, uv)?;
    let reliable = pd.derivatives_reliable;
    let oracle_tau = oracle_tension(patch, uv, t)?;
    let np = NBPoint::new(pd, t)?;
    let tension_delta = if reliable { Some(norm6(&sub6(&tension(&np)?.tau, &oracle_tau))) } else { None };
    let e3_delta = if reliable {
        Some((crate::bitension::e3_component(&np)? - oracle_e3(patch, uv, t)?).abs())
    } else {
        None
    };
    let bitension = if t == 0.0 {
        Some(norm6(&sub6(&bitension_t0(&np.pd), &oracle_bitension(patch, uv, 0.0)?)))
    } else {
        None
    };
    let finite_difference = if finite_differences {
        Some(norm6(&sub6(&fd_bitension(patch, uv, t, FD_STEP)?, &oracle_bitension(patch, uv, t)?)))
    } else {
        None
    };
    Ok(OracleDeltas { tension: tension_delta, e3comp: e3_delta, bitension, finite_difference })
}

fn records(samples: &[SampleAnalysis], oracle: Option<&[OracleDeltas]>) -> Vec<Record> {
    let mut out = Vec::new();
    for s in samples {
        for f in &s.fibers {
            let index = out.len();
            out.push(Record {
                index,
                u: s.uv[0],
                v: s.uv[1],
                t: f.t,
                a: s.a,
                b: s.b,
                p: f.p,
                q: f.q,
                r: f.r,
                tau_norm: f.tau_norm,
                c1: s.residuals.c1,
                c2: s.residuals.c2,
                c3: s.residuals.c3,
                c4: s.residuals.c4,
                e3comp: f.e3comp,
                oracle: oracle.map(|o| o[index]),
            });
        }
    }
    out
}

fn max_opt(xs: impl Iterator<Item = Option<f64>>) -> f64 {
    xs.flatten().fold(0.0, f64::max)
}

/// Executes the configured mode. Inconclusive classifications are recorded in
/// the report; every other failure is returned as an error.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let patch = config.patch()?;
    let grid = SampleGrid::new(config.grid[0], config.grid[1], config.t.clone())?;
    let samples = analyze_grid(&patch, &grid)?;

    let (verdict, inconclusive) = match classify_samples(&patch, &samples, &grid.fiber, config.tol) {
        Ok(v) => (Some(v), None),
        Err(Error::InconclusiveClassification(reason)) => (None, Some(reason)),
        Err(e) => return Err(e),
    };

    let oracle = if config.mode == Mode::VerifyOracle {
        let jobs: Vec<([f64; 2], f64)> =
            samples.iter().flat_map(|s| s.fibers.iter().map(move |f| (s.uv, f.t))).collect();
        let deltas: Vec<OracleDeltas> = jobs
            .par_iter()
            .map(|&(uv, t)| oracle_deltas(&patch, uv, t, config.finite_differences))
            .collect::<Result<_>>()?;
        Some(deltas)
    } else {
        None
    };

    let records = if config.mode == Mode::Classify { Vec::new() } else { records(&samples, oracle.as_deref()) };
    let oracle_max = oracle.as_ref().map(|d| OracleSummary {
        tension: max_opt(d.iter().map(|x| x.tension)),
        e3comp: max_opt(d.iter().map(|x| x.e3comp)),
        bitension: max_opt(d.iter().map(|x| x.bitension)),
        finite_difference: config.finite_differences.then(|| max_opt(d.iter().map(|x| x.finite_difference))),
    });
    let summary = Summary {
        points: samples.len(),
        records: samples.iter().map(|s| s.fibers.len()).sum(),
        umbilic_points: samples.iter().filter(|s| s.umbilic).count(),
        unreliable_points: samples.iter().filter(|s| !s.derivatives_reliable).count(),
        max: MaxResiduals::from_samples(&samples),
        mean: mean_residuals(&samples),
        oracle_max,
    };
    let mut echo = config.clone();
    echo.domain = Some(*patch.domain());
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        tool: Tool { name: "nbtb".into(), version: env!("CARGO_PKG_VERSION").into() },
        config: echo,
        verdict,
        inconclusive,
        summary,
        records,
    })
}

pub fn render_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::ConfigParse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

pub const CSV_COLUMNS: [&str; 19] = [
    "index", "u", "v", "t", "a", "b", "p", "q", "r", "tau_norm", "c1", "c2", "c3", "c4", "e3comp",
    "oracle_tension", "oracle_e3comp", "oracle_bitension", "oracle_finite_difference",
];

/// Per-record rows with 17 significant digits, preceded by `#` comment lines
/// carrying the verdict and summary.
pub fn render_csv(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema_version: {}", report.schema_version);
    let _ = writeln!(out, "# tool: {} {}", report.tool.name, report.tool.version);
    let _ = writeln!(out, "# surface: {}", report.config.surface);
    match (&report.verdict, &report.inconclusive) {
        (Some(v), _) => {
            let _ = writeln!(out, "# class: {}", v.class.name());
            match v.class {
                crate::classify::SurfaceClass::RoundSphere { curvature }
                | crate::classify::SurfaceClass::CircularCylinder { curvature } => {
                    let _ = writeln!(out, "# curvature: {}", csv_float(curvature));
                }
                _ => {}
            }
            let _ = writeln!(out, "# biharmonic: {}", v.biharmonic);
            for w in &v.evidence {
                let _ = writeln!(
                    out,
                    "# witness: {} u={} v={} t={} value={}",
                    w.condition,
                    csv_float(w.uv[0]),
                    csv_float(w.uv[1]),
                    csv_opt(w.t),
                    csv_float(w.value)
                );
            }
        }
        (None, Some(reason)) => {
            let _ = writeln!(out, "# class: inconclusive");
            let _ = writeln!(out, "# reason: {reason}");
        }
        (None, None) => {}
    }
    let m = &report.summary.max;
    let _ = writeln!(
        out,
        "# max: c1={} c2={} c3={} c4={} e3comp={} tension={} bitension_t0={}",
        csv_float(m.c1),
        csv_float(m.c2),
        csv_float(m.c3),
        csv_float(m.c4),
        csv_float(m.e3comp),
        csv_float(m.tension),
        csv_float(m.bitension_t0)
    );
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in &report.records {
        let o = r.oracle;
        let fields = [
            r.index.to_string(),
            csv_float(r.u),
            csv_float(r.v),
            csv_float(r.t),
            csv_float(r.a),
            csv_float(r.b),
            csv_opt(r.p),
            csv_opt(r.q),
            csv_opt(r.r),
            csv_float(r.tau_norm),
            csv_float(r.c1),
            csv_float(r.c2),
            csv_float(r.c3),
            csv_float(r.c4),
            csv_opt(r.e3comp),
            csv_opt(o.and_then(|o| o.tension)),
            csv_opt(o.and_then(|o| o.e3comp)),
            csv_opt(o.and_then(|o| o.bitension)),
            csv_opt(o.and_then(|o| o.finite_difference)),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::SurfaceClass;

    fn config(s: &str) -> RunConfig {
        let mut c = RunConfig::new(s.parse().unwrap());
        c.grid = [5, 5];
        c
    }

    #[test]
    fn sphere_analysis() {
        let report = run(&config("sphere:r=1")).unwrap();
        assert!(matches!(report.verdict.as_ref().unwrap().class, SurfaceClass::RoundSphere { .. }));
        assert_eq!(report.records.len(), 25 * 3);
        assert_eq!(report.schema_version, 1);
        assert!(report.config.domain.is_some());
    }

    #[test]
    fn classify_mode_omits_records() {
        let mut c = config("catenoid:c=1");
        c.mode = Mode::Classify;
        let report = run(&c).unwrap();
        assert!(report.records.is_empty());
        let v = report.verdict.unwrap();
        assert_eq!(v.class, SurfaceClass::Minimal);
        assert!(v.biharmonic);
    }

    #[test]
    fn verify_oracle_records_deltas() {
        let mut c = config("torus:R=2,r=0.5");
        c.mode = Mode::VerifyOracle;
        c.grid = [3, 3];
        let report = run(&c).unwrap();
        let om = report.summary.oracle_max.unwrap();
        assert!(om.tension < 1e-6 && om.bitension < 1e-5, "{om:?}");
        assert!(report.records.iter().all(|r| r.oracle.is_some()));
    }

    #[test]
    fn config_validation() {
        let mut c = config("plane");
        c.grid = [2, 9];
        assert!(matches!(run(&c), Err(Error::ConfigParse(_))));
        let mut c = config("plane");
        c.tol = -1.0;
        assert!(matches!(run(&c), Err(Error::ConfigParse(_))));
        let mut c = config("plane");
        c.t = vec![0.0, 11.0];
        assert!(matches!(run(&c), Err(Error::FiberOutOfRange { .. })));
    }

    #[test]
    fn csv_and_json_carry_the_same_numbers() {
        let report = run(&config("ellipsoid:p=2,q=1.5,s=1")).unwrap();
        let json: serde_json::Value = serde_json::from_str(&render_json(&report).unwrap()).unwrap();
        let csv = render_csv(&report);
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.len(), report.records.len());
        for (row, rec) in rows.iter().zip(json["records"].as_array().unwrap()) {
            let cells: Vec<&str> = row.split(',').collect();
            for (k, name) in CSV_COLUMNS.iter().enumerate().skip(1).take(14) {
                let from_csv: Option<f64> = (!cells[k].is_empty()).then(|| cells[k].parse().unwrap());
                assert_eq!(from_csv, rec[name].as_f64(), "{name}");
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let c = config("torus:R=2,r=0.5");
        let a = run(&c).unwrap().render(Format::Json).unwrap();
        let b = run(&c).unwrap().render(Format::Json).unwrap();
        assert_eq!(a, b);
    }
}
