//! Sampling a patch over a grid of surface points and fibre heights, and
//! sorting it into minimal, round sphere, circular cylinder or neither.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitension::{e3_component, tangential_conditions, TangentialResiduals};
use crate::error::{Error, Result};
use crate::frame::principal_data_at;
use crate::normal_bundle::{tension, NBPoint, DEFAULT_FIBER};
use crate::oracle::{oracle_bitension, oracle_tension};
use crate::surface::SurfacePatch;
use crate::vector::norm6;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Residuals in `(tol, HYSTERESIS * tol]` are neither pass nor fail.
pub const HYSTERESIS: f64 = 10.0;

/// Surface grid `nu × nv` (corners included) and fibre heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub nu: usize,
    pub nv: usize,
    pub fiber: Vec<f64>,
}

impl SampleGrid {
    pub fn new(nu: usize, nv: usize, fiber: Vec<f64>) -> Result<Self> {
        if nu == 0 || nv == 0 {
            return Err(Error::ConfigParse("sample grid must be nonempty".into()));
        }
        if fiber.iter().any(|t| !t.is_finite()) {
            return Err(Error::ConfigParse("fibre samples must be finite".into()));
        }
        Ok(SampleGrid { nu, nv, fiber })
    }

    pub fn with_default_fiber(nu: usize, nv: usize) -> Self {
        SampleGrid { nu, nv, fiber: DEFAULT_FIBER.to_vec() }
    }
}

/// Values at one fibre height over a surface point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSample {
    pub t: f64,
    /// `P, Q, R`; absent at umbilics where curvature derivatives are undefined.
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub tau_norm: f64,
    pub e3comp: Option<f64>,
}

/// Everything computed at one surface point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleAnalysis {
    pub uv: [f64; 2],
    pub a: f64,
    pub b: f64,
    pub umbilic: bool,
    pub derivatives_reliable: bool,
    pub residuals: TangentialResiduals,
    pub fibers: Vec<FiberSample>,
}

pub fn analyze_point(patch: &SurfacePatch, uv: [f64; 2], fiber: &[f64]) -> Result<SampleAnalysis> {
    let pd = principal_data_at(patch, uv)?;
    let mut residuals = tangential_conditions(&pd);
    let mut fibers = Vec::with_capacity(fiber.len());
    for &t in fiber {
        let np = NBPoint::new(pd.clone(), t)?;
        let sample = if pd.derivatives_reliable {
            let tv = tension(&np)?;
            let e3 = e3_component(&np)?;
            residuals.e3comp.push((t, e3));
            FiberSample { t, p: Some(tv.p), q: Some(tv.q), r: Some(tv.r), tau_norm: tv.norm(), e3comp: Some(e3) }
        } else {
            let tau = oracle_tension(patch, uv, t)?;
            FiberSample { t, p: None, q: None, r: None, tau_norm: norm6(&tau), e3comp: None }
        };
        fibers.push(sample);
    }
    Ok(SampleAnalysis {
        uv,
        a: pd.a,
        b: pd.b,
        umbilic: pd.umbilic,
        derivatives_reliable: pd.derivatives_reliable,
        residuals,
        fibers,
    })
}

/// Analyses every grid point in parallel; results are in grid order.
pub fn analyze_grid(patch: &SurfacePatch, grid: &SampleGrid) -> Result<Vec<SampleAnalysis>> {
    patch
        .domain()
        .grid(grid.nu, grid.nv)
        .into_par_iter()
        .map(|uv| analyze_point(patch, uv, &grid.fiber))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SurfaceClass {
    Minimal,
    RoundSphere { curvature: f64 },
    CircularCylinder { curvature: f64 },
    NotTangentiallyBiharmonic,
}

impl SurfaceClass {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceClass::Minimal => "minimal",
            SurfaceClass::RoundSphere { .. } => "round_sphere",
            SurfaceClass::CircularCylinder { .. } => "circular_cylinder",
            SurfaceClass::NotTangentiallyBiharmonic => "not_tangentially_biharmonic",
        }
    }
}

/// Worst values over the grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MaxResiduals {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub e3comp: f64,
    pub tension: f64,
    pub bitension_t0: f64,
}

impl MaxResiduals {
    pub fn max_condition_and_e3(&self) -> f64 {
        self.c1.max(self.c2).max(self.c3).max(self.c4).max(self.e3comp)
    }

    pub fn from_samples(samples: &[SampleAnalysis]) -> Self {
        samples.iter().fold(MaxResiduals::default(), |m, s| {
            let r = &s.residuals;
            MaxResiduals {
                c1: m.c1.max(r.c1),
                c2: m.c2.max(r.c2),
                c3: m.c3.max(r.c3),
                c4: m.c4.max(r.c4),
                e3comp: m.e3comp.max(r.max_e3()),
                tension: s.fibers.iter().fold(m.tension, |acc, f| acc.max(f.tau_norm)),
                bitension_t0: m.bitension_t0.max(norm6(&r.bitension_t0)),
            }
        })
    }
}

/// A sample point where a condition fails, with the offending value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub condition: String,
    pub uv: [f64; 2],
    pub t: Option<f64>,
    pub value: f64,
}

/// One decision in the classification, `passed` iff `value <= tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: SurfaceClass,
    pub max_residuals: MaxResiduals,
    /// Whether the full bitension vanishes on every sample.
    pub biharmonic: bool,
    pub evidence: Vec<Witness>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Band {
    Pass,
    Ambiguous,
    Fail,
}

fn band(value: f64, tol: f64) -> Band {
    if value <= tol {
        Band::Pass
    } else if value <= HYSTERESIS * tol {
        Band::Ambiguous
    } else {
        Band::Fail
    }
}

fn inconclusive(name: &str, value: f64, tol: f64) -> Error {
    Error::InconclusiveClassification(format!(
        "{name} = {value:e} lies between the tolerance {tol:e} and {:e}",
        HYSTERESIS * tol
    ))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n.max(1) as f64
}

/// Largest of `|a - b|` and the spread of `a, b` about their mean, scaled by
/// `max(1, |mean|)`.
fn sphere_defect(samples: &[SampleAnalysis]) -> (f64, f64) {
    let k = mean(samples.iter().map(|s| 0.5 * (s.a + s.b)));
    let worst = samples.iter().fold(0.0f64, |m, s| {
        m.max((s.a - s.b).abs()).max((s.a - k).abs()).max((s.b - k).abs())
    });
    (worst / 1.0f64.max(k.abs()), k)
}

/// Largest of `min(|a|, |b|)` and the scaled spread of the other curvature.
fn cylinder_defect(samples: &[SampleAnalysis]) -> (f64, f64) {
    let split = |s: &SampleAnalysis| if s.a.abs() <= s.b.abs() { (s.a, s.b) } else { (s.b, s.a) };
    let k = mean(samples.iter().map(|s| split(s).1));
    let worst_zero = samples.iter().fold(0.0f64, |m, s| m.max(split(s).0.abs()));
    let spread = samples.iter().fold(0.0f64, |m, s| m.max((split(s).1 - k).abs()));
    (worst_zero.max(spread / 1.0f64.max(k.abs())), k)
}

fn worst<'a>(
    samples: &'a [SampleAnalysis],
    value: impl Fn(&'a SampleAnalysis) -> Vec<(Option<f64>, f64)>,
) -> Option<([f64; 2], Option<f64>, f64)> {
    let mut best: Option<([f64; 2], Option<f64>, f64)> = None;
    for s in samples {
        for (t, v) in value(s) {
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((s.uv, t, v));
            }
        }
    }
    best
}

fn tangential_witnesses(samples: &[SampleAnalysis], tol: f64) -> Vec<Witness> {
    type Probe = fn(&SampleAnalysis) -> Vec<(Option<f64>, f64)>;
    let probes: [(&str, Probe); 5] = [
        ("c1", |s| vec![(None, s.residuals.c1)]),
        ("c2", |s| vec![(None, s.residuals.c2)]),
        ("c3", |s| vec![(None, s.residuals.c3)]),
        ("c4", |s| vec![(None, s.residuals.c4)]),
        ("e3comp", |s| s.residuals.e3comp.iter().map(|&(t, v)| (Some(t), v.abs())).collect()),
    ];
    probes
        .iter()
        .filter_map(|(name, probe)| {
            worst(samples, probe)
                .filter(|&(_, _, v)| v > tol)
                .map(|(uv, t, value)| Witness { condition: name.to_string(), uv, t, value })
        })
        .collect()
}

/// Largest `|τ₂|` over the grid: the zero-section closed form everywhere, and
/// the oracle at every nonzero fibre height. The oracle pass is skipped when
/// the zero section already fails.
fn max_bitension(patch: &SurfacePatch, samples: &[SampleAnalysis], fiber: &[f64], tol: f64) -> Result<(f64, Option<Witness>)> {
    let at_zero = worst(samples, |s| vec![(Some(0.0), norm6(&s.residuals.bitension_t0))]);
    let mut best = at_zero.unwrap_or(([0.0; 2], None, 0.0));
    if best.2 <= tol {
        let jobs: Vec<([f64; 2], f64)> = samples
            .iter()
            .flat_map(|s| fiber.iter().filter(|&&t| t != 0.0).map(move |&t| (s.uv, t)))
            .collect();
        let values: Vec<f64> = jobs
            .par_iter()
            .map(|&(uv, t)| oracle_bitension(patch, uv, t).map(|v| norm6(&v)))
            .collect::<Result<_>>()?;
        for (&(uv, t), &v) in jobs.iter().zip(&values) {
            if v > best.2 {
                best = (uv, Some(t), v);
            }
        }
    }
    let witness = (best.2 > tol).then(|| Witness { condition: "bitension".into(), uv: best.0, t: best.1, value: best.2 });
    Ok((best.2, witness))
}

pub fn classify(patch: &SurfacePatch, grid: &SampleGrid, tol: f64) -> Result<Verdict> {
    let samples = analyze_grid(patch, grid)?;
    classify_samples(patch, &samples, &grid.fiber, tol)
}

/// Classification from precomputed samples of `patch`.
///
/// The classes are tried in the order minimal, round sphere, circular
/// cylinder; a value inside the hysteresis band at any step makes the result
/// inconclusive rather than falling through.
pub fn classify_samples(patch: &SurfacePatch, samples: &[SampleAnalysis], fiber: &[f64], tol: f64) -> Result<Verdict> {
    if samples.is_empty() {
        return Err(Error::ConfigParse("sample grid must be nonempty".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ConfigParse(format!("tolerance must be positive, got {tol}")));
    }
    let max_residuals = MaxResiduals::from_samples(samples);
    let mut checks = Vec::new();
    let mut record = |name: &str, value: f64| {
        checks.push(Check { name: name.into(), value, passed: value <= tol });
        band(value, tol)
    };

    let tangential = max_residuals.max_condition_and_e3();
    let class = 'class: {
        match record("minimal", max_residuals.tension) {
            Band::Pass => {
                // c3, c4 need not vanish on minimal surfaces; only the first-order conditions do
                let first_order = max_residuals.c1.max(max_residuals.c2).max(max_residuals.e3comp);
                if record("minimal_first_order_conditions", first_order) != Band::Pass {
                    return Err(inconclusive("first-order conditions on a minimal surface", first_order, tol));
                }
                break 'class SurfaceClass::Minimal;
            }
            Band::Ambiguous => return Err(inconclusive("max |τ|", max_residuals.tension, tol)),
            Band::Fail => {}
        }
        let (defect, curvature) = sphere_defect(samples);
        match record("round_sphere", defect) {
            Band::Pass => break 'class SurfaceClass::RoundSphere { curvature },
            Band::Ambiguous => return Err(inconclusive("umbilic spread", defect, tol)),
            Band::Fail => {}
        }
        let (defect, curvature) = cylinder_defect(samples);
        match record("circular_cylinder", defect) {
            Band::Pass => break 'class SurfaceClass::CircularCylinder { curvature },
            Band::Ambiguous => return Err(inconclusive("cylinder spread", defect, tol)),
            Band::Fail => {}
        }
        match record("tangential_conditions", tangential) {
            Band::Fail => SurfaceClass::NotTangentiallyBiharmonic,
            Band::Ambiguous => return Err(inconclusive("tangential residual", tangential, tol)),
            Band::Pass => {
                return Err(Error::InconclusiveClassification(format!(
                    "tangential residuals vanish (max {tangential:e}) on a surface that is neither minimal, spherical nor cylindrical"
                )))
            }
        }
    };
    if matches!(class, SurfaceClass::RoundSphere { .. } | SurfaceClass::CircularCylinder { .. })
        && record("tangential_conditions", tangential) != Band::Pass
    {
        return Err(inconclusive("tangential residual on a constant-curvature surface", tangential, tol));
    }

    let (bitension, bitension_witness) = max_bitension(patch, samples, fiber, tol)?;
    let biharmonic = record("bitension", bitension) == Band::Pass;
    let consistent = biharmonic == (class == SurfaceClass::Minimal);
    checks.push(Check { name: "biharmonic_iff_minimal".into(), value: if consistent { 0.0 } else { 1.0 }, passed: consistent });
    if !consistent {
        return Err(Error::InconclusiveClassification(format!(
            "bitension max {bitension:e} contradicts class {}",
            class.name()
        )));
    }

    let mut evidence = if class == SurfaceClass::NotTangentiallyBiharmonic { tangential_witnesses(samples, tol) } else { Vec::new() };
    evidence.extend(bitension_witness);
    Ok(Verdict { class, max_residuals, biharmonic, evidence, checks })
}
