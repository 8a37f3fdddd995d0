//! Bitension field of the normal bundle on the zero section, the tangential
//! biharmonicity conditions, the `ẽ₃` component of the bitension and its
//! polynomial structure in `t`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::PrincipalData;
use crate::jet::Jet2;
use crate::normal_bundle::NBPoint;
use crate::vector::{dot3, join6, R6};

/// Residuals of the tangential biharmonicity conditions at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialResiduals {
    /// `|(5a+b) e₁(a+b)|`
    pub c1: f64,
    /// `|(a+5b) e₂(a+b)|`
    pub c2: f64,
    /// `|(a-b)² e₁a|`, zero at umbilics.
    pub c3: f64,
    /// `|(a-b)² e₂b|`, zero at umbilics.
    pub c4: f64,
    /// `⟨τ₂(f), ẽ₃⟩` over the fibre samples, paired with `t`.
    pub e3comp: Vec<(f64, f64)>,
    pub bitension_t0: R6,
}

impl TangentialResiduals {
    pub fn max_condition(&self) -> f64 {
        self.c1.max(self.c2).max(self.c3).max(self.c4)
    }

    pub fn max_e3(&self) -> f64 {
        self.e3comp.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }
}

/// `τ₂(f)` on the zero section:
/// `-(Δ_M(a+b)N + (5a+b)e₁(a+b)e₁ + (a+5b)e₂(a+b)e₂ + (a+b)(3a²-2ab+3b²)N, 0)`.
pub fn bitension_t0(pd: &PrincipalData) -> R6 {
    let (a, b) = (pd.a, pd.b);
    let [g1, g2] = pd.grad_trace;
    let normal = pd.lap_trace + (a + b) * (3.0 * a * a - 2.0 * a * b + 3.0 * b * b);
    let first: [f64; 3] = std::array::from_fn(|k| {
        -(normal * pd.normal[k] + (5.0 * a + b) * g1 * pd.e1[k] + (a + 5.0 * b) * g2 * pd.e2[k])
    });
    join6(&first, &[0.0; 3])
}

/// `c1..c4` and `τ₂|_{t=0}`; `e3comp` is left empty.
pub fn tangential_conditions(pd: &PrincipalData) -> TangentialResiduals {
    let (a, b) = (pd.a, pd.b);
    let [g1, g2] = pd.grad_trace;
    let (c3, c4) = if pd.umbilic {
        (0.0, 0.0)
    } else {
        let gap2 = (a - b) * (a - b);
        ((gap2 * pd.d1a).abs(), (gap2 * pd.d2b).abs())
    };
    TangentialResiduals {
        c1: ((5.0 * a + b) * g1).abs(),
        c2: ((a + 5.0 * b) * g2).abs(),
        c3,
        c4,
        e3comp: Vec::new(),
        bitension_t0: bitension_t0(pd),
    }
}

/// `⟨τ₂(f), ẽ₃⟩ = ⟨Δ(Pte₁ + Qte₂), N⟩`, expanded along the principal frame:
///
/// `-t(1+t²a²)⁻¹{2(e₁P)a - ω₁²(e₁)Qb + P⟨D_{e₁}D_{e₁}e₁, N⟩ + Q⟨D_{e₁}D_{e₁}e₂, N⟩}`
/// `-t(1+t²b²)⁻¹{2(e₂Q)b - ω₂¹(e₂)Pa + P⟨D_{e₂}D_{e₂}e₁, N⟩ + Q⟨D_{e₂}D_{e₂}e₂, N⟩}`.
pub fn e3_component(np: &NBPoint) -> Result<f64> {
    let pd = &np.pd;
    if !pd.derivatives_reliable {
        return Err(Error::UmbilicDerivativesUnavailable { u: pd.uv[0], v: pd.uv[1] });
    }
    let j = &pd.jets;
    let t = np.t;
    let t2 = t * t;
    let c1sq = (j.a * j.a * t2 + 1.0).try_recip()?;
    let c2sq = (j.b * j.b * t2 + 1.0).try_recip()?;
    let p_jet: Jet2 = c1sq * c1sq * j.along(1, &j.a) + c1sq * c2sq * j.along(1, &j.b);
    let q_jet: Jet2 = c1sq * c2sq * j.along(2, &j.a) + c2sq * c2sq * j.along(2, &j.b);
    let (p, q) = (p_jet.value(), q_jet.value());
    let e1p = j.along(1, &p_jet).value();
    let e2q = j.along(2, &q_jet).value();
    let second = |i: usize, field| dot3(&j.along_vec(i, &j.along_vec(i, field)).value(), &pd.normal);
    let (a, b) = (pd.a, pd.b);
    let omega21_e2 = -pd.omega12_e2;

    let along_e1 = 2.0 * e1p * a - pd.omega12_e1 * q * b + p * second(1, &j.e1) + q * second(1, &j.e2);
    let along_e2 = 2.0 * e2q * b - omega21_e2 * p * a + p * second(2, &j.e1) + q * second(2, &j.e2);
    Ok(-t / (1.0 + t2 * a * a) * along_e1 - t / (1.0 + t2 * b * b) * along_e2)
}

/// Fibre samples used by [`leading_term_check`].
pub const LEADING_TERM_SAMPLES: usize = 24;
pub const LEADING_TERM_RANGE: [f64; 2] = [0.1, 2.4];
const MAX_FIT_CONDITION: f64 = 1e12;
/// Odd monomials `s, s³, ..., s¹⁹` in the scaled variable `s = t / t_max`.
const FIT_DEGREE: usize = 19;

/// Outcome of the polynomial-structure check of `F(t) = (1+t²a²)⁴(1+t²b²)⁴⟨τ₂, ẽ₃⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingTermCheck {
    /// How far `F - L` is from a multiple of `(1+t²a²)(1+t²b²)`, where
    /// `L = 8t³[(1+t²b²)⁴a²(e₁a)² + (1+t²a²)⁴b²(e₂b)²]`: the largest
    /// remainder coefficient relative to the coefficient sum of `F` or `L`.
    pub remainder: f64,
    /// How far `F` is from an odd polynomial of degree ≤ 19; relative to `scale`.
    pub fit_residual: f64,
    pub max_f: f64,
    pub max_leading: f64,
    /// `max(max|F|, max|L|)` on the samples; residuals are absolute when this is zero.
    pub scale: f64,
    pub condition: f64,
}

fn evenly_spaced(range: [f64; 2], n: usize) -> Vec<f64> {
    (0..n).map(|k| range[0] + (range[1] - range[0]) * k as f64 / (n - 1) as f64).collect()
}

/// Least-squares solve of `M c ≈ Y` (column by column) with the 2-norm
/// condition of `M`.
fn lstsq(m: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (hi, lo) = (sv.max(), sv.min());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_FIT_CONDITION {
        return Err(Error::IllConditionedFit { condition });
    }
    let coeffs = svd
        .solve(y, 0.0)
        .map_err(|_| Error::IllConditionedFit { condition })?;
    Ok((coeffs, condition))
}

/// Fits `F` over the given fibre samples and verifies the divisibility
/// structure `F - L = (1+t²a²)(1+t²b²) B` with `B` an odd polynomial.
///
/// Both `F` and `L` are fitted as odd polynomials in `s = t / t_max`; the
/// division by `(1+t²a²)(1+t²b²)` is then a least-squares problem on the
/// coefficients, whose residual is the remainder.
pub fn leading_term_check(pd: &PrincipalData, samples: &[f64]) -> Result<LeadingTermCheck> {
    let n_odd = FIT_DEGREE.div_ceil(2);
    if samples.len() < LEADING_TERM_SAMPLES {
        return Err(Error::InvalidSurface(format!(
            "leading-term check needs at least {LEADING_TERM_SAMPLES} fibre samples"
        )));
    }
    let t_max = samples.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (a2, b2) = (pd.a * pd.a, pd.b * pd.b);
    let (lead_a, lead_b) = (8.0 * a2 * pd.d1a * pd.d1a, 8.0 * b2 * pd.d2b * pd.d2b);

    let mut values = DMatrix::zeros(samples.len(), 2);
    let (mut max_f, mut max_leading) = (0.0f64, 0.0f64);
    for (k, &t) in samples.iter().enumerate() {
        let np = NBPoint::new(pd.clone(), t)?;
        let (da, db) = (1.0 + t * t * a2, 1.0 + t * t * b2);
        let f = da.powi(4) * db.powi(4) * e3_component(&np)?;
        let l = t.powi(3) * (db.powi(4) * lead_a + da.powi(4) * lead_b);
        max_f = max_f.max(f.abs());
        max_leading = max_leading.max(l.abs());
        values[(k, 0)] = f;
        values[(k, 1)] = l;
    }
    let scale = max_f.max(max_leading);
    let norm = if scale > 0.0 { scale } else { 1.0 };

    let s: Vec<f64> = samples.iter().map(|t| t / t_max).collect();
    let vandermonde = DMatrix::from_fn(s.len(), n_odd, |r, c| s[r].powi(2 * c as i32 + 1));
    let (coeffs, cond_fit) = lstsq(&vandermonde, &values)?;
    let fit = (&values - &vandermonde * &coeffs).column(0).amax();

    // coefficients of s, s³, ...: multiplication by 1 + αs² + βs⁴
    let (alpha, beta) = ((a2 + b2) * t_max * t_max, a2 * b2 * t_max.powi(4));
    let convolution = DMatrix::from_fn(n_odd, n_odd - 2, |r, c| match r as isize - c as isize {
        0 => 1.0,
        1 => alpha,
        2 => beta,
        _ => 0.0,
    });
    let g = coeffs.column(0) - coeffs.column(1);
    let (quotient, cond_div) = lstsq(&convolution, &DMatrix::from_column_slice(n_odd, 1, g.as_slice()))?;
    let remainder = (&g - &convolution * quotient.column(0)).amax();
    // coefficient magnitudes, measured like values on s ∈ [0, 1]
    let coeff_scale = coeffs.column(0).abs().sum().max(coeffs.column(1).abs().sum());
    let coeff_norm = if coeff_scale > 0.0 { coeff_scale } else { 1.0 };
    Ok(LeadingTermCheck {
        remainder: remainder / coeff_norm,
        fit_residual: fit / norm,
        max_f,
        max_leading,
        scale,
        condition: cond_fit.max(cond_div),
    })
}

pub fn default_leading_term_samples() -> Vec<f64> {
    evenly_spaced(LEADING_TERM_RANGE, LEADING_TERM_SAMPLES)
}
