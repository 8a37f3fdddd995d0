//! First-principles tension and bitension of `f(u, v, t) = (x(u, v), t N(u, v))`
//! in the chart `(u, v, t)` of the normal bundle.
//!
//! Nothing here touches principal curvatures or frames: the induced metric,
//! its Christoffel symbols and the Laplacian are built from the raw immersion.
//! Every scalar is a jet in `(u, v)` whose coefficients are Taylor series in
//! `t`, so derivatives in all three chart directions are exact up to roundoff.

use crate::error::{Error, Result};
use crate::jet::{FiberSeries, Jet, Scalar};
use crate::normal_bundle::NBPoint;
use crate::surface::SurfacePatch;
use crate::vector::{dot6, R6};

type ChartScalar = Jet<FiberSeries, 5>;

/// Below this, the chart metric is reported as degenerate.
pub const CHART_DETERMINANT_FLOOR: f64 = 1e-10;

/// Step and tolerance of the finite-difference fallback.
pub const FD_STEP: f64 = 1e-3;
pub const FD_TOLERANCE: f64 = 1e-3;

fn partial(k: usize, s: &ChartScalar) -> ChartScalar {
    match k {
        0 => s.du(),
        1 => s.dv(),
        _ => s.map(|c| c.diff()),
    }
}

fn at_point(s: &ChartScalar) -> f64 {
    s.value()
}

/// Chart geometry evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartGeometry {
    /// Induced metric `g_ij = ⟨∂_i f, ∂_j f⟩` in `(u, v, t)`.
    pub g3: [[f64; 3]; 3],
    pub ginv3: [[f64; 3]; 3],
    /// `christoffel[k][i][j] = Γ^k_ij`.
    pub christoffel: [[[f64; 3]; 3]; 3],
    /// `metric_derivatives[k][i][j] = ∂_k g_ij`.
    pub metric_derivatives: [[[f64; 3]; 3]; 3],
    /// Rows `∂_u f, ∂_v f, ∂_t f`.
    pub df: [R6; 3],
}

impl ChartGeometry {
    /// `max |∂_k g_ij - Γ^l_ki g_lj - Γ^l_kj g_il|`.
    pub fn compatibility_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let rhs: f64 = (0..3)
                        .map(|l| {
                            self.christoffel[l][k][i] * self.g3[l][j]
                                + self.christoffel[l][k][j] * self.g3[i][l]
                        })
                        .sum();
                    worst = worst.max((self.metric_derivatives[k][i][j] - rhs).abs());
                }
            }
        }
        worst
    }
}

/// Jet-level chart data: the immersion, its differential, metric and symbols.
struct Chart {
    normal: [ChartScalar; 3],
    df: [[ChartScalar; 6]; 3],
    ddf: [[[ChartScalar; 6]; 3]; 3],
    g: [[ChartScalar; 3]; 3],
    ginv: [[ChartScalar; 3]; 3],
    dg: [[[ChartScalar; 3]; 3]; 3],
    gamma: [[[ChartScalar; 3]; 3]; 3],
}

impl Chart {
    fn build(patch: &SurfacePatch, uv: [f64; 2], t: f64) -> Result<Self> {
        let x = patch.position::<5>(uv)?.map(|c| c.map(FiberSeries::constant));
        let xu = x.du();
        let xv = x.dv();
        let cross = xu.cross(&xv);
        let len = cross.dot(&cross).try_sqrt()?;
        let n = cross.scale(len.try_recip()?);
        let fiber = ChartScalar::constant(FiberSeries::var(t));
        let f: [ChartScalar; 6] = [x.0[0], x.0[1], x.0[2], fiber * n.0[0], fiber * n.0[1], fiber * n.0[2]];

        let df: [[ChartScalar; 6]; 3] = std::array::from_fn(|k| f.map(|c| partial(k, &c)));
        let ddf: [[[ChartScalar; 6]; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| df[j].map(|c| partial(i, &c))));
        let mut g = [[ChartScalar::zero(); 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let gij = (0..6).fold(ChartScalar::zero(), |acc, c| acc + df[i][c] * df[j][c]);
                g[i][j] = gij;
                g[j][i] = gij;
            }
        }
        let ginv = invert3(&g)?;
        let dg: [[[ChartScalar; 3]; 3]; 3] =
            std::array::from_fn(|k| g.map(|row| row.map(|e| partial(k, &e))));
        // Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il - ∂_l g_ij)
        let mut gamma = [[[ChartScalar::zero(); 3]; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let lowered: [ChartScalar; 3] =
                    std::array::from_fn(|l| (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]).scale(0.5));
                for k in 0..3 {
                    let v = (0..3).fold(ChartScalar::zero(), |acc, l| acc + ginv[k][l] * lowered[l]);
                    gamma[k][i][j] = v;
                    gamma[k][j][i] = v;
                }
            }
        }
        Ok(Chart { normal: n.0, df, ddf, g, ginv, dg, gamma })
    }

    /// `g^{ij}(∂_i∂_j F - Γ^k_ij ∂_k F)` for an `R⁶`-valued field, given its
    /// first and second chart derivatives.
    fn laplacian(&self, second: &[[[ChartScalar; 6]; 3]; 3], first: &[[ChartScalar; 6]; 3]) -> [ChartScalar; 6] {
        std::array::from_fn(|c| {
            let mut acc = ChartScalar::zero();
            for i in 0..3 {
                for j in 0..3 {
                    let mut term = second[i][j][c];
                    for k in 0..3 {
                        term -= self.gamma[k][i][j] * first[k][c];
                    }
                    acc += self.ginv[i][j] * term;
                }
            }
            acc
        })
    }

    fn tension(&self) -> [ChartScalar; 6] {
        self.laplacian(&self.ddf, &self.df)
    }

    /// Same operator applied to `τ`, evaluated only at the base point.
    fn bitension(&self) -> [FiberSeries; 6] {
        let tau = self.tension();
        let first: [[ChartScalar; 6]; 3] = std::array::from_fn(|k| tau.map(|c| partial(k, &c)));
        std::array::from_fn(|c| {
            let mut acc = FiberSeries::constant(0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let second = partial(i, &first[j][c]).constant_part();
                    let mut term = second;
                    for k in 0..3 {
                        term = term - self.gamma[k][i][j].constant_part() * first[k][c].constant_part();
                    }
                    acc = acc + self.ginv[i][j].constant_part() * term;
                }
            }
            acc
        })
    }

    fn geometry(&self) -> ChartGeometry {
        let v3 = |m: &[[ChartScalar; 3]; 3]| m.map(|row| row.map(|e| at_point(&e)));
        ChartGeometry {
            g3: v3(&self.g),
            ginv3: v3(&self.ginv),
            christoffel: self.gamma.map(|m| v3(&m)),
            metric_derivatives: self.dg.map(|m| v3(&m)),
            df: self.df.map(|row| row.map(|e| at_point(&e))),
        }
    }
}

fn invert3(g: &[[ChartScalar; 3]; 3]) -> Result<[[ChartScalar; 3]; 3]> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| g[r0][c0] * g[r1][c1] - g[r0][c1] * g[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = g[0][0] * adj[0][0] + g[0][1] * adj[1][0] + g[0][2] * adj[2][0];
    if det.value() <= CHART_DETERMINANT_FLOOR {
        return Err(Error::DegenerateChart { det: det.value() });
    }
    let inv_det = det.try_recip()?;
    Ok(adj.map(|row| row.map(|e| e * inv_det)))
}

fn values6(v: &[ChartScalar; 6]) -> R6 {
    v.map(|c| at_point(&c))
}

pub fn chart_geometry(patch: &SurfacePatch, uv: [f64; 2], t: f64) -> Result<ChartGeometry> {
    Ok(Chart::build(patch, uv, t)?.geometry())
}

/// `τ(f) = g^{ij}(∂_i∂_j f - Γ^k_ij ∂_k f)`.
pub fn oracle_tension(patch: &SurfacePatch, uv: [f64; 2], t: f64) -> Result<R6> {
    Ok(values6(&Chart::build(patch, uv, t)?.tension()))
}

/// `τ₂(f) = -Δ_f τ(f)` in flat `E⁶`, i.e. the same coordinate Laplacian
/// applied to `τ`.
pub fn oracle_bitension(patch: &SurfacePatch, uv: [f64; 2], t: f64) -> Result<R6> {
    Ok(Chart::build(patch, uv, t)?.bitension().map(|s| s.value()))
}

/// `⟨τ₂(f), ẽ₃⟩` with `ẽ₃ = ∂_t f = (0, N)`.
pub fn oracle_e3(patch: &SurfacePatch, uv: [f64; 2], t: f64) -> Result<f64> {
    let chart = Chart::build(patch, uv, t)?;
    let tau2 = chart.bitension().map(|s| s.value());
    let n = chart.normal.map(|c| at_point(&c));
    Ok(dot6(&tau2, &[0.0, 0.0, 0.0, n[0], n[1], n[2]]))
}

/// Tension and bitension from one chart build.
pub fn oracle_fields(patch: &SurfacePatch, uv: [f64; 2], t: f64) -> Result<(R6, R6)> {
    let chart = Chart::build(patch, uv, t)?;
    Ok((values6(&chart.tension()), chart.bitension().map(|s| s.value())))
}

/// `h^α_ij = ⟨∂²f(ẽ_i, ẽ_j), e_α⟩` for `α = 4, 5, 6` (`out[α-4][i][j]`),
/// using the chart Hessian of `f` and the frame of `np`.
pub fn oracle_h_coeffs(patch: &SurfacePatch, np: &NBPoint) -> Result<[[[f64; 3]; 3]; 3]> {
    let chart = Chart::build(patch, np.pd.uv, np.t)?;
    let hess: [[R6; 3]; 3] = chart.ddf.map(|row| row.map(|v| values6(&v)));
    let (c1, c2) = (np.c1_sq().sqrt(), np.c2_sq().sqrt());
    let e1 = np.pd.e1_coords;
    let e2 = np.pd.e2_coords;
    let tangent = [[c1 * e1[0], c1 * e1[1], 0.0], [c2 * e2[0], c2 * e2[1], 0.0], [0.0, 0.0, 1.0]];
    let frame = crate::normal_bundle::nb_frame(np);
    Ok(std::array::from_fn(|alpha| {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += tangent[i][k] * tangent[j][l] * dot6(&hess[k][l], &frame.normal[alpha]);
                    }
                }
                acc
            })
        })
    }))
}

/// Finite-difference fallback for the bitension: central differences of
/// [`oracle_tension`] with one Richardson extrapolation, combined with the
/// chart geometry at the centre. The stencil may reach `step` beyond the
/// patch domain.
pub fn fd_bitension(patch: &SurfacePatch, uv: [f64; 2], t: f64, step: f64) -> Result<R6> {
    let geom = chart_geometry(patch, uv, t)?;
    let wide = patch.widened(step);
    let eval = |d: [f64; 3]| oracle_tension(&wide, [uv[0] + d[0], uv[1] + d[1]], t + d[2]);
    let unit = |k: usize, s: f64| {
        let mut d = [0.0; 3];
        d[k] = s;
        d
    };
    let center = eval([0.0; 3])?;

    let derivs = |h: f64| -> Result<([R6; 3], [[R6; 3]; 3])> {
        let mut first = [[0.0; 6]; 3];
        let mut second = [[[0.0; 6]; 3]; 3];
        for k in 0..3 {
            let (p, m) = (eval(unit(k, h))?, eval(unit(k, -h))?);
            for c in 0..6 {
                first[k][c] = (p[c] - m[c]) / (2.0 * h);
                second[k][k][c] = (p[c] - 2.0 * center[c] + m[c]) / (h * h);
            }
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let corner = |si: f64, sj: f64| {
                    let mut d = [0.0; 3];
                    d[i] = si * h;
                    d[j] = sj * h;
                    eval(d)
                };
                let (pp, pm, mp, mm) = (corner(1.0, 1.0)?, corner(1.0, -1.0)?, corner(-1.0, 1.0)?, corner(-1.0, -1.0)?);
                for c in 0..6 {
                    let v = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
                    second[i][j][c] = v;
                    second[j][i][c] = v;
                }
            }
        }
        Ok((first, second))
    };
    let (f_h, s_h) = derivs(step)?;
    let (f_half, s_half) = derivs(0.5 * step)?;
    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;

    Ok(std::array::from_fn(|c| {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut term = richardson(s_h[i][j][c], s_half[i][j][c]);
                for k in 0..3 {
                    term -= geom.christoffel[k][i][j] * richardson(f_h[k][c], f_half[k][c]);
                }
                acc += geom.ginv3[i][j] * term;
            }
        }
        acc
    }))
}
