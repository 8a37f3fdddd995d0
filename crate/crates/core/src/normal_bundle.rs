//! The normal bundle `T⊥M` immersed in `E⁶` by `f(x, t) = (x, tN)`: its
//! orthonormal frames, second fundamental form coefficients and tension field.

use crate::error::{Error, Result};
use crate::frame::PrincipalData;
use crate::vector::{complex_structure, dot6, join6, norm6, R6};

/// Default bound on `|t|`.
pub const DEFAULT_FIBER_BOUND: f64 = 10.0;

/// Default fibre samples.
pub const DEFAULT_FIBER: [f64; 9] = [0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0];

/// A point `(p, t)` of the normal bundle.
#[derive(Debug, Clone)]
pub struct NBPoint {
    pub pd: PrincipalData,
    pub t: f64,
}

impl NBPoint {
    pub fn new(pd: PrincipalData, t: f64) -> Result<Self> {
        Self::with_bound(pd, t, DEFAULT_FIBER_BOUND)
    }

    pub fn with_bound(pd: PrincipalData, t: f64, bound: f64) -> Result<Self> {
        if !t.is_finite() || t.abs() > bound {
            return Err(Error::FiberOutOfRange { t, bound });
        }
        Ok(NBPoint { pd, t })
    }

    /// `(1 + t²a²)⁻¹`
    pub fn c1_sq(&self) -> f64 {
        1.0 / (1.0 + self.t * self.t * self.pd.a * self.pd.a)
    }

    /// `(1 + t²b²)⁻¹`
    pub fn c2_sq(&self) -> f64 {
        1.0 / (1.0 + self.t * self.t * self.pd.b * self.pd.b)
    }
}

/// Tangent frame `f_*(ẽ₁), f_*(ẽ₂), f_*(ẽ₃)` and normal frame `e₄, e₅, e₆`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NBFrame {
    pub f: R6,
    pub tangent: [R6; 3],
    pub normal: [R6; 3],
}

impl NBFrame {
    pub fn vectors(&self) -> [R6; 6] {
        [
            self.tangent[0],
            self.tangent[1],
            self.tangent[2],
            self.normal[0],
            self.normal[1],
            self.normal[2],
        ]
    }

    /// `max |⟨v_i, v_j⟩ - δ_ij|` over the six frame vectors.
    pub fn orthonormality_defect(&self) -> f64 {
        let v = self.vectors();
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot6(&v[i], &v[j]) - target).abs());
            }
        }
        worst
    }

    /// `max |⟨J f_*ẽ_i, f_*ẽ_j⟩|`; zero for a Lagrangian immersion.
    pub fn lagrangian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in &self.tangent {
            let jx = complex_structure(x);
            for y in &self.tangent {
                worst = worst.max(dot6(&jx, y).abs());
            }
        }
        worst
    }

    /// Components of `v` along the tangent frame.
    pub fn tangential_components(&self, v: &R6) -> [f64; 3] {
        self.tangent.map(|e| dot6(v, &e))
    }
}

pub fn nb_frame(np: &NBPoint) -> NBFrame {
    let pd = &np.pd;
    let t = np.t;
    let (c1, c2) = (np.c1_sq().sqrt(), np.c2_sq().sqrt());
    let lift = |e: &[f64; 3], k: f64, c: f64| -> R6 {
        join6(&e.map(|x| c * x), &e.map(|x| -c * t * k * x))
    };
    let te1 = lift(&pd.e1, pd.a, c1);
    let te2 = lift(&pd.e2, pd.b, c2);
    let te3 = join6(&[0.0; 3], &pd.normal);
    NBFrame {
        f: join6(&pd.position, &pd.normal.map(|x| t * x)),
        tangent: [te1, te2, te3],
        normal: [complex_structure(&te1), complex_structure(&te2), complex_structure(&te3)],
    }
}

/// The nonzero coefficients `h^α_ij = ⟨D_{ẽ_i} f_*(ẽ_j), e_α⟩` with `i = j`;
/// every `h^α_33` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCoeffs {
    pub h4_11: f64,
    pub h4_22: f64,
    pub h5_11: f64,
    pub h5_22: f64,
    pub h6_11: f64,
    pub h6_22: f64,
}

impl HCoeffs {
    /// `Σ_i h^α_ii` for `α = 4, 5, 6`.
    pub fn traces(&self) -> [f64; 3] {
        [self.h4_11 + self.h4_22, self.h5_11 + self.h5_22, self.h6_11 + self.h6_22]
    }
}

fn require_derivatives(pd: &PrincipalData) -> Result<()> {
    if pd.derivatives_reliable {
        Ok(())
    } else {
        Err(Error::UmbilicDerivativesUnavailable { u: pd.uv[0], v: pd.uv[1] })
    }
}

pub fn h_coeffs(np: &NBPoint) -> Result<HCoeffs> {
    let pd = &np.pd;
    require_derivatives(pd)?;
    let t = np.t;
    let (ca2, cb2) = (np.c1_sq(), np.c2_sq());
    let (ca, cb) = (ca2.sqrt(), cb2.sqrt());
    Ok(HCoeffs {
        h4_11: -t * ca2 * ca * pd.d1a,
        h4_22: -t * ca * cb2 * pd.d1b,
        h5_11: -t * ca2 * cb * pd.d2a,
        h5_22: -t * cb2 * cb * pd.d2b,
        h6_11: -pd.a * ca2,
        h6_22: -pd.b * cb2,
    })
}

/// `P`, `Q`, `R` and the tension field `τ(f)` at a point of the bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensionValue {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub tau: R6,
}

impl TensionValue {
    pub fn norm(&self) -> f64 {
        norm6(&self.tau)
    }
}

/// `(P, Q, R)` at fibre height `t`.
pub fn pqr(np: &NBPoint) -> Result<(f64, f64, f64)> {
    let pd = &np.pd;
    require_derivatives(pd)?;
    let (ca2, cb2) = (np.c1_sq(), np.c2_sq());
    let p = ca2 * ca2 * pd.d1a + ca2 * cb2 * pd.d1b;
    let q = ca2 * cb2 * pd.d2a + cb2 * cb2 * pd.d2b;
    let r = pd.a * ca2 + pd.b * cb2;
    Ok((p, q, r))
}

/// `τ(f) = -(P t² a e₁ + Q t² b e₂ - R N, P t e₁ + Q t e₂)`.
pub fn tension(np: &NBPoint) -> Result<TensionValue> {
    let pd = &np.pd;
    let (p, q, r) = pqr(np)?;
    let t = np.t;
    let first: [f64; 3] = std::array::from_fn(|k| {
        -(p * t * t * pd.a * pd.e1[k] + q * t * t * pd.b * pd.e2[k] - r * pd.normal[k])
    });
    let second: [f64; 3] = std::array::from_fn(|k| -(p * t * pd.e1[k] + q * t * pd.e2[k]));
    let tau = join6(&first, &second);
    debug_assert!(
        {
            let replay = tension_from_h_coeffs(np)?;
            (0..6).all(|k| (replay[k] - tau[k]).abs() <= 1e-9 * (1.0 + tau[k].abs()))
        },
        "tension disagrees with Σ h^α_ii e_α"
    );
    Ok(TensionValue { p, q, r, tau })
}

/// `τ(f) = Σ_α Σ_i h^α_ii e_α`, assembled from the normal frame.
pub fn tension_from_h_coeffs(np: &NBPoint) -> Result<R6> {
    let traces = h_coeffs(np)?.traces();
    let frame = nb_frame(np);
    Ok(std::array::from_fn(|k| (0..3).map(|a| traces[a] * frame.normal[a][k]).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::principal_data_at;
    use crate::surface::{SurfaceKind, SurfacePatch};

    fn point(s: &str, uv: [f64; 2], t: f64) -> NBPoint {
        let patch = SurfacePatch::catalog(s.parse::<SurfaceKind>().unwrap()).unwrap();
        NBPoint::new(principal_data_at(&patch, uv).unwrap(), t).unwrap()
    }

    #[test]
    fn frame_at_zero_section() {
        let np = point("torus:R=2,r=0.5", [1.0, 2.0], 0.0);
        let fr = nb_frame(&np);
        let e1 = np.pd.e1;
        let n = np.pd.normal;
        assert_eq!(fr.tangent[0], [e1[0], e1[1], e1[2], 0.0, 0.0, 0.0]);
        assert_eq!(fr.tangent[2], [0.0, 0.0, 0.0, n[0], n[1], n[2]]);
        assert_eq!(fr.normal[2], [-n[0], -n[1], -n[2], 0.0, 0.0, 0.0]);
    }

    #[test]
    fn cylinder_normalization_factor() {
        let np = point("cylinder:r=1", [0.5, 0.0], 1.0);
        // b = -1 is the curvature of e2
        let fr = nb_frame(&np);
        let first_half = norm6(&join6(&[fr.tangent[1][0], fr.tangent[1][1], fr.tangent[1][2]], &[0.0; 3]));
        assert!((first_half - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal_and_lagrangian() {
        for s in ["torus:R=2,r=0.5", "ellipsoid:p=2,q=1.5,s=1", "catenoid:c=1", "sphere:r=0.5"] {
            for t in [-2.0, -0.3, 0.0, 0.7, 2.0] {
                let np = point(s, [0.9, 1.1], t);
                let fr = nb_frame(&np);
                assert!(fr.orthonormality_defect() < 1e-9, "{s} t={t}");
                assert!(fr.lagrangian_defect() < 1e-9, "{s} t={t}");
            }
        }
    }

    #[test]
    fn sphere_coefficients() {
        for t in [0.0, 0.5, 1.5] {
            let np = point("sphere:r=1", [1.0, 1.0], t);
            let h = h_coeffs(&np).unwrap();
            assert_eq!([h.h4_11, h.h4_22, h.h5_11, h.h5_22], [0.0; 4].map(|x: f64| -t * x));
            let expected = 1.0 / (1.0 + t * t);
            assert!((h.h6_11 - expected).abs() < 1e-12 && (h.h6_22 - expected).abs() < 1e-12);

            let tv = tension(&np).unwrap();
            assert_eq!((tv.p, tv.q), (0.0, 0.0));
            assert!((tv.r + 2.0 / (1.0 + t * t)).abs() < 1e-12);
            assert!((tv.norm() - 2.0 / (1.0 + t * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_section_has_no_tangential_h() {
        let h = h_coeffs(&point("ellipsoid:p=2,q=1.5,s=1", [0.8, 0.8], 0.0)).unwrap();
        assert_eq!([h.h4_11, h.h4_22, h.h5_11, h.h5_22].map(f64::abs), [0.0; 4]);
    }

    #[test]
    fn unit_cylinder_tension_at_zero_section() {
        let np = point("cylinder:r=1", [0.4, 0.2], 0.0);
        let tv = tension(&np).unwrap();
        assert!((tv.r + 1.0).abs() < 1e-12);
        let n = np.pd.normal;
        let expected = [-n[0], -n[1], -n[2], 0.0, 0.0, 0.0];
        for k in 0..6 {
            assert!((tv.tau[k] - expected[k]).abs() < 1e-12);
        }
        assert!((tv.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimal_surfaces_have_vanishing_tension() {
        for s in ["plane", "catenoid:c=1", "helicoid:c=1", "enneper"] {
            let patch = SurfacePatch::catalog(s.parse::<SurfaceKind>().unwrap()).unwrap();
            for uv in patch.domain().grid(5, 5) {
                let pd = principal_data_at(&patch, uv).unwrap();
                for t in DEFAULT_FIBER {
                    let tv = tension(&NBPoint::new(pd.clone(), t).unwrap()).unwrap();
                    assert!(tv.norm() <= 1e-8, "{s} {uv:?} t={t}: {}", tv.norm());
                }
            }
        }
    }

    #[test]
    fn tension_is_normal_and_matches_h_trace() {
        for s in ["torus:R=2,r=0.5", "ellipsoid:p=2,q=1.5,s=1", "graph:c20=1,c03=1", "cone:alpha=0.6"] {
            for t in [-1.5, 0.25, 2.0] {
                let np = point(s, [0.5, 0.6], t);
                let tv = tension(&np).unwrap();
                let fr = nb_frame(&np);
                for c in fr.tangential_components(&tv.tau) {
                    assert!(c.abs() < 1e-8, "{s}");
                }
                let replay = tension_from_h_coeffs(&np).unwrap();
                for k in 0..6 {
                    assert!((replay[k] - tv.tau[k]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn fiber_bound_enforced() {
        let patch = SurfacePatch::catalog(SurfaceKind::Plane).unwrap();
        let pd = principal_data_at(&patch, [0.0, 0.0]).unwrap();
        assert!(matches!(NBPoint::new(pd, 11.0), Err(Error::FiberOutOfRange { .. })));
    }
}
