//! Principal curvatures, principal frame, connection forms and the
//! derivatives of the curvatures along the frame.

use crate::error::Result;
use crate::jet::{Jet2, DEGENERACY_THRESHOLD};
use crate::surface::{fundamental_forms, shape_operator, FundamentalForms, SurfacePatch};
use crate::vector::Vec3;

/// Relative gap `a - b` below which a point is treated as umbilic.
pub const UMBILIC_TOLERANCE: f64 = 1e-7;

/// Bound on the low-order coefficients of `H² - K` (and of `∇H`) that
/// certifies a totally umbilic neighbourhood.
const UMBILIC_CERTIFICATE: f64 = 1e-9;

/// Jet-valued frame data, kept so that later stages can differentiate
/// curvatures and frame fields again.
#[derive(Debug, Clone, Copy)]
pub struct FrameJets {
    pub a: Jet2,
    pub b: Jet2,
    /// `a + b`, smooth even at umbilics.
    pub trace: Jet2,
    /// Coordinate components of `e1`, `e2`.
    pub e1c: [Jet2; 2],
    pub e2c: [Jet2; 2],
    pub e1: Vec3<Jet2>,
    pub e2: Vec3<Jet2>,
    pub normal: Vec3<Jet2>,
    pub x: Vec3<Jet2>,
}

impl FrameJets {
    /// `e_i(φ)` for `i ∈ {1, 2}`.
    pub fn along(&self, i: usize, phi: &Jet2) -> Jet2 {
        phi.directional(if i == 1 { self.e1c } else { self.e2c })
    }

    /// `D_{e_i} V` for an `R³`-valued field `V`.
    pub fn along_vec(&self, i: usize, field: &Vec3<Jet2>) -> Vec3<Jet2> {
        field.directional(if i == 1 { self.e1c } else { self.e2c })
    }
}

/// The principal-curvature apparatus at one surface point.
#[derive(Debug, Clone)]
pub struct PrincipalData {
    pub uv: [f64; 2],
    /// Principal curvatures, `a >= b`.
    pub a: f64,
    pub b: f64,
    pub position: [f64; 3],
    pub normal: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub e1_coords: [f64; 2],
    pub e2_coords: [f64; 2],
    /// `ω₁²(e₁) = ⟨∇_{e₁}e₁, e₂⟩`
    pub omega12_e1: f64,
    /// `ω₁²(e₂) = ⟨∇_{e₂}e₁, e₂⟩`
    pub omega12_e2: f64,
    pub d1a: f64,
    pub d2a: f64,
    pub d1b: f64,
    pub d2b: f64,
    /// `(e₁(a+b), e₂(a+b))`
    pub grad_trace: [f64; 2],
    /// `Δ_M(a+b) = -Σ_i {e_i(e_i(a+b)) - (∇_{e_i}e_i)(a+b)}`
    pub lap_trace: f64,
    pub umbilic: bool,
    /// False at umbilics outside a certified totally umbilic region, where
    /// `d1a`, `d2a`, `d1b`, `d2b` carry no meaning.
    pub derivatives_reliable: bool,
    pub jets: FrameJets,
}

fn choose_eigenvector(a: &[[Jet2; 2]; 2], lambda: Jet2, g: &[[Jet2; 2]; 2]) -> [Jet2; 2] {
    // rows of (A - λI) give two candidate kernel vectors; keep the larger one
    let from_row0 = [a[0][1], lambda - a[0][0]];
    let from_row1 = [lambda - a[1][1], a[1][0]];
    let gnorm = |w: &[Jet2; 2]| {
        let (x, y) = (w[0].value(), w[1].value());
        g[0][0].value() * x * x + 2.0 * g[0][1].value() * x * y + g[1][1].value() * y * y
    };
    if gnorm(&from_row0) >= gnorm(&from_row1) {
        from_row0
    } else {
        from_row1
    }
}

fn normalize(w: [Jet2; 2], g: &[[Jet2; 2]; 2]) -> Result<[Jet2; 2]> {
    let n2 = g[0][0] * w[0] * w[0] + (g[0][1] * w[0] * w[1]).scale(2.0) + g[1][1] * w[1] * w[1];
    let inv = n2.try_sqrt()?.try_recip()?;
    Ok([w[0] * inv, w[1] * inv])
}

fn certified_flat(j: &Jet2, scale: f64) -> bool {
    Jet2::multi_indices()
        .zip(j.coeffs())
        .filter(|((p, q), _)| (1..=2).contains(&(p + q)))
        .all(|(_, c)| c.abs() <= UMBILIC_CERTIFICATE * scale)
}

pub fn principal_data(ff: &FundamentalForms) -> Result<PrincipalData> {
    let shape = shape_operator(ff)?;
    let trace = shape[0][0] + shape[1][1];
    let mean = trace.scale(0.5);
    let gauss = shape[0][0] * shape[1][1] - shape[0][1] * shape[1][0];
    let disc = mean * mean - gauss;

    let gap = 2.0 * disc.value().max(0.0).sqrt();
    let (a0, b0) = (mean.value() + 0.5 * gap, mean.value() - 0.5 * gap);
    // below the jet sqrt threshold the split into a, b has no usable derivatives
    let umbilic = gap < UMBILIC_TOLERANCE * 1.0f64.max(a0.abs() + b0.abs()) || disc.value() <= DEGENERACY_THRESHOLD;

    let (a, b, e1c, derivatives_reliable) = if umbilic {
        let scale = 1.0f64.max(mean.value() * mean.value());
        let totally_umbilic = certified_flat(&disc, scale) && disc.value().abs() <= UMBILIC_CERTIFICATE * scale;
        let mut h = mean;
        if totally_umbilic && certified_flat(&mean, 1.0f64.max(mean.value().abs())) {
            // constant curvature: every derivative of a and b vanishes
            h = Jet2::constant(mean.value());
        }
        let e1c = normalize([Jet2::constant(1.0), Jet2::zero()], &ff.g)?;
        (h, h, e1c, totally_umbilic)
    } else {
        let root = disc.try_sqrt()?;
        let a = mean + root;
        let b = mean - root;
        let e1c = normalize(choose_eigenvector(&shape, a, &ff.g), &ff.g)?;
        (a, b, e1c, true)
    };

    let e1 = ff.to_ambient(&e1c);
    let e2 = ff.normal.cross(&e1);
    let e2c = ff.to_coordinates(&e2)?;
    let jets = FrameJets {
        a,
        b,
        trace: if umbilic && derivatives_reliable { a + b } else { trace },
        e1c,
        e2c,
        e1,
        e2,
        normal: ff.normal,
        x: ff.x,
    };

    let omega12_e1 = jets.along_vec(1, &e1).dot(&e2).value();
    let omega12_e2 = jets.along_vec(2, &e1).dot(&e2).value();
    let t1 = jets.along(1, &jets.trace);
    let t2 = jets.along(2, &jets.trace);
    let lap_trace = -(jets.along(1, &t1).value() - omega12_e1 * t2.value()
        + jets.along(2, &t2).value()
        + omega12_e2 * t1.value());

    Ok(PrincipalData {
        uv: ff.uv,
        a: a.value(),
        b: b.value(),
        position: ff.x.value(),
        normal: ff.normal.value(),
        e1: e1.value(),
        e2: e2.value(),
        e1_coords: [e1c[0].value(), e1c[1].value()],
        e2_coords: [e2c[0].value(), e2c[1].value()],
        omega12_e1,
        omega12_e2,
        d1a: jets.along(1, &a).value(),
        d2a: jets.along(2, &a).value(),
        d1b: jets.along(1, &b).value(),
        d2b: jets.along(2, &b).value(),
        grad_trace: [t1.value(), t2.value()],
        lap_trace,
        umbilic,
        derivatives_reliable,
        jets,
    })
}

/// Fundamental forms followed by [`principal_data`].
pub fn principal_data_at(patch: &SurfacePatch, uv: [f64; 2]) -> Result<PrincipalData> {
    principal_data(&fundamental_forms(patch, uv)?)
}

impl PrincipalData {
    /// `|e₁b - (a-b)ω₁²(e₂)|` and `|e₂a - (b-a)ω₂¹(e₁)|`.
    pub fn codazzi_residuals(&self) -> [f64; 2] {
        let gap = self.a - self.b;
        [
            (self.d1b - gap * self.omega12_e2).abs(),
            (self.d2a - gap * self.omega12_e1).abs(),
        ]
    }

    /// `|A e₁ - a e₁|` and `|A e₂ - b e₂|` measured in the `g`-norm.
    pub fn eigen_residuals(&self, ff: &FundamentalForms) -> Result<[f64; 2]> {
        let shape = shape_operator(ff)?;
        let g = ff.g.map(|row| row.map(|x| x.value()));
        let res = |w: [f64; 2], lambda: f64| {
            let r: [f64; 2] = std::array::from_fn(|i| {
                shape[i][0].value() * w[0] + shape[i][1].value() * w[1] - lambda * w[i]
            });
            (g[0][0] * r[0] * r[0] + 2.0 * g[0][1] * r[0] * r[1] + g[1][1] * r[1] * r[1]).sqrt()
        };
        Ok([res(self.e1_coords, self.a), res(self.e2_coords, self.b)])
    }

    /// The same point with `e₁, e₂` replaced by `-e₁, -e₂`.
    pub fn with_negated_frame(&self) -> Self {
        let mut out = self.clone();
        let j = &mut out.jets;
        j.e1c = j.e1c.map(|x| -x);
        j.e2c = j.e2c.map(|x| -x);
        j.e1 = -j.e1;
        j.e2 = -j.e2;
        out.e1 = out.e1.map(|x| -x);
        out.e2 = out.e2.map(|x| -x);
        out.e1_coords = out.e1_coords.map(|x| -x);
        out.e2_coords = out.e2_coords.map(|x| -x);
        out.omega12_e1 = -out.omega12_e1;
        out.omega12_e2 = -out.omega12_e2;
        out.d1a = -out.d1a;
        out.d2a = -out.d2a;
        out.d1b = -out.d1b;
        out.d2b = -out.d2b;
        out.grad_trace = out.grad_trace.map(|x| -x);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfaceKind;
    use crate::vector::dot3;

    fn patch(s: &str) -> SurfacePatch {
        SurfacePatch::catalog(s.parse::<SurfaceKind>().unwrap()).unwrap()
    }

    #[test]
    fn unit_sphere() {
        let pd = principal_data_at(&patch("sphere:r=1"), [1.0, 2.0]).unwrap();
        assert!((pd.a + 1.0).abs() < 1e-12 && (pd.b + 1.0).abs() < 1e-12);
        assert!(pd.umbilic && pd.derivatives_reliable);
        assert_eq!([pd.d1a, pd.d2a, pd.d1b, pd.d2b], [0.0; 4]);
        assert!(pd.grad_trace.iter().all(|x| x.abs() < 1e-12));
        assert!(pd.lap_trace.abs() < 1e-12);
    }

    #[test]
    fn unit_cylinder() {
        let pd = principal_data_at(&patch("cylinder:r=1"), [2.0, 0.1]).unwrap();
        assert!(pd.a.abs() < 1e-12 && (pd.b + 1.0).abs() < 1e-12);
        assert!(!pd.umbilic);
        assert!(pd.grad_trace.iter().all(|x| x.abs() < 1e-12));
        assert!(pd.lap_trace.abs() < 1e-12);
    }

    #[test]
    fn catenoid_neck() {
        let p = patch("catenoid:c=1");
        let pd = principal_data_at(&p, [0.0, 0.0]).unwrap();
        assert!((pd.a - 1.0).abs() < 1e-12 && (pd.b + 1.0).abs() < 1e-12);
        for uv in p.domain().grid(5, 5) {
            let pd = principal_data_at(&p, uv).unwrap();
            let cosh2 = uv[0].cosh().powi(2);
            assert!((pd.a - 1.0 / cosh2).abs() < 1e-12);
            assert!((pd.a + pd.b).abs() < 1e-10);
            assert!(pd.grad_trace.iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn frame_is_orthonormal_principal_and_satisfies_codazzi() {
        for s in ["torus:R=2,r=0.5", "ellipsoid:p=2,q=1.5,s=1", "enneper", "helicoid:c=1",
                  "cone:alpha=0.7853981633974483", "graph:c20=1,c03=1", "catenoid:c=1"] {
            let p = patch(s);
            for uv in p.domain().grid(5, 5) {
                let ff = fundamental_forms(&p, uv).unwrap();
                let pd = principal_data(&ff).unwrap();
                assert!(pd.a >= pd.b);
                assert!((dot3(&pd.e1, &pd.e1) - 1.0).abs() < 1e-10);
                assert!((dot3(&pd.e2, &pd.e2) - 1.0).abs() < 1e-10);
                assert!(dot3(&pd.e1, &pd.e2).abs() < 1e-10);
                let [r1, r2] = pd.eigen_residuals(&ff).unwrap();
                assert!(r1 < 1e-8 && r2 < 1e-8, "{s} {uv:?}");
                let shape = shape_operator(&ff).unwrap();
                let tr = shape[0][0].value() + shape[1][1].value();
                let det = shape[0][0].value() * shape[1][1].value()
                    - shape[0][1].value() * shape[1][0].value();
                assert!((pd.a + pd.b - tr).abs() < 1e-10 && (pd.a * pd.b - det).abs() < 1e-10);
                if !pd.umbilic {
                    let [c1, c2] = pd.codazzi_residuals();
                    assert!(c1 < 1e-6 && c2 < 1e-6, "{s} {uv:?}: {c1} {c2}");
                }
            }
        }
    }

    #[test]
    fn laplacian_matches_coordinate_formula() {
        // Δ_M φ = -(1/√g) ∂_i(√g g^{ij} ∂_j φ) with φ = trace(A), all from jets
        for s in ["torus:R=2,r=0.5", "ellipsoid:p=2,q=1.5,s=1", "graph:c20=1,c03=1"] {
            let p = patch(s);
            for uv in p.domain().grid(3, 3) {
                let ff = fundamental_forms(&p, uv).unwrap();
                let pd = principal_data(&ff).unwrap();
                let shape = shape_operator(&ff).unwrap();
                let phi = shape[0][0] + shape[1][1];
                let gi = ff.g_inverse().unwrap();
                let sqrt_g = ff.det_g().try_sqrt().unwrap();
                let flux_u = sqrt_g * (gi[0][0] * phi.du() + gi[0][1] * phi.dv());
                let flux_v = sqrt_g * (gi[1][0] * phi.du() + gi[1][1] * phi.dv());
                let lap = -(flux_u.du() + flux_v.dv()).value() / sqrt_g.value();
                assert!((lap - pd.lap_trace).abs() < 1e-9 * (1.0 + lap.abs()), "{s}: {lap} vs {}", pd.lap_trace);
            }
        }
    }

    #[test]
    fn gradient_matches_geodesic_finite_differences() {
        let p = patch("torus:R=2,r=0.5");
        let uv = [1.1, 0.4];
        let pd = principal_data_at(&p, uv).unwrap();
        let trace_at = |q: [f64; 2]| {
            let d = principal_data_at(&p, q).unwrap();
            d.a + d.b
        };
        let step = 1e-4;
        for (k, ec) in [pd.e1_coords, pd.e2_coords].iter().enumerate() {
            // second-order geodesic step is unnecessary for a first-derivative central difference
            let plus = [uv[0] + step * ec[0], uv[1] + step * ec[1]];
            let minus = [uv[0] - step * ec[0], uv[1] - step * ec[1]];
            let fd = (trace_at(plus) - trace_at(minus)) / (2.0 * step);
            let jet = pd.grad_trace[k];
            assert!((fd - jet).abs() <= 1e-4 * jet.abs().max(1e-3), "{fd} vs {jet}");
        }
    }

    #[test]
    fn negating_the_frame_preserves_codazzi_residuals() {
        let pd = principal_data_at(&patch("ellipsoid:p=2,q=1.5,s=1"), [0.7, 0.9]).unwrap();
        let neg = pd.with_negated_frame();
        let (r, s) = (pd.codazzi_residuals(), neg.codazzi_residuals());
        assert!((r[0] - s[0]).abs() < 1e-12 && (r[1] - s[1]).abs() < 1e-12);
    }

    #[test]
    fn plane_is_certified_umbilic() {
        let pd = principal_data_at(&patch("plane"), [0.3, 0.3]).unwrap();
        assert!(pd.umbilic && pd.derivatives_reliable);
        assert_eq!(pd.a, 0.0);
    }

    #[test]
    fn generic_umbilic_is_flagged() {
        // umbilic of the ellipsoid x²/4 + y²/2.25 + z² = 1 in the y = 0 plane
        let (p, q, s): (f64, f64, f64) = (2.0, 1.5, 1.0);
        let x = p * ((p * p - q * q) / (p * p - s * s)).sqrt();
        let u = (x / p).asin();
        let kind = SurfaceKind::Ellipsoid { p, q, s };
        let patch = SurfacePatch::new(kind, crate::surface::Domain::new([0.3, 1.5], [-0.5, 0.5])).unwrap();
        let pd = principal_data_at(&patch, [u, 0.0]).unwrap();
        assert!(pd.umbilic);
        assert!(!pd.derivatives_reliable);
    }
}
