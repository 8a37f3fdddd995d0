//! Parametric surface patches and their fundamental forms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jet::{Jet, Jet2, Scalar, Var};
use crate::vector::Vec3;

/// Default lower bound on `|x_u × x_v|`.
pub const DEFAULT_REGULARITY_MARGIN: f64 = 1e-8;

/// Distance kept from the poles of the sphere and ellipsoid charts.
pub const POLE_MARGIN: f64 = 0.1;

/// Height function `z = Σ c_ij u^i v^j` of total degree at most 4.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPolynomial {
    terms: Vec<((u32, u32), f64)>,
}

impl GraphPolynomial {
    pub const MAX_DEGREE: u32 = 4;

    pub fn new(terms: impl IntoIterator<Item = ((u32, u32), f64)>) -> Result<Self> {
        let mut out: Vec<((u32, u32), f64)> = Vec::new();
        for ((i, j), c) in terms {
            if i + j > Self::MAX_DEGREE {
                return Err(Error::InvalidSurface(format!(
                    "graph term u^{i} v^{j} exceeds degree {}",
                    Self::MAX_DEGREE
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSurface(format!("graph coefficient c{i}{j} is not finite")));
            }
            match out.iter_mut().find(|(k, _)| *k == (i, j)) {
                Some(entry) => entry.1 += c,
                None => out.push(((i, j), c)),
            }
        }
        out.sort_by_key(|((i, j), _)| (i + j, *j));
        Ok(GraphPolynomial { terms: out })
    }

    pub fn terms(&self) -> &[((u32, u32), f64)] {
        &self.terms
    }

    fn eval<S: Scalar, const N: usize>(&self, u: Jet<S, N>, v: Jet<S, N>) -> Jet<S, N> {
        self.terms.iter().fold(Jet::zero(), |acc, &((i, j), c)| {
            acc + (u.powi(i) * v.powi(j)).scale(c)
        })
    }
}

/// Catalog of parametrized surfaces.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    /// `(u, v, 0)`
    Plane,
    /// `r (sin u cos v, sin u sin v, cos u)`
    Sphere { radius: f64 },
    /// `(r cos u, r sin u, v)`
    Cylinder { radius: f64 },
    /// `(c cosh(u/c) cos v, c cosh(u/c) sin v, u)`
    Catenoid { c: f64 },
    /// `(u cos v, u sin v, c v)`
    Helicoid { c: f64 },
    /// `(u - u³/3 + u v², v - v³/3 + v u², u² - v²)`
    Enneper,
    /// `((R + r cos u) cos v, (R + r cos u) sin v, r sin u)`
    Torus { major: f64, minor: f64 },
    /// `(p sin u cos v, q sin u sin v, s cos u)`
    Ellipsoid { p: f64, q: f64, s: f64 },
    /// `(v sin α cos u, v sin α sin u, v cos α)`
    Cone { half_angle: f64 },
    /// `(u, v, z(u, v))`
    Graph(GraphPolynomial),
}

impl SurfaceKind {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSurface(format!("{name} must be positive, got {x}")))
            }
        };
        match *self {
            SurfaceKind::Plane | SurfaceKind::Enneper | SurfaceKind::Graph(_) => Ok(()),
            SurfaceKind::Sphere { radius } | SurfaceKind::Cylinder { radius } => {
                positive("radius", radius)
            }
            SurfaceKind::Catenoid { c } | SurfaceKind::Helicoid { c } => positive("c", c),
            SurfaceKind::Torus { major, minor } => {
                positive("R", major)?;
                positive("r", minor)?;
                if major <= minor {
                    return Err(Error::InvalidSurface(format!(
                        "torus needs R > r, got R={major}, r={minor}"
                    )));
                }
                Ok(())
            }
            SurfaceKind::Ellipsoid { p, q, s } => {
                positive("p", p)?;
                positive("q", q)?;
                positive("s", s)
            }
            SurfaceKind::Cone { half_angle } => {
                if half_angle > 0.0 && half_angle < PI / 2.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSurface(format!(
                        "cone half-angle must lie in (0, π/2), got {half_angle}"
                    )))
                }
            }
        }
    }

    /// A sub-domain away from poles, vertices and (for the ellipsoid) umbilics.
    pub fn default_domain(&self) -> Domain {
        match *self {
            SurfaceKind::Plane | SurfaceKind::Enneper => Domain::new([-1.0, 1.0], [-1.0, 1.0]),
            SurfaceKind::Sphere { .. } => Domain::new([0.4, 2.7], [0.0, 6.0]),
            SurfaceKind::Cylinder { .. } => Domain::new([0.0, 6.0], [-1.0, 1.0]),
            SurfaceKind::Catenoid { c } => Domain::new([-c, c], [0.0, 6.0]),
            SurfaceKind::Helicoid { .. } => Domain::new([-1.0, 1.0], [0.0, 6.0]),
            SurfaceKind::Torus { .. } => Domain::new([0.0, 6.0], [0.0, 6.0]),
            SurfaceKind::Ellipsoid { .. } => Domain::new([0.3, 1.3], [0.3, 1.3]),
            SurfaceKind::Cone { .. } => Domain::new([0.0, 6.0], [0.5, 2.0]),
            SurfaceKind::Graph(_) => Domain::new([0.2, 0.8], [0.3, 0.9]),
        }
    }

    /// Whether the surface is minimal by construction (used only by tests and
    /// reports, never by the classifier).
    pub fn is_minimal(&self) -> bool {
        matches!(
            self,
            SurfaceKind::Plane
                | SurfaceKind::Catenoid { .. }
                | SurfaceKind::Helicoid { .. }
                | SurfaceKind::Enneper
        )
    }

    fn embed<const N: usize>(&self, u: Jet<f64, N>, v: Jet<f64, N>) -> Vec3<Jet<f64, N>> {
        let c = |x: f64| Jet::<f64, N>::constant(x);
        match self {
            SurfaceKind::Plane => Vec3::new(u, v, c(0.0)),
            SurfaceKind::Sphere { radius } => {
                let su = u.sin();
                Vec3::new(su * v.cos(), su * v.sin(), u.cos()).scale(c(*radius))
            }
            SurfaceKind::Cylinder { radius } => {
                Vec3::new(u.cos() * *radius, u.sin() * *radius, v)
            }
            SurfaceKind::Catenoid { c: k } => {
                let ch = (u * (1.0 / k)).cosh() * *k;
                Vec3::new(ch * v.cos(), ch * v.sin(), u)
            }
            SurfaceKind::Helicoid { c: k } => Vec3::new(u * v.cos(), u * v.sin(), v * *k),
            SurfaceKind::Enneper => {
                let (u2, v2) = (u * u, v * v);
                Vec3::new(
                    u - u2 * u * (1.0 / 3.0) + u * v2,
                    v - v2 * v * (1.0 / 3.0) + v * u2,
                    u2 - v2,
                )
            }
            SurfaceKind::Torus { major, minor } => {
                let ring = u.cos() * *minor + *major;
                Vec3::new(ring * v.cos(), ring * v.sin(), u.sin() * *minor)
            }
            SurfaceKind::Ellipsoid { p, q, s } => {
                let su = u.sin();
                Vec3::new(su * v.cos() * *p, su * v.sin() * *q, u.cos() * *s)
            }
            SurfaceKind::Cone { half_angle } => {
                let (sa, ca) = half_angle.sin_cos();
                Vec3::new(v * u.cos() * sa, v * u.sin() * sa, v * ca)
            }
            SurfaceKind::Graph(poly) => Vec3::new(u, v, poly.eval(u, v)),
        }
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::ConfigParse(format!("parameter {key}: cannot parse {raw:?} as a number")))
}

impl FromStr for SurfaceKind {
    type Err = Error;

    /// Parses `name[:key=value,...]`, e.g. `torus:R=2,r=0.5` or `graph:c20=1,c03=1`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (s.trim(), ""),
        };
        let mut params: Vec<(String, f64)> = Vec::new();
        if !rest.is_empty() {
            for item in rest.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(|| {
                    Error::ConfigParse(format!("surface parameter {item:?} is not key=value"))
                })?;
                let key = k.trim().to_string();
                if params.iter().any(|(p, _)| *p == key) {
                    return Err(Error::ConfigParse(format!("duplicate surface parameter {key}")));
                }
                let value = parse_f64(&key, v)?;
                params.push((key, value));
            }
        }
        let mut take = |key: &str| -> Result<f64> {
            let pos = params
                .iter()
                .position(|(k, _)| k == key)
                .ok_or_else(|| Error::ConfigParse(format!("surface {name:?} needs parameter {key}")))?;
            Ok(params.remove(pos).1)
        };
        let kind = match name {
            "plane" => SurfaceKind::Plane,
            "sphere" => SurfaceKind::Sphere { radius: take("r")? },
            "cylinder" => SurfaceKind::Cylinder { radius: take("r")? },
            "catenoid" => SurfaceKind::Catenoid { c: take("c")? },
            "helicoid" => SurfaceKind::Helicoid { c: take("c")? },
            "enneper" => SurfaceKind::Enneper,
            "torus" => SurfaceKind::Torus { major: take("R")?, minor: take("r")? },
            "ellipsoid" => SurfaceKind::Ellipsoid { p: take("p")?, q: take("q")?, s: take("s")? },
            "cone" => SurfaceKind::Cone { half_angle: take("alpha")? },
            "graph" => {
                let mut terms = Vec::new();
                for (k, c) in params.drain(..) {
                    let digits = k.strip_prefix('c').filter(|d| d.len() == 2).ok_or_else(|| {
                        Error::ConfigParse(format!("graph coefficient key {k:?} is not of the form cIJ"))
                    })?;
                    let mut it = digits.chars().map(|ch| ch.to_digit(10));
                    match (it.next().flatten(), it.next().flatten()) {
                        (Some(i), Some(j)) => terms.push(((i, j), c)),
                        _ => {
                            return Err(Error::ConfigParse(format!(
                                "graph coefficient key {k:?} is not of the form cIJ"
                            )))
                        }
                    }
                }
                SurfaceKind::Graph(GraphPolynomial::new(terms).map_err(|e| Error::ConfigParse(e.to_string()))?)
            }
            other => return Err(Error::ConfigParse(format!("unknown surface tag {other:?}"))),
        };
        if let Some((k, _)) = params.first() {
            return Err(Error::ConfigParse(format!("unexpected parameter {k:?} for surface {name:?}")));
        }
        kind.validate().map_err(|e| Error::ConfigParse(e.to_string()))?;
        Ok(kind)
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceKind::Plane => write!(f, "plane"),
            SurfaceKind::Sphere { radius } => write!(f, "sphere:r={radius}"),
            SurfaceKind::Cylinder { radius } => write!(f, "cylinder:r={radius}"),
            SurfaceKind::Catenoid { c } => write!(f, "catenoid:c={c}"),
            SurfaceKind::Helicoid { c } => write!(f, "helicoid:c={c}"),
            SurfaceKind::Enneper => write!(f, "enneper"),
            SurfaceKind::Torus { major, minor } => write!(f, "torus:R={major},r={minor}"),
            SurfaceKind::Ellipsoid { p, q, s } => write!(f, "ellipsoid:p={p},q={q},s={s}"),
            SurfaceKind::Cone { half_angle } => write!(f, "cone:alpha={half_angle}"),
            SurfaceKind::Graph(poly) => {
                write!(f, "graph")?;
                for (n, ((i, j), c)) in poly.terms().iter().enumerate() {
                    let sep = if n == 0 { ':' } else { ',' };
                    write!(f, "{sep}c{i}{j}={c}")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for SurfaceKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SurfaceKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Closed parameter box `[u0, u1] × [v0, v1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Domain {
    pub fn new(u: [f64; 2], v: [f64; 2]) -> Self {
        Domain { u, v }
    }

    pub fn contains(&self, uv: [f64; 2]) -> bool {
        const SLACK: f64 = 1e-12;
        uv[0] >= self.u[0] - SLACK
            && uv[0] <= self.u[1] + SLACK
            && uv[1] >= self.v[0] - SLACK
            && uv[1] <= self.v[1] + SLACK
    }

    pub fn swapped(&self) -> Self {
        Domain { u: self.v, v: self.u }
    }

    /// Tensor grid of `nu × nv` points including the box corners, row-major in `u`.
    pub fn grid(&self, nu: usize, nv: usize) -> Vec<[f64; 2]> {
        let lerp = |r: [f64; 2], k: usize, n: usize| {
            if n <= 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64
            }
        };
        (0..nu)
            .flat_map(|i| (0..nv).map(move |j| [lerp(self.u, i, nu), lerp(self.v, j, nv)]))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if ok(self.u) && ok(self.v) {
            Ok(())
        } else {
            Err(Error::InvalidSurface(format!("empty or non-finite domain {self:?}")))
        }
    }
}

/// An immutable parametrized patch: catalog surface, parameter box and
/// regularity margin. With `swap_uv` the chart is precomposed with
/// `(u, v) ↦ (v, u)`, which flips the induced normal.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    kind: SurfaceKind,
    domain: Domain,
    margin: f64,
    swap_uv: bool,
}

impl SurfacePatch {
    pub fn new(kind: SurfaceKind, domain: Domain) -> Result<Self> {
        Self::with_margin(kind, domain, DEFAULT_REGULARITY_MARGIN)
    }

    pub fn catalog(kind: SurfaceKind) -> Result<Self> {
        let domain = kind.default_domain();
        Self::new(kind, domain)
    }

    pub fn with_margin(kind: SurfaceKind, domain: Domain, margin: f64) -> Result<Self> {
        kind.validate()?;
        domain.validate()?;
        if margin.is_nan() || margin <= 0.0 {
            return Err(Error::InvalidSurface(format!("regularity margin must be positive, got {margin}")));
        }
        if matches!(kind, SurfaceKind::Sphere { .. } | SurfaceKind::Ellipsoid { .. })
            && (domain.u[0] < POLE_MARGIN || domain.u[1] > PI - POLE_MARGIN)
        {
            return Err(Error::InvalidSurface(format!(
                "polar range {:?} must stay {POLE_MARGIN} rad away from the poles",
                domain.u
            )));
        }
        Ok(SurfacePatch { kind, domain, margin, swap_uv: false })
    }

    /// The same surface with its parameters exchanged.
    pub fn swapped(&self) -> Self {
        SurfacePatch {
            kind: self.kind.clone(),
            domain: self.domain.swapped(),
            margin: self.margin,
            swap_uv: !self.swap_uv,
        }
    }

    /// The same chart on a box enlarged by `by` on every side, e.g. to fit a
    /// finite-difference stencil around boundary points. Regularity is still
    /// checked pointwise on evaluation.
    pub fn widened(&self, by: f64) -> Self {
        let grow = |r: [f64; 2]| [r[0] - by, r[1] + by];
        SurfacePatch {
            domain: Domain { u: grow(self.domain.u), v: grow(self.domain.v) },
            ..self.clone()
        }
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn is_swapped(&self) -> bool {
        self.swap_uv
    }

    /// Jet of the position vector about `uv`, order `N`.
    pub fn position<const N: usize>(&self, uv: [f64; 2]) -> Result<Vec3<Jet<f64, N>>> {
        if !self.domain.contains(uv) {
            return Err(Error::OutOfDomain { u: uv[0], v: uv[1] });
        }
        let u = Jet::var(Var::U, uv[0]);
        let v = Jet::var(Var::V, uv[1]);
        Ok(if self.swap_uv { self.kind.embed(v, u) } else { self.kind.embed(u, v) })
    }
}

/// Position and first partials about a point.
#[derive(Debug, Clone, Copy)]
pub struct PatchJets {
    pub x: Vec3<Jet2>,
    pub xu: Vec3<Jet2>,
    pub xv: Vec3<Jet2>,
}

pub fn eval_patch(patch: &SurfacePatch, uv: [f64; 2]) -> Result<PatchJets> {
    let x = patch.position::<4>(uv)?;
    Ok(PatchJets { x, xu: x.du(), xv: x.dv() })
}

/// First and second fundamental forms as jets. Entries built from second
/// derivatives of the position are exact to order 2.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalForms {
    pub uv: [f64; 2],
    pub x: Vec3<Jet2>,
    pub xu: Vec3<Jet2>,
    pub xv: Vec3<Jet2>,
    pub normal: Vec3<Jet2>,
    pub g: [[Jet2; 2]; 2],
    pub h: [[Jet2; 2]; 2],
}

impl FundamentalForms {
    pub fn det_g(&self) -> Jet2 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }

    pub fn g_inverse(&self) -> Result<[[Jet2; 2]; 2]> {
        let inv_det = self.det_g().try_recip()?;
        Ok([
            [self.g[1][1] * inv_det, -(self.g[0][1] * inv_det)],
            [-(self.g[1][0] * inv_det), self.g[0][0] * inv_det],
        ])
    }

    /// Coordinate components of a tangent vector given in `R³`.
    pub fn to_coordinates(&self, w: &Vec3<Jet2>) -> Result<[Jet2; 2]> {
        let gi = self.g_inverse()?;
        let (pu, pv) = (w.dot(&self.xu), w.dot(&self.xv));
        Ok([gi[0][0] * pu + gi[0][1] * pv, gi[1][0] * pu + gi[1][1] * pv])
    }

    /// `R³` vector of a tangent vector given in coordinates.
    pub fn to_ambient(&self, w: &[Jet2; 2]) -> Vec3<Jet2> {
        self.xu.scale(w[0]) + self.xv.scale(w[1])
    }
}

pub fn fundamental_forms(patch: &SurfacePatch, uv: [f64; 2]) -> Result<FundamentalForms> {
    let PatchJets { x, xu, xv } = eval_patch(patch, uv)?;
    let cross = xu.cross(&xv);
    let len2 = cross.dot(&cross);
    let norm = len2.value().sqrt();
    if norm < patch.margin() {
        return Err(Error::DegenerateImmersion { norm, margin: patch.margin() });
    }
    let normal = cross.scale(len2.try_sqrt()?.try_recip()?);
    let (xuu, xuv, xvv) = (xu.du(), xu.dv(), xv.dv());
    let g = [[xu.dot(&xu), xu.dot(&xv)], [xu.dot(&xv), xv.dot(&xv)]];
    let h12 = xuv.dot(&normal);
    let h = [[xuu.dot(&normal), h12], [h12, xvv.dot(&normal)]];
    Ok(FundamentalForms { uv, x, xu, xv, normal, g, h })
}

/// `A = g⁻¹ h` in the coordinate basis.
pub fn shape_operator(ff: &FundamentalForms) -> Result<[[Jet2; 2]; 2]> {
    let gi = ff.g_inverse()?;
    let h = &ff.h;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| gi[i][0] * h[0][j] + gi[i][1] * h[1][j])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::dot3;

    fn sphere(r: f64) -> SurfacePatch {
        SurfacePatch::catalog(SurfaceKind::Sphere { radius: r }).unwrap()
    }

    #[test]
    fn sphere_position() {
        let x = sphere(1.0).position::<4>([PI / 2.0, 0.0]).unwrap().value();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
    }

    #[test]
    fn plane_position_is_linear() {
        let p = SurfacePatch::catalog(SurfaceKind::Plane).unwrap();
        let x = p.position::<4>([0.3, -0.7]).unwrap();
        assert_eq!(x.value(), [0.3, -0.7, 0.0]);
        for c in x.0 {
            for ((i, j), d) in Jet2::multi_indices().zip(c.coeffs()) {
                if i + j >= 2 {
                    assert_eq!(*d, 0.0);
                }
            }
        }
    }

    #[test]
    fn catenoid_at_origin() {
        let p = SurfacePatch::catalog(SurfaceKind::Catenoid { c: 1.0 }).unwrap();
        assert_eq!(p.position::<4>([0.0, 0.0]).unwrap().value(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_domain() {
        let p = sphere(1.0);
        assert!(matches!(eval_patch(&p, [0.05, 0.0]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn sphere_forms_have_h_equal_minus_g() {
        let ff = fundamental_forms(&sphere(1.0), [1.1, 0.7]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ff.h[i][j].value() + ff.g[i][j].value()).abs() < 1e-14);
            }
        }
        let a = shape_operator(&ff).unwrap();
        assert!((a[0][0].value() + 1.0).abs() < 1e-14);
        assert!((a[1][1].value() + 1.0).abs() < 1e-14);
        assert!(a[0][1].value().abs() < 1e-14 && a[1][0].value().abs() < 1e-14);
    }

    #[test]
    fn plane_has_zero_second_form() {
        let p = SurfacePatch::catalog(SurfaceKind::Plane).unwrap();
        let ff = fundamental_forms(&p, [0.2, 0.1]).unwrap();
        for row in ff.h {
            for hij in row {
                assert!(hij.coeffs().iter().all(|c| *c == 0.0));
            }
        }
        let a = shape_operator(&ff).unwrap();
        assert!(a.iter().flatten().all(|x| x.value() == 0.0));
    }

    #[test]
    fn cylinder_forms() {
        let p = SurfacePatch::catalog(SurfaceKind::Cylinder { radius: 1.0 }).unwrap();
        let uv = [0.8, 0.3];
        let ff = fundamental_forms(&p, uv).unwrap();
        let g: Vec<f64> = ff.g.iter().flatten().map(|x| x.value()).collect();
        let h: Vec<f64> = ff.h.iter().flatten().map(|x| x.value()).collect();
        let expect_g = [1.0, 0.0, 0.0, 1.0];
        let expect_h = [-1.0, 0.0, 0.0, 0.0];
        for k in 0..4 {
            assert!((g[k] - expect_g[k]).abs() < 1e-14);
            assert!((h[k] - expect_h[k]).abs() < 1e-14);
        }
        // N = (cos u, sin u, 0); x_uu by central differences of the closed form
        let step = 1e-4;
        let x = |u: f64| [u.cos(), u.sin(), uv[1]];
        let (xp, x0, xm) = (x(uv[0] + step), x(uv[0]), x(uv[0] - step));
        let xuu: [f64; 3] = std::array::from_fn(|k| (xp[k] - 2.0 * x0[k] + xm[k]) / (step * step));
        let n = [uv[0].cos(), uv[0].sin(), 0.0];
        assert!((dot3(&xuu, &n) + 1.0).abs() < 1e-6);

        let a = shape_operator(&ff).unwrap();
        let (tr, det) = (
            a[0][0].value() + a[1][1].value(),
            a[0][0].value() * a[1][1].value() - a[0][1].value() * a[1][0].value(),
        );
        // eigenvalues {-1, 0}
        assert!((tr + 1.0).abs() < 1e-14 && det.abs() < 1e-14);
    }

    #[test]
    fn paraboloid_at_origin_has_unit_gauss_curvature() {
        let poly = GraphPolynomial::new([((2, 0), 0.5), ((0, 2), 0.5)]).unwrap();
        let p = SurfacePatch::new(SurfaceKind::Graph(poly), Domain::new([-1.0, 1.0], [-1.0, 1.0])).unwrap();
        let ff = fundamental_forms(&p, [0.0, 0.0]).unwrap();
        let a = shape_operator(&ff).unwrap();
        let det = a[0][0].value() * a[1][1].value() - a[0][1].value() * a[1][0].value();
        assert!((det - 1.0).abs() < 1e-14);
        let swapped = fundamental_forms(&p.swapped(), [0.0, 0.0]).unwrap();
        let b = shape_operator(&swapped).unwrap();
        assert!((b[0][0].value() + 1.0).abs() < 1e-14, "normal flips under swap");
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        let kinds = [
            "sphere:r=2", "cylinder:r=0.5", "catenoid:c=1", "helicoid:c=1", "enneper",
            "torus:R=2,r=0.5", "ellipsoid:p=2,q=1.5,s=1", "cone:alpha=0.7853981633974483",
            "graph:c20=1,c03=1",
        ];
        for k in kinds {
            let patch = SurfacePatch::catalog(k.parse().unwrap()).unwrap();
            for uv in patch.domain().grid(4, 4) {
                let ff = fundamental_forms(&patch, uv).unwrap();
                let n = ff.normal.value();
                assert!((dot3(&n, &n) - 1.0).abs() < 1e-12, "{k}");
                assert!(dot3(&n, &ff.xu.value()).abs() < 1e-12, "{k}");
                assert!(dot3(&n, &ff.xv.value()).abs() < 1e-12, "{k}");
                assert!(ff.det_g().value() > 0.0 && ff.g[0][0].value() > 0.0);
            }
        }
    }

    #[test]
    fn trace_flips_and_det_is_invariant_under_swap() {
        for k in ["torus:R=2,r=0.5", "ellipsoid:p=2,q=1.5,s=1", "enneper", "graph:c20=1,c03=1"] {
            let patch = SurfacePatch::catalog(k.parse().unwrap()).unwrap();
            let swapped = patch.swapped();
            for uv in patch.domain().grid(3, 3) {
                let a = shape_operator(&fundamental_forms(&patch, uv).unwrap()).unwrap();
                let b = shape_operator(&fundamental_forms(&swapped, [uv[1], uv[0]]).unwrap()).unwrap();
                let tr = |m: &[[Jet2; 2]; 2]| m[0][0].value() + m[1][1].value();
                let det = |m: &[[Jet2; 2]; 2]| {
                    m[0][0].value() * m[1][1].value() - m[0][1].value() * m[1][0].value()
                };
                assert!((tr(&a) + tr(&b)).abs() < 1e-12, "{k}");
                assert!((det(&a) - det(&b)).abs() < 1e-12, "{k}");
            }
        }
    }

    #[test]
    fn degenerate_immersion_detected() {
        // helicoid at u = 0 is regular; a cone through its vertex is not
        let kind = SurfaceKind::Cone { half_angle: 0.5 };
        let p = SurfacePatch::new(kind, Domain::new([0.0, 1.0], [0.0, 1.0])).unwrap();
        assert!(matches!(fundamental_forms(&p, [0.5, 0.0]), Err(Error::DegenerateImmersion { .. })));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["plane", "sphere:r=1", "torus:R=2,r=0.5", "graph:c20=1,c03=1", "cone:alpha=0.5"] {
            let k: SurfaceKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        for bad in ["spheer:r=1", "sphere", "sphere:r=-1", "torus:R=1,r=2", "graph:c50=1", "sphere:r=1,x=2", "sphere:r"] {
            assert!(matches!(bad.parse::<SurfaceKind>(), Err(Error::ConfigParse(_))), "{bad}");
        }
    }

    #[test]
    fn sphere_domain_must_avoid_poles() {
        let r = SurfacePatch::new(SurfaceKind::Sphere { radius: 1.0 }, Domain::new([0.0, 1.0], [0.0, 1.0]));
        assert!(matches!(r, Err(Error::InvalidSurface(_))));
    }
}
