//! Small fixed-size vectors over any [`Scalar`].

use std::ops::{Add, Neg, Sub};

use crate::jet::{Jet, Scalar, Var};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<S>(pub [S; 3]);

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3([S::zero(); 3])
    }

    pub fn dot(&self, o: &Self) -> S {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn scale(&self, k: S) -> Self {
        Vec3(self.0.map(|x| x * k))
    }

    pub fn map<T>(&self, f: impl Fn(S) -> T) -> Vec3<T> {
        Vec3(self.0.map(f))
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3(self.0.map(|x| -x))
    }
}

impl<S: Scalar, const N: usize> Vec3<Jet<S, N>> {
    pub fn diff(&self, which: Var) -> Self {
        self.map(|c| c.diff(which))
    }

    pub fn du(&self) -> Self {
        self.diff(Var::U)
    }

    pub fn dv(&self) -> Self {
        self.diff(Var::V)
    }

    /// Derivative of a vector field along `w^u ∂_u + w^v ∂_v`.
    pub fn directional(&self, w: [Jet<S, N>; 2]) -> Self {
        self.map(|c| c.directional(w))
    }

    pub fn value(&self) -> [f64; 3] {
        self.0.map(|c| c.value())
    }
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// A point or vector of `R⁶ = R³ × R³`.
pub type R6 = [f64; 6];

pub fn join6(x: &[f64; 3], y: &[f64; 3]) -> R6 {
    [x[0], x[1], x[2], y[0], y[1], y[2]]
}

pub fn dot6(a: &R6, b: &R6) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm6(a: &R6) -> f64 {
    dot6(a, a).sqrt()
}

pub fn sub6(a: &R6, b: &R6) -> R6 {
    std::array::from_fn(|k| a[k] - b[k])
}

pub fn scale6(a: &R6, k: f64) -> R6 {
    a.map(|x| x * k)
}

/// The complex structure `J(X, Y) = (-Y, X)` on `C³ = R³ × R³`.
pub fn complex_structure(v: &R6) -> R6 {
    [-v[3], -v[4], -v[5], v[0], v[1], v[2]]
}
