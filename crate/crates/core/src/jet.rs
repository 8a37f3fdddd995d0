//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the raw partial derivatives `∂^{i+j} f / ∂u^i ∂v^j` of a
//! function at a base point for every multi-index with `i + j <= N`. The
//! coefficients are *not* divided by `i! j!`, so a Laplacian or a directional
//! derivative reads them off without rescaling.
//!
//! The coefficient type is generic over [`Scalar`], which lets the numeric
//! oracle nest a [`FiberSeries`] (a univariate series in the fibre coordinate)
//! inside every coefficient.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Highest order any jet may carry.
pub const MAX_ORDER: usize = 6;

const CAPACITY: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

/// Magnitude below which a divisor or a radicand is treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// The working jet: order 4, plain `f64` coefficients.
pub type Jet2 = Jet<f64, 4>;

const BINOMIAL: [[f64; MAX_ORDER + 1]; MAX_ORDER + 1] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0, 0.0],
    [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0],
];

const FACTORIAL: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by near-zero constant part {value:e}")]
    DivisionByNearZero { value: f64 },
    #[error("{function} is undefined at constant part {value:e}")]
    DomainError { function: &'static str, value: f64 },
}

/// Coefficient ring of a jet.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;

    /// The plain real value at the base point.
    fn value(&self) -> f64;

    fn scale(self, k: f64) -> Self;

    fn try_recip(self) -> Result<Self, JetError>;

    fn try_sqrt(self) -> Result<Self, JetError>;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        Ok(self * rhs.try_recip()?)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn value(&self) -> f64 {
        *self
    }

    fn scale(self, k: f64) -> Self {
        self * k
    }

    fn try_recip(self) -> Result<Self, JetError> {
        if self.abs() < DEGENERACY_THRESHOLD {
            return Err(JetError::DivisionByNearZero { value: self });
        }
        Ok(1.0 / self)
    }

    fn try_sqrt(self) -> Result<Self, JetError> {
        if self < 0.0 {
            return Err(JetError::DomainError { function: "sqrt", value: self });
        }
        Ok(self.sqrt())
    }
}

/// Derivatives `f^{(k)}(x)` for `k = 0..=n` of `x ↦ 1/x`, in the ring `S`.
fn recip_derivatives<S: Scalar>(x: S, n: usize) -> Result<Vec<S>, JetError> {
    let r = x.try_recip()?;
    let mut out = Vec::with_capacity(n + 1);
    let mut power = r;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(power.scale(sign * FACTORIAL[k]));
        power = power * r;
    }
    Ok(out)
}

/// Derivatives of `x ↦ √x`, in the ring `S`.
fn sqrt_derivatives<S: Scalar>(x: S, n: usize) -> Result<Vec<S>, JetError> {
    if x.value() < DEGENERACY_THRESHOLD {
        return Err(JetError::DomainError { function: "sqrt", value: x.value() });
    }
    let s = x.try_sqrt()?;
    let r = x.try_recip()?;
    let mut out = Vec::with_capacity(n + 1);
    let mut term = s;
    let mut falling = 1.0;
    for k in 0..=n {
        out.push(term.scale(falling));
        falling *= 0.5 - k as f64;
        term = term * r;
    }
    Ok(out)
}

/// Which coordinate a jet variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

/// Univariate elementary functions that can be composed with a jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Sinh,
    Cosh,
    Atan,
    Pow(f64),
}

impl Elementary {
    /// `f^{(k)}(x)` for `k = 0..=n`.
    fn derivatives(self, x: f64, n: usize) -> Result<Vec<f64>, JetError> {
        let out = match self {
            Elementary::Sin => {
                let (s, c) = x.sin_cos();
                (0..=n).map(|k| [s, c, -s, -c][k % 4]).collect()
            }
            Elementary::Cos => {
                let (s, c) = x.sin_cos();
                (0..=n).map(|k| [c, -s, -c, s][k % 4]).collect()
            }
            Elementary::Exp => vec![x.exp(); n + 1],
            Elementary::Sinh => (0..=n)
                .map(|k| if k % 2 == 0 { x.sinh() } else { x.cosh() })
                .collect(),
            Elementary::Cosh => (0..=n)
                .map(|k| if k % 2 == 0 { x.cosh() } else { x.sinh() })
                .collect(),
            Elementary::Sqrt => sqrt_derivatives(x, n)?,
            Elementary::Atan => atan_derivatives(x, n),
            Elementary::Pow(r) => pow_derivatives(x, r, n)?,
        };
        Ok(out)
    }
}

fn atan_derivatives(x: f64, n: usize) -> Vec<f64> {
    // atan' = 1/(1+x²); expand w(h) = 1/(1 + (x+h)²) as a power series in h.
    let d = [1.0 + x * x, 2.0 * x, 1.0];
    let mut w = vec![0.0; n.max(1)];
    for k in 0..w.len() {
        let mut acc = if k == 0 { 1.0 } else { 0.0 };
        for m in 1..=k.min(2) {
            acc -= d[m] * w[k - m];
        }
        w[k] = acc / d[0];
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(x.atan());
    for k in 1..=n {
        // the (k-1)-th series coefficient of atan' times (k-1)! gives atan^{(k)}
        out.push(w[k - 1] * FACTORIAL[k - 1]);
    }
    out
}

fn pow_derivatives(x: f64, r: f64, n: usize) -> Result<Vec<f64>, JetError> {
    let integral = r.fract() == 0.0;
    if !integral && x <= DEGENERACY_THRESHOLD {
        return Err(JetError::DomainError { function: "pow", value: x });
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut falling = 1.0;
    for k in 0..=n {
        let exponent = r - k as f64;
        let v = if falling == 0.0 {
            0.0
        } else if integral {
            if exponent < 0.0 && x.abs() < DEGENERACY_THRESHOLD {
                return Err(JetError::DivisionByNearZero { value: x });
            }
            falling * x.powi(exponent as i32)
        } else {
            falling * x.powf(exponent)
        };
        out.push(v);
        falling *= exponent;
    }
    Ok(out)
}

#[inline]
const fn index(i: usize, j: usize) -> usize {
    let n = i + j;
    n * (n + 1) / 2 + j
}

/// Truncated bivariate Taylor expansion of order `N` with raw-derivative storage.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<S, const N: usize> {
    c: [S; CAPACITY],
}

impl<S: Scalar, const N: usize> Jet<S, N> {
    const ORDER_OK: () = assert!(N <= MAX_ORDER, "jet order exceeds MAX_ORDER");

    /// Number of stored coefficients, `(N+1)(N+2)/2`.
    pub const COEFF_COUNT: usize = (N + 1) * (N + 2) / 2;

    pub fn constant(value: S) -> Self {
        #[allow(clippy::let_unit_value)]
        let () = Self::ORDER_OK;
        let mut c = [S::zero(); CAPACITY];
        c[0] = value;
        Jet { c }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    /// Jet of the coordinate function `which`, expanded about `value`.
    pub fn var(which: Var, value: S) -> Self {
        let mut out = Self::constant(value);
        if N >= 1 {
            match which {
                Var::U => out.c[index(1, 0)] = S::one(),
                Var::V => out.c[index(0, 1)] = S::one(),
            }
        }
        out
    }

    /// Builds a jet from `(i, j, ∂^{i+j}f)` triples; unspecified entries are zero.
    pub fn from_partials(value: S, partials: &[((usize, usize), S)]) -> Self {
        let mut out = Self::constant(value);
        for &((i, j), d) in partials {
            assert!(i + j <= N, "multi-index ({i}, {j}) exceeds order {N}");
            out.c[index(i, j)] = d;
        }
        out
    }

    pub fn order(&self) -> usize {
        N
    }

    /// Raw partial derivative `∂^{i+j}/∂u^i∂v^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> S {
        assert!(i + j <= N, "multi-index ({i}, {j}) exceeds order {N}");
        self.c[index(i, j)]
    }

    pub fn set_partial(&mut self, i: usize, j: usize, value: S) {
        assert!(i + j <= N, "multi-index ({i}, {j}) exceeds order {N}");
        self.c[index(i, j)] = value;
    }

    pub fn constant_part(&self) -> S {
        self.c[0]
    }

    pub fn value(&self) -> f64 {
        self.c[0].value()
    }

    /// Coefficients in graded order `(0,0), (1,0), (0,1), (2,0), (1,1), ...`.
    pub fn coeffs(&self) -> &[S] {
        &self.c[..Self::COEFF_COUNT]
    }

    /// Multi-indices in the same order as [`Jet::coeffs`].
    pub fn multi_indices() -> impl Iterator<Item = (usize, usize)> {
        (0..=N).flat_map(|n| (0..=n).map(move |j| (n - j, j)))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Jet<T, N> {
        let mut out = Jet::<T, N>::zero();
        for k in 0..Self::COEFF_COUNT {
            out.c[k] = f(self.c[k]);
        }
        out
    }

    /// Partial derivative with respect to `which`. The result is exact up to
    /// order `N - 1`; its top-order coefficients are zero.
    pub fn diff(&self, which: Var) -> Self {
        let mut out = Self::zero();
        for n in 0..N {
            for j in 0..=n {
                let i = n - j;
                out.c[index(i, j)] = match which {
                    Var::U => self.c[index(i + 1, j)],
                    Var::V => self.c[index(i, j + 1)],
                };
            }
        }
        out
    }

    pub fn du(&self) -> Self {
        self.diff(Var::U)
    }

    pub fn dv(&self) -> Self {
        self.diff(Var::V)
    }

    /// Directional derivative `w^u ∂_u + w^v ∂_v` with jet-valued components.
    pub fn directional(&self, w: [Self; 2]) -> Self {
        w[0] * self.du() + w[1] * self.dv()
    }

    pub fn scale(self, k: f64) -> Self {
        let mut out = self;
        for c in out.c.iter_mut().take(Self::COEFF_COUNT) {
            *c = c.scale(k);
        }
        out
    }

    pub fn scale_by(self, k: S) -> Self {
        let mut out = self;
        for c in out.c.iter_mut().take(Self::COEFF_COUNT) {
            *c = *c * k;
        }
        out
    }

    /// `Σ_k derivs[k]/k! · (self - self₀)^k`: composition with a univariate
    /// function whose derivatives at the constant part are `derivs`.
    fn compose(&self, derivs: &[S]) -> Self {
        let mut delta = *self;
        delta.c[0] = S::zero();
        let mut out = Self::constant(derivs[0]);
        let mut power = delta;
        for (k, d) in derivs.iter().enumerate().skip(1).take(N) {
            out += power.scale_by(d.scale(1.0 / FACTORIAL[k]));
            if k < N {
                power = power * delta;
            }
        }
        out
    }

    pub fn try_recip(self) -> Result<Self, JetError> {
        let d = recip_derivatives(self.c[0], N)?;
        Ok(self.compose(&d))
    }

    pub fn try_div(self, rhs: Self) -> Result<Self, JetError> {
        Ok(self * rhs.try_recip()?)
    }

    pub fn try_sqrt(self) -> Result<Self, JetError> {
        let d = sqrt_derivatives(self.c[0], N)?;
        Ok(self.compose(&d))
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(S::one());
        for _ in 0..n {
            out = out * *self;
        }
        out
    }
}

impl<const N: usize> Jet<f64, N> {
    /// `f ∘ self` for an elementary `f`.
    pub fn apply(&self, f: Elementary) -> Result<Self, JetError> {
        let d = f.derivatives(self.c[0], N)?;
        Ok(self.compose(&d))
    }

    pub fn sin(&self) -> Self {
        self.compose(&Elementary::Sin.derivatives(self.c[0], N).expect("sin is total"))
    }

    pub fn cos(&self) -> Self {
        self.compose(&Elementary::Cos.derivatives(self.c[0], N).expect("cos is total"))
    }

    pub fn exp(&self) -> Self {
        self.compose(&Elementary::Exp.derivatives(self.c[0], N).expect("exp is total"))
    }

    pub fn sinh(&self) -> Self {
        self.compose(&Elementary::Sinh.derivatives(self.c[0], N).expect("sinh is total"))
    }

    pub fn cosh(&self) -> Self {
        self.compose(&Elementary::Cosh.derivatives(self.c[0], N).expect("cosh is total"))
    }

    pub fn atan(&self) -> Self {
        self.compose(&atan_derivatives(self.c[0], N))
    }

    pub fn pow(&self, r: f64) -> Result<Self, JetError> {
        self.apply(Elementary::Pow(r))
    }
}

impl<S: Scalar, const N: usize> fmt::Debug for Jet<S, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for ((i, j), c) in Self::multi_indices().zip(self.coeffs()) {
            m.entry(&(i, j), c);
        }
        m.finish()
    }
}

impl<S: Scalar, const N: usize> Add for Jet<S, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..Self::COEFF_COUNT {
            self.c[k] = self.c[k] + rhs.c[k];
        }
        self
    }
}

impl<S: Scalar, const N: usize> Sub for Jet<S, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..Self::COEFF_COUNT {
            self.c[k] = self.c[k] - rhs.c[k];
        }
        self
    }
}

impl<S: Scalar, const N: usize> Neg for Jet<S, N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for k in 0..Self::COEFF_COUNT {
            self.c[k] = -self.c[k];
        }
        self
    }
}

impl<S: Scalar, const N: usize> AddAssign for Jet<S, N> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<S: Scalar, const N: usize> SubAssign for Jet<S, N> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<S: Scalar, const N: usize> Mul for Jet<S, N> {
    type Output = Self;
    // Leibniz rule on raw partials:
    // ∂^{(i,j)}(fg) = Σ_{k≤i, l≤j} C(i,k) C(j,l) ∂^{(k,l)}f ∂^{(i-k,j-l)}g
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for n in 0..=N {
            for j in 0..=n {
                let i = n - j;
                let mut acc = S::zero();
                for k in 0..=i {
                    for l in 0..=j {
                        let term = self.c[index(k, l)] * rhs.c[index(i - k, j - l)];
                        let w = BINOMIAL[i][k] * BINOMIAL[j][l];
                        acc = acc + if w == 1.0 { term } else { term.scale(w) };
                    }
                }
                out.c[index(i, j)] = acc;
            }
        }
        out
    }
}

impl<S: Scalar, const N: usize> Add<f64> for Jet<S, N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] = self.c[0] + S::from_f64(rhs);
        self
    }
}

impl<S: Scalar, const N: usize> Sub<f64> for Jet<S, N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.c[0] = self.c[0] - S::from_f64(rhs);
        self
    }
}

impl<S: Scalar, const N: usize> Mul<f64> for Jet<S, N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<S: Scalar, const N: usize> Scalar for Jet<S, N> {
    fn from_f64(x: f64) -> Self {
        Self::constant(S::from_f64(x))
    }

    fn value(&self) -> f64 {
        self.c[0].value()
    }

    fn scale(self, k: f64) -> Self {
        Jet::scale(self, k)
    }

    fn try_recip(self) -> Result<Self, JetError> {
        Jet::try_recip(self)
    }

    fn try_sqrt(self) -> Result<Self, JetError> {
        Jet::try_sqrt(self)
    }
}

/// Order of [`FiberSeries`].
pub const FIBER_ORDER: usize = 4;

/// Univariate truncated Taylor series in the fibre coordinate `t`, raw
/// derivative storage `[f, f', f'', f''', f'''']`.
#[derive(Clone, Copy, PartialEq)]
pub struct FiberSeries {
    d: [f64; FIBER_ORDER + 1],
}

impl FiberSeries {
    pub fn constant(x: f64) -> Self {
        let mut d = [0.0; FIBER_ORDER + 1];
        d[0] = x;
        FiberSeries { d }
    }

    /// The identity function `t` expanded about `t0`.
    pub fn var(t0: f64) -> Self {
        let mut s = Self::constant(t0);
        s.d[1] = 1.0;
        s
    }

    pub fn derivative(&self, k: usize) -> f64 {
        self.d[k]
    }

    /// `d/dt`; exact to order `FIBER_ORDER - 1`.
    pub fn diff(&self) -> Self {
        let mut out = Self::constant(0.0);
        for k in 0..FIBER_ORDER {
            out.d[k] = self.d[k + 1];
        }
        out
    }

    fn compose(&self, derivs: &[f64]) -> Self {
        let mut delta = *self;
        delta.d[0] = 0.0;
        let mut out = Self::constant(derivs[0]);
        let mut power = delta;
        for (k, dk) in derivs.iter().enumerate().skip(1) {
            out = out + power.scale(dk / FACTORIAL[k]);
            power = power * delta;
        }
        out
    }
}

impl fmt::Debug for FiberSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.d.iter()).finish()
    }
}

impl Add for FiberSeries {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..=FIBER_ORDER {
            self.d[k] += rhs.d[k];
        }
        self
    }
}

impl Sub for FiberSeries {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..=FIBER_ORDER {
            self.d[k] -= rhs.d[k];
        }
        self
    }
}

impl Neg for FiberSeries {
    type Output = Self;
    fn neg(mut self) -> Self {
        for k in 0..=FIBER_ORDER {
            self.d[k] = -self.d[k];
        }
        self
    }
}

impl Mul for FiberSeries {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(0.0);
        for n in 0..=FIBER_ORDER {
            let mut acc = 0.0;
            for k in 0..=n {
                acc += BINOMIAL[n][k] * self.d[k] * rhs.d[n - k];
            }
            out.d[n] = acc;
        }
        out
    }
}

impl Scalar for FiberSeries {
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }

    fn value(&self) -> f64 {
        self.d[0]
    }

    fn scale(mut self, k: f64) -> Self {
        for d in self.d.iter_mut() {
            *d *= k;
        }
        self
    }

    fn try_recip(self) -> Result<Self, JetError> {
        Ok(self.compose(&recip_derivatives(self.d[0], FIBER_ORDER)?))
    }

    fn try_sqrt(self) -> Result<Self, JetError> {
        Ok(self.compose(&sqrt_derivatives(self.d[0], FIBER_ORDER)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn jet2_has_fifteen_coefficients() {
        assert_eq!(Jet2::COEFF_COUNT, 15);
        assert_eq!(Jet2::zero().coeffs().len(), 15);
        assert_eq!(Jet2::multi_indices().count(), 15);
    }

    #[test]
    fn coordinate_jets() {
        let u = Jet2::var(Var::U, 0.5);
        assert_eq!(u.partial(0, 0), 0.5);
        assert_eq!(u.partial(1, 0), 1.0);
        let nonzero = u.coeffs().iter().filter(|c| **c != 0.0).count();
        assert_eq!(nonzero, 2);

        let v = Jet2::var(Var::V, -2.0);
        assert_eq!(v.partial(0, 0), -2.0);
        assert_eq!(v.partial(0, 1), 1.0);
        assert_eq!(v.partial(1, 0), 0.0);

        let u0 = Jet2::var(Var::U, 0.0);
        assert_eq!(u0.coeffs().iter().filter(|c| **c != 0.0).count(), 1);
        assert_eq!(u0.partial(1, 0), 1.0);
    }

    #[test]
    fn square_of_u() {
        let u = Jet2::var(Var::U, 3.0);
        let sq = u * u;
        assert_eq!(sq.partial(0, 0), 9.0);
        assert_eq!(sq.partial(1, 0), 6.0);
        assert_eq!(sq.partial(2, 0), 2.0);
        for (i, j) in Jet2::multi_indices().filter(|&(i, j)| i + j > 2 || j > 0) {
            assert_eq!(sq.partial(i, j), 0.0);
        }
    }

    #[test]
    fn reciprocal_of_one_plus_u() {
        let one = Jet2::constant(1.0);
        let denom = Jet2::var(Var::U, 0.0) + 1.0;
        let q = one.try_div(denom).unwrap();
        // d^k/du^k (1+u)^{-1} at 0 = (-1)^k k!
        let expected = [1.0, -1.0, 2.0, -6.0, 24.0];
        for (k, e) in expected.iter().enumerate() {
            assert!(close(q.partial(k, 0), *e, 1e-14), "k={k}");
        }
        assert_eq!(q.partial(0, 1), 0.0);
    }

    #[test]
    fn division_by_near_zero_is_an_error() {
        let z = Jet2::var(Var::U, 1e-13);
        assert!(matches!(
            Jet2::constant(1.0).try_div(z),
            Err(JetError::DivisionByNearZero { .. })
        ));
    }

    #[test]
    fn sqrt_domain() {
        let c = Jet2::constant(4.0).try_sqrt().unwrap();
        assert_eq!(c.partial(0, 0), 2.0);
        assert!(c.coeffs()[1..].iter().all(|x| *x == 0.0));
        assert!(matches!(
            Jet2::constant(-1.0).try_sqrt(),
            Err(JetError::DomainError { function: "sqrt", .. })
        ));
        assert!(Jet2::constant(0.0).try_sqrt().is_err());
        assert!(Jet2::constant(-2.0).pow(0.5).is_err());
        assert!(Jet2::constant(-2.0).pow(3.0).is_ok());
    }

    #[test]
    fn sine_series() {
        let s = Jet2::var(Var::U, 0.0).sin();
        let expected = [0.0, 1.0, 0.0, -1.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert!(close(s.partial(k, 0), *e, 1e-15));
        }
        for (i, j) in Jet2::multi_indices().filter(|&(_, j)| j > 0) {
            assert_eq!(s.partial(i, j), 0.0);
        }
    }

    #[test]
    fn exp_of_sum_has_unit_partials() {
        let e = (Jet2::var(Var::U, 0.0) + Jet2::var(Var::V, 0.0)).exp();
        for c in e.coeffs() {
            assert!(close(*c, 1.0, 1e-14));
        }
    }

    #[test]
    fn atan_derivatives_match_closed_forms() {
        let x: f64 = 0.7;
        let d = atan_derivatives(x, 4);
        let q = 1.0 + x * x;
        assert!(close(d[1], 1.0 / q, 1e-14));
        assert!(close(d[2], -2.0 * x / (q * q), 1e-14));
        assert!(close(d[3], (6.0 * x * x - 2.0) / q.powi(3), 1e-14));
        assert!(close(d[4], 24.0 * x * (1.0 - x * x) / q.powi(4), 1e-14));
    }

    #[test]
    fn diff_shifts_coefficients() {
        let u = Jet2::var(Var::U, 0.3);
        let v = Jet2::var(Var::V, -0.2);
        let f = (u * v).sin();
        let fu = f.du();
        assert_eq!(fu.partial(0, 0), f.partial(1, 0));
        assert_eq!(fu.partial(1, 2), f.partial(2, 2));
        assert_eq!(fu.partial(4, 0), 0.0);
    }

    #[test]
    fn fiber_series_reciprocal() {
        // 1/(1+t²) at t = 1: value 1/2, derivative -1/2, second derivative 1/2
        let t = FiberSeries::var(1.0);
        let r = (t * t + FiberSeries::constant(1.0)).try_recip().unwrap();
        assert!(close(r.derivative(0), 0.5, 1e-15));
        assert!(close(r.derivative(1), -0.5, 1e-15));
        assert!(close(r.derivative(2), 0.5, 1e-15));
        assert!(close(r.derivative(3), 0.0, 1e-15));
    }

    #[test]
    fn nested_jets_differentiate_independently() {
        // f(u, t) = u² t³ as a jet in u with fibre-series coefficients
        type Nested = Jet<FiberSeries, 3>;
        let u = Nested::var(Var::U, FiberSeries::constant(2.0));
        let t = Nested::constant(FiberSeries::var(0.5));
        let f = u * u * t * t * t;
        let c = f.partial(1, 0); // ∂_u f = 2u t³
        assert!(close(c.derivative(0), 4.0 * 0.125, 1e-15));
        assert!(close(c.derivative(1), 4.0 * 3.0 * 0.25, 1e-15));
        assert!(close(c.derivative(2), 4.0 * 6.0 * 0.5, 1e-15));
    }
}
