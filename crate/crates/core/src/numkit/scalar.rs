//! Scalar regimes: exact rationals and double-precision complex numbers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU8, Ordering};

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// Complex floating-point scalar.
pub type CFloat = Complex<f64>;

/// Working precision for floating-point kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    /// Compensated (double-double) evaluation in the polishing steps.
    Extended,
}

static PRECISION: AtomicU8 = AtomicU8::new(0);

/// Sets the process-wide precision level. Intended to be called once, before a run.
pub fn set_precision(p: Precision) {
    PRECISION.store(
        match p {
            Precision::Double => 0,
            Precision::Extended => 1,
        },
        Ordering::SeqCst,
    );
}

pub fn precision() -> Precision {
    match PRECISION.load(Ordering::SeqCst) {
        0 => Precision::Double,
        _ => Precision::Extended,
    }
}

/// Field operations shared by the exact and floating-point regimes.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for the exact rational regime.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_cfloat(&self) -> CFloat;
    /// Absolute value as a float, used for pivoting and tolerances.
    fn modulus(&self) -> f64;
    /// Square root inside the field, if one exists.
    fn sqrt_in_field(&self) -> Option<Self>;
    /// Rescales a homogeneous coordinate vector to its canonical representative.
    fn normalize_projective(v: &mut [Self]);
    /// The `k`-th of `count` distinct interpolation nodes.
    fn interpolation_node(k: usize, count: usize) -> Self;
    /// Exact values as `"n/d"` strings; floats with 17 significant digits.
    fn to_json(&self) -> serde_json::Value;

    /// Zero test: exact in the rational regime, `modulus <= tol * scale` otherwise.
    fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.modulus() <= tol * scale.max(f64::MIN_POSITIVE)
        }
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_cfloat(&self) -> CFloat {
        Complex::new(rational_to_f64(self), 0.0)
    }

    fn modulus(&self) -> f64 {
        rational_to_f64(self).abs()
    }

    fn sqrt_in_field(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = exact_isqrt(self.numer())?;
        let d = exact_isqrt(self.denom())?;
        Some(Rational::new(n, d))
    }

    fn normalize_projective(v: &mut [Self]) {
        let mut lcm = BigInt::one();
        for x in v.iter() {
            lcm = lcm.lcm(x.denom());
        }
        let mut ints: Vec<BigInt> = v
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        let mut g = BigInt::zero();
        for x in &ints {
            g = g.gcd(x);
        }
        if g.is_zero() {
            return;
        }
        let first_negative = ints
            .iter()
            .find(|x| !x.is_zero())
            .map(|x| x.sign() == Sign::Minus)
            .unwrap_or(false);
        if first_negative {
            g = -g;
        }
        for (slot, x) in v.iter_mut().zip(ints.iter_mut()) {
            *slot = Rational::from_integer(&*x / &g);
        }
    }

    fn interpolation_node(k: usize, _count: usize) -> Self {
        Self::from_i64(k as i64)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

impl Scalar for CFloat {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }

    fn from_rational(r: &Rational) -> Self {
        Complex::new(rational_to_f64(r), 0.0)
    }

    fn to_cfloat(&self) -> CFloat {
        *self
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn sqrt_in_field(&self) -> Option<Self> {
        Some(self.sqrt())
    }

    fn normalize_projective(v: &mut [Self]) {
        let mut best = 0;
        let mut best_norm = 0.0;
        for (i, x) in v.iter().enumerate() {
            let n = x.norm();
            if n > best_norm * (1.0 + 1e-12) {
                best = i;
                best_norm = n;
            }
        }
        if best_norm == 0.0 {
            return;
        }
        let pivot = v[best];
        for x in v.iter_mut() {
            *x /= pivot;
        }
    }

    fn interpolation_node(k: usize, count: usize) -> Self {
        // roots of unity keep the Vandermonde system well conditioned
        Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / count as f64)
    }

    fn to_json(&self) -> serde_json::Value {
        let f = |x: f64| serde_json::Value::String(format_float(x));
        if self.im == 0.0 {
            f(self.re)
        } else {
            serde_json::json!({ "re": f(self.re), "im": f(self.im) })
        }
    }
}

/// Converts a rational to the nearest double without overflowing on huge parts.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    // keep ~64 significant bits of the quotient
    let k = 64 - (r.numer().bits() as i64 - r.denom().bits() as i64);
    let q = if k >= 0 {
        (r.numer() << (k as usize)) / r.denom()
    } else {
        r.numer() / (r.denom() << ((-k) as usize))
    };
    let mantissa = q.to_f64().unwrap_or(0.0);
    let exp = (-k).clamp(-2200, 2200) as i32;
    // split the scaling so that neither factor overflows prematurely
    mantissa * 2f64.powi(exp / 2) * 2f64.powi(exp - exp / 2)
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Shorthand for building a rational from a numerator and denominator.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"num/den"` or `"num"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => text.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats a rational as `"num/den"` (or `"num"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Error-free transformations used by compensated evaluation.
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_normalization_is_coprime_and_sign_fixed() {
        let mut v = vec![rat(-2, 3), rat(4, 9), int(0)];
        Rational::normalize_projective(&mut v);
        assert_eq!(v, vec![int(3), int(-2), int(0)]);
    }

    #[test]
    fn sqrt_in_field_detects_squares() {
        assert_eq!(rat(9, 4).sqrt_in_field(), Some(rat(3, 2)));
        assert_eq!(rat(2, 1).sqrt_in_field(), None);
        assert_eq!(rat(-1, 1).sqrt_in_field(), None);
    }

    #[test]
    fn huge_rationals_convert_without_overflow() {
        let big = Rational::new(BigInt::from(3) << 3000usize, BigInt::from(1) << 3000usize);
        assert!((rational_to_f64(&big) - 3.0).abs() < 1e-12);
        let tiny = Rational::new(BigInt::from(1), BigInt::from(7) << 1100usize);
        assert_eq!(rational_to_f64(&tiny), 0.0);
    }

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse_rational(" -12/8 ").unwrap();
        assert_eq!(r, rat(-3, 2));
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(parse_rational("5"), Some(int(5)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(10_000))]

        #[test]
        fn sums_match_cross_multiplication(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let s = rat(a, b) + rat(c, d);
            proptest::prop_assert_eq!(s.clone() * int(b * d), int(a * d + c * b));
            proptest::prop_assert!(num_integer::Integer::gcd(s.numer(), s.denom()) == 1.into());
        }
    }
}
