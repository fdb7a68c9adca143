//! Exact ground-field arithmetic.
//!
//! A [`Scalar`] is either an arbitrary-precision rational or an element of a
//! prime field `F_p`. Rationals embed into `F_p` on contact (numerator times
//! inverse denominator), so field-agnostic constants like `0`, `1` and signs
//! can be written as rationals and flow into a prime-field computation
//! without threading a field context through every call site. Mixing two
//! different prime moduli is a bug and panics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Choice of ground field for a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSpec {
    /// The rational numbers (default).
    Q,
    /// The prime field `F_p`.
    Fp(u64),
}

impl FieldSpec {
    /// Validates the spec; `Fp(p)` requires `p` prime.
    pub fn validate(self) -> Result<Self> {
        match self {
            FieldSpec::Q => Ok(self),
            FieldSpec::Fp(p) => {
                if is_prime_u64(p) {
                    Ok(self)
                } else {
                    Err(Error::Validation(format!("{p} is not prime")))
                }
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Q => write!(f, "q"),
            FieldSpec::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}

/// An exact field element.
#[derive(Debug, Clone)]
pub enum Scalar {
    Q(BigRational),
    Fp { v: u64, p: u64 },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Q(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Q(BigRational::one())
    }

    pub fn from_int(i: i64) -> Self {
        Scalar::Q(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(r: BigRational) -> Self {
        Scalar::Q(r)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Scalar {
        match self {
            Scalar::Q(r) => {
                assert!(!r.is_zero(), "inverse of zero");
                Scalar::Q(r.recip())
            }
            Scalar::Fp { v, p } => {
                assert!(*v != 0, "inverse of zero");
                Scalar::Fp {
                    v: pow_mod(*v, p - 2, *p),
                    p: *p,
                }
            }
        }
    }

    /// Maps the scalar into the given field. For `Fp(p)` this is reduction
    /// modulo `p`; it fails when `p` divides a denominator.
    pub fn to_field(&self, field: FieldSpec) -> Result<Scalar> {
        match (self, field) {
            (Scalar::Q(_), FieldSpec::Q) => Ok(self.clone()),
            (Scalar::Q(r), FieldSpec::Fp(p)) => {
                let num = bigint_mod_u64(r.numer(), p);
                let den = bigint_mod_u64(r.denom(), p);
                if den == 0 {
                    return Err(Error::Validation(format!(
                        "denominator of {r} vanishes modulo {p}"
                    )));
                }
                Ok(Scalar::Fp {
                    v: mul_mod(num, pow_mod(den, p - 2, p), p),
                    p,
                })
            }
            (Scalar::Fp { p, .. }, FieldSpec::Fp(q)) if *p == q => Ok(self.clone()),
            (Scalar::Fp { p, .. }, _) => Err(Error::Validation(format!(
                "cannot move an F_{p} element into {field}"
            ))),
        }
    }

    /// The rational value, if this scalar lives over `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Q(r) => Some(r),
            Scalar::Fp { .. } => None,
        }
    }

    fn promote_pair(a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        match (a, b) {
            (Scalar::Q(_), Scalar::Q(_)) => (a.clone(), b.clone()),
            (Scalar::Fp { p, .. }, _) => (a.clone(), b.coerce_to_p(*p)),
            (_, Scalar::Fp { p, .. }) => (a.coerce_to_p(*p), b.clone()),
        }
    }

    fn coerce_to_p(&self, p: u64) -> Scalar {
        match self.to_field(FieldSpec::Fp(p)) {
            Ok(s) => s,
            Err(e) => panic!("field mismatch in scalar arithmetic: {e}"),
        }
    }
}

fn bigint_mod_u64(x: &BigInt, p: u64) -> u64 {
    let m = x % BigInt::from(p);
    let m = if m.is_negative() { m + BigInt::from(p) } else { m };
    m.to_u64().expect("reduced residue fits in u64")
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Scalar::promote_pair(self, other);
        match (a, b) {
            (Scalar::Q(x), Scalar::Q(y)) => x == y,
            (Scalar::Fp { v: x, p }, Scalar::Fp { v: y, p: q }) => {
                assert_eq!(p, q, "comparing elements of different prime fields");
                x == y
            }
            _ => unreachable!(),
        }
    }
}

impl Eq for Scalar {}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let (a, b) = Scalar::promote_pair(self, rhs);
        match (a, b) {
            (Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x + y),
            (Scalar::Fp { v: x, p }, Scalar::Fp { v: y, p: q }) => {
                assert_eq!(p, q, "mixing elements of different prime fields");
                Scalar::Fp { v: add_mod(x, y, p), p }
            }
            _ => unreachable!(),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let (a, b) = Scalar::promote_pair(self, rhs);
        match (a, b) {
            (Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x - y),
            (Scalar::Fp { v: x, p }, Scalar::Fp { v: y, p: q }) => {
                assert_eq!(p, q, "mixing elements of different prime fields");
                Scalar::Fp { v: add_mod(x, p - y, p), p }
            }
            _ => unreachable!(),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let (a, b) = Scalar::promote_pair(self, rhs);
        match (a, b) {
            (Scalar::Q(x), Scalar::Q(y)) => Scalar::Q(x * y),
            (Scalar::Fp { v: x, p }, Scalar::Fp { v: y, p: q }) => {
                assert_eq!(p, q, "mixing elements of different prime fields");
                Scalar::Fp { v: mul_mod(x, y, p), p }
            }
            _ => unreachable!(),
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv()
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(r) => Scalar::Q(-r),
            Scalar::Fp { v, p } => Scalar::Fp {
                v: if *v == 0 { 0 } else { p - v },
                p: *p,
            },
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => write!(f, "{r}"),
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = (a as u128 + b as u128) % p as u128;
    s as u64
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u64 = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let a = Scalar::from_ratio(1, 3);
        let b = Scalar::from_ratio(1, 6);
        assert_eq!(&a + &b, Scalar::from_ratio(1, 2));
        assert_eq!(&a - &b, Scalar::from_ratio(1, 6));
        assert_eq!(&a * &b, Scalar::from_ratio(1, 18));
        assert_eq!(&a / &b, Scalar::from_int(2));
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = FieldSpec::Fp(7).validate().unwrap();
        let a = Scalar::from_int(3).to_field(f).unwrap();
        let b = Scalar::from_int(5).to_field(f).unwrap();
        assert_eq!(&a + &b, Scalar::from_int(1));
        assert_eq!(&a * &b, Scalar::from_int(1));
        assert_eq!(a.inv(), Scalar::from_int(5));
    }

    #[test]
    fn rationals_coerce_into_fp_on_contact() {
        let a = Scalar::from_int(2).to_field(FieldSpec::Fp(5)).unwrap();
        let half = Scalar::from_ratio(1, 2);
        // 1/2 = 3 in F_5, so 2 * 1/2 = 1.
        assert_eq!(&a * &half, Scalar::one());
    }

    #[test]
    fn fp_rejects_bad_denominator() {
        assert!(Scalar::from_ratio(1, 5).to_field(FieldSpec::Fp(5)).is_err());
    }

    #[test]
    fn primality() {
        assert!(FieldSpec::Fp(2).validate().is_ok());
        assert!(FieldSpec::Fp(101).validate().is_ok());
        assert!(FieldSpec::Fp(1).validate().is_err());
        assert!(FieldSpec::Fp(91).validate().is_err());
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(!is_prime_u64(u64::MAX));
    }
}
