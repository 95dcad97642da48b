//! Exact arithmetic in Z[ω, 1/√2] with ω = exp(iπ/4).
//!
//! A value is `(a + bω + cω² + dω³) / √2^k`. Coefficients live in `i64` with
//! checked arithmetic and are promoted to `BigInt` on overflow, then demoted
//! again whenever they fit, so equal values always share one representation.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use std::fmt;
use std::hash::{Hash, Hasher};

trait Int: Clone {
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
    fn is_even(&self) -> bool;
    fn half(&self) -> Self;
}

impl Int for i64 {
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn is_even(&self) -> bool {
        self % 2 == 0
    }
    fn half(&self) -> Self {
        self / 2
    }
}

impl Int for BigInt {
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn is_even(&self) -> bool {
        Zero::is_zero(&(self % 2u32))
    }
    fn half(&self) -> Self {
        self / 2u32
    }
}

fn add4<T: Int>(x: &[T; 4], y: &[T; 4]) -> Option<[T; 4]> {
    Some([x[0].add(&y[0])?, x[1].add(&y[1])?, x[2].add(&y[2])?, x[3].add(&y[3])?])
}

fn neg4<T: Int>(x: &[T; 4]) -> Option<[T; 4]> {
    Some([x[0].neg()?, x[1].neg()?, x[2].neg()?, x[3].neg()?])
}

fn mul4<T: Int>(x: &[T; 4], y: &[T; 4]) -> Option<[T; 4]> {
    // ω⁴ = −1 folds the upper half of the convolution back with a sign.
    let mut out: [Option<T>; 4] = [None, None, None, None];
    for (m, slot) in out.iter_mut().enumerate() {
        let mut acc: Option<T> = None;
        for i in 0..4 {
            let j = (m + 4 - i) % 4;
            let term = x[i].mul(&y[j])?;
            let term = if i + j >= 4 { term.neg()? } else { term };
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        *slot = acc;
    }
    let [a, b, c, d] = out;
    Some([a?, b?, c?, d?])
}

/// Multiply by √2 = ω − ω³.
fn times_sqrt2<T: Int>(x: &[T; 4]) -> Option<[T; 4]> {
    Some([
        x[1].sub(&x[3])?,
        x[0].add(&x[2])?,
        x[1].add(&x[3])?,
        x[2].sub(&x[0])?,
    ])
}

fn divisible_by_sqrt2<T: Int>(x: &[T; 4]) -> bool {
    match (x[0].add(&x[2]), x[1].add(&x[3])) {
        (Some(ac), Some(bd)) => ac.is_even() && bd.is_even(),
        _ => false,
    }
}

fn div_sqrt2<T: Int>(x: &[T; 4]) -> Option<[T; 4]> {
    Some([
        x[1].sub(&x[3])?.half(),
        x[0].add(&x[2])?.half(),
        x[1].add(&x[3])?.half(),
        x[2].sub(&x[0])?.half(),
    ])
}

fn scale_sqrt2<T: Int>(x: &[T; 4], n: u32) -> Option<[T; 4]> {
    let mut y = x.clone();
    for _ in 0..n {
        y = times_sqrt2(&y)?;
    }
    Some(y)
}

#[derive(Clone, Debug)]
enum Coeffs {
    Small([i64; 4]),
    Big(Box<[BigInt; 4]>),
}

impl Coeffs {
    fn to_big(&self) -> [BigInt; 4] {
        match self {
            Coeffs::Small(s) => s.map(BigInt::from),
            Coeffs::Big(b) => (**b).clone(),
        }
    }
}

/// Element of Z[ω, 1/√2], kept in canonical form (minimal `k`).
#[derive(Clone)]
pub struct RingElem {
    c: Coeffs,
    k: u32,
}

impl RingElem {
    pub fn new(a: i64, b: i64, c: i64, d: i64, k: u32) -> Self {
        Self::from_small([a, b, c, d], k)
    }

    pub fn zero() -> Self {
        Self::new(0, 0, 0, 0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0, 0, 0, 0)
    }

    /// ω^n for any integer n.
    pub fn omega_pow(n: i64) -> Self {
        Self::one().mul_omega(n)
    }

    /// 1/√2.
    pub fn inv_sqrt2() -> Self {
        Self::new(1, 0, 0, 0, 1)
    }

    fn from_small(x: [i64; 4], k: u32) -> Self {
        let mut r = RingElem { c: Coeffs::Small(x), k };
        r.canonicalize();
        r
    }

    fn from_big(x: [BigInt; 4], k: u32) -> Self {
        let mut r = RingElem { c: Coeffs::Big(Box::new(x)), k };
        r.canonicalize();
        r
    }

    /// Denominator exponent k of the canonical form.
    pub fn denom_exp(&self) -> u32 {
        self.k
    }

    /// Coefficients (a, b, c, d) if they fit in machine integers.
    pub fn small_coeffs(&self) -> Option<[i64; 4]> {
        match &self.c {
            Coeffs::Small(s) => Some(*s),
            Coeffs::Big(_) => None,
        }
    }

    pub fn coeffs_big(&self) -> [BigInt; 4] {
        self.c.to_big()
    }

    pub fn is_big(&self) -> bool {
        matches!(self.c, Coeffs::Big(_))
    }

    pub fn is_zero(&self) -> bool {
        match &self.c {
            Coeffs::Small(s) => s.iter().all(|v| *v == 0),
            Coeffs::Big(b) => b.iter().all(Zero::is_zero),
        }
    }

    fn canonicalize(&mut self) {
        if self.is_zero() {
            self.c = Coeffs::Small([0; 4]);
            self.k = 0;
            return;
        }
        loop {
            if self.k == 0 {
                break;
            }
            let next = match &self.c {
                Coeffs::Small(s) if divisible_by_sqrt2(s) => div_sqrt2(s).map(Coeffs::Small),
                Coeffs::Big(b) if divisible_by_sqrt2(b.as_ref()) => {
                    div_sqrt2(b.as_ref()).map(|v| Coeffs::Big(Box::new(v)))
                }
                _ => None,
            };
            match next {
                Some(c) => {
                    self.c = c;
                    self.k -= 1;
                }
                None => break,
            }
        }
        if let Coeffs::Big(b) = &self.c {
            let small: Option<Vec<i64>> = b.iter().map(|v| v.to_i64()).collect();
            if let Some(s) = small {
                self.c = Coeffs::Small([s[0], s[1], s[2], s[3]]);
            }
        }
    }

    fn binary(
        &self,
        other: &Self,
        small: impl Fn(&[i64; 4], &[i64; 4]) -> Option<[i64; 4]>,
        big: impl Fn(&[BigInt; 4], &[BigInt; 4]) -> [BigInt; 4],
        k: u32,
    ) -> Self {
        if let (Coeffs::Small(x), Coeffs::Small(y)) = (&self.c, &other.c) {
            if let Some(z) = small(x, y) {
                return Self::from_small(z, k);
            }
        }
        Self::from_big(big(&self.c.to_big(), &other.c.to_big()), k)
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.k.max(other.k);
        let (da, db) = (k - self.k, k - other.k);
        self.binary(
            other,
            |x, y| add4(&scale_sqrt2(x, da)?, &scale_sqrt2(y, db)?),
            |x, y| {
                add4(
                    &scale_sqrt2(x, da).expect("bigint"),
                    &scale_sqrt2(y, db).expect("bigint"),
                )
                .expect("bigint")
            },
            k,
        )
    }

    pub fn neg(&self) -> Self {
        match &self.c {
            Coeffs::Small(s) => match neg4(s) {
                Some(v) => Self::from_small(v, self.k),
                None => Self::from_big(neg4(&self.c.to_big()).expect("bigint"), self.k),
            },
            Coeffs::Big(b) => Self::from_big(neg4(b.as_ref()).expect("bigint"), self.k),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.binary(
            other,
            mul4,
            |x, y| mul4(x, y).expect("bigint"),
            self.k + other.k,
        )
    }

    /// Multiply by ω^n.
    pub fn mul_omega(&self, n: i64) -> Self {
        let n = n.rem_euclid(8) as usize;
        let rot = |x: &[BigInt; 4]| -> [BigInt; 4] {
            let mut y = x.clone();
            for _ in 0..n {
                y = [-y[3].clone(), y[0].clone(), y[1].clone(), y[2].clone()];
            }
            y
        };
        match &self.c {
            Coeffs::Small(s) => {
                let mut y = *s;
                for _ in 0..n {
                    match y[3].checked_neg() {
                        Some(d) => y = [d, y[0], y[1], y[2]],
                        None => return Self::from_big(rot(&self.c.to_big()), self.k),
                    }
                }
                Self::from_small(y, self.k)
            }
            Coeffs::Big(b) => Self::from_big(rot(b.as_ref()), self.k),
        }
    }

    /// Complex conjugate (ω ↦ ω⁷).
    pub fn conj(&self) -> Self {
        match &self.c {
            Coeffs::Small(s) => match (s[3].checked_neg(), s[2].checked_neg(), s[1].checked_neg()) {
                (Some(d), Some(c), Some(b)) => Self::from_small([s[0], d, c, b], self.k),
                _ => {
                    let x = self.c.to_big();
                    Self::from_big([x[0].clone(), -&x[3], -&x[2], -&x[1]], self.k)
                }
            },
            Coeffs::Big(x) => Self::from_big([x[0].clone(), -&x[3], -&x[2], -&x[1]], self.k),
        }
    }

    /// Nearest double-precision complex value.
    ///
    /// Re = a + (b−d)/√2 and Im = c + (b+d)/√2 are formed from exact integer
    /// differences before scaling, which keeps entries of large-k unitaries
    /// accurate to a few ulps.
    pub fn to_complex(&self) -> Complex64 {
        let (a, bmd, c, bpd) = match &self.c {
            Coeffs::Small(s) => (
                s[0] as f64,
                (s[1] as i128 - s[3] as i128) as f64,
                s[2] as f64,
                (s[1] as i128 + s[3] as i128) as f64,
            ),
            Coeffs::Big(b) => {
                let f = |v: &BigInt| v.to_f64().unwrap_or(f64::NAN);
                (f(&b[0]), f(&(&b[1] - &b[3])), f(&b[2]), f(&(&b[1] + &b[3])))
            }
        };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let scale = pow_inv_sqrt2(self.k);
        Complex64::new((a + bmd * s) * scale, (c + bpd * s) * scale)
    }
}

fn pow_inv_sqrt2(k: u32) -> f64 {
    let half = 0.5f64.powi((k / 2) as i32);
    if k % 2 == 1 {
        half * std::f64::consts::FRAC_1_SQRT_2
    } else {
        half
    }
}

impl PartialEq for RingElem {
    fn eq(&self, other: &Self) -> bool {
        if self.k != other.k {
            return false;
        }
        match (&self.c, &other.c) {
            (Coeffs::Small(x), Coeffs::Small(y)) => x == y,
            (Coeffs::Big(x), Coeffs::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for RingElem {}

impl Hash for RingElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        match &self.c {
            Coeffs::Small(s) => {
                0u8.hash(state);
                s.hash(state);
            }
            Coeffs::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl fmt::Debug for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.c.to_big();
        write!(f, "({} + {}ω + {}ω² + {}ω³)/√2^{}", c[0], c[1], c[2], c[3], self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn sqrt2_reduces_to_integer() {
        // (ω − ω³)/√2 = 1
        let x = RingElem::new(0, 1, 0, -1, 1);
        assert_eq!(x, RingElem::one());
        assert_eq!(x.denom_exp(), 0);
    }

    #[test]
    fn omega_powers_cycle() {
        let w = RingElem::omega_pow(1);
        let mut acc = RingElem::one();
        for _ in 0..8 {
            acc = acc.mul(&w);
        }
        assert_eq!(acc, RingElem::one());
        assert_eq!(RingElem::omega_pow(4), RingElem::one().neg());
    }

    #[test]
    fn float_image_matches_definition() {
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let x = RingElem::new(3, -2, 5, 7, 3);
        let expect = (Complex64::new(3.0, 0.0) - 2.0 * w + 5.0 * w * w + 7.0 * w * w * w)
            / 2f64.sqrt().powi(3);
        assert!(close(x.to_complex(), expect));
    }

    #[test]
    fn addition_aligns_denominators() {
        let h = RingElem::inv_sqrt2();
        let two_h_sq = h.mul(&h).add(&h.mul(&h));
        assert_eq!(two_h_sq, RingElem::one());
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = RingElem::new(i64::MAX / 2, 0, 0, 0, 0);
        let sq = big.mul(&big);
        assert!(sq.is_big());
        let back = sq.add(&sq.neg()).add(&RingElem::one());
        assert!(!back.is_big());
        assert_eq!(back, RingElem::one());
    }

    #[test]
    fn conj_is_inverse_on_unit_phases() {
        for n in 0..8 {
            let w = RingElem::omega_pow(n);
            assert_eq!(w.mul(&w.conj()), RingElem::one());
        }
    }
}
