use super::ring::RingElem;
use nalgebra::Matrix2;
use num_complex::Complex64;

/// 2×2 matrix over Z[ω, 1/√2]. Global phase is carried by the entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactUnitary {
    pub e: [[RingElem; 2]; 2],
}

impl ExactUnitary {
    pub fn from_entries(a: RingElem, b: RingElem, c: RingElem, d: RingElem) -> Self {
        ExactUnitary { e: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        Self::from_entries(RingElem::one(), RingElem::zero(), RingElem::zero(), RingElem::one())
    }

    pub fn h() -> Self {
        let s = RingElem::inv_sqrt2();
        Self::from_entries(s.clone(), s.clone(), s.clone(), s.neg())
    }

    pub fn s() -> Self {
        Self::from_entries(RingElem::one(), RingElem::zero(), RingElem::zero(), RingElem::omega_pow(2))
    }

    pub fn t() -> Self {
        Self::from_entries(RingElem::one(), RingElem::zero(), RingElem::zero(), RingElem::omega_pow(1))
    }

    pub fn x() -> Self {
        Self::from_entries(RingElem::zero(), RingElem::one(), RingElem::one(), RingElem::zero())
    }

    pub fn y() -> Self {
        let i = RingElem::omega_pow(2);
        Self::from_entries(RingElem::zero(), i.neg(), i, RingElem::zero())
    }

    pub fn z() -> Self {
        Self::from_entries(RingElem::one(), RingElem::zero(), RingElem::zero(), RingElem::one().neg())
    }

    /// ω·I.
    pub fn omega() -> Self {
        let w = RingElem::omega_pow(1);
        Self::from_entries(w.clone(), RingElem::zero(), RingElem::zero(), w)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let m = |i: usize, j: usize| self.e[i][0].mul(&o.e[0][j]).add(&self.e[i][1].mul(&o.e[1][j]));
        Self::from_entries(m(0, 0), m(0, 1), m(1, 0), m(1, 1))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_entries(
            self.e[0][0].conj(),
            self.e[1][0].conj(),
            self.e[0][1].conj(),
            self.e[1][1].conj(),
        )
    }

    pub fn mul_omega(&self, n: i64) -> Self {
        let f = |x: &RingElem| x.mul_omega(n);
        Self::from_entries(f(&self.e[0][0]), f(&self.e[0][1]), f(&self.e[1][0]), f(&self.e[1][1]))
    }

    pub fn det(&self) -> RingElem {
        self.e[0][0].mul(&self.e[1][1]).sub(&self.e[0][1].mul(&self.e[1][0]))
    }

    /// U†U = I, checked in the ring.
    pub fn is_unitary(&self) -> bool {
        self.adjoint().mul(self) == Self::identity()
    }

    /// Largest denominator exponent over the entries.
    pub fn max_denom_exp(&self) -> u32 {
        self.e.iter().flatten().map(|x| x.denom_exp()).max().unwrap_or(0)
    }

    pub fn to_float(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            self.e[0][0].to_complex(),
            self.e[0][1].to_complex(),
            self.e[1][0].to_complex(),
            self.e[1][1].to_complex(),
        )
    }

    /// Zero off-diagonal or zero diagonal: the Cliffords that fix Z up to sign.
    pub fn is_monomial(&self) -> bool {
        (self.e[0][1].is_zero() && self.e[1][0].is_zero())
            || (self.e[0][0].is_zero() && self.e[1][1].is_zero())
    }
}
