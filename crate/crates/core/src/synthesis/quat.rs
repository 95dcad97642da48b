use crate::channels::{Mat2, C64};

/// Unit quaternion (a, b, c, d) for U ∝ aI − i(bX + cY + dZ).
///
/// Matrix products map to Hamilton products with −iX, −iY, −iZ ↦ i, j, k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat(pub [f64; 4]);

impl Quat {
    pub const ONE: Quat = Quat([1.0, 0.0, 0.0, 0.0]);

    /// Phase-free quaternion of a 2×2 unitary (sign fixed by the largest component).
    pub fn from_unitary(u: &Mat2) -> Quat {
        let i = C64::new(0.0, 1.0);
        let raw = [
            (u[(0, 0)] + u[(1, 1)]) * 0.5,
            i * (u[(0, 1)] + u[(1, 0)]) * 0.5,
            (u[(1, 0)] - u[(0, 1)]) * 0.5,
            i * (u[(0, 0)] - u[(1, 1)]) * 0.5,
        ];
        let lead = raw.iter().copied().fold(C64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
        let ph = lead.conj() / lead.norm();
        let mut q = [0.0; 4];
        for (qi, z) in q.iter_mut().zip(raw) {
            *qi = (z * ph).re;
        }
        Quat(q).normalized()
    }

    pub fn to_unitary(&self) -> Mat2 {
        let [a, b, c, d] = self.0;
        Mat2::new(C64::new(a, -d), C64::new(-c, -b), C64::new(c, -b), C64::new(a, d))
    }

    pub fn normalized(self) -> Quat {
        let n = self.dot(&self).sqrt();
        Quat(self.0.map(|x| x / n))
    }

    pub fn dot(&self, o: &Quat) -> f64 {
        self.0.iter().zip(o.0).map(|(a, b)| a * b).sum()
    }

    pub fn mul(&self, o: &Quat) -> Quat {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        Quat([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }

    pub fn conj(&self) -> Quat {
        let [a, b, c, d] = self.0;
        Quat([a, -b, -c, -d])
    }

    pub fn neg(&self) -> Quat {
        Quat(self.0.map(|x| -x))
    }

    /// Representative with non-negative scalar part.
    pub fn canonical(self) -> Quat {
        if self.0[0] < 0.0 {
            self.neg()
        } else {
            self
        }
    }

    /// √(1 − (p·t)²), the diamond distance between the two unitary channels,
    /// evaluated as the wedge norm.
    pub fn dist(&self, o: &Quat) -> f64 {
        let p = self.0;
        let t = o.0;
        let mut s = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                let w = p[i] * t[j] - p[j] * t[i];
                s += w * w;
            }
        }
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pauli_1q, rx, rz, unitary_diamond};

    #[test]
    fn round_trip_and_product() {
        let u = rz(0.4) * rx(1.3);
        let v = rx(-0.2) * rz(2.2);
        let qu = Quat::from_unitary(&u);
        let qv = Quat::from_unitary(&v);
        assert!(unitary_diamond(&qu.to_unitary(), &u).unwrap() < 1e-14);
        let prod = qu.mul(&qv).to_unitary();
        assert!(unitary_diamond(&prod, &(u * v)).unwrap() < 1e-14);
    }

    #[test]
    fn pauli_axes() {
        let x = Quat::from_unitary(&pauli_1q(1));
        assert!((x.0[1].abs() - 1.0).abs() < 1e-15);
        let z = Quat::from_unitary(&pauli_1q(3));
        assert!((z.0[3].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dist_matches_channel_distance() {
        let u = rz(0.01) * rx(0.02);
        let d = Quat::ONE.dist(&Quat::from_unitary(&u));
        assert!((d - unitary_diamond(&Mat2::identity(), &u).unwrap()).abs() < 1e-15);
    }
}
