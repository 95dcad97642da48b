use super::{ChannelError, Mat2, C64};
use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Real unit 4-vector with (1/2)[J(U)]_MB = r rᵀ.
///
/// Slots are ordered (I, Z, X, Y). Sign is fixed so that the first nonzero
/// component is positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicVec {
    pub r: [f64; 4],
}

impl MagicVec {
    pub fn identity() -> Self {
        MagicVec { r: [1.0, 0.0, 0.0, 0.0] }
    }

    /// Normalizes and applies the sign convention.
    pub fn from_raw(mut r: [f64; 4]) -> Self {
        let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        r.iter_mut().for_each(|x| *x /= n);
        if let Some(first) = r.iter().find(|x| x.abs() > 1e-15) {
            if *first < 0.0 {
                r.iter_mut().for_each(|x| *x = -*x);
            }
        }
        MagicVec { r }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::from(self.r)
    }

    /// 1 − r₁² evaluated without cancellation.
    pub fn off_identity_weight(&self) -> f64 {
        self.r[1] * self.r[1] + self.r[2] * self.r[2] + self.r[3] * self.r[3]
    }
}

/// Magic basis Ψ₁..Ψ₄ in the computational basis |ab⟩ ↦ index 2a+b.
pub fn magic_basis() -> [Vector4<C64>; 4] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let is = C64::new(0.0, FRAC_1_SQRT_2);
    let z = C64::new(0.0, 0.0);
    [
        Vector4::new(s, z, z, s),
        Vector4::new(is, z, z, -is),
        Vector4::new(z, is, is, z),
        Vector4::new(z, s, -s, z),
    ]
}

/// (I⊗U)|Ω⟩ with |Ω⟩ = Σ|ii⟩.
pub fn choi_vector(u: &Mat2) -> Vector4<C64> {
    Vector4::new(u[(0, 0)], u[(1, 0)], u[(0, 1)], u[(1, 1)])
}

/// Unnormalized Choi matrix J(U) = (Id⊗U)(|Ω⟩⟨Ω|)(Id⊗U)†.
pub fn choi_of_unitary(u: &Mat2) -> Matrix4<C64> {
    let v = choi_vector(u);
    v * v.adjoint()
}

pub fn check_unitary(u: &Mat2, tol: f64) -> Result<(), ChannelError> {
    let dev = super::max_abs_c((u.adjoint() * u - Mat2::identity()).iter());
    if dev.is_finite() && dev <= tol {
        Ok(())
    } else {
        Err(ChannelError::NotUnitary { deviation: dev })
    }
}

pub fn magic_vec(u: &Mat2) -> Result<MagicVec, ChannelError> {
    check_unitary(u, 1e-10)?;
    let v = choi_vector(u);
    let z: Vec<C64> = magic_basis().iter().map(|psi| psi.dotc(&v) * FRAC_1_SQRT_2).collect();
    let lead = z.iter().copied().fold(C64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
    let phase = lead / lead.norm();
    let r: Vec<f64> = z.iter().map(|x| (x * phase.conj()).re).collect();
    Ok(MagicVec::from_raw([r[0], r[1], r[2], r[3]]))
}

/// Unitary whose channel has magic vector `r`: reshape of √2·Σ rᵢΨᵢ.
pub fn unitary_from_magic(r: &MagicVec) -> Mat2 {
    let basis = magic_basis();
    let mut v = Vector4::zeros();
    for (ri, psi) in r.r.iter().zip(basis.iter()) {
        v += psi * C64::new(ri * std::f64::consts::SQRT_2, 0.0);
    }
    Mat2::new(v[0], v[2], v[1], v[3])
}

/// d◇(U, V) = √(1 − |tr(U†V)|²/4).
///
/// Evaluated as the norm of the traceless part of W = U†V, which equals the
/// formula for unitaries and stays accurate when the distance is tiny.
pub fn unitary_diamond(u: &Mat2, v: &Mat2) -> Result<f64, ChannelError> {
    check_unitary(u, 1e-10)?;
    check_unitary(v, 1e-10)?;
    Ok(unitary_diamond_unchecked(u, v))
}

pub fn unitary_diamond_unchecked(u: &Mat2, v: &Mat2) -> f64 {
    let w = u.adjoint() * v;
    let diag = (w[(0, 0)] - w[(1, 1)]) * 0.5;
    (diag.norm_sqr() + 0.5 * (w[(0, 1)].norm_sqr() + w[(1, 0)].norm_sqr())).sqrt().min(1.0)
}

/// Real symmetric PSD 4×4 matrix Σⱼ pⱼ r⁽ʲ⁾r⁽ʲ⁾ᵀ with unit trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub m: [[f64; 4]; 4],
}

impl GramMatrix {
    pub fn from_mixture(p: &[f64], rs: &[MagicVec]) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (pj, r) in p.iter().zip(rs) {
            for (k, row) in m.iter_mut().enumerate() {
                for (l, x) in row.iter_mut().enumerate() {
                    *x += pj * r.r[k] * r.r[l];
                }
            }
        }
        GramMatrix { m }
    }

    pub fn rank_one(r: &MagicVec) -> Self {
        Self::from_mixture(&[1.0], std::slice::from_ref(r))
    }

    pub fn as_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.m[i][j])
    }

    /// Σ_{k≠k'} |M_kk'|.
    pub fn off_diagonal_mass(&self) -> f64 {
        let mut s = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                if k != l {
                    s += self.m[k][l].abs();
                }
            }
        }
        s
    }
}

/// (1/2)‖A‖₁ for a real symmetric matrix.
pub fn half_trace_norm_sym(a: &Matrix4<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    0.5 * SymmetricEigen::new(sym).eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}

/// (1/2)‖rrᵀ − M‖₁.
pub fn mixture_diamond(target: &MagicVec, m: &GramMatrix) -> f64 {
    let t = target.as_vector();
    half_trace_norm_sym(&(t * t.transpose() - m.as_matrix()))
}

/// Residual e₁e₁ᵀ − M for a mixture of relative magic vectors, with the (1,1)
/// entry formed from the off-identity weights so that small distances keep
/// full relative precision.
pub fn identity_residual(p: &[f64], rs: &[MagicVec]) -> Matrix4<f64> {
    let g = GramMatrix::from_mixture(p, rs);
    let mut d = -g.as_matrix();
    d[(0, 0)] = p.iter().zip(rs).map(|(pj, r)| pj * r.off_identity_weight()).sum::<f64>()
        + (1.0 - p.iter().sum::<f64>());
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pauli_1q, rz};

    #[test]
    fn identity_and_paulis_hit_single_slots() {
        assert_eq!(magic_vec(&Mat2::identity()).unwrap().r, [1.0, 0.0, 0.0, 0.0]);
        let slot = |u: &Mat2| {
            let r = magic_vec(u).unwrap().r;
            let nz: Vec<usize> = (0..4).filter(|i| r[*i].abs() > 1e-12).collect();
            assert_eq!(nz.len(), 1);
            assert!(r[nz[0]] > 0.0);
            nz[0]
        };
        assert_eq!(slot(&pauli_1q(3)), 1);
        assert_eq!(slot(&pauli_1q(1)), 2);
        assert_eq!(slot(&pauli_1q(2)), 3);
    }

    #[test]
    fn rz_sign_convention() {
        let th = 0.3;
        let r = magic_vec(&rz(th)).unwrap().r;
        assert!((r[0] - (th / 2.0).cos()).abs() < 1e-15);
        assert!((r[1] + (th / 2.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn rank_one_gram_reproduces_half_choi_in_magic_basis() {
        let u = rz(0.7) * crate::channels::rx(-1.1);
        let r = magic_vec(&u).unwrap().as_vector();
        let j = choi_of_unitary(&u);
        let basis = magic_basis();
        for a in 0..4 {
            for b in 0..4 {
                let jm = basis[a].dotc(&(j * basis[b])) * 0.5;
                assert!((jm.re - r[a] * r[b]).abs() < 1e-12 && jm.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_diagonal_mixture() {
        let a: f64 = 0.03;
        let m = GramMatrix { m: [[1.0 - a * a, 0.0, 0.0, 0.0], [0.0, a * a, 0.0, 0.0], [0.0; 4], [0.0; 4]] };
        assert!((mixture_diamond(&MagicVec::identity(), &m) - a * a).abs() < 1e-15);
    }

    #[test]
    fn diamond_of_orthogonal_channels() {
        let d = unitary_diamond(&Mat2::identity(), &pauli_1q(1)).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn not_unitary_is_rejected() {
        let m = Mat2::identity() * C64::new(1.1, 0.0);
        assert!(matches!(magic_vec(&m), Err(ChannelError::NotUnitary { .. })));
    }
}
