use super::{nonpauli_residual_ptm, pauli_1q, pauli_of_slot, ChannelError, GramMatrix, Ptm, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Process matrix E(ρ) = Σ_ab χ_ab P_a ρ P_b over slots (I, Z, X, Y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiMatrix {
    pub m: [[C64; 4]; 4],
}

impl ChiMatrix {
    pub fn diagonal(&self) -> [f64; 4] {
        [self.m[0][0].re, self.m[1][1].re, self.m[2][2].re, self.m[3][3].re]
    }
}

/// Diagonal of the χ matrix in (I, X, Y, Z) order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChiDiag {
    pub ii: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
}

impl ChiDiag {
    /// Reads the Pauli rates off a Gram matrix; χ_II is formed as 1 − p so
    /// small rates keep full precision.
    pub fn from_gram(g: &GramMatrix) -> Self {
        let (zz, xx, yy) = (g.m[1][1], g.m[2][2], g.m[3][3]);
        ChiDiag { ii: 1.0 - (xx + yy + zz), xx, yy, zz }
    }

    /// Total Pauli error rate p = χ_XX + χ_YY + χ_ZZ.
    pub fn rate(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    /// (q_x, q_y, q_z) = rates divided by p.
    pub fn ratios(&self) -> [f64; 3] {
        let p = self.rate();
        if p > 0.0 {
            [self.xx / p, self.yy / p, self.zz / p]
        } else {
            [0.0; 3]
        }
    }
}

/// A unitary with magic vector r expands as Σ_a φ_a r_a P_a with
/// φ = (1, i, i, −i), so χ_ab = φ_a φ_b* M_ab.
pub fn gram_to_chi(g: &GramMatrix) -> ChiMatrix {
    let i = C64::new(0.0, 1.0);
    let phase = [C64::new(1.0, 0.0), i, i, -i];
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            m[a][b] = phase[a] * phase[b].conj() * g.m[a][b];
        }
    }
    ChiMatrix { m }
}

pub fn ptm_from_chi(chi: &ChiMatrix) -> Ptm {
    let mut gamma = DMatrix::zeros(4, 4);
    for j in 0..4 {
        let pj = pauli_1q(j);
        let mut img = super::Mat2::zeros();
        for a in 0..4 {
            for b in 0..4 {
                if chi.m[a][b].norm() == 0.0 {
                    continue;
                }
                img += pauli_of_slot(a) * pj * pauli_of_slot(b) * chi.m[a][b];
            }
        }
        for i in 0..4 {
            gamma[(i, j)] = (pauli_1q(i) * img).trace().re / 2.0;
        }
    }
    Ptm { n_qubits: 1, gamma }
}

/// Residual of the channel with Gram matrix `g` after dividing out its Pauli
/// diagonal, see [`nonpauli_residual_ptm`].
pub fn nonpauli_residual(g: &GramMatrix) -> Result<f64, ChannelError> {
    nonpauli_residual_ptm(&ptm_from_chi(&gram_to_chi(g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{magic_vec, ptm_of_kraus, rx, rz, MagicVec};

    #[test]
    fn chi_route_matches_kraus_route() {
        let us = [rz(0.3) * rx(0.1), rx(-0.7), rz(1.2) * rx(0.4) * rz(-0.2)];
        let p = [0.5, 0.3, 0.2];
        let rs: Vec<MagicVec> = us.iter().map(|u| magic_vec(u).unwrap()).collect();
        let g = GramMatrix::from_mixture(&p, &rs);
        let via_chi = ptm_from_chi(&gram_to_chi(&g));
        let kraus: Vec<_> =
            us.iter().zip(&p).map(|(u, pj)| DMatrix::from_fn(2, 2, |a, b| u[(a, b)] * pj.sqrt())).collect();
        let via_kraus = ptm_of_kraus(&kraus).unwrap();
        assert!((via_chi.gamma - via_kraus.gamma).abs().max() < 1e-14);
    }

    #[test]
    fn small_rz_residual_is_half_tan() {
        let d: f64 = 1e-3;
        let g = GramMatrix::rank_one(&magic_vec(&rz(d)).unwrap());
        let r = nonpauli_residual(&g).unwrap();
        assert!((r - d.tan() / 2.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn diagonal_gram_has_no_residual() {
        let g = GramMatrix { m: [[0.9, 0.0, 0.0, 0.0], [0.0, 0.05, 0.0, 0.0], [0.0, 0.0, 0.05, 0.0], [0.0; 4]] };
        assert!(nonpauli_residual(&g).unwrap() < 1e-15);
    }
}
