//! Crafting Pauli-Z rotations with an ancilla measure-and-feedback channel.
//!
//! The data qubit is sandwiched between two controlled-Z gates with an
//! ancilla in |+⟩; the ancilla is then measured in the X basis and an X is
//! applied to the data on outcome −1. For a word U the resulting Kraus
//! operators are K₊ = (U + ZUZ)/2 and K₋ = X(U − ZUZ)/2, so any X or Y
//! component of U·Rz(θ)† is folded back into a Z rotation. The remnant PTM
//! has the shape
//!
//! ```text
//! 1 0    0    0
//! 0 1−μ  ν    0
//! 0 −ν   1−μ  0
//! 0 0    0    1
//! ```
//!
//! and mixing two words with opposite ν leaves a pure Z channel of rate μ̃/2.

use crate::channels::{ptm_of_kraus, rx, rz, ChannelError, ChiDiag, Mat2, Ptm, C64};
use crate::cliffordt::{eval_float, GateWord};
use crate::synthesis::{synth_su2, Quat, SynthError, SynthRequest};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest allowed deviation from the remnant template.
pub const TEMPLATE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CptpError {
    #[error("remnant PTM deviates from the feedback template by {deviation:e}")]
    TemplateViolation { deviation: f64 },
    #[error("pool of {pool} candidates lacks ν of both signs; enlarge the pool")]
    NoOppositeSigns { pool: usize },
    #[error("ν values {nu_plus:e} and {nu_minus:e} do not have opposite signs")]
    SameSign { nu_plus: f64, nu_minus: f64 },
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpCandidate {
    pub word: GateWord,
    pub mu: f64,
    pub nu: f64,
    pub tcount: usize,
    /// Rx angle of the pool target this word was synthesized for.
    pub alpha: f64,
    /// Offset added to θ in the pool target.
    pub theta_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CraftedPair {
    pub theta: f64,
    pub plus: CptpCandidate,
    pub minus: CptpCandidate,
    /// (p₊, p₋).
    pub weights: [f64; 2],
    pub mu_tilde: f64,
    pub p_z: f64,
}

impl CraftedPair {
    pub fn new(theta: f64, plus: CptpCandidate, minus: CptpCandidate) -> Result<Self, CptpError> {
        let weights = pair_weights(plus.nu, minus.nu)?;
        let mu_tilde = weights[0] * plus.mu + weights[1] * minus.mu;
        Ok(CraftedPair { theta, plus, minus, weights, mu_tilde, p_z: mu_tilde / 2.0 })
    }

    /// T-count averaged with the mixing weights.
    pub fn mean_tcount(&self) -> f64 {
        self.weights[0] * self.plus.tcount as f64 + self.weights[1] * self.minus.tcount as f64
    }
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn dyn2(m: &Mat2) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// Kraus operators of the feedback circuit acting on `u`, data qubit first.
pub fn feedback_kraus(u: &Mat2) -> [DMatrix<C64>; 2] {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let id2 = DMatrix::<C64>::identity(2, 2);
    let cz = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![one, one, one, -one]));
    let plus = DMatrix::from_column_slice(2, 1, &[h, h]);
    let prep = kron(&id2, &plus);
    let body = &cz * kron(&dyn2(u), &id2) * &cz * prep;
    let xd = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
    let bra = |s: f64| DMatrix::from_row_slice(1, 2, &[h, h * s]);
    let k_plus = kron(&id2, &bra(1.0)) * &body;
    let k_minus = &xd * kron(&id2, &bra(-1.0)) * &body;
    [k_plus, k_minus]
}

/// Largest deviation of a single-qubit PTM from the feedback template.
pub fn template_deviation(p: &Ptm) -> f64 {
    let g = &p.gamma;
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let fixed = match (i, j) {
                (0, 0) | (3, 3) => Some(1.0),
                (1, 1) | (1, 2) | (2, 1) | (2, 2) => None,
                _ => Some(0.0),
            };
            if let Some(v) = fixed {
                dev = dev.max((g[(i, j)] - v).abs());
            }
        }
    }
    dev.max((g[(1, 1)] - g[(2, 2)]).abs()).max((g[(1, 2)] + g[(2, 1)]).abs())
}

/// Remnant PTM of the feedback channel for `word`, composed with Rz(θ)⁻¹.
pub fn feedback_channel(word: &GateWord, theta: f64) -> Result<Ptm, CptpError> {
    feedback_channel_unitary(&eval_float(word), theta)
}

pub fn feedback_channel_unitary(u: &Mat2, theta: f64) -> Result<Ptm, CptpError> {
    let inv = dyn2(&rz(theta).adjoint());
    let kraus: Vec<DMatrix<C64>> = feedback_kraus(u).iter().map(|k| k * &inv).collect();
    let ptm = ptm_of_kraus(&kraus)?;
    let deviation = template_deviation(&ptm);
    if deviation > TEMPLATE_TOL {
        return Err(CptpError::TemplateViolation { deviation });
    }
    Ok(ptm)
}

/// (μ, ν) of U·Rz(θ)† = aI − i(bX + cY + dZ) in closed form: μ = 2(c² + d²),
/// ν = 2(bc − ad). Avoids reading μ off 1 − Γ_XX, which loses digits.
fn mu_nu_closed(u: &Mat2, theta: f64) -> (f64, f64) {
    let q = Quat::from_unitary(&(u * rz(theta).adjoint())).normalized();
    let [a, b, c, d] = q.0;
    (2.0 * (c * c + d * d), 2.0 * (b * c - a * d))
}

/// μ and ν of the feedback remnant, checked against its PTM.
pub fn mu_nu(word: &GateWord, theta: f64) -> Result<(f64, f64), CptpError> {
    mu_nu_unitary(&eval_float(word), theta)
}

pub fn mu_nu_unitary(u: &Mat2, theta: f64) -> Result<(f64, f64), CptpError> {
    let ptm = feedback_channel_unitary(u, theta)?;
    let (mu, nu) = mu_nu_closed(u, theta);
    let g = &ptm.gamma;
    let deviation = (1.0 - g[(1, 1)] - mu).abs().max((g[(1, 2)] - nu).abs());
    if deviation > TEMPLATE_TOL {
        return Err(CptpError::TemplateViolation { deviation });
    }
    Ok((mu, nu))
}

/// Convex weights (p₊, p₋) with p₊ν₊ + p₋ν₋ = 0.
pub fn pair_weights(nu_plus: f64, nu_minus: f64) -> Result<[f64; 2], CptpError> {
    if !(nu_plus > 0.0 && nu_minus < 0.0) {
        return Err(CptpError::SameSign { nu_plus, nu_minus });
    }
    let s = nu_plus.abs() + nu_minus.abs();
    Ok([nu_minus.abs() / s, nu_plus.abs() / s])
}

/// Pool geometry: `alpha_count` Rx angles over [0, 2π) times θ offsets given
/// in units of ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub alpha_count: usize,
    pub theta_offsets: Vec<f64>,
}

impl PoolSpec {
    pub fn new(alpha_count: usize) -> Self {
        PoolSpec { alpha_count, theta_offsets: vec![0.0, 0.5, -0.5] }
    }

    /// (α, θ offset) pairs, offset-major.
    pub fn targets(&self, eps: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.alpha_count * self.theta_offsets.len());
        for off in &self.theta_offsets {
            for k in 0..self.alpha_count {
                out.push((2.0 * std::f64::consts::PI * k as f64 / self.alpha_count as f64, off * eps));
            }
        }
        out
    }
}

/// Synthesizes Rx(α)·Rz(θ + δ) for every pool entry and evaluates (μ, ν).
pub fn build_pool(theta: f64, eps_base: f64, pool: &PoolSpec) -> Result<Vec<CptpCandidate>, CptpError> {
    pool.targets(eps_base)
        .into_par_iter()
        .map(|(alpha, off)| {
            let target = rx(alpha) * rz(theta + off);
            let res = synth_su2(&SynthRequest::new(target, eps_base))?;
            let (mu, nu) = mu_nu(&res.word, theta)?;
            Ok(CptpCandidate { tcount: res.tcount, word: res.word, mu, nu, alpha, theta_offset: off })
        })
        .collect()
}

/// Picks the smallest-μ word on each side of ν = 0, which minimizes
/// max(μ₊, μ₋) over opposite-sign pairs. Ties go to the lower T-count.
pub fn select_pair(theta: f64, pool: &[CptpCandidate]) -> Result<CraftedPair, CptpError> {
    let key = |c: &CptpCandidate| (c.mu, c.tcount);
    let best = |pos: bool| {
        pool.iter()
            .filter(|c| if pos { c.nu > 0.0 } else { c.nu < 0.0 })
            .min_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal))
    };
    match (best(true), best(false)) {
        (Some(p), Some(m)) => CraftedPair::new(theta, p.clone(), m.clone()),
        _ => Err(CptpError::NoOppositeSigns { pool: pool.len() }),
    }
}

/// Brute-force pair search with an α grid of `pool_budget` angles.
pub fn search_pair(theta: f64, eps_base: f64, pool_budget: usize) -> Result<CraftedPair, CptpError> {
    search_pair_with(theta, eps_base, &PoolSpec::new(pool_budget))
}

pub fn search_pair_with(theta: f64, eps_base: f64, pool: &PoolSpec) -> Result<CraftedPair, CptpError> {
    let cands = build_pool(theta, eps_base, pool)?;
    select_pair(theta, &cands)
}

/// Final remnant after mixing: a Z channel with rate μ̃/2.
pub fn mix_pair(pair: &CraftedPair) -> Result<ChiDiag, CptpError> {
    let w = pair_weights(pair.plus.nu, pair.minus.nu)?;
    let mu = w[0] * pair.plus.mu + w[1] * pair.minus.mu;
    Ok(ChiDiag { ii: 1.0 - mu / 2.0, xx: 0.0, yy: 0.0, zz: mu / 2.0 })
}

/// Weighted sum of the two audit PTMs.
pub fn mixed_ptm(pair: &CraftedPair) -> Result<Ptm, CptpError> {
    let a = feedback_channel(&pair.plus.word, pair.theta)?;
    let b = feedback_channel(&pair.minus.word, pair.theta)?;
    Ok(Ptm { n_qubits: 1, gamma: a.gamma * pair.weights[0] + b.gamma * pair.weights[1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pauli_1q, ry};

    /// Density-matrix simulation of the circuit on the Pauli basis.
    fn oracle_ptm(u: &Mat2, theta: f64) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(4, 4);
        let inv = rz(theta).adjoint();
        let x = pauli_1q(1);
        let z = pauli_1q(3);
        for j in 0..4 {
            let rho = inv * pauli_1q(j) * inv.adjoint();
            // Branches of the ancilla: |0⟩ sees U, |1⟩ sees ZUZ.
            let u0 = *u;
            let u1 = z * u * z;
            let mut out = Mat2::zeros();
            for s in [1.0, -1.0] {
                let k = (u0 + u1 * C64::new(s, 0.0)) * C64::new(0.5, 0.0);
                let k = if s < 0.0 { x * k } else { k };
                out += k * rho * k.adjoint();
            }
            for i in 0..4 {
                g[(i, j)] = (pauli_1q(i) * out).trace().re / 2.0;
            }
        }
        g
    }

    #[test]
    fn circuit_matches_oracle() {
        for (u, th) in [(rz(0.4) * rx(0.1) * ry(-0.2), 0.4), (rx(1.3) * rz(-0.7), -0.7), (ry(0.3), 0.0)] {
            let ptm = ptm_of_kraus(
                &feedback_kraus(&u).iter().map(|k| k * dyn2(&rz(th).adjoint())).collect::<Vec<_>>(),
            )
            .unwrap();
            assert!((ptm.gamma - oracle_ptm(&u, th)).abs().max() < 1e-14);
        }
    }

    #[test]
    fn over_rotation_gives_cos_and_sin() {
        let (th, d): (f64, f64) = (0.3, 0.02);
        let (mu, nu) = mu_nu_unitary(&rz(th + d), th).unwrap();
        assert!((mu - (1.0 - d.cos())).abs() < 1e-15);
        // Γ_XY of Rz(δ) is −sin δ under Γ_ij = Tr[P_i E(P_j)]/2.
        assert!((nu + d.sin()).abs() < 1e-15);
    }

    #[test]
    fn x_rotation_is_corrected() {
        let th = std::f64::consts::PI / 32.0;
        for alpha in [0.1, 1.0, 2.5, 4.0] {
            let (mu, nu) = mu_nu_unitary(&(rx(alpha) * rz(th)), th).unwrap();
            assert!(mu.abs() < 1e-15 && nu.abs() < 1e-15, "{alpha}: {mu} {nu}");
        }
    }

    #[test]
    fn identity_word_is_identity_channel() {
        let ptm = feedback_channel(&GateWord::identity(), 0.0).unwrap();
        assert!((ptm.gamma - DMatrix::identity(4, 4)).abs().max() < 1e-15);
    }

    #[test]
    fn template_holds_for_arbitrary_unitaries() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let u = crate::channels::haar_unitary_2(&mut rng);
            let ptm = feedback_channel_unitary(&u, 0.7).unwrap();
            assert!(template_deviation(&ptm) < 1e-14);
        }
    }

    fn cand(mu: f64, nu: f64) -> CptpCandidate {
        CptpCandidate { word: GateWord::identity(), mu, nu, tcount: 0, alpha: 0.0, theta_offset: 0.0 }
    }

    #[test]
    fn weights_cancel_nu() {
        let pair = CraftedPair::new(0.0, cand(1e-6, 1e-3), cand(4e-6, -3e-3)).unwrap();
        assert!((pair.weights[0] - 0.75).abs() < 1e-15);
        assert!((pair.mu_tilde - 1.75e-6).abs() < 1e-18);
        let s = pair.weights[0] * pair.plus.nu + pair.weights[1] * pair.minus.nu;
        assert!(s.abs() < 1e-18);
        assert!(matches!(pair_weights(1e-3, 2e-3), Err(CptpError::SameSign { .. })));
    }

    #[test]
    fn ideal_pool_pair() {
        let (th, d): (f64, f64) = (0.5, 0.01);
        let mk = |u: Mat2| {
            let (mu, nu) = mu_nu_unitary(&u, th).unwrap();
            cand(mu, nu)
        };
        let pool = vec![mk(rz(th + d)), mk(rz(th - d))];
        let pair = select_pair(th, &pool).unwrap();
        assert!((pair.weights[0] - 0.5).abs() < 1e-12);
        assert!((pair.mu_tilde - (1.0 - d.cos())).abs() < 1e-15);
        let chi = mix_pair(&pair).unwrap();
        assert!((chi.zz - (1.0 - d.cos()) / 2.0).abs() < 1e-15);
        assert!(select_pair(th, &[]).is_err());
    }

    #[test]
    fn mixed_ptm_has_no_rotation() {
        let th = std::f64::consts::PI / 32.0;
        let pair = search_pair(th, 1e-2, 16).unwrap();
        let g = mixed_ptm(&pair).unwrap().gamma;
        assert!(g[(1, 2)].abs() <= 1e-12);
        assert!((1.0 - g[(1, 1)] - pair.mu_tilde).abs() < 1e-12);
    }
}
