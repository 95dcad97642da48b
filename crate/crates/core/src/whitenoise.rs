//! Convergence of layered random circuits to white noise.
//!
//! Each layer is an n-qubit Haar unitary preceded by local noise: on every
//! qubit a depolarizing channel that contracts each Pauli by 1−p, followed by
//! a fixed coherent rotation at diamond distance `eps_coh` about a random axis.
//! The effective noise of L layers is the noisy composition followed by the
//! inverse of the ideal one.

use crate::channels::{ptm_of_kraus, ptm_of_unitary, haar_unitary, random_unit_vector3, ChannelError, Mat2, Ptm, C64};
use crate::shiftgen::shift_unitary;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_QUBITS: usize = 3;
pub const MAX_EPS_COH: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WhiteNoiseError {
    #[error("invalid noise spec: {0}")]
    InvalidSpec(String),
    #[error("damping factors need 0 < p < 1 (got {p})")]
    DegenerateP { p: f64 },
    #[error("bias bound needs 0 < s² ≤ u ≤ 1 (got u = {u}, s = {s})")]
    DomainError { u: f64, s: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseLayerSpec {
    pub n: usize,
    pub p_dep: f64,
    pub eps_coh: f64,
    #[serde(rename = "L")]
    pub layers: usize,
    pub seed: u64,
}

impl NoiseLayerSpec {
    pub fn validate(&self) -> Result<(), WhiteNoiseError> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(WhiteNoiseError::InvalidSpec(format!("n = {} outside 1..={MAX_QUBITS}", self.n)));
        }
        if !(0.0..1.0).contains(&self.p_dep) {
            return Err(WhiteNoiseError::InvalidSpec(format!("p_dep = {} outside [0, 1)", self.p_dep)));
        }
        if !(0.0..=MAX_EPS_COH).contains(&self.eps_coh) {
            return Err(WhiteNoiseError::InvalidSpec(format!("eps_coh = {} outside [0, {MAX_EPS_COH}]", self.eps_coh)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingReport {
    /// Descending; the identity direction is excluded.
    pub k: Vec<f64>,
    pub k_mean_emp: f64,
    pub k_mean_theory: f64,
    pub max_dev: f64,
}

impl DampingReport {
    pub fn k_max(&self) -> f64 {
        self.k.first().copied().unwrap_or(f64::NAN)
    }

    pub fn k_min(&self) -> f64 {
        self.k.last().copied().unwrap_or(f64::NAN)
    }
}

/// (3n/4)·4ⁿ/(4ⁿ−1).
pub fn k_mean_theory(n: usize) -> f64 {
    let d2 = 4f64.powi(n as i32);
    0.75 * n as f64 * d2 / (d2 - 1.0)
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn to_dense(u: &Mat2) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| u[(i, j)])
}

/// Coherent rotation on each qubit. Axes come from their own stream so that
/// changing `eps_coh` leaves the Haar layers untouched.
pub fn coherent_rotations(spec: &NoiseLayerSpec) -> Vec<Mat2> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    (0..spec.n).map(|_| shift_unitary(&random_unit_vector3(&mut rng), spec.eps_coh)).collect()
}

/// Kraus operators of the single-qubit depolarizing channel with Pauli
/// contraction 1−p, followed by `u`.
pub fn qubit_noise_kraus(p: f64, u: &Mat2) -> Vec<DMatrix<C64>> {
    let u = to_dense(u);
    let w = [1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p];
    (0..4)
        .filter(|&i| w[i] > 0.0)
        .map(|i| &u * to_dense(&crate::channels::pauli_1q(i)) * C64::new(w[i].sqrt(), 0.0))
        .collect()
}

/// Kraus operators of the full local noise, as tensor products over qubits.
pub fn local_noise_kraus(spec: &NoiseLayerSpec) -> Vec<DMatrix<C64>> {
    let rots = coherent_rotations(spec);
    let mut ks = vec![DMatrix::from_element(1, 1, C64::new(1.0, 0.0))];
    for r in &rots {
        let q = qubit_noise_kraus(spec.p_dep, r);
        ks = ks.iter().flat_map(|a| q.iter().map(move |b| a.kronecker(b))).collect();
    }
    ks
}

/// PTM of the local noise, built qubit by qubit.
pub fn local_noise_ptm(spec: &NoiseLayerSpec) -> Result<Ptm, WhiteNoiseError> {
    let mut g = DMatrix::from_element(1, 1, 1.0);
    for r in coherent_rotations(spec) {
        let q = ptm_of_kraus(&qubit_noise_kraus(spec.p_dep, &r))?;
        g = kron(&g, &q.gamma);
    }
    Ok(Ptm { n_qubits: spec.n, gamma: g })
}

/// Γ_noisy · Γ_idealᵀ for L Haar layers.
pub fn effective_noise_ptm(spec: &NoiseLayerSpec) -> Result<Ptm, WhiteNoiseError> {
    spec.validate()?;
    let noise = local_noise_ptm(spec)?;
    let dim = noise.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noisy = DMatrix::<f64>::identity(dim, dim);
    let mut ideal = DMatrix::<f64>::identity(dim, dim);
    for _ in 0..spec.layers {
        let u = ptm_of_unitary(&haar_unitary(1 << spec.n, &mut rng))?.gamma;
        noisy = &u * &noise.gamma * noisy;
        ideal = &u * ideal;
    }
    Ok(Ptm { n_qubits: spec.n, gamma: noisy * ideal.transpose() })
}

/// kᵢ = ln λᵢ / (L·ln(1−p)) from the singular values of the non-identity block.
pub fn damping_factors(gamma: &Ptm, p_dep: f64, layers: usize) -> Result<DampingReport, WhiteNoiseError> {
    if !(p_dep > 0.0 && p_dep < 1.0) || layers == 0 {
        return Err(WhiteNoiseError::DegenerateP { p: p_dep });
    }
    let dim = gamma.dim();
    let scale = layers as f64 * (1.0 - p_dep).ln();
    let block = gamma.gamma.view((1, 1), (dim - 1, dim - 1)).into_owned();
    let mut k: Vec<f64> = block.singular_values().iter().map(|l| l.ln() / scale).collect();
    k.sort_by(|a, b| b.total_cmp(a));
    let mean_contraction = block.trace() / (dim - 1) as f64;
    let k_mean_emp = mean_contraction.ln() / scale;
    let max_dev = k.iter().map(|x| (x - k_mean_emp).abs()).fold(0.0, f64::max);
    Ok(DampingReport { k, k_mean_emp, k_mean_theory: k_mean_theory(gamma.n_qubits), max_dev })
}

/// Unitarity-type constant u and average noise strength s of a Kraus set.
pub fn noise_metrics(kraus: &[DMatrix<C64>], n: usize) -> Result<(f64, f64), WhiteNoiseError> {
    let d = 1usize << n;
    let mut sum = DMatrix::<C64>::zeros(d, d);
    for k in kraus {
        if k.nrows() != d || k.ncols() != d {
            return Err(ChannelError::DimensionMismatch { expected: d, got: k.nrows() }.into());
        }
        sum += k.adjoint() * k;
    }
    let dev = crate::channels::max_abs_c((sum - DMatrix::identity(d, d)).iter());
    if dev > 1e-9 {
        return Err(ChannelError::NotCptp { deviation: dev }.into());
    }
    let norm = (d * d - 1) as f64;
    let mut uu = 0.0;
    for a in kraus {
        for b in kraus {
            uu += (a * b.adjoint()).trace().norm_sqr();
        }
    }
    let ss: f64 = kraus.iter().map(|a| a.trace().norm_sqr()).sum();
    Ok(((uu - 1.0) / norm, (ss - 1.0) / norm))
}

/// Rescaling factor R = (s/u)^L and the bias bound √(1 − (s²/u)^L).
pub fn bias_bound(u: f64, s: f64, layers: usize) -> Result<(f64, f64), WhiteNoiseError> {
    const TOL: f64 = 1e-12;
    if !(s > 0.0 && s * s <= u * (1.0 + TOL) && u <= 1.0 + TOL) {
        return Err(WhiteNoiseError::DomainError { u, s });
    }
    let l = layers as f64;
    let r = (l * (s / u).ln()).exp();
    let q = (l * (s * s / u).ln()).exp().min(1.0);
    Ok((r, (1.0 - q).max(0.0).sqrt()))
}

/// |R·tr[E′(ρ)O] − tr[ρO]| with ρ = |0…0⟩⟨0…0| and O = Z on qubit 0.
pub fn rescaled_bias(gamma: &Ptm, r: f64) -> f64 {
    let n = gamma.n_qubits;
    let dim = gamma.dim();
    // Paulis in {I, Z}ⁿ have tr[Pρ] = 1; all others vanish.
    let in_iz = |idx: usize| (0..n).all(|q| matches!((idx >> (2 * q)) & 3, 0 | 3));
    let z0 = 3usize << (2 * (n - 1));
    let val: f64 = (0..dim).filter(|&j| in_iz(j)).map(|j| gamma.gamma[(z0, j)]).sum();
    (r * val - 1.0).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoiseRow {
    pub seed: u64,
    #[serde(rename = "L")]
    pub layers: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub k_mean: f64,
    pub dev: f64,
}

pub fn run_instance(spec: &NoiseLayerSpec) -> Result<(DampingReport, WhiteNoiseRow), WhiteNoiseError> {
    let g = effective_noise_ptm(spec)?;
    let rep = damping_factors(&g, spec.p_dep, spec.layers)?;
    let row = WhiteNoiseRow {
        seed: spec.seed,
        layers: spec.layers,
        k_min: rep.k_min(),
        k_max: rep.k_max(),
        k_mean: rep.k_mean_emp,
        dev: rep.max_dev,
    };
    Ok((rep, row))
}

/// One row per seed, in seed order.
pub fn run_seeds(template: &NoiseLayerSpec, seeds: &[u64]) -> Result<Vec<WhiteNoiseRow>, WhiteNoiseError> {
    seeds
        .par_iter()
        .map(|&seed| run_instance(&NoiseLayerSpec { seed, ..template.clone() }).map(|(_, row)| row))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::rz;

    fn spec(n: usize, p: f64, eps: f64, l: usize, seed: u64) -> NoiseLayerSpec {
        NoiseLayerSpec { n, p_dep: p, eps_coh: eps, layers: l, seed }
    }

    #[test]
    fn noiseless_is_identity() {
        let g = effective_noise_ptm(&spec(2, 0.0, 0.0, 20, 3)).unwrap();
        assert!((g.gamma - DMatrix::identity(16, 16)).abs().max() < 1e-10);
    }

    #[test]
    fn local_depol_contracts_by_weight() {
        let p = 0.01;
        let g = local_noise_ptm(&spec(2, p, 0.0, 1, 0)).unwrap();
        for i in 0..16 {
            let w = (i & 3 != 0) as i32 + (i >> 2 != 0) as i32;
            for j in 0..16 {
                let want = if i == j { (1.0 - p).powi(w) } else { 0.0 };
                assert!((g.gamma[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_values_contract() {
        let g = effective_noise_ptm(&spec(2, 1e-3, 1e-2, 100, 5)).unwrap();
        let sv = g.gamma.singular_values();
        assert!(sv.iter().all(|&x| x > 0.0 && x <= 1.0 + 1e-12));
        // Trace preservation: first row is e₀.
        for j in 0..16 {
            assert!((g.gamma[(0, j)] - (j == 0) as u8 as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn theory_value_for_two_qubits() {
        assert!((k_mean_theory(2) - 1.6).abs() < 1e-15);
    }

    #[test]
    fn synthetic_damping_recovers_k() {
        let (p, l) = (1e-3, 50);
        let ks = [2.0, 1.5, 1.0];
        let mut g = DMatrix::identity(4, 4);
        for (i, k) in ks.iter().enumerate() {
            g[(i + 1, i + 1)] = (1.0 - p as f64).powf(k * l as f64);
        }
        let rep = damping_factors(&Ptm { n_qubits: 1, gamma: g }, p, l).unwrap();
        for (a, b) in rep.k.iter().zip([2.0, 1.5, 1.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(matches!(damping_factors(&Ptm::identity(1), 0.0, l), Err(WhiteNoiseError::DegenerateP { .. })));
    }

    #[test]
    fn metrics_closed_forms() {
        let (u, s) = noise_metrics(&qubit_noise_kraus(0.0, &Mat2::identity()), 1).unwrap();
        assert!((u - 1.0).abs() < 1e-14 && (s - 1.0).abs() < 1e-14);
        let p = 0.03;
        let (u, s) = noise_metrics(&qubit_noise_kraus(p, &Mat2::identity()), 1).unwrap();
        assert!((s - (1.0 - p)).abs() < 1e-14);
        assert!((u - (1.0 - p).powi(2)).abs() < 1e-14);
        let d: f64 = 0.2;
        let (u, s) = noise_metrics(&[to_dense(&rz(d))], 1).unwrap();
        assert!((u - 1.0).abs() < 1e-14);
        assert!((s - (4.0 * (d / 2.0).cos().powi(2) - 1.0) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn bias_bound_edges() {
        assert_eq!(bias_bound(1.0, 1.0, 100).unwrap(), (1.0, 0.0));
        let (p, l) = (1e-3, 300);
        let (r, b) = bias_bound((1.0 - p) * (1.0 - p), 1.0 - p, l).unwrap();
        assert!((r - (1.0 - p).powi(-(l as i32))).abs() < 1e-10 * r);
        assert!(b.abs() < 1e-6);
        assert!(matches!(bias_bound(0.5, 0.9, 1), Err(WhiteNoiseError::DomainError { .. })));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(effective_noise_ptm(&spec(4, 1e-3, 0.0, 1, 0)).is_err());
        assert!(effective_noise_ptm(&spec(1, 1.0, 0.0, 1, 0)).is_err());
        assert!(effective_noise_ptm(&spec(1, 0.0, 0.5, 1, 0)).is_err());
    }

    #[test]
    fn kraus_and_ptm_routes_agree() {
        let s = spec(2, 2e-3, 3e-2, 1, 9);
        let a = local_noise_ptm(&s).unwrap();
        let b = ptm_of_kraus(&local_noise_kraus(&s)).unwrap();
        assert!((a.gamma - b.gamma).abs().max() < 1e-13);
    }
}
