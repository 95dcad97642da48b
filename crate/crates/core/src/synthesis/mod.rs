//! Approximate synthesis of single-qubit unitaries over Clifford+T.

mod axial;
mod mitm;
mod quat;

pub use axial::{axial_decompose, synth_via_axial, AxialSplit};
pub use mitm::{default_depth, search as mitm_search, table_word, verified_distance, MitmHit, MAX_TABLE_DEPTH};
pub use quat::Quat;

use crate::channels::{check_unitary, rz, Mat2, C64};
use crate::cliffordt::{eval_exact, GateWord};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Smallest accuracy the search backend is sized for.
pub const EPS_FLOOR: f64 = 5e-4;
pub const EPS_CEIL: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("target is not unitary (max |U†U − I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("no word with T-count ≤ {budget} reaches ε = {eps:e}")]
    BudgetExceeded { eps: f64, budget: usize },
    #[error("ε = {eps:e} outside the supported range [{EPS_FLOOR:e}, {EPS_CEIL}]")]
    EpsilonOutOfRange { eps: f64 },
    #[error("achieved distance {achieved:e} exceeds ε = {eps:e}")]
    ContractViolation { achieved: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthMode {
    Su2Mitm,
    RzMitm,
}

#[derive(Clone, Debug)]
pub struct SynthRequest {
    pub target: Mat2,
    pub epsilon: f64,
    pub budget: usize,
    pub mode: SynthMode,
}

impl SynthRequest {
    pub fn new(target: Mat2, epsilon: f64) -> Self {
        SynthRequest { target, epsilon, budget: default_budget(epsilon), mode: SynthMode::Su2Mitm }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthResult {
    pub word: GateWord,
    pub achieved: f64,
    pub tcount: usize,
}

/// ⌈3·log₂(1/ε)⌉ + 12.
pub fn default_budget(eps: f64) -> usize {
    (3.0 * (1.0 / eps).log2()).ceil().max(0.0) as usize + 12
}

/// Pluggable synthesizer. Implementations return any word within `eps` of
/// `target` (as channels); contract checking happens in [`synthesize_with`].
pub trait SynthBackend: Send + Sync {
    fn name(&self) -> &str;
    fn synthesize(&self, target: &Mat2, eps: f64, budget: usize) -> Result<GateWord, SynthError>;
}

/// Exhaustive meet-in-the-middle search; returns a minimum-T-count word.
#[derive(Clone, Copy, Debug, Default)]
pub struct MitmBackend {
    /// Table depth override; `None` picks it from ε.
    pub depth: Option<usize>,
}

impl SynthBackend for MitmBackend {
    fn name(&self) -> &str {
        "mitm"
    }

    fn synthesize(&self, target: &Mat2, eps: f64, budget: usize) -> Result<GateWord, SynthError> {
        let q = Quat::from_unitary(target);
        mitm::search(&q, eps, budget, self.depth).map(|h| h.word)
    }
}

type MemoKey = ([u64; 8], u64, usize, String);

fn memo() -> &'static Mutex<FxHashMap<MemoKey, SynthResult>> {
    static M: OnceLock<Mutex<FxHashMap<MemoKey, SynthResult>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(FxHashMap::default()))
}

fn memo_key(target: &Mat2, eps: f64, budget: usize, backend: &str) -> MemoKey {
    let mut bits = [0u64; 8];
    for (k, z) in target.iter().enumerate() {
        bits[2 * k] = z.re.to_bits();
        bits[2 * k + 1] = z.im.to_bits();
    }
    (bits, eps.to_bits(), budget, backend.to_string())
}

/// Picks the ω power that brings `word` closest to `target` as a matrix.
fn align_phase(word: GateWord, target: &Mat2) -> GateWord {
    let u = eval_exact(&word.dephased()).to_float();
    let ov: C64 = (target.adjoint() * u).trace();
    let e = (-ov.arg() / std::f64::consts::FRAC_PI_4).round() as i64;
    word.dephased().with_phase(e)
}

/// Runs a backend, checks the accuracy contract against the exact word
/// evaluation, and memoizes the result.
pub fn synthesize_with(backend: &dyn SynthBackend, req: &SynthRequest) -> Result<SynthResult, SynthError> {
    check_unitary(&req.target, 1e-10).map_err(|_| SynthError::NotUnitary {
        deviation: crate::channels::max_abs_c((req.target.adjoint() * req.target - Mat2::identity()).iter()),
    })?;
    if !(EPS_FLOOR..=EPS_CEIL).contains(&req.epsilon) {
        return Err(SynthError::EpsilonOutOfRange { eps: req.epsilon });
    }
    let key = memo_key(&req.target, req.epsilon, req.budget, backend.name());
    if let Some(r) = memo().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(r.clone());
    }
    let word = align_phase(backend.synthesize(&req.target, req.epsilon, req.budget)?, &req.target);
    let achieved = verified_distance(&word, &Quat::from_unitary(&req.target));
    if achieved > req.epsilon {
        return Err(SynthError::ContractViolation { achieved, eps: req.epsilon });
    }
    let res = SynthResult { tcount: word.tcount(), word, achieved };
    memo().lock().unwrap_or_else(|e| e.into_inner()).insert(key, res.clone());
    Ok(res)
}

fn default_backend() -> Arc<dyn SynthBackend> {
    static B: OnceLock<Arc<dyn SynthBackend>> = OnceLock::new();
    B.get_or_init(|| Arc::new(MitmBackend::default())).clone()
}

pub fn synth_su2(req: &SynthRequest) -> Result<SynthResult, SynthError> {
    synthesize_with(default_backend().as_ref(), req)
}

pub fn synth_rz(theta: f64, eps: f64) -> Result<SynthResult, SynthError> {
    synth_rz_with(default_backend().as_ref(), theta, eps)
}

pub fn synth_rz_with(backend: &dyn SynthBackend, theta: f64, eps: f64) -> Result<SynthResult, SynthError> {
    let req = SynthRequest { mode: SynthMode::RzMitm, ..SynthRequest::new(rz(theta), eps) };
    synthesize_with(backend, &req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::unitary_diamond;
    use crate::cliffordt::{eval_float, gate_float};

    #[test]
    fn gate_set_members_cost_nothing() {
        let h = synth_su2(&SynthRequest::new(gate_float('H'), 1e-3)).unwrap();
        assert_eq!(h.word.word_string(), "H");
        assert_eq!(h.tcount, 0);
        assert!(h.achieved < 1e-15);
        let t = synth_su2(&SynthRequest::new(gate_float('T'), 0.1)).unwrap();
        assert_eq!(t.tcount, 1);
        assert!(t.achieved < 1e-15);
    }

    #[test]
    fn rz_special_angles() {
        let r = synth_rz(std::f64::consts::FRAC_PI_4, 1e-2).unwrap();
        assert_eq!(r.word.word_string(), "T");
        assert!(synth_rz(0.0, 1e-2).unwrap().word.dephased() == GateWord::identity());
    }

    #[test]
    fn rz_pi_over_128_meets_contract() {
        let theta = std::f64::consts::PI / 128.0;
        let r = synth_rz(theta, 1e-2).unwrap();
        assert!(r.achieved <= 1e-2);
        assert!(r.tcount <= default_budget(1e-2));
        let d = unitary_diamond(&rz(theta), &eval_float(&r.word)).unwrap();
        assert!((d - r.achieved).abs() < 1e-12);
    }

    #[test]
    fn rz_pi_over_32_at_3e_3() {
        let r = synth_rz(std::f64::consts::PI / 32.0, 3e-3).unwrap();
        assert!(r.achieved <= 3e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad = Mat2::identity() * C64::new(2.0, 0.0);
        assert!(matches!(synth_su2(&SynthRequest::new(bad, 1e-2)), Err(SynthError::NotUnitary { .. })));
        assert!(matches!(synth_rz(0.3, 1e-5), Err(SynthError::EpsilonOutOfRange { .. })));
    }

    #[test]
    fn budget_exceeded_when_budget_too_small() {
        let req = SynthRequest { budget: 2, ..SynthRequest::new(rz(0.123), 1e-3) };
        assert!(matches!(synth_su2(&req), Err(SynthError::BudgetExceeded { .. })));
    }
}
