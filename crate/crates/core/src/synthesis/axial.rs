use super::{synth_rz_with, verified_distance, Quat, SynthBackend, SynthError, SynthResult};
use crate::channels::{check_unitary, Mat2};
use crate::cliffordt::{concat, ma_normalize, GateWord};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn wrap(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Angles (θ₁, θ₂, θ₃) with U ≃ Rz(θ₁)·Rx(θ₂)·Rz(θ₃), θ₂ ∈ [0, π].
///
/// When θ₂ is 0 or π the outer angles are not unique; θ₃ is then set to 0.
pub fn axial_decompose(u: &Mat2) -> (f64, f64, f64) {
    let [a, b, c, d] = Quat::from_unitary(u).0;
    let cz = a.hypot(d);
    let sx = b.hypot(c);
    let theta2 = 2.0 * sx.atan2(cz);
    if sx < 1e-15 {
        return (wrap(2.0 * d.atan2(a)), 0.0, 0.0);
    }
    if cz < 1e-15 {
        return (wrap(2.0 * c.atan2(b)), theta2, 0.0);
    }
    let sigma = d.atan2(a);
    let delta = c.atan2(b);
    (wrap(sigma + delta), theta2, wrap(sigma - delta))
}

/// Share of ε given to each of the three rotations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxialSplit(pub [f64; 3]);

impl Default for AxialSplit {
    fn default() -> Self {
        AxialSplit([1.0 / 3.0; 3])
    }
}

/// Synthesizes the three axial rotations separately (the middle one as
/// H·Rz·H) and concatenates them.
pub fn synth_via_axial(
    backend: &dyn SynthBackend,
    u: &Mat2,
    eps: f64,
    split: AxialSplit,
) -> Result<SynthResult, SynthError> {
    check_unitary(u, 1e-10).map_err(|_| SynthError::NotUnitary { deviation: f64::NAN })?;
    let (t1, t2, t3) = axial_decompose(u);
    let h = ma_normalize("H").expect("H parses");
    let mut word = GateWord::identity();
    for (k, theta) in [t1, t2, t3].into_iter().enumerate() {
        if theta == 0.0 {
            continue;
        }
        let part = synth_rz_with(backend, theta, eps * split.0[k])?.word;
        word = if k == 1 { concat(&concat(&concat(&word, &h), &part), &h) } else { concat(&word, &part) };
    }
    let word = word.dephased();
    let achieved = verified_distance(&word, &Quat::from_unitary(u));
    if achieved > eps {
        return Err(SynthError::ContractViolation { achieved, eps });
    }
    Ok(SynthResult { tcount: word.tcount(), word, achieved })
}
