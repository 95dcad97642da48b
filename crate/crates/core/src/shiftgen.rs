//! Shift unitaries at a fixed distance from the identity, and the candidate
//! sets obtained by synthesizing shifted targets.

use crate::channels::{magic_vec, random_unit_vector3, unitary_from_magic, Mat2, MagicVec};
use crate::cliffordt::{eval_float, GateWord};
use crate::synthesis::{synth_su2, synth_via_axial, AxialSplit, MitmBackend, SynthError, SynthRequest};
use nalgebra::{DMatrix, DVector, Vector3};
use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VecSet {
    Pauli7,
    Depol9,
    Sphere { count: usize, seed: u64 },
    Union(Vec<VecSet>),
}

impl VecSet {
    pub fn vectors(&self) -> Vec<[f64; 3]> {
        match self {
            VecSet::Pauli7 | VecSet::Depol9 => theorem_vectors(self),
            VecSet::Sphere { count, seed } => sphere_vectors(*count, *seed),
            VecSet::Union(parts) => parts.iter().flat_map(|p| p.vectors()).collect(),
        }
    }
}

/// Shift vector sets whose ideal shifted unitaries admit an off-diagonal-free
/// (Pauli7) or depolarizing (Depol9) mixture. Components are ordered (Z, X, Y).
pub fn theorem_vectors(kind: &VecSet) -> Vec<[f64; 3]> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    match kind {
        VecSet::Pauli7 => vec![
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [s2, -s2, 0.0],
            [-s2, 0.0, -s2],
            [0.0, s2, s2],
            [s3, s3, -s3],
        ],
        VecSet::Depol9 => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [-s2, 0.0, -s2],
            [0.0, s2, s2],
            [-s2, s2, 0.0],
            [s3, s3, -s3],
        ],
        _ => panic!("not a theorem vector set: {kind:?}"),
    }
}

fn min_angle(v: &[Vector3<f64>]) -> f64 {
    let mut best = std::f64::consts::PI;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.min(v[i].dot(&v[j]).clamp(-1.0, 1.0).acos());
        }
    }
    best
}

fn fibonacci(count: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Minimum pairwise angle of the Fibonacci lattice with `count` points.
pub fn fibonacci_min_angle(count: usize) -> f64 {
    min_angle(&fibonacci(count))
}

/// `count` unit vectors spread over the sphere: a randomly rotated Fibonacci
/// lattice refined by Coulomb repulsion. One point is returned as (0, 0, 1).
pub fn sphere_vectors(count: usize, seed: u64) -> Vec<[f64; 3]> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![[0.0, 0.0, 1.0]];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = Vector3::from(random_unit_vector3(&mut rng));
    let angle = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
    let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
    let mut pts: Vec<Vector3<f64>> = fibonacci(count).into_iter().map(|p| rot * p).collect();
    let mut best = pts.clone();
    let mut best_angle = min_angle(&pts);
    let mut step = 0.5 / count as f64;
    for _ in 0..2000 {
        let forces: Vec<Vector3<f64>> = (0..count)
            .map(|i| {
                let mut f = Vector3::zeros();
                for j in 0..count {
                    if i != j {
                        let d = pts[i] - pts[j];
                        let n = d.norm().max(1e-9);
                        f += d / (n * n * n);
                    }
                }
                f - pts[i] * pts[i].dot(&f)
            })
            .collect();
        for (p, f) in pts.iter_mut().zip(&forces) {
            *p = (*p + f * step).normalize();
        }
        let a = min_angle(&pts);
        if a > best_angle {
            best_angle = a;
            best = pts.clone();
        }
        step *= 0.998;
    }
    best.iter().map(|p| [p.x, p.y, p.z]).collect()
}

/// Unitary with magic vector (√(1−δ²), δ·v): its distance to the identity is δ.
pub fn shift_unitary(v: &[f64; 3], delta: f64) -> Mat2 {
    let c = (1.0 - delta * delta).sqrt();
    unitary_from_magic(&MagicVec::from_raw([c, delta * v[0], delta * v[1], delta * v[2]]))
}

/// Rows of the feasibility matrix for one magic vector: the six products
/// r_k r_l (k < l), optionally followed by r₂² − r₃² and r₂² − r₄².
fn constraint_column(r: &[f64; 4], depol: bool) -> Vec<f64> {
    let mut m = vec![r[0] * r[1], r[0] * r[2], r[0] * r[3], r[1] * r[2], r[1] * r[3], r[2] * r[3]];
    if depol {
        m.push(r[1] * r[1] - r[2] * r[2]);
        m.push(r[1] * r[1] - r[3] * r[3]);
    }
    m
}

/// Â⁻¹m̂ for the ideal shifted vectors at radius `s`: the weights expressing
/// the last vector's constraint column in terms of the others. All entries
/// negative means a valid mixture exists.
pub fn feasibility_certificate(kind: &VecSet, s: f64) -> Option<Vec<f64>> {
    let depol = matches!(kind, VecSet::Depol9);
    let vs = theorem_vectors(kind);
    let c = (1.0 - s * s).sqrt();
    let cols: Vec<Vec<f64>> =
        vs.iter().map(|v| constraint_column(&[c, s * v[0], s * v[1], s * v[2]], depol)).collect();
    let n = cols.len() - 1;
    let a = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    let m = DVector::from_vec(cols[n].clone());
    a.lu().solve(&m).map(|x| x.iter().copied().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub c: f64,
    pub eps: f64,
    pub bigr: usize,
    pub vecset: VecSet,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSynth {
    /// Direct search on the shifted SU(2) target.
    #[default]
    Direct,
    /// Three-rotation pipeline at the same total ε.
    Axial,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShiftError {
    #[error("invalid shift spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// One mixing candidate. `word` is `None` for ideal (unsynthesized) shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub word: Option<GateWord>,
    pub u_float: Mat2,
    pub r_rel: MagicVec,
    pub shift_vec: [f64; 3],
    pub rung: usize,
}

impl Candidate {
    pub fn tcount(&self) -> usize {
        self.word.as_ref().map_or(0, |w| w.tcount())
    }

    pub fn from_unitary(u: Mat2, target: &Mat2, word: Option<GateWord>, shift_vec: [f64; 3], rung: usize) -> Self {
        let r_rel = magic_vec(&(u * target.adjoint())).expect("product of unitaries");
        Candidate { word, u_float: u, r_rel, shift_vec, rung }
    }
}

#[derive(Serialize, Deserialize)]
struct CandidateJson {
    word: Option<GateWord>,
    shift_vec: [f64; 3],
    rung: usize,
    r_rel: MagicVec,
}

impl Serialize for Candidate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CandidateJson { word: self.word.clone(), shift_vec: self.shift_vec, rung: self.rung, r_rel: self.r_rel }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Candidate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = CandidateJson::deserialize(d)?;
        let u_float = match &j.word {
            Some(w) => eval_float(w),
            None => unitary_from_magic(&j.r_rel),
        };
        Ok(Candidate { word: j.word, u_float, r_rel: j.r_rel, shift_vec: j.shift_vec, rung: j.rung })
    }
}

pub type CandidateSet = Vec<Candidate>;

fn validate(spec: &ShiftSpec) -> Result<(), ShiftError> {
    if spec.c <= 1.0 || spec.bigr == 0 || spec.eps <= 0.0 {
        return Err(ShiftError::InvalidSpec(format!("need c > 1, R ≥ 1, ε > 0 (got {spec:?})")));
    }
    if spec.c * spec.eps >= 0.5 {
        return Err(ShiftError::InvalidSpec(format!("c·ε = {} must be below 1/2", spec.c * spec.eps)));
    }
    Ok(())
}

/// Shifted targets V·Û for rungs k = 1..R (radius k·c·ε/R) and each vector.
pub fn shifted_targets(target: &Mat2, spec: &ShiftSpec) -> Vec<(Mat2, [f64; 3], usize)> {
    let vs = spec.vecset.vectors();
    let mut out = Vec::with_capacity(vs.len() * spec.bigr);
    for k in 1..=spec.bigr {
        let delta = k as f64 * spec.c * spec.eps / spec.bigr as f64;
        for v in &vs {
            out.push((shift_unitary(v, delta) * target, *v, k));
        }
    }
    out
}

/// Ideal candidates: the shifted targets themselves, without synthesis error.
pub fn ideal_candidates(target: &Mat2, spec: &ShiftSpec) -> Result<CandidateSet, ShiftError> {
    validate(spec)?;
    Ok(shifted_targets(target, spec)
        .into_iter()
        .map(|(u, v, k)| Candidate::from_unitary(u, target, None, v, k))
        .collect())
}

/// Synthesizes every shifted target to accuracy ε. Ordering is rung-major,
/// vector index minor.
pub fn build_candidates(target: &Mat2, spec: &ShiftSpec, mode: ShiftSynth) -> Result<CandidateSet, ShiftError> {
    validate(spec)?;
    shifted_targets(target, spec)
        .into_par_iter()
        .map(|(shifted, v, k)| {
            let res = match mode {
                ShiftSynth::Direct => synth_su2(&SynthRequest::new(shifted, spec.eps))?,
                ShiftSynth::Axial => synth_via_axial(&MitmBackend::default(), &shifted, spec.eps, AxialSplit::default())?,
            };
            let u = eval_float(&res.word);
            Ok(Candidate::from_unitary(u, target, Some(res.word), v, k))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{rz, ry, unitary_diamond};

    #[test]
    fn theorem_sets_are_unit() {
        for kind in [VecSet::Pauli7, VecSet::Depol9] {
            for v in theorem_vectors(&kind) {
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                assert!((n - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(theorem_vectors(&VecSet::Depol9).len(), 9);
    }

    #[test]
    fn pauli7_certificate() {
        let s3 = 3f64.sqrt();
        let want = [-s3 / 3.0, -s3 / 3.0, -s3 / 3.0, -2.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0];
        for s in [1e-3, 1e-2, 0.3] {
            let got = feasibility_certificate(&VecSet::Pauli7, s).unwrap();
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-10, "{got:?}");
            }
        }
    }

    #[test]
    fn depol9_certificate_is_negative() {
        for s in [1e-3, 1e-2, 0.3] {
            let got = feasibility_certificate(&VecSet::Depol9, s).unwrap();
            assert_eq!(got.len(), 8);
            assert!(got.iter().all(|x| *x < 0.0), "{got:?}");
        }
    }

    #[test]
    fn sphere_small_counts() {
        assert_eq!(sphere_vectors(1, 0), vec![[0.0, 0.0, 1.0]]);
        let two = sphere_vectors(2, 4);
        for k in 0..3 {
            assert!((two[0][k] + two[1][k]).abs() < 1e-6);
        }
        let nine: Vec<Vector3<f64>> = sphere_vectors(9, 1).into_iter().map(Vector3::from).collect();
        assert!(min_angle(&nine) >= 40f64.to_radians());
    }

    #[test]
    fn sphere_beats_fibonacci_floor() {
        for s in [5, 8, 16, 30] {
            let pts: Vec<Vector3<f64>> = sphere_vectors(s, 9).into_iter().map(Vector3::from).collect();
            assert!(min_angle(&pts) >= 0.8 * fibonacci_min_angle(s));
        }
    }

    #[test]
    fn shift_distance_is_exact() {
        let v = [0.3, -0.4, (1.0f64 - 0.25).sqrt()];
        let mut d = 1e-6;
        while d < 0.4 {
            let u = shift_unitary(&v, d);
            assert!((unitary_diamond(&u, &Mat2::identity()).unwrap() - d).abs() < 1e-12);
            d *= 1.7;
        }
    }

    #[test]
    fn shift_axes() {
        let d: f64 = 0.1;
        // v along slot Z gives a Z rotation; the sign follows from Rz's magic vector.
        let u = shift_unitary(&[1.0, 0.0, 0.0], d);
        assert!(unitary_diamond(&u, &rz(-2.0 * d.asin())).unwrap() < 1e-14);
        let u = shift_unitary(&[0.0, 0.0, 1.0], d);
        assert!(unitary_diamond(&u, &ry(2.0 * d.asin())).unwrap() < 1e-14);
    }

    #[test]
    fn candidate_counts_and_distances() {
        let target = rz(0.37);
        let spec = ShiftSpec { c: 3.0, eps: 1e-2, bigr: 3, vecset: VecSet::Pauli7 };
        let cands = build_candidates(&target, &spec, ShiftSynth::Direct).unwrap();
        assert_eq!(cands.len(), 21);
        for c in &cands {
            let rad = c.rung as f64 * spec.c / spec.bigr as f64;
            let d = unitary_diamond(&target, &c.u_float).unwrap();
            assert!(d >= (rad - 1.0) * spec.eps - 1e-12 && d <= (rad + 1.0) * spec.eps + 1e-12);
            assert!((c.r_rel.off_identity_weight().sqrt() - d).abs() < 1e-12);
        }
        let one = ShiftSpec { bigr: 1, ..spec };
        assert_eq!(build_candidates(&target, &one, ShiftSynth::Direct).unwrap().len(), 7);
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = ShiftSpec { c: 60.0, eps: 1e-2, bigr: 1, vecset: VecSet::Pauli7 };
        assert!(matches!(ideal_candidates(&Mat2::identity(), &spec), Err(ShiftError::InvalidSpec(_))));
    }
}
