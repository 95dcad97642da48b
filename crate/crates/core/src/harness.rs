//! Experiment sweeps, overhead accounting and report emission.
//!
//! Each run expands a config into an ordered job list (grid point × instance),
//! evaluates jobs in parallel and returns rows in job order. Instance `i`
//! uses seed `base_seed + i` at every grid point, so grid points share targets.

use crate::channels::{haar_unitary_2, nonpauli_residual, rz, unitary_diamond, ChiDiag, Mat2};
use crate::cliffordt::eval_float;
use crate::cptpcraft::{search_pair_with, PoolSpec};
use crate::craftopt::{craft, uncrafted_mix, ConstraintFamily, ConstraintKind, CraftSolution, G2_REL};
use crate::shiftgen::{shifted_targets, Candidate, ShiftSpec, VecSet};
use crate::synthesis::{synth_rz, synth_su2, synth_via_axial, AxialSplit, MitmBackend, SynthRequest};
use crate::whitenoise::{run_instance, NoiseLayerSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

pub const SCHEMA_LINE: &str = "#schema=v1";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1Accuracy,
    Fig1Failrate,
    Fig2Residual,
    Fig3Ratios,
    Fig5Tradeoff,
    Whitenoise,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Fig1Accuracy => "fig1_accuracy",
            ExperimentKind::Fig1Failrate => "fig1_failrate",
            ExperimentKind::Fig2Residual => "fig2_residual",
            ExperimentKind::Fig3Ratios => "fig3_ratios",
            ExperimentKind::Fig5Tradeoff => "fig5_tradeoff",
            ExperimentKind::Whitenoise => "whitenoise",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| HarnessError::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// How candidates for a Haar target are synthesized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// Direct search on each shifted target at ε.
    Direct,
    /// Three-rotation pipeline with ε split across the rotations, so the
    /// whole gate is within ε.
    #[default]
    AxialPerGate,
    /// Three-rotation pipeline with each rotation at ε; the gate error can
    /// reach 3ε.
    AxialPerRotation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoiseParams {
    pub n: usize,
    pub p_dep: f64,
    pub layers: Vec<usize>,
}

impl Default for WhiteNoiseParams {
    fn default() -> Self {
        WhiteNoiseParams { n: 2, p_dep: 1e-3, layers: vec![100, 400] }
    }
}

fn default_vecset() -> VecSet {
    VecSet::Pauli7
}

fn default_families() -> Vec<ConstraintKind> {
    vec![ConstraintKind::Depol, ConstraintKind::Xy]
}

/// Sweep description. For `whitenoise` the ε grid holds coherent error
/// strengths; for `fig5_tradeoff` it holds base synthesis accuracies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default, rename = "R")]
    pub bigr: Vec<usize>,
    #[serde(default)]
    pub theta: Vec<f64>,
    pub instances: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_vecset")]
    pub vecset: VecSet,
    #[serde(default = "default_families")]
    pub families: Vec<ConstraintKind>,
    #[serde(default)]
    pub pipeline: Pipeline,
    /// α grid size for fig5; `None` uses ⌈2/ε⌉.
    #[serde(default)]
    pub pool: Option<usize>,
    #[serde(default)]
    pub whitenoise: WhiteNoiseParams,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            eps: Vec::new(),
            c: Vec::new(),
            bigr: Vec::new(),
            theta: Vec::new(),
            instances: 1,
            base_seed: 0,
            out_dir: None,
            vecset: default_vecset(),
            families: default_families(),
            pipeline: Pipeline::default(),
            pool: None,
            whitenoise: WhiteNoiseParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let empty = |name: &str, len: usize| {
            if len == 0 {
                Err(HarnessError::Config(format!("{} needs a non-empty {name} grid", self.kind.name())))
            } else {
                Ok(())
            }
        };
        if self.instances == 0 {
            return Err(HarnessError::Config("instances must be at least 1".into()));
        }
        empty("eps", self.eps.len())?;
        if self.eps.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(HarnessError::Config(format!("bad eps grid {:?}", self.eps)));
        }
        match self.kind {
            ExperimentKind::Fig1Accuracy
            | ExperimentKind::Fig1Failrate
            | ExperimentKind::Fig2Residual
            | ExperimentKind::Fig3Ratios => {
                empty("c", self.c.len())?;
                empty("R", self.bigr.len())?;
                if self.kind == ExperimentKind::Fig3Ratios {
                    empty("families", self.families.len())?;
                }
            }
            ExperimentKind::Fig5Tradeoff => empty("theta", self.theta.len())?,
            ExperimentKind::Whitenoise => empty("layers", self.whitenoise.layers.len())?,
        }
        Ok(())
    }
}

/// One instance at one grid point. Fields that do not apply to the
/// experiment kind are left empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: String,
    pub instance: usize,
    pub seed: u64,
    pub eps: f64,
    pub c: Option<f64>,
    #[serde(rename = "R")]
    pub bigr: Option<usize>,
    pub theta: Option<f64>,
    pub family: Option<String>,
    #[serde(rename = "L")]
    pub layers: Option<usize>,
    pub success: bool,
    pub status: String,
    pub d_diamond: Option<f64>,
    pub d_over_eps2: Option<f64>,
    pub bound_lo: Option<f64>,
    pub bound_hi: Option<f64>,
    pub offdiag_mass: Option<f64>,
    pub support: Option<usize>,
    pub rate: Option<f64>,
    pub q_x: Option<f64>,
    pub q_y: Option<f64>,
    pub q_z: Option<f64>,
    /// Success and the family's ratio criterion both hold.
    pub accepted: Option<bool>,
    pub nonpauli_crafted: Option<f64>,
    pub d_uncrafted: Option<f64>,
    pub nonpauli_uncrafted: Option<f64>,
    pub tcount: Option<f64>,
    pub tcount_plain: Option<usize>,
    pub mu_tilde: Option<f64>,
    pub p_z: Option<f64>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_mean: Option<f64>,
    pub dev: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    fn base(kind: ExperimentKind, instance: usize, seed: u64, eps: f64) -> Self {
        RunRecord { kind: kind.name().into(), instance, seed, eps, ..Default::default() }
    }

    fn fail(mut self, err: impl std::fmt::Display) -> Self {
        self.success = false;
        self.status = "error".into();
        self.error = Some(err.to_string());
        self
    }

    fn fill_craft(&mut self, s: &CraftSolution) {
        self.success = s.success;
        self.status = format!("{:?}", s.status);
        self.d_diamond = Some(s.d_diamond);
        self.d_over_eps2 = Some(s.d_diamond / (self.eps * self.eps));
        self.offdiag_mass = Some(s.offdiag_mass);
        self.support = Some(s.support_size);
        let q = s.chi.ratios();
        self.rate = Some(s.chi.rate());
        self.q_x = Some(q[0]);
        self.q_y = Some(q[1]);
        self.q_z = Some(q[2]);
    }
}

/// A row plus its wallclock time. Timing is kept out of the CSV so reruns
/// produce identical files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimedRecord {
    #[serde(flatten)]
    pub record: RunRecord,
    pub wallclock_s: f64,
}

/// Whether ratios satisfy the family's acceptance criterion.
pub fn ratio_criterion(kind: ConstraintKind, chi: &ChiDiag) -> bool {
    let q = chi.ratios();
    match kind {
        ConstraintKind::Depol => {
            let spread = (q[0] - q[1]).abs().max((q[0] - q[2]).abs()).max((q[1] - q[2]).abs());
            spread <= G2_REL
        }
        ConstraintKind::Xy => q[2] <= G2_REL,
        ConstraintKind::Pauli | ConstraintKind::None => true,
    }
}

fn synth_candidates(target: &Mat2, spec: &ShiftSpec, pipeline: Pipeline) -> Result<Vec<Candidate>, String> {
    shifted_targets(target, spec)
        .into_par_iter()
        .map(|(shifted, v, k)| {
            let word = match pipeline {
                Pipeline::Direct => synth_su2(&SynthRequest::new(shifted, spec.eps)).map(|r| r.word),
                Pipeline::AxialPerGate => {
                    synth_via_axial(&MitmBackend::default(), &shifted, spec.eps, AxialSplit::default()).map(|r| r.word)
                }
                Pipeline::AxialPerRotation => {
                    synth_via_axial(&MitmBackend::default(), &shifted, 3.0 * spec.eps, AxialSplit::default())
                        .map(|r| r.word)
                }
            }
            .map_err(|e| e.to_string())?;
            Ok(Candidate::from_unitary(eval_float(&word), target, Some(word), v, k))
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Job {
    Shift { eps: f64, c: f64, bigr: usize, family: ConstraintKind, instance: usize },
    Cptp { eps: f64, theta: f64 },
    Noise { eps_coh: f64, layers: usize, instance: usize },
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    match cfg.kind {
        ExperimentKind::Fig5Tradeoff => {
            for &theta in &cfg.theta {
                for &eps in &cfg.eps {
                    out.push(Job::Cptp { eps, theta });
                }
            }
        }
        ExperimentKind::Whitenoise => {
            for &layers in &cfg.whitenoise.layers {
                for &eps_coh in &cfg.eps {
                    for instance in 0..cfg.instances {
                        out.push(Job::Noise { eps_coh, layers, instance });
                    }
                }
            }
        }
        _ => {
            let families =
                if cfg.kind == ExperimentKind::Fig3Ratios { cfg.families.clone() } else { vec![ConstraintKind::Pauli] };
            for &family in &families {
                for &eps in &cfg.eps {
                    for &c in &cfg.c {
                        for &bigr in &cfg.bigr {
                            for instance in 0..cfg.instances {
                                out.push(Job::Shift { eps, c, bigr, family, instance });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn run_shift(cfg: &ExperimentConfig, eps: f64, c: f64, bigr: usize, family: ConstraintKind, instance: usize) -> RunRecord {
    let seed = cfg.base_seed + instance as u64;
    let mut rec = RunRecord::base(cfg.kind, instance, seed, eps);
    rec.c = Some(c);
    rec.bigr = Some(bigr);
    rec.family = Some(format!("{family:?}").to_lowercase());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = if cfg.kind == ExperimentKind::Fig2Residual {
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        rec.theta = Some(theta);
        rz(theta)
    } else {
        haar_unitary_2(&mut rng)
    };
    let spec = ShiftSpec { c, eps, bigr, vecset: cfg.vecset.clone() };
    let pipeline = if cfg.kind == ExperimentKind::Fig2Residual { Pipeline::Direct } else { cfg.pipeline };
    let cands = match synth_candidates(&target, &spec, pipeline) {
        Ok(c) => c,
        Err(e) => return rec.fail(e),
    };
    let fam = ConstraintFamily::new(family).with_shift_bound(c, eps);
    let sol = match craft(&cands, &fam) {
        Ok(s) => s,
        Err(e) => return rec.fail(e),
    };
    rec.fill_craft(&sol);
    let lo = (c / bigr as f64 - 1.0).max(0.0);
    rec.bound_lo = Some(lo * lo * eps * eps);
    rec.bound_hi = Some((c + 1.0) * (c + 1.0) * eps * eps);
    rec.accepted = Some(sol.success && ratio_criterion(family, &sol.chi));
    if cfg.kind == ExperimentKind::Fig2Residual {
        rec.nonpauli_crafted = nonpauli_residual(&sol.gram).ok();
        match uncrafted_mix(&cands) {
            Ok(u) => {
                rec.d_uncrafted = Some(u.d_diamond);
                rec.nonpauli_uncrafted = nonpauli_residual(&u.gram).ok();
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
    }
    rec
}

fn run_cptp(cfg: &ExperimentConfig, eps: f64, theta: f64) -> RunRecord {
    let mut rec = RunRecord::base(cfg.kind, 0, cfg.base_seed, eps);
    rec.theta = Some(theta);
    let pool = PoolSpec::new(cfg.pool.unwrap_or_else(|| (2.0 / eps).ceil() as usize));
    match search_pair_with(theta, eps, &pool) {
        Ok(pair) => {
            rec.success = true;
            rec.status = "Solved".into();
            rec.tcount = Some(pair.mean_tcount());
            rec.mu_tilde = Some(pair.mu_tilde);
            rec.p_z = Some(pair.p_z);
            rec.rate = Some(pair.p_z);
        }
        Err(e) => return rec.fail(e),
    }
    match synth_rz(theta, eps) {
        Ok(r) => {
            rec.tcount_plain = Some(r.tcount);
            rec.d_diamond = unitary_diamond(&rz(theta), &eval_float(&r.word)).ok();
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn run_noise(cfg: &ExperimentConfig, eps_coh: f64, layers: usize, instance: usize) -> RunRecord {
    let seed = cfg.base_seed + instance as u64;
    let mut rec = RunRecord::base(cfg.kind, instance, seed, eps_coh);
    rec.layers = Some(layers);
    let spec = NoiseLayerSpec { n: cfg.whitenoise.n, p_dep: cfg.whitenoise.p_dep, eps_coh, layers, seed };
    match run_instance(&spec) {
        Ok((_, row)) => {
            rec.success = true;
            rec.status = "Solved".into();
            rec.k_min = Some(row.k_min);
            rec.k_max = Some(row.k_max);
            rec.k_mean = Some(row.k_mean);
            rec.dev = Some(row.dev);
            rec
        }
        Err(e) => rec.fail(e),
    }
}

/// Runs every job of the sweep; rows come back in job order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TimedRecord>, HarnessError> {
    cfg.validate()?;
    Ok(jobs(cfg)
        .into_par_iter()
        .map(|job| {
            let t0 = Instant::now();
            let record = match job {
                Job::Shift { eps, c, bigr, family, instance } => run_shift(cfg, eps, c, bigr, family, instance),
                Job::Cptp { eps, theta } => run_cptp(cfg, eps, theta),
                Job::Noise { eps_coh, layers, instance } => run_noise(cfg, eps_coh, layers, instance),
            };
            TimedRecord { record, wallclock_s: t0.elapsed().as_secs_f64() }
        })
        .collect())
}

/// Writes rows as CSV under the schema comment line.
pub fn write_csv<W: Write, T: Serialize>(mut w: W, rows: &[T]) -> Result<(), HarnessError> {
    writeln!(w, "{SCHEMA_LINE}")?;
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(mut r: R) -> Result<Vec<RunRecord>, HarnessError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let body = match text.strip_prefix(SCHEMA_LINE) {
        Some(rest) => rest.trim_start_matches(['\r', '\n']),
        None => return Err(HarnessError::Schema(format!("missing {SCHEMA_LINE} header"))),
    };
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    Ok(rd.deserialize().collect::<Result<Vec<RunRecord>, _>>()?)
}

/// Per-gate and total sampling overhead of an error countermeasure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverheadMethod {
    Pec,
    Rescaling,
    EdPec,
    EdRescaling,
}

impl std::str::FromStr for OverheadMethod {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| HarnessError::Config(format!("unknown overhead method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub gamma: f64,
    /// ln γ^L, usable when γ^L overflows.
    pub ln_total: f64,
    pub total: f64,
}

pub fn overhead_report(chi: &ChiDiag, layers: f64, method: OverheadMethod) -> OverheadReport {
    let p = chi.rate();
    let [qx, qy, qz] = chi.ratios();
    let gamma = 1.0
        + p * match method {
            OverheadMethod::Pec => 4.0,
            OverheadMethod::Rescaling => 2.0,
            OverheadMethod::EdPec => qx + qy + 4.0 * qz,
            OverheadMethod::EdRescaling => qx + qy + 2.0 * qz,
        };
    // ln γ via ln_1p keeps precision for tiny rates.
    let ln_total = layers * (gamma - 1.0).ln_1p();
    OverheadReport { gamma, ln_total, total: ln_total.exp() }
}

/// Least-squares line with the standard error of the slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (*x, *y)).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit { slope, intercept, stderr, n })
}

/// Nearest-rank quantile; unchanged when every row is repeated equally often.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Some(v[rank - 1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

fn quartiles(v: &[f64]) -> Option<Quartiles> {
    Some(Quartiles { q1: quantile(v, 0.25)?, median: quantile(v, 0.5)?, q3: quantile(v, 0.75)? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub eps: f64,
    pub c: Option<f64>,
    #[serde(rename = "R")]
    pub bigr: Option<usize>,
    pub theta: Option<f64>,
    pub family: Option<String>,
    #[serde(rename = "L")]
    pub layers: Option<usize>,
    pub rows: usize,
    pub success_rate: f64,
    pub accept_rate: Option<f64>,
    pub failure_rate: f64,
    /// Name of the summarized column and its quartiles.
    pub metric: String,
    pub quartiles: Option<Quartiles>,
    pub extra: BTreeMap<String, Quartiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub groups: Vec<GroupSummary>,
    pub slopes: BTreeMap<String, LineFit>,
}

fn primary_metric(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Fig1Accuracy | ExperimentKind::Fig1Failrate | ExperimentKind::Fig3Ratios => "d_over_eps2",
        ExperimentKind::Fig2Residual => "nonpauli_crafted",
        ExperimentKind::Fig5Tradeoff => "p_z",
        ExperimentKind::Whitenoise => "k_mean",
    }
}

fn column(r: &RunRecord, name: &str) -> Option<f64> {
    match name {
        "d_diamond" => r.d_diamond,
        "d_over_eps2" => r.d_over_eps2,
        "nonpauli_crafted" => r.nonpauli_crafted,
        "nonpauli_uncrafted" => r.nonpauli_uncrafted,
        "d_uncrafted" => r.d_uncrafted,
        "p_z" => r.p_z,
        "tcount" => r.tcount,
        "tcount_plain" => r.tcount_plain.map(|t| t as f64),
        "k_mean" => r.k_mean,
        "dev" => r.dev,
        "q_x" => r.q_x,
        "q_y" => r.q_y,
        "q_z" => r.q_z,
        _ => None,
    }
}

fn extra_columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Fig1Accuracy | ExperimentKind::Fig1Failrate => &["d_diamond"],
        ExperimentKind::Fig2Residual => &["nonpauli_uncrafted", "d_diamond", "d_uncrafted"],
        ExperimentKind::Fig3Ratios => &["q_x", "q_y", "q_z"],
        ExperimentKind::Fig5Tradeoff => &["tcount", "tcount_plain"],
        ExperimentKind::Whitenoise => &["dev"],
    }
}

type GroupKey = (u64, Option<u64>, Option<usize>, Option<u64>, Option<String>, Option<usize>);

fn key_of(r: &RunRecord) -> GroupKey {
    (r.eps.to_bits(), r.c.map(f64::to_bits), r.bigr, r.theta.map(f64::to_bits), r.family.clone(), r.layers)
}

/// Groups rows by grid point and summarizes them. Slopes are fitted to the
/// group medians, so they do not depend on how often each row occurs.
pub fn emit_report(table: &[RunRecord], kind: ExperimentKind) -> Result<Report, HarnessError> {
    if table.is_empty() {
        return Err(HarnessError::Schema("empty table".into()));
    }
    if let Some(r) = table.iter().find(|r| r.kind != kind.name()) {
        return Err(HarnessError::Schema(format!("row of kind {:?} in a {} table", r.kind, kind.name())));
    }
    let mut order: Vec<GroupKey> = Vec::new();
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in table {
        let k = key_of(r);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(r);
    }
    let metric = primary_metric(kind);
    let mut out = Vec::new();
    for k in &order {
        let rows = &groups[k];
        let n = rows.len() as f64;
        let succ = rows.iter().filter(|r| r.success).count() as f64 / n;
        let acc: Vec<bool> = rows.iter().filter_map(|r| r.accepted).collect();
        let vals: Vec<f64> = rows.iter().filter(|r| r.success).filter_map(|r| column(r, metric)).collect();
        let mut extra = BTreeMap::new();
        for name in extra_columns(kind) {
            let v: Vec<f64> = rows.iter().filter(|r| r.success).filter_map(|r| column(r, name)).collect();
            if let Some(q) = quartiles(&v) {
                extra.insert(name.to_string(), q);
            }
        }
        let r0 = rows[0];
        out.push(GroupSummary {
            eps: r0.eps,
            c: r0.c,
            bigr: r0.bigr,
            theta: r0.theta,
            family: r0.family.clone(),
            layers: r0.layers,
            rows: rows.len(),
            success_rate: succ,
            accept_rate: (!acc.is_empty()).then(|| acc.iter().filter(|a| **a).count() as f64 / acc.len() as f64),
            failure_rate: 1.0 - succ,
            metric: metric.to_string(),
            quartiles: quartiles(&vals),
            extra,
        });
    }
    Ok(Report { kind: kind.name().into(), slopes: slopes(kind, &out), groups: out })
}

fn med(g: &GroupSummary, name: &str) -> Option<f64> {
    if name == g.metric {
        g.quartiles.as_ref().map(|q| q.median)
    } else {
        g.extra.get(name).map(|q| q.median)
    }
}

fn slopes(kind: ExperimentKind, groups: &[GroupSummary]) -> BTreeMap<String, LineFit> {
    let mut out = BTreeMap::new();
    let mut fit = |label: String, pts: Vec<(f64, f64)>| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        if let Some(f) = fit_line(&xs, &ys) {
            out.insert(label, f);
        }
    };
    match kind {
        ExperimentKind::Fig5Tradeoff => {
            let pz: Vec<(f64, f64)> =
                groups.iter().filter_map(|g| Some((g.eps.ln(), med(g, "p_z")?.ln()))).collect();
            fit("log_pz_vs_log_eps".into(), pz);
            let t: Vec<(f64, f64)> =
                groups.iter().filter_map(|g| Some(((1.0 / med(g, "p_z")?).log2(), med(g, "tcount")?))).collect();
            fit("tcount_vs_log2_inv_pz".into(), t);
            let tp: Vec<(f64, f64)> =
                groups.iter().filter_map(|g| Some(((1.0 / g.eps).log2(), med(g, "tcount_plain")?))).collect();
            fit("plain_tcount_vs_log2_inv_eps".into(), tp);
        }
        ExperimentKind::Whitenoise => {
            let mut by_l: BTreeMap<usize, Vec<&GroupSummary>> = BTreeMap::new();
            for g in groups {
                by_l.entry(g.layers.unwrap_or(0)).or_default().push(g);
            }
            for (l, gs) in by_l {
                let Some(base) = gs.iter().find(|g| g.eps == 0.0).and_then(|g| med(g, "k_mean")) else { continue };
                let pts = gs
                    .iter()
                    .filter(|g| g.eps > 0.0)
                    .filter_map(|g| Some((g.eps.ln(), (med(g, "k_mean")? - base).abs().ln())))
                    .collect();
                fit(format!("log_dk_vs_log_eps_coh_L{l}"), pts);
            }
        }
        ExperimentKind::Fig1Accuracy | ExperimentKind::Fig2Residual => {
            let mut by_cr: BTreeMap<(u64, usize), Vec<(f64, f64)>> = BTreeMap::new();
            for g in groups {
                if let (Some(c), Some(r), Some(d)) = (g.c, g.bigr, med(g, "d_diamond")) {
                    by_cr.entry((c.to_bits(), r)).or_default().push((g.eps.ln(), d.ln()));
                }
            }
            for ((c, r), pts) in by_cr {
                fit(format!("log_d_vs_log_eps_c{}_R{r}", f64::from_bits(c)), pts);
            }
        }
        ExperimentKind::Fig1Failrate | ExperimentKind::Fig3Ratios => {}
    }
    out
}

/// Runs the sweep and writes `<kind>.csv`, `<kind>.json` and
/// `<kind>_summary.json` into `dir`.
pub fn run_and_write(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, HarnessError> {
    let timed = run_experiment(cfg)?;
    std::fs::create_dir_all(dir)?;
    let rows: Vec<RunRecord> = timed.iter().map(|t| t.record.clone()).collect();
    let name = cfg.kind.name();
    write_csv(std::fs::File::create(dir.join(format!("{name}.csv")))?, &rows)?;
    serde_json::to_writer_pretty(std::fs::File::create(dir.join(format!("{name}.json")))?, &timed)?;
    let report = emit_report(&rows, cfg.kind)?;
    serde_json::to_writer_pretty(std::fs::File::create(dir.join(format!("{name}_summary.json")))?, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_rejected() {
        let cfg = ExperimentConfig::new(ExperimentKind::Fig1Failrate);
        assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
        let mut cfg = ExperimentConfig::new(ExperimentKind::Fig5Tradeoff);
        cfg.eps = vec![1e-2];
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [
            ExperimentKind::Fig1Accuracy,
            ExperimentKind::Fig1Failrate,
            ExperimentKind::Fig2Residual,
            ExperimentKind::Fig3Ratios,
            ExperimentKind::Fig5Tradeoff,
            ExperimentKind::Whitenoise,
        ] {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
    }

    #[test]
    fn zero_rate_has_unit_overhead() {
        let chi = ChiDiag { ii: 1.0, ..Default::default() };
        for m in [OverheadMethod::Pec, OverheadMethod::Rescaling, OverheadMethod::EdPec, OverheadMethod::EdRescaling] {
            let r = overhead_report(&chi, 1e6, m);
            assert_eq!(r.gamma, 1.0);
            assert_eq!(r.total, 1.0);
        }
    }

    #[test]
    fn pec_ratio_at_long_depth() {
        let eps: f64 = 1e-5;
        let chi = |p: f64| ChiDiag { ii: 1.0 - p, xx: p / 3.0, yy: p / 3.0, zz: p / 3.0 };
        for (l, want) in [(1e8, 6.8), (2e8, 47.0), (3e8, 317.0)] {
            let a = overhead_report(&chi(49.0 * eps * eps), l, OverheadMethod::Pec);
            let b = overhead_report(&chi(eps * eps), l, OverheadMethod::Pec);
            let ratio = (a.ln_total - b.ln_total).exp();
            assert!((ratio - want).abs() / want < 0.02, "{ratio}");
        }
    }

    #[test]
    fn xy_crafted_beats_plain_pec() {
        let p = 1e-4;
        let chi = ChiDiag { ii: 1.0 - p, xx: 0.495 * p, yy: 0.495 * p, zz: 0.01 * p };
        let ed = overhead_report(&chi, 1.0, OverheadMethod::EdPec).gamma;
        let pec = overhead_report(&chi, 1.0, OverheadMethod::Pec).gamma;
        assert!(ed < pec);
        assert!((ed - (1.0 + 1.03 * p)).abs() < 1e-15);
    }

    #[test]
    fn line_fit_exact() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let f = fit_line(&xs, &ys).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12 && f.stderr < 1e-12);
    }

    fn row(eps: f64, d: f64) -> RunRecord {
        RunRecord {
            kind: "fig1_accuracy".into(),
            eps,
            c: Some(7.0),
            bigr: Some(1),
            success: true,
            d_diamond: Some(d),
            d_over_eps2: Some(d / eps / eps),
            ..Default::default()
        }
    }

    #[test]
    fn single_row_summary_is_the_row() {
        let r = emit_report(&[row(1e-2, 4e-3)], ExperimentKind::Fig1Accuracy).unwrap();
        let q = r.groups[0].quartiles.clone().unwrap();
        assert_eq!((q.q1, q.median, q.q3), (40.0, 40.0, 40.0));
        assert_eq!(r.groups[0].success_rate, 1.0);
    }

    #[test]
    fn duplicates_do_not_change_summary() {
        let rows: Vec<RunRecord> = [(1e-2, 4e-3), (1e-2, 5e-3), (1e-2, 3.7e-3), (3e-3, 4e-4), (3e-3, 5e-4)]
            .iter()
            .map(|(e, d)| row(*e, *d))
            .collect();
        let doubled: Vec<RunRecord> = rows.iter().chain(rows.iter()).cloned().collect();
        let a = emit_report(&rows, ExperimentKind::Fig1Accuracy).unwrap();
        let b = emit_report(&doubled, ExperimentKind::Fig1Accuracy).unwrap();
        assert_eq!(a.slopes, b.slopes);
        for (x, y) in a.groups.iter().zip(&b.groups) {
            assert_eq!(x.quartiles, y.quartiles);
            assert_eq!(x.success_rate, y.success_rate);
        }
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(emit_report(&[], ExperimentKind::Whitenoise), Err(HarnessError::Schema(_))));
        assert!(matches!(emit_report(&[row(1e-2, 1e-3)], ExperimentKind::Whitenoise), Err(HarnessError::Schema(_))));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(1e-2, 4e-3), RunRecord { error: Some("x, y".into()), ..row(3e-3, 1e-4) }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        assert!(buf.starts_with(b"#schema=v1\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }
}
