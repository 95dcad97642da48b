use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use craftsynth::channels::{haar_unitary_2, rz, unitary_diamond, ChiDiag, Mat2, Ptm, C64};
use craftsynth::cliffordt::eval_float;
use craftsynth::cptpcraft::{feedback_channel, mixed_ptm, search_pair_with, PoolSpec};
use craftsynth::craftopt::{craft, uncrafted_mix, ConstraintFamily, ConstraintKind};
use craftsynth::harness::{overhead_report, run_and_write, write_csv, ExperimentConfig, ExperimentKind, OverheadMethod};
use craftsynth::shiftgen::{build_candidates, ShiftSpec, ShiftSynth, VecSet};
use craftsynth::synthesis::{synth_rz, synth_su2, SynthRequest};
use craftsynth::whitenoise::{run_seeds, NoiseLayerSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "craftsynth", version, about = "Clifford+T synthesis and error crafting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize one single-qubit unitary or Rz rotation.
    Synth {
        /// JSON file holding a 2×2 matrix as [[[re, im], [re, im]], [[re, im], [re, im]]].
        #[arg(long, conflicts_with = "rz")]
        target_json: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        rz: Option<f64>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Craft a mixed synthesis of a target from shifted candidates.
    Craft {
        #[arg(long, default_value = "pauli")]
        constraint: ConstraintKind,
        #[arg(long, default_value_t = 7.0)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        bigr: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, allow_negative_numbers = true, conflicts_with = "haar_seed")]
        rz: Option<f64>,
        #[arg(long)]
        haar_seed: Option<u64>,
        /// pauli7, depol9, sphere:N or a '+'-joined union such as pauli7+sphere:32.
        #[arg(long)]
        vecset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a feedback-corrected pair whose mixture leaves a pure Z error.
    CptpCraft {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        eps: f64,
        /// Number of Rx angles in the pool; defaults to ⌈2/ε⌉.
        #[arg(long)]
        pool: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Damping factors of layered random circuits under local noise.
    Whitenoise {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_coh: f64,
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment sweep described by a JSON config.
    Sweep {
        /// Overrides the config's kind.
        #[arg(long)]
        experiment: Option<ExperimentKind>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Sampling overhead of an error countermeasure for a Pauli channel.
    Overhead {
        #[arg(long)]
        rate: f64,
        /// Ratios (q_x, q_y, q_z) of the rate; defaults to depolarizing.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long)]
        layers: f64,
        #[arg(long, default_value = "pec")]
        method: OverheadMethod,
    },
}

fn parse_vecset(s: &str) -> Result<VecSet> {
    let parts = s
        .split('+')
        .map(|p| match p.trim() {
            "pauli7" => Ok(VecSet::Pauli7),
            "depol9" => Ok(VecSet::Depol9),
            other => match other.strip_prefix("sphere:") {
                Some(n) => Ok(VecSet::Sphere { count: n.parse().context("sphere count")?, seed: 1 }),
                None => bail!("unknown vector set {other:?}"),
            },
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(if parts.len() == 1 { parts.into_iter().next().unwrap() } else { VecSet::Union(parts) })
}

fn default_vecset(kind: ConstraintKind) -> VecSet {
    match kind {
        ConstraintKind::Depol => VecSet::Depol9,
        ConstraintKind::Xy => VecSet::Sphere { count: 128, seed: 1 },
        _ => VecSet::Pauli7,
    }
}

fn read_matrix(path: &Path) -> Result<Mat2> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: [[[f64; 2]; 2]; 2] = serde_json::from_str(&text).context("target must be a 2×2 array of [re, im]")?;
    let c = |i: usize, j: usize| C64::new(m[i][j][0], m[i][j][1]);
    Ok(Mat2::new(c(0, 0), c(0, 1), c(1, 0), c(1, 1)))
}

fn matrix_json(u: &Mat2) -> serde_json::Value {
    json!([[[u[(0, 0)].re, u[(0, 0)].im], [u[(0, 1)].re, u[(0, 1)].im]], [[u[(1, 0)].re, u[(1, 0)].im], [u[(1, 1)].re, u[(1, 1)].im]]])
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn rows_of(p: &Ptm) -> Vec<Vec<f64>> {
    p.gamma.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Synth { target_json, rz: theta, eps, out } => {
            let (target, res) = match (target_json, theta) {
                (Some(p), None) => {
                    let u = read_matrix(&p)?;
                    (u, synth_su2(&SynthRequest::new(u, eps))?)
                }
                (None, Some(t)) => (rz(t), synth_rz(t, eps)?),
                _ => bail!("give exactly one of --target-json or --rz"),
            };
            let d = unitary_diamond(&target, &eval_float(&res.word))?;
            emit(
                &json!({ "target": matrix_json(&target), "eps": eps, "word": res.word, "achieved": res.achieved,
                         "tcount": res.tcount, "d_diamond_float": d }),
                out.as_deref(),
            )
        }
        Cmd::Craft { constraint, c, bigr, eps, rz: theta, haar_seed, vecset, out } => {
            let target = match (theta, haar_seed) {
                (Some(t), None) => rz(t),
                (None, Some(s)) => haar_unitary_2(&mut ChaCha8Rng::seed_from_u64(s)),
                _ => bail!("give exactly one of --rz or --haar-seed"),
            };
            let vecset = match vecset {
                Some(s) => parse_vecset(&s)?,
                None => default_vecset(constraint),
            };
            let spec = ShiftSpec { c, eps, bigr, vecset };
            let cands = build_candidates(&target, &spec, ShiftSynth::Direct)?;
            let sol = if constraint == ConstraintKind::None {
                uncrafted_mix(&cands)?
            } else {
                craft(&cands, &ConstraintFamily::new(constraint).with_shift_bound(c, eps))?
            };
            let words: Vec<_> = cands.iter().map(|k| json!({ "word": k.word, "tcount": k.tcount(), "rung": k.rung })).collect();
            eprintln!("success {} d/eps^2 {:.4} support {}", sol.success, sol.d_diamond / (eps * eps), sol.support_size);
            emit(&json!({ "target": matrix_json(&target), "spec": spec, "candidates": words, "solution": sol }), out.as_deref())
        }
        Cmd::CptpCraft { theta, eps, pool, out } => {
            let pool = PoolSpec::new(pool.unwrap_or_else(|| (2.0 / eps).ceil() as usize));
            let pair = search_pair_with(theta, eps, &pool)?;
            let audit_plus = feedback_channel(&pair.plus.word, theta)?;
            let audit_minus = feedback_channel(&pair.minus.word, theta)?;
            let mixed = mixed_ptm(&pair)?;
            eprintln!("p_z {:.3e} mean T {:.2}", pair.p_z, pair.mean_tcount());
            emit(
                &json!({ "pair": pair, "pool": pool, "audit_ptm_plus": rows_of(&audit_plus),
                         "audit_ptm_minus": rows_of(&audit_minus), "mixed_ptm": rows_of(&mixed) }),
                out.as_deref(),
            )
        }
        Cmd::Whitenoise { n, p, eps_coh, layers, seeds, base_seed, out } => {
            let template = NoiseLayerSpec { n, p_dep: p, eps_coh, layers, seed: base_seed };
            let seeds: Vec<u64> = (base_seed..base_seed + seeds).collect();
            let rows = run_seeds(&template, &seeds)?;
            match out {
                Some(path) => write_csv(std::fs::File::create(&path)?, &rows)?,
                None => write_csv(std::io::stdout().lock(), &rows)?,
            }
            Ok(())
        }
        Cmd::Sweep { experiment, config, out_dir } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text).context("parsing sweep config")?;
            if let Some(k) = experiment {
                cfg.kind = k;
            }
            let dir = out_dir.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
            let report = run_and_write(&cfg, &dir)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Cmd::Overhead { rate, ratios, layers, method } => {
            let q = ratios.unwrap_or_else(|| vec![1.0 / 3.0; 3]);
            if q.len() != 3 {
                bail!("--ratios takes three values q_x,q_y,q_z");
            }
            if (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                bail!("ratios must sum to 1");
            }
            let chi = ChiDiag { ii: 1.0 - rate, xx: q[0] * rate, yy: q[1] * rate, zz: q[2] * rate };
            emit(&overhead_report(&chi, layers, method), None)
        }
    }
}
