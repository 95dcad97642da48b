use super::lp::{solve_lp, LpProblem, LpStatus};
use super::CraftError;
use crate::channels::{half_trace_norm_sym, identity_residual, ChiDiag, GramMatrix, MagicVec};
use crate::shiftgen::Candidate;
use serde::{Deserialize, Serialize};

/// Weights below this count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-14;
/// Largest g₁ for which a Pauli solve counts as a success.
pub const G1_SUCCESS: f64 = 1e-12;
/// g₂ cap relative to the total Pauli rate.
pub const G2_REL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    None,
    Pauli,
    Depol,
    Xy,
}

impl std::str::FromStr for ConstraintKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(ConstraintKind::None),
            "pauli" => Ok(ConstraintKind::Pauli),
            "depol" => Ok(ConstraintKind::Depol),
            "xy" => Ok(ConstraintKind::Xy),
            _ => Err(format!("unknown constraint family '{s}'")),
        }
    }
}

/// g₂ rungs run geometrically from `start` and stop at `rel_cap` times the
/// Pauli rate of the g₁-feasible Pauli solution, the cap itself being the
/// last rung.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Policy {
    pub start: f64,
    pub factor: f64,
    pub rel_cap: f64,
}

impl Default for G2Policy {
    fn default() -> Self {
        G2Policy { start: 1e-16, factor: 10.0, rel_cap: G2_REL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintFamily {
    pub kind: ConstraintKind,
    pub ladder: Vec<f64>,
    pub g2_policy: G2Policy,
    /// Upper bound on d◇ for success, typically (c+1)²ε². None skips the check.
    pub d_bound: Option<f64>,
}

impl ConstraintFamily {
    pub fn new(kind: ConstraintKind) -> Self {
        ConstraintFamily {
            kind,
            ladder: (0..5).map(|k| 1e-16 * 10f64.powi(k)).collect(),
            g2_policy: G2Policy::default(),
            d_bound: None,
        }
    }

    pub fn with_bound(mut self, d_bound: f64) -> Self {
        self.d_bound = Some(d_bound);
        self
    }

    /// The (c+1)²ε² bound for shift factor c.
    pub fn with_shift_bound(self, c: f64, eps: f64) -> Self {
        self.with_bound((c + 1.0) * (c + 1.0) * eps * eps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CraftStatus {
    Solved,
    InfeasibleAtAllRungs,
    NoConvergence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CraftSolution {
    pub p: Vec<f64>,
    #[serde(rename = "M")]
    pub gram: GramMatrix,
    pub d_diamond: f64,
    pub chi: ChiDiag,
    pub g1_used: Option<f64>,
    pub g2_used: Option<f64>,
    pub success: bool,
    pub support_size: usize,
    pub status: CraftStatus,
    /// Σ pⱼ(1 − r₁⁽ʲ⁾²), the linearized distance.
    pub linear_objective: f64,
    pub offdiag_mass: f64,
    /// Certified optimality gap of the unconstrained solve.
    pub gap: Option<f64>,
}

impl CraftSolution {
    pub(crate) fn from_weights(mut p: Vec<f64>, rs: &[MagicVec], status: CraftStatus) -> Self {
        for x in p.iter_mut() {
            *x = x.max(0.0);
        }
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            for x in p.iter_mut() {
                *x /= s;
            }
        }
        let gram = GramMatrix::from_mixture(&p, rs);
        let d_diamond = half_trace_norm_sym(&identity_residual(&p, rs));
        let linear_objective = p.iter().zip(rs).map(|(pj, r)| pj * r.off_identity_weight()).sum();
        CraftSolution {
            support_size: p.iter().filter(|x| **x > SUPPORT_TOL).count(),
            chi: chi_of(&p, rs, &gram),
            offdiag_mass: gram.off_diagonal_mass(),
            p,
            gram,
            d_diamond,
            g1_used: None,
            g2_used: None,
            success: false,
            status,
            linear_objective,
            gap: None,
        }
    }

    pub(crate) fn failure(n: usize, rs: &[MagicVec]) -> Self {
        let mut s = Self::from_weights(vec![1.0 / n as f64; n], rs, CraftStatus::InfeasibleAtAllRungs);
        s.success = false;
        s
    }
}

/// χ diagonal with χ_II formed from the off-identity weights.
fn chi_of(p: &[f64], rs: &[MagicVec], g: &GramMatrix) -> ChiDiag {
    let mut chi = ChiDiag::from_gram(g);
    let w: f64 = p.iter().zip(rs).map(|(pj, r)| pj * r.off_identity_weight()).sum();
    chi.ii = 1.0 - w;
    chi
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
const DIAG_PAIRS: [(usize, usize); 3] = [(1, 2), (1, 3), (2, 3)];

fn col_scale(vals: impl Iterator<Item = f64>) -> f64 {
    let m = vals.fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Extra constraint on the Pauli diagonal.
enum DiagRows {
    None,
    Depol(f64),
    Xy(f64),
}

/// Relaxed Pauli LP over weights p and the |off-diagonal| bounds t.
fn build_lp(rs: &[MagicVec], g1: f64, extra: &DiagRows) -> LpProblem {
    let n = rs.len();
    let nv = n + PAIRS.len();
    let w: Vec<f64> = rs.iter().map(|r| r.off_identity_weight()).collect();
    let wscale = col_scale(w.iter().copied());
    let mut c = vec![0.0; nv];
    for j in 0..n {
        c[j] = w[j] / wscale;
    }
    let mut a_ub = Vec::new();
    let mut b_ub = Vec::new();
    let mut mass_row = vec![0.0; nv];
    for (q, &(k, l)) in PAIRS.iter().enumerate() {
        let s = col_scale(rs.iter().map(|r| r.r[k] * r.r[l]));
        let mut up = vec![0.0; nv];
        let mut dn = vec![0.0; nv];
        for (j, r) in rs.iter().enumerate() {
            up[j] = r.r[k] * r.r[l] / s;
            dn[j] = -up[j];
        }
        up[n + q] = -1.0;
        dn[n + q] = -1.0;
        a_ub.push(up);
        b_ub.push(0.0);
        a_ub.push(dn);
        b_ub.push(0.0);
        // Both (k,l) and (l,k) count toward the mass.
        mass_row[n + q] = 2.0 * s;
    }
    a_ub.push(mass_row);
    b_ub.push(g1);
    match *extra {
        DiagRows::None => {}
        DiagRows::Depol(g2) => {
            for &(k, l) in &DIAG_PAIRS {
                let d: Vec<f64> = rs.iter().map(|r| r.r[k] * r.r[k] - r.r[l] * r.r[l]).collect();
                let s = col_scale(d.iter().copied());
                let mut up = vec![0.0; nv];
                let mut dn = vec![0.0; nv];
                for j in 0..n {
                    up[j] = d[j] / s;
                    dn[j] = -d[j] / s;
                }
                a_ub.push(up);
                b_ub.push(g2 / s);
                a_ub.push(dn);
                b_ub.push(g2 / s);
            }
        }
        DiagRows::Xy(g2) => {
            let s = col_scale(rs.iter().map(|r| r.r[1] * r.r[1]));
            let mut row = vec![0.0; nv];
            for (j, r) in rs.iter().enumerate() {
                row[j] = r.r[1] * r.r[1] / s;
            }
            a_ub.push(row);
            b_ub.push(g2 / s);
        }
    }
    let mut a_eq = vec![vec![0.0; nv]];
    for x in a_eq[0].iter_mut().take(n) {
        *x = 1.0;
    }
    LpProblem { c, a_eq, b_eq: vec![1.0], a_ub, b_ub, bounds: Vec::new() }
}

fn solve_rung(rs: &[MagicVec], g1: f64, extra: &DiagRows) -> Option<CraftSolution> {
    // The LP runs at half the rung so that rounding in the recovered weights
    // stays inside the rung when the mass is measured.
    let sol = solve_lp(&build_lp(rs, 0.5 * g1, extra)).ok()?;
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let s = CraftSolution::from_weights(sol.x[..rs.len()].to_vec(), rs, CraftStatus::Solved);
    (s.offdiag_mass <= g1).then_some(s)
}

fn depol_spread(chi: &ChiDiag) -> f64 {
    let v = [chi.xx, chi.yy, chi.zz];
    DIAG_PAIRS.iter().map(|&(k, l)| (v[k - 1] - v[l - 1]).abs()).fold(0.0, f64::max)
}

fn g2_satisfied(kind: ConstraintKind, chi: &ChiDiag, g2: f64) -> bool {
    match kind {
        ConstraintKind::Depol => depol_spread(chi) <= g2,
        ConstraintKind::Xy => chi.zz <= g2,
        _ => true,
    }
}

fn g2_rungs(policy: &G2Policy, cap: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut g = policy.start;
    while g < cap && policy.factor > 1.0 {
        out.push(g);
        g *= policy.factor;
    }
    out.push(cap);
    out
}

/// Constrained mixing over bare magic vectors relative to the target.
pub fn craft_vectors(rs: &[MagicVec], fam: &ConstraintFamily) -> Result<CraftSolution, CraftError> {
    if rs.len() < 2 {
        return Err(CraftError::TooFewCandidates { got: rs.len() });
    }
    if fam.kind == ConstraintKind::None {
        return Err(CraftError::UnconstrainedFamily);
    }
    if fam.ladder.windows(2).any(|w| w[0] >= w[1]) || fam.ladder.iter().any(|g| !(*g > 0.0)) {
        return Err(CraftError::BadLadder);
    }
    for &g1 in &fam.ladder {
        let Some(pauli) = solve_rung(rs, g1, &DiagRows::None) else { continue };
        let mut found = None;
        if fam.kind == ConstraintKind::Pauli {
            found = Some((pauli, None));
        } else {
            let cap = fam.g2_policy.rel_cap * pauli.chi.rate();
            for g2 in g2_rungs(&fam.g2_policy, cap) {
                let extra = match fam.kind {
                    ConstraintKind::Depol => DiagRows::Depol(g2),
                    _ => DiagRows::Xy(g2),
                };
                if let Some(s) = solve_rung(rs, g1, &extra) {
                    if g2_satisfied(fam.kind, &s.chi, g2) {
                        found = Some((s, Some(g2)));
                        break;
                    }
                }
            }
        }
        if let Some((mut s, g2)) = found {
            s.g1_used = Some(g1);
            s.g2_used = g2;
            let g2_ok = g2.map_or(true, |g| g <= fam.g2_policy.rel_cap * s.chi.rate());
            s.success = g1 <= G1_SUCCESS && fam.d_bound.map_or(true, |b| s.d_diamond <= b) && g2_ok;
            return Ok(s);
        }
    }
    Ok(CraftSolution::failure(rs.len(), rs))
}

pub fn craft(cands: &[Candidate], fam: &ConstraintFamily) -> Result<CraftSolution, CraftError> {
    let rs: Vec<MagicVec> = cands.iter().map(|c| c.r_rel).collect();
    craft_vectors(&rs, fam)
}
