//! Unconstrained mixing by Kelley's cutting-plane method.
//!
//! f(p) = ½‖e₁e₁ᵀ − M(p)‖₁ is convex and piecewise smooth in p. For any W
//! with ‖W‖ ≤ 1, ½Tr[W·D(p)] is a linear minorant of f that is tight when W
//! is the sign matrix of D(p), so the master LP min z s.t. z ≥ cuts(p) yields
//! a certified lower bound at every iteration.

use super::craft::{CraftSolution, CraftStatus};
use super::lp::{solve_lp, LpProblem, LpStatus};
use super::CraftError;
use crate::channels::{identity_residual, MagicVec};
use crate::shiftgen::Candidate;
use nalgebra::{Matrix4, SymmetricEigen};

pub const GAP_TOL: f64 = 1e-11;
pub const MAX_CUTS: usize = 200;

/// f(p) and the sign matrix of the residual.
fn evaluate(p: &[f64], rs: &[MagicVec]) -> (f64, Matrix4<f64>) {
    let d = identity_residual(p, rs);
    let eig = SymmetricEigen::new((d + d.transpose()) * 0.5);
    let mut w = Matrix4::zeros();
    let mut f = 0.0;
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        f += lam.abs();
        let sign = if *lam > 0.0 {
            1.0
        } else if *lam < 0.0 {
            -1.0
        } else {
            0.0
        };
        let v = eig.eigenvectors.column(i);
        w += v * v.transpose() * sign;
    }
    (0.5 * f, w)
}

/// Cut coefficients hⱼ = ½Tr[W·Dⱼ] with Dⱼ = e₁e₁ᵀ − r⁽ʲ⁾r⁽ʲ⁾ᵀ.
fn cut(w: &Matrix4<f64>, rs: &[MagicVec]) -> Vec<f64> {
    rs.iter()
        .map(|r| {
            let v = r.r;
            let mut off = 0.0;
            for k in 1..4 {
                off += 2.0 * w[(0, k)] * v[0] * v[k];
                for l in 1..4 {
                    off += w[(k, l)] * v[k] * v[l];
                }
            }
            0.5 * (w[(0, 0)] * r.off_identity_weight() - off)
        })
        .collect()
}

struct Master {
    n: usize,
    scale: f64,
    cuts: Vec<Vec<f64>>,
}

impl Master {
    /// Lower bound and its minimizer.
    fn solve(&self) -> Result<(f64, Vec<f64>), CraftError> {
        let n = self.n;
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let a_ub = self
            .cuts
            .iter()
            .map(|h| {
                let mut row: Vec<f64> = h.iter().map(|x| x / self.scale).collect();
                row.push(-1.0);
                row
            })
            .collect::<Vec<_>>();
        let b_ub = vec![0.0; a_ub.len()];
        let mut eq = vec![1.0; n + 1];
        eq[n] = 0.0;
        let prob = LpProblem { c, a_eq: vec![eq], b_eq: vec![1.0], a_ub, b_ub, bounds: Vec::new() };
        let sol = solve_lp(&prob)?;
        if sol.status != LpStatus::Optimal {
            return Err(CraftError::MasterFailed(format!("{:?}", sol.status)));
        }
        let p = sol.x[..n].to_vec();
        Ok((sol.objective * self.scale, p))
    }
}

/// Minimizes the true distance over all mixtures of `rs`.
pub fn uncrafted_vectors(rs: &[MagicVec]) -> Result<CraftSolution, CraftError> {
    let n = rs.len();
    if n == 0 {
        return Err(CraftError::TooFewCandidates { got: 0 });
    }
    let mut best_p = vec![0.0; n];
    let mut best_f = f64::INFINITY;
    let mut cuts = Vec::with_capacity(MAX_CUTS);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let (f, w) = evaluate(&e, rs);
        cuts.push(cut(&w, rs));
        if f < best_f {
            best_f = f;
            best_p = e;
        }
    }
    let mut master = Master { n, scale: best_f.max(f64::MIN_POSITIVE), cuts };
    let mut lower = 0.0;
    let mut status = CraftStatus::NoConvergence;
    while master.cuts.len() < MAX_CUTS.max(n + 1) {
        let (lb, p) = match master.solve() {
            Ok(x) => x,
            Err(_) => break,
        };
        lower = f64::max(lower, lb);
        if best_f - lower <= GAP_TOL {
            status = CraftStatus::Solved;
            break;
        }
        let (f, w) = evaluate(&p, rs);
        if f < best_f {
            best_f = f;
            best_p = p.clone();
        }
        if best_f - lower <= GAP_TOL {
            status = CraftStatus::Solved;
            break;
        }
        master.cuts.push(cut(&w, rs));
    }
    if n == 1 {
        status = CraftStatus::Solved;
        lower = best_f;
    }
    let mut s = CraftSolution::from_weights(best_p, rs, status);
    s.gap = Some((s.d_diamond - lower).max(0.0));
    s.success = status == CraftStatus::Solved;
    Ok(s)
}

pub fn uncrafted_mix(cands: &[Candidate]) -> Result<CraftSolution, CraftError> {
    let rs: Vec<MagicVec> = cands.iter().map(|c| c.r_rel).collect();
    uncrafted_vectors(&rs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{magic_vec, rx, rz, unitary_diamond, Mat2};

    #[test]
    fn rotation_pair_closed_form() {
        let d: f64 = 0.03;
        let rs = [magic_vec(&rz(d)).unwrap(), magic_vec(&rz(-d)).unwrap()];
        let s = uncrafted_vectors(&rs).unwrap();
        assert_eq!(s.status, CraftStatus::Solved);
        assert!((s.p[0] - 0.5).abs() < 1e-9);
        assert!((s.d_diamond - (d / 2.0).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn single_candidate_is_unitary_distance() {
        let u = rz(0.1) * rx(0.05);
        let s = uncrafted_vectors(&[magic_vec(&u).unwrap()]).unwrap();
        let d = unitary_diamond(&Mat2::identity(), &u).unwrap();
        assert!((s.d_diamond - d).abs() < 1e-14);
        assert_eq!(s.gap, Some(0.0));
    }

    #[test]
    fn cuts_are_tight_at_their_point() {
        let rs: Vec<MagicVec> =
            [rz(0.02), rx(-0.01) * rz(0.01), rz(-0.015) * rx(0.02)].iter().map(|u| magic_vec(u).unwrap()).collect();
        let p = [0.2, 0.5, 0.3];
        let (f, w) = evaluate(&p, &rs);
        let h = cut(&w, &rs);
        let lin: f64 = h.iter().zip(&p).map(|(a, b)| a * b).sum();
        assert!((lin - f).abs() < 1e-15, "{lin} {f}");
        // Minorant elsewhere.
        let q = [0.6, 0.1, 0.3];
        let (fq, _) = evaluate(&q, &rs);
        let lq: f64 = h.iter().zip(&q).map(|(a, b)| a * b).sum();
        assert!(lq <= fq + 1e-16);
    }
}
