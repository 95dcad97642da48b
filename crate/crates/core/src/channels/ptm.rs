use super::{ChannelError, C64};
use nalgebra::DMatrix;

/// n-qubit Pauli string stored as a monomial matrix: row k has its single
/// nonzero entry `vals[k]` in column `cols[k]`.
#[derive(Clone, Debug)]
pub struct PauliString {
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl PauliString {
    /// Pauli string number `idx` in base-4 (I, X, Y, Z), qubit 0 most significant.
    pub fn new(n: usize, idx: usize) -> Self {
        let d = 1usize << n;
        let one = C64::new(1.0, 0.0);
        let im = C64::new(0.0, 1.0);
        let mut cols = vec![0usize; d];
        let mut vals = vec![one; d];
        for (row, (col, val)) in cols.iter_mut().zip(vals.iter_mut()).enumerate() {
            for q in 0..n {
                let p = (idx >> (2 * (n - 1 - q))) & 3;
                let bit = (row >> (n - 1 - q)) & 1;
                let (cbit, v) = match p {
                    0 => (bit, one),
                    1 => (bit ^ 1, one),
                    2 => (bit ^ 1, if bit == 0 { -im } else { im }),
                    _ => (bit, if bit == 0 { one } else { -one }),
                };
                *col |= cbit << (n - 1 - q);
                *val *= v;
            }
        }
        PauliString { cols, vals }
    }

    pub fn dense(&self) -> DMatrix<C64> {
        let d = self.cols.len();
        let mut m = DMatrix::zeros(d, d);
        for (k, (c, v)) in self.cols.iter().zip(&self.vals).enumerate() {
            m[(k, *c)] = *v;
        }
        m
    }

    /// A·P.
    pub fn right_mul(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(a.nrows(), a.ncols());
        for (k, (c, v)) in self.cols.iter().zip(&self.vals).enumerate() {
            for r in 0..a.nrows() {
                out[(r, *c)] = a[(r, k)] * v;
            }
        }
        out
    }

    /// Tr[P·A].
    pub fn trace_with(&self, a: &DMatrix<C64>) -> C64 {
        self.cols.iter().zip(&self.vals).enumerate().map(|(k, (c, v))| v * a[(*c, k)]).sum()
    }
}

pub fn pauli_label(n: usize, idx: usize) -> String {
    (0..n).map(|q| ['I', 'X', 'Y', 'Z'][(idx >> (2 * (n - 1 - q))) & 3]).collect()
}

/// Pauli transfer matrix Γ_ij = Tr[P_i E(P_j)] / 2ⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptm {
    pub n_qubits: usize,
    pub gamma: DMatrix<f64>,
}

impl Ptm {
    pub fn identity(n: usize) -> Self {
        Ptm { n_qubits: n, gamma: DMatrix::identity(1 << (2 * n), 1 << (2 * n)) }
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }
}

fn qubits_of_dim(d: usize) -> Result<usize, ChannelError> {
    if d.is_power_of_two() && d >= 2 {
        Ok(d.trailing_zeros() as usize)
    } else {
        Err(ChannelError::DimensionMismatch { expected: d.next_power_of_two().max(2), got: d })
    }
}

pub fn ptm_of_kraus(kraus: &[DMatrix<C64>]) -> Result<Ptm, ChannelError> {
    let d = kraus.first().map(|k| k.nrows()).unwrap_or(0);
    let n = qubits_of_dim(d)?;
    for k in kraus {
        if k.nrows() != d || k.ncols() != d {
            return Err(ChannelError::DimensionMismatch { expected: d, got: k.nrows().max(k.ncols()) });
        }
    }
    let mut sum = DMatrix::<C64>::zeros(d, d);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    let dev = super::max_abs_c((sum - DMatrix::identity(d, d)).iter());
    if dev > 1e-9 {
        return Err(ChannelError::NotCptp { deviation: dev });
    }
    let dim = d * d;
    let paulis: Vec<PauliString> = (0..dim).map(|i| PauliString::new(n, i)).collect();
    let adj: Vec<DMatrix<C64>> = kraus.iter().map(|k| k.adjoint()).collect();
    let mut gamma = DMatrix::zeros(dim, dim);
    for (j, pj) in paulis.iter().enumerate() {
        let mut img = DMatrix::<C64>::zeros(d, d);
        for (k, kd) in kraus.iter().zip(&adj) {
            img += pj.right_mul(k) * kd;
        }
        for (i, pi) in paulis.iter().enumerate() {
            gamma[(i, j)] = pi.trace_with(&img).re / d as f64;
        }
    }
    Ok(Ptm { n_qubits: n, gamma })
}

pub fn ptm_of_unitary(u: &DMatrix<C64>) -> Result<Ptm, ChannelError> {
    let d = u.nrows();
    let dev = super::max_abs_c((u.adjoint() * u - DMatrix::identity(d, d)).iter());
    if dev > 1e-9 {
        return Err(ChannelError::NotUnitary { deviation: dev });
    }
    ptm_of_kraus(std::slice::from_ref(u))
}

/// PTM of `a ∘ b` (apply `b` first).
pub fn compose_ptm(a: &Ptm, b: &Ptm) -> Result<Ptm, ChannelError> {
    if a.dim() != b.dim() {
        return Err(ChannelError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(Ptm { n_qubits: a.n_qubits, gamma: &a.gamma * &b.gamma })
}

/// Inverse of a unitary channel, which is the transpose of its PTM.
pub fn invert_unitary_ptm(u: &Ptm) -> Result<Ptm, ChannelError> {
    let dev = (u.gamma.transpose() * &u.gamma - DMatrix::identity(u.dim(), u.dim())).abs().max();
    if dev > 1e-8 {
        return Err(ChannelError::NotOrthogonal { deviation: dev });
    }
    Ok(Ptm { n_qubits: u.n_qubits, gamma: u.gamma.transpose() })
}

/// Unnormalized Choi matrix Σ_kl |k⟩⟨l| ⊗ E(|k⟩⟨l|) of the channel with this PTM.
pub fn ptm_choi(p: &Ptm) -> DMatrix<C64> {
    let n = p.n_qubits;
    let d = 1usize << n;
    let paulis: Vec<PauliString> = (0..d * d).map(|i| PauliString::new(n, i)).collect();
    let mut j = DMatrix::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            // |k⟩⟨l| = Σ_j a_j P_j with a_j = P_j[l][k] / d.
            let mut a = vec![C64::new(0.0, 0.0); d * d];
            for (idx, ps) in paulis.iter().enumerate() {
                if ps.cols[l] == k {
                    a[idx] = ps.vals[l] / d as f64;
                }
            }
            for (i, pi) in paulis.iter().enumerate() {
                let b: C64 = a.iter().enumerate().map(|(jj, aj)| aj * p.gamma[(i, jj)]).sum();
                if b.norm() == 0.0 {
                    continue;
                }
                for r in 0..d {
                    j[(k * d + r, l * d + pi.cols[r])] += b * pi.vals[r];
                }
            }
        }
    }
    j
}

/// Diamond-type distance between the Pauli-normalized channel D⁻¹Γ and the
/// identity, measured as ‖ΔJ‖₁ / (2·2ⁿ) on Choi matrices.
pub fn nonpauli_residual_ptm(p: &Ptm) -> Result<f64, ChannelError> {
    let dim = p.dim();
    let mut g = p.gamma.clone();
    for i in 0..dim {
        let di = p.gamma[(i, i)];
        if di.abs() < 1e-12 {
            return Err(ChannelError::SingularPauliPart { index: i, value: di });
        }
        g.row_mut(i).scale_mut(1.0 / di);
    }
    let normalized = Ptm { n_qubits: p.n_qubits, gamma: g - DMatrix::identity(dim, dim) };
    // Choi is linear in Γ, so the difference can be formed directly.
    let dj = ptm_choi(&normalized);
    let herm = (&dj + dj.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigenvalues();
    let d = (1usize << p.n_qubits) as f64;
    Ok(eig.iter().map(|x| x.abs()).sum::<f64>() / (2.0 * d))
}
