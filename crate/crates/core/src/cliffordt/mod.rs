//! Exact single-qubit Clifford+T operators: ring arithmetic, Matsumoto–Amano
//! normal form, enumeration and evaluation.
//!
//! A generator string `g₁g₂…g_k` denotes the matrix product `G₁·G₂·…·G_k`,
//! so `g_k` acts first on states.

mod clifford;
mod enumerate;
mod exact;
mod ring;
mod word;

pub use clifford::{clifford_group, CliffordGroup, Coset, N_CLIFFORD, N_CLIFFORD_PHASED};
pub use enumerate::{enumerate_ma, enumerate_ma_dephased, ma_count, syllable_seq_count, syllables_at, MaEnumerator};
pub use exact::ExactUnitary;
pub use ring::RingElem;
pub use word::{concat, eval_exact, eval_float, gate_float, ma_normalize, GateWord, NormalFormBuilder, ParseError, Syllable};
