//! Channel representations: magic-basis vectors and Gram matrices, Choi
//! matrices, χ matrices, Pauli transfer matrices, and distances between them.
//!
//! Single-qubit slot order for magic vectors, Gram and χ matrices is
//! (I, Z, X, Y). Pauli transfer matrices use the tensor order of (I, X, Y, Z)
//! with qubit 0 as the most significant digit.

mod chi;
mod magic;
mod ptm;
mod random;

pub use chi::{gram_to_chi, nonpauli_residual, ptm_from_chi, ChiDiag, ChiMatrix};
pub use magic::{
    check_unitary, choi_of_unitary, choi_vector, half_trace_norm_sym, identity_residual, magic_basis, magic_vec,
    mixture_diamond, unitary_diamond, unitary_diamond_unchecked, unitary_from_magic, GramMatrix, MagicVec,
};
pub use ptm::{
    compose_ptm, invert_unitary_ptm, nonpauli_residual_ptm, pauli_label, ptm_choi, ptm_of_kraus, ptm_of_unitary,
    PauliString, Ptm,
};
pub use random::{haar_unitary, haar_unitary_2, random_unit_vector3};

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("matrix is not unitary (max |U†U − I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("Kraus operators are not trace preserving (max deviation {deviation:e})")]
    NotCptp { deviation: f64 },
    #[error("diagonal PTM entry {index} is {value:e}, cannot invert the Pauli part")]
    SingularPauliPart { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("PTM is not orthogonal (max deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
}

/// Single-qubit Pauli in (I, X, Y, Z) order.
pub fn pauli_1q(i: usize) -> Mat2 {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    match i {
        0 => Mat2::identity(),
        1 => Mat2::new(z, o, o, z),
        2 => Mat2::new(z, -im, im, z),
        3 => Mat2::new(o, z, z, -o),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// Pauli for a magic slot (I, Z, X, Y).
pub fn pauli_of_slot(slot: usize) -> Mat2 {
    pauli_1q([0, 3, 1, 2][slot])
}

/// Rz(θ) = exp(−iθZ/2).
pub fn rz(theta: f64) -> Mat2 {
    let z = C64::new(0.0, 0.0);
    Mat2::new(C64::from_polar(1.0, -theta / 2.0), z, z, C64::from_polar(1.0, theta / 2.0))
}

/// Rx(θ) = exp(−iθX/2).
pub fn rx(theta: f64) -> Mat2 {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    Mat2::new(c, s, s, c)
}

/// Ry(θ) = exp(−iθY/2).
pub fn ry(theta: f64) -> Mat2 {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new((theta / 2.0).sin(), 0.0);
    Mat2::new(c, -s, s, c)
}

pub(crate) fn max_abs_c<'a>(it: impl IntoIterator<Item = &'a C64>) -> f64 {
    it.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
