//! Dirichlet characters, L-function evaluation, zeros and sums over zeros.

pub mod afe;
pub mod character;
pub mod euler_maclaurin;
pub mod gamma;
pub(crate) mod incgamma;
pub mod zerofile;
pub mod sums;
pub mod zeros;

use num_complex::Complex64;

pub use character::{
    character_value, enumerate_real_characters, CharacterKey, DirichletCharacter, DirichletGroup,
    PrimitiveCharacter, RealCharacter,
};
pub use zerofile::{load_zeros, save_zeros};
pub use zeros::{extend_zeros, find_zeros, find_zeros_real, zero_count, ZeroSet, ZeroSource};

/// `L(s, chi)`: Euler–Maclaurin near the real axis, the smoothed functional
/// equation elsewhere.
pub fn evaluate_l(chi: &PrimitiveCharacter, s: Complex64) -> crate::Result<Complex64> {
    if s.im.abs() < 2.0 {
        euler_maclaurin::l_value(chi, s)
    } else {
        afe::l_value(chi, s)
    }
}
