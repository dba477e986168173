//! Delay-Doppler (OTFS) and OFDM link simulation with a low-complexity
//! LMMSE receiver.
//!
//! The receiver never forms the `MN x MN` channel or Gram matrices. It
//! assembles `HH^H + nsr I` in quasi-banded form ([`qb`]), factors it with
//! a block-partitioned LU, and applies `A^H H^H Psi^{-1}` as two structured
//! triangular solves, a sparse adjoint, and `M` (or `N`) FFTs
//! ([`equalizer`]). [`oracle`] holds the dense reference used to verify it.

pub mod channel;
pub mod complexity;
pub mod equalizer;
pub mod error;
pub mod fft;
pub mod grid;
pub mod modem;
pub mod oracle;
pub mod qam;
pub mod qb;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
