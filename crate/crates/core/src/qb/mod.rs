//! Quasi-banded Hermitian systems `Psi = HH^H + nsr I`.
//!
//! `Psi` is banded with half-width `theta = alpha - 1` except for the two
//! corner triangles created by the cyclic delay. Splitting off the last
//! `theta` rows and columns,
//!
//! ```text
//! [ T  B ]   [ Lc 0 ] [ Uc E ]
//! [ S  C ] = [ V  F ] [ 0  G ]
//! ```
//!
//! leaves a purely banded core `T = Lc Uc`, two thin strips
//! `E = Lc^{-1} B` and `V = S Uc^{-1}`, and a `theta x theta` Schur block
//! `C - V E = F G`. Every piece costs `O(theta^2 MN)` or less.

mod band;
mod lu;

pub use band::{assemble_psi, QuasiBandedMatrix};
pub use lu::{
    factor, factor_with_route, solve_lower, solve_upper, PartitionedLU, StripRoute, PIVOT_RTOL,
};
