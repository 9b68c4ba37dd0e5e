//! Bergman kernels, Toeplitz operators and `L^p` phase diagrams on
//! generalized Hartogs triangles.
//!
//! Start with [`domain::DomainSpec`]; the guide in `book/` walks through
//! every module.

pub mod domain;
pub mod error;
pub mod quadrature;
pub mod sampling;
pub mod basis;
pub mod kernel;
pub mod estimates;
pub mod schur;
pub mod toeplitz;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/toeplitz.md")]
    mod toeplitz {}
    #[doc = include_str!("../../../book/src/phase-scan.md")]
    mod phase_scan {}
    #[doc = include_str!("../../../book/src/schur.md")]
    mod schur {}
}
