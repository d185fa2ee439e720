//! Local-to-nonlocal coupled heat equation solvers.
//!
//! A nonlocal heat equation, discretized with meshfree GMLS quadrature on a
//! point cloud, is coupled to a linear finite-element heat solver through
//! nonlocal Robin-type volume constraints on one side and Dirichlet traces on
//! the other. The coupling is explicit in time; its stability is assessed
//! from the spectrum of the one-step amplification matrix, which also
//! selects the Robin coefficient.
//!
//! The modules follow the pipeline:
//! [`geometry`] builds domains, clouds and meshes; [`kernels`] and [`gmls`]
//! turn integral operators into sparse rows; [`nonlocal`] and [`fem`]
//! assemble and step the two subproblems; [`transfer`] and [`coupler`] glue
//! them together; [`stability`] analyses the coupled iteration; [`harness`]
//! runs the experiments.

pub mod coupler;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod gmls;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod nonlocal;
pub mod stability;
pub mod transfer;
mod quadrature;

pub use error::{Error, Result};
pub use quadrature::gauss_legendre;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/gmls.md")]
    mod gmls {}
    #[doc = include_str!("../../../book/src/nonlocal.md")]
    mod nonlocal {}
    #[doc = include_str!("../../../book/src/fem.md")]
    mod fem {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
