//! Executable verdicts on the numerical positivity of (1,1)-classes over
//! finite manifold models: cone membership, nef certification through an
//! exact polynomial identity, Monge-Ampère mass concentration on torus
//! grids, and Hodge-frame parallel transport.

pub mod cone;
pub mod error;
pub mod exterior;
pub mod grid;
pub mod hermitian;
pub mod lp;
pub mod mass;
pub mod model;
pub mod poly;
pub mod rational;
pub mod transport;

pub use error::Error;
