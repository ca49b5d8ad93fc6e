//! Determinantal structure of non-intersecting simple walks on the
//! abc-hexagon (equivalently, uniform lozenge tilings and boxed plane
//! partitions).
//!
//! * [`exactnum`]: exact rationals, factorials, Bareiss determinants.
//! * [`hahn`]: associated Hahn polynomials and terminating `3F2` sums.
//! * [`model`]: hexagon geometry, transition counts, partition function.
//! * [`kernel`]: the extended Hahn kernel and the generic LGV kernel.
//! * [`continuum`]: Hermite and Brownian-motion kernels.
//! * [`limits`]: scaling-limit diagnostics from Hahn to Hermite/Brownian.
//! * [`oracle`]: brute-force enumeration ground truth.
//! * [`sampler`]: exact uniform sampling and lozenge tilings.

pub mod continuum;
pub mod error;
pub mod exactnum;
pub mod hahn;
pub mod kernel;
pub mod limits;
pub mod model;
pub mod oracle;
pub mod report;
pub mod sampler;
pub mod verify;

pub use error::{Error, Result};
pub use exactnum::ExactScalar;
pub use kernel::{GenericKernel, KernelContext, KernelValue};
pub use model::{HexagonSpec, LineGeometry, LinePoint, PathConfiguration};
