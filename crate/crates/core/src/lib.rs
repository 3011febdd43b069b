//! Geodesic quadrilaterals on manifolds with an affine connection.
//!
//! Walking four geodesic sides of length `s`, turning a right angle by parallel
//! transport at every corner, fails to close up. The size of the gap encodes
//! the torsion at order `s²` and, for symmetric connections, the curvature at
//! order `s³`. This crate measures those gaps numerically, extrapolates them,
//! and rebuilds the torsion and curvature tensors from the measurements.
//!
//! Indices are 0-based in the API; reports print them 1-based.

pub mod analysis;
pub mod chart;
pub mod error;
pub mod expr;
pub mod frame;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod tensor;

pub use analysis::{
    bertrand_puiseux, curvature_from_gaps, estimate_limit, gap_ladder, taylor_p2, torsion_from_gaps,
    GapKind, GapLadder, GapReport, LimitFit,
};
pub use chart::{ConnectionChart, Domain, GeometrySpec};
pub use error::{Error, ErrorClass, Result};
pub use frame::{bracket_numeric, verify_frame_bracket, xi_field, BundleVector, FramePoint};
pub use ode::{flow, geodesic_transport, IntegratorConfig, TransportState};
pub use oracle::{OracleFrame, OracleModel};
pub use quad::{apply_t, apply_t_inv, gap_gi, gap_gii, quad_vertices, FrameTriple, QuadVertices};
pub use tensor::{contract_gamma, curvature_apply, Matrix, Tensor3, Tensor4, Vector, MAX_DIM};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
