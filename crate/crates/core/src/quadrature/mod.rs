//! Quadrature on curved faces and curved polyhedra.
//!
//! Face rules keep two paired point lists: parameter points (for parameter-space
//! factors, the surface factor and the normal) and their physical images (for
//! physical-space factors). Volume rules come from the divergence theorem with the
//! field `F = (0, 0, ∫_{z0}^{z} f dt)`, and can be compressed by NNLS.

pub mod face;
pub mod gauss;
pub mod nnls;
pub mod volume;

pub use face::{face_rule, face_rule_with, FaceRuleOptions, SurfaceRule};
pub use gauss::{points_for_degree, GaussLegendre};
pub use nnls::{compress_rule, nnls, NnlsOutcome};
pub use volume::{volume_rule, volume_rule_raw, volume_rule_with, Provenance, VolumeRule, VolumeRuleOptions};
