//! Estimate which object a person points at in an equirectangular panorama.
//!
//! Stages, in pipeline order:
//!
//! 1. [`gesture`] – locate the user, pick the pointing arm and lift
//!    shoulder/head/fingertip keypoints to a directed great circle.
//! 2. [`scan`] – place perspective views along that circle, back-project
//!    detections made in them, merge duplicates and compute the features
//!    `d, l, c, a, h` per candidate.
//! 3. [`select`] – rank candidates by distance to the circle or by a linear
//!    SVM over standardized features.
//!
//! [`sphere`] and [`projection`] hold the geometry everything else builds on.

// `!(x > 0.0)` is how NaN gets rejected along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod gesture;
pub mod projection;
pub mod scan;
pub mod select;
pub mod sphere;

pub use gesture::{Arm, GestureConfig, GestureError, Keypoint, KeypointName, PersonBox, Skeleton, SkeletonFrame};
pub use projection::{EquirectGrid, LonLatRect, PixelRect, ProjectionError, SphericalFootprint, ViewSpec};
pub use scan::{AreaUnit, Candidate, Detection, FeatureVector, FreqTable, ScanConfig, ScanError, Stepping};
pub use select::{Ranking, SelectError, Standardizer, SvcParams, SvmModel};
pub use sphere::{DirectedPointing, GreatCircle, LonLat, SphereDir, SphereError};
