//! Continuous retina model on sampled grids: the center-surround
//! (ganglionic) transform, its Lipschitz constant, and the orientation field
//! of an image with its lift to position × angle space.

mod field;
pub mod io;
mod kernel;
mod lipschitz;
mod orientation;
pub mod suite;
mod transform;

pub use field::ScalarField;
pub use kernel::{build_kernel, CenterSurroundKernel, Polarity};
pub use lipschitz::{
    disc_difference_area, lipschitz_bound, signed_kernel_lipschitz_bound, verify_lipschitz, LipschitzReport,
    LIPSCHITZ_TOLERANCE,
};
pub use orientation::{
    brute_force_orientation, bump, bump_peak, default_grad_tolerance, directional_response, gradient,
    orientation_angle, orientation_field, orientation_lift, OrientationField, OrientationLift,
};
pub use transform::ganglionic_transform;
