//! Explicit test-function families and inequality certificates.

mod angle;
mod cutoff;
mod picone;
mod report;
mod tensor;
mod window;

pub use angle::{angle_bound, angle_bound_directional};
pub use cutoff::{cutoff_function, cutoff_rayleigh, CutoffFamily, CutoffReport, CutoffRow};
pub use picone::picone_pointwise;
pub use report::{WitnessReport, WitnessRow};
pub use tensor::{bump, bump_seminorm, dilated_bump, tensor_split, TensorFamily, TensorReport, TensorSplitRow};
pub use window::{window_rayleigh, WindowFamily, WindowReport, WindowRow};
