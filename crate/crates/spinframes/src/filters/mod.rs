//! Filter profiles and the admissibility (scale-sum) bounds they satisfy.

pub mod daubechies;
pub mod profile;

pub use daubechies::{
    daubechies_bounds, default_j_range, scale_sum_auto, squared_scale_sum, DaubechiesBounds,
    ScaleSum,
};
pub use profile::{DecayInfo, FilterProfile};
