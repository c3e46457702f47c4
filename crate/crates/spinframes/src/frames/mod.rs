//! Wavelet frames on the sphere: spectral kernels, wavelets and frame
//! elements, the frame operator and its spectral counterpart, bound
//! estimation, and dual-frame reconstruction.

pub mod bounds;
pub mod kernel;
pub mod operator;
pub mod reconstruct;
pub mod spec;

pub use bounds::{frame_bounds_estimate, FrameEstimate};
pub use kernel::{
    frame_element, frame_elements, kernel_eval, kernel_truncation_tail, wavelet, SpectralKernel,
};
pub use operator::{
    analyze_coeffs, coefficient_synthesis, frame_operator_apply, frame_quadratic_form,
    frame_quadratic_forms, q_quadratic_form, spectral_q_apply, FrameCoefficients,
    LevelCoefficients,
};
pub use reconstruct::{reconstruct, Reconstruction};
pub use spec::{FrameSpec, LevelPolicy};
