//! Spin-weighted spherical harmonics: evaluation, transforms, the eth
//! calculus, and the SO(3) action.

pub mod eth;
pub mod field;
pub mod rotate;
pub mod sylm;
pub mod transform;
pub mod wigner;

pub use eth::{
    eth_bar_spectral, eth_numeric, eth_spectral, lambda_ls, laplacian_apply, null_space_dim,
    project_null, project_null_complement,
};
pub use field::{SampledField, SpinField};
pub use rotate::rotate_field;
pub use sylm::{eval_field_at, eval_sylm};
pub use transform::{analyze, analyze_with, synthesize, synthesize_with};
pub use wigner::{wigner_d, wigner_d_column, wigner_d_matrices, WignerTable};
