//! Channel representation, validation, tensoring and the projective form
//! `T(rho) = (I - m M(rho)) / (d - m)`.

mod channel;
mod form;
mod map;
mod state;

pub use channel::{
    load_channel, tensor_channels, tensor_channels_with_cap, ChannelFile, Isometry, PptReport,
    QuantumChannel, ValidationFlags, ValidationReport, ValidationResiduals, CP_TOL, KRAUS_CUTOFF,
    TP_TOL,
};
pub use form::{
    extract_projective_form, is_normalized_projection, ProjectionCheck, ProjectiveForm, FORM_TOL,
    INTEGER_TOL,
};
pub use map::LinearMap;
pub use state::{DensityMatrix, STATE_HERMITIAN_TOL, STATE_NEGATIVE_TOL, STATE_TRACE_TOL};
