//! Gauge fields on ℝ⁴ and the Einstein–Cartan conservation forms, evaluated
//! in explicit local sections with exact jets.

pub mod einstein_cartan;
pub mod yang_mills;

pub use einstein_cartan::{
    einstein_equivalence_check, tau_sigma, ConnectionClosure, EinsteinVerdict, FrameSection, SectionFixture,
    SectionResiduals, TauSigma,
};
pub use yang_mills::{
    bpst, conservation_form_residual, curvature, gauge_covariance_residual, linearized_identity_residual,
    topological_charge, ym_residual, GaugePotential,
};
