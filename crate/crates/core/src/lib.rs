//! Numerical laboratory for the averaging operators attached to
//! one-parameter flows: Fourier-multiplier operators for linear torus
//! flows, difference/averaging operators on the line and circle,
//! Diophantine classification of flow parameters, the real Jordan
//! decomposition, and the conformal Lorentz action on spheres.

pub mod diophantine;
pub mod hp;
pub mod line_flows;
pub mod lorentz;
pub mod multiplier;
