//! Discrete vector calculus on a [`Grid`](crate::geometry::Grid), norms,
//! time histories and the identity/inequality checks.

pub mod checks;
pub mod fields;
pub mod history;
pub mod jets;
pub mod norms;
pub mod ops;

pub use checks::*;
pub use fields::{normal_component, surface_curl, tangential_part, ScalarField, VectorField};
pub use history::{cumulative_trapezoid, trapezoid, Combine, FieldHistory};
pub use jets::{jets_of, scalar_jets, vector_jet_summary, vector_jets, Jet, VectorJet};
pub use norms::{grad_l2, h1, h2, l2, l2_values, n_norm, SobolevField};
pub use ops::{advect, curl2d, curl_scalar, div, grad, laplacian_scalar, laplacian_vector};
