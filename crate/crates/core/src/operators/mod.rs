//! Reversible generators, stochastic kernels and the kink spin Hamiltonians,
//! all on explicitly enumerated sectors.
//!
//! Every stochastic object is a [`ReversibleOperator`]. Hamiltonians are
//! symmetric [`CsrMatrix`] values in the occupation basis `ω = m + S` and are
//! related to the generators by the conjugations in [`xxz`] and [`diagonal`].

mod diagonal;
mod exclusion;
mod geometry;
mod projection;
mod reversible;
mod sparse;
pub mod xxz;

pub use diagonal::{
    diagonal_conjugation, diagonal_ground_state, diagonal_hamiltonian, diagonal_profile_generator,
    lifted_diagonal_generator, DiagonalRegion,
};
pub use exclusion::{
    bernoulli_laplace, dirichlet_form, full_generator, full_generator_capped,
    modified_dirichlet_form, modified_form_is_ergodic, modified_generator,
    modified_generator_capped, profile_generator, profile_generator_capped,
};
pub use geometry::{c_minus, c_plus, CellGeometry, SlotPairs};
pub use projection::{
    centred_occupation, class_a_function, k_with_kernel, operator_k, operator_p, StickProjections,
};
pub use reversible::{OperatorCheck, OperatorForm, ReversibleOperator};
pub use sparse::CsrMatrix;
pub use xxz::{
    conjugate_to_profile, delta_of_q, q_of_delta, xxz_chain_hamiltonian, xxz_ground_state,
    Conjugation, XXZParams,
};
