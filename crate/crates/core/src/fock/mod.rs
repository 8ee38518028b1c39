//! Exact N-boson sector: occupation-number basis over lattice modes,
//! second-quantized Hamiltonian assembly, and unitary propagation.
//!
//! Lattice sites double as single-particle modes with δ-normalized mode
//! functions `e_i / sqrt(h)`, so Fock-space inner products coincide with the
//! discrete L² inner products used elsewhere.

mod basis;
mod evolve;
mod hamiltonian;
mod states;
mod tensor;

pub use basis::{enumerate_basis, enumerate_basis_with_cap, FockBasis, DEFAULT_DIMENSION_CAP};
pub use evolve::{
    evolve_schroedinger, expm_apply, PropagatorOptions, SchroedingerPropagator,
};
pub use hamiltonian::{
    assemble_hamiltonian, HamiltonianBuilder, HamiltonianSpec, SparseHamiltonian,
};
pub use states::{one_defect_state, product_state, ManyBodyState};
pub use tensor::{
    first_quantized_tensor, first_quantized_tensor_with_cap, fock_coefficients_from_tensor,
    FirstQuantizedTensor, DEFAULT_TENSOR_CAP,
};
