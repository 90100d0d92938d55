//! Exactly solvable inhomogeneous XY spin chains built from q-Racah
//! contiguity relations, with numerical certification of every closed form.
//!
//! The pipeline runs bottom-up:
//!
//! * [`qseries`]: q-Pochhammer symbols and terminating `4φ3` sums;
//! * [`qracah`]: q-Racah polynomials, parameter shifts and contiguity coefficients;
//! * [`chain`]: couplings `α, β, γ`, the closed-form spectrum and the `P/Q` eigenvector table;
//! * [`freefermion`]: the `(2N+2)`-dimensional single-particle problem and many-body energies;
//! * [`spinoracle`]: brute-force diagonalization of the spin Hamiltonian for small chains.


pub mod chain;
pub mod cli;
pub mod freefermion;
pub mod linalg;
pub mod qracah;
pub mod qseries;
pub mod spinoracle;

pub use chain::{AnalyticSpectrum, ChainSpec, PQTable};
pub use freefermion::{FreeFermionSystem, ManyBodySpectrum, SpectralData};
pub use qracah::{ContiguityCoefficients, ContiguityFamily, QRacahParams};
