//! Brute-force spin Hamiltonian for small chains.
//!
//! `H = Σ_j [(α_j + γ_j) σ^x_j σ^x_{j+1} + (α_j - γ_j) σ^y_j σ^y_{j+1}] - Σ_j β_j σ^z_j`
//! is assembled as a dense `2^{N+1}` matrix with site 0 as the leftmost
//! Kronecker factor. Every term is real in the computational basis; the `yy`
//! products are stored as `-(iσ^y) ⊗ (iσ^y)` with `iσ^y = [[0, 1], [-1, 0]]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::ChainSpec;
use crate::freefermion::{assemble, eigendecompose, many_body_spectrum, FreeFermionError};
use crate::linalg::{symmetric_eigen, LinalgError, Matrix};

/// Largest `N` for which the dense Hamiltonian is built (dimension 512).
pub const SPIN_CAP_N: usize = 8;
/// Multiset agreement, relative to the spectral norm of `H`.
pub const JW_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinOracleError {
    #[error("spin oracle needs N ≤ {cap}, got N = {n}")]
    SizeCapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    FreeFermion(#[from] FreeFermionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSpinHamiltonian {
    n: usize,
    matrix: Matrix,
}

impl DenseSpinHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

fn pauli_x() -> Matrix {
    Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
}

fn pauli_iy() -> Matrix {
    Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]])
}

fn pauli_z() -> Matrix {
    Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
}

/// `I ⊗ … ⊗ op_0 ⊗ op_1 ⊗ … ⊗ I` with the operators starting at `site`.
fn embed(ops: &[Matrix], site: usize, sites: usize) -> Matrix {
    let left = Matrix::identity(1 << site);
    let right = Matrix::identity(1 << (sites - site - ops.len()));
    let middle = ops.iter().fold(Matrix::identity(1), |acc, op| acc.kron(op));
    left.kron(&middle).kron(&right)
}

pub fn build_spin_hamiltonian(chain: &ChainSpec) -> Result<DenseSpinHamiltonian, SpinOracleError> {
    let n = chain.n();
    if n > SPIN_CAP_N {
        return Err(SpinOracleError::SizeCapExceeded { n, cap: SPIN_CAP_N });
    }
    let sites = chain.sites();
    let dim = 1 << sites;
    let (x, iy, z) = (pauli_x(), pauli_iy(), pauli_z());
    let mut h = Matrix::zeros(dim, dim);
    for j in 0..n {
        let (a, g) = (chain.alpha()[j], chain.gamma()[j]);
        let xx = embed(&[x.clone(), x.clone()], j, sites);
        let yy = embed(&[iy.clone(), iy.clone()], j, sites).scale(-1.0);
        h = h.add(&xx.scale(a + g)).add(&yy.scale(a - g));
    }
    for (j, b) in chain.beta().iter().enumerate() {
        h = h.sub(&embed(&[z.clone()], j, sites).scale(*b));
    }
    Ok(DenseSpinHamiltonian { n, matrix: h })
}

/// Full spectrum of the dense Hamiltonian, ascending.
pub fn oracle_spectrum(h: &DenseSpinHamiltonian) -> Result<Vec<f64>, SpinOracleError> {
    Ok(symmetric_eigen(&h.matrix)?.values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JwReport {
    pub oracle: Vec<f64>,
    pub free_fermion: Vec<f64>,
    /// Position in the sorted lists of the worst-matched pair.
    pub worst_index: usize,
    pub worst_pair: (f64, f64),
    pub worst_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare the dense spectrum with the many-body spectrum built from the
/// numeric single-particle energies.
pub fn jw_certify(chain: &ChainSpec) -> Result<JwReport, SpinOracleError> {
    let oracle = oracle_spectrum(&build_spin_hamiltonian(chain)?)?;
    let spectral = eigendecompose(&assemble(chain))?;
    let free_fermion = many_body_spectrum(&spectral.lambda_numeric)?.energies();
    let norm = oracle.iter().fold(0.0, |m: f64, e| m.max(e.abs()));
    let tolerance = JW_TOL * norm.max(f64::MIN_POSITIVE);
    let (mut worst_index, mut worst_gap) = (0, 0.0);
    for (k, (a, b)) in oracle.iter().zip(&free_fermion).enumerate() {
        let gap = (a - b).abs();
        if gap > worst_gap {
            worst_index = k;
            worst_gap = gap;
        }
    }
    Ok(JwReport {
        worst_pair: (oracle[worst_index], free_fermion[worst_index]),
        oracle,
        free_fermion,
        worst_index,
        worst_gap,
        tolerance,
        passed: worst_gap <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Matrix elements from bit flips: `xx + yy` flips both bits with amplitude
    /// `2α` on antiparallel and `2γ` on parallel pairs.
    fn bitwise_hamiltonian(chain: &ChainSpec) -> Matrix {
        let sites = chain.sites();
        let dim = 1usize << sites;
        let bit = |s: usize, j: usize| (s >> (sites - 1 - j)) & 1;
        let mut h = Matrix::zeros(dim, dim);
        for s in 0..dim {
            for (j, b) in chain.beta().iter().enumerate() {
                h[(s, s)] -= if bit(s, j) == 0 { *b } else { -*b };
            }
            for j in 0..chain.n() {
                let flipped = s ^ (1 << (sites - 1 - j)) ^ (1 << (sites - 2 - j));
                let amp = if bit(s, j) == bit(s, j + 1) { 2.0 * chain.gamma()[j] } else { 2.0 * chain.alpha()[j] };
                h[(flipped, s)] += amp;
            }
        }
        h
    }

    #[test]
    fn single_site() {
        let chain = ChainSpec::explicit(vec![], vec![2.0], vec![]).unwrap();
        let h = build_spin_hamiltonian(&chain).unwrap();
        assert_eq!(h.matrix().as_slice(), &[-2.0, 0.0, 0.0, 2.0]);
        assert_eq!(oracle_spectrum(&h).unwrap(), vec![-2.0, 2.0]);
    }

    #[test]
    fn two_site_xx() {
        let chain = ChainSpec::explicit(vec![1.0], vec![0.0, 0.0], vec![0.0]).unwrap();
        let h = build_spin_hamiltonian(&chain).unwrap();
        assert_eq!(h.matrix()[(1, 2)], 2.0);
        assert_eq!(h.matrix()[(0, 3)], 0.0);
        let spec = oracle_spectrum(&h).unwrap();
        let expected = [-2.0, 0.0, 0.0, 2.0];
        for (a, b) in spec.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_bitwise_construction() {
        let chain =
            ChainSpec::explicit(vec![0.3, -1.2, 0.8], vec![0.5, -0.1, 0.9, -0.7], vec![-0.4, 0.25, 0.6]).unwrap();
        let h = build_spin_hamiltonian(&chain).unwrap();
        assert!(h.matrix().sub(&bitwise_hamiltonian(&chain)).max_abs() < 1e-14);
        assert_eq!(h.matrix().asymmetry(), Some(0.0));
        assert!(h.matrix().trace().abs() < 1e-13);
        // Dyadic couplings keep every sum exact.
        let dyadic = ChainSpec::explicit(vec![0.5, -1.25], vec![0.75, -0.125, 2.0], vec![0.25, 0.5]).unwrap();
        assert_eq!(build_spin_hamiltonian(&dyadic).unwrap().matrix().trace(), 0.0);
    }

    #[test]
    fn size_cap() {
        let chain = ChainSpec::explicit(vec![0.0; 9], vec![0.0; 10], vec![0.0; 9]).unwrap();
        assert!(matches!(build_spin_hamiltonian(&chain), Err(SpinOracleError::SizeCapExceeded { n: 9, cap: 8 })));
    }

    #[test]
    fn xx_chain_certifies() {
        let chain = ChainSpec::explicit(vec![1.0, 0.4, -0.7], vec![0.2, -0.5, 0.1, 0.9], vec![0.0; 3]).unwrap();
        let report = jw_certify(&chain).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.oracle.len(), 16);
    }
}
