//! The single-particle problem of the Jordan–Wigner fermionized chain.
//!
//! With `A` symmetric tridiagonal (diagonal `β`, off-diagonal `α`) and `B`
//! antisymmetric (superdiagonal `γ`), the chain is governed by
//! `H = [[A, B], [-B, -A]]`. Eigenvectors `[ψ; φ]` at `+Λ` pair with `[φ; ψ]` at
//! `-Λ`, and `T = [[Ψ, Φ], [Φ, Ψ]]` is orthogonal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainSpec, PQTable};
use crate::linalg::{
    dominant_subspace, dot, jacobi_eigen, max_principal_angle_sine, norm, symmetric_eigen, LinalgError, Matrix,
};

/// Largest `N + 1` accepted by [`many_body_spectrum`].
pub const MANY_BODY_CAP: usize = 24;
/// Oracle agreement for single-particle energies.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// `±` symmetry of the spectrum of `H`, relative to `max(1, max|eig|)`.
pub const PARITY_TOL: f64 = 1e-10;
/// `‖TᵀT - I‖_max` and the eigen-residual of the `T` columns.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
pub const COSINE_TOL: f64 = 1e-8;
pub const PRINCIPAL_ANGLE_TOL: f64 = 1e-6;
/// Values below this fraction of the spectral scale count as zero in relative
/// comparisons and as zero modes in the pairing.
pub const ZERO_FLOOR: f64 = 1e-6;
const ZERO_MODE_TOL: f64 = 1e-9;
/// The Gram matrix is diagonalized to near machine precision: an eigenvector
/// error `δ` next to a zero singular value shows up as `σ ≈ δ · ‖A + B‖`.
const GRAM_OFFDIAG_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FreeFermionError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{what} needs N + 1 = {sites} ≤ {cap}")]
    SizeCapExceeded { what: &'static str, sites: usize, cap: usize },
    #[error("zero-mode subspaces of A + B and A - B could not be paired")]
    ZeroModePairing,
}

/// `|x - y| / max(|x|, |y|, ZERO_FLOOR · scale)`.
pub fn relative_gap(x: f64, y: f64, scale: f64) -> f64 {
    let denom = x.abs().max(y.abs()).max(ZERO_FLOOR * scale);
    if denom == 0.0 {
        0.0
    } else {
        (x - y).abs() / denom
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeFermionSystem {
    a: Matrix,
    b: Matrix,
    h: Matrix,
}

impl FreeFermionSystem {
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn sites(&self) -> usize {
        self.a.rows()
    }
}

pub fn assemble(chain: &ChainSpec) -> FreeFermionSystem {
    let n = chain.sites();
    let mut a = Matrix::diagonal(chain.beta());
    let mut b = Matrix::zeros(n, n);
    for j in 0..chain.n() {
        a[(j, j + 1)] = chain.alpha()[j];
        a[(j + 1, j)] = chain.alpha()[j];
        b[(j, j + 1)] = chain.gamma()[j];
        b[(j + 1, j)] = -chain.gamma()[j];
    }
    let mut h = Matrix::zeros(2 * n, 2 * n);
    h.set_block(0, 0, &a);
    h.set_block(0, n, &b);
    h.set_block(n, 0, &b.scale(-1.0));
    h.set_block(n, n, &a.scale(-1.0));
    FreeFermionSystem { a, b, h }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Nonnegative single-particle energies, ascending.
    pub lambda_numeric: Vec<f64>,
    pub psi: Matrix,
    pub phi: Matrix,
    pub t: Matrix,
    /// Full spectrum of `H`, ascending.
    pub h_eigenvalues: Vec<f64>,
    /// Number of `Λ` treated as zero modes.
    pub zero_modes: usize,
    pub sweeps: usize,
}

impl SpectralData {
    pub fn sites(&self) -> usize {
        self.lambda_numeric.len()
    }

    /// `ψ_j - φ_j`, compared with the analytic `P` column.
    pub fn difference(&self, j: usize) -> Vec<f64> {
        self.psi.column(j).iter().zip(self.phi.column(j)).map(|(p, f)| p - f).collect()
    }

    /// `ψ_j + φ_j`, compared with the analytic `Q` column.
    pub fn sum(&self, j: usize) -> Vec<f64> {
        self.psi.column(j).iter().zip(self.phi.column(j)).map(|(p, f)| p + f).collect()
    }

    pub fn spectral_scale(&self) -> f64 {
        self.h_eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `‖TᵀT - I‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.t.rows();
        self.t.transpose().matmul(&self.t).sub(&Matrix::identity(n)).max_abs()
    }

    /// Worst `‖H v - (±Λ) v‖_∞` over all columns of `T`, divided by `max(1, ‖H‖_max)`.
    pub fn eigen_residual(&self, sys: &FreeFermionSystem) -> f64 {
        let n = self.sites();
        let scale = sys.h.max_abs().max(1.0);
        let mut worst: f64 = 0.0;
        for j in 0..2 * n {
            let v = self.t.column(j);
            let lam = if j < n { self.lambda_numeric[j] } else { -self.lambda_numeric[j - n] };
            let hv = sys.h.matvec(&v);
            for (x, y) in hv.iter().zip(&v) {
                worst = worst.max((x - lam * y).abs());
            }
        }
        worst / scale
    }

    /// Worst `|e_k + e_{2n-1-k}|` over the sorted spectrum of `H`, relative to
    /// `max(1, max|e|)`.
    pub fn parity_defect(&self) -> f64 {
        let e = &self.h_eigenvalues;
        let m = e.len();
        let worst = (0..m).map(|k| (e[k] + e[m - 1 - k]).abs()).fold(0.0, f64::max);
        worst / self.spectral_scale().max(1.0)
    }
}

/// Make the largest-magnitude entry of `primary` positive (lowest index on ties),
/// falling back to `secondary` when `primary` vanishes.
fn sign_fix(primary: &mut [f64], secondary: &mut [f64]) {
    let pick = |v: &[f64]| {
        let max = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        if max == 0.0 {
            return None;
        }
        v.iter().position(|x| x.abs() >= max * (1.0 - 1e-12)).map(|i| v[i])
    };
    let lead = pick(primary).filter(|_| norm(primary) > 1e-12 * (norm(primary) + norm(secondary))).or_else(|| pick(secondary));
    if lead.is_some_and(|x| x < 0.0) {
        primary.iter_mut().chain(secondary.iter_mut()).for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of `H` repackaged into `(Λ, Ψ, Φ, T)`.
///
/// Positive eigenpairs are taken as they come from the Jacobi solver. At
/// `Λ = 0` the pairing `[ψ; φ] ↔ [φ; ψ]` is not fixed by `H`; there the null
/// space is split through `s = ψ + φ ∈ ker(A + B)` and `d = ψ - φ ∈ ker(A - B)`,
/// orthonormal bases of which give `ψ = (s + d)/2`, `φ = (s - d)/2`. Each `d`
/// is signed so that `s · d ≥ 0`, which minimizes `‖φ‖` for the chosen `s`.
pub fn eigendecompose(sys: &FreeFermionSystem) -> Result<SpectralData, FreeFermionError> {
    let n = sys.sites();
    let eig = symmetric_eigen(&sys.h)?;
    let values = eig.values.clone();
    let scale = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let zero_modes = values[n..].iter().filter(|v| v.abs() <= ZERO_MODE_TOL * scale).count();

    let mut psi_cols = Vec::with_capacity(n);
    let mut phi_cols = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);

    if zero_modes > 0 {
        let null: Vec<Vec<f64>> = (n - zero_modes..n + zero_modes).map(|k| eig.vector(k)).collect();
        let sums: Vec<Vec<f64>> = null.iter().map(|v| (0..n).map(|i| v[i] + v[n + i]).collect()).collect();
        let diffs: Vec<Vec<f64>> = null.iter().map(|v| (0..n).map(|i| v[i] - v[n + i]).collect()).collect();
        let s_basis = dominant_subspace(&sums, zero_modes)?;
        let d_basis = dominant_subspace(&diffs, zero_modes)?;
        if s_basis.len() != zero_modes || d_basis.len() != zero_modes {
            return Err(FreeFermionError::ZeroModePairing);
        }
        for (s, d) in s_basis.iter().zip(&d_basis) {
            let sign = if dot(s, d) < 0.0 { -1.0 } else { 1.0 };
            let mut psi: Vec<f64> = s.iter().zip(d).map(|(x, y)| 0.5 * (x + sign * y)).collect();
            let mut phi: Vec<f64> = s.iter().zip(d).map(|(x, y)| 0.5 * (x - sign * y)).collect();
            sign_fix(&mut psi, &mut phi);
            psi_cols.push(psi);
            phi_cols.push(phi);
            lambda.push(0.0);
        }
    }
    for k in n + zero_modes..2 * n {
        let v = eig.vector(k);
        let (mut psi, mut phi) = (v[..n].to_vec(), v[n..].to_vec());
        sign_fix(&mut psi, &mut phi);
        psi_cols.push(psi);
        phi_cols.push(phi);
        lambda.push(values[k].max(0.0));
    }

    let psi = Matrix::from_columns(&psi_cols);
    let phi = Matrix::from_columns(&phi_cols);
    let mut t = Matrix::zeros(2 * n, 2 * n);
    t.set_block(0, 0, &psi);
    t.set_block(0, n, &phi);
    t.set_block(n, 0, &phi);
    t.set_block(n, n, &psi);
    Ok(SpectralData { lambda_numeric: lambda, psi, phi, t, h_eigenvalues: values, zero_modes, sweeps: eig.sweeps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularValueReport {
    /// Singular values of `A + B`, ascending.
    pub singular_values: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Singular values of `A + B` from the eigenvectors of `(A + B)ᵀ(A + B)`.
///
/// Each `σ_k` is taken as `‖(A + B) v_k‖` rather than the square root of the
/// Gram eigenvalue, which would only be accurate to `sqrt(ε)` for small `σ`.
pub fn singular_values(sys: &FreeFermionSystem) -> Result<Vec<f64>, FreeFermionError> {
    let m = sys.a.add(&sys.b);
    let gram = m.transpose().matmul(&m);
    let eig = jacobi_eigen(&gram, GRAM_OFFDIAG_TOL)?;
    let mut out: Vec<f64> = (0..m.cols()).map(|k| norm(&m.matvec(&eig.vector(k)))).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Multiset comparison of `singular_values(sys)` with `lambda_numeric`.
pub fn singular_value_check(sys: &FreeFermionSystem, lambda_numeric: &[f64]) -> Result<SingularValueReport, FreeFermionError> {
    let sv = singular_values(sys)?;
    let mut lam = lambda_numeric.to_vec();
    lam.sort_by(f64::total_cmp);
    let scale = lam.iter().chain(&sv).fold(0.0, |m: f64, v| m.max(v.abs()));
    let residual = sv.iter().zip(&lam).map(|(s, l)| relative_gap(*s, *l, scale)).fold(0.0, f64::max);
    Ok(SingularValueReport { singular_values: sv, residual, tolerance: SPECTRUM_TOL, passed: residual <= SPECTRUM_TOL })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManyBodyLevel {
    /// Bit `j` set means mode `j` is in the occupation subset `S`.
    pub mask: u32,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManyBodySpectrum {
    /// All `2^{N+1}` levels sorted by energy, then mask.
    pub levels: Vec<ManyBodyLevel>,
}

impl ManyBodySpectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// `E_S = Σ_{j∈S} Λ_j - Σ_{j∉S} Λ_j` for every subset `S`.
///
/// The empty subset carries `-Σ Λ_j`. Each energy is summed directly over the
/// modes rather than updated incrementally, so equal multisets of `Λ` give
/// bitwise equal energies regardless of subset order.
pub fn many_body_spectrum(lambda: &[f64]) -> Result<ManyBodySpectrum, FreeFermionError> {
    let sites = lambda.len();
    if sites > MANY_BODY_CAP {
        return Err(FreeFermionError::SizeCapExceeded { what: "many-body enumeration", sites, cap: MANY_BODY_CAP });
    }
    let mut levels: Vec<ManyBodyLevel> = (0..1u32 << sites)
        .map(|mask| {
            let energy = lambda
                .iter()
                .enumerate()
                .map(|(j, l)| if mask >> j & 1 == 1 { *l } else { -*l })
                .sum();
            ManyBodyLevel { mask, energy }
        })
        .collect();
    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy).then(x.mask.cmp(&y.mask)));
    Ok(ManyBodySpectrum { levels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCheck {
    /// Analytic indices `j` in this group.
    pub analytic: Vec<usize>,
    /// Matched columns of the numeric data.
    pub numeric: Vec<usize>,
    /// `1 - |cos|` for single modes, `sin θ_max` for degenerate groups; `None`
    /// when the analytic side vanishes and carries no direction.
    pub p_metric: Option<f64>,
    pub q_metric: Option<f64>,
    pub degenerate: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorReport {
    pub modes: Vec<ModeCheck>,
    /// Worst relative gap between matched analytic and numeric `Λ`.
    pub match_gap: f64,
    pub worst_cosine: f64,
    pub worst_angle: f64,
    pub passed: bool,
}

fn group_metric(analytic: &[Vec<f64>], numeric: &[Vec<f64>]) -> Result<Option<f64>, FreeFermionError> {
    let biggest = analytic.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let kept: Vec<Vec<f64>> = analytic.iter().filter(|v| norm(v) > 1e-12 * biggest && biggest > 0.0).cloned().collect();
    if kept.is_empty() {
        return Ok(None);
    }
    if kept.len() == 1 && numeric.len() == 1 {
        let (u, v) = (&kept[0], &numeric[0]);
        let cos = dot(u, v).abs() / (norm(u) * norm(v));
        return Ok(Some(1.0 - cos));
    }
    // Sine of the largest angle between the analytic span and the numeric span;
    // a vanishing analytic column lowers the dimension on that side only.
    let u = dominant_subspace(numeric, numeric.len())?;
    let v = dominant_subspace(&kept, kept.len())?;
    Ok(Some(max_principal_angle_sine(&u, &v)?))
}

/// Greedy nearest-value matching: analytic values are visited in ascending
/// order and each takes the closest numeric value not yet used (lowest index
/// on ties). Returns the numeric index for every analytic index.
pub fn match_modes(analytic: &[f64], numeric: &[f64]) -> Vec<usize> {
    let n = analytic.len().min(numeric.len());
    let mut used = vec![false; numeric.len()];
    let mut matched = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| analytic[x].total_cmp(&analytic[y]).then(x.cmp(&y)));
    for j in order {
        let k = (0..numeric.len())
            .filter(|&k| !used[k])
            .min_by(|&x, &y| {
                let gx = (numeric[x] - analytic[j]).abs();
                let gy = (numeric[y] - analytic[j]).abs();
                gx.total_cmp(&gy).then(x.cmp(&y))
            })
            .expect("at least as many numeric values as analytic ones");
        used[k] = true;
        matched[j] = k;
    }
    matched
}

/// Compare numeric `ψ_j ∓ φ_j` with the analytic `P` and `Q` columns.
///
/// Each analytic `Λ_j` is matched to the nearest unused numeric value. Modes
/// whose `Λ` coincide to `ZERO_FLOOR`-relative precision form one group and
/// are compared subspace to subspace.
pub fn eigenvector_crosscheck(
    spectral: &SpectralData,
    analytic_lambda: &[f64],
    pq: &PQTable,
) -> Result<EigenvectorReport, FreeFermionError> {
    let n = spectral.sites();
    let scale = analytic_lambda.iter().chain(&spectral.lambda_numeric).fold(0.0, |m: f64, v| m.max(v.abs()));
    let matched = match_modes(analytic_lambda, &spectral.lambda_numeric);
    let match_gap = (0..n)
        .map(|j| relative_gap(spectral.lambda_numeric[matched[j]], analytic_lambda[j], scale))
        .fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| analytic_lambda[x].total_cmp(&analytic_lambda[y]).then(x.cmp(&y)));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &j in &order {
        match groups.last_mut() {
            Some(g) if relative_gap(analytic_lambda[*g.last().unwrap()], analytic_lambda[j], scale) <= ZERO_FLOOR => g.push(j),
            _ => groups.push(vec![j]),
        }
    }

    let mut modes = Vec::with_capacity(groups.len());
    let (mut worst_cosine, mut worst_angle): (f64, f64) = (0.0, 0.0);
    for g in groups {
        let numeric: Vec<usize> = g.iter().map(|&j| matched[j]).collect();
        let p_an: Vec<Vec<f64>> = g.iter().map(|&j| pq.p_column(j)).collect();
        let q_an: Vec<Vec<f64>> = g.iter().map(|&j| pq.q_column(j)).collect();
        let p_num: Vec<Vec<f64>> = numeric.iter().map(|&k| spectral.difference(k)).collect();
        let q_num: Vec<Vec<f64>> = numeric.iter().map(|&k| spectral.sum(k)).collect();
        let p_metric = group_metric(&p_an, &p_num)?;
        let q_metric = group_metric(&q_an, &q_num)?;
        let degenerate = g.len() > 1;
        let tol = if degenerate { PRINCIPAL_ANGLE_TOL } else { COSINE_TOL };
        for m in [p_metric, q_metric].into_iter().flatten() {
            if degenerate {
                worst_angle = worst_angle.max(m);
            } else {
                worst_cosine = worst_cosine.max(m);
            }
        }
        let passed = [p_metric, q_metric].iter().flatten().all(|m| *m <= tol);
        modes.push(ModeCheck { analytic: g, numeric, p_metric, q_metric, degenerate, passed });
    }
    let passed = modes.iter().all(|m| m.passed) && match_gap <= SPECTRUM_TOL;
    Ok(EigenvectorReport { modes, match_gap, worst_cosine, worst_angle, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{analytic_spectrum, build_chain, build_pq_table};
    use crate::qracah::{ContiguityFamily, QRacahParams};

    fn single_site(beta: f64) -> ChainSpec {
        ChainSpec::explicit(vec![], vec![beta], vec![]).unwrap()
    }

    #[test]
    fn single_site_system() {
        let sys = assemble(&single_site(2.0));
        assert_eq!(sys.h().as_slice(), &[2.0, 0.0, 0.0, -2.0]);
        let sd = eigendecompose(&sys).unwrap();
        assert_eq!(sd.lambda_numeric, vec![2.0]);
        assert_eq!(sd.psi.as_slice(), &[1.0]);
        assert_eq!(sd.phi.as_slice(), &[0.0]);
    }

    #[test]
    fn negative_field_single_site() {
        let sd = eigendecompose(&assemble(&single_site(-1.5))).unwrap();
        assert_eq!(sd.lambda_numeric, vec![1.5]);
        assert!(sd.orthogonality_defect() < 1e-15);
        assert_eq!(sd.phi.as_slice(), &[1.0]);
    }

    #[test]
    fn xx_chain_is_block_diagonal() {
        let chain = ChainSpec::explicit(vec![1.0, 0.5], vec![0.2, -0.3, 0.4], vec![0.0, 0.0]).unwrap();
        let sys = assemble(&chain);
        assert_eq!(sys.b().max_abs(), 0.0);
        assert_eq!(sys.h().asymmetry(), Some(0.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(sys.h()[(i, 3 + j)], 0.0);
                assert_eq!(sys.h()[(3 + i, 3 + j)], -sys.a()[(i, j)]);
            }
        }
    }

    #[test]
    fn generic_system_structure() {
        let chain = ChainSpec::explicit(vec![0.7, -0.4, 1.1], vec![0.3, -0.9, 0.2, 0.5], vec![0.25, 0.6, -0.3]).unwrap();
        let sys = assemble(&chain);
        let sd = eigendecompose(&sys).unwrap();
        assert!(sd.orthogonality_defect() < ORTHOGONALITY_TOL);
        assert!(sd.eigen_residual(&sys) < ORTHOGONALITY_TOL);
        assert!(sd.parity_defect() < PARITY_TOL);
        assert!(singular_value_check(&sys, &sd.lambda_numeric).unwrap().passed);
        for j in 0..sd.sites() {
            let psi = sd.psi.column(j);
            let lead = psi.iter().cloned().fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn doubly_degenerate_zero_mode() {
        // Two uncoupled sites with zero field give a fourfold null space of H.
        let chain = ChainSpec::explicit(vec![0.0], vec![0.0, 0.0], vec![0.0]).unwrap();
        let sys = assemble(&chain);
        let sd = eigendecompose(&sys).unwrap();
        assert_eq!(sd.zero_modes, 2);
        assert!(sd.orthogonality_defect() < 1e-14);
        assert!(sd.eigen_residual(&sys) < 1e-14);
    }

    #[test]
    fn single_zero_mode_pairing() {
        // Odd-length XX chain without field has one zero mode.
        let chain = ChainSpec::explicit(vec![1.0, 1.0], vec![0.0; 3], vec![0.0, 0.0]).unwrap();
        let sys = assemble(&chain);
        let sd = eigendecompose(&sys).unwrap();
        assert_eq!(sd.zero_modes, 1);
        assert!(sd.orthogonality_defect() < 1e-12);
        assert!(sd.eigen_residual(&sys) < 1e-12);
        assert!((sd.lambda_numeric[2] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn single_site_singular_value() {
        let sys = assemble(&single_site(-3.0));
        assert_eq!(singular_values(&sys).unwrap(), vec![3.0]);
    }

    #[test]
    fn many_body_small_cases() {
        let mb = many_body_spectrum(&[1.0, 0.25]).unwrap();
        assert_eq!(mb.energies(), vec![-1.25, -0.75, 0.75, 1.25]);
        assert_eq!(mb.levels[0].mask, 0);
        assert_eq!(mb.levels[3].mask, 3);
        assert!(matches!(many_body_spectrum(&[0.0; 25]), Err(FreeFermionError::SizeCapExceeded { .. })));
    }

    #[test]
    fn qracah_eigenvectors_match_table() {
        let cases = [
            (ContiguityFamily::Qr24, QRacahParams::new(-1.25, 1.25, -2.11, 6, 0.5).unwrap()),
            (ContiguityFamily::Qr13, QRacahParams::new(-1.0, 1.5, 2.5 * 0.5f64.powi(-4), 5, 0.5).unwrap()),
        ];
        for (fam, p) in cases {
            let chain = build_chain(fam, &p).unwrap();
            let sd = eigendecompose(&assemble(&chain)).unwrap();
            let lam = analytic_spectrum(fam, &p).unwrap().lambda;
            let table = build_pq_table(fam, &p).unwrap();
            let report = eigenvector_crosscheck(&sd, &lam, &table).unwrap();
            assert!(report.passed, "{fam}: {report:?}");
        }
    }
}
