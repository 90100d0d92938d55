use serde::{Deserialize, Serialize};

use super::config::{Resolved, RunConfig};
use super::{fmt_f64, CliError, Table, TOOL_VERSION};
use crate::chain::{analytic_spectrum, build_pq_table, parameter_scan, recurrence_residual, ChainError, RECURRENCE_TOL, ROUTE_TOL};
use crate::freefermion::{
    assemble, eigendecompose, eigenvector_crosscheck, many_body_spectrum, match_modes, relative_gap,
    singular_value_check, FreeFermionError, SpectralData, PARITY_TOL,
};
use crate::linalg::symmetric_eigen;
use crate::qracah::{contiguity_coefficients, verify_contiguity, ContiguityFamily, QRacahError, CONSTRAINT_TOL};
use crate::spinoracle::{jw_certify, SpinOracleError, SPIN_CAP_N};

/// `γ` entries below this count as zero for the XX reduction.
const XX_TOL: f64 = 1e-12;

fn regime(e: impl std::fmt::Display) -> CliError {
    CliError::Regime(e.to_string())
}

fn chain_err(e: ChainError) -> CliError {
    match e {
        ChainError::InvalidChain(msg) => CliError::Config(msg),
        other => regime(other),
    }
}

fn qracah_err(e: QRacahError) -> CliError {
    regime(e)
}

fn numeric_err(e: FreeFermionError) -> CliError {
    match e {
        FreeFermionError::SizeCapExceeded { .. } => CliError::Config(e.to_string()),
        other => CliError::Other(other.to_string()),
    }
}

fn spectral(resolved: &Resolved) -> Result<SpectralData, CliError> {
    eigendecompose(&assemble(&resolved.chain)).map_err(numeric_err)
}

fn mode_notes(resolved: &Resolved) -> Vec<String> {
    let mut notes = Vec::new();
    if let Some((family, p)) = &resolved.reference {
        notes.push(format!("family: {family}; a = {:?}, b = {:?}, c = {:?}, q = {:?}, N = {}", p.a, p.b, p.c, p.q, p.n));
    } else {
        notes.push("family: explicit".into());
    }
    if resolved.overridden {
        notes.push("explicit couplings replace the constructed chain; analytic columns refer to the q-Racah block".into());
    }
    notes
}

pub(crate) fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let resolved = cfg.resolve()?;
    let sd = spectral(&resolved)?;
    let numeric = &sd.lambda_numeric;
    let rows = match &resolved.reference {
        Some((family, params)) => {
            let analytic = analytic_spectrum(*family, params).map_err(chain_err)?.lambda;
            let matched = match_modes(&analytic, numeric);
            let scale = analytic.iter().chain(numeric).fold(0.0, |m: f64, v| m.max(v.abs()));
            (0..analytic.len())
                .map(|j| {
                    let num = numeric[matched[j]];
                    vec![j.to_string(), fmt_f64(analytic[j]), fmt_f64(num), fmt_f64(relative_gap(analytic[j], num, scale))]
                })
                .collect()
        }
        None => numeric.iter().enumerate().map(|(j, v)| vec![j.to_string(), String::new(), fmt_f64(*v), String::new()]).collect(),
    };
    Ok(Table {
        command: "spectrum",
        header: vec!["j", "lambda_analytic", "lambda_numeric", "relative_gap"],
        rows,
        notes: mode_notes(&resolved),
    })
}

pub(crate) fn chain_coeffs(cfg: &RunConfig) -> Result<Table, CliError> {
    let resolved = cfg.resolve()?;
    let chain = &resolved.chain;
    let rows = (0..chain.sites())
        .map(|j| {
            let pair = |v: &[f64]| v.get(j).map(|x| fmt_f64(*x)).unwrap_or_default();
            vec![j.to_string(), pair(chain.alpha()), fmt_f64(chain.beta()[j]), pair(chain.gamma())]
        })
        .collect();
    let mut notes = mode_notes(&resolved);
    if chain.is_xx(XX_TOL) {
        notes.push("XX reduction: gamma vanishes identically".into());
    }
    Ok(Table { command: "chain-coeffs", header: vec!["j", "alpha", "beta", "gamma"], rows, notes })
}

pub(crate) fn manybody(cfg: &RunConfig) -> Result<Table, CliError> {
    let resolved = cfg.resolve()?;
    let (lambda, source) = match (&resolved.reference, resolved.overridden) {
        (Some((family, params)), false) => (analytic_spectrum(*family, params).map_err(chain_err)?.lambda, "analytic"),
        _ => (spectral(&resolved)?.lambda_numeric, "numeric"),
    };
    let spectrum = many_body_spectrum(&lambda).map_err(numeric_err)?;
    let rows = spectrum.levels.iter().map(|l| vec![l.mask.to_string(), fmt_f64(l.energy)]).collect();
    let mut notes = mode_notes(&resolved);
    notes.push(format!("single-particle energies: {source}"));
    Ok(Table { command: "manybody", header: vec!["mask", "energy"], rows, notes })
}

pub(crate) fn scan(cfg: &RunConfig) -> Result<Table, CliError> {
    let family = cfg
        .family
        .contiguity()
        .ok_or_else(|| CliError::Config("scan needs family qr13 or qr24".into()))?;
    let block = cfg.scan.ok_or_else(|| CliError::Config("missing `scan` block".into()))?;
    let n = cfg.n.ok_or_else(|| CliError::Config("missing field `N`".into()))?;
    if n == 0 {
        return Err(CliError::Config("field `N` must be at least 1".into()));
    }
    let found = parameter_scan(family, &block.ranges(), n, block.samples, cfg.seed).map_err(chain_err)?;
    let rows = found
        .iter()
        .enumerate()
        .map(|(k, p)| vec![k.to_string(), fmt_f64(p.a), fmt_f64(p.b), fmt_f64(p.c), fmt_f64(p.q), p.n.to_string()])
        .collect();
    Ok(Table {
        command: "scan",
        header: vec!["index", "a", "b", "c", "q", "N"],
        rows,
        notes: vec![
            format!("family: {family}; seed = {}", cfg.seed),
            format!("valid draws: {} of {}", found.len(), block.samples),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

impl CheckRecord {
    fn measured(name: &str, residual: f64, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            residual: Some(residual),
            tolerance: Some(tolerance),
            // NaN residuals fail.
            verdict: Verdict::from_bool(residual <= tolerance),
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tool: String,
    pub config_sha256: String,
    pub family: String,
    pub n: usize,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

/// Every check that applies to the configured chain.
pub fn verify_report(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let resolved = cfg.resolve()?;
    let tol = cfg.tolerances;
    let chain = &resolved.chain;
    let sys = assemble(chain);
    let sd = eigendecompose(&sys).map_err(numeric_err)?;
    let mut checks = Vec::new();

    if let Some((family, params)) = &resolved.reference {
        let report = verify_contiguity(*family, params).map_err(qracah_err)?;
        let rule = match family {
            ContiguityFamily::Qr24 => format!("Φ^{{0,-}} rule: {}", report.selected_rule),
            ContiguityFamily::Qr13 => String::new(),
        };
        checks.push(CheckRecord::measured("contiguity_plus", report.plus_residual, report.tolerance, rule.clone()));
        checks.push(CheckRecord::measured("contiguity_minus", report.minus_residual, report.tolerance, rule));
        let coeffs = contiguity_coefficients(*family, params).map_err(qracah_err)?;
        checks.push(CheckRecord::measured("constraint", coeffs.constraint_residual(), CONSTRAINT_TOL, ""));

        let analytic = analytic_spectrum(*family, params).map_err(chain_err)?;
        checks.push(CheckRecord::measured("spectrum_routes", analytic.route_residual, ROUTE_TOL, "closed form vs sqrt(λ⁺λ⁻)"));
        let table = build_pq_table(*family, params).map_err(chain_err)?;
        if analytic.lambda.len() != sd.sites() {
            return Err(CliError::Config(format!(
                "couplings describe {} sites but the q-Racah block has N + 1 = {}",
                sd.sites(),
                analytic.lambda.len()
            )));
        }
        let cross = eigenvector_crosscheck(&sd, &analytic.lambda, &table).map_err(numeric_err)?;
        checks.push(CheckRecord::measured("analytic_vs_numeric", cross.match_gap, tol.spectrum, "relative, greedy matching"));
        checks.push(CheckRecord::measured(
            "pq_recurrence",
            recurrence_residual(chain, &analytic.lambda, &table),
            RECURRENCE_TOL,
            "",
        ));
        checks.push(CheckRecord::measured("eigenvector_cosine", cross.worst_cosine, tol.cosine, "1 - |cos|, nondegenerate modes"));
        checks.push(CheckRecord::measured("eigenvector_subspace", cross.worst_angle, tol.angle, "sin of largest principal angle"));
    }

    let sv = singular_value_check(&sys, &sd.lambda_numeric).map_err(numeric_err)?;
    checks.push(CheckRecord::measured("singular_values", sv.residual, tol.spectrum, "A + B vs numeric Λ"));
    checks.push(CheckRecord::measured("orthogonality", sd.orthogonality_defect(), tol.orthogonality, "max |TᵀT - I|"));
    checks.push(CheckRecord::measured("eigen_residual", sd.eigen_residual(&sys), tol.orthogonality, "columns of T"));
    checks.push(CheckRecord::measured("spectrum_parity", sd.parity_defect(), PARITY_TOL, "H spectrum under E → -E"));

    if chain.is_xx(XX_TOL) {
        let eig_a = symmetric_eigen(sys.a()).map_err(|e| CliError::Other(e.to_string()))?;
        let mut abs_a: Vec<f64> = eig_a.values.iter().map(|v| v.abs()).collect();
        abs_a.sort_by(f64::total_cmp);
        let scale = abs_a.iter().chain(&sd.lambda_numeric).fold(0.0, |m: f64, v| m.max(*v));
        let gap = abs_a.iter().zip(&sd.lambda_numeric).map(|(x, y)| relative_gap(*x, *y, scale)).fold(0.0, f64::max);
        checks.push(CheckRecord::measured("xx_reduction", gap, tol.spectrum, "Λ vs |eig(A)|"));
    }

    if chain.n() <= SPIN_CAP_N {
        let jw = jw_certify(chain).map_err(|e| match e {
            SpinOracleError::FreeFermion(f) => numeric_err(f),
            other => CliError::Other(other.to_string()),
        })?;
        let scale = jw.oracle.iter().fold(0.0, |m: f64, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
        checks.push(CheckRecord::measured(
            "jordan_wigner",
            jw.worst_gap / scale,
            tol.jw,
            format!("worst pair {:?} vs {:?}", jw.worst_pair.0, jw.worst_pair.1),
        ));
    } else {
        checks.push(CheckRecord {
            name: "jordan_wigner".into(),
            residual: None,
            tolerance: Some(tol.jw),
            verdict: Verdict::Skip,
            note: format!("size cap: spin oracle needs N ≤ {SPIN_CAP_N}"),
        });
    }

    let passed = checks.iter().all(|c| c.verdict != Verdict::Fail);
    Ok(VerifyReport {
        tool: TOOL_VERSION.into(),
        config_sha256: cfg.digest(),
        family: format!("{:?}", cfg.family).to_lowercase(),
        n: chain.n(),
        checks,
        passed,
    })
}

pub(crate) fn verify_table(report: &VerifyReport) -> Table {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    Table {
        command: "verify",
        header: vec!["check", "residual", "tolerance", "verdict", "note"],
        rows: report
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), opt(c.residual), opt(c.tolerance), c.verdict.label().into(), c.note.clone()])
            .collect(),
        notes: vec![format!("overall: {}", if report.passed { "PASS" } else { "FAIL" })],
    }
}
