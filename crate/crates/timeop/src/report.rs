//! Structured verification records and their JSON/CSV serialization.
//!
//! Reports are deterministic: no timestamps, fixed field order, fixed check
//! order. Two runs with the same configuration produce identical bytes, and
//! the observable-mode relabeling touches only the symbol fields.

use serde::{Deserialize, Serialize};

/// Stable claim anchors attached to every check. Values are symbolic slugs,
/// not citations; `plumbing` marks artifact-internal consistency checks.
pub mod anchor {
    pub const HFT_PAIR: &str = "hft-pair";
    pub const CONJUGATE_REP: &str = "conjugate-representation";
    pub const HFT_ANALYTICITY: &str = "hft-upper-half-plane-analyticity";
    pub const HARDY_DECAY: &str = "hardy-space-decay";
    pub const H_SYMMETRIC: &str = "h-symmetric";
    pub const H_SPECTRUM: &str = "h-spectrum-positive-axis";
    pub const T_BOUNDARY_TERM: &str = "t-boundary-term-identity";
    pub const T_DOMAIN: &str = "t-domain-origin-condition";
    pub const TDAG_DOMAIN: &str = "tdag-domain-lifted-condition";
    pub const T_DEFECT_INDICES: &str = "t-defect-indices";
    pub const TSQ_DEFECT_INDICES: &str = "tsq-defect-indices";
    pub const T_SPECTRUM_UPPER: &str = "t-spectrum-upper-half-plane";
    pub const FRIEDRICHS_SPECTRUM: &str = "friedrichs-spectrum";
    pub const TSQRT_DEF: &str = "tsqrt-positive-square-root";
    pub const TSQRT_SPECTRUM: &str = "tsqrt-spectrum-nonnegative";
    pub const SINE_EIGENFUNCTIONS: &str = "sine-eigenfunctions";
    pub const DELTA_NORMALIZATION: &str = "delta-normalization";
    pub const TIME_TRANSFORM: &str = "time-representation-transform";
    pub const TSQ_TIME_ACTION: &str = "tsq-acts-as-t-squared";
    pub const TSQRT_TIME_ACTION: &str = "tsqrt-acts-as-t";
    pub const H2_TIME_ACTION: &str = "h-squared-time-representation";
    pub const H_NOT_GENERATOR: &str = "h-not-time-derivative";
    pub const HEISENBERG_CCR: &str = "heisenberg-commutation";
    pub const TSQRT_NONCANONICAL: &str = "tsqrt-noncanonical-commutator";
    pub const JACOBI: &str = "jacobi-identity";
    pub const LIE_PRIME_CLOSED: &str = "generator-set-prime-closes";
    pub const ENVELOPE_OPEN: &str = "generator-set-enveloping-only";
    pub const MEASUREMENT: &str = "tsqrt-measurement-distribution";
    pub const PLUMBING: &str = "plumbing";
}

/// How a measured value relates to its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Pass when measured ≤ tolerance.
    AtMost,
    /// Pass when measured ≥ tolerance.
    AtLeast,
    /// Pass when measured equals tolerance exactly (integer-valued checks).
    Exactly,
}

/// One verification record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub paper_anchor: String,
    pub measured: f64,
    pub tolerance: f64,
    pub direction: Direction,
    pub pass: bool,
}

impl Check {
    pub fn at_most(id: impl Into<String>, anchor: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            id: id.into(),
            paper_anchor: anchor.to_string(),
            measured,
            tolerance,
            direction: Direction::AtMost,
            pass: measured.is_finite() && measured <= tolerance,
        }
    }

    pub fn at_least(id: impl Into<String>, anchor: &str, measured: f64, tolerance: f64) -> Self {
        Check {
            id: id.into(),
            paper_anchor: anchor.to_string(),
            measured,
            tolerance,
            direction: Direction::AtLeast,
            pass: measured.is_finite() && measured >= tolerance,
        }
    }

    pub fn exactly(id: impl Into<String>, anchor: &str, measured: f64, expected: f64) -> Self {
        Check {
            id: id.into(),
            paper_anchor: anchor.to_string(),
            measured,
            tolerance: expected,
            direction: Direction::Exactly,
            pass: measured == expected,
        }
    }
}

/// Grid fingerprint embedded in every report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridStamp {
    pub e_max: f64,
    pub n: usize,
    pub hbar: f64,
}

/// Observable-mode symbol table; the only fields that differ across modes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SymbolTable {
    /// Half-line variable (E, x, or r).
    pub variable: String,
    /// Conjugate variable (t, p, or p_r).
    pub conjugate: String,
    /// Multiplication operator symbol (H, X, or R).
    pub multiplication_operator: String,
    /// Non-selfadjoint derivative operator symbol (T, P, or P_r).
    pub derivative_operator: String,
    /// Selfadjoint square-root variant symbol.
    pub sqrt_operator: String,
}

/// Verification report for one suite on one grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub mode: String,
    pub symbols: SymbolTable,
    pub grid: GridStamp,
    pub version: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(
        suite: impl Into<String>,
        mode: impl Into<String>,
        symbols: SymbolTable,
        grid: GridStamp,
        checks: Vec<Check>,
    ) -> Self {
        Report {
            suite: suite.into(),
            mode: mode.into(),
            symbols,
            grid,
            version: env!("CARGO_PKG_VERSION").to_string(),
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,mode,check_id,paper_anchor,measured,tolerance,direction,pass\n");
        for c in &self.checks {
            let dir = match c.direction {
                Direction::AtMost => "at_most",
                Direction::AtLeast => "at_least",
                Direction::Exactly => "exactly",
            };
            out.push_str(&format!(
                "{},{},{},{},{:.16e},{:.16e},{},{}\n",
                self.suite, self.mode, c.id, c.paper_anchor, c.measured, c.tolerance, dir, c.pass
            ));
        }
        out
    }
}

/// One row of a refinement sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub h: f64,
    pub check_id: String,
    pub residual: f64,
    pub fitted_order: f64,
}

/// Render sweep rows with the pinned header `n,h,check_id,residual,fitted_order`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,h,check_id,residual,fitted_order\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.12e},{},{:.16e},{:.4}\n",
            r.n, r.h, r.check_id, r.residual, r.fitted_order
        ));
    }
    out
}

/// Least-squares slope of log(residual) against log(h); the convergence
/// order of a refinement series. Rows at the roundoff floor would corrupt
/// the fit, so callers should filter them first.
pub fn fitted_order(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, r) in points {
        let x = h.ln();
        let y = r.max(f64::MIN_POSITIVE).ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}
