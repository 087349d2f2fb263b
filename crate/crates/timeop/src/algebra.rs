//! Commutator machinery: the canonical pair (T, H), its square-root variant
//! (T_√, H), the Jacobi identity, and the closure properties of the two
//! generator sets {T_√, H, I, 1} and {T_√², T, H, 1}.
//!
//! Commutator claims are always tested strongly, applied to named test
//! functions, never as raw matrix-norm identities: near the boundary the
//! stencil closures do not represent the operators, and the continuum
//! statements themselves only hold on domain intersections.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::WaveFunction;
use crate::operators::{OpSymbol, OperatorMatrix};

/// Coefficient of the grid-dependent canonical tolerance tol(h) = C·ℏ·h²:
/// the central-stencil residual of ([T,H] − iℏ)f is (ℏh²/2)·‖f''‖/‖f‖, and
/// the default test set keeps ‖f''‖/‖f‖ below 4.
pub const CANONICAL_TOL_COEFF: f64 = 2.0;

/// Gap threshold below which the square-root variant would count as
/// canonically commuting; the measured gaps sit well above it.
pub const NON_CANONICAL_GAP: f64 = 0.1;

/// Residual ceiling for the Jacobi identity, which holds exactly for
/// matrices; anything above roundoff signals an algebra bug.
pub const JACOBI_TOL: f64 = 1e-10;

/// Threshold for the least-squares span test that operationalizes "the
/// commutators of I cannot be written in terms of the generators".
pub const ENVELOPE_SPAN_MIN: f64 = 0.05;

/// Grid-dependent tolerance for canonical verdicts.
pub fn canonical_tolerance(grid: &crate::grid::GridSpec) -> f64 {
    let h = grid.spacing();
    CANONICAL_TOL_COEFF * grid.hbar() * h * h
}

/// Verdict attached to a commutator probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommutatorVerdict {
    Canonical,
    NonCanonical,
    Closed,
    NotClosed,
}

impl CommutatorVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommutatorVerdict::Canonical => "canonical",
            CommutatorVerdict::NonCanonical => "non_canonical",
            CommutatorVerdict::Closed => "closed",
            CommutatorVerdict::NotClosed => "not_closed",
        }
    }
}

/// Outcome of probing a commutator relation on one test function.
#[derive(Debug, Clone)]
pub struct CommutatorReport {
    pub pair: (OpSymbol, OpSymbol),
    pub test_function: String,
    pub relative_residual: f64,
    /// Residual threshold in force (C·ℏ·h² with C = [`CANONICAL_TOL_COEFF`]
    /// for canonical probes, [`NON_CANONICAL_GAP`] for gap probes).
    pub tolerance: f64,
    pub expected: &'static str,
    pub verdict: CommutatorVerdict,
}

/// Commutator matrix AB − BA.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    ab.sub(&ba)
}

/// [A, B] v without forming the product matrices.
pub fn commutator_apply(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    v: &[Complex64],
) -> Vec<Complex64> {
    let bv = b.matvec(v);
    let abv = a.matvec(&bv);
    let av = a.matvec(v);
    let bav = b.matvec(&av);
    abv.iter().zip(&bav).map(|(x, y)| x - y).collect()
}

fn require_domain_member(f: &WaveFunction) -> Result<()> {
    if !f.origin_vanishes() {
        return Err(Error::DomainViolation(
            "test function has f(0) != 0; outside the derivative-operator domain".into(),
        ));
    }
    if !f.decays_at_truncation() {
        return Err(Error::DomainViolation(
            "test function has not decayed at e_max; truncation wall would contaminate the residual"
                .into(),
        ));
    }
    Ok(())
}

fn weighted_norm(values: &[Complex64], weights: &[f64], skip: usize) -> f64 {
    let n = values.len();
    values
        .iter()
        .zip(weights)
        .enumerate()
        .filter(|(i, _)| *i >= skip && *i < n - skip)
        .map(|(_, (v, w))| w * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Relative residual of ([A, B] − iℏ)f, the canonical commutation probe.
fn heisenberg_residual(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    f: &WaveFunction,
) -> Result<f64> {
    a.check_same_grid(b)?;
    let grid = f.grid();
    let hbar = grid.hbar();
    let comm = commutator_apply(a, b, f.values());
    let defect: Vec<Complex64> = comm
        .iter()
        .zip(f.values())
        .map(|(c, v)| c - Complex64::new(0.0, hbar) * v)
        .collect();
    Ok(weighted_norm(&defect, grid.weights(), 0) / f.norm())
}

/// Probe [T, H] = iℏ on a domain member. Canonical iff the residual meets
/// the grid-dependent tolerance.
pub fn canonical_residual(
    t: &OperatorMatrix,
    h: &OperatorMatrix,
    f: &WaveFunction,
    label: &str,
) -> Result<CommutatorReport> {
    require_domain_member(f)?;
    let residual = heisenberg_residual(t, h, f)?;
    let tolerance = canonical_tolerance(f.grid());
    let verdict = if residual <= tolerance {
        CommutatorVerdict::Canonical
    } else {
        CommutatorVerdict::NonCanonical
    };
    Ok(CommutatorReport {
        pair: (t.symbol(), h.symbol()),
        test_function: label.to_string(),
        relative_residual: residual,
        tolerance,
        expected: "i*hbar*identity",
        verdict,
    })
}

/// Probe [T_√, H] against iℏ on a domain member. The square-root variant
/// fails canonical commutation by an O(1) margin; the verdict is
/// non-canonical when the gap clears [`NON_CANONICAL_GAP`] (h-stability
/// across grids is the caller's cross-grid check).
pub fn variant_commutator_gap(
    tsqrt: &OperatorMatrix,
    h: &OperatorMatrix,
    f: &WaveFunction,
    label: &str,
) -> Result<CommutatorReport> {
    require_domain_member(f)?;
    let residual = heisenberg_residual(tsqrt, h, f)?;
    let verdict = if residual >= NON_CANONICAL_GAP {
        CommutatorVerdict::NonCanonical
    } else {
        CommutatorVerdict::Canonical
    };
    Ok(CommutatorReport {
        pair: (tsqrt.symbol(), h.symbol()),
        test_function: label.to_string(),
        relative_residual: residual,
        tolerance: NON_CANONICAL_GAP,
        expected: "i*hbar*identity",
        verdict,
    })
}

/// Scaled Jacobi residual ‖([[A,B],C] + [[B,C],A] + [[C,A],B])f‖ divided by
/// ‖f‖ and the product of operator norms. Exact for matrices, so the result
/// is pure roundoff.
pub fn jacobi_residual(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    c: &OperatorMatrix,
    f: &WaveFunction,
) -> Result<f64> {
    a.check_same_grid(b)?;
    b.check_same_grid(c)?;
    if f.norm_sq() == 0.0 {
        return Err(Error::DomainViolation(
            "Jacobi probe needs a nonzero function".into(),
        ));
    }
    let v = f.values();
    let mut total = double_commutator_apply(a, b, c, v);
    for (x, y) in total
        .iter_mut()
        .zip(double_commutator_apply(b, c, a, v).iter())
    {
        *x += y;
    }
    for (x, y) in total
        .iter_mut()
        .zip(double_commutator_apply(c, a, b, v).iter())
    {
        *x += y;
    }
    let scale = a.norm_inf() * b.norm_inf() * c.norm_inf();
    let scale = if scale == 0.0 { 1.0 } else { scale };
    Ok(weighted_norm(&total, f.grid().weights(), 0) / (f.norm() * scale))
}

/// [[A,B],C] v = [A,B](Cv) − C([A,B]v).
fn double_commutator_apply(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    c: &OperatorMatrix,
    v: &[Complex64],
) -> Vec<Complex64> {
    let cv = c.matvec(v);
    let first = commutator_apply(a, b, &cv);
    let comm_v = commutator_apply(a, b, v);
    let second = c.matvec(&comm_v);
    first.iter().zip(&second).map(|(x, y)| x - y).collect()
}

/// Residuals of the closure relations for the generator sets.
#[derive(Debug, Clone)]
pub struct LieClosureReport {
    /// ‖([T_F², H] − 2iℏT)f‖/‖f‖, boundary rows excluded.
    pub tsq_h_closure: f64,
    /// ‖[T_F², T]f‖/‖f‖, boundary rows excluded.
    pub tsq_t_closure: f64,
    /// ‖([T, H] − iℏ)f‖/‖f‖.
    pub canonical: f64,
    /// Least-squares span residual of [I, H]f against {T_√f, Hf, If, f}.
    pub envelope_span_h: f64,
    /// Least-squares span residual of [I, T_√]f against the same span.
    pub envelope_span_tsqrt: f64,
    /// Tolerance in force for the closure residuals.
    pub tolerance: f64,
}

/// Operators feeding the closure checks.
pub struct ClosureOperators<'a> {
    pub h: &'a OperatorMatrix,
    pub t: &'a OperatorMatrix,
    pub tsq: &'a OperatorMatrix,
    pub tsqrt: &'a OperatorMatrix,
    /// I = [T_√, H], precomputed by the caller.
    pub commutator_i: &'a OperatorMatrix,
}

/// Verify the closure relations of {T_√², T, H, 1} and the non-closure of
/// {T_√, H, I, 1} on a rapidly decaying domain member. Boundary rows (two at
/// each end) are excluded from the closure residuals: the test functions do
/// not vanish at the origin to the stencil order of the third-order products
/// involved.
pub fn lie_closure_check(
    ops: &ClosureOperators<'_>,
    f: &WaveFunction,
) -> Result<LieClosureReport> {
    require_domain_member(f)?;
    let grid = f.grid();
    let hbar = grid.hbar();
    let w = grid.weights();
    let norm_f = f.norm();

    // (a) [T_F², H] f = 2iℏ·T f
    let comm_a = commutator_apply(ops.tsq, ops.h, f.values());
    let tf = ops.t.matvec(f.values());
    let defect_a: Vec<Complex64> = comm_a
        .iter()
        .zip(&tf)
        .map(|(c, t)| c - Complex64::new(0.0, 2.0 * hbar) * t)
        .collect();
    let tsq_h_closure = weighted_norm(&defect_a, w, 2) / norm_f;

    // (b) [T_F², T] f = 0
    let comm_b = commutator_apply(ops.tsq, ops.t, f.values());
    let tsq_t_closure = weighted_norm(&comm_b, w, 2) / norm_f;

    // (c) [T, H] f = iℏ f
    let canonical = heisenberg_residual(ops.t, ops.h, f)?;

    // (d) span residuals of the would-be higher generators
    let columns = [
        ops.tsqrt.matvec(f.values()),
        ops.h.matvec(f.values()),
        ops.commutator_i.matvec(f.values()),
        f.values().to_vec(),
    ];
    let target_h = commutator_apply(ops.commutator_i, ops.h, f.values());
    let target_tsqrt = commutator_apply(ops.commutator_i, ops.tsqrt, f.values());
    let envelope_span_h = span_fit_residual(&columns, &target_h, w);
    let envelope_span_tsqrt = span_fit_residual(&columns, &target_tsqrt, w);

    Ok(LieClosureReport {
        tsq_h_closure,
        tsq_t_closure,
        canonical,
        envelope_span_h,
        envelope_span_tsqrt,
        tolerance: canonical_tolerance(grid),
    })
}

/// Relative residual of the weighted least-squares fit of `target` onto the
/// span of `columns`: min_c ‖target − Σ c_k·col_k‖ / ‖target‖.
pub fn span_fit_residual(columns: &[Vec<Complex64>], target: &[Complex64], weights: &[f64]) -> f64 {
    let m = columns.len();
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter()
            .zip(b)
            .zip(weights)
            .map(|((x, y), w)| *w * x * y.conj())
            .sum()
    };

    // normal equations G c = r with G_{jk} = <col_k, col_j>- style pairing
    let mut gram = vec![Complex64::default(); m * m];
    let mut rhs = vec![Complex64::default(); m];
    for j in 0..m {
        for k in 0..m {
            gram[j * m + k] = dot(&columns[k], &columns[j]);
        }
        rhs[j] = dot(target, &columns[j]);
    }
    let coeffs = solve_dense(&mut gram, &mut rhs, m);

    let mut resid_sq = 0.0;
    let mut target_sq = 0.0;
    for i in 0..target.len() {
        let mut fit = Complex64::default();
        for (k, c) in coeffs.iter().enumerate() {
            fit += c * columns[k][i];
        }
        resid_sq += weights[i] * (target[i] - fit).norm_sqr();
        target_sq += weights[i] * target[i].norm_sqr();
    }
    (resid_sq / target_sq).sqrt()
}

/// Gaussian elimination with partial pivoting for the small normal systems.
fn solve_dense(a: &mut [Complex64], b: &mut [Complex64], m: usize) -> Vec<Complex64> {
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&p, &q| {
                a[p * m + col]
                    .norm()
                    .partial_cmp(&a[q * m + col].norm())
                    .unwrap()
            })
            .unwrap();
        if pivot != col {
            for j in 0..m {
                a.swap(col * m + j, pivot * m + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * m + col];
        if diag.norm() == 0.0 {
            continue;
        }
        for row in (col + 1)..m {
            let factor = a[row * m + col] / diag;
            for j in col..m {
                let v = a[col * m + j];
                a[row * m + j] -= factor * v;
            }
            let bc = b[col];
            b[row] -= factor * bc;
        }
    }
    let mut x = vec![Complex64::default(); m];
    for col in (0..m).rev() {
        let mut acc = b[col];
        for j in (col + 1)..m {
            acc -= a[col * m + j] * x[j];
        }
        let diag = a[col * m + col];
        x[col] = if diag.norm() == 0.0 {
            Complex64::default()
        } else {
            acc / diag
        };
    }
    x
}
