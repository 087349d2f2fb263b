//! Named verification suites and the batch driver behind the CLI: each suite
//! runs a fixed list of checks on one grid and yields a [`Report`]; the
//! driver fans suites out over the configured grid family and writes one
//! report file per suite per grid.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{
    self, canonical_residual, commutator, jacobi_residual, lie_closure_check, variant_commutator_gap,
    ClosureOperators, JACOBI_TOL,
};
use crate::config::{FunctionSpec, ObservableMode, OutputFormat, RunConfig, SuiteKind};
use crate::error::{Error, Result};
use crate::grid::{inner, sample, GridSpec, TestFunction};
use crate::hft::{
    analyticity_check, conjugate_rep_check, hft_forward, roundtrip_l2_error, HalfPlanePoint,
};
use crate::operators::{
    deficiency_report, hamiltonian, residual_spectrum_witness, symmetry_defect, time_candidate,
    tsq_friedrichs, DefectSign, DeficiencyTarget, DerivativeDomain, OperatorMatrix,
};
use crate::report::{anchor, fitted_order, sweep_csv, Check, GridStamp, Report, SweepRow};
use crate::spectral::{
    default_time_nodes, dirichlet_second_difference_eigs, eigensystem, operator_sqrt, sine_kernel,
    sine_transform, smeared_delta_error, time_distribution, time_rep_action_checks,
    SpectralDecomposition, TransformMatrix,
};

/// Cheap per-grid artifacts shared by every suite.
pub struct Lab {
    pub grid: Arc<GridSpec>,
    pub h_op: OperatorMatrix,
    pub t_op: OperatorMatrix,
    pub tdag_op: OperatorMatrix,
    pub tsq_op: OperatorMatrix,
}

impl Lab {
    pub fn build(grid: Arc<GridSpec>) -> Lab {
        let h_op = hamiltonian(&grid);
        let t_op = time_candidate(&grid, DerivativeDomain::DirichletOrigin);
        let tdag_op = time_candidate(&grid, DerivativeDomain::Free);
        let tsq_op = tsq_friedrichs(&grid);
        Lab {
            grid,
            h_op,
            t_op,
            tdag_op,
            tsq_op,
        }
    }

    pub fn stamp(&self) -> GridStamp {
        GridStamp {
            e_max: self.grid.e_max(),
            n: self.grid.len(),
            hbar: self.grid.hbar(),
        }
    }
}

/// Eigendecomposition-backed artifacts; built once per grid on demand.
pub struct SpectralLab {
    pub decomposition: SpectralDecomposition,
    pub tsqrt_op: OperatorMatrix,
    pub commutator_i: OperatorMatrix,
    pub transform: TransformMatrix,
}

impl SpectralLab {
    pub fn build(lab: &Lab) -> Result<SpectralLab> {
        let decomposition = eigensystem(&lab.tsq_op)?;
        let tsqrt_op = operator_sqrt(&decomposition)?;
        let commutator_i = commutator(&tsqrt_op, &lab.h_op)?;
        let transform = sine_transform(&lab.grid, None)?;
        Ok(SpectralLab {
            decomposition,
            tsqrt_op,
            commutator_i,
            transform,
        })
    }
}

fn resolve_functions(specs: &[FunctionSpec], hbar: f64) -> Result<Vec<(String, TestFunction)>> {
    specs
        .iter()
        .map(|s| {
            let f = s.resolve(hbar)?;
            Ok((f.label(), f))
        })
        .collect()
}

/// Run one suite on one grid.
pub fn run_suite(
    kind: SuiteKind,
    lab: &Lab,
    spectral: Option<&SpectralLab>,
    mode: ObservableMode,
    functions: &[FunctionSpec],
) -> Result<Report> {
    let funcs = resolve_functions(functions, lab.grid.hbar())?;
    let checks = match kind {
        SuiteKind::Domains => domains_checks(lab, &funcs)?,
        SuiteKind::Deficiency => deficiency_checks(lab)?,
        SuiteKind::Spectra => {
            spectra_checks(lab, spectral.ok_or_else(|| missing_spectral(kind))?)?
        }
        SuiteKind::TimeRep => {
            time_rep_checks(lab, spectral.ok_or_else(|| missing_spectral(kind))?)?
        }
        SuiteKind::Hft => hft_checks(lab, &funcs)?,
        SuiteKind::Algebra => {
            algebra_checks(lab, spectral.ok_or_else(|| missing_spectral(kind))?, &funcs)?
        }
        SuiteKind::Distribution => {
            distribution_checks(lab, spectral.ok_or_else(|| missing_spectral(kind))?)?
        }
    };
    Ok(Report::new(
        kind.as_str(),
        mode.as_str(),
        mode.symbols(),
        lab.stamp(),
        checks,
    ))
}

fn missing_spectral(kind: SuiteKind) -> Error {
    Error::Config(format!(
        "suite `{}` needs the spectral context",
        kind.as_str()
    ))
}

/// Suite tolerances for O(h²) quantities are anchored at the reference
/// spacing h = 0.05 (the e_max = 50, n = 999 grid the fixed bounds were
/// calibrated on) and widen quadratically on coarser grids.
fn href_scale(grid: &GridSpec) -> f64 {
    let x = grid.spacing() / 0.05;
    (x * x).max(1.0)
}

fn domains_checks(lab: &Lab, funcs: &[(String, TestFunction)]) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let hbar = grid.hbar();
    let mut checks = Vec::new();

    // boundary-term identity on the canonical pair e^{-E}, e^{-E}
    let e0 = sample(&TestFunction::ExpDecay { a: 1.0 }, grid);
    let d = symmetry_defect(&lab.tdag_op, &e0, &e0)?;
    checks.push(Check::at_most(
        "boundary_term_exp_pair",
        anchor::T_BOUNDARY_TERM,
        (d.lhs - Complex64::new(0.0, hbar)).norm(),
        5e-3 * href_scale(grid),
    ));
    checks.push(Check::at_most(
        "boundary_term_exp_pair_mismatch",
        anchor::T_BOUNDARY_TERM,
        d.mismatch,
        5e-3 * href_scale(grid),
    ));

    // inside the origin-vanishing domain the pairing is symmetric
    let ee = sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, grid);
    let d = symmetry_defect(&lab.tdag_op, &ee, &ee)?;
    checks.push(Check::at_most(
        "boundary_term_vanishes_in_domain",
        anchor::T_DOMAIN,
        d.lhs.norm(),
        5e-3 * href_scale(grid),
    ));

    // mixed pair: iℏ·f(0)·conj(g(0)) with g(0) = 0
    let d = symmetry_defect(&lab.tdag_op, &e0, &ee)?;
    checks.push(Check::exactly(
        "boundary_term_single_factor",
        anchor::T_BOUNDARY_TERM,
        d.boundary_term.norm(),
        0.0,
    ));

    // H is symmetric on everything sampled
    let pair = inner(&e0, &lab.h_op.apply(&ee)?)? - inner(&lab.h_op.apply(&e0)?, &ee)?;
    checks.push(Check::at_most(
        "h_symmetric_pairing",
        anchor::H_SYMMETRIC,
        pair.norm(),
        1e-12,
    ));

    // free and origin-constrained derivative agree away from the first row
    let mut worst = 0.0_f64;
    for i in 1..grid.len() {
        for j in 0..grid.len() {
            worst = worst.max((lab.t_op.entry(i, j) - lab.tdag_op.entry(i, j)).norm());
        }
    }
    checks.push(Check::exactly(
        "free_vs_constrained_rows",
        anchor::TDAG_DOMAIN,
        worst,
        0.0,
    ));

    // domain flags of the configured test set
    for (label, f) in funcs {
        let wf = sample(f, grid);
        checks.push(Check::exactly(
            format!("decays_at_truncation[{label}]"),
            anchor::PLUMBING,
            f64::from(u8::from(wf.decays_at_truncation())),
            1.0,
        ));
    }
    Ok(checks)
}

fn deficiency_checks(lab: &Lab) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let mut checks = Vec::new();
    let mut indices = std::collections::BTreeMap::new();

    for (target, target_name, idx_anchor) in [
        (DeficiencyTarget::T, "t", anchor::T_DEFECT_INDICES),
        (
            DeficiencyTarget::TSquared,
            "tsq",
            anchor::TSQ_DEFECT_INDICES,
        ),
    ] {
        for sign in [DefectSign::Plus, DefectSign::Minus] {
            let rep = deficiency_report(target, sign, grid)?;
            let tag = format!("{target_name}_{}", if sign == DefectSign::Plus { "plus" } else { "minus" });
            // growing candidates are classified by the norm-ratio test, decaying
            // ones must additionally solve the defect equation to stencil order
            if rep.l2_member {
                checks.push(Check::at_most(
                    format!("defect_residual[{tag}]"),
                    idx_anchor,
                    rep.residual,
                    rep.tolerance,
                ));
            } else {
                checks.push(Check::at_least(
                    format!("defect_growth_ratio[{tag}]"),
                    idx_anchor,
                    rep.growth_ratio,
                    crate::operators::GROWTH_RATIO_MAX,
                ));
            }
            indices.insert(tag, rep.index_contribution);
        }
    }

    checks.push(Check::exactly(
        "defect_index_t_plus",
        anchor::T_DEFECT_INDICES,
        f64::from(indices["t_plus"]),
        0.0,
    ));
    checks.push(Check::exactly(
        "defect_index_t_minus",
        anchor::T_DEFECT_INDICES,
        f64::from(indices["t_minus"]),
        1.0,
    ));
    checks.push(Check::exactly(
        "defect_index_tsq_plus",
        anchor::TSQ_DEFECT_INDICES,
        f64::from(indices["tsq_plus"]),
        1.0,
    ));
    checks.push(Check::exactly(
        "defect_index_tsq_minus",
        anchor::TSQ_DEFECT_INDICES,
        f64::from(indices["tsq_minus"]),
        1.0,
    ));
    Ok(checks)
}

fn spectra_checks(lab: &Lab, spectral: &SpectralLab) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let hbar = grid.hbar();
    let mut checks = Vec::new();

    let eigs = spectral.decomposition.eigenvalues();
    let exact = dirichlet_second_difference_eigs(grid);
    let scale = exact.last().copied().unwrap_or(1.0);

    checks.push(Check::at_least(
        "friedrichs_min_eig_positive",
        anchor::FRIEDRICHS_SPECTRUM,
        eigs[0],
        f64::MIN_POSITIVE,
    ));
    let worst = eigs
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max)
        / scale;
    checks.push(Check::at_most(
        "friedrichs_eigs_closed_form",
        anchor::FRIEDRICHS_SPECTRUM,
        worst,
        1e-10,
    ));

    // smallest eigenvalue approaches (πℏ/e_max)² with the stencil's O(h²) lag
    let continuum = (std::f64::consts::PI * hbar / grid.e_max()).powi(2);
    let theta = std::f64::consts::PI / (grid.len() as f64 + 1.0);
    checks.push(Check::at_most(
        "friedrichs_min_eig_continuum",
        anchor::FRIEDRICHS_SPECTRUM,
        (eigs[0] - continuum).abs() / continuum,
        theta * theta / 6.0,
    ));

    // square-root construction
    let root = &spectral.tsqrt_op;
    let squared = root.matmul(root)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in squared.entries().iter().zip(lab.tsq_op.entries()) {
        num += (x - y).norm_sqr();
        den += y.norm_sqr();
    }
    checks.push(Check::at_most(
        "tsqrt_squares_to_friedrichs",
        anchor::TSQRT_DEF,
        (num / den).sqrt(),
        1e-8,
    ));
    checks.push(Check::at_least(
        "tsqrt_spectrum_nonnegative",
        anchor::TSQRT_SPECTRUM,
        exact.iter().map(|l| l.sqrt()).fold(f64::INFINITY, f64::min),
        0.0,
    ));
    for k in [1usize, 2, 5, 10] {
        let nominal = k as f64 * std::f64::consts::PI * hbar / grid.e_max();
        let x = k as f64 * theta / 2.0;
        checks.push(Check::at_most(
            format!("tsqrt_eig_{k}_standing_wave"),
            anchor::TSQRT_SPECTRUM,
            (exact[k - 1].sqrt() - nominal).abs() / nominal,
            x * x / 3.0,
        ));
    }

    // H spectrum: the grid nodes inside (0, e_max)
    let h_dec = eigensystem(&lab.h_op)?;
    let worst_h = h_dec
        .eigenvalues()
        .iter()
        .zip(grid.nodes())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    checks.push(Check::at_most(
        "h_eigs_are_nodes",
        anchor::H_SPECTRUM,
        worst_h,
        1e-14 * grid.e_max(),
    ));

    // residual-spectrum witnesses for points of the open upper half-plane
    for (tag, z) in [
        ("i", Complex64::new(0.0, 1.0)),
        ("1+2i", Complex64::new(1.0, 2.0)),
        ("3i", Complex64::new(0.0, 3.0)),
    ] {
        let r = residual_spectrum_witness(z, grid)?;
        checks.push(Check::at_most(
            format!("upper_half_witness[{tag}]"),
            anchor::T_SPECTRUM_UPPER,
            r,
            1e-2 * href_scale(grid),
        ));
    }
    Ok(checks)
}

fn time_rep_checks(lab: &Lab, spectral: &SpectralLab) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let u = &spectral.transform;
    let mut checks = Vec::new();

    let (d1, d2) = u.unitarity_defects();
    checks.push(Check::at_most(
        "transform_isometry",
        anchor::TIME_TRANSFORM,
        d1,
        1e-6,
    ));
    checks.push(Check::at_most(
        "transform_coisometry",
        anchor::TIME_TRANSFORM,
        d2,
        1e-6,
    ));

    let action = time_rep_action_checks(u, &lab.tsq_op, &spectral.tsqrt_op)?;
    checks.push(Check::at_most(
        "tsq_diagonal_in_time_rep",
        anchor::TSQ_TIME_ACTION,
        action.tsq_diag_residual,
        1e-6,
    ));
    checks.push(Check::at_most(
        "tsqrt_diagonal_in_time_rep",
        anchor::TSQRT_TIME_ACTION,
        action.tsqrt_diag_residual,
        1e-6,
    ));
    checks.push(Check::at_most(
        "h_squared_second_difference",
        anchor::H2_TIME_ACTION,
        action.h2_stencil_residual,
        1e-2,
    ));
    checks.push(Check::at_least(
        "h_is_not_time_derivative",
        anchor::H_NOT_GENERATOR,
        action.h_not_generator_gap,
        0.1,
    ));

    // delta column concentration of a sine kernel
    let k = grid.len() / 4;
    let f = sine_kernel(grid, u.t_nodes()[k])?;
    let phi = u.to_time(&f)?;
    let peak = phi.values[k].norm();
    let off_peak = phi
        .values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, v)| v.norm())
        .fold(0.0_f64, f64::max);
    checks.push(Check::at_most(
        "sine_kernel_delta_column",
        anchor::DELTA_NORMALIZATION,
        off_peak / peak,
        1e-6,
    ));

    // sine kernels are discrete eigenvectors of the Friedrichs matrix
    let exact = dirichlet_second_difference_eigs(grid);
    let kk = 5.min(grid.len() - 1);
    let fk = sine_kernel(grid, default_time_nodes(grid)[kk - 1])?;
    let afk = lab.tsq_op.apply(&fk)?;
    let mut num = 0.0;
    for (x, y) in afk.values().iter().zip(fk.values()) {
        num += (x - exact[kk - 1] * y).norm_sqr();
    }
    checks.push(Check::at_most(
        "sine_kernel_eigen_residual",
        anchor::SINE_EIGENFUNCTIONS,
        num.sqrt() / (exact[kk - 1] * fk.norm() / grid.spacing().sqrt()),
        1e-6,
    ));

    // smeared delta normalization sharpens as the truncation point grows;
    // the probe overlaps the origin, where the kernel truncation is felt.
    // The boundary term oscillates in phase with e_max, so single-doubling
    // ratios wobble around 2; the decay order is fitted across two doublings
    // and monotone progress is required per doubling.
    let err_here = smeared_delta_error(grid, 1.0, 0.5);
    let doubled = grid.doubled_e_max()?;
    let err_doubled = smeared_delta_error(&doubled, 1.0, 0.5);
    let quadrupled = doubled.doubled_e_max()?;
    let err_quadrupled = smeared_delta_error(&quadrupled, 1.0, 0.5);
    checks.push(Check::at_least(
        "smeared_delta_first_order",
        anchor::DELTA_NORMALIZATION,
        (err_here / err_quadrupled).log2() / 2.0,
        0.75,
    ));
    checks.push(Check::at_least(
        "smeared_delta_monotone",
        anchor::DELTA_NORMALIZATION,
        err_here / err_doubled,
        1.3,
    ));
    Ok(checks)
}

fn hft_checks(lab: &Lab, funcs: &[(String, TestFunction)]) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let mut checks = Vec::new();
    let e0 = sample(&TestFunction::ExpDecay { a: 1.0 }, grid);
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();

    // closed forms of the transform of e^{-E}: (2π)^{-1/2}/(1 − it)
    for (tag, t, expect) in [
        ("0", Complex64::new(0.0, 0.0), Complex64::new(c, 0.0)),
        ("i", Complex64::new(0.0, 1.0), Complex64::new(0.5 * c, 0.0)),
        ("1", Complex64::new(1.0, 0.0), Complex64::new(0.5 * c, 0.5 * c)),
    ] {
        let v = hft_forward(&e0, HalfPlanePoint::new(t)?);
        checks.push(Check::at_most(
            format!("forward_closed_form[t={tag}]"),
            anchor::HFT_PAIR,
            (v - expect).norm(),
            1e-3,
        ));
    }

    // roundtrip on the whole configured test set
    for (label, f) in funcs {
        let wf = sample(f, grid);
        let (err, _warn) = roundtrip_l2_error(&wf);
        checks.push(Check::at_most(
            format!("roundtrip[{label}]"),
            anchor::HFT_PAIR,
            err,
            1e-4,
        ));
    }

    // conjugate representation on E·e^{-E}
    let expr = TestFunction::PolyExp { k: 1, a: 1.0 };
    let ee = sample(&expr, grid);
    let r = conjugate_rep_check(&ee, &expr, HalfPlanePoint::new(Complex64::i())?)?;
    checks.push(Check::at_most(
        "conjugate_rep_h[t=i]",
        anchor::CONJUGATE_REP,
        r.h_residual,
        1e-4 * href_scale(grid),
    ));
    let r = conjugate_rep_check(&ee, &expr, HalfPlanePoint::new(Complex64::new(1.0, 1.0))?)?;
    checks.push(Check::at_most(
        "conjugate_rep_t[t=1+i]",
        anchor::CONJUGATE_REP,
        r.t_residual,
        1e-4 * href_scale(grid),
    ));

    // analyticity probe and its quadratic refinement
    let ti = HalfPlanePoint::new(Complex64::i())?;
    let r1 = analyticity_check(&e0, ti, 1e-3)?;
    checks.push(Check::at_most(
        "cauchy_riemann[delta=1e-3]",
        anchor::HFT_ANALYTICITY,
        r1,
        1e-5,
    ));
    let r2 = analyticity_check(&e0, ti, 5e-4)?;
    checks.push(Check::at_most(
        "cauchy_riemann_refined",
        anchor::HFT_ANALYTICITY,
        if r2 < 1e-9 { 0.0 } else { r2 / r1 },
        0.35,
    ));

    // Hardy-space decay into the upper half-plane. Transform values below
    // the quadrature's own endpoint-correction scale are indistinguishable
    // from zero, which is where the decay is headed anyway.
    for (label, f) in funcs {
        let wf = sample(f, grid);
        let h = grid.spacing();
        let hbar = grid.hbar();
        let f0 = wf.origin_value().norm();
        let fp0 = ((-3.0 * wf.origin_value() + 4.0 * wf.values()[0] - wf.values()[1])
            / (2.0 * h))
            .norm();
        let floor = |s: f64| {
            2.0 * (0.5 * h * f0 + h * h / 12.0 * (fp0 + f0 * s / hbar))
                / (2.0 * std::f64::consts::PI * hbar).sqrt()
        };
        let points = [1.0, 10.0, 100.0];
        let mags: Vec<f64> = points
            .iter()
            .map(|&s| {
                let t = HalfPlanePoint::new(Complex64::new(0.0, s))
                    .expect("imaginary axis point");
                hft_forward(&wf, t).norm()
            })
            .collect();
        let monotone = mags
            .windows(2)
            .zip(points.windows(2))
            .all(|(m, p)| m[0] > m[1] || m[1] <= floor(p[1]));
        checks.push(Check::exactly(
            format!("hardy_decay[{label}]"),
            anchor::HARDY_DECAY,
            f64::from(u8::from(monotone)),
            1.0,
        ));
    }
    Ok(checks)
}

fn algebra_checks(
    lab: &Lab,
    spectral: &SpectralLab,
    funcs: &[(String, TestFunction)],
) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let mut checks = Vec::new();

    for (label, f) in funcs {
        let wf = sample(f, grid);
        let rep = canonical_residual(&lab.t_op, &lab.h_op, &wf, label)?;
        checks.push(Check::at_most(
            format!("canonical_residual[{label}]"),
            anchor::HEISENBERG_CCR,
            rep.relative_residual,
            rep.tolerance,
        ));
        let gap = variant_commutator_gap(&spectral.tsqrt_op, &lab.h_op, &wf, label)?;
        checks.push(Check::at_least(
            format!("variant_gap[{label}]"),
            anchor::TSQRT_NONCANONICAL,
            gap.relative_residual,
            algebra::NON_CANONICAL_GAP,
        ));
    }

    // Jacobi identity across generator triples (multisets of the seven
    // generators; the full sweep is O(n²) per triple)
    let identity = OperatorMatrix::identity(grid);
    let generators: Vec<(&str, &OperatorMatrix)> = vec![
        ("H", &lab.h_op),
        ("T", &lab.t_op),
        ("Tdag", &lab.tdag_op),
        ("TsqF", &lab.tsq_op),
        ("Tsqrt", &spectral.tsqrt_op),
        ("I", &spectral.commutator_i),
        ("1", &identity),
    ];
    let probe = sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, grid);
    let full_sweep = grid.len() <= 600;
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    for a in 0..generators.len() {
        for b in a..generators.len() {
            for c in b..generators.len() {
                if !full_sweep && !(a == 0 || b == 4 || c == 5) {
                    continue;
                }
                let r = jacobi_residual(generators[a].1, generators[b].1, generators[c].1, &probe)?;
                worst = worst.max(r);
                count += 1;
            }
        }
    }
    checks.push(Check::at_most(
        format!("jacobi_worst_of_{count}_triples"),
        anchor::JACOBI,
        worst,
        JACOBI_TOL,
    ));

    // closure of {T_√², T, H, 1} and non-closure of {T_√, H, I, 1}
    let f2 = sample(&TestFunction::PolyExp { k: 2, a: 1.0 }, grid);
    let closure = lie_closure_check(
        &ClosureOperators {
            h: &lab.h_op,
            t: &lab.t_op,
            tsq: &lab.tsq_op,
            tsqrt: &spectral.tsqrt_op,
            commutator_i: &spectral.commutator_i,
        },
        &f2,
    )?;
    checks.push(Check::at_most(
        "closure_tsq_h_gives_t",
        anchor::LIE_PRIME_CLOSED,
        closure.tsq_h_closure,
        1e-2,
    ));
    checks.push(Check::at_most(
        "closure_tsq_t_commute",
        anchor::LIE_PRIME_CLOSED,
        closure.tsq_t_closure,
        1e-2,
    ));
    checks.push(Check::at_most(
        "closure_canonical_member",
        anchor::LIE_PRIME_CLOSED,
        closure.canonical,
        closure.tolerance,
    ));
    checks.push(Check::at_least(
        "envelope_span_residual_h",
        anchor::ENVELOPE_OPEN,
        closure.envelope_span_h,
        algebra::ENVELOPE_SPAN_MIN,
    ));
    checks.push(Check::at_least(
        "envelope_span_residual_tsqrt",
        anchor::ENVELOPE_OPEN,
        closure.envelope_span_tsqrt,
        algebra::ENVELOPE_SPAN_MIN,
    ));
    Ok(checks)
}

fn distribution_checks(lab: &Lab, spectral: &SpectralLab) -> Result<Vec<Check>> {
    let grid = &lab.grid;
    let u = &spectral.transform;
    let mut checks = Vec::new();

    let k = grid.len() / 3;
    let psi = sine_kernel(grid, u.t_nodes()[k])?;
    let p = time_distribution(&psi, u)?;
    checks.push(Check::at_most(
        "distribution_normalized",
        anchor::MEASUREMENT,
        (p.iter().sum::<f64>() - 1.0).abs(),
        1e-9,
    ));
    checks.push(Check::at_least(
        "kernel_state_concentration",
        anchor::MEASUREMENT,
        p[k],
        0.99,
    ));

    let psi = sample(&TestFunction::ExpDecay { a: 1.0 }, grid);
    let p = time_distribution(&psi, u)?;
    let (jmax, _) = p
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .expect("distribution nonempty");
    checks.push(Check::at_most(
        "exp_state_mode_near_unit_time",
        anchor::MEASUREMENT,
        (u.t_nodes()[jmax] - 1.0).abs(),
        2.0 * u.t_weights()[0],
    ));
    Ok(checks)
}

/// Everything `report` produces for one run.
pub struct RunOutcome {
    pub reports: Vec<Report>,
    pub files: Vec<PathBuf>,
    pub all_pass: bool,
}

/// Execute every configured suite on every configured grid and write one
/// report file per suite per grid. Validation failures surface before any
/// computation starts.
pub fn run_report(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.output.dir)
        .map_err(|e| Error::Config(format!("cannot create output dir: {e}")))?;
    probe_writable(&config.output.dir)?;

    let mut reports = Vec::new();
    let mut files = Vec::new();
    for &n in &config.n {
        let grid = GridSpec::new(config.e_max, n, config.hbar)?;
        let lab = Lab::build(grid);
        let spectral = if config.suites.iter().any(|s| s.needs_spectral()) {
            Some(SpectralLab::build(&lab)?)
        } else {
            None
        };
        for &suite in &config.suites {
            let report = run_suite(suite, &lab, spectral.as_ref(), config.mode, &config.test_functions)?;
            let path = config.output.dir.join(format!(
                "{}_n{}.{}",
                suite.as_str(),
                n,
                config.output.format.extension()
            ));
            let body = match config.output.format {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => report.to_csv(),
            };
            std::fs::write(&path, body)?;
            files.push(path);
            reports.push(report);
        }
    }
    let all_pass = reports.iter().all(|r| r.all_pass());
    Ok(RunOutcome {
        reports,
        files,
        all_pass,
    })
}

fn probe_writable(dir: &std::path::Path) -> Result<()> {
    let probe = dir.join(".write_probe");
    std::fs::write(&probe, b"ok").map_err(|e| {
        Error::Config(format!("output dir {} not writable: {e}", dir.display()))
    })?;
    let _ = std::fs::remove_file(&probe);
    Ok(())
}

/// Convergence study across the configured grid family: residual-vs-h rows
/// with fitted orders, plus staircase plot data for the square-root spectrum.
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
}

/// Run the refinement sweep. Requires at least three grid sizes.
pub fn refinement_sweep(config: &RunConfig) -> Result<SweepOutcome> {
    config.validate()?;
    if config.n.len() < 3 {
        return Err(Error::Config(
            "refinement sweep needs at least three grid sizes".into(),
        ));
    }
    std::fs::create_dir_all(&config.output.dir)
        .map_err(|e| Error::Config(format!("cannot create output dir: {e}")))?;
    probe_writable(&config.output.dir)?;

    let mut series: Vec<(String, Vec<(usize, f64, f64)>)> = Vec::new();
    let push = |series: &mut Vec<(String, Vec<(usize, f64, f64)>)>,
                    id: &str,
                    n: usize,
                    h: f64,
                    value: f64| {
        if let Some(entry) = series.iter_mut().find(|(name, _)| name == id) {
            entry.1.push((n, h, value));
        } else {
            series.push((id.to_string(), vec![(n, h, value)]));
        }
    };

    let mut staircase: Vec<(usize, f64, f64)> = Vec::new();
    let funcs = resolve_functions(&config.test_functions, config.hbar)?;

    for &n in &config.n {
        let grid = GridSpec::new(config.e_max, n, config.hbar)?;
        let h = grid.spacing();
        let lab = Lab::build(Arc::clone(&grid));
        let spectral = SpectralLab::build(&lab)?;

        for (label, f) in &funcs {
            let wf = sample(f, &grid);
            let rep = canonical_residual(&lab.t_op, &lab.h_op, &wf, label)?;
            push(
                &mut series,
                &format!("canonical_residual[{label}]"),
                n,
                h,
                rep.relative_residual,
            );
            let gap = variant_commutator_gap(&spectral.tsqrt_op, &lab.h_op, &wf, label)?;
            push(
                &mut series,
                &format!("variant_commutator_gap[{label}]"),
                n,
                h,
                gap.relative_residual,
            );
        }

        let e0 = sample(&TestFunction::ExpDecay { a: 1.0 }, &grid);
        let d = symmetry_defect(&lab.tdag_op, &e0, &e0)?;
        push(
            &mut series,
            "boundary_term_mismatch",
            n,
            h,
            (d.lhs - d.boundary_term).norm(),
        );

        for (tag, z) in [("i", Complex64::new(0.0, 1.0)), ("1+2i", Complex64::new(1.0, 2.0))] {
            push(
                &mut series,
                &format!("upper_half_witness[{tag}]"),
                n,
                h,
                residual_spectrum_witness(z, &grid)?,
            );
        }

        for (target, sign, name) in [
            (DeficiencyTarget::T, DefectSign::Minus, "t_minus"),
            (DeficiencyTarget::TSquared, DefectSign::Plus, "tsq_plus"),
        ] {
            let rep = deficiency_report(target, sign, &grid)?;
            push(
                &mut series,
                &format!("defect_residual[{name}]"),
                n,
                h,
                rep.residual,
            );
        }

        let eigs = spectral.decomposition.eigenvalues();
        let continuum = (std::f64::consts::PI * config.hbar / config.e_max).powi(2);
        push(
            &mut series,
            "friedrichs_min_eig_error",
            n,
            h,
            (eigs[0] - continuum).abs() / continuum,
        );

        if n == *config.n.last().expect("n list nonempty") {
            let step = std::f64::consts::PI * config.hbar / config.e_max;
            for (k, lam) in eigs.iter().take(50).enumerate() {
                staircase.push((k + 1, (k + 1) as f64 * step, lam.sqrt()));
            }
        }
    }

    let mut rows = Vec::new();
    for (id, pts) in &series {
        let fit_pts: Vec<(f64, f64)> = pts
            .iter()
            .filter(|(_, _, r)| *r > 1e-13)
            .map(|&(_, h, r)| (h, r))
            .collect();
        let order = if fit_pts.len() >= 2 {
            fitted_order(&fit_pts)
        } else {
            0.0
        };
        for &(n, h, r) in pts {
            rows.push(SweepRow {
                n,
                h,
                check_id: id.clone(),
                residual: r,
                fitted_order: order,
            });
        }
    }

    let sweep_path = config.output.dir.join("convergence.csv");
    std::fs::write(&sweep_path, sweep_csv(&rows))?;

    let mut stair = String::from("k,t_nominal,sqrt_eigenvalue\n");
    for (k, t, s) in &staircase {
        stair.push_str(&format!("{k},{t:.12e},{s:.12e}\n"));
    }
    let stair_path = config.output.dir.join("tsqrt_staircase.csv");
    std::fs::write(&stair_path, stair)?;

    Ok(SweepOutcome {
        rows,
        files: vec![sweep_path, stair_path],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(dir: &str) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.n = vec![99];
        cfg.output.dir = std::env::temp_dir().join(format!("timeop-suites-{dir}-{}", std::process::id()));
        cfg
    }

    #[test]
    fn all_suites_run_on_a_small_grid() {
        let cfg = tiny_config("all");
        let outcome = run_report(&cfg).unwrap();
        assert_eq!(outcome.reports.len(), SuiteKind::ALL.len());
        for r in &outcome.reports {
            assert!(!r.checks.is_empty(), "suite {} produced no checks", r.suite);
        }
        for f in &outcome.files {
            assert!(f.exists());
        }
        std::fs::remove_dir_all(&cfg.output.dir).ok();
    }

    #[test]
    fn sweep_requires_three_sizes() {
        let mut cfg = tiny_config("sweep");
        cfg.n = vec![99, 199];
        assert!(matches!(refinement_sweep(&cfg), Err(Error::Config(_))));
        std::fs::remove_dir_all(&cfg.output.dir).ok();
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = {
            let mut c = tiny_config("det");
            c.suites = vec![SuiteKind::Domains, SuiteKind::Deficiency];
            c
        };
        let a = run_report(&cfg).unwrap();
        let b = run_report(&cfg).unwrap();
        for (ra, rb) in a.reports.iter().zip(&b.reports) {
            assert_eq!(ra.to_json(), rb.to_json());
        }
        std::fs::remove_dir_all(&cfg.output.dir).ok();
    }

    #[test]
    fn modes_share_numerics() {
        let mut cfg = tiny_config("modes");
        cfg.suites = vec![SuiteKind::Domains];
        let dir_time = cfg.output.dir.clone();
        let dir_radial = cfg.output.dir.with_extension("radial");
        let time = run_report(&cfg).unwrap();
        cfg.mode = ObservableMode::RadialMomentum;
        cfg.output.dir = dir_radial.clone();
        let radial = run_report(&cfg).unwrap();
        let strip = |r: &Report| {
            let mut v = r.clone();
            v.mode = String::new();
            v.symbols = ObservableMode::Time.symbols();
            v.to_json()
        };
        for (a, b) in time.reports.iter().zip(&radial.reports) {
            assert_eq!(strip(a), strip(b));
        }
        std::fs::remove_dir_all(&dir_time).ok();
        std::fs::remove_dir_all(&dir_radial).ok();
    }
}
