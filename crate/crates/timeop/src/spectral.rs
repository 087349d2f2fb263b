//! Eigensystems, the operator square root, and the sine-transform time
//! representation.
//!
//! On the default time grid t_k = kπℏ/e_max the sine kernels are exactly the
//! eigenvectors of the Dirichlet second difference, so the transform is
//! unitary between the weighted sample spaces in exact arithmetic and the
//! continuum delta normalization becomes exact discrete orthogonality.

use std::sync::Arc;

use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, TestFunction, WaveFunction};
use crate::operators::{BoundaryTag, OpSymbol, OperatorMatrix};
use crate::HERMITICITY_TOL;

/// Eigenvalues and quadrature-orthonormal eigenvectors of a Hermitian
/// operator matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column-major; column k is orthonormal under Σ w_i u_i conj(v_i).
    vectors: Vec<Complex64>,
    source: OpSymbol,
    grid: Arc<GridSpec>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vector(&self, k: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.vectors[k * n..(k + 1) * n]
    }

    pub fn source(&self) -> OpSymbol {
        self.source
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Hermitian eigendecomposition with deterministic ordering and phases:
/// ascending eigenvalues, each eigenvector's first nonvanishing component
/// made real positive, vectors normalized in the quadrature inner product.
pub fn eigensystem(op: &OperatorMatrix) -> Result<SpectralDecomposition> {
    let defect = op.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            symbol: op.symbol().as_str().to_string(),
            defect,
            tolerance: HERMITICITY_TOL,
        });
    }
    let n = op.len();
    let (eigenvalues, mut vectors) = eigen::hermitian_eigen(op.entries(), n)?;

    // standard-orthonormal -> quadrature-orthonormal (uniform weights h)
    let scale = 1.0 / op.grid().spacing().sqrt();
    for v in vectors.iter_mut() {
        *v *= scale;
    }
    for k in 0..n {
        fix_phase(&mut vectors[k * n..(k + 1) * n]);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
        source: op.symbol(),
        grid: Arc::clone(op.grid()),
    })
}

fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|x| x.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(&lead) = v.iter().find(|x| x.norm() > 1e-12 * max) {
        let rot = (lead / lead.norm()).conj();
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Functional-calculus square root Σ_k √(max(λ_k, 0)) v_k v_k† with the
/// adjoint taken in the quadrature inner product. Eigenvalues in
/// [−ε_clamp, 0) are clamped to zero; anything more negative signals a broken
/// Friedrichs construction and is rejected.
pub fn operator_sqrt(dec: &SpectralDecomposition) -> Result<OperatorMatrix> {
    let n = dec.len();
    let lambda_max = dec
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &l| acc.max(l.abs()));
    let clamp = 1e-10 * lambda_max;
    let mut roots = Vec::with_capacity(n);
    for &l in &dec.eigenvalues {
        if l < -clamp {
            return Err(Error::NegativeEigenvalue {
                value: l,
                threshold: -clamp,
            });
        }
        roots.push(l.max(0.0).sqrt());
    }

    let sqrt_h = dec.grid.spacing().sqrt();
    let all_real = dec.vectors.iter().all(|v| v.im == 0.0);
    let entries = if all_real {
        // A[i][k] = u_k(i)·s_k, B[j][k] = u_k(j) with u = √h·v standard-orthonormal
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for k in 0..n {
            let col = &dec.vectors[k * n..(k + 1) * n];
            for i in 0..n {
                let u = sqrt_h * col[i].re;
                a[i * n + k] = u * roots[k];
                b[i * n + k] = u;
            }
        }
        let mut c = real_gemm_abt(&a, &b, n, n, n);
        // the product is symmetric in exact arithmetic; remove rounding skew
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (c[i * n + j] + c[j * n + i]);
                c[i * n + j] = s;
                c[j * n + i] = s;
            }
        }
        c.into_iter().map(|x| Complex64::new(x, 0.0)).collect()
    } else {
        let mut out = vec![Complex64::default(); n * n];
        for k in 0..n {
            let col = &dec.vectors[k * n..(k + 1) * n];
            for i in 0..n {
                let left = sqrt_h * col[i] * roots[k];
                if left.norm_sqr() == 0.0 {
                    continue;
                }
                let row = &mut out[i * n..(i + 1) * n];
                for (o, &cj) in row.iter_mut().zip(col) {
                    *o += left * (sqrt_h * cj).conj();
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (out[i * n + j] + out[j * n + i].conj());
                out[i * n + j] = s;
                out[j * n + i] = s.conj();
            }
            out[i * n + i] = Complex64::new(out[i * n + i].re, 0.0);
        }
        out
    };

    let (symbol, bc) = if dec.source == OpSymbol::TsqF {
        (OpSymbol::Tsqrt, BoundaryTag::DirichletBoth)
    } else {
        (OpSymbol::Derived, BoundaryTag::None)
    };
    Ok(OperatorMatrix::from_entries(
        entries,
        Arc::clone(&dec.grid),
        bc,
        symbol,
    ))
}

/// C = A·Bᵀ for row-major A (p×q) and B (r×q), blocked over rows of A.
pub(crate) fn real_gemm_abt(a: &[f64], b: &[f64], p: usize, q: usize, r: usize) -> Vec<f64> {
    assert_eq!(a.len(), p * q);
    assert_eq!(b.len(), r * q);
    let mut c = vec![0.0; p * r];
    const BLOCK: usize = 48;
    for ib in (0..p).step_by(BLOCK) {
        let iend = (ib + BLOCK).min(p);
        for j in 0..r {
            let row_b = &b[j * q..(j + 1) * q];
            for i in ib..iend {
                let row_a = &a[i * q..(i + 1) * q];
                let mut acc = 0.0;
                for (x, y) in row_a.iter().zip(row_b) {
                    acc += x * y;
                }
                c[i * r + j] = acc;
            }
        }
    }
    c
}

/// Closed-form spectrum of the Dirichlet second-difference matrix on the
/// grid: λ_k = (2ℏ²/h²)(1 − cos(kπ/(n+1))), k = 1..n, ascending.
pub fn dirichlet_second_difference_eigs(grid: &GridSpec) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing();
    let hbar = grid.hbar();
    let coeff = 2.0 * hbar * hbar / (h * h);
    let theta = std::f64::consts::PI / (n as f64 + 1.0);
    (1..=n)
        .map(|k| coeff * (1.0 - (k as f64 * theta).cos()))
        .collect()
}

/// Sample the time-representation kernel ⟨E|t⟩ = √(2/(πℏ))·sin(Et/ℏ).
pub fn sine_kernel(grid: &Arc<GridSpec>, t: f64) -> Result<WaveFunction> {
    if t < 0.0 {
        return Err(Error::InvalidTimeNode(format!(
            "kernel parameter t must be nonnegative, got {t}"
        )));
    }
    let f = TestFunction::SineKernel {
        t,
        hbar: grid.hbar(),
    };
    Ok(crate::grid::sample(&f, grid))
}

/// Default time nodes t_k = kπℏ/e_max, k = 1..n: the standing-wave values
/// that make the sine family exactly orthogonal on the grid.
pub fn default_time_nodes(grid: &GridSpec) -> Vec<f64> {
    let step = std::f64::consts::PI * grid.hbar() / grid.e_max();
    (1..=grid.len()).map(|k| k as f64 * step).collect()
}

/// Samples over a time grid, carrying their quadrature weights.
#[derive(Debug, Clone)]
pub struct TimeSamples {
    pub values: Vec<Complex64>,
    pub t_nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TimeSamples {
    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// Sine transform between the energy grid and a time grid.
///
/// Forward action: (Uf)(t_j) = Σ_i w_i √(2/(πℏ)) sin(E_i t_j/ℏ) f_i. The
/// adjoint contracts against the time weights; on the default grid the pair
/// is unitary between the weighted sample spaces up to roundoff.
#[derive(Debug, Clone)]
pub struct TransformMatrix {
    /// Row-major m×n kernel K_{ji} = √(2/(πℏ)) sin(E_i t_j / ℏ).
    kernel: Vec<f64>,
    t_nodes: Vec<f64>,
    t_weights: Vec<f64>,
    grid: Arc<GridSpec>,
    is_default_grid: bool,
}

impl TransformMatrix {
    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn t_weights(&self) -> &[f64] {
        &self.t_weights
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn is_default_grid(&self) -> bool {
        self.is_default_grid
    }

    pub fn kernel(&self, j: usize, i: usize) -> f64 {
        self.kernel[j * self.grid.len() + i]
    }

    /// Energy representation -> time representation.
    pub fn to_time(&self, f: &WaveFunction) -> Result<TimeSamples> {
        if !self.grid.same_grid(f.grid()) {
            return Err(Error::GridMismatch {
                left: self.grid.len(),
                right: f.grid().len(),
            });
        }
        let n = self.grid.len();
        let m = self.t_nodes.len();
        let w = self.grid.weights();
        let mut out = vec![Complex64::default(); m];
        for j in 0..m {
            let row = &self.kernel[j * n..(j + 1) * n];
            let mut acc = Complex64::default();
            for ((&k, v), &wi) in row.iter().zip(f.values()).zip(w) {
                acc += wi * k * v;
            }
            out[j] = acc;
        }
        Ok(TimeSamples {
            values: out,
            t_nodes: self.t_nodes.clone(),
            weights: self.t_weights.clone(),
        })
    }

    /// Time representation -> energy representation (the adjoint map).
    pub fn to_energy(&self, phi: &TimeSamples) -> Result<WaveFunction> {
        if phi.values.len() != self.t_nodes.len() {
            return Err(Error::GridMismatch {
                left: self.t_nodes.len(),
                right: phi.values.len(),
            });
        }
        let n = self.grid.len();
        let m = self.t_nodes.len();
        let mut out = vec![Complex64::default(); n];
        for j in 0..m {
            let w = phi.weights[j] * phi.values[j];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            let row = &self.kernel[j * n..(j + 1) * n];
            for (o, &k) in out.iter_mut().zip(row) {
                *o += w * k;
            }
        }
        WaveFunction::from_samples(out, Arc::clone(&self.grid))
    }

    /// Frobenius defects (‖U†U − I‖, ‖UU† − I‖) of the weighted compositions.
    pub fn unitarity_defects(&self) -> (f64, f64) {
        let n = self.grid.len();
        let m = self.t_nodes.len();
        let h = self.grid.weights();

        // G_{ii'} = Σ_j K_{ji} Δt_j K_{ji'}; U†U = G·diag(w)
        let mut scaled = vec![0.0; m * n];
        for j in 0..m {
            for i in 0..n {
                scaled[j * n + i] = self.t_weights[j] * self.kernel[j * n + i];
            }
        }
        let kt = transpose(&self.kernel, m, n);
        let st = transpose(&scaled, m, n);
        let g = real_gemm_abt(&kt, &st, n, m, n);
        let mut d1 = 0.0;
        for i in 0..n {
            for ip in 0..n {
                let v = g[i * n + ip] * h[ip] - if i == ip { 1.0 } else { 0.0 };
                d1 += v * v;
            }
        }

        // F_{jj'} = Σ_i K_{ji} w_i K_{j'i}; UU† = F·diag(Δt)
        let mut kw = vec![0.0; m * n];
        for j in 0..m {
            for i in 0..n {
                kw[j * n + i] = self.kernel[j * n + i] * h[i];
            }
        }
        let f = real_gemm_abt(&kw, &self.kernel, m, n, m);
        let mut d2 = 0.0;
        for j in 0..m {
            for jp in 0..m {
                let v = f[j * m + jp] * self.t_weights[jp] - if j == jp { 1.0 } else { 0.0 };
                d2 += v * v;
            }
        }
        (d1.sqrt(), d2.sqrt())
    }
}

pub(crate) fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = a[r * cols + c];
        }
    }
    out
}

/// Build the sine transform onto a time grid. `None` selects the default
/// standing-wave nodes.
pub fn sine_transform(grid: &Arc<GridSpec>, t_nodes: Option<Vec<f64>>) -> Result<TransformMatrix> {
    let default_nodes = default_time_nodes(grid);
    let (nodes, is_default) = match t_nodes {
        None => (default_nodes, true),
        Some(nodes) => {
            if nodes.is_empty() {
                return Err(Error::InvalidTimeNode("empty time grid".into()));
            }
            if nodes.iter().any(|&t| t < 0.0) {
                return Err(Error::InvalidTimeNode(
                    "negative time node: the spectrum lives on [0, ∞)".into(),
                ));
            }
            if nodes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidTimeNode(
                    "time nodes must be strictly ascending".into(),
                ));
            }
            let is_default = nodes.len() == default_nodes.len()
                && nodes
                    .iter()
                    .zip(&default_nodes)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs());
            (nodes, is_default)
        }
    };

    let n = grid.len();
    let m = nodes.len();
    let hbar = grid.hbar();
    let amp = (2.0 / (std::f64::consts::PI * hbar)).sqrt();
    let mut kernel = vec![0.0; m * n];
    for (j, &t) in nodes.iter().enumerate() {
        for (i, &e) in grid.nodes().iter().enumerate() {
            kernel[j * n + i] = amp * (e * t / hbar).sin();
        }
    }

    let t_weights = if is_default {
        let dt = std::f64::consts::PI * hbar / grid.e_max();
        vec![dt; m]
    } else {
        midpoint_weights(&nodes)
    };

    Ok(TransformMatrix {
        kernel,
        t_nodes: nodes,
        t_weights,
        grid: Arc::clone(grid),
        is_default_grid: is_default,
    })
}

fn midpoint_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    if m == 1 {
        return vec![1.0];
    }
    (0..m)
        .map(|j| {
            if j == 0 {
                0.5 * (nodes[1] - nodes[0]) + nodes[0].min(0.5 * (nodes[1] - nodes[0]))
            } else if j + 1 == m {
                0.5 * (nodes[m - 1] - nodes[m - 2])
            } else {
                0.5 * (nodes[j + 1] - nodes[j - 1])
            }
        })
        .collect()
}

/// Measurement distribution of the square-root observable: probabilities
/// p_j = |(Uψ)(t_j)|²·Δt_j normalized to unit total mass.
pub fn time_distribution(psi: &WaveFunction, u: &TransformMatrix) -> Result<Vec<f64>> {
    if psi.norm_sq() == 0.0 {
        return Err(Error::DomainViolation(
            "time distribution of the zero vector is undefined".into(),
        ));
    }
    let phi = u.to_time(psi)?;
    let mut p: Vec<f64> = phi
        .values
        .iter()
        .zip(&phi.weights)
        .map(|(v, w)| v.norm_sqr() * w)
        .collect();
    let total: f64 = p.iter().sum();
    if total == 0.0 {
        return Err(Error::DomainViolation(
            "transform annihilated the state; distribution undefined".into(),
        ));
    }
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok(p)
}

/// Residuals of the time-representation action checks.
#[derive(Debug, Clone, Copy)]
pub struct TimeRepChecks {
    /// ‖U·T_F²·U† − diag(spectrum)‖_F relative.
    pub tsq_diag_residual: f64,
    /// Action defect of U·H²·U† against the Dirichlet second difference in t
    /// on a smooth interior probe, boundary rows excluded.
    pub h2_stencil_residual: f64,
    /// ‖U·T_√·U† − diag(√spectrum)‖_F relative.
    pub tsqrt_diag_residual: f64,
    /// ‖(U·H·U† − iℏ d/dt)φ‖/‖φ‖ for φ the image of E·e^{−E}; a positive gap
    /// witnesses that H is not iℏ d/dt in the time representation.
    pub h_not_generator_gap: f64,
}

/// Run the four time-representation action checks. The multiplication
/// operators diag(t²) and diag(t) are realized through the discrete spectrum
/// (λ_k and √λ_k), the values the time grid actually carries; the nominal
/// nodes kπℏ/e_max agree with them to O(h²) for fixed k.
pub fn time_rep_action_checks(
    u: &TransformMatrix,
    tsq: &OperatorMatrix,
    tsqrt: &OperatorMatrix,
) -> Result<TimeRepChecks> {
    if !u.is_default_grid() {
        return Err(Error::InvalidTimeNode(
            "action checks require the default standing-wave time grid".into(),
        ));
    }
    let grid = u.grid();
    let n = grid.len();
    let spectrum = dirichlet_second_difference_eigs(grid);

    let tsq_diag_residual = conjugation_diag_residual(u, tsq, &spectrum);
    let roots: Vec<f64> = spectrum.iter().map(|&l| l.sqrt()).collect();
    let tsqrt_diag_residual = conjugation_diag_residual(u, tsqrt, &roots);

    // (b): U H² U† against the t-grid second difference on a smooth probe
    let probe_fn = TestFunction::GaussianBump {
        mu: 5.0,
        sigma: 1.0,
    };
    let f = crate::grid::sample(&probe_fn, grid);
    let phi = u.to_time(&f)?;
    let h2f = multiply_by_power(&f, 2)?;
    let lhs_b = u.to_time(&h2f)?;
    let rhs_b = dirichlet_second_difference_t(&phi, grid.hbar());
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 2..n.saturating_sub(2) {
        num += phi.weights[j] * (lhs_b.values[j] - rhs_b[j]).norm_sqr();
        den += phi.weights[j] * rhs_b[j].norm_sqr();
    }
    let h2_stencil_residual = (num / den).sqrt();

    // (d): gap between U H U† and iℏ d/dt on the image of E e^{−E}
    let f_gap = crate::grid::sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, grid);
    let phi_gap = u.to_time(&f_gap)?;
    let hf = multiply_by_power(&f_gap, 1)?;
    let lhs_d = u.to_time(&hf)?;
    let ddt = central_derivative_t(&phi_gap, grid.hbar());
    let mut gap_sq = 0.0;
    for j in 0..n {
        gap_sq += phi_gap.weights[j] * (lhs_d.values[j] - ddt[j]).norm_sqr();
    }
    let h_not_generator_gap = (gap_sq / phi_gap.norm_sq()).sqrt();

    Ok(TimeRepChecks {
        tsq_diag_residual,
        h2_stencil_residual,
        tsqrt_diag_residual,
        h_not_generator_gap,
    })
}

fn multiply_by_power(f: &WaveFunction, power: i32) -> Result<WaveFunction> {
    let values: Vec<Complex64> = f
        .values()
        .iter()
        .zip(f.grid().nodes())
        .map(|(v, &e)| v * e.powi(power))
        .collect();
    WaveFunction::from_samples(values, Arc::clone(f.grid()))
}

/// ‖U·A·U† − diag(values)‖_F / ‖diag(values)‖_F on the default grid, for a
/// real symmetric operator A.
fn conjugation_diag_residual(u: &TransformMatrix, a: &OperatorMatrix, diag: &[f64]) -> f64 {
    let grid = u.grid();
    let n = grid.len();
    let h = grid.spacing();

    // Q_{ji} = Δt_j K_{ji}; Y[l][i] = (A·q_l)_i; M = P·Yᵀ with P_{ji} = w_i K_{ji}
    let mut q = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            q[j * n + i] = u.t_weights[j] * u.kernel[j * n + i];
        }
    }
    let a_real: Vec<f64> = a.entries().iter().map(|v| v.re).collect();
    let y = real_gemm_abt(&q, &a_real, n, n, n); // Q·Aᵀ = Q·A for symmetric A
    let mut p = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            p[j * n + i] = h * u.kernel[j * n + i];
        }
    }
    let m = real_gemm_abt(&p, &y, n, n, n);

    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        for l in 0..n {
            let target = if j == l { diag[j] } else { 0.0 };
            let d = m[j * n + l] - target;
            num += d * d;
            den += target * target;
        }
    }
    (num / den).sqrt()
}

/// −ℏ² × three-point second difference on the uniform time grid with
/// Dirichlet ghosts at t = 0 and beyond the last node.
fn dirichlet_second_difference_t(phi: &TimeSamples, hbar: f64) -> Vec<Complex64> {
    let m = phi.values.len();
    let dt = phi.weights[0];
    let c = -hbar * hbar / (dt * dt);
    let mut out = vec![Complex64::default(); m];
    for j in 0..m {
        let left = if j == 0 {
            Complex64::default()
        } else {
            phi.values[j - 1]
        };
        let right = if j + 1 == m {
            Complex64::default()
        } else {
            phi.values[j + 1]
        };
        out[j] = c * (left - 2.0 * phi.values[j] + right);
    }
    out
}

/// iℏ × central first difference on the uniform time grid; ghost zero at the
/// origin (sine-transform images are odd), one-sided at the far end.
fn central_derivative_t(phi: &TimeSamples, hbar: f64) -> Vec<Complex64> {
    let m = phi.values.len();
    let dt = phi.weights[0];
    let c = Complex64::new(0.0, hbar / (2.0 * dt));
    let mut out = vec![Complex64::default(); m];
    for j in 0..m {
        if j + 1 == m {
            out[j] = c * (3.0 * phi.values[j] - 4.0 * phi.values[j - 1] + phi.values[j - 2]);
        } else {
            let left = if j == 0 {
                Complex64::default()
            } else {
                phi.values[j - 1]
            };
            out[j] = c * (phi.values[j + 1] - left);
        }
    }
    out
}

/// Truncated delta kernel Σ_i w_i ⟨t|E_i⟩⟨E_i|t'⟩, evaluated in closed form
/// through Dirichlet sums.
pub fn delta_kernel(grid: &GridSpec, t: f64, t_prime: f64) -> f64 {
    let h = grid.spacing();
    let hbar = grid.hbar();
    let n = grid.len();
    let x_minus = h * (t - t_prime) / hbar;
    let x_plus = h * (t + t_prime) / hbar;
    (h / (std::f64::consts::PI * hbar))
        * (dirichlet_cos_sum(x_minus, n) - dirichlet_cos_sum(x_plus, n))
}

/// Σ_{i=1}^{n} cos(i·x).
fn dirichlet_cos_sum(x: f64, n: usize) -> f64 {
    let s = (0.5 * x).sin();
    if s.abs() < 1e-9 {
        // x at a multiple of 2π: every cosine is one
        return n as f64;
    }
    ((n as f64 + 0.5) * x).sin() / (2.0 * s) - 0.5
}

/// Smeared delta-normalization error: integrate the truncated kernel against
/// a smooth probe g(t') and measure the L² error against g(t) across a
/// window of evaluation points.
///
/// The smearing is a fine trapezoid over [0, support end], not a sum over
/// the conjugate nodes: on those nodes the discrete orthogonality reproduces
/// samples exactly and the truncation effect is invisible. The probe must
/// overlap the origin for the same reason; the O(1/e_max) tail of the
/// truncated kernel enters through the boundary at t' = 0, so the error
/// halves when e_max doubles at fixed grid spacing. Probes buried mid-grid
/// smear to machine-precision floors at any truncation.
pub fn smeared_delta_error(grid: &GridSpec, probe_center: f64, probe_sigma: f64) -> f64 {
    let hbar = grid.hbar();
    let probe = |t: f64| (-0.5 * ((t - probe_center) / probe_sigma).powi(2)).exp();

    // resolve the kernel oscillation at frequency e_max/ℏ
    let dt_fine = std::f64::consts::PI * hbar / (8.0 * grid.e_max());
    let support_end = probe_center + 6.0 * probe_sigma;
    let m = (support_end / dt_fine).ceil() as usize;

    let eval_points: Vec<f64> = (0..33)
        .map(|k| probe_center - probe_sigma + 2.0 * probe_sigma * k as f64 / 32.0)
        .collect();

    let mut err_sq = 0.0;
    let mut norm_sq = 0.0;
    for &t in &eval_points {
        let mut smeared = 0.0;
        for j in 0..=m {
            let tp = j as f64 * dt_fine;
            let weight = if j == 0 || j == m { 0.5 } else { 1.0 };
            smeared += weight * dt_fine * delta_kernel(grid, t, tp) * probe(tp);
        }
        let g = probe(t);
        err_sq += (smeared - g) * (smeared - g);
        norm_sq += g * g;
    }
    (err_sq / norm_sq).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;
    use crate::operators::{hamiltonian, time_candidate, tsq_friedrichs, DerivativeDomain};

    fn grid_small() -> Arc<GridSpec> {
        GridSpec::new(50.0, 199, 1.0).unwrap()
    }

    #[test]
    fn eigensystem_matches_closed_form() {
        let g = grid_small();
        let a = tsq_friedrichs(&g);
        let dec = eigensystem(&a).unwrap();
        let exact = dirichlet_second_difference_eigs(&g);
        let scale = exact.last().copied().unwrap();
        for (l, e) in dec.eigenvalues().iter().zip(&exact) {
            assert!((l - e).abs() <= 1e-10 * scale, "{l} vs {e}");
        }
    }

    #[test]
    fn eigensystem_of_diagonal_is_nodes() {
        let g = grid_small();
        let dec = eigensystem(&hamiltonian(&g)).unwrap();
        for (l, &e) in dec.eigenvalues().iter().zip(g.nodes()) {
            assert_eq!(*l, e);
        }
    }

    #[test]
    fn eigensystem_rejects_non_hermitian() {
        let g = grid_small();
        let t = time_candidate(&g, DerivativeDomain::DirichletOrigin);
        match eigensystem(&t) {
            Err(Error::NotHermitian { defect, .. }) => assert!(defect > 0.1),
            other => panic!("expected Hermiticity rejection, got {other:?}"),
        }
    }

    #[test]
    fn eigenvectors_quadrature_orthonormal() {
        let g = grid_small();
        let dec = eigensystem(&tsq_friedrichs(&g)).unwrap();
        let h = g.spacing();
        for p in [0usize, 1, 7, 100] {
            for q in [0usize, 1, 7, 100] {
                let dot: Complex64 = dec
                    .vector(p)
                    .iter()
                    .zip(dec.vector(q))
                    .map(|(a, b)| a * b.conj() * h)
                    .sum();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!(
                    (dot.re - expect).abs() < 1e-10 && dot.im.abs() < 1e-12,
                    "p={p} q={q}: {dot}"
                );
            }
        }
    }

    #[test]
    fn eigen_residual_within_contract() {
        let g = grid_small();
        let a = tsq_friedrichs(&g);
        let dec = eigensystem(&a).unwrap();
        let norm_a = a.norm_inf();
        for k in [0usize, 1, 50, 198] {
            let v = dec.vector(k);
            let av = a.matvec(v);
            let mut r = 0.0_f64;
            for (x, y) in av.iter().zip(v) {
                r = r.max((x - dec.eigenvalues()[k] * y).norm());
            }
            assert!(r <= 1e-8 * norm_a, "k={k}: residual {r}");
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let g = grid_small();
        let a = tsq_friedrichs(&g);
        let dec = eigensystem(&a).unwrap();
        let root = operator_sqrt(&dec).unwrap();
        assert_eq!(root.symbol(), OpSymbol::Tsqrt);
        let squared = root.matmul(&root).unwrap();
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for (x, y) in squared.entries().iter().zip(a.entries()) {
            num += (x - y).norm_sqr();
            den += y.norm_sqr();
        }
        assert!((num / den).sqrt() <= 1e-8, "{}", (num / den).sqrt());
    }

    #[test]
    fn sqrt_of_diagonal_takes_entrywise_roots() {
        let g = grid_small();
        let dec = eigensystem(&hamiltonian(&g)).unwrap();
        let root = operator_sqrt(&dec).unwrap();
        for (i, &e) in g.nodes().iter().enumerate() {
            assert!((root.entry(i, i).re - e.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn sqrt_smallest_eigenvalue_near_continuum() {
        let g = GridSpec::new(50.0, 999, 1.0).unwrap();
        let dec = eigensystem(&tsq_friedrichs(&g)).unwrap();
        let root = operator_sqrt(&dec).unwrap();
        let dec_root = eigensystem(&root).unwrap();
        let expected = std::f64::consts::PI / 50.0; // πℏ/e_max
        assert!(
            (dec_root.eigenvalues()[0] - expected).abs() < 1e-5,
            "{} vs {expected}",
            dec_root.eigenvalues()[0]
        );
    }

    #[test]
    fn sine_kernel_values_and_rejection() {
        let g = grid_small();
        let f = sine_kernel(&g, 0.0).unwrap();
        assert!(f.values().iter().all(|v| v.norm() == 0.0));
        assert!(sine_kernel(&g, -1.0).is_err());

        let f = sine_kernel(&g, std::f64::consts::PI).unwrap();
        // h = 0.25, E = 0.5 at node index 1
        let idx = 1;
        assert!((g.node(idx) - 0.5).abs() < 1e-12);
        let expect = (2.0 / std::f64::consts::PI).sqrt();
        assert!((f.values()[idx].re - expect).abs() < 1e-12);
    }

    #[test]
    fn friedrichs_matrix_has_sine_eigenvectors() {
        let g = grid_small();
        let a = tsq_friedrichs(&g);
        let exact = dirichlet_second_difference_eigs(&g);
        for k in [1usize, 5, 40] {
            let f = sine_kernel(&g, default_time_nodes(&g)[k - 1]).unwrap();
            let af = a.apply(&f).unwrap();
            let lambda = exact[k - 1];
            let mut num = 0.0_f64;
            for (x, y) in af.values().iter().zip(f.values()) {
                num += (x - lambda * y).norm_sqr();
            }
            let rel = (num.sqrt()) / (lambda * f.norm() / g.spacing().sqrt());
            assert!(rel <= 1e-6, "k={k} eigen-residual {rel}");
        }
    }

    #[test]
    fn default_transform_is_unitary() {
        let g = grid_small();
        let u = sine_transform(&g, None).unwrap();
        let (d1, d2) = u.unitarity_defects();
        assert!(d1 <= 1e-6, "U†U defect {d1}");
        assert!(d2 <= 1e-6, "UU† defect {d2}");
    }

    #[test]
    fn transform_roundtrip_and_isometry() {
        let g = grid_small();
        let u = sine_transform(&g, None).unwrap();
        let f = sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, &g);
        let phi = u.to_time(&f).unwrap();
        assert!((phi.norm() - f.norm()).abs() <= 1e-6 * f.norm());
        let back = u.to_energy(&phi).unwrap();
        let diff: f64 = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-6 * f.norm(), "roundtrip diff {diff}");
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = grid_small();
        let u = sine_transform(&g, None).unwrap();
        let z = WaveFunction::from_samples(vec![Complex64::default(); g.len()], Arc::clone(&g))
            .unwrap();
        let phi = u.to_time(&z).unwrap();
        assert!(phi.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn transform_of_decaying_exponential_matches_closed_form() {
        // ∫ e^{−E} sin(Et) dE = t/(1+t²)
        let g = GridSpec::new(50.0, 999, 1.0).unwrap();
        let u = sine_transform(&g, None).unwrap();
        let f = sample(&TestFunction::ExpDecay { a: 1.0 }, &g);
        let phi = u.to_time(&f).unwrap();
        let amp = (2.0 / std::f64::consts::PI).sqrt();
        let (j, &t) = u
            .t_nodes()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                ((*a) - 1.0)
                    .abs()
                    .partial_cmp(&((*b) - 1.0).abs())
                    .unwrap()
            })
            .unwrap();
        let expect = amp * t / (1.0 + t * t);
        assert!(
            (phi.values[j].re - expect).abs() <= 1e-3,
            "{} vs {expect}",
            phi.values[j].re
        );
        // peak of |Uf| sits at the maximum of t/(1+t²), i.e. t = 1
        let (jmax, _) = phi
            .values
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        assert!((u.t_nodes()[jmax] - 1.0).abs() <= 2.0 * u.t_weights()[0]);
    }

    #[test]
    fn sine_kernel_transforms_to_delta_column() {
        let g = grid_small();
        let u = sine_transform(&g, None).unwrap();
        let k = 12;
        let f = sine_kernel(&g, u.t_nodes()[k]).unwrap();
        let phi = u.to_time(&f).unwrap();
        let peak = phi.values[k].norm();
        for (j, v) in phi.values.iter().enumerate() {
            if j != k {
                assert!(
                    v.norm() <= 1e-6 * peak,
                    "off-peak leakage at {j}: {} vs peak {peak}",
                    v.norm()
                );
            }
        }
        // delta normalization: the peak is 1/Δt
        assert!((peak * u.t_weights()[k] - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn transform_rejects_bad_time_grids() {
        let g = grid_small();
        assert!(sine_transform(&g, Some(vec![-1.0, 0.5])).is_err());
        assert!(sine_transform(&g, Some(vec![0.5, 0.5])).is_err());
        assert!(sine_transform(&g, Some(vec![])).is_err());
    }

    #[test]
    fn distribution_concentrates_on_kernel_node() {
        let g = grid_small();
        let u = sine_transform(&g, None).unwrap();
        let k = 30;
        let psi = sine_kernel(&g, u.t_nodes()[k]).unwrap();
        let p = time_distribution(&psi, &u).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert!(p[k] >= 0.99, "p[{k}] = {}", p[k]);
    }

    #[test]
    fn distribution_mode_for_exponential_sits_near_unit_time() {
        let g = GridSpec::new(50.0, 999, 1.0).unwrap();
        let u = sine_transform(&g, None).unwrap();
        let psi = sample(&TestFunction::ExpDecay { a: 1.0 }, &g);
        let p = time_distribution(&psi, &u).unwrap();
        let (jmax, _) = p
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .unwrap();
        let dt = u.t_weights()[0];
        assert!(
            (u.t_nodes()[jmax] - 1.0).abs() <= 2.0 * dt,
            "mode at {}",
            u.t_nodes()[jmax]
        );
    }

    #[test]
    fn distribution_rejects_zero_state() {
        let g = grid_small();
        let u = sine_transform(&g, None).unwrap();
        let z = WaveFunction::from_samples(vec![Complex64::default(); g.len()], Arc::clone(&g))
            .unwrap();
        assert!(time_distribution(&z, &u).is_err());
    }

    #[test]
    fn action_checks_reject_custom_grid() {
        let g = grid_small();
        let u = sine_transform(&g, Some(vec![0.1, 0.2, 0.9])).unwrap();
        let a = tsq_friedrichs(&g);
        let dec = eigensystem(&a).unwrap();
        let root = operator_sqrt(&dec).unwrap();
        assert!(time_rep_action_checks(&u, &a, &root).is_err());
    }

    #[test]
    fn delta_kernel_matches_direct_sum() {
        let g = grid_small();
        let (t, tp) = (3.1, 2.9);
        let direct: f64 = g
            .nodes()
            .iter()
            .map(|&e| g.spacing() * (2.0 / std::f64::consts::PI) * (e * t).sin() * (e * tp).sin())
            .sum();
        let closed = delta_kernel(&g, t, tp);
        assert!((direct - closed).abs() < 1e-10, "{direct} vs {closed}");
    }
}
