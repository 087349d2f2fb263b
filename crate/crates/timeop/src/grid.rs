//! Uniform discretization of the half-line Hilbert space L²([0, ∞), dE),
//! truncated at `e_max`, together with the built-in family of analytic test
//! functions.
//!
//! The grid carries `n` interior nodes E_i = i·h with h = e_max/(n+1); the
//! endpoints E = 0 and E = e_max are deliberately off-grid (Dirichlet data
//! lives on ghost points). All quadrature weights equal h, which makes the
//! node sum a trapezoid rule for integrands vanishing at both endpoints.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum admissible number of interior nodes.
pub const MIN_NODES: usize = 16;

/// Truncated uniform grid on (0, e_max) with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    e_max: f64,
    n: usize,
    hbar: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GridSpec {
    /// Build a grid with `n` interior nodes on (0, e_max).
    pub fn new(e_max: f64, n: usize, hbar: f64) -> Result<Arc<Self>> {
        if !(e_max > 0.0) || !e_max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "e_max",
                reason: format!("must be finite and positive, got {e_max}"),
            });
        }
        if n < MIN_NODES {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("need at least {MIN_NODES} interior nodes, got {n}"),
            });
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParameter {
                name: "hbar",
                reason: format!("must be finite and positive, got {hbar}"),
            });
        }
        let h = e_max / (n as f64 + 1.0);
        let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
        let weights = vec![h; n];
        Ok(Arc::new(GridSpec {
            e_max,
            n,
            hbar,
            h,
            nodes,
            weights,
        }))
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Node spacing h = e_max/(n+1).
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Companion grid with the truncation point doubled at identical spacing.
    /// Used by the L² growth classifier.
    pub fn doubled_e_max(&self) -> Result<Arc<Self>> {
        GridSpec::new(2.0 * self.e_max, 2 * self.n + 1, self.hbar)
    }

    pub fn same_grid(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && self.e_max == other.e_max
            && self.hbar == other.hbar
    }
}

/// Named analytic test functions with closed-form boundary data.
///
/// The family is addressable by string name plus parameters; this is the
/// surface the run-configuration format uses.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// E^k · exp(−a·E), k ≥ 0.
    PolyExp { k: u32, a: f64 },
    /// exp(−(E−mu)²/(2σ²)).
    GaussianBump { mu: f64, sigma: f64 },
    /// exp(−a·E).
    ExpDecay { a: f64 },
    /// √(2/(πℏ)) · sin(E·t/ℏ); evaluation needs the grid's ℏ.
    SineKernel { t: f64, hbar: f64 },
    /// exp(q·E) for complex q; deficiency candidates and spectrum witnesses.
    ComplexExp { q: Complex64 },
}

impl TestFunction {
    /// Look up a family member by name. Parameters are positional:
    /// `poly_exp(k, a)`, `gaussian_bump(mu, sigma)`, `exp_decay(a)`,
    /// `sine_kernel(t)` (ℏ is taken from the grid at sampling time).
    pub fn by_name(name: &str, params: &[f64], hbar: f64) -> Result<Self> {
        match name {
            "poly_exp" => {
                let (k, a) = match params {
                    [k, a] => (*k, *a),
                    _ => return Err(Error::UnknownFunction(format!("{name} expects (k, a)"))),
                };
                if k < 0.0 || k.fract() != 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "k",
                        reason: format!("poly_exp power must be a nonnegative integer, got {k}"),
                    });
                }
                Ok(TestFunction::PolyExp { k: k as u32, a })
            }
            "gaussian_bump" => match params {
                [mu, sigma] => Ok(TestFunction::GaussianBump {
                    mu: *mu,
                    sigma: *sigma,
                }),
                _ => Err(Error::UnknownFunction(format!("{name} expects (mu, sigma)"))),
            },
            "exp_decay" => match params {
                [a] => Ok(TestFunction::ExpDecay { a: *a }),
                _ => Err(Error::UnknownFunction(format!("{name} expects (a)"))),
            },
            "sine_kernel" => match params {
                [t] => Ok(TestFunction::SineKernel { t: *t, hbar }),
                _ => Err(Error::UnknownFunction(format!("{name} expects (t)"))),
            },
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }

    /// Pointwise evaluation at energy E ≥ 0.
    pub fn eval(&self, e: f64) -> Complex64 {
        match self {
            TestFunction::PolyExp { k, a } => {
                Complex64::new(e.powi(*k as i32) * (-a * e).exp(), 0.0)
            }
            TestFunction::GaussianBump { mu, sigma } => {
                let u = (e - mu) / sigma;
                Complex64::new((-0.5 * u * u).exp(), 0.0)
            }
            TestFunction::ExpDecay { a } => Complex64::new((-a * e).exp(), 0.0),
            TestFunction::SineKernel { t, hbar } => {
                let amp = (2.0 / (std::f64::consts::PI * hbar)).sqrt();
                Complex64::new(amp * (e * t / hbar).sin(), 0.0)
            }
            TestFunction::ComplexExp { q } => (q * e).exp(),
        }
    }

    /// Closed-form value at the origin.
    pub fn origin_value(&self) -> Complex64 {
        match self {
            TestFunction::PolyExp { k, .. } => {
                if *k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            TestFunction::GaussianBump { mu, sigma } => {
                let u = mu / sigma;
                Complex64::new((-0.5 * u * u).exp(), 0.0)
            }
            TestFunction::ExpDecay { .. } => Complex64::new(1.0, 0.0),
            TestFunction::SineKernel { .. } => Complex64::new(0.0, 0.0),
            TestFunction::ComplexExp { .. } => Complex64::new(1.0, 0.0),
        }
    }

    /// Closed-form derivative, where the family has a simple one.
    pub fn derivative(&self, e: f64) -> Complex64 {
        match self {
            TestFunction::PolyExp { k, a } => {
                let poly = if *k == 0 {
                    -a
                } else {
                    *k as f64 * e.powi(*k as i32 - 1) - a * e.powi(*k as i32)
                };
                Complex64::new(poly * (-a * e).exp(), 0.0)
            }
            TestFunction::GaussianBump { mu, sigma } => {
                let u = (e - mu) / sigma;
                Complex64::new(-(u / sigma) * (-0.5 * u * u).exp(), 0.0)
            }
            TestFunction::ExpDecay { a } => Complex64::new(-a * (-a * e).exp(), 0.0),
            TestFunction::SineKernel { t, hbar } => {
                let amp = (2.0 / (std::f64::consts::PI * hbar)).sqrt();
                Complex64::new(amp * (t / hbar) * (e * t / hbar).cos(), 0.0)
            }
            TestFunction::ComplexExp { q } => q * (q * e).exp(),
        }
    }

    /// Stable display name for reports; comma-free so it can sit in a CSV
    /// column unquoted.
    pub fn label(&self) -> String {
        match self {
            TestFunction::PolyExp { k, a } => format!("poly_exp(k={k};a={a})"),
            TestFunction::GaussianBump { mu, sigma } => {
                format!("gaussian_bump(mu={mu};sigma={sigma})")
            }
            TestFunction::ExpDecay { a } => format!("exp_decay(a={a})"),
            TestFunction::SineKernel { t, .. } => format!("sine_kernel(t={t})"),
            TestFunction::ComplexExp { q } => format!("complex_exp(q={q})"),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Complex-valued samples of an L² function on a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct WaveFunction {
    values: Vec<Complex64>,
    grid: Arc<GridSpec>,
    /// Analytic value f(0) when known, else quadratic extrapolation from the
    /// first three nodes.
    origin_value: Complex64,
}

impl WaveFunction {
    /// Wrap raw samples; the origin value is extrapolated.
    pub fn from_samples(values: Vec<Complex64>, grid: Arc<GridSpec>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("expected {} samples, got {}", grid.len(), values.len()),
            });
        }
        let origin_value = extrapolate_origin(&values);
        Ok(WaveFunction {
            values,
            grid,
            origin_value,
        })
    }

    /// Wrap raw samples with a known origin value.
    pub fn with_origin(
        values: Vec<Complex64>,
        grid: Arc<GridSpec>,
        origin_value: Complex64,
    ) -> Result<Self> {
        let mut wf = WaveFunction::from_samples(values, grid)?;
        wf.origin_value = origin_value;
        Ok(wf)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn origin_value(&self) -> Complex64 {
        self.origin_value
    }

    /// Quadrature norm squared Σ w_i |f_i|².
    pub fn norm_sq(&self) -> f64 {
        let w = self.grid.weights();
        self.values
            .iter()
            .zip(w)
            .map(|(v, wi)| wi * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// True when the origin value vanishes relative to the sample scale,
    /// i.e. the function sits in the discrete stand-in for the f(0) = 0
    /// domain condition.
    pub fn origin_vanishes(&self) -> bool {
        let scale = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        self.origin_value.norm() <= crate::DOMAIN_ORIGIN_TOL * scale
    }

    /// True when the samples have decayed below the truncation budget at the
    /// far end of the grid.
    pub fn decays_at_truncation(&self) -> bool {
        let scale = self
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let tail = self.values.last().map(|v| v.norm()).unwrap_or(0.0);
        tail <= 1.0e-12 * scale
    }

    pub fn scale(&self, c: Complex64) -> WaveFunction {
        WaveFunction {
            values: self.values.iter().map(|v| c * v).collect(),
            grid: Arc::clone(&self.grid),
            origin_value: c * self.origin_value,
        }
    }

    pub fn add(&self, other: &WaveFunction) -> Result<WaveFunction> {
        check_same_grid(self, other)?;
        Ok(WaveFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            grid: Arc::clone(&self.grid),
            origin_value: self.origin_value + other.origin_value,
        })
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<WaveFunction> {
        check_same_grid(self, other)?;
        Ok(WaveFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            grid: Arc::clone(&self.grid),
            origin_value: self.origin_value - other.origin_value,
        })
    }
}

/// Quadratic extrapolation of a sample vector to E = 0.
pub(crate) fn extrapolate_origin(values: &[Complex64]) -> Complex64 {
    match values {
        [] => Complex64::new(0.0, 0.0),
        [a] => *a,
        [a, b] => 2.0 * a - b,
        [a, b, c, ..] => 3.0 * a - 3.0 * b + c,
    }
}

/// Sample a named analytic function on a grid. The origin value is set from
/// the closed form.
pub fn sample(expr: &TestFunction, grid: &Arc<GridSpec>) -> WaveFunction {
    let values: Vec<Complex64> = grid.nodes().iter().map(|&e| expr.eval(e)).collect();
    WaveFunction {
        values,
        grid: Arc::clone(grid),
        origin_value: expr.origin_value(),
    }
}

fn check_same_grid(g: &WaveFunction, f: &WaveFunction) -> Result<()> {
    if !g.grid.same_grid(&f.grid) {
        return Err(Error::GridMismatch {
            left: g.grid.len(),
            right: f.grid.len(),
        });
    }
    Ok(())
}

/// Quadrature inner product Σ_i w_i · g_i · conj(f_i).
///
/// The pairing is linear in the first argument and conjugates the second, so
/// that the boundary-term identity for the derivative operator comes out with
/// the sign the surrounding checks expect; see `operators::symmetry_defect`.
/// It is conjugate symmetric: inner(g, f) = conj(inner(f, g)).
pub fn inner(g: &WaveFunction, f: &WaveFunction) -> Result<Complex64> {
    check_same_grid(g, f)?;
    let w = g.grid.weights();
    Ok(g.values
        .iter()
        .zip(&f.values)
        .zip(w)
        .map(|((gi, fi), wi)| wi * gi * fi.conj())
        .sum())
}
