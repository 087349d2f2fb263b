//! Matrix realizations of the half-line operators: the multiplication
//! operator H, the derivative operator T = iℏ d/dE with and without the
//! origin condition, and the Friedrichs second-difference operator T_F².
//!
//! Stencils are second order: central differences in the interior, ghost
//! values where a Dirichlet condition applies, one-sided second-order
//! closures where none does. The artificial Dirichlet wall at e_max is a
//! truncation artifact; every report that depends on it says so.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{extrapolate_origin, inner, sample, GridSpec, TestFunction, WaveFunction};

/// Boundary condition a matrix encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    None,
    DirichletOrigin,
    DirichletBoth,
}

/// Operator label for reports and dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpSymbol {
    H,
    T,
    Tdag,
    TsqF,
    Tsqrt,
    Derived,
}

impl OpSymbol {
    pub fn as_str(&self) -> &'static str {
        match self {
            OpSymbol::H => "H",
            OpSymbol::T => "T",
            OpSymbol::Tdag => "Tdag",
            OpSymbol::TsqF => "TsqF",
            OpSymbol::Tsqrt => "Tsqrt",
            OpSymbol::Derived => "derived",
        }
    }
}

/// Domain flavor for the first-derivative operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeDomain {
    /// Ghost value f(0) = 0: the symmetric operator T.
    DirichletOrigin,
    /// No condition at the origin: the adjoint T†.
    Free,
}

/// Dense complex matrix acting on sample vectors over a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: Vec<Complex64>,
    n: usize,
    grid: Arc<GridSpec>,
    bc_tag: BoundaryTag,
    symbol: OpSymbol,
}

impl OperatorMatrix {
    pub fn from_entries(
        entries: Vec<Complex64>,
        grid: Arc<GridSpec>,
        bc_tag: BoundaryTag,
        symbol: OpSymbol,
    ) -> Self {
        let n = grid.len();
        assert_eq!(entries.len(), n * n, "operator must be square of grid size");
        OperatorMatrix {
            entries,
            n,
            grid,
            bc_tag,
            symbol,
        }
    }

    pub fn zeros(grid: &Arc<GridSpec>, symbol: OpSymbol) -> Self {
        let n = grid.len();
        OperatorMatrix {
            entries: vec![Complex64::default(); n * n],
            n,
            grid: Arc::clone(grid),
            bc_tag: BoundaryTag::None,
            symbol,
        }
    }

    pub fn identity(grid: &Arc<GridSpec>) -> Self {
        let mut m = OperatorMatrix::zeros(grid, OpSymbol::Derived);
        for i in 0..m.n {
            m.entries[i * m.n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn bc_tag(&self) -> BoundaryTag {
        self.bc_tag
    }

    pub fn symbol(&self) -> OpSymbol {
        self.symbol
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn set_symbol(&mut self, symbol: OpSymbol) {
        self.symbol = symbol;
    }

    pub fn set_bc_tag(&mut self, bc: BoundaryTag) {
        self.bc_tag = bc;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Matrix-vector product on raw samples.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::default(); self.n];
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = Complex64::default();
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    /// Apply to a wave function; the image's origin value is extrapolated.
    pub fn apply(&self, f: &WaveFunction) -> Result<WaveFunction> {
        if !self.grid.same_grid(f.grid()) {
            return Err(Error::GridMismatch {
                left: self.n,
                right: f.grid().len(),
            });
        }
        let values = self.matvec(f.values());
        WaveFunction::from_samples(values, Arc::clone(&self.grid))
    }

    /// max |M_ij − conj(M_ji)| relative to the largest entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..self.n {
            for j in 0..=i {
                let a = self.entries[i * self.n + j];
                let b = self.entries[j * self.n + i];
                worst = worst.max((a - b.conj()).norm());
                scale = scale.max(a.norm()).max(b.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn scale(&self, c: Complex64) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.iter().map(|v| c * v).collect(),
            n: self.n,
            grid: Arc::clone(&self.grid),
            bc_tag: BoundaryTag::None,
            symbol: OpSymbol::Derived,
        }
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same_grid(other)?;
        Ok(OperatorMatrix {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            n: self.n,
            grid: Arc::clone(&self.grid),
            bc_tag: BoundaryTag::None,
            symbol: OpSymbol::Derived,
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same_grid(other)?;
        Ok(OperatorMatrix {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
            n: self.n,
            grid: Arc::clone(&self.grid),
            bc_tag: BoundaryTag::None,
            symbol: OpSymbol::Derived,
        })
    }

    /// Dense product self · other.
    pub fn matmul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check_same_grid(other)?;
        let n = self.n;
        let mut out = vec![Complex64::default(); n * n];
        for i in 0..n {
            let row_a = &self.entries[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, a) in row_a.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_b = &other.entries[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Ok(OperatorMatrix {
            entries: out,
            n,
            grid: Arc::clone(&self.grid),
            bc_tag: BoundaryTag::None,
            symbol: OpSymbol::Derived,
        })
    }

    pub fn check_same_grid(&self, other: &OperatorMatrix) -> Result<()> {
        if !self.grid.same_grid(&other.grid) {
            return Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Max absolute row sum (operator ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Multiplication operator (Hf)(E) = E·f(E): diagonal with the grid nodes.
pub fn hamiltonian(grid: &Arc<GridSpec>) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(grid, OpSymbol::H);
    for (i, &e) in grid.nodes().iter().enumerate() {
        m.set_entry(i, i, Complex64::new(e, 0.0));
    }
    m.set_bc_tag(BoundaryTag::None);
    m
}

/// First-derivative operator iℏ d/dE.
///
/// Interior rows use the second-order central difference. With
/// [`DerivativeDomain::DirichletOrigin`] the first row sees the ghost value
/// f(0) = 0 (the symmetric operator T); with [`DerivativeDomain::Free`] it
/// uses a one-sided second-order difference (the adjoint T†). The last row is
/// always one-sided: the truncation at e_max imposes no condition on first
/// derivatives.
pub fn time_candidate(grid: &Arc<GridSpec>, domain: DerivativeDomain) -> OperatorMatrix {
    let n = grid.len();
    let c = Complex64::new(0.0, grid.hbar() / (2.0 * grid.spacing()));
    let symbol = match domain {
        DerivativeDomain::DirichletOrigin => OpSymbol::T,
        DerivativeDomain::Free => OpSymbol::Tdag,
    };
    let mut m = OperatorMatrix::zeros(grid, symbol);

    match domain {
        DerivativeDomain::DirichletOrigin => {
            // (f_2 − f(0))/2h with ghost f(0) = 0
            m.set_entry(0, 1, c);
        }
        DerivativeDomain::Free => {
            // (−3f_1 + 4f_2 − f_3)/2h
            m.set_entry(0, 0, -3.0 * c);
            m.set_entry(0, 1, 4.0 * c);
            m.set_entry(0, 2, -c);
        }
    }
    for i in 1..n - 1 {
        m.set_entry(i, i - 1, -c);
        m.set_entry(i, i + 1, c);
    }
    // (3f_n − 4f_{n−1} + f_{n−2})/2h
    m.set_entry(n - 1, n - 1, 3.0 * c);
    m.set_entry(n - 1, n - 2, -4.0 * c);
    m.set_entry(n - 1, n - 3, c);

    m.set_bc_tag(match domain {
        DerivativeDomain::DirichletOrigin => BoundaryTag::DirichletOrigin,
        DerivativeDomain::Free => BoundaryTag::None,
    });
    m
}

/// Friedrichs realization of −ℏ² d²/dE²: the three-point second difference
/// with Dirichlet ghost values at both E = 0 and E = e_max. Hermitian with
/// strictly positive spectrum.
pub fn tsq_friedrichs(grid: &Arc<GridSpec>) -> OperatorMatrix {
    let n = grid.len();
    let h = grid.spacing();
    let hbar = grid.hbar();
    let diag = Complex64::new(2.0 * hbar * hbar / (h * h), 0.0);
    let off = Complex64::new(-hbar * hbar / (h * h), 0.0);
    let mut m = OperatorMatrix::zeros(grid, OpSymbol::TsqF);
    for i in 0..n {
        m.set_entry(i, i, diag);
        if i > 0 {
            m.set_entry(i, i - 1, off);
        }
        if i + 1 < n {
            m.set_entry(i, i + 1, off);
        }
    }
    m.set_bc_tag(BoundaryTag::DirichletBoth);
    m
}

/// Second-derivative expression −ℏ² d²/dE² with no boundary condition:
/// one-sided second-order closures at both ends. This is the matrix through
/// which adjoint candidates of T² are screened.
pub fn tsq_free(grid: &Arc<GridSpec>) -> OperatorMatrix {
    let n = grid.len();
    let h = grid.spacing();
    let k = -grid.hbar() * grid.hbar() / (h * h);
    let mut m = OperatorMatrix::zeros(grid, OpSymbol::Derived);
    // (2f_1 − 5f_2 + 4f_3 − f_4)/h²
    m.set_entry(0, 0, Complex64::new(2.0 * k, 0.0));
    m.set_entry(0, 1, Complex64::new(-5.0 * k, 0.0));
    m.set_entry(0, 2, Complex64::new(4.0 * k, 0.0));
    m.set_entry(0, 3, Complex64::new(-k, 0.0));
    for i in 1..n - 1 {
        m.set_entry(i, i - 1, Complex64::new(k, 0.0));
        m.set_entry(i, i, Complex64::new(-2.0 * k, 0.0));
        m.set_entry(i, i + 1, Complex64::new(k, 0.0));
    }
    m.set_entry(n - 1, n - 1, Complex64::new(2.0 * k, 0.0));
    m.set_entry(n - 1, n - 2, Complex64::new(-5.0 * k, 0.0));
    m.set_entry(n - 1, n - 3, Complex64::new(4.0 * k, 0.0));
    m.set_entry(n - 1, n - 4, Complex64::new(-k, 0.0));
    m
}

/// Result of probing the boundary-term identity
/// ⟨g|Tf⟩ − ⟨Tg|f⟩ = iℏ·f(0)·g*(0).
#[derive(Debug, Clone, Copy)]
pub struct SymmetryDefect {
    /// Discrete value of ⟨g|Tf⟩ − ⟨Tg|f⟩ including the origin half-cell.
    pub lhs: Complex64,
    /// iℏ·f(0)·conj(g(0)) from the known origin data.
    pub boundary_term: Complex64,
    /// |lhs − boundary_term| / (|boundary_term| + 1).
    pub mismatch: f64,
}

/// Evaluate the boundary-term identity for a derivative-operator matrix on a
/// pair of analytic-family functions with known origin values.
///
/// The node sum alone misses the identity at first order in h because the
/// quadrature cell [0, h/2) is off-grid, so the pairing is completed with its
/// trapezoid endpoint term, using the known f(0), g(0) and the images' origin
/// values extrapolated from their samples.
pub fn symmetry_defect(
    op: &OperatorMatrix,
    f: &WaveFunction,
    g: &WaveFunction,
) -> Result<SymmetryDefect> {
    if !matches!(op.symbol(), OpSymbol::T | OpSymbol::Tdag) {
        return Err(Error::DomainViolation(format!(
            "symmetry defect is defined for first-derivative operators, got {}",
            op.symbol().as_str()
        )));
    }
    let tf = op.apply(f)?;
    let tg = op.apply(g)?;
    let hbar = op.grid().hbar();
    let h = op.grid().spacing();

    let node_sum = inner(g, &tf)? - inner(&tg, f)?;
    let endpoint = 0.5
        * h
        * (g.origin_value() * tf.origin_value().conj()
            - tg.origin_value() * f.origin_value().conj());
    let lhs = node_sum + endpoint;

    let boundary_term = Complex64::new(0.0, hbar) * f.origin_value() * g.origin_value().conj();
    let mismatch = (lhs - boundary_term).norm() / (boundary_term.norm() + 1.0);
    Ok(SymmetryDefect {
        lhs,
        boundary_term,
        mismatch,
    })
}

/// Which operator a deficiency probe targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeficiencyTarget {
    /// iℏ d/dE
    T,
    /// −ℏ² d²/dE²
    TSquared,
}

/// Sign of the defect equation A†f = ±i·f.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectSign {
    Plus,
    Minus,
}

impl DefectSign {
    fn unit(&self) -> Complex64 {
        match self {
            DefectSign::Plus => Complex64::new(0.0, 1.0),
            DefectSign::Minus => Complex64::new(0.0, -1.0),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DefectSign::Plus => "+",
            DefectSign::Minus => "-",
        }
    }
}

/// Witness record for one deficiency candidate.
#[derive(Debug, Clone)]
pub struct DeficiencyReport {
    pub operator: DeficiencyTarget,
    pub sign: DefectSign,
    pub candidate: TestFunction,
    pub l2_member: bool,
    /// Relative residual of (A† − ±i)f on the grid.
    pub residual: f64,
    /// Grid-consistent acceptance threshold for the residual.
    pub tolerance: f64,
    /// Norm² growth factor under doubling of e_max at fixed spacing.
    pub growth_ratio: f64,
    pub index_contribution: u32,
}

/// Residual tolerance for deficiency candidates: the second-order stencils
/// resolve the analytic candidates to O((h/ℏ)²). The coefficient covers the
/// one-sided closure rows of the second-difference candidates, whose error
/// constant (11/12)·h²·|k|⁴ dominates on coarse grids.
pub fn deficiency_tolerance(grid: &GridSpec) -> f64 {
    let x = grid.spacing() / grid.hbar();
    0.5 * x * x
}

/// Norm growth ratio above which a candidate is classified as not
/// square-integrable. Decaying candidates give ratios within 1e−12 of one;
/// growing ones give ratios on the order of e^{2·e_max}.
pub const GROWTH_RATIO_MAX: f64 = 2.0;

/// Analytic deficiency candidate for a target and sign: the unique decaying
/// (or growing, for (T, +)) solution of the defect equation.
pub fn deficiency_candidate(which: DeficiencyTarget, sign: DefectSign, hbar: f64) -> TestFunction {
    match which {
        DeficiencyTarget::T => {
            // iℏ f' = ±i f  ⇒  f = exp(±E/ℏ)
            let q = match sign {
                DefectSign::Plus => 1.0 / hbar,
                DefectSign::Minus => -1.0 / hbar,
            };
            TestFunction::ComplexExp {
                q: Complex64::new(q, 0.0),
            }
        }
        DeficiencyTarget::TSquared => {
            // −ℏ² f'' = ±i f  ⇒  k² = ∓i/ℏ²; take the root with Re k < 0
            let root = match sign {
                DefectSign::Plus => Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
                DefectSign::Minus => Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            };
            TestFunction::ComplexExp { q: -root / hbar }
        }
    }
}

/// Probe one deficiency direction: sample the analytic candidate, apply the
/// free (adjoint-side) matrix, and classify by residual plus the L² growth
/// test under e_max doubling.
pub fn deficiency_report(
    which: DeficiencyTarget,
    sign: DefectSign,
    grid: &Arc<GridSpec>,
) -> Result<DeficiencyReport> {
    let hbar = grid.hbar();
    let candidate = deficiency_candidate(which, sign, hbar);
    let f = sample(&candidate, grid);

    let adjoint = match which {
        DeficiencyTarget::T => time_candidate(grid, DerivativeDomain::Free),
        DeficiencyTarget::TSquared => tsq_free(grid),
    };
    let eig = sign.unit();
    let af = adjoint.apply(&f)?;
    let mut resid_sq = 0.0;
    for ((y, x), w) in af.values().iter().zip(f.values()).zip(grid.weights()) {
        resid_sq += w * (y - eig * x).norm_sqr();
    }
    let residual = (resid_sq / f.norm_sq()).sqrt();

    let doubled = grid.doubled_e_max()?;
    let f2 = sample(&candidate, &doubled);
    let growth_ratio = f2.norm_sq() / f.norm_sq();
    let l2_member = growth_ratio.is_finite() && growth_ratio < GROWTH_RATIO_MAX;

    let tolerance = deficiency_tolerance(grid);
    let index_contribution = u32::from(l2_member && residual <= tolerance);
    Ok(DeficiencyReport {
        operator: which,
        sign,
        candidate,
        l2_member,
        residual,
        tolerance,
        growth_ratio,
        index_contribution,
    })
}

/// Assemble the defect indices (d₊, d₋) for a target operator.
pub fn deficiency_indices(which: DeficiencyTarget, grid: &Arc<GridSpec>) -> Result<(u32, u32)> {
    let plus = deficiency_report(which, DefectSign::Plus, grid)?;
    let minus = deficiency_report(which, DefectSign::Minus, grid)?;
    Ok((plus.index_contribution, minus.index_contribution))
}

/// Residual of the T†-eigenfunction witnessing a point z with Im z > 0 in the
/// upper-half-plane part of σ(T): builds g_z(E) = exp(−i·conj(z)·E/ℏ), an L²
/// eigenfunction of T† with eigenvalue conj(z), and returns
/// ‖(T† − conj(z))·g_z‖ / ‖g_z‖.
pub fn residual_spectrum_witness(z: Complex64, grid: &Arc<GridSpec>) -> Result<f64> {
    if z.im <= 0.0 {
        return Err(Error::LowerHalfPlane(z.im));
    }
    let hbar = grid.hbar();
    let q = -Complex64::i() * z.conj() / hbar;
    let g = sample(&TestFunction::ComplexExp { q }, grid);
    let adjoint = time_candidate(grid, DerivativeDomain::Free);
    let eig = z.conj();
    let ag = adjoint.apply(&g)?;
    let mut resid_sq = 0.0;
    for ((y, x), w) in ag.values().iter().zip(g.values()).zip(grid.weights()) {
        resid_sq += w * (y - eig * x).norm_sqr();
    }
    Ok((resid_sq / g.norm_sq()).sqrt())
}

/// Quadratic extrapolation of an image vector to the origin; exposed for the
/// boundary-corrected pairings elsewhere in the crate.
pub fn origin_of(values: &[Complex64]) -> Complex64 {
    extrapolate_origin(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid_default() -> Arc<GridSpec> {
        GridSpec::new(50.0, 999, 1.0).unwrap()
    }

    #[test]
    fn hamiltonian_is_real_diagonal() {
        let g = grid_default();
        let h = hamiltonian(&g);
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert_eq!(h.entry(0, 0).re, g.spacing());
        let f = sample(&TestFunction::ExpDecay { a: 1.0 }, &g);
        let hf = h.apply(&f).unwrap();
        let idx = 19; // E = 1
        assert!((hf.values()[idx].re - 1.0 * (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_analytic_interior() {
        let g = grid_default();
        let t = time_candidate(&g, DerivativeDomain::DirichletOrigin);
        let f = sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, &g);
        let tf = t.apply(&f).unwrap();
        let idx = 39; // E = 2
        assert!((g.node(idx) - 2.0).abs() < 1e-12);
        let expected = Complex64::new(0.0, (1.0 - 2.0) * (-2.0_f64).exp());
        assert!(
            (tf.values()[idx] - expected).norm() < 1e-4,
            "{} vs {}",
            tf.values()[idx],
            expected
        );
    }

    #[test]
    fn derivative_matches_analytic_on_standing_wave() {
        // first standing wave t_1 = πℏ/e_max; derivative iℏ(t_1/ℏ)cos(E t_1/ℏ)
        let g = grid_default();
        let t0 = std::f64::consts::PI * g.hbar() / g.e_max();
        let t = time_candidate(&g, DerivativeDomain::DirichletOrigin);
        let f = sample(&TestFunction::SineKernel { t: t0, hbar: 1.0 }, &g);
        let tf = t.apply(&f).unwrap();
        let fam = TestFunction::SineKernel { t: t0, hbar: 1.0 };
        for idx in [10usize, 200, 500, 900] {
            let expected = Complex64::i() * fam.derivative(g.node(idx));
            assert!(
                (tf.values()[idx] - expected).norm() < 1e-6,
                "node {idx}: {} vs {}",
                tf.values()[idx],
                expected
            );
        }
    }

    #[test]
    fn free_and_dirichlet_differ_only_in_first_row() {
        let g = grid_default();
        let t = time_candidate(&g, DerivativeDomain::DirichletOrigin);
        let tdag = time_candidate(&g, DerivativeDomain::Free);
        for i in 1..g.len() {
            for j in 0..g.len() {
                assert_eq!(t.entry(i, j), tdag.entry(i, j), "row {i} col {j}");
            }
        }
        assert_ne!(t.row(0), tdag.row(0));
    }

    #[test]
    fn friedrichs_matrix_is_hermitian() {
        let g = grid_default();
        let a = tsq_friedrichs(&g);
        assert!(a.hermiticity_defect() <= 1e-12);
        assert_eq!(a.bc_tag(), BoundaryTag::DirichletBoth);
    }

    #[test]
    fn derivative_is_not_hermitian() {
        let g = grid_default();
        let t = time_candidate(&g, DerivativeDomain::DirichletOrigin);
        assert!(t.hermiticity_defect() > 0.1);
    }

    #[test]
    fn boundary_term_identity_for_exponential_pair() {
        // f = g = e^{−E}: lhs ≈ iℏ, mismatch ≤ 5e−3 at n = 999
        let g = grid_default();
        let t = time_candidate(&g, DerivativeDomain::Free);
        let f = sample(&TestFunction::ExpDecay { a: 1.0 }, &g);
        let d = symmetry_defect(&t, &f, &f).unwrap();
        assert!(
            (d.boundary_term - Complex64::new(0.0, 1.0)).norm() < 1e-15,
            "boundary term {}",
            d.boundary_term
        );
        assert!((d.lhs - Complex64::new(0.0, 1.0)).norm() < 5e-3, "lhs {}", d.lhs);
        assert!(d.mismatch <= 5e-3, "mismatch {}", d.mismatch);
    }

    #[test]
    fn boundary_term_vanishes_inside_the_domain() {
        // f = g = E e^{−E} sits in the origin-vanishing domain
        let g = grid_default();
        let t = time_candidate(&g, DerivativeDomain::Free);
        let f = sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, &g);
        let d = symmetry_defect(&t, &f, &f).unwrap();
        assert_eq!(d.boundary_term, Complex64::new(0.0, 0.0));
        assert!(d.lhs.norm() <= 5e-3, "lhs {}", d.lhs);
    }

    #[test]
    fn boundary_term_zero_when_one_factor_vanishes() {
        let g = grid_default();
        let t = time_candidate(&g, DerivativeDomain::Free);
        let f = sample(&TestFunction::ExpDecay { a: 1.0 }, &g);
        let gg = sample(&TestFunction::PolyExp { k: 1, a: 1.0 }, &g);
        let d = symmetry_defect(&t, &f, &gg).unwrap();
        // boundary term iℏ·f(0)·conj(g(0)) = iℏ·1·0
        assert_eq!(d.boundary_term, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn symmetry_defect_rejects_non_derivative_operators() {
        let g = grid_default();
        let h = hamiltonian(&g);
        let f = sample(&TestFunction::ExpDecay { a: 1.0 }, &g);
        assert!(symmetry_defect(&h, &f, &f).is_err());
    }

    #[test]
    fn deficiency_minus_direction_of_t() {
        let g = grid_default();
        let rep = deficiency_report(DeficiencyTarget::T, DefectSign::Minus, &g).unwrap();
        assert!(rep.l2_member);
        assert!(rep.residual <= 1e-3, "residual {}", rep.residual);
        assert_eq!(rep.index_contribution, 1);
    }

    #[test]
    fn deficiency_plus_direction_of_t_grows() {
        let g = grid_default();
        let rep = deficiency_report(DeficiencyTarget::T, DefectSign::Plus, &g).unwrap();
        assert!(!rep.l2_member);
        assert!(
            rep.growth_ratio > 1e20 || !rep.growth_ratio.is_finite(),
            "growth ratio {}",
            rep.growth_ratio
        );
        assert_eq!(rep.index_contribution, 0);
    }

    #[test]
    fn deficiency_indices_match_expected() {
        let g = grid_default();
        assert_eq!(deficiency_indices(DeficiencyTarget::T, &g).unwrap(), (0, 1));
        assert_eq!(
            deficiency_indices(DeficiencyTarget::TSquared, &g).unwrap(),
            (1, 1)
        );
    }

    #[test]
    fn tsq_plus_candidate_uses_decaying_root() {
        let c = deficiency_candidate(DeficiencyTarget::TSquared, DefectSign::Plus, 1.0);
        let TestFunction::ComplexExp { q } = c else {
            panic!("unexpected candidate family")
        };
        let half_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q - Complex64::new(-half_sqrt2, half_sqrt2)).norm() < 1e-15);
        // its square solves k² = −i
        assert!((q * q - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn witness_for_pure_imaginary_point() {
        let g = grid_default();
        let r = residual_spectrum_witness(Complex64::new(0.0, 1.0), &g).unwrap();
        assert!(r <= 1e-2, "residual {r}");
    }

    #[test]
    fn witness_for_generic_upper_point() {
        let g = grid_default();
        let r = residual_spectrum_witness(Complex64::new(1.0, 2.0), &g).unwrap();
        assert!(r <= 1e-2, "residual {r}");
    }

    #[test]
    fn witness_rejects_real_points() {
        let g = grid_default();
        assert!(residual_spectrum_witness(Complex64::new(1.0, 0.0), &g).is_err());
    }

    #[test]
    fn witness_shrinks_under_refinement() {
        let g1 = grid_default();
        let g2 = GridSpec::new(50.0, 1999, 1.0).unwrap();
        let z = Complex64::new(1.0, 2.0);
        let r1 = residual_spectrum_witness(z, &g1).unwrap();
        let r2 = residual_spectrum_witness(z, &g2).unwrap();
        assert!(r2 < r1, "{r2} !< {r1}");
    }
}
