//! Property tests for the structural invariants: inner-product axioms,
//! commutator bilinearity, eigendecomposition contracts, and transform
//! isometry, on randomized inputs at small grid sizes.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use timeop::algebra::{commutator, jacobi_residual};
use timeop::grid::{inner, sample, GridSpec, TestFunction, WaveFunction};
use timeop::operators::{
    hamiltonian, time_candidate, tsq_friedrichs, DerivativeDomain, OpSymbol, OperatorMatrix,
};
use timeop::spectral::{eigensystem, operator_sqrt, sine_transform};

const N: usize = 32;

fn grid() -> Arc<GridSpec> {
    GridSpec::new(10.0, N, 1.0).unwrap()
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn wave(n: usize) -> impl Strategy<Value = WaveFunction> {
    complex_vec(n).prop_map(|values| WaveFunction::from_samples(values, grid()).unwrap())
}

fn operator(n: usize) -> impl Strategy<Value = OperatorMatrix> {
    // banded random complex matrices: enough structure to be interesting,
    // cheap enough to multiply often
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 3 * n).prop_map(move |bands| {
        let g = grid();
        let mut m = OperatorMatrix::zeros(&g, OpSymbol::Derived);
        for i in 0..n {
            for (b, off) in (-1i64..=1).enumerate() {
                let j = i as i64 + off;
                if j >= 0 && (j as usize) < n {
                    let (re, im) = (bands[b * n + i].0, bands[b * n + i].1);
                    m.set_entry(i, j as usize, Complex64::new(re, im));
                }
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_positive_definite(f in wave(N)) {
        let p = inner(&f, &f).unwrap();
        prop_assert!(p.im.abs() <= 1e-12 * p.re.max(1.0));
        prop_assert!(p.re >= 0.0);
        prop_assert!((p.re - f.norm_sq()).abs() <= 1e-10 * p.re.max(1.0));
    }

    #[test]
    fn inner_product_conjugate_symmetric(f in wave(N), g in wave(N)) {
        let a = inner(&g, &f).unwrap();
        let b = inner(&f, &g).unwrap();
        let scale = a.norm().max(1.0);
        prop_assert!((a - b.conj()).norm() <= 1e-12 * scale);
    }

    #[test]
    fn inner_product_sesquilinear(
        f in wave(N),
        g in wave(N),
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
    ) {
        let alpha = Complex64::new(re, im);
        // linear in the first slot
        let lhs = inner(&g.scale(alpha), &f).unwrap();
        let rhs = alpha * inner(&g, &f).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        // antilinear in the second slot
        let lhs = inner(&g, &f.scale(alpha)).unwrap();
        let rhs = alpha.conj() * inner(&g, &f).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn commutator_antisymmetric_and_bilinear(
        a in operator(N),
        b in operator(N),
        s in -3.0..3.0f64,
    ) {
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        let scale = ab.norm_inf().max(1.0);
        for (x, y) in ab.entries().iter().zip(ba.entries()) {
            prop_assert!((x + y).norm() <= 1e-12 * scale);
        }
        let sa = a.scale(Complex64::new(s, 0.0));
        let sab = commutator(&sa, &b).unwrap();
        for (x, y) in sab.entries().iter().zip(ab.entries()) {
            prop_assert!((x - s * y).norm() <= 1e-10 * scale * s.abs().max(1.0));
        }
    }

    #[test]
    fn jacobi_identity_for_random_triples(
        a in operator(N),
        b in operator(N),
        c in operator(N),
        f in wave(N),
    ) {
        prop_assume!(f.norm_sq() > 1e-6);
        let r = jacobi_residual(&a, &b, &c, &f).unwrap();
        prop_assert!(r <= 1e-10, "jacobi residual {r}");
    }

    #[test]
    fn transform_preserves_norms(f in wave(N)) {
        prop_assume!(f.norm_sq() > 1e-6);
        let g = grid();
        let u = sine_transform(&g, None).unwrap();
        let phi = u.to_time(&f).unwrap();
        prop_assert!((phi.norm() - f.norm()).abs() <= 1e-8 * f.norm());
        let back = u.to_energy(&phi).unwrap();
        let mut diff = 0.0_f64;
        for (x, y) in back.values().iter().zip(f.values()) {
            diff += (x - y).norm_sqr();
        }
        prop_assert!(diff.sqrt() <= 1e-8 * f.norm() / g.spacing().sqrt());
    }

    #[test]
    fn hermitian_functional_calculus_consistent(shift in 0.1..5.0f64) {
        // (√(A + s))² = A + s for the shifted Friedrichs matrix
        let g = grid();
        let mut a = tsq_friedrichs(&g);
        for i in 0..N {
            let v = a.entry(i, i);
            a.set_entry(i, i, v + Complex64::new(shift, 0.0));
        }
        let dec = eigensystem(&a).unwrap();
        let root = operator_sqrt(&dec).unwrap();
        let squared = root.matmul(&root).unwrap();
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for (x, y) in squared.entries().iter().zip(a.entries()) {
            num += (x - y).norm_sqr();
            den += y.norm_sqr();
        }
        prop_assert!((num / den).sqrt() <= 1e-10);
    }

    #[test]
    fn grid_construction_respects_invariants(
        e_max in 1.0..200.0f64,
        n in 16usize..256,
        hbar in 0.1..5.0f64,
    ) {
        let g = GridSpec::new(e_max, n, hbar).unwrap();
        prop_assert_eq!(g.len(), n);
        let h = g.spacing();
        prop_assert!((h - e_max / (n as f64 + 1.0)).abs() <= f64::EPSILON * e_max);
        prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        prop_assert!(g.node(0) > 0.0 && g.node(n - 1) < e_max);
        prop_assert!(g.weights().iter().all(|&w| w == h));
    }

    #[test]
    fn named_family_matches_direct_evaluation(
        a in 0.2..3.0f64,
        k in 0u32..4,
        e in 0.0..20.0f64,
    ) {
        let by_name = TestFunction::by_name("poly_exp", &[f64::from(k), a], 1.0).unwrap();
        let direct = TestFunction::PolyExp { k, a };
        prop_assert_eq!(by_name.eval(e), direct.eval(e));
    }
}

// Non-random spot checks that belong with the properties: the derivative
// stencils converge on the whole analytic family, not just the documented
// examples.
#[test]
fn derivative_second_order_on_family() {
    for expr in [
        TestFunction::PolyExp { k: 1, a: 1.0 },
        TestFunction::PolyExp { k: 3, a: 0.7 },
        TestFunction::GaussianBump {
            mu: 4.0,
            sigma: 0.8,
        },
    ] {
        let mut errs = Vec::new();
        for n in [199usize, 399] {
            let g = GridSpec::new(40.0, n, 1.0).unwrap();
            let t = time_candidate(&g, DerivativeDomain::Free);
            let f = sample(&expr, &g);
            let tf = t.apply(&f).unwrap();
            // fixed window keeps the max-error location comparable across grids
            let mut worst = 0.0_f64;
            for (i, &e) in g.nodes().iter().enumerate() {
                if !(0.5..=30.0).contains(&e) {
                    continue;
                }
                let exact = Complex64::i() * expr.derivative(e);
                worst = worst.max((tf.values()[i] - exact).norm());
            }
            errs.push(worst);
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (3.0..5.5).contains(&ratio),
            "{expr}: interior stencil not second order (ratio {ratio:.2})"
        );
    }
}

#[test]
fn hamiltonian_matches_multiplication_everywhere() {
    let g = GridSpec::new(30.0, 149, 1.0).unwrap();
    let h = hamiltonian(&g);
    let f = sample(&TestFunction::GaussianBump { mu: 6.0, sigma: 2.0 }, &g);
    let hf = h.apply(&f).unwrap();
    for ((&e, x), y) in g.nodes().iter().zip(f.values()).zip(hf.values()) {
        assert_eq!(*y, e * x);
    }
}
