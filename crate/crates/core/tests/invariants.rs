//! Randomized invariants of the covariance pipeline.

use std::f64::consts::{FRAC_PI_2, PI};

use eprsim::gaussian::{phase_rotation, symplectic_form};
use eprsim::inseparability::{delta_epr, infer_direct_squeezing};
use eprsim::units::to_db;
use eprsim::{BeamSplitterSpec, GaussianState, LossChannel, SqueezerSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Element {
    Squeeze { mode: usize, r: f64, angle: f64 },
    Rotate { mode: usize, theta: f64 },
    Split { a: usize, step: usize, t: f64, phi: f64 },
    Loss { mode: usize, eta: f64 },
}

fn element(n: usize) -> impl Strategy<Value = Element> {
    prop_oneof![
        (0..n, 0.0..1.5, 0.0..PI).prop_map(|(mode, r, angle)| Element::Squeeze { mode, r, angle }),
        (0..n, -PI..PI).prop_map(|(mode, theta)| Element::Rotate { mode, theta }),
        (0..n, 1..4usize, 0.0..=1.0, -PI..PI).prop_map(|(a, step, t, phi)| Element::Split { a, step, t, phi }),
        (0..n, 0.0..=1.0).prop_map(|(mode, eta)| Element::Loss { mode, eta }),
    ]
}

fn pipeline() -> impl Strategy<Value = (usize, Vec<Element>)> {
    (1..=4usize).prop_flat_map(|n| (Just(n), prop::collection::vec(element(n), 1..=10)))
}

fn embed(s: &DMatrix<f64>, modes: &[usize], n: usize) -> DMatrix<f64> {
    let mut full = DMatrix::identity(2 * n, 2 * n);
    for (i, &mi) in modes.iter().enumerate() {
        for (j, &mj) in modes.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    full[(2 * mi + a, 2 * mj + b)] = s[(2 * i + a, 2 * j + b)];
                }
            }
        }
    }
    full
}

/// Runs the pipeline; also returns the product of its unitary elements.
fn run(n: usize, elements: &[Element]) -> (GaussianState, DMatrix<f64>) {
    let mut st = GaussianState::vacuum(n).unwrap();
    let mut total = DMatrix::identity(2 * n, 2 * n);
    for e in elements {
        match *e {
            Element::Squeeze { mode, r, angle } => {
                let sq = SqueezerSpec::new(r, angle).unwrap();
                total = embed(&sq.symplectic(), &[mode], n) * total;
                st = st.apply_squeezer(mode, &sq).unwrap();
            }
            Element::Rotate { mode, theta } => {
                total = embed(&phase_rotation(theta), &[mode], n) * total;
                st = st.apply_phase_shift(mode, theta).unwrap();
            }
            Element::Split { a, step, t, phi } => {
                if n < 2 {
                    continue;
                }
                let b = (a + 1 + step % (n - 1)) % n;
                let bs = BeamSplitterSpec::new(t, phi).unwrap();
                total = embed(&bs.symplectic(), &[a, b], n) * total;
                st = st.apply_beamsplitter(a, b, &bs).unwrap();
            }
            Element::Loss { mode, eta } => {
                st = st.apply_loss(mode, &LossChannel::new(eta).unwrap()).unwrap();
            }
        }
    }
    (st, total)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unitary_part_preserves_omega((n, elements) in pipeline()) {
        let (_, s) = run(n, &elements);
        let om = symplectic_form(n);
        let err = (&s * &om * s.transpose() - &om).amax();
        prop_assert!(err <= 1e-10 * s.norm_squared().max(1.0), "{err}");
    }

    #[test]
    fn states_stay_physical((n, elements) in pipeline()) {
        let (st, _) = run(n, &elements);
        prop_assert!(st.min_symplectic_eigenvalue().unwrap() >= 0.25 - 1e-10);
        let cov = st.cov();
        prop_assert!((cov - cov.transpose()).amax() == 0.0);
    }

    #[test]
    fn lossless_pipelines_stay_pure((n, elements) in pipeline()) {
        let unitary: Vec<Element> = elements.into_iter().filter(|e| !matches!(e, Element::Loss { .. })).collect();
        let (st, _) = run(n, &unitary);
        for nu in st.symplectic_eigenvalues().unwrap() {
            prop_assert!((nu - 0.25).abs() < 1e-9, "{nu}");
        }
    }

    #[test]
    fn product_states_are_separable(
        r in prop::array::uniform2(0.0..2.0f64),
        angle in prop::array::uniform2(0.0..PI),
        eta in prop::array::uniform2(0.0..=1.0f64),
    ) {
        let mut st = GaussianState::vacuum(2).unwrap();
        for m in 0..2 {
            st = st.apply_squeezer(m, &SqueezerSpec::new(r[m], angle[m]).unwrap()).unwrap();
            st = st.apply_loss(m, &LossChannel::new(eta[m]).unwrap()).unwrap();
        }
        prop_assert!(delta_epr(&st, 0, 1).unwrap().delta_epr >= 1.0 - 1e-9);
    }

    #[test]
    fn epr_closed_form_with_asymmetric_loss(r in 0.0..2.0f64, ea in 0.0..=1.0f64, eb in 0.0..=1.0f64) {
        let st = GaussianState::vacuum(2).unwrap()
            .apply_squeezer(0, &SqueezerSpec::new(r, 0.0).unwrap()).unwrap()
            .apply_squeezer(1, &SqueezerSpec::new(r, FRAC_PI_2).unwrap()).unwrap()
            .apply_beamsplitter(0, 1, &BeamSplitterSpec::balanced()).unwrap()
            .apply_loss(0, &LossChannel::new(ea).unwrap()).unwrap()
            .apply_loss(1, &LossChannel::new(eb).unwrap()).unwrap();
        // lossless modes: Var(x) = cosh(2r)/4, Cov(x_A, x_B) = sinh(2r)/4
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let closed = 0.5 * ((ea + eb) * c - 2.0 * (ea * eb).sqrt() * s + 2.0 - ea - eb);
        let got = delta_epr(&st, 0, 1).unwrap().delta_epr;
        prop_assert!((got - closed).abs() < 1e-10, "{got} vs {closed}");
    }

    #[test]
    fn inference_inverts_a_loss(r in 0.0..2.0f64, eta in 0.05..=1.0f64) {
        let st = GaussianState::vacuum(1).unwrap()
            .apply_squeezer(0, &SqueezerSpec::new(r, FRAC_PI_2).unwrap()).unwrap();
        let before = to_db(st.cov()[(0, 0)] / 0.25);
        let lossy = st.apply_loss(0, &LossChannel::new(eta).unwrap()).unwrap();
        let after = to_db(lossy.cov()[(0, 0)] / 0.25);
        prop_assert!((infer_direct_squeezing(after, eta).unwrap() - before).abs() < 1e-9);
    }
}
