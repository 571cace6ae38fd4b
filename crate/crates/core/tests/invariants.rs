use nalgebra::DMatrix;
use pdlcomp::detector::{imperfect_detect, DetectorSpec};
use pdlcomp::fock::{DensityOperator, ModeRegistry, PolarizationQubit, C64};
use pdlcomp::metrics::{fidelity, pdl_db, t_h_from_db};
use pdlcomp::optics::{loss_channel, BeamSplitter};
use pdlcomp::schemes::{run, Scheme, SchemeConfig};
use proptest::prelude::*;

fn density(entries: &[(f64, f64)], dim: usize) -> DMatrix<C64> {
    let rank = entries.len() / dim;
    let g = DMatrix::from_fn(dim, rank, |i, j| {
        let (re, im) = entries[i * rank + j];
        C64::new(re, im)
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}

/// Random density operator on modes `a` (cutoff 3) and `b` (cutoff 2).
fn two_mode_state() -> impl Strategy<Value = DensityOperator> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6..=18)
        .prop_filter("multiple of the dimension", |v| v.len() % 6 == 0)
        .prop_filter("non-degenerate", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| {
            let reg = ModeRegistry::with_modes([("a", 3), ("b", 2)]).unwrap();
            DensityOperator::from_matrix(reg, density(&v, 6)).unwrap()
        })
}

fn qubit() -> impl Strategy<Value = PolarizationQubit> {
    ((-1.0..1.0f64), (-1.0..1.0f64), (-1.0..1.0f64), (-1.0..1.0f64))
        .prop_filter("non-zero", |(a, b, c, d)| a.abs() + b.abs() + c.abs() + d.abs() > 1e-3)
        .prop_map(|(a, b, c, d)| PolarizationQubit::normalized(C64::new(a, b), C64::new(c, d)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projections_reassemble_the_partial_trace(rho in two_mode_state()) {
        let traced = rho.partial_trace("a").unwrap();
        let mut sum = DensityOperator::zero(traced.registry().clone());
        let mut total = 0.0;
        for n in 0..3 {
            let (part, p) = rho.project_mode("a", n).unwrap();
            prop_assert!(p >= -1e-15);
            total += p;
            sum = sum.add(&part).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&traced).unwrap() < 1e-12);
        prop_assert!((total - rho.trace()).abs() < 1e-12);
    }

    #[test]
    fn losses_compose(rho in two_mode_state(), t1 in 0.0..=1.0f64, t2 in 0.0..=1.0f64) {
        let twice = loss_channel(&loss_channel(&rho, "a", t1).unwrap(), "a", t2).unwrap();
        let once = loss_channel(&rho, "a", t1 * t2).unwrap();
        prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-12);
        prop_assert!((once.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric(a in two_mode_state(), b in two_mode_state()) {
        let ab = fidelity(&a, &b).unwrap().fidelity;
        let ba = fidelity(&b, &a).unwrap().fidelity;
        prop_assert!((ab - ba).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn decibel_round_trip(db in 0.0..=30.0f64) {
        let t_h = t_h_from_db(db).unwrap();
        prop_assert!((pdl_db(1.0, t_h).unwrap() - db).abs() < 1e-12);
    }

    #[test]
    fn beam_splitter_blocks_are_unitary(t in 0.0..=1.0f64, n in 0usize..10) {
        let b = BeamSplitter::new(t).unwrap().number_block(n);
        let gap = (b.adjoint() * &b - DMatrix::<C64>::identity(n + 1, n + 1)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-12);
    }

    #[test]
    fn detector_outcomes_sum_to_the_trace(rho in two_mode_state(), eta in 0.0..1.0f64, dark in 0.0..1e-2f64) {
        let spec = DetectorSpec::new(eta, dark).unwrap();
        // outcomes beyond the signal cutoff need thermal photons; include enough of them
        let total: f64 = (0..64).map(|n| imperfect_detect(&rho, "b", &spec, n).unwrap().1).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn heralded_bookkeeping(q in qubit(), t_h in 0.01..=1.0f64, k in 0usize..4) {
        let r = run(Scheme::ALL[k], &SchemeConfig::new(q, t_h)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.acceptance_probability));
        if r.scheme.is_heralded() {
            prop_assert!((r.unnormalized_output.trace() - r.acceptance_probability).abs() < 1e-12);
        } else {
            prop_assert_eq!(r.acceptance_probability, 1.0);
        }
        prop_assert!((r.conditioned_output.trace() - 1.0).abs() < 1e-12);
        prop_assert!(r.unnormalized_output.min_eigenvalue() > -1e-12);
    }
}
