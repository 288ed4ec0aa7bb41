use gaborwf::flow::{symplectic_defect, FlowMap};
use gaborwf::grid::{make_gaussian_window, tf_shift, GridSpec, PhasePoint, SampledSignal};
use gaborwf::propagator::{evolve_exact_free, Evolution, SplitStep};
use gaborwf::stft::{stft, stft_adjoint, TFLattice};
use gaborwf::Complex64;
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(64, 8.0).unwrap()
}

fn signal() -> impl Strategy<Value = SampledSignal> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64).prop_map(|v| {
        let values = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        SampledSignal::new(grid(), values, "random").unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stft_inverts_on_full_lattice(f in signal()) {
        let g = make_gaussian_window(grid(), true);
        let arr = stft(&f, &g, &TFLattice::full(grid())).unwrap();
        let back = stft_adjoint(&arr, &g).unwrap();
        prop_assert!(back.rel_l2_error(&f).unwrap() < 1e-10);
        // Moyal: ||V_g f|| = ||f|| ||g||.
        prop_assert!((arr.norm_l2() - f.norm_l2()).abs() < 1e-10 * f.norm_l2());
    }

    #[test]
    fn tf_shift_preserves_norm(f in signal(), kx in -16i32..16, kxi in -16i32..16) {
        let g = grid();
        let z = PhasePoint::d1(kx as f64 * g.dx(), kxi as f64 * g.dxi());
        let s = tf_shift(&f, &z).unwrap();
        prop_assert!((s.norm_l2() - f.norm_l2()).abs() < 1e-12 * f.norm_l2());
    }

    #[test]
    fn free_evolution_is_unitary_and_reversible(f in signal(), t in -2.0f64..2.0) {
        let u = evolve_exact_free(&f, t).unwrap();
        prop_assert!((u.norm_l2() - f.norm_l2()).abs() < 1e-12 * f.norm_l2());
        let back = evolve_exact_free(&u, -t).unwrap();
        prop_assert!(back.rel_l2_error(&f).unwrap() < 1e-12);
    }

    #[test]
    fn split_step_preserves_norm(f in signal(), t in 0.0f64..1.0) {
        let ev = SplitStep::perturbed_harmonic(1.0, 400.0).unwrap();
        let u = ev.evolve(&f, t).unwrap();
        prop_assert!((u.norm_l2() - f.norm_l2()).abs() < 1e-11 * f.norm_l2());
    }

    #[test]
    fn harmonic_flow_is_a_symplectic_rotation(x in -20.0f64..20.0, xi in -20.0f64..20.0, t in -3.0f64..3.0) {
        let chi = FlowMap::harmonic(t);
        let w = chi.apply([x, xi]).unwrap();
        prop_assert!((w[0].hypot(w[1]) - x.hypot(xi)).abs() < 1e-10 * (1.0 + x.hypot(xi)));
        prop_assert!(symplectic_defect(&chi.jacobian([x, xi]).unwrap()) < 1e-6);
        let back = FlowMap::harmonic(-t).apply(w).unwrap();
        prop_assert!((back[0] - x).abs() < 1e-10 && (back[1] - xi).abs() < 1e-10);
    }

    #[test]
    fn free_flow_shears(x in -20.0f64..20.0, xi in -20.0f64..20.0, t in -3.0f64..3.0) {
        let w = FlowMap::free(t).apply([x, xi]).unwrap();
        prop_assert!((w[1] - xi).abs() < 1e-12);
        let t2 = t / 2.0;
        let half = FlowMap::free(t2).apply(FlowMap::free(t2).apply([x, xi]).unwrap()).unwrap();
        prop_assert!((half[0] - w[0]).abs() < 1e-9 * (1.0 + w[0].abs()));
    }
}
