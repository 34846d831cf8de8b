use std::f64::consts::PI;

use pae_core::qsp_synthesis::*;
use pae_core::{make_instance, C64};

fn cheb(n: usize) -> Vec<f64> {
    grid::cheb_grid(n)
}

#[test]
fn truncation_coefficients() {
    let t = truncate_target(1.0, 10).unwrap();
    assert!((t.a[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
    assert!((t.delta - 8.680_555_555_555_556e-5).abs() < 1e-18);
    assert!((t.c[1] + 2.0 * 0.440_050_585_744_933_5).abs() < 1e-15);
    let t = truncate_target(1e-12, 6).unwrap();
    assert!((t.a[0] - 1.0).abs() < 1e-15);
    assert!(t.a[1..].iter().chain(&t.c).all(|v| v.abs() < 1e-11));
}

#[test]
fn completion_within_budget() {
    for (t, l) in [(1.0, 10), (4.0, 22)] {
        let c = complete_target(&truncate_target(t, l).unwrap()).unwrap();
        assert!(c.max_excess <= FEASIBILITY_TOL, "{t} {l}: {}", c.max_excess);
        assert!(
            c.exact_error <= 8.0 * c.delta,
            "{t} {l}: {} vs {}",
            c.exact_error,
            c.delta
        );
        assert!(c.deviation <= 8.0 * c.delta);
        assert!((c.a.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
    }
}

#[test]
fn identity_target_l2() {
    let t = CompletedTarget {
        t: 0.0,
        l: 2,
        a: vec![1.0, 0.0],
        c: vec![0.0, 0.0],
        delta: 0.0,
        deviation: 0.0,
        exact_error: 0.0,
        max_excess: 0.0,
        method: CompletionMethod::Unchanged,
    };
    let s = solve_angles(&t, &SolveMethod::LayerPeel).unwrap();
    assert!(s.residual <= 1e-10);
    for x in cheb(64) {
        let u = realized(&s.xi, x);
        assert!((u - nalgebra::Matrix2::<C64>::identity()).norm() < 1e-10);
    }
}

#[test]
fn methods_agree_t1_l10() {
    let c = complete_target(&truncate_target(1.0, 10).unwrap()).unwrap();
    let peel = solve_angles(&c, &SolveMethod::LayerPeel).unwrap();
    let opt = solve_angles(
        &c,
        &SolveMethod::Optimize(OptimizeStart::LayerPeel {
            jitter: 1e-3,
            seed: 5,
        }),
    )
    .unwrap();
    assert!(peel.residual <= 1e-8 && opt.residual <= 1e-8);
    for x in cheb(1024) {
        let d = (realized(&peel.xi, x)[(0, 0)] - realized(&opt.xi, x)[(0, 0)]).norm();
        assert!(d <= 1e-7);
    }
}

#[test]
fn t2_l14_residual() {
    let s = PhaseShifterSpec::synthesize(2.0, 14, &SolveMethod::LayerPeel).unwrap();
    assert!(s.angles.residual <= 1e-8, "{}", s.angles.residual);
}

#[test]
fn branch_unitary_fixed_points() {
    let s = PhaseShifterSpec::synthesize(1.0, 10, &SolveMethod::LayerPeel).unwrap();
    for (a, n) in [(0.5, 2), (0.0, 2), (0.3, 3)] {
        let inst = make_instance(a, n).unwrap();
        let v = s.branch_unitary(inst.theta);
        assert!((v.adjoint() * v - nalgebra::Matrix4::identity()).norm() < 1e-10);
        let err = shifter_state_error(&s, &inst, 1);
        assert!(err <= s.eps_oc, "a={a}: {err} > {}", s.eps_oc);
    }
    // a = 0 puts phase e^{-i} on the |0⟩ ancilla component.
    let v = s.branch_unitary(0.0);
    assert!((v[(0, 0)] - C64::new(0.0, -1.0).exp()).norm() <= s.eps_oc);
}

#[test]
fn l_selection() {
    assert_eq!(select_l(1e-300, 1.0 - 1e-15).unwrap(), 10);
    assert_eq!(select_l(1.0, 0.01).unwrap(), 36);
    assert_eq!(select_l(10.0, 0.05).unwrap(), 96);
    assert!(select_l(1.0, 1.0).is_err());
    let ls: Vec<usize> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&t| select_l_empirical(t))
        .collect();
    assert_eq!(ls, vec![10, 14, 22, 34]);
    assert_eq!(select_l_empirical(16.0), 58);
    assert_eq!(select_l_empirical(1e-9), 2);
}

#[test]
fn sequential_budget() {
    assert_eq!(sequential_error_budget(0.3, 1), 0.3);
    assert!((sequential_error_budget(0.01, 4) - 0.04).abs() < 1e-15);
    let s = PhaseShifterSpec::synthesize(1.0, 10, &SolveMethod::LayerPeel).unwrap();
    let inst = make_instance(0.3, 2).unwrap();
    let one = shifter_state_error(&s, &inst, 1);
    let three = shifter_state_error(&s, &inst, 3);
    assert!(three <= 3.0 * one + 1e-15);
}

#[test]
fn angle_file_round_trip() {
    let s = PhaseShifterSpec::synthesize(1.0, 10, &SolveMethod::LayerPeel).unwrap();
    let text = format_angles(&s);
    let back = parse_angles(&text).unwrap();
    assert_eq!(back, s);
    for (a, b) in back.angles.xi.iter().zip(&s.angles.xi) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert!(text.lines().next().unwrap().contains(" Wz "));
    let _ = PI;
}
