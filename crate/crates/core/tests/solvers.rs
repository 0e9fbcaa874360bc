use parklab::envelope::{check_nesting, window_extrema};
use parklab::solver::{solve_m, solve_m2, solve_mprime, solve_uniform_mprime};
use parklab::{GridKind, Params, ParkError};

#[test]
fn grids_are_finite_and_sized() {
    let p = Params::new(0.8, 9, 64).unwrap();
    let m = solve_m(&p);
    let d = solve_mprime(&p);
    let m2 = solve_m2(&p, &m).unwrap();
    for (g, kind) in [(&m, GridKind::M), (&d, GridKind::Mprime), (&m2, GridKind::M2)] {
        assert_eq!(g.kind(), kind);
        assert_eq!(g.horizon(), 9);
        assert_eq!(g.values().len(), 9 * 65);
        assert!(g.values().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn only_unit_jumps_at_one_and_two() {
    let p = Params::new(1.3, 8, 64).unwrap();
    let m = solve_m(&p);
    let d = solve_mprime(&p);
    for k in 1..8 {
        let jump_m = (m.segment(k)[0] - m.segment(k - 1)[64]).abs();
        let jump_d = (d.segment(k)[0] - d.segment(k - 1)[64]).abs();
        assert_eq!(jump_m > 0.0, k == 1, "M at {k}");
        assert_eq!(jump_d > 0.0, k == 2, "M' at {k}");
    }
}

#[test]
fn large_lambda_does_not_overflow() {
    let p = Params::new(60.0, 10, 128).unwrap();
    for g in [solve_m(&p), solve_mprime(&p)] {
        assert!(g.values().iter().all(|v| v.is_finite()));
    }
    let (i, s) = window_extrema(&solve_mprime(&p), 10).unwrap();
    assert!(0.0 <= i && i <= s);
}

#[test]
fn uniform_nesting_to_sixteen() {
    let u = solve_uniform_mprime(16, 256).unwrap();
    assert!(check_nesting(&u, 3, 15).unwrap().iter().all(|&b| b));
}

#[test]
fn invalid_params_are_rejected() {
    assert!(matches!(Params::new(1.0, 7, 3), Err(ParkError::InvalidParams(_))));
    assert!(matches!(Params::new(-1.0, 7, 4), Err(ParkError::InvalidParams(_))));
    assert!(matches!(Params::new(1.0, 2, 4), Err(ParkError::InvalidParams(_))));
    assert!(matches!(Params::new(10.0, 7, 4), Err(ParkError::InvalidParams(_))));
}
