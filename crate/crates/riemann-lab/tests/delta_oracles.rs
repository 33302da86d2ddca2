use proptest::prelude::*;
use riemann_lab::delta::{delta_shock, delta_speed_neg_a, kappa, overcompression_check, quadratic_residual};
use riemann_lab::{Params, State};

// 40-digit reference values from an independent evaluation of the jump relations.
const S_CANONICAL: f64 = -4.607695154586736;
const S_SPURIOUS: f64 = -16.574648779824275;
const RATE_CANONICAL: f64 = 9.447892678945653;
const S_POS: f64 = -0.84932651698357;
const RATE_POS: f64 = 27.489179134842868;

#[test]
fn canonical_negative_a_pair() {
    let p = Params::new(5.0, -1.5).unwrap();
    let (l, r) = (State::new(3.0, 3.0), State::new(9.0, -9.0));
    let roots = delta_speed_neg_a(l, r, &p).unwrap();
    assert_eq!(roots.len(), 2);
    assert!((roots[0] - S_SPURIOUS).abs() < 1e-12);
    assert!((roots[1] - S_CANONICAL).abs() < 1e-12);
    let d = delta_shock(l, r, &p).unwrap();
    assert!((d.speed - S_CANONICAL).abs() < 1e-12);
    assert!((d.weight_rate - RATE_CANONICAL).abs() < 1e-11);
    assert!(!overcompression_check(l, r, S_SPURIOUS, &p).unwrap().admissible);
}

#[test]
fn positive_a_pair() {
    let p = Params::new(5.0, 0.5).unwrap();
    let (l, r) = (State::new(8.0, -4.0), State::new(10.0, 5.0));
    let d = delta_shock(l, r, &p).unwrap();
    assert!((d.speed - S_POS).abs() < 1e-13);
    assert!((d.weight_rate - RATE_POS).abs() < 1e-11);
    let (_, k2) = kappa(l, r, d.speed, &p).unwrap();
    assert!(k2.abs() < 1e-12);
}

proptest! {
    #[test]
    fn roots_solve_the_quadratic(rl in 0.5..12.0f64, ul in -9.0..9.0f64, rr in 0.5..12.0f64, ur in -9.0..9.0f64) {
        let p = Params::new(5.0, -1.5).unwrap();
        let (l, r) = (State::new(rl, ul), State::new(rr, ur));
        prop_assume!(l != r);
        if let Ok(roots) = delta_speed_neg_a(l, r, &p) {
            for s in roots {
                prop_assert!(quadratic_residual(l, r, s, &p).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn admissible_deltas_grow(rl in 0.5..12.0f64, ul in -9.0..9.0f64, rr in 0.5..12.0f64, ur in -9.0..9.0f64, a in prop_oneof![Just(-1.5), Just(-0.5), Just(0.5)]) {
        let p = Params::new(5.0, a).unwrap();
        let (l, r) = (State::new(rl, ul), State::new(rr, ur));
        prop_assume!(l != r && ul != 0.0 && ur != 0.0);
        if let Ok(d) = delta_shock(l, r, &p) {
            prop_assert!(d.weight_rate > 0.0);
            let oc = overcompression_check(l, r, d.speed, &p).unwrap();
            prop_assert!(oc.lower < d.speed && d.speed < oc.upper);
            let (k1, k2) = kappa(l, r, d.speed, &p).unwrap();
            prop_assert!((k2 - d.u_delta * k1).abs() <= 1e-9 * (1.0 + k1.abs() * d.u_delta.abs() + k2.abs()));
        }
    }
}
