use nalgebra::Vector2;
use proptest::prelude::*;
use riemann_lab::gspt::{
    blowup_field_neg_a, blowup_field_pos_a, check_invariant_region, fast_field, heteroclinic_on_sphere, uv_field,
    w_from_v, BlowupPoint, FastPoint, Side, Stage, Wedge,
};
use riemann_lab::model::jacobian;
use riemann_lab::{Params, State};

fn neg_params() -> impl Strategy<Value = Params> {
    prop_oneof![Just(-1.5), Just(-1.0), Just(-0.5)].prop_map(|a| Params::new(5.0, a).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Unit vector with all components bounded away from the coordinate planes.
fn sphere_point() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.2..1.0f64, -1.0..1.0f64, 0.2..1.0f64).prop_map(|(x, y, z)| {
        let n = (x * x + y * y + z * z).sqrt();
        (x / n, y / n, z / n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fast_and_second_order_forms_agree(
        p in neg_params(), rho in 0.2..14.0f64, u in -9.0..9.0f64, v1 in -20.0..20.0f64, v2 in -20.0..20.0f64,
        xi in -10.0..10.0f64, eps in 0.0..0.1f64,
    ) {
        let m = rho * u;
        let dv = uv_field(rho, m, [v1, v2], xi, eps, &p).unwrap();
        let [w1, w2] = w_from_v(rho, m, [v1, v2], xi, &p).unwrap();
        let f = fast_field(FastPoint { rho, u, w1, w2, xi, eps }, &p).unwrap();
        prop_assert!(close(f[0], v1, 1e-12));
        let mag = (u.abs() * f[0].abs().max(v1.abs()) + v2.abs()) / rho;
        prop_assert!((f[1] - (v2 - u * v1) / rho).abs() < 1e-12 * (1.0 + mag));
        // W' = -V' + (DF - xi) V - eps U by the chain rule
        let jv = (jacobian(State::new(rho, u), &p).unwrap() - nalgebra::Matrix2::identity() * xi) * Vector2::new(v1, v2);
        let wd = [-dv[2] + jv[0] - eps * rho, -dv[3] + jv[1] - eps * m];
        let mag = 1.0 + jv.abs().max() + dv[2].abs().max(dv[3].abs());
        prop_assert!((f[2] - wd[0]).abs() < 1e-12 * mag && (f[3] - wd[1]).abs() < 1e-12 * mag);
        prop_assert!(f[4] == eps && dv[4] == eps);
    }
}

proptest! {
    #[test]
    fn raw_blowup_flow_is_tangent_to_the_sphere(
        p in neg_params(), (x, y, z) in sphere_point(), r in 1e-4..1e-1f64,
        w1 in -5.0..5.0f64, w2 in -5.0..5.0f64, xi in -5.0..5.0f64,
    ) {
        let bp = BlowupPoint { r, rho_bar0: x, u_bar0: y, eps_bar: z, w1, w2, xi };
        let d = blowup_field_neg_a(bp, &p, Stage::Raw).unwrap();
        let radial = x * d[1] + y * d[2] + z * d[3];
        let size = d[1].abs() + d[2].abs() + d[3].abs();
        prop_assert!(radial.abs() <= 1e-10 * (1.0 + size), "radial {radial} vs {size}");
        let pp = Params::new(5.0, -p.a).unwrap();
        let dp = blowup_field_pos_a(bp, &pp, Stage::Raw).unwrap();
        let radial = x * dp[1] + y * dp[2] + z * dp[3];
        let size = dp[1].abs() + dp[2].abs() + dp[3].abs();
        prop_assert!(radial.abs() <= 1e-10 * (1.0 + size), "pos radial {radial} vs {size}");
    }

    #[test]
    fn radius_grows_with_the_sign_of_inner_times_u(
        (x, y, z) in sphere_point(), w1 in -2.0..2.0f64, w2 in -2.0..2.0f64, xi in -2.0..2.0f64,
        r in prop_oneof![Just(1e-4), Just(1e-3)],
    ) {
        let p = Params::new(5.0, -0.5).unwrap();
        let g = xi * w1 - w2;
        let lead = g * y * z / x;
        prop_assume!(lead.abs() > 0.05);
        let bp = BlowupPoint { r, rho_bar0: x, u_bar0: y, eps_bar: z, w1, w2, xi };
        let d = blowup_field_neg_a(bp, &p, Stage::Raw).unwrap();
        prop_assert_eq!(d[0].signum(), lead.signum());
        let dd = blowup_field_neg_a(bp, &p, Stage::Desingularized).unwrap();
        prop_assert_eq!(dd[0].signum(), (g * y).signum());
    }
}

#[test]
fn heteroclinic_exists_for_positive_exponent() {
    let p = Params::new(5.0, 0.5).unwrap();
    let o = heteroclinic_on_sphere(&p).unwrap();
    assert!(o.monotone);
    assert!(o.max_sphere_error < 1e-8);
    assert!((o.start_u + 1.0).abs() < 1e-6 && (o.end_u - 1.0).abs() < 1e-5);
}

#[test]
fn heteroclinic_exists_for_negative_exponent() {
    let p = Params::new(5.0, -1.5).unwrap();
    let o = heteroclinic_on_sphere(&p).unwrap();
    assert!(o.monotone);
    assert!(o.max_sphere_error < 1e-8);
    assert!(o.equator_distance < 1e-2);
}

#[test]
fn canonical_anchors_have_invariant_wedges() {
    let p = Params::new(5.0, -1.5).unwrap();
    let s = -4.607695154586736;
    let cases =
        [(Side::Left, State::new(3.0, 3.0), Wedge::LowRho), (Side::Right, State::new(9.0, -9.0), Wedge::HighRho)];
    for (side, anchor, wedge) in cases {
        let rep = check_invariant_region(side, anchor, s, &p, 256).unwrap();
        assert_eq!(rep.region, wedge);
        let chk = rep.checks.iter().find(|c| c.wedge == wedge).unwrap();
        assert_eq!(chk.violations, 0);
    }
}

#[test]
fn trajectories_enter_the_sphere_transversely() {
    // inner layer sign xi w1 - w2 < 0; near u_bar0 = +1 the radius shrinks, near -1 it grows
    let p = Params::new(5.0, -1.5).unwrap();
    let (w1, w2, xi) = (1.0, 3.0, -1.0);
    for r in [1e-4, 1e-3] {
        for (ub, sign) in [(0.999, -1.0), (-0.999, 1.0)] {
            let rest: f64 = 1.0 - ub * ub;
            let (x, z) = ((0.5 * rest).sqrt(), (0.5 * rest).sqrt());
            let bp = BlowupPoint { r, rho_bar0: x, u_bar0: ub, eps_bar: z, w1, w2, xi };
            let d = blowup_field_neg_a(bp, &p, Stage::Raw).unwrap();
            assert_eq!(d[0].signum(), sign, "r = {r}, u_bar0 = {ub}");
        }
    }
}

#[test]
fn profile_mass_matches_weight_rate() {
    let p = Params::new(5.0, -1.5).unwrap();
    let (l, r) = (State::new(3.0, 3.0), State::new(9.0, -9.0));
    let rate = riemann_lab::delta::delta_shock(l, r, &p).unwrap().weight_rate;
    let prof = riemann_lab::gspt::viscous_profile(l, r, &p, 1e-2).unwrap();
    assert!((prof.excess_mass - rate).abs() < 0.15 * rate);
    assert!(prof.max_inner_sign < 0.0);
    assert!(prof.plateau_error_left < 1e-6 && prof.plateau_error_right < 1e-6);
}

#[test]
fn positive_exponent_profile_keeps_w2_negative() {
    let p = Params::new(5.0, 0.5).unwrap();
    let (l, r) = (State::new(8.0, -4.0), State::new(10.0, 5.0));
    let rate = riemann_lab::delta::delta_shock(l, r, &p).unwrap().weight_rate;
    let prof = riemann_lab::gspt::viscous_profile(l, r, &p, 1e-2).unwrap();
    assert!(prof.w2.iter().all(|&w| w < 0.0));
    assert!((prof.excess_mass - rate).abs() < 0.15 * rate);
}
