//! Brute-force oracles for the volume-integral quantities.
//!
//! The library reduces each field integral analytically before touching a
//! quadrature routine; these tests redo the integrals the expensive way —
//! different coordinates, different integration order, test-local
//! integration rules — so the two paths share no reduction steps. The
//! oracle values are frozen as literals: the oracles themselves are
//! deterministic, so a drifting literal means the oracle changed, and a
//! drifting library value means the implementation changed.

use abflux::em_fields::{vector_potential, FluxTube, GaugeSpec};
use abflux::expr::ChiField;
use abflux::field_interaction::{
    boundary_term, default_volume_config, field_momentum, interaction_energy, ChargeState,
};
use abflux::geom::Vec2;
use abflux::units::Units;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Composite Simpson rule with n panels (n even).
fn simpson(a: f64, b: f64, n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    assert!(n >= 2 && n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Composite midpoint rule (endpoint-free, for half-open integrands).
fn midpoint(a: f64, b: f64, n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Field momentum by honest 3-D integration: tube-polar coordinates
/// (r, α) over the core disc, and the z line integral mapped to a finite
/// interval by z = s·tanψ. Nothing is reduced in closed form except the
/// coordinate maps themselves.
fn brute_force_momentum(charge: f64, position: Vec2, tube: &FluxTube, units: &Units) -> Vec2 {
    let b_field = tube.flux / (PI * tube.radius * tube.radius);
    // ∫dz of the transverse Coulomb field, via ψ-quadrature; the map
    // z = s·tanψ makes the weight cosψ independent of the field point.
    let z_int = simpson(-FRAC_PI_2, FRAC_PI_2, 128, &|psi: f64| psi.cos());
    let r_outer = |r: f64| {
        let alpha_int = |alpha: f64| {
            let core_point = tube.center + Vec2::new(r * alpha.cos(), r * alpha.sin());
            let rel = core_point - position;
            let s = rel.norm();
            let s_hat = rel / s;
            (charge * z_int / s) * Vec2::new(s_hat.y, -s_hat.x)
        };
        let x = simpson(0.0, TAU, 384, &|a| r * alpha_int(a).x);
        let y = simpson(0.0, TAU, 384, &|a| r * alpha_int(a).y);
        Vec2::new(x, y)
    };
    let px = simpson(0.0, tube.radius, 96, &|r| r_outer(r).x);
    let py = simpson(0.0, tube.radius, 96, &|r| r_outer(r).y);
    Vec2::new(px, py) * (b_field / (4.0 * PI * units.c))
}

#[test]
fn field_momentum_matches_the_three_dimensional_volume_integral() {
    let units = Units::natural();
    let tube = FluxTube::new(Vec2::ZERO, 0.5, 2.2).unwrap();
    let state = ChargeState::new(1.7, 1.0, Vec2::new(1.3, 0.4), Vec2::ZERO).unwrap();

    let oracle = brute_force_momentum(1.7, Vec2::new(1.3, 0.4), &tube, &units);
    // Frozen oracle output; drift here means the oracle itself changed.
    let frozen = Vec2::new(-0.128_700_429_916_490_42, 0.418_276_397_228_593_94);
    assert!(
        oracle.dist(frozen) <= 1e-9 * frozen.norm(),
        "oracle moved: {oracle} vs frozen {frozen}"
    );

    let lib = field_momentum(&state, &tube, &units, default_volume_config()).unwrap();
    assert!(
        lib.value.dist(frozen) <= 1e-6 * frozen.norm(),
        "library {} vs frozen {frozen}",
        lib.value
    );

    // The same number in closed form: beneath an untouched core the
    // momentum equals the ideal-line value qΦ/(2πcρ) azimuthally.
    let rho = Vec2::new(1.3, 0.4).norm();
    let ideal = Vec2::new(-0.4, 1.3) / rho * (1.7 * 2.2 / (TAU * units.c * rho));
    assert!(ideal.dist(frozen) <= 1e-7 * frozen.norm(), "ideal {ideal} vs frozen {frozen}");
}

#[test]
fn interaction_energy_vanishes_ring_by_ring() {
    // U couples the charge's (curl-free, z-reduced) field to the induced
    // azimuthal field. Around each circle concentric with the tube the
    // integrand is a closed-loop circulation of a gradient field, so it
    // cancels ring by ring — checked here by plain periodic quadrature,
    // far from any library code.
    let charge_pos = Vec2::new(1.2, 0.0);
    for s_ring in [0.4, 0.9, 1.5, 3.7] {
        let integrand = |alpha: f64| {
            let ring_point = Vec2::new(s_ring * alpha.cos(), s_ring * alpha.sin());
            let rel = ring_point - charge_pos;
            let s = rel.norm();
            let theta_hat = Vec2::new(-alpha.sin(), alpha.cos());
            rel.dot(theta_hat) / (s * s)
        };
        let ring = simpson(0.0, TAU, 2048, &integrand);
        assert!(ring.abs() < 1e-12, "ring at {s_ring} has residual {ring}");
    }

    // The library's nested quadrature agrees: U ≈ 0 against the natural
    // scale qΦ̇/c of its integrand.
    let units = Units::natural();
    let tube = FluxTube::ideal(2.0);
    let state = ChargeState::new(1.0, 1.0, charge_pos, Vec2::new(0.0, 0.3)).unwrap();
    let u = interaction_energy(&state, &tube, 1.5, &units, default_volume_config()).unwrap();
    assert!(u.value.abs() < 1e-8, "U = {}", u.value);
}

/// ∮dα ∫ds ŝ·A for the boundary term, integrated direction-by-direction
/// (the library integrates radius-first). The radial half-line is mapped
/// to (0, 1) by s = s₀t/(1−t) and integrated by the midpoint rule; the
/// α integral is graded around the string direction, where the integrand
/// has an integrable inverse-square-root spike.
fn reordered_boundary_term(
    charge: f64,
    position: Vec2,
    gauge: &GaugeSpec,
    tube: &FluxTube,
    units: &Units,
) -> f64 {
    let s0 = 2.0;
    let radial = |alpha: f64| -> f64 {
        let dir = Vec2::new(alpha.cos(), alpha.sin());
        midpoint(0.0, 1.0, 4096, &|t: f64| {
            let s = s0 * t / (1.0 - t);
            let jac = s0 / ((1.0 - t) * (1.0 - t));
            let a = vector_potential(tube, gauge, position + dir * s).unwrap();
            dir.dot(a) * jac
        })
    };
    // The string points along angle π from the tube; seen from the charge
    // on the +x axis that is also direction π. Grade α = π ± u², which
    // turns the |α−π|^(−1/2) spike into a bounded integrand; the last
    // sliver [0, ε] is a rectangle of the (finite) limiting value.
    let window = 0.3f64;
    let smooth = simpson(PI + window, PI - window + TAU, 1200, &radial);
    let spike = |u: f64| 2.0 * u * (radial(PI - u * u) + radial(PI + u * u));
    let eps = 1e-4;
    let graded = simpson(eps, window.sqrt(), 600, &spike) + eps * spike(eps);
    charge / (TAU * units.c) * (smooth + graded)
}

#[test]
fn string_gauge_boundary_term_vanishes_for_an_on_axis_charge() {
    // A charge on the string line sits on the reflection axis, and the
    // overlap is odd under that reflection, so the exact value is zero.
    // The reordered integration must find that zero the hard way — its
    // rays run arbitrarily close to the bunched potential's spike — and
    // the library's radius-first integration must agree.
    let units = Units::natural();
    let tube = FluxTube::ideal(2.0);
    let gauge = GaugeSpec::string(PI);
    let state = ChargeState::new(1.0, 1.0, Vec2::new(1.5, 0.0), Vec2::ZERO).unwrap();

    let oracle = reordered_boundary_term(1.0, Vec2::new(1.5, 0.0), &gauge, &tube, &units);
    assert!(oracle.abs() < 1e-10, "reordered oracle {oracle}");

    let lib = boundary_term(&state, &gauge, &tube, &units, default_volume_config()).unwrap();
    assert!(lib.value.abs() < 1e-6, "library {}", lib.value);
}

#[test]
fn gradient_additions_shift_the_boundary_term_by_the_generator_at_the_charge() {
    // Integrating the charge's curl-free field against ∇χ by parts
    // collapses the volume integral onto the charge point: the boundary
    // term gains exactly −qχ(r)/c — the same total derivative that a
    // gauge change adds to the Lagrangian. A closed-form oracle, checked
    // for a smooth decaying χ on both base gauges.
    let units = Units::natural();
    let tube = FluxTube::ideal(2.0);
    let chi = ChiField::parse("5 / (4 + x*x + y*y)").unwrap();
    let cfg = default_volume_config();
    let pos = Vec2::new(1.2, 0.8);
    let state = ChargeState::new(1.7, 1.0, pos, Vec2::ZERO).unwrap();
    let expected_shift = -1.7 * (5.0 / (4.0 + pos.norm_sq())) / units.c;

    for base in [GaugeSpec::azimuthal(), GaugeSpec::string(2.2)] {
        let plain = boundary_term(&state, &base, &tube, &units, cfg).unwrap();
        let shifted = boundary_term(&state, &base.transformed(chi.clone()), &tube, &units, cfg)
            .unwrap();
        assert!(
            (shifted.value - plain.value - expected_shift).abs() <= 1e-6 * expected_shift.abs(),
            "shift {} vs closed form {expected_shift}",
            shifted.value - plain.value
        );
    }
}

#[test]
fn boundary_term_is_antisymmetric_across_the_string_axis() {
    // Reflection across the string line maps the charge's field properly,
    // but the azimuthal direction reverses its sense; the overlap flips
    // sign point for point, so F(x, −y) = −F(x, y).
    let units = Units::natural();
    let tube = FluxTube::ideal(2.0);
    let gauge = GaugeSpec::string(PI);
    let cfg = default_volume_config();
    let above = ChargeState::new(1.0, 1.0, Vec2::new(0.9, 1.1), Vec2::ZERO).unwrap();
    let below = ChargeState::new(1.0, 1.0, Vec2::new(0.9, -1.1), Vec2::ZERO).unwrap();
    let f_above = boundary_term(&above, &gauge, &tube, &units, cfg).unwrap();
    let f_below = boundary_term(&below, &gauge, &tube, &units, cfg).unwrap();
    let scale = f_above.value.abs().max(1e-12);
    assert!(
        (f_above.value + f_below.value).abs() <= 1e-6 * scale,
        "{} vs {}",
        f_above.value,
        f_below.value
    );
}

#[test]
fn pure_winding_gradients_add_nothing_to_the_boundary_term() {
    // χ winding around an off-tube center has ∇χ = θ̂/ρ about that
    // center; ring-by-ring the overlap with the charge's gradient field
    // cancels, exactly as for the interaction energy. The library's
    // half-line probe must agree with that zero.
    let units = Units::natural();
    let tube = FluxTube::ideal(2.0);
    let plain = GaugeSpec::azimuthal();
    let winding = plain.transformed(ChiField::parse("0.4 * atan2(y - 3, x + 2)").unwrap());
    let cfg = default_volume_config();
    let state = ChargeState::new(1.3, 1.0, Vec2::new(1.5, 0.2), Vec2::ZERO).unwrap();
    let bare = boundary_term(&state, &plain, &tube, &units, cfg).unwrap();
    let wound = boundary_term(&state, &winding, &tube, &units, cfg).unwrap();
    assert!(bare.value.abs() < 1e-7, "azimuthal boundary term {}", bare.value);
    assert!(wound.value.abs() < 1e-5, "winding boundary term {}", wound.value);
}
