//! Fields and gauge potentials of a confined magnetic flux tube.
//!
//! The tube carries total flux Φ along ẑ, either as an ideal line
//! (radius 0) or spread uniformly over a disc of radius a. Everything is
//! translation-invariant along ẑ, so positions are points in the plane.
//!
//! Exterior and interior of the symmetric (azimuthal) gauge:
//!
//! ```text
//! ρ ≥ a:  A = Φ/(2πρ) θ̂          B = 0
//! ρ < a:  A = Φρ/(2πa²) θ̂        B = Φ/(πa²)
//! ```
//!
//! The string gauge confines the same circulation to a narrow angular
//! bump around one ray instead of spreading it uniformly: with
//! θ_s the angle measured from the string direction and
//! w(θ) = |θ|⁻¹ᐟ²/(4√π) (so ∫₋π^π w dθ = 1),
//!
//! ```text
//! A_string = A_azimuthal + Φ (w(θ_s) − 1/2π) / ρ · θ̂ .
//! ```
//!
//! The added term is curl-free off the ray θ_s = 0, so B is untouched,
//! but the potential diverges on the ray itself — the usual price of
//! concentrating the circulation. Evaluation on the ray is refused, open
//! paths crossing it are refused, and closed loops integrate through it
//! (their value cannot depend on where the ray points).
//!
//! Line integrals of the azimuthal and string parts are evaluated in
//! closed form per straight segment: the subtended angle dθ integrates
//! exactly, and the bump has the elementary antiderivative
//! W(θ) = sgn(θ)√|θ|/(2√π). Gradient-gauge contributions ∇χ are
//! integrated pointwise by adaptive quadrature — never by evaluating χ at
//! the endpoints, which would silently discard the winding of multivalued
//! χ such as atan2.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::ChiField;
use crate::geom::{polyline_is_closed, segment_angle, wrap_angle, Vec2};
use crate::quadrature::{integrate, QuadConfig};
use crate::units::Units;

/// Angular distance below which a point counts as lying on the string ray.
pub const STRING_ANGLE_EPS: f64 = 1e-12;

/// A straight flux tube along ẑ: total flux, carried on a line
/// (`radius == 0`) or spread uniformly over a disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxTube {
    pub center: Vec2,
    pub radius: f64,
    pub flux: f64,
}

impl FluxTube {
    /// Ideal line of flux through the origin.
    #[must_use]
    pub fn ideal(flux: f64) -> Self {
        Self { center: Vec2::ZERO, radius: 0.0, flux }
    }

    pub fn new(center: Vec2, radius: f64, flux: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tube radius must be finite and non-negative, got {radius}"
            )));
        }
        if !(center.is_finite() && flux.is_finite()) {
            return Err(Error::InvalidParameter("tube center and flux must be finite".into()));
        }
        Ok(Self { center, radius, flux })
    }

    /// B_z at `p`. Uniform Φ/(πa²) inside a finite core, zero outside;
    /// the ideal line is singular only at the line itself.
    pub fn magnetic_field(&self, p: Vec2) -> Result<f64> {
        let rho_sq = (p - self.center).norm_sq();
        if self.radius == 0.0 {
            if rho_sq == 0.0 {
                return Err(Error::Singularity("ideal flux line pierces the evaluation point".into()));
            }
            return Ok(0.0);
        }
        if rho_sq < self.radius * self.radius {
            Ok(self.flux / (PI * self.radius * self.radius))
        } else {
            Ok(0.0)
        }
    }

    /// Flux threading a concentric circle of radius ρ.
    #[must_use]
    pub fn enclosed_flux(&self, rho: f64) -> f64 {
        if self.radius == 0.0 || rho >= self.radius {
            self.flux
        } else {
            self.flux * (rho * rho) / (self.radius * self.radius)
        }
    }
}

/// The two singular-structure choices for the base potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseGauge {
    /// Rotationally symmetric A ∝ θ̂/ρ; singular only at an ideal line.
    Azimuthal,
    /// Circulation bunched around the ray at `angle`; singular on that ray.
    String { angle: f64 },
}

/// A complete gauge choice: base potential plus any number of gradient
/// terms ∇χ added on top.
#[derive(Debug, Clone)]
pub struct GaugeSpec {
    pub base: BaseGauge,
    pub chi: Vec<ChiField>,
}

impl GaugeSpec {
    #[must_use]
    pub fn azimuthal() -> Self {
        Self { base: BaseGauge::Azimuthal, chi: Vec::new() }
    }

    #[must_use]
    pub fn string(angle: f64) -> Self {
        Self { base: BaseGauge::String { angle }, chi: Vec::new() }
    }

    /// The same physical field with A ↦ A + ∇χ.
    #[must_use]
    pub fn transformed(&self, chi: ChiField) -> Self {
        let mut out = self.clone();
        out.chi.push(chi);
        out
    }
}

impl fmt::Display for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.base {
            BaseGauge::Azimuthal => write!(f, "azimuthal")?,
            BaseGauge::String { angle } => write!(f, "string({angle})")?,
        }
        for c in &self.chi {
            write!(f, " + chi({c})")?;
        }
        Ok(())
    }
}

/// Azimuthal-gauge potential per unit flux, exterior and interior.
pub(crate) fn unit_azimuthal_at(tube: &FluxTube, p: Vec2) -> Result<Vec2> {
    let r = p - tube.center;
    let rho_sq = r.norm_sq();
    let a = tube.radius;
    if rho_sq < a * a {
        return Ok(r.perp() / (TAU * a * a));
    }
    if rho_sq == 0.0 {
        return Err(Error::Singularity("azimuthal potential of an ideal line at the line".into()));
    }
    Ok(r.perp() / (TAU * rho_sq))
}

/// Angular bump carrying the string-gauge circulation: ∫₋π^π w dθ = 1.
fn bump(theta: f64) -> f64 {
    1.0 / (4.0 * PI.sqrt() * theta.abs().sqrt())
}

/// Antiderivative of `bump`, W(−π) = −1/2, W(0) = 0, W(π) = 1/2.
fn bump_antiderivative(theta: f64) -> f64 {
    theta.signum() * theta.abs().sqrt() / (2.0 * PI.sqrt())
}

/// String-gauge excess over the azimuthal potential, per unit flux.
fn unit_string_extra_at(tube: &FluxTube, string_angle: f64, p: Vec2) -> Result<Vec2> {
    let r = p - tube.center;
    let rho_sq = r.norm_sq();
    if rho_sq == 0.0 {
        return Err(Error::Singularity("string gauge is singular at the tube center".into()));
    }
    let theta_s = wrap_angle(r.angle() - string_angle);
    if theta_s.abs() < STRING_ANGLE_EPS {
        return Err(Error::Singularity("evaluation point lies on the gauge string ray".into()));
    }
    // (w − 1/2π)/ρ θ̂ = (w − 1/2π) perp(r)/ρ².
    Ok((bump(theta_s) - 1.0 / TAU) * r.perp() / rho_sq)
}

/// A(p) for the given tube and gauge.
///
/// Gradient terms are summed before being added to the base, so a χ and
/// its negation cancel exactly and restore the base potential bitwise.
pub fn vector_potential(tube: &FluxTube, gauge: &GaugeSpec, p: Vec2) -> Result<Vec2> {
    let mut a = tube.flux * unit_azimuthal_at(tube, p)?;
    if let BaseGauge::String { angle } = gauge.base {
        a += tube.flux * unit_string_extra_at(tube, angle, p)?;
    }
    let mut grad = Vec2::ZERO;
    for chi in &gauge.chi {
        grad += chi.gradient(p);
    }
    Ok(a + grad)
}

/// Induced electric field of a ramping flux, E = −(1/c) ∂A/∂t in the
/// azimuthal gauge (the gauge-independent, curl-carrying part).
pub fn induced_electric_field(
    tube: &FluxTube,
    flux_rate: f64,
    units: &Units,
    p: Vec2,
) -> Result<Vec2> {
    Ok(-(flux_rate / units.c) * unit_azimuthal_at(tube, p)?)
}

/// Result of integrating A·dr along a polyline.
#[derive(Debug, Clone, Copy)]
pub struct LineIntegral {
    pub value: f64,
    /// Accumulated quadrature error bound; zero when every part of the
    /// integral was taken in closed form.
    pub error_bound: f64,
    /// How many times the path crossed the gauge string ray (always 0 for
    /// string-free gauges; open paths refuse to cross at all).
    pub string_crossings: usize,
}

/// ∫ Â·dr over one straight segment, azimuthal gauge per unit flux.
///
/// Outside the core the integrand is a pure angle sweep, Δθ/2π. Inside,
/// Â·dr = cross(r, dr)/(2πa²) and cross(r, ṙ) is constant on a straight
/// segment, so both regimes integrate exactly; the segment is split where
/// it crosses the core boundary.
pub(crate) fn unit_azimuthal_segment(tube: &FluxTube, p: Vec2, q: Vec2) -> Result<f64> {
    let rp = p - tube.center;
    let d = q - p;
    if d.norm_sq() == 0.0 {
        return Ok(0.0);
    }
    let a = tube.radius;
    if a == 0.0 {
        return Ok(segment_angle(tube.center, p, q)? / TAU);
    }
    // |rp + t d|² = a² → breakpoints where the segment crosses the core.
    let ca = d.norm_sq();
    let cb = 2.0 * rp.dot(d);
    let cc = rp.norm_sq() - a * a;
    let mut ts = vec![0.0, 1.0];
    let disc = cb * cb - 4.0 * ca * cc;
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-cb - sq) / (2.0 * ca), (-cb + sq) / (2.0 * ca)] {
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 - t0 <= 0.0 {
            continue;
        }
        let mid = rp + 0.5 * (t0 + t1) * d;
        if mid.norm_sq() < a * a {
            total += rp.cross(d) * (t1 - t0) / (TAU * a * a);
        } else {
            total += segment_angle(tube.center, p + t0 * d, p + t1 * d)? / TAU;
        }
    }
    Ok(total)
}

/// String-gauge excess over one straight segment, per unit flux, plus
/// whether the segment crossed the string ray.
///
/// The polar angle is monotone along a straight segment, so the wrapped
/// walk passes the ray (θ_s = 0) or the ±π seam at most once, and
/// ∫ (w − 1/2π)/ρ θ̂·dr = ΔW + seam − Δθ/2π in closed form.
fn string_walk_segment(
    tube: &FluxTube,
    string_angle: f64,
    p: Vec2,
    q: Vec2,
) -> Result<(f64, bool)> {
    let rp = p - tube.center;
    let rq = q - tube.center;
    if (q - p).norm_sq() == 0.0 {
        return Ok((0.0, false));
    }
    let dtheta = segment_angle(tube.center, p, q)?;
    let a0 = wrap_angle(rp.angle() - string_angle);
    let a1 = wrap_angle(rq.angle() - string_angle);
    if a0.abs() < STRING_ANGLE_EPS || a1.abs() < STRING_ANGLE_EPS {
        return Err(Error::Singularity("path sample lies on the gauge string ray".into()));
    }
    let unwrapped_end = a0 + dtheta;
    let crossed = (a0 > 0.0 && unwrapped_end < 0.0) || (a0 < 0.0 && unwrapped_end > 0.0);
    // ±π seam passages shift the antiderivative by one full unit of
    // circulation; recover the count from the wrap discrepancy.
    let seam = ((unwrapped_end - a1) / TAU).round();
    let walk = bump_antiderivative(a1) + seam - bump_antiderivative(a0);
    Ok((walk - dtheta / TAU, crossed))
}

/// ∫ A·dr along the polyline `pts` in the given gauge.
///
/// Open paths must not cross the string ray: their value would depend on
/// the branch chosen, so [`Error::StringCrossing`] is returned instead.
/// Closed loops integrate straight through (the crossing count is
/// reported) because their value is branch-independent.
pub fn potential_line_integral(
    tube: &FluxTube,
    gauge: &GaugeSpec,
    pts: &[Vec2],
    cfg: QuadConfig,
) -> Result<LineIntegral> {
    if pts.len() < 2 {
        return Err(Error::DegenerateGeometry(
            "a line integral needs at least two path samples".into(),
        ));
    }
    let closed = polyline_is_closed(pts);
    let mut value = 0.0;
    let mut error_bound = 0.0;
    let mut crossings = 0usize;
    for (i, w) in pts.windows(2).enumerate() {
        let (p, q) = (w[0], w[1]);
        let reindex = |e| match e {
            Error::PathThroughPoint { .. } => Error::PathThroughPoint { index: i },
            other => other,
        };
        value += tube.flux * unit_azimuthal_segment(tube, p, q).map_err(reindex)?;
        if let BaseGauge::String { angle } = gauge.base {
            let (extra, crossed) = string_walk_segment(tube, angle, p, q).map_err(reindex)?;
            value += tube.flux * extra;
            if crossed {
                if !closed {
                    return Err(Error::StringCrossing { segment: i });
                }
                crossings += 1;
            }
        }
        if !gauge.chi.is_empty() {
            let d = q - p;
            if d.norm_sq() > 0.0 {
                let chi = &gauge.chi;
                let r = integrate(
                    |t| {
                        let x = p + t * d;
                        chi.iter().map(|c| c.gradient(x).dot(d)).sum()
                    },
                    0.0,
                    1.0,
                    cfg,
                )?;
                value += r.value;
                error_bound += r.error_bound;
            }
        }
    }
    Ok(LineIntegral { value, error_bound, string_crossings: crossings })
}

/// ∫ E·dr along the polyline for a flux ramping at `flux_rate`.
///
/// E is proportional to the unit-flux azimuthal potential, so the same
/// closed forms apply; a full loop of winding n gives −n Φ̇/c exactly.
pub fn electric_line_integral(
    tube: &FluxTube,
    flux_rate: f64,
    units: &Units,
    pts: &[Vec2],
) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::DegenerateGeometry(
            "a line integral needs at least two path samples".into(),
        ));
    }
    let mut sweep = 0.0;
    for (i, w) in pts.windows(2).enumerate() {
        sweep += unit_azimuthal_segment(tube, w[0], w[1]).map_err(|e| match e {
            Error::PathThroughPoint { .. } => Error::PathThroughPoint { index: i },
            other => other,
        })?;
    }
    Ok(-(flux_rate / units.c) * sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::FRAC_PI_2;

    fn circle(center: Vec2, rho: f64, n: usize, turns: f64, start: f64) -> Vec<Vec2> {
        let m = (n as f64 * turns.abs()).ceil() as usize;
        (0..=m)
            .map(|k| {
                let t = start + turns * TAU * k as f64 / m as f64;
                center + rho * Vec2::new(t.cos(), t.sin())
            })
            .collect()
    }

    /// Brute-force ∫A·dr: adaptive quadrature of the pointwise potential
    /// along every segment. Shares no code with the closed-form walk.
    fn pointwise_integral(tube: &FluxTube, gauge: &GaugeSpec, pts: &[Vec2]) -> f64 {
        pts.windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                integrate(
                    |t| vector_potential(tube, gauge, w[0] + t * d).unwrap().dot(d),
                    0.0,
                    1.0,
                    QuadConfig::relaxed(1e-11),
                )
                .unwrap()
                .value
            })
            .sum()
    }

    #[test]
    fn exterior_potential_is_tangential_with_flux_over_circumference() {
        let tube = FluxTube::ideal(1.0);
        let a = vector_potential(&tube, &GaugeSpec::azimuthal(), Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(a.y, 1.0 / TAU, max_relative = 1e-15);
        assert_eq!(a.x, 0.0);
        // |A| = Φ/(2πρ) at any radius, direction θ̂.
        let p = Vec2::new(-0.3, 2.2);
        let a = vector_potential(&tube, &GaugeSpec::azimuthal(), p).unwrap();
        assert_relative_eq!(a.norm(), 1.0 / (TAU * p.norm()), max_relative = 1e-14);
        assert_abs_diff_eq!(a.dot(p), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn interior_potential_rises_linearly_and_matches_at_boundary() {
        let tube = FluxTube::new(Vec2::ZERO, 2.0, 3.0).unwrap();
        let g = GaugeSpec::azimuthal();
        let inner = vector_potential(&tube, &g, Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(inner.y, 3.0 * 1.0 / (TAU * 4.0), max_relative = 1e-15);
        let at_edge = vector_potential(&tube, &g, Vec2::new(2.0, 0.0)).unwrap();
        let outside = vector_potential(&tube, &g, Vec2::new(2.0 + 1e-12, 0.0)).unwrap();
        assert_relative_eq!(at_edge.y, 3.0 / (TAU * 2.0), max_relative = 1e-15);
        assert_relative_eq!(at_edge.y, outside.y, max_relative = 1e-9);
    }

    #[test]
    fn magnetic_field_is_uniform_inside_and_zero_outside() {
        let tube = FluxTube::new(Vec2::new(1.0, -1.0), 0.5, 2.0).unwrap();
        let b_in = tube.magnetic_field(Vec2::new(1.1, -0.9)).unwrap();
        assert_relative_eq!(b_in, 2.0 / (PI * 0.25), max_relative = 1e-15);
        assert_eq!(tube.magnetic_field(Vec2::new(3.0, 0.0)).unwrap(), 0.0);
        let ideal = FluxTube::ideal(1.0);
        assert_eq!(ideal.magnetic_field(Vec2::new(0.1, 0.0)).unwrap(), 0.0);
        assert!(matches!(ideal.magnetic_field(Vec2::ZERO), Err(Error::Singularity(_))));
    }

    #[test]
    fn numeric_curl_reproduces_magnetic_field_in_every_gauge() {
        let tube = FluxTube::new(Vec2::new(0.2, 0.1), 0.8, 1.7).unwrap();
        let h = 1e-5;
        let curl = |g: &GaugeSpec, p: Vec2| {
            let ax = |p| vector_potential(&tube, g, p).unwrap().x;
            let ay = |p| vector_potential(&tube, g, p).unwrap().y;
            (ay(p + Vec2::new(h, 0.0)) - ay(p - Vec2::new(h, 0.0))) / (2.0 * h)
                - (ax(p + Vec2::new(0.0, h)) - ax(p - Vec2::new(0.0, h))) / (2.0 * h)
        };
        let gauges = [
            GaugeSpec::azimuthal(),
            GaugeSpec::string(2.5),
            GaugeSpec::azimuthal().transformed(ChiField::parse("0.3*x*y + sin(y)").unwrap()),
        ];
        let b_in = tube.magnetic_field(Vec2::new(0.3, 0.2)).unwrap();
        for g in &gauges {
            // Outside the core: curl A = 0.
            assert_abs_diff_eq!(curl(g, Vec2::new(1.5, -0.7)), 0.0, epsilon = 1e-8);
            // Inside (off the string ray): curl A = B.
            assert_relative_eq!(curl(g, Vec2::new(0.3, 0.2)), b_in, max_relative = 1e-7);
        }
    }

    #[test]
    fn circulation_is_flux_for_any_enclosing_polygon() {
        let tube = FluxTube::ideal(2.5);
        let g = GaugeSpec::azimuthal();
        let cfg = QuadConfig::default();
        // A lopsided triangle still encloses exactly Φ.
        let tri = [
            Vec2::new(3.0, 0.1),
            Vec2::new(-1.0, 2.0),
            Vec2::new(-0.5, -4.0),
            Vec2::new(3.0, 0.1),
        ];
        let r = potential_line_integral(&tube, &g, &tri, cfg).unwrap();
        assert_relative_eq!(r.value, 2.5, max_relative = 1e-14);
        // Winding twice doubles it; clockwise negates it.
        let twice = circle(Vec2::ZERO, 1.3, 64, 2.0, 0.4);
        assert_relative_eq!(
            potential_line_integral(&tube, &g, &twice, cfg).unwrap().value,
            5.0,
            max_relative = 1e-13
        );
        let cw = circle(Vec2::ZERO, 0.7, 64, -1.0, 0.0);
        assert_relative_eq!(
            potential_line_integral(&tube, &g, &cw, cfg).unwrap().value,
            -2.5,
            max_relative = 1e-13
        );
        // A loop that does not enclose the tube picks up nothing.
        let outside = circle(Vec2::new(5.0, 5.0), 1.0, 64, 1.0, 0.0);
        assert_abs_diff_eq!(
            potential_line_integral(&tube, &g, &outside, cfg).unwrap().value,
            0.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn interior_circle_encloses_partial_flux() {
        let tube = FluxTube::new(Vec2::ZERO, 2.0, 4.0).unwrap();
        let n = 256;
        let loop_in = circle(Vec2::ZERO, 1.0, n, 1.0, 0.0);
        let r = potential_line_integral(&tube, &GaugeSpec::azimuthal(), &loop_in, QuadConfig::default())
            .unwrap();
        // The polygon encloses B times its own area — exactly.
        let polygon_area = 0.5 * n as f64 * (TAU / n as f64).sin();
        assert_relative_eq!(r.value, polygon_area / PI, max_relative = 1e-12);
        // ... which tends to ∮A·dr = Φ ρ²/a² = 4 · 1/4 as n grows.
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn chord_through_core_matches_pointwise_quadrature() {
        let tube = FluxTube::new(Vec2::ZERO, 1.0, 2.0).unwrap();
        let g = GaugeSpec::azimuthal();
        let path = [Vec2::new(-2.0, 0.3), Vec2::new(2.0, 0.3)];
        let exact = potential_line_integral(&tube, &g, &path, QuadConfig::default()).unwrap();
        assert_relative_eq!(exact.value, pointwise_integral(&tube, &g, &path), max_relative = 1e-9);
        // Straight through the centre of a finite core is regular.
        let diam = [Vec2::new(-3.0, 0.0), Vec2::new(3.0, 0.0)];
        let r = potential_line_integral(&tube, &g, &diam, QuadConfig::default()).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-15);
        // ... but through an ideal line it is not.
        let ideal = FluxTube::ideal(1.0);
        assert!(matches!(
            potential_line_integral(&ideal, &g, &diam, QuadConfig::default()),
            Err(Error::PathThroughPoint { index: 0 })
        ));
    }

    #[test]
    fn string_gauge_keeps_closed_circulation_and_counts_crossings() {
        let tube = FluxTube::ideal(1.0);
        let g = GaugeSpec::string(0.3);
        let cfg = QuadConfig::default();
        let once = circle(Vec2::ZERO, 1.5, 128, 1.0, 1.0);
        let r = potential_line_integral(&tube, &g, &once, cfg).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
        assert_eq!(r.string_crossings, 1);
        let twice = circle(Vec2::ZERO, 1.5, 128, 2.0, 1.0);
        let r = potential_line_integral(&tube, &g, &twice, cfg).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
        assert_eq!(r.string_crossings, 2);
    }

    #[test]
    fn open_path_refuses_to_cross_the_string() {
        let tube = FluxTube::ideal(1.0);
        let g = GaugeSpec::string(0.0);
        // Two-segment path sweeping through θ = 0 on its second segment.
        let path = [
            Vec2::new(0.0, 2.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(2.0, -1.0),
        ];
        match potential_line_integral(&tube, &g, &path, QuadConfig::default()) {
            Err(Error::StringCrossing { segment }) => assert_eq!(segment, 1),
            other => panic!("expected a string-crossing refusal, got {other:?}"),
        }
        // Evaluating the potential on the ray itself is refused too.
        assert!(matches!(
            vector_potential(&tube, &g, Vec2::new(3.0, 0.0)),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn string_gauge_open_path_matches_pointwise_quadrature() {
        let tube = FluxTube::ideal(1.3);
        let g = GaugeSpec::string(0.0);
        // Arc from π/4 to 7π/4 the long way round, avoiding the ray.
        let arc: Vec<Vec2> = (0..=40)
            .map(|k| {
                let t = PI / 4.0 + (3.0 * FRAC_PI_2) * k as f64 / 40.0;
                2.0 * Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let exact = potential_line_integral(&tube, &g, &arc, QuadConfig::default()).unwrap();
        assert_relative_eq!(exact.value, pointwise_integral(&tube, &g, &arc), max_relative = 1e-8);
        assert_eq!(exact.string_crossings, 0);
        // Independent closed form: ∫A_string·dr = Φ [W(θ₁) − W(θ₀) + seams].
        let expect = 1.3
            * (bump_antiderivative(-PI / 4.0) + 1.0 - bump_antiderivative(PI / 4.0));
        assert_relative_eq!(exact.value, expect, max_relative = 1e-12);
    }

    #[test]
    fn gradient_gauges_shift_open_paths_but_not_loops() {
        let tube = FluxTube::ideal(1.0);
        let base = GaugeSpec::azimuthal();
        let cfg = QuadConfig::default();
        let chi = ChiField::parse("3*x").unwrap();
        let gauged = base.transformed(chi);
        let open = [Vec2::new(1.0, 1.0), Vec2::new(2.0, 0.5), Vec2::new(4.0, -1.0)];
        let v0 = potential_line_integral(&tube, &base, &open, cfg).unwrap().value;
        let v1 = potential_line_integral(&tube, &gauged, &open, cfg).unwrap().value;
        // ∫∇(3x)·dr = 3 Δx.
        assert_relative_eq!(v1 - v0, 3.0 * 3.0, max_relative = 1e-12);
        let lp = circle(Vec2::ZERO, 2.0, 64, 1.0, 0.2);
        let c0 = potential_line_integral(&tube, &base, &lp, cfg).unwrap().value;
        let c1 = potential_line_integral(&tube, &gauged, &lp, cfg).unwrap().value;
        assert_relative_eq!(c0, c1, max_relative = 1e-11);
    }

    #[test]
    fn winding_gauge_function_shifts_circulation_by_its_period() {
        let tube = FluxTube::ideal(1.0);
        let cfg = QuadConfig::default();
        let lp = circle(Vec2::ZERO, 2.0, 64, 1.0, 0.0);
        // Winding point enclosed by the loop: ∮∇χ·dr = 2πk.
        let inside = GaugeSpec::azimuthal()
            .transformed(ChiField::parse("0.5*atan2(y - 0.3, x - 0.2)").unwrap());
        let v = potential_line_integral(&tube, &inside, &lp, cfg).unwrap().value;
        assert_relative_eq!(v, 1.0 + 0.5 * TAU, max_relative = 1e-9);
        // Winding point outside: the loop never sees the branch, ∮ = 0.
        let outside = GaugeSpec::azimuthal()
            .transformed(ChiField::parse("5*atan2(y - 7, x - 9)").unwrap());
        let v = potential_line_integral(&tube, &outside, &lp, cfg).unwrap().value;
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn opposite_gauge_terms_restore_the_potential_exactly() {
        let tube = FluxTube::ideal(0.7);
        let chi = ChiField::parse("sin(x)*y + 0.25*x").unwrap();
        let round_trip = GaugeSpec::azimuthal().transformed(chi.clone()).transformed(chi.negated());
        let p = Vec2::new(0.9, -1.4);
        let base = vector_potential(&tube, &GaugeSpec::azimuthal(), p).unwrap();
        let restored = vector_potential(&tube, &round_trip, p).unwrap();
        assert_eq!(base.x, restored.x);
        assert_eq!(base.y, restored.y);
    }

    #[test]
    fn induced_field_obeys_the_loop_rule() {
        let tube = FluxTube::ideal(2.0);
        let units = Units::natural();
        let rate = 0.4;
        // E ∝ −θ̂ for rising flux.
        let e = induced_electric_field(&tube, rate, &units, Vec2::new(1.0, 0.0)).unwrap();
        assert!(e.y < 0.0);
        assert_relative_eq!(e.norm(), rate / (TAU * 1.0), max_relative = 1e-15);
        // ∮E·dr = −Φ̇/c for one counterclockwise turn, any shape.
        let tri = [
            Vec2::new(2.0, 0.0),
            Vec2::new(-1.0, 1.5),
            Vec2::new(-1.0, -1.5),
            Vec2::new(2.0, 0.0),
        ];
        let emf = electric_line_integral(&tube, rate, &units, &tri).unwrap();
        assert_relative_eq!(emf, -rate, max_relative = 1e-14);
        // Partially enclosing polygon inside a finite core: −(Ḃ/c)·area.
        let fat = FluxTube::new(Vec2::ZERO, 2.0, 1.0).unwrap();
        let n = 128;
        let lp = circle(Vec2::ZERO, 1.0, n, 1.0, 0.0);
        let emf = electric_line_integral(&fat, rate, &units, &lp).unwrap();
        let polygon_area = 0.5 * n as f64 * (TAU / n as f64).sin();
        assert_relative_eq!(emf, -rate * polygon_area / (PI * 4.0), max_relative = 1e-12);
        assert_relative_eq!(emf, -rate * 0.25, max_relative = 1e-3);
    }

    #[test]
    fn closure_detection() {
        let lp = circle(Vec2::new(1.0, 0.0), 1.0, 32, 1.0, 0.0);
        assert!(polyline_is_closed(&lp));
        assert!(!polyline_is_closed(&lp[..lp.len() - 1]));
        assert!(!polyline_is_closed(&[Vec2::ZERO, Vec2::new(1.0, 0.0)]));
    }

    #[test]
    fn gauge_spec_display_names_its_parts() {
        let g = GaugeSpec::string(0.25).transformed(ChiField::parse("3*x").unwrap());
        assert_eq!(g.to_string(), "string(0.25) + chi(3*x)");
        assert_eq!(GaugeSpec::azimuthal().to_string(), "azimuthal");
    }
}
