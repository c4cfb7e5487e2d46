//! Gauge-invariant field-interaction quantities: the momentum and energy
//! stored in the overlap of the charge's Coulomb field with the tube's
//! fields, the two interaction Lagrangians, and the boundary term that
//! connects them.
//!
//! For a charge q at r with Coulomb field E_q (non-relativistic limit):
//!
//! ```text
//! Π_q = (1/4πc) ∫ E_q × B  d³r′      overlap field momentum
//! U_q = (1/4π)  ∫ E_q · E  d³r′      overlap field energy
//! L_f = ṙ·Π_q − U_q                  field-interaction Lagrangian
//! L_p = (q/c) ṙ·A − qV               potential coupling (V ≡ 0 here)
//! F   = (1/4πc) ∫ E_q · A  d³r′      boundary term, L_f = L_p + dF/dt
//! ```
//!
//! Everything on the field side is assembled from the fields alone and
//! accepts no gauge input — that is the point. The potential side and F
//! are gauge-dependent in exactly compensating ways, which
//! [`verify_lagrangian_relation`] checks numerically along trajectories.
//!
//! All volume integrals are reduced before quadrature: the z integral of
//! the Coulomb field over the infinite tube direction is elementary
//! (∫ dz (s²+z²)^{−3/2} = 2/s²), and in polar coordinates centred on the
//! charge the remaining 1/s cancels against the area jacobian, so the
//! kernels are regular at the charge and need no cutoff. Charge and flux
//! prefactors are applied outside the quadratures, making linearity in q
//! and Φ exact rather than approximate. Quadrature is deterministic:
//! repeated calls with one tolerance configuration reproduce results
//! bit for bit.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::em_fields::{unit_azimuthal_at, vector_potential, BaseGauge, FluxTube, GaugeSpec};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Vec2};
use crate::quadrature::{integrate, integrate_half_line, QuadConfig, QuadResult};
use crate::trajectories::Trajectory;
use crate::units::Units;

/// A point charge's kinematic state.
#[derive(Debug, Clone, Copy)]
pub struct ChargeState {
    pub charge: f64,
    pub mass: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

impl ChargeState {
    pub fn new(charge: f64, mass: f64, position: Vec2, velocity: Vec2) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if !(charge.is_finite() && position.is_finite() && velocity.is_finite()) {
            return Err(Error::InvalidParameter("charge state must be finite".into()));
        }
        Ok(Self { charge, mass, position, velocity })
    }

    /// Soft validity flag: the formulas here assume |ṙ| ≪ c; speeds above
    /// c/10 are flagged rather than rejected.
    #[must_use]
    pub fn nonrelativistic(&self, units: &Units) -> bool {
        self.velocity.norm() < 0.1 * units.c
    }
}

/// A value together with the quadrature error bound that produced it
/// (zero when the value came from a closed form).
#[derive(Debug, Clone, Copy)]
pub struct Estimated<T> {
    pub value: T,
    pub error_bound: f64,
}

impl<T> Estimated<T> {
    #[must_use]
    pub fn exact(value: T) -> Self {
        Self { value, error_bound: 0.0 }
    }
}

/// Tolerance defaults for the reduced volume integrals.
#[must_use]
pub fn default_volume_config() -> QuadConfig {
    QuadConfig { rel_tol: 1e-7, abs_tol: 1e-11, max_panels: 4_000 }
}

/// Inner (nested) integrals run well below the outer tolerance: noise in
/// the ring values is invisible to the outer error estimate, so it must
/// sit far under the outer budget or it becomes the delivered error. The
/// relative floor reflects an intrinsic limit: rings crossing a string
/// seam evaluate as large cancelling lobes, and the Kronrod–Gauss
/// difference for them stagnates near 1e-9 of the net value, so asking
/// for less makes honest error propagation abort on rings whose absolute
/// contribution is negligible.
fn inner_config(cfg: QuadConfig) -> QuadConfig {
    QuadConfig {
        rel_tol: (cfg.rel_tol * 1e-2).max(5e-9),
        abs_tol: cfg.abs_tol * 1e-3,
        max_panels: cfg.max_panels,
    }
}

/// Rings close to a break radius enter the outer integral with weight
/// proportional to their distance δ from the break (outer panels end at
/// the break, so the panel containing the ring has width ~δ). Their
/// permitted error therefore grows like 1/δ: summed over the geometric
/// refinement cascade the noise contribution stays ~rel·δ_ref·|g| per
/// break, negligible against the outer budget. Loosening here matters
/// because exactly these rings sit on colliding singularities — a spike
/// at the break direction sharpening as δ → 0 — and their cancelling
/// lobes leave a net value whose achievable accuracy degrades as the
/// ring closes in.
fn near_break_config(icfg: QuadConfig, s: f64, breaks: &[f64]) -> QuadConfig {
    let delta = breaks.iter().map(|b| (s - b).abs()).fold(s.abs(), f64::min);
    let scale = breaks.iter().fold(1.0_f64, |m, b| m.max(b.abs()));
    let loosen = (0.03 * scale / delta.max(1e-300)).clamp(1.0, 1e4);
    QuadConfig {
        rel_tol: icfg.rel_tol * loosen,
        abs_tol: icfg.abs_tol * loosen,
        max_panels: icfg.max_panels,
    }
}

/// ∫₀^∞ f dx split at the given interior radii, finite pieces by the
/// bounded rule and the tail by the half-line map. Splitting keeps
/// integrable spikes at the break radii on panel boundaries, where
/// adaptive refinement resolves them geometrically instead of driving
/// nodes into them.
fn split_half_line(
    f: &mut dyn FnMut(f64) -> f64,
    breaks: &[f64],
    cfg: QuadConfig,
) -> Result<QuadResult> {
    let mut value = 0.0;
    let mut error_bound = 0.0;
    let mut evaluations = 0;
    let mut lo = 0.0;
    for &b in breaks {
        let part = integrate(&mut *f, lo, b, cfg)?;
        value += part.value;
        error_bound += part.error_bound;
        evaluations += part.evaluations;
        lo = b;
    }
    let tail = integrate_half_line(|v| f(lo + v), 0.0, cfg)?;
    Ok(QuadResult {
        value: value + tail.value,
        error_bound: error_bound + tail.error_bound,
        evaluations: evaluations + tail.evaluations,
    })
}

/// A split point for a ring integral. `graded` marks an integrable
/// |α − α₀|^(−1/2) singularity that wants the u² substitution.
#[derive(Debug, Clone, Copy)]
struct RingCut {
    alpha: f64,
    graded: bool,
}

/// Angles at which a ring of radius `s` around `rq` meets the features
/// the ring integrands are least smooth at: the closest approach to the
/// tube axis (the 1/ρ′ peak) and, for string gauges, the crossings of
/// the gauge string ray (|θ_s|^(−1/2) kinks). Splitting the angular
/// integral there turns interior singularities into segment endpoints.
fn ring_breakpoints(rq: Vec2, s: f64, tube: &FluxTube, gauge: &GaugeSpec) -> Vec<RingCut> {
    let mut cuts = Vec::with_capacity(4);
    let d = tube.center - rq;
    if d.norm_sq() > 0.0 {
        cuts.push(RingCut { alpha: d.angle(), graded: false });
    }
    if let BaseGauge::String { angle } = gauge.base {
        // Crossings of the string ray itself carry the |θ_s|^(−1/2)
        // singularity; crossings of the opposite ray only kink the
        // integrand's derivative (the wrapped angle flips sign there),
        // so they split the segment without grading.
        for (ray, graded) in [(angle, true), (angle + PI, false)] {
            let u = Vec2::new(ray.cos(), ray.sin());
            let k = u.cross(-d) / s;
            if k.abs() <= 1.0 {
                let delta = k.asin();
                for alpha in [ray - delta, ray - PI + delta] {
                    // Keep only crossings on the forward ray, not its mirror.
                    let p = rq + s * Vec2::new(alpha.cos(), alpha.sin());
                    if (p - tube.center).dot(u) > 0.0 {
                        cuts.push(RingCut { alpha, graded });
                    }
                }
            }
            // Rings grazing the ray (|k| ≈ 1) see a tall narrow spike at
            // the closest-approach angle whether or not they cross; put
            // that peak on a segment boundary so refinement bisects it
            // symmetrically instead of chasing it across panels.
            if graded && (0.97..=1.03).contains(&k.abs()) {
                cuts.push(RingCut { alpha: ray - k.signum() * FRAC_PI_2, graded: false });
            }
        }
    }
    cuts
}

/// ∫ f dα over [a, b] where the `a` end carries a |α − a|^(−1/2) kink:
/// α = a + u² turns the integrand smooth (2u·f(a + u²) is bounded), so
/// the rule converges spectrally instead of clustering panels.
fn graded_from(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    cfg: QuadConfig,
) -> Result<QuadResult> {
    let width = b - a;
    let sign = width.signum();
    integrate(|u| 2.0 * u * f(a + sign * u * u), 0.0, width.abs().sqrt(), cfg)
}

/// ∮ f dα over one full turn, split at the given angles, with the u²
/// grading applied on each side of every graded cut.
fn ring_integral(
    f: &mut dyn FnMut(f64) -> f64,
    cuts: &[RingCut],
    cfg: QuadConfig,
) -> Result<QuadResult> {
    let mut bounds: Vec<RingCut> = cuts
        .iter()
        .map(|c| RingCut { alpha: wrap_angle(c.alpha), graded: c.graded })
        .collect();
    bounds.sort_by(|p, q| p.alpha.total_cmp(&q.alpha));
    bounds.dedup_by(|p, q| {
        if p.alpha == q.alpha {
            q.graded |= p.graded;
            true
        } else {
            false
        }
    });
    let first = bounds.first().copied().unwrap_or(RingCut { alpha: -PI, graded: false });
    bounds.push(RingCut { alpha: first.alpha + TAU, ..first });
    let mut value = 0.0;
    let mut error_bound = 0.0;
    let mut evaluations = 0;
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi.alpha - lo.alpha < 1e-300 {
            continue;
        }
        let mut push = |part: QuadResult| {
            value += part.value;
            error_bound += part.error_bound;
            evaluations += part.evaluations;
        };
        match (lo.graded, hi.graded) {
            (false, false) => push(integrate(&mut *f, lo.alpha, hi.alpha, cfg)?),
            (true, false) => push(graded_from(f, lo.alpha, hi.alpha, cfg)?),
            (false, true) => push(graded_from(f, hi.alpha, lo.alpha, cfg)?),
            (true, true) => {
                let mid = 0.5 * (lo.alpha + hi.alpha);
                push(graded_from(f, lo.alpha, mid, cfg)?);
                push(graded_from(f, hi.alpha, mid, cfg)?);
            }
        }
    }
    Ok(QuadResult { value, error_bound, evaluations })
}

/// Π_q = (1/4πc) ∫ E_q × B d³r′, the field momentum of the overlap.
///
/// The ideal tube has the closed form qΦ/(2πcρ) θ̂. A finite core is
/// integrated: after the elementary z integral and polar coordinates
/// about the charge, the integrand collapses to the chord length the ray
/// cuts through the core, leaving one adaptive angular integral.
pub fn field_momentum(
    charge: &ChargeState,
    tube: &FluxTube,
    units: &Units,
    cfg: QuadConfig,
) -> Result<Estimated<Vec2>> {
    let rel = charge.position - tube.center;
    let rho_sq = rel.norm_sq();
    if rho_sq == 0.0 {
        return Err(Error::Singularity("field momentum of a charge at the tube center".into()));
    }
    if tube.radius == 0.0 {
        let v = charge.charge * tube.flux / (TAU * units.c * rho_sq) * rel.perp();
        return Ok(Estimated::exact(v));
    }
    let a = tube.radius;
    let rho = rho_sq.sqrt();
    // Chord the ray from the charge in direction ω̂(α) cuts through the core.
    let chord = |alpha: f64| {
        let w = Vec2::new(alpha.cos(), alpha.sin());
        let b = w.dot(rel);
        let disc = b * b - (rho_sq - a * a);
        if disc <= 0.0 {
            return (w, 0.0);
        }
        let sq = disc.sqrt();
        if rho < a {
            (w, -b + sq) // interior charge: ray runs from 0 to the edge
        } else if b < 0.0 {
            (w, 2.0 * sq) // exterior: both crossings on the forward ray
        } else {
            (w, 0.0)
        }
    };
    // Exterior charges only see the tangent cone towards the core.
    let (alpha_lo, alpha_hi) = if rho >= a {
        let towards = (-rel).angle();
        let half = (a / rho).asin();
        (towards - half, towards + half)
    } else {
        (-PI, PI)
    };
    let icfg = cfg;
    let ix = integrate(|alpha| { let (w, l) = chord(alpha); w.y * l }, alpha_lo, alpha_hi, icfg)?;
    let iy = integrate(|alpha| { let (w, l) = chord(alpha); -w.x * l }, alpha_lo, alpha_hi, icfg)?;
    let pre = charge.charge * tube.flux / (2.0 * PI * PI * units.c * a * a);
    Ok(Estimated {
        value: pre * Vec2::new(ix.value, iy.value),
        error_bound: pre.abs() * (ix.error_bound + iy.error_bound),
    })
}

/// U_q = (1/4π) ∫ E_q · E d³r′ against the induced electric field of a
/// ramping flux. Identically zero when the flux is static.
///
/// Quadrature runs in tube-centred rings: on every ring the integrand is
/// the circulation of a gradient field, so the angular integral cancels
/// and the radial accumulation confirms the cancellation numerically.
pub fn interaction_energy(
    charge: &ChargeState,
    tube: &FluxTube,
    flux_rate: f64,
    units: &Units,
    cfg: QuadConfig,
) -> Result<Estimated<f64>> {
    if flux_rate == 0.0 {
        return Ok(Estimated::exact(0.0));
    }
    let probe = FluxTube { flux: 1.0, ..*tube };
    let icfg = inner_config(cfg);
    let rq = charge.position;
    // Rings at the charge's own radius pass through the 1/s² peak; keep
    // that radius (and the core edge) on panel boundaries.
    let mut breaks = vec![(rq - tube.center).norm(), tube.radius];
    breaks.retain(|b| b.is_finite() && *b > 0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut inner_err: Option<Error> = None;
    let outer = split_half_line(
        &mut |rho| {
            if rho == 0.0 || inner_err.is_some() {
                return 0.0;
            }
            // Put the 1/s² peak under the charge on a panel boundary.
            let towards_charge = RingCut { alpha: (rq - tube.center).angle(), graded: false };
            let ring = ring_integral(
                &mut |alpha| {
                    let rp = tube.center + rho * Vec2::new(alpha.cos(), alpha.sin());
                    let svec = rp - rq;
                    let s_sq = svec.norm_sq();
                    if s_sq < 1e-280 {
                        return 0.0;
                    }
                    let ahat = unit_azimuthal_at(&probe, rp).unwrap_or(Vec2::ZERO);
                    svec.dot(ahat) / s_sq
                },
                &[towards_charge],
                near_break_config(icfg, rho, &breaks),
            );
            match ring {
                Ok(r) => r.value * rho,
                Err(e) => {
                    inner_err = Some(e);
                    0.0
                }
            }
        },
        &breaks,
        cfg,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    let outer = outer?;
    // (1/4π)·(2q)·(−Φ̇/c) ∫ (ŝ/s)·Â d²r′.
    let pre = -charge.charge * flux_rate / (TAU * units.c);
    Ok(Estimated { value: pre * outer.value, error_bound: pre.abs() * outer.error_bound })
}

/// W_B = ṙ·Π_q: the external work required to keep the charge moving at
/// ṙ while the flux is established, accumulated against the induced
/// electric force (dW/dt = −q ṙ·E).
pub fn work_to_establish_b(
    charge: &ChargeState,
    tube: &FluxTube,
    units: &Units,
    cfg: QuadConfig,
) -> Result<Estimated<f64>> {
    let pi_q = field_momentum(charge, tube, units, cfg)?;
    Ok(Estimated {
        value: charge.velocity.dot(pi_q.value),
        error_bound: charge.velocity.norm() * pi_q.error_bound,
    })
}

/// L_f = ṙ·Π_q − U_q, assembled from the two field overlaps. No gauge
/// enters anywhere on this side.
pub fn lagrangian_local(
    charge: &ChargeState,
    tube: &FluxTube,
    flux_rate: f64,
    units: &Units,
    cfg: QuadConfig,
) -> Result<Estimated<f64>> {
    let kinetic = work_to_establish_b(charge, tube, units, cfg)?;
    let u = interaction_energy(charge, tube, flux_rate, units, cfg)?;
    Ok(Estimated {
        value: kinetic.value - u.value,
        error_bound: kinetic.error_bound + u.error_bound,
    })
}

/// L_p = (q/c) ṙ·A(r) − qV(r), with V ≡ 0 for a confined flux.
pub fn lagrangian_potential(
    charge: &ChargeState,
    gauge: &GaugeSpec,
    tube: &FluxTube,
    units: &Units,
) -> Result<f64> {
    let a = vector_potential(tube, gauge, charge.position)?;
    Ok(charge.charge / units.c * charge.velocity.dot(a))
}

/// F = (1/4πc) ∫ E_q·A d³r′, the total-derivative boundary term between
/// the two Lagrangians.
///
/// In charge-centred polar coordinates the kernel is q ŝ·A(r+sŝ), with
/// the angular integral inside so its large-s cancellation (the ray
/// average of ŝ against a 1/ρ′ tail) accelerates the radial decay.
/// Gradient gauges whose ∇χ does not decay at infinity make the integral
/// divergent and are rejected up front.
pub fn boundary_term(
    charge: &ChargeState,
    gauge: &GaugeSpec,
    tube: &FluxTube,
    units: &Units,
    cfg: QuadConfig,
) -> Result<Estimated<f64>> {
    let scale = 1.0 + charge.position.norm() + tube.center.norm() + tube.radius;
    for chi in &gauge.chi {
        let max_grad = |r: f64| -> f64 {
            (0..8)
                .map(|k| {
                    let dir = Vec2::new(0.0, 0.0)
                        + Vec2::new((k as f64 * PI / 4.0).cos(), (k as f64 * PI / 4.0).sin());
                    chi.gradient(charge.position + r * dir).norm()
                })
                .fold(0.0, f64::max)
        };
        let (g0, g1, g2) = (max_grad(64.0 * scale), max_grad(256.0 * scale), max_grad(1024.0 * scale));
        if g0 > 0.0 && !(g1 <= 0.9 * g0 && g2 <= 0.9 * g1) {
            return Err(Error::DivergentTail(format!(
                "gradient of chi({chi}) does not decay at large distance; \
                 the boundary term has no finite value"
            )));
        }
    }
    // The azimuthal base drops out of every ring exactly: with D the
    // vector from the charge to the tube axis, ŝ·A_az(r_q + sŝ) is
    // w(|D + sŝ|)·(D × ŝ), odd about the direction of D, so its full
    // turn vanishes for any radial profile w. Only the gauge excess
    // (string bump, gradient additions) is integrated.
    if matches!(gauge.base, BaseGauge::Azimuthal) && gauge.chi.is_empty() {
        return Ok(Estimated::exact(0.0));
    }
    let rq = charge.position;
    let icfg = inner_config(cfg);
    let breaks = radial_breakpoints(rq, tube, gauge);
    let mut inner_err: Option<Error> = None;
    let outer = split_half_line(
        &mut |s| {
            if s == 0.0 || inner_err.is_some() {
                return 0.0;
            }
            let cuts = ring_breakpoints(rq, s, tube, gauge);
            let ring = ring_integral(
                &mut |alpha| {
                    let shat = Vec2::new(alpha.cos(), alpha.sin());
                    let p = rq + s * shat;
                    let base = match unit_azimuthal_at(tube, p) {
                        Ok(u) => tube.flux * u,
                        Err(_) => return 0.0,
                    };
                    let a = vector_potential(tube, gauge, p).unwrap_or(base);
                    shat.dot(a - base)
                },
                &cuts,
                near_break_config(icfg, s, &breaks),
            );
            match ring {
                Ok(r) => r.value,
                Err(e) => {
                    inner_err = Some(e);
                    0.0
                }
            }
        },
        &breaks,
        cfg,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    let outer = outer?;
    let pre = charge.charge / (TAU * units.c);
    Ok(Estimated { value: pre * outer.value, error_bound: pre.abs() * outer.error_bound })
}

/// Ring radii around `rq` at which the angular integrand changes
/// character: the ring through the tube axis (a logarithmic spike in the
/// radial profile) and the rings tangent to the gauge rays (where the
/// crossing count jumps). Used to split the radial integral so adaptive
/// refinement never collides a node with those radii.
fn radial_breakpoints(rq: Vec2, tube: &FluxTube, gauge: &GaugeSpec) -> Vec<f64> {
    let d = tube.center - rq;
    let mut breaks = vec![d.norm()];
    if let BaseGauge::String { angle } = gauge.base {
        for ray in [angle, angle + PI] {
            let u = Vec2::new(ray.cos(), ray.sin());
            // Perpendicular foot on the forward ray, else the ray is
            // first met at its origin (already covered by |d|).
            if (-d).dot(u) > 0.0 {
                breaks.push(u.cross(-d).abs());
            }
        }
    }
    breaks.retain(|b| b.is_finite() && *b > 0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// 𝓛 = qΦ/(2πc): the field angular momentum about the tube axis. It is
/// the moment arm ρ times |Π_q| = qΦ/(2πcρ), hence independent of where
/// the charge sits, and links open-path phases to geometry via
/// φ = 𝓛·Δθ/ħ.
#[must_use]
pub fn field_angular_momentum(charge: f64, flux: f64, units: &Units) -> f64 {
    charge * flux / (TAU * units.c)
}

/// Every interaction quantity at one instant, with the local Lagrangian
/// recomposed exactly from its two parts.
#[derive(Debug, Clone)]
pub struct InteractionBreakdown {
    pub field_momentum: Vec2,
    pub interaction_energy: f64,
    pub lagrangian_local: f64,
    /// Potential-side quantities exist only relative to a gauge choice.
    pub lagrangian_potential: Option<f64>,
    pub boundary_term: Option<f64>,
    pub gauge_used: Option<String>,
    pub error_bound: f64,
    pub nonrelativistic: bool,
}

pub fn interaction_breakdown(
    charge: &ChargeState,
    gauge: Option<&GaugeSpec>,
    tube: &FluxTube,
    flux_rate: f64,
    units: &Units,
    cfg: QuadConfig,
) -> Result<InteractionBreakdown> {
    let pi_q = field_momentum(charge, tube, units, cfg)?;
    let u = interaction_energy(charge, tube, flux_rate, units, cfg)?;
    let (l_pot, f, gauge_used, gauge_err) = match gauge {
        Some(g) => {
            let f = boundary_term(charge, g, tube, units, cfg)?;
            (
                Some(lagrangian_potential(charge, g, tube, units)?),
                Some(f.value),
                Some(g.to_string()),
                f.error_bound,
            )
        }
        None => (None, None, None, 0.0),
    };
    Ok(InteractionBreakdown {
        field_momentum: pi_q.value,
        interaction_energy: u.value,
        lagrangian_local: charge.velocity.dot(pi_q.value) - u.value,
        lagrangian_potential: l_pot,
        boundary_term: f,
        gauge_used,
        error_bound: charge.velocity.norm() * pi_q.error_bound + u.error_bound + gauge_err,
        nonrelativistic: charge.nonrelativistic(units),
    })
}

/// Residuals of the Lagrangian identity at one sampling interval.
#[derive(Debug, Clone, Copy)]
pub struct LevelResidual {
    pub dt: f64,
    pub max_residual: f64,
    pub rms_residual: f64,
}

/// Identity residuals across coarsened samplings of one trajectory.
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    /// Coarsest sampling first.
    pub levels: Vec<LevelResidual>,
    /// Convergence order fitted from successive halvings; `None` when
    /// the residuals sit at the numerical noise floor.
    pub order_estimate: Option<f64>,
    pub at_noise_floor: bool,
}

impl ResidualSeries {
    /// Assembles a series from raw levels (coarsest first), estimating
    /// the convergence order from successive rms ratios. Levels wholly
    /// below `noise_floor` carry no order information.
    #[must_use]
    pub fn from_levels(levels: Vec<LevelResidual>, noise_floor: f64) -> Self {
        let at_noise_floor = levels.iter().all(|l| l.rms_residual <= noise_floor);
        let order_estimate = if at_noise_floor || levels.len() < 2 {
            None
        } else {
            let pairs: Vec<f64> = levels
                .windows(2)
                .filter(|w| w[1].rms_residual > 0.0)
                .map(|w| (w[0].rms_residual / w[1].rms_residual).log2())
                .collect();
            if pairs.is_empty() {
                None
            } else {
                Some(pairs.iter().sum::<f64>() / pairs.len() as f64)
            }
        };
        Self { levels, order_estimate, at_noise_floor }
    }

    /// Tab-separated table of the levels, order footer included.
    #[must_use]
    pub fn to_dsv(&self) -> String {
        let mut out = String::from("# dt\tmax_residual\trms_residual\n");
        for l in &self.levels {
            out.push_str(&format!("{}\t{}\t{}\n", l.dt, l.max_residual, l.rms_residual));
        }
        match self.order_estimate {
            Some(order) => out.push_str(&format!("# order_estimate\t{order}\n")),
            None => out.push_str("# order_estimate\tnone\n"),
        }
        out.push_str(&format!("# at_noise_floor\t{}\n", self.at_noise_floor));
        out
    }
}

/// Checks L_f = L_p + dF/dt along a uniformly sampled trajectory past a
/// static tube.
///
/// dF/dt is a central difference of the independently quadratured F —
/// never an analytic derivative — so the two sides of the identity share
/// no code. `levels` coarsenings (each dropping every other sample)
/// expose the O(Δt²) character of the finite difference: the residual
/// must fall by about 4× per halving until it hits quadrature noise.
pub fn verify_lagrangian_relation(
    traj: &Trajectory,
    gauge: &GaugeSpec,
    tube: &FluxTube,
    q: f64,
    units: &Units,
    cfg: QuadConfig,
    levels: usize,
) -> Result<ResidualSeries> {
    let samples = traj.samples();
    let n = samples.len();
    let dt = samples[1].t - samples[0].t;
    if !samples
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - dt).abs() <= 1e-9 * dt)
    {
        return Err(Error::InvalidParameter(
            "the identity check needs uniform time steps".into(),
        ));
    }
    if levels == 0 || (n - 1) % (1 << (levels - 1)) != 0 || (n - 1) >> (levels - 1) < 4 {
        return Err(Error::InvalidParameter(format!(
            "cannot coarsen {n} samples {levels} times (need 2^(levels-1) | n-1 and ≥ 4 \
             intervals at the coarsest level)"
        )));
    }
    // One pass of the expensive quadratures, shared by every level.
    let mut f_vals = Vec::with_capacity(n);
    let mut l_field = Vec::with_capacity(n);
    let mut l_pot = Vec::with_capacity(n);
    let mass = 1.0; // irrelevant to the interaction terms
    for s in samples {
        let charge = ChargeState::new(q, mass, s.position, s.velocity)?;
        f_vals.push(boundary_term(&charge, gauge, tube, units, cfg)?.value);
        l_field.push(work_to_establish_b(&charge, tube, units, cfg)?.value);
        l_pot.push(lagrangian_potential(&charge, gauge, tube, units)?);
    }
    let scale = l_field.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::with_capacity(levels);
    for level in (0..levels).rev() {
        let stride = 1 << level;
        let dt_level = dt * stride as f64;
        let idx: Vec<usize> = (0..n).step_by(stride).collect();
        let mut max_r = 0.0f64;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for w in idx.windows(3) {
            let (prev, here, next) = (w[0], w[1], w[2]);
            let dfdt = (f_vals[next] - f_vals[prev]) / (2.0 * dt_level);
            let r = (l_field[here] - l_pot[here] - dfdt).abs();
            max_r = max_r.max(r);
            sum_sq += r * r;
            count += 1;
        }
        out.push(LevelResidual {
            dt: dt_level,
            max_residual: max_r,
            rms_residual: (sum_sq / count as f64).sqrt(),
        });
    }
    Ok(ResidualSeries::from_levels(out, 1e-12 * scale))
}
