//! Quantum phases accumulated along paths under the two coupling
//! theories, and the audit that tells them apart.
//!
//! A particle of charge q acquires φ = (1/ħ)∫L_int dt along its path.
//! The two Lagrangians give two phase functionals:
//!
//! ```text
//! potential:  φ = (q/ħc) ∫ A·dr            (gauge enters explicitly)
//! local:      φ = (1/ħ)  ∫ Π_q·dr          (no gauge exists to enter)
//! ```
//!
//! Around a closed loop both equal winding · qΦ/ħc — the flux-shift
//! interference signal — and no measurement distinguishes them. On an
//! *open* path they part ways: the local functional has the definite
//! value qΦΔθ/(2πħc), with Δθ the angle the path sweeps about the tube,
//! while the potential functional takes a different value in every
//! gauge. [`gauge_audit`] quantifies that spread; the loopless
//! interferometer turns the open-path value into a fringe position, which
//! is what makes the two theories experimentally distinguishable.

use crate::em_fields::{potential_line_integral, unit_azimuthal_segment, FluxTube, GaugeSpec};
use crate::error::{Error, Result};
use crate::field_interaction::ChargeState;
use crate::quadrature::QuadConfig;
use crate::trajectories::Trajectory;
use crate::units::Units;

use std::f64::consts::TAU;
use std::fmt;

/// Relative closed-loop agreement demanded of any pair of gauges: two
/// orders looser than the quadrature target, composed over ~10³ segments.
pub const EPS_CLOSED: f64 = 1e-8;

/// Which coupling produced a phase. The local theory is assembled from
/// the fields alone, so there is no slot to record a gauge for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coupling {
    Local,
    Potential { gauge: String },
}

/// Theory selector for operations that run under either coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    Local,
    Potential,
}

/// A phase with its provenance: which theory, which gauge (if any gauge
/// was involved at all), which path.
#[derive(Debug, Clone)]
pub struct PhaseResult {
    pub phase: f64,
    pub theory: Coupling,
    pub path_id: String,
    /// Quadrature contribution to the uncertainty, in radians; zero when
    /// the whole integral was taken in closed form.
    pub error_estimate: f64,
}

fn phase_factor(charge: f64, units: &Units) -> f64 {
    charge / (units.hbar * units.c)
}

/// φ = (1/ħ)∫Π_q·dr: the local theory's phase along a path.
///
/// Π_q points along θ̂ with magnitude qΦ/(2πcρ) outside the core and
/// qΦρ/(2πca²) inside, so its line integral reduces to the same exact
/// per-segment angle sweeps as the symmetric potential — evaluated here
/// without any gauge object in sight.
pub fn phase_local(
    traj: &Trajectory,
    tube: &FluxTube,
    charge: &ChargeState,
    units: &Units,
) -> Result<PhaseResult> {
    let pts = traj.positions();
    let mut value = 0.0;
    for (i, w) in pts.windows(2).enumerate() {
        let seg = unit_azimuthal_segment(tube, w[0], w[1]).map_err(|e| match e {
            Error::PathThroughPoint { .. } => Error::PathThroughPoint { index: i },
            other => other,
        })?;
        value += tube.flux * seg;
    }
    Ok(PhaseResult {
        phase: phase_factor(charge.charge, units) * value,
        theory: Coupling::Local,
        path_id: traj.label().into(),
        error_estimate: 0.0,
    })
}

/// φ = (q/ħc)∫A·dr: the potential theory's phase along a path, tagged
/// with the gauge that produced it.
///
/// Open paths crossing the gauge string are rejected — the value on the
/// far side depends on the branch, and integrating through silently
/// would fake a gauge-independent answer.
pub fn phase_potential(
    traj: &Trajectory,
    gauge: &GaugeSpec,
    tube: &FluxTube,
    charge: &ChargeState,
    units: &Units,
    cfg: QuadConfig,
) -> Result<PhaseResult> {
    let li = potential_line_integral(tube, gauge, &traj.positions(), cfg)?;
    let factor = phase_factor(charge.charge, units);
    Ok(PhaseResult {
        phase: factor * li.value,
        theory: Coupling::Potential { gauge: gauge.to_string() },
        path_id: traj.label().into(),
        error_estimate: factor.abs() * li.error_bound,
    })
}

/// The closed form the local theory assigns to any open path sweeping
/// Δθ about an ideal tube: qΦΔθ/(2πħc).
#[must_use]
pub fn analytic_open_phase(charge: f64, flux: f64, delta_theta: f64, units: &Units) -> f64 {
    charge * flux * delta_theta / (TAU * units.hbar * units.c)
}

/// One gauge's entry in an audit.
#[derive(Debug, Clone)]
pub struct GaugeAuditEntry {
    pub gauge: String,
    pub phase: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditVerdict {
    GaugeInvariant,
    GaugeDependent,
}

impl fmt::Display for AuditVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditVerdict::GaugeInvariant => "gauge-invariant",
            AuditVerdict::GaugeDependent => "gauge-dependent",
        })
    }
}

/// Potential-theory phases across a set of gauges, their spread, and the
/// (single) local-theory phase for the same path.
#[derive(Debug, Clone)]
pub struct GaugeAudit {
    pub entries: Vec<GaugeAuditEntry>,
    /// Largest pairwise difference among the potential phases.
    pub spread: f64,
    pub local_phase: f64,
    pub closed: bool,
    pub verdict: AuditVerdict,
}

impl GaugeAudit {
    /// Tab-separated table: one row per gauge, summary in trailing
    /// comment lines.
    #[must_use]
    pub fn to_dsv(&self) -> String {
        let mut out = String::from("# gauge\tphase\terror_estimate\n");
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.gauge, e.phase, e.error_estimate));
        }
        out.push_str(&format!("# spread\t{}\n", self.spread));
        out.push_str(&format!("# local_phase\t{}\n", self.local_phase));
        out.push_str(&format!("# closed\t{}\n", self.closed));
        out.push_str(&format!("# verdict\t{}\n", self.verdict));
        out
    }
}

/// Runs the potential phase under every gauge in the list and compares.
///
/// Closed paths must come out gauge-invariant (spread below
/// [`EPS_CLOSED`] relative); open paths generically do not, and the
/// spread is the measure of how ill-defined the open-path potential
/// phase is. The local phase is computed once — it has no gauge input
/// to vary.
pub fn gauge_audit(
    traj: &Trajectory,
    gauges: &[GaugeSpec],
    tube: &FluxTube,
    charge: &ChargeState,
    units: &Units,
    cfg: QuadConfig,
) -> Result<GaugeAudit> {
    if gauges.len() < 2 {
        return Err(Error::InvalidParameter(
            "a gauge audit needs at least two gauges to compare".into(),
        ));
    }
    let local = phase_local(traj, tube, charge, units)?;
    let mut entries = Vec::with_capacity(gauges.len());
    for g in gauges {
        let r = phase_potential(traj, g, tube, charge, units, cfg)?;
        entries.push(GaugeAuditEntry {
            gauge: g.to_string(),
            phase: r.phase,
            error_estimate: r.error_estimate,
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in &entries {
        lo = lo.min(e.phase);
        hi = hi.max(e.phase);
    }
    let spread = hi - lo;
    let scale = entries.iter().fold(1.0f64, |m, e| m.max(e.phase.abs()));
    let verdict = if spread <= EPS_CLOSED * scale {
        AuditVerdict::GaugeInvariant
    } else {
        AuditVerdict::GaugeDependent
    };
    Ok(GaugeAudit { entries, spread, local_phase: local.phase, closed: traj.is_closed(), verdict })
}

/// φ(path₁) − φ(path₂) under the chosen theory, for two paths leaving a
/// common start epoch (the loopless device: distinct sources, one
/// screen point).
///
/// The theory selector polices its gauge argument: the potential theory
/// requires one, the local theory refuses one.
pub fn two_path_phase_difference(
    path1: &Trajectory,
    path2: &Trajectory,
    tube: &FluxTube,
    charge: &ChargeState,
    theory: Theory,
    gauge: Option<&GaugeSpec>,
    units: &Units,
    cfg: QuadConfig,
) -> Result<f64> {
    let (t1, t2) = (path1.start().t, path2.start().t);
    if (t1 - t2).abs() > 1e-12 * (1.0 + t1.abs().max(t2.abs())) {
        return Err(Error::InvalidParameter(format!(
            "interfering paths must share a start epoch, got {t1} and {t2}"
        )));
    }
    match (theory, gauge) {
        (Theory::Local, None) => Ok(phase_local(path1, tube, charge, units)?.phase
            - phase_local(path2, tube, charge, units)?.phase),
        (Theory::Local, Some(_)) => Err(Error::InvalidParameter(
            "the local theory takes no gauge; pass none".into(),
        )),
        (Theory::Potential, Some(g)) => {
            Ok(phase_potential(path1, g, tube, charge, units, cfg)?.phase
                - phase_potential(path2, g, tube, charge, units, cfg)?.phase)
        }
        (Theory::Potential, None) => Err(Error::InvalidParameter(
            "the potential theory needs a gauge to integrate in".into(),
        )),
    }
}
