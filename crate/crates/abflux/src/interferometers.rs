//! The two interferometers: a loopless two-source device for a single
//! charge, and an Andreev interferometer reading the same physics out of
//! a transport current.
//!
//! Loopless device: two sources prepared in (u_j + v_j c_j†)|0⟩ emit
//! one-particle waves φ_j(x) toward a screen, giving
//!
//!   P(x) = |u₂v₁φ₁|² + |u₁v₂φ₂|² + 2|u₂v₁u₁v₂φ₁φ₂| cos(φ_B + φ₀),
//!
//! where φ_B = qΦΔθ/(2πħc) is the open-path flux phase for the wedge
//! Δθ(x) subtended between the two source→screen rays, and φ₀ is the
//! flux-independent offset k(r₁ − r₂) of the wave model. Neither path
//! closes a loop around the tube, so φ_B is computed from the local
//! field-interaction theory; the potential theory assigns no
//! gauge-independent value to it (see `phase_engine::gauge_audit`).
//!
//! Andreev device: two superconducting contacts inject Cooper pairs into
//! a normal region via Andreev reflection with amplitude
//! A_j = −πρ_j|t_j|² e^{iφ_j} and single-electron hopping rate
//! Γ_j = 2πρ_jρ_N|t_j|². The output current interferes:
//!
//!   I = (πe²V/ħ)[Γ₁² + Γ₂² + 2Γ₁Γ₂ cos(φ₀ + φ_B)],
//!
//! with φ_B = eΦΔθ/(πħc) — the open-path phase for charge q = 2e. The
//! measurement protocol averages repeated noisy current readings per flux
//! value and reports per-point standard errors.
//!
//! Intensities are assembled as (|c₁|−|c₂|)² + 2|c₁||c₂|(1 + cos φ), a
//! rearrangement whose terms are each non-negative, so P ≥ 0 and the
//! current bounds hold bit-for-bit, not just up to rounding. Sweep points
//! draw noise from per-point substreams of the master seed, so evaluation
//! order (serial or parallel) cannot change results.

use crate::em_fields::FluxTube;
use crate::error::{Error, Result};
use crate::field_interaction::ChargeState;
use crate::geom::Vec2;
use crate::phase_engine::{analytic_open_phase, two_path_phase_difference, Theory};
use crate::quadrature::QuadConfig;
use crate::rng::Rng;
use crate::trajectories::two_path_geometry;
use crate::units::Units;

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Shortest source–screen distance the outgoing-wave model resolves;
/// closer points are clamped to keep 1/r finite.
pub const NEAR_FIELD_CLAMP: f64 = 1e-9;

/// Normalization slack allowed in [`SourceState::new`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Amplitudes (u_j + v_j c_j†)|0⟩ of the two sources' vacuum/one-particle
/// superpositions; each pair is normalized, |u_j|² + |v_j|² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceState {
    pub u1: Complex64,
    pub v1: Complex64,
    pub u2: Complex64,
    pub v2: Complex64,
}

impl SourceState {
    pub fn new(u1: Complex64, v1: Complex64, u2: Complex64, v2: Complex64) -> Result<Self> {
        for (j, (u, v)) in [(1, (u1, v1)), (2, (u2, v2))] {
            let norm = u.norm_sqr() + v.norm_sqr();
            if !norm.is_finite() || (norm - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidParameter(format!(
                    "source {j} is not normalized: |u|² + |v|² = {norm}"
                )));
            }
        }
        Ok(Self { u1, v1, u2, v2 })
    }

    /// Both sources in the even superposition u = v = 1/√2.
    #[must_use]
    pub fn balanced() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { u1: h, v1: h, u2: h, v2: h }
    }
}

/// Outgoing scalar wave φ_j(x) = e^{ikr}/max(r, r_min) from a point
/// source, r = |x − S_j|. The envelope is a modeling choice; only the
/// phase k·r carries over to fringe positions.
pub fn wave_amplitude(
    source_index: usize,
    source_point: Vec2,
    screen_point: Vec2,
    wavenumber: f64,
) -> Result<Complex64> {
    let r = source_point.dist(screen_point);
    if r == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "source {source_index} coincides with the screen point {screen_point}"
        )));
    }
    Ok(Complex64::from_polar(1.0 / r.max(NEAR_FIELD_CLAMP), wavenumber * r))
}

/// Positions of the two sources of the loopless device. The screen and
/// the flux tube are supplied separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LooplessGeometry {
    pub source1: Vec2,
    pub source2: Vec2,
}

/// One abscissa of a fringe or sweep dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    /// Screen position (loopless device) or flux Φ (Andreev sweeps).
    pub abscissa: f64,
    /// P(x) or current I; never negative.
    pub intensity: f64,
    /// Standard error of the mean intensity (0 where exact).
    pub std_error: f64,
    /// Flux-induced phase φ_B at this point.
    pub phase_flux: f64,
    /// Flux-independent offset φ₀ at this point.
    pub phase_offset: f64,
    /// Local fringe contrast 2|c₁c₂|/(|c₁|² + |c₂|²).
    pub visibility: f64,
}

/// A fringe P(x) or current sweep I(Φ) with its phase decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeDataset {
    pub points: Vec<FringePoint>,
}

impl FringeDataset {
    pub fn new(points: Vec<FringePoint>) -> Result<Self> {
        for p in &points {
            if !(p.intensity >= 0.0 && p.intensity.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "intensity {} at abscissa {} is not a finite non-negative value",
                    p.intensity, p.abscissa
                )));
            }
        }
        Ok(Self { points })
    }

    #[must_use]
    pub fn max_intensity(&self) -> f64 {
        self.points.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.intensity))
    }

    #[must_use]
    pub fn min_intensity(&self) -> f64 {
        self.points.iter().fold(f64::INFINITY, |m, p| m.min(p.intensity))
    }

    /// Contrast (I_max − I_min)/(I_max + I_min) over the whole dataset.
    pub fn visibility_from_extremes(&self) -> Result<f64> {
        let (hi, lo) = (self.max_intensity(), self.min_intensity());
        if self.points.is_empty() || hi + lo <= 0.0 {
            return Err(Error::InvalidParameter(
                "visibility from extremes needs a dataset with nonzero intensity".into(),
            ));
        }
        Ok((hi - lo) / (hi + lo))
    }

    /// Tab-separated table: abscissa, intensity, standard error, φ_B,
    /// visibility.
    #[must_use]
    pub fn to_dsv(&self) -> String {
        let mut out = String::from("# abscissa\tintensity\tstd_error\tphase_flux\tvisibility\n");
        for p in &self.points {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                p.abscissa, p.intensity, p.std_error, p.phase_flux, p.visibility
            ));
        }
        out
    }
}

/// |c₁ + c₂e^{iφ}|² arranged so both addends are non-negative:
/// (|c₁| − |c₂|)² + 2|c₁||c₂|(1 + cos φ).
fn two_beam_intensity(m1: f64, m2: f64, phase: f64) -> f64 {
    let d = m1 - m2;
    d * d + 2.0 * m1 * m2 * (1.0 + phase.cos())
}

fn local_visibility(m1: f64, m2: f64) -> f64 {
    let denom = m1 * m1 + m2 * m2;
    if denom == 0.0 { 0.0 } else { 2.0 * m1 * m2 / denom }
}

/// Screen fringe P(x) of the loopless device.
///
/// For each screen point the wedge Δθ between the two source→screen rays
/// is recomputed and φ_B is evaluated by the local theory along the ray
/// pair; φ₀ = arg(c₁c₂*) collects the wave-model path-length phase. The
/// abscissa is arc length along the screen polyline from its first point.
pub fn loopless_fringe(
    state: &SourceState,
    geometry: &LooplessGeometry,
    tube: &FluxTube,
    charge: f64,
    wavenumber: f64,
    screen: &[Vec2],
    units: &Units,
) -> Result<FringeDataset> {
    if screen.is_empty() {
        return Err(Error::InvalidParameter("fringe needs at least one screen point".into()));
    }
    let probe = ChargeState::new(charge, 1.0, geometry.source1, Vec2::new(0.0, 0.0))?;
    let mut points = Vec::with_capacity(screen.len());
    let mut abscissa = 0.0;
    let mut previous: Option<Vec2> = None;
    for &x in screen {
        if let Some(prev) = previous {
            abscissa += prev.dist(x);
        }
        previous = Some(x);

        let phi1 = wave_amplitude(1, geometry.source1, x, wavenumber)?;
        let phi2 = wave_amplitude(2, geometry.source2, x, wavenumber)?;
        let c1 = state.u2 * state.v1 * phi1;
        let c2 = state.u1 * state.v2 * phi2;

        let paths = two_path_geometry(geometry.source1, geometry.source2, x, tube.center, 2)?;
        let phase_flux = two_path_phase_difference(
            &paths.path1,
            &paths.path2,
            tube,
            &probe,
            Theory::Local,
            None,
            units,
            QuadConfig::default(),
        )?;
        let phase_offset = (c1 * c2.conj()).arg();
        let (m1, m2) = (c1.norm(), c2.norm());
        points.push(FringePoint {
            abscissa,
            intensity: two_beam_intensity(m1, m2, phase_flux + phase_offset),
            std_error: 0.0,
            phase_flux,
            phase_offset,
            visibility: local_visibility(m1, m2),
        });
    }
    FringeDataset::new(points)
}

/// Parameters of the Andreev interferometer.
///
/// `tau` is the measurement pulse duration; the current formula does not
/// depend on it, so it rides along as metadata for the protocol record.
/// `phi0` is a free flux-independent offset, fixed for a whole run (the
/// condensate phases are not re-randomized shot to shot).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    /// Densities of states of the two superconducting contacts.
    pub rho1: f64,
    pub rho2: f64,
    /// Density of states of the normal region.
    pub rho_n: f64,
    /// Complex tunneling amplitudes of the two junctions.
    pub t1: Complex64,
    pub t2: Complex64,
    /// Superconducting gap Δ.
    pub gap: f64,
    /// Bias voltage V; the Andreev formula assumes eV ≪ Δ.
    pub bias: f64,
    /// Pulse duration τ (metadata only).
    pub tau: f64,
    /// Wedge angle Δθ subtended by the two contacts about the tube.
    pub delta_theta: f64,
    /// Flux-independent phase offset φ₀.
    pub phi0: f64,
    /// Elementary charge e in the working unit system.
    pub electron_charge: f64,
}

impl Default for JunctionParams {
    fn default() -> Self {
        Self {
            rho1: 1.0 / TAU,
            rho2: 1.0 / TAU,
            rho_n: 1.0 / TAU,
            t1: Complex64::new(1.0, 0.0),
            t2: Complex64::new(1.0, 0.0),
            gap: 1.0,
            bias: 0.01,
            tau: 1.0,
            delta_theta: TAU,
            phi0: 0.0,
            electron_charge: 1.0,
        }
    }
}

impl JunctionParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho_n", self.rho_n),
            ("gap", self.gap),
            ("electron_charge", self.electron_charge),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.bias >= 0.0 && self.bias.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bias must be non-negative and finite, got {}",
                self.bias
            )));
        }
        let finite = [self.tau, self.delta_theta, self.phi0];
        if !finite.iter().all(|v| v.is_finite())
            || !self.t1.is_finite()
            || !self.t2.is_finite()
        {
            return Err(Error::InvalidParameter("junction parameters must be finite".into()));
        }
        Ok(())
    }

    /// True when e·V/Δ > 0.1 — the regime where neglecting the voltage
    /// dependence of the Andreev amplitude stops being safe.
    #[must_use]
    pub fn bias_too_large(&self) -> bool {
        self.electron_charge * self.bias / self.gap > 0.1
    }

    /// Γ₁ = 2πρ₁ρ_N|t₁|².
    #[must_use]
    pub fn gamma1(&self) -> f64 {
        hopping_rate(self.rho1, self.rho_n, self.t1)
    }

    /// Γ₂ = 2πρ₂ρ_N|t₂|².
    #[must_use]
    pub fn gamma2(&self) -> f64 {
        hopping_rate(self.rho2, self.rho_n, self.t2)
    }
}

/// Andreev reflection amplitude with its validity note.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndreevAmplitude {
    pub value: Complex64,
    /// Set when eV/Δ > 0.1; the value is still the eV ≪ Δ formula.
    pub bias_warning: bool,
}

/// A_j = −πρ_j|t_j|² e^{iφ_j} for junction 1 or 2.
pub fn andreev_amplitude(
    params: &JunctionParams,
    junction_index: usize,
    condensate_phase: f64,
) -> Result<AndreevAmplitude> {
    params.validate()?;
    let (rho, t) = match junction_index {
        1 => (params.rho1, params.t1),
        2 => (params.rho2, params.t2),
        other => {
            return Err(Error::InvalidParameter(format!(
                "junction index must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(AndreevAmplitude {
        value: -PI * rho * t.norm_sqr() * Complex64::from_polar(1.0, condensate_phase),
        bias_warning: params.bias_too_large(),
    })
}

/// Single-electron hopping rate Γ_j = 2πρ_jρ_N|t_j|².
#[must_use]
pub fn hopping_rate(rho_j: f64, rho_n: f64, t_j: Complex64) -> f64 {
    TAU * rho_j * rho_n * t_j.norm_sqr()
}

/// One evaluation of the interferometer current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndreevCurrent {
    /// I = (πe²V/ħ)[Γ₁² + Γ₂² + 2Γ₁Γ₂cos(φ₀ + φ_B)].
    pub current: f64,
    /// φ_B = eΦΔθ/(πħc), the open-path phase at pair charge 2e.
    pub phase_flux: f64,
    /// φ₀ + φ_B as used in the cosine.
    pub phase_total: f64,
    pub bias_warning: bool,
}

/// Current through the Andreev interferometer at flux Φ.
pub fn andreev_current(params: &JunctionParams, flux: f64, units: &Units) -> Result<AndreevCurrent> {
    params.validate()?;
    let e = params.electron_charge;
    let phase_flux = analytic_open_phase(2.0 * e, flux, params.delta_theta, units);
    let phase_total = params.phi0 + phase_flux;
    let (g1, g2) = (params.gamma1(), params.gamma2());
    let prefactor = PI * e * e * params.bias / units.hbar;
    Ok(AndreevCurrent {
        current: prefactor * two_beam_intensity(g1, g2, phase_total),
        phase_flux,
        phase_total,
        bias_warning: params.bias_too_large(),
    })
}

/// Fringe contrast 2Γ₁Γ₂/(Γ₁² + Γ₂²) of the current interference.
pub fn visibility(gamma1: f64, gamma2: f64) -> Result<f64> {
    if !(gamma1 >= 0.0 && gamma2 >= 0.0 && gamma1.is_finite() && gamma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "hopping rates must be finite and non-negative, got {gamma1}, {gamma2}"
        )));
    }
    if gamma1 + gamma2 == 0.0 {
        return Err(Error::InvalidParameter(
            "visibility is undefined when both hopping rates vanish".into(),
        ));
    }
    Ok(local_visibility(gamma1, gamma2))
}

/// Noiseless current sweep I(Φ) over the given flux values.
pub fn andreev_sweep(params: &JunctionParams, fluxes: &[f64], units: &Units) -> Result<FringeDataset> {
    measurement_protocol(params, fluxes, 1, 0.0, 0, units)
}

/// The averaged-measurement protocol: at each flux value, draw
/// `repetitions` current readings with additive zero-mean Gaussian noise
/// of width `noise_sigma`, record their mean and standard error.
///
/// Each flux point uses its own substream of `seed`, so the dataset is
/// reproducible bit-for-bit regardless of evaluation order. With σ = 0
/// the dataset equals the noiseless sweep exactly.
pub fn measurement_protocol(
    params: &JunctionParams,
    fluxes: &[f64],
    repetitions: usize,
    noise_sigma: f64,
    seed: u64,
    units: &Units,
) -> Result<FringeDataset> {
    params.validate()?;
    if repetitions == 0 {
        return Err(Error::InvalidParameter("protocol needs at least one repetition".into()));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise width must be finite and non-negative, got {noise_sigma}"
        )));
    }
    let vis = local_visibility(params.gamma1(), params.gamma2());
    let mut points = Vec::with_capacity(fluxes.len());
    for (k, &flux) in fluxes.iter().enumerate() {
        let reading = andreev_current(params, flux, units)?;
        let (mean, std_error) = if noise_sigma == 0.0 {
            (reading.current, 0.0)
        } else {
            // Mean and spread of the noise draws alone; the deterministic
            // current shifts the mean and leaves the spread untouched.
            let mut rng = Rng::substream(seed, k as u64);
            let draws: Vec<f64> = (0..repetitions).map(|_| rng.normal()).collect();
            let n = repetitions as f64;
            let mean_noise = draws.iter().sum::<f64>() / n;
            let se = if repetitions > 1 {
                let var =
                    draws.iter().map(|d| (d - mean_noise).powi(2)).sum::<f64>() / (n - 1.0);
                noise_sigma * (var / n).sqrt()
            } else {
                0.0
            };
            (reading.current + noise_sigma * mean_noise, se)
        };
        points.push(FringePoint {
            abscissa: flux,
            // Averaged noisy readings can dip below zero; the dataset
            // invariant applies to the underlying intensity, so clamp.
            intensity: mean.max(0.0),
            std_error,
            phase_flux: reading.phase_flux,
            phase_offset: params.phi0,
            visibility: vis,
        });
    }
    FringeDataset::new(points)
}
