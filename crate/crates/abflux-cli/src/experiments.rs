//! The six runnable experiments.
//!
//! Each experiment owns a schema (every config key it understands, with
//! defaults and unit notes), a one-line summary stating the formula it
//! exercises, and a run function mapping a resolved config to datasets.
//! Run functions are pure with respect to the filesystem — they return
//! the file contents, and the caller writes everything only after the
//! whole experiment has succeeded, so a failed run leaves no partial
//! outputs behind.

use std::f64::consts::TAU;

use abflux::dynamics::{
    faraday_check, integrate_trajectory, momentum_conservation_check, work_balance_check,
    DynamicsConfig, FluxRamp, RampedTube,
};
use abflux::em_fields::FluxTube;
use abflux::error::Error as PhysicsError;
use abflux::field_interaction::{verify_lagrangian_relation, ChargeState};
use abflux::geom::Vec2;
use abflux::interferometers::{
    andreev_sweep, loopless_fringe, measurement_protocol, JunctionParams, LooplessGeometry,
    SourceState,
};
use abflux::phase_engine::gauge_audit;
use abflux::quadrature::QuadConfig;
use abflux::trajectories::Trajectory;
use abflux::units::Units;
use num_complex::Complex64;

use crate::config::{ConfigError, Resolved, SchemaKey};

/// Everything a run function needs besides its parameters.
pub struct RunContext {
    pub seed: u64,
    pub units: Units,
    pub quad: QuadConfig,
}

/// One output file: name, full contents, and the manifest note
/// describing what it holds.
pub struct Dataset {
    pub filename: &'static str,
    pub contents: String,
    pub note: String,
}

/// A failure after config resolution: either a value fails its domain
/// check (still a config problem) or the physics engine refused.
pub enum RunError {
    Config(ConfigError),
    Physics { context: String, source: PhysicsError },
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn physics(context: &str) -> impl Fn(PhysicsError) -> RunError + '_ {
    move |source| RunError::Physics { context: context.to_string(), source }
}

/// A runnable experiment: name, formula summary, config schema, runner.
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    specific: &'static [SchemaKey],
    run: fn(&Resolved, &RunContext) -> Result<Vec<Dataset>, RunError>,
}

impl Experiment {
    /// Full schema: the common sections followed by this experiment's own.
    pub fn schema(&self) -> Vec<SchemaKey> {
        let mut keys = vec![SchemaKey {
            section: "experiment",
            key: "name",
            default: self.name,
            doc: "one of the names printed by `abflux list`",
        }];
        keys.extend_from_slice(COMMON);
        keys.extend_from_slice(self.specific);
        keys
    }

    pub fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
        (self.run)(cfg, ctx)
    }
}

/// Sections shared by every experiment.
const COMMON: &[SchemaKey] = &[
    SchemaKey {
        section: "units",
        key: "mode",
        default: "natural",
        doc: "`natural` (ħ = c = 1, charges/fluxes dimensionless) or `gaussian-cgs` (ħ in erg·s, c in cm/s, flux in G·cm²)",
    },
    SchemaKey {
        section: "run",
        key: "seed",
        default: "42",
        doc: "master seed for every stochastic draw; identical config + seed reproduces outputs byte for byte",
    },
    SchemaKey {
        section: "run",
        key: "out_dir",
        default: "out",
        doc: "output directory (the --out-dir flag overrides without changing the manifest)",
    },
    SchemaKey {
        section: "tolerance",
        key: "rel",
        default: "1e-6",
        doc: "relative quadrature target (--tolerance-profile fast|accurate overrides this section)",
    },
    SchemaKey { section: "tolerance", key: "abs", default: "1e-10", doc: "absolute quadrature target" },
    SchemaKey { section: "tolerance", key: "max_panels", default: "4000", doc: "adaptive refinement budget" },
];

const TUBE: &[SchemaKey] = &[
    SchemaKey {
        section: "tube",
        key: "flux",
        default: "1.0",
        doc: "tube flux Φ; in natural mode qΦ/(ħc) is the closed-loop phase",
    },
    SchemaKey { section: "tube", key: "radius", default: "0", doc: "core radius a; 0 is the ideal line tube" },
    SchemaKey { section: "tube", key: "center_x", default: "0", doc: "tube axis position" },
    SchemaKey { section: "tube", key: "center_y", default: "0", doc: "" },
];

fn tube_from(cfg: &Resolved) -> Result<FluxTube, RunError> {
    FluxTube::new(
        Vec2::new(cfg.f64("tube", "center_x")?, cfg.f64("tube", "center_y")?),
        cfg.f64("tube", "radius")?,
        cfg.f64("tube", "flux")?,
    )
    .map_err(physics("tube geometry"))
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![from];
    }
    (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect()
}

/// The experiment table, in `list` order.
pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "loopless-fringe",
        summary: "screen fringe P(x) = (|c₁|−|c₂|)² + 2|c₁c₂|(1 + cos(φ₀ + φ_B)) of the two-source device, φ_B = (qΦ/2πħc)Δθ from the local route",
        specific: LOOPLESS_SCHEMA,
        run: run_loopless,
    },
    Experiment {
        name: "andreev-sweep",
        summary: "junction current I(Φ) = (πe²V/ħ)[Γ₁² + Γ₂² + 2Γ₁Γ₂cos(φ₀ + φ_B)], φ_B = (2eΦ/2πħc)Δθ, flux period πħc/e at Δθ = 2π; optional noisy repetitions",
        specific: ANDREEV_SCHEMA,
        run: run_andreev,
    },
    Experiment {
        name: "gauge-audit",
        summary: "potential-route phase (q/ħc)∫A·dr across a gauge list against the gauge-free local route (1/ħ)∫Π_q·dr; closed loops must agree, open paths expose the spread",
        specific: AUDIT_SCHEMA,
        run: run_audit,
    },
    Experiment {
        name: "lagrangian-identity",
        summary: "residual cascade of L_f = L_p + dF/dt with F = (1/4πc)∫E_q·A d³r′ under time-step halving; smooth single-valued gauges converge at order 2",
        specific: IDENTITY_SCHEMA,
        run: run_identity,
    },
    Experiment {
        name: "conservation-suite",
        summary: "flux-ramp bookkeeping: QE + dΠ_Q/dt = 0 at a held charge, ∮E·dr = −(1/c)dΦ/dt per enclosed turn, and work balance W_B = ṙ·ΔΠ_q",
        specific: CONSERVATION_SCHEMA,
        run: run_conservation,
    },
    Experiment {
        name: "trajectory",
        summary: "classical motion m r̈ = q(E + ṙ×B/c) integrated past the tube with a symmetric second-order splitting; a static tube exerts no force outside its core",
        specific: TRAJECTORY_SCHEMA,
        run: run_trajectory,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

// ---------------------------------------------------------------- loopless

const LOOPLESS_SCHEMA: &[SchemaKey] = &[
    SchemaKey { section: "tube", key: "flux", default: "1.0", doc: "tube flux Φ" },
    SchemaKey { section: "tube", key: "radius", default: "0", doc: "core radius a; 0 is the ideal line tube" },
    SchemaKey { section: "tube", key: "center_x", default: "0", doc: "tube axis position (keep it off both source→screen rays)" },
    SchemaKey { section: "tube", key: "center_y", default: "0", doc: "" },
    SchemaKey { section: "source", key: "u1", default: "0.7071067811865476", doc: "mode amplitudes of the two sources; complex phases fold into the geometric offset φ₀" },
    SchemaKey { section: "source", key: "v1", default: "0.7071067811865476", doc: "set v1 = 0 for normal (unpaired) carriers: the fringe loses all flux dependence" },
    SchemaKey { section: "source", key: "u2", default: "0.7071067811865476", doc: "" },
    SchemaKey { section: "source", key: "v2", default: "0.7071067811865476", doc: "" },
    SchemaKey { section: "source", key: "wavenumber", default: "40", doc: "wave number k of the emitted modes (sets the geometric fringe spacing)" },
    SchemaKey { section: "geometry", key: "source1_x", default: "-2.0", doc: "positions of the two sources" },
    SchemaKey { section: "geometry", key: "source1_y", default: "0.83", doc: "" },
    SchemaKey { section: "geometry", key: "source2_x", default: "-2.0", doc: "" },
    SchemaKey { section: "geometry", key: "source2_y", default: "-0.83", doc: "" },
    SchemaKey { section: "geometry", key: "screen_from_x", default: "3.0", doc: "screen segment endpoints; sampled uniformly" },
    SchemaKey { section: "geometry", key: "screen_from_y", default: "-2.0", doc: "" },
    SchemaKey { section: "geometry", key: "screen_to_x", default: "3.0", doc: "" },
    SchemaKey { section: "geometry", key: "screen_to_y", default: "2.0", doc: "" },
    SchemaKey { section: "geometry", key: "screen_points", default: "81", doc: "" },
    SchemaKey { section: "charge", key: "q", default: "1.0", doc: "carrier charge entering φ_B" },
];

fn run_loopless(cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
    let tube = tube_from(cfg)?;
    let real = |k: &str| -> Result<Complex64, RunError> {
        Ok(Complex64::new(cfg.f64("source", k)?, 0.0))
    };
    let state = SourceState::new(real("u1")?, real("v1")?, real("u2")?, real("v2")?)
        .map_err(physics("source amplitudes"))?;
    let geometry = LooplessGeometry {
        source1: Vec2::new(cfg.f64("geometry", "source1_x")?, cfg.f64("geometry", "source1_y")?),
        source2: Vec2::new(cfg.f64("geometry", "source2_x")?, cfg.f64("geometry", "source2_y")?),
    };
    let from = Vec2::new(cfg.f64("geometry", "screen_from_x")?, cfg.f64("geometry", "screen_from_y")?);
    let to = Vec2::new(cfg.f64("geometry", "screen_to_x")?, cfg.f64("geometry", "screen_to_y")?);
    let n = cfg.usize("geometry", "screen_points")?;
    let screen: Vec<Vec2> = linspace(0.0, 1.0, n).into_iter().map(|u| from + (to - from) * u).collect();
    let fringe = loopless_fringe(
        &state,
        &geometry,
        &tube,
        cfg.f64("charge", "q")?,
        cfg.f64("source", "wavenumber")?,
        &screen,
        &ctx.units,
    )
    .map_err(physics("loopless fringe"))?;
    let note = format!(
        "screen fringe, {n} points, flux {}, sources ({}, {}) / ({}, {})",
        cfg.str("tube", "flux"),
        cfg.str("geometry", "source1_x"),
        cfg.str("geometry", "source1_y"),
        cfg.str("geometry", "source2_x"),
        cfg.str("geometry", "source2_y"),
    );
    Ok(vec![Dataset { filename: "fringe.dsv", contents: fringe.to_dsv(), note }])
}

// ----------------------------------------------------------------- andreev

const ANDREEV_SCHEMA: &[SchemaKey] = &[
    SchemaKey { section: "junction", key: "rho1", default: "0.15915494309189535", doc: "densities of states of the two superconducting contacts (defaults are 1/2π)" },
    SchemaKey { section: "junction", key: "rho2", default: "0.15915494309189535", doc: "" },
    SchemaKey { section: "junction", key: "rho_n", default: "0.15915494309189535", doc: "density of states of the normal region" },
    SchemaKey { section: "junction", key: "t1", default: "1.0", doc: "tunneling amplitudes (real; phases fold into phi0)" },
    SchemaKey { section: "junction", key: "t2", default: "1.0", doc: "" },
    SchemaKey { section: "junction", key: "gap", default: "1.0", doc: "superconducting gap Δ; the formula assumes eV ≪ Δ" },
    SchemaKey { section: "junction", key: "bias", default: "0.01", doc: "bias voltage V" },
    SchemaKey { section: "junction", key: "tau", default: "1.0", doc: "pulse duration (recorded, the stationary current does not depend on it)" },
    SchemaKey { section: "junction", key: "delta_theta", default: "6.283185307179586", doc: "wedge angle Δθ the two contacts subtend about the tube; 2π gives flux period πħc/e" },
    SchemaKey { section: "junction", key: "phi0", default: "0.0", doc: "flux-independent phase offset" },
    SchemaKey { section: "junction", key: "electron_charge", default: "1.0", doc: "elementary charge e in the working units (pairs carry q = 2e)" },
    SchemaKey { section: "sweep", key: "flux_from", default: "0.0", doc: "swept flux range and sample count" },
    SchemaKey { section: "sweep", key: "flux_to", default: "6.283185307179586", doc: "" },
    SchemaKey { section: "sweep", key: "points", default: "81", doc: "" },
    SchemaKey { section: "noise", key: "sigma", default: "0", doc: "per-shot current noise width; 0 runs the exact sweep" },
    SchemaKey { section: "noise", key: "repetitions", default: "1", doc: "shots averaged per flux point when sigma > 0" },
];

fn run_andreev(cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
    let params = JunctionParams {
        rho1: cfg.f64("junction", "rho1")?,
        rho2: cfg.f64("junction", "rho2")?,
        rho_n: cfg.f64("junction", "rho_n")?,
        t1: Complex64::new(cfg.f64("junction", "t1")?, 0.0),
        t2: Complex64::new(cfg.f64("junction", "t2")?, 0.0),
        gap: cfg.f64("junction", "gap")?,
        bias: cfg.f64("junction", "bias")?,
        tau: cfg.f64("junction", "tau")?,
        delta_theta: cfg.f64("junction", "delta_theta")?,
        phi0: cfg.f64("junction", "phi0")?,
        electron_charge: cfg.f64("junction", "electron_charge")?,
    };
    let fluxes = linspace(
        cfg.f64("sweep", "flux_from")?,
        cfg.f64("sweep", "flux_to")?,
        cfg.usize("sweep", "points")?,
    );
    let sigma = cfg.f64("noise", "sigma")?;
    let repetitions = cfg.usize("noise", "repetitions")?;
    let sweep = if sigma > 0.0 {
        measurement_protocol(&params, &fluxes, repetitions, sigma, ctx.seed, &ctx.units)
            .map_err(physics("measurement protocol"))?
    } else {
        andreev_sweep(&params, &fluxes, &ctx.units).map_err(physics("current sweep"))?
    };
    let note = format!(
        "current sweep over {} flux points, Γ₁ = {:.6}, Γ₂ = {:.6}, Δθ = {}{}",
        fluxes.len(),
        params.gamma1(),
        params.gamma2(),
        cfg.str("junction", "delta_theta"),
        if sigma > 0.0 {
            format!(", noisy protocol σ = {sigma}, {repetitions} shots/point")
        } else {
            String::from(", exact")
        },
    );
    Ok(vec![Dataset { filename: "sweep.dsv", contents: sweep.to_dsv(), note }])
}

// ------------------------------------------------------------------- audit

const AUDIT_SCHEMA: &[SchemaKey] = &[
    SchemaKey { section: "tube", key: "flux", default: "1.0", doc: "tube flux Φ" },
    SchemaKey { section: "tube", key: "radius", default: "0", doc: "core radius a; 0 is the ideal line tube" },
    SchemaKey { section: "tube", key: "center_x", default: "0", doc: "tube axis position" },
    SchemaKey { section: "tube", key: "center_y", default: "0", doc: "" },
    SchemaKey { section: "path", key: "kind", default: "circle", doc: "`circle` (center/radius/turns; turns = 1 closes the loop) or `line` (from/to)" },
    SchemaKey { section: "path", key: "center_x", default: "0", doc: "circle parameters" },
    SchemaKey { section: "path", key: "center_y", default: "0", doc: "" },
    SchemaKey { section: "path", key: "radius", default: "1.5", doc: "" },
    SchemaKey { section: "path", key: "start_angle", default: "0.15", doc: "" },
    SchemaKey { section: "path", key: "turns", default: "1.0", doc: "fraction of a full turn; non-integer values leave the path open" },
    SchemaKey { section: "path", key: "from_x", default: "2.0", doc: "line parameters" },
    SchemaKey { section: "path", key: "from_y", default: "-1.5", doc: "" },
    SchemaKey { section: "path", key: "to_x", default: "2.0", doc: "" },
    SchemaKey { section: "path", key: "to_y", default: "1.5", doc: "" },
    SchemaKey { section: "path", key: "speed", default: "1.0", doc: "traversal speed" },
    SchemaKey { section: "path", key: "samples", default: "513", doc: "" },
    SchemaKey { section: "gauges", key: "list", default: "azimuthal; string(pi); azimuthal + chi(0.8 * y / (4 + x*x + y*y))", doc: "`;`-separated gauges: `azimuthal`, `string(<angle>)`, each optionally `+ chi(<expr>)`" },
    SchemaKey { section: "charge", key: "q", default: "1.0", doc: "probe charge" },
];

fn audit_path(cfg: &Resolved) -> Result<Trajectory, RunError> {
    let samples = cfg.usize("path", "samples")?;
    let speed = cfg.f64("path", "speed")?;
    match cfg.str("path", "kind") {
        "circle" => {
            let a0 = cfg.f64("path", "start_angle")?;
            let a1 = a0 + cfg.f64("path", "turns")? * TAU;
            Trajectory::arc(
                Vec2::new(cfg.f64("path", "center_x")?, cfg.f64("path", "center_y")?),
                cfg.f64("path", "radius")?,
                a0,
                a1,
                speed,
                samples,
            )
            .map_err(physics("audit path"))
        }
        "line" => Trajectory::straight(
            Vec2::new(cfg.f64("path", "from_x")?, cfg.f64("path", "from_y")?),
            Vec2::new(cfg.f64("path", "to_x")?, cfg.f64("path", "to_y")?),
            speed,
            samples,
        )
        .map_err(physics("audit path")),
        other => Err(RunError::Config(cfg.error_at(
            "path",
            "kind",
            format!("path.kind must be `circle` or `line`, got `{other}`"),
        ))),
    }
}

fn run_audit(cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
    let tube = tube_from(cfg)?;
    let traj = audit_path(cfg)?;
    let gauges = cfg.gauges("gauges", "list")?;
    let probe = ChargeState::new(cfg.f64("charge", "q")?, 1.0, traj.start().position, Vec2::ZERO)
        .map_err(physics("probe charge"))?;
    let audit = gauge_audit(&traj, &gauges, &tube, &probe, &ctx.units, ctx.quad)
        .map_err(physics("gauge audit"))?;
    let note = format!(
        "{} gauges on a {} {} path: verdict {}, spread {:e} rad",
        audit.entries.len(),
        if audit.closed { "closed" } else { "open" },
        cfg.str("path", "kind"),
        audit.verdict,
        audit.spread,
    );
    Ok(vec![Dataset { filename: "audit.dsv", contents: audit.to_dsv(), note }])
}

// ---------------------------------------------------------------- identity

const IDENTITY_SCHEMA: &[SchemaKey] = &[
    SchemaKey { section: "tube", key: "flux", default: "1.0", doc: "tube flux Φ" },
    SchemaKey { section: "tube", key: "radius", default: "0", doc: "core radius a; 0 is the ideal line tube" },
    SchemaKey { section: "tube", key: "center_x", default: "0", doc: "tube axis position" },
    SchemaKey { section: "tube", key: "center_y", default: "0", doc: "" },
    SchemaKey { section: "trajectory", key: "center_x", default: "2.4", doc: "elliptical orbit r(t) = c + (Rx cos(ωt + p), Ry sin(ωt + p)); keep it clear of the tube and of any string ray" },
    SchemaKey { section: "trajectory", key: "center_y", default: "0.0", doc: "" },
    SchemaKey { section: "trajectory", key: "radius_x", default: "0.75", doc: "" },
    SchemaKey { section: "trajectory", key: "radius_y", default: "0.6", doc: "" },
    SchemaKey { section: "trajectory", key: "angular_rate", default: "1.0", doc: "ω; slower orbits reach the quadrature noise floor at coarser steps" },
    SchemaKey { section: "trajectory", key: "phase", default: "0.3", doc: "p" },
    SchemaKey { section: "trajectory", key: "duration", default: "1.0", doc: "" },
    SchemaKey { section: "trajectory", key: "samples", default: "33", doc: "sample count n; n − 1 must be divisible by 2^(levels − 1) with ≥ 4 coarse intervals" },
    SchemaKey { section: "gauge", key: "spec", default: "string(pi)", doc: "gauge for the potential side; the field side takes no gauge at all" },
    SchemaKey { section: "identity", key: "charge", default: "1.0", doc: "charge q sourcing the Coulomb overlap" },
    SchemaKey { section: "identity", key: "levels", default: "3", doc: "number of step-halving levels in the residual cascade" },
];

fn run_identity(cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
    let tube = tube_from(cfg)?;
    let gauge = cfg.gauge("gauge", "spec")?;
    let center = Vec2::new(cfg.f64("trajectory", "center_x")?, cfg.f64("trajectory", "center_y")?);
    let (rx, ry) = (cfg.f64("trajectory", "radius_x")?, cfg.f64("trajectory", "radius_y")?);
    let omega = cfg.f64("trajectory", "angular_rate")?;
    let phase = cfg.f64("trajectory", "phase")?;
    let traj = Trajectory::from_fn(
        0.0,
        cfg.f64("trajectory", "duration")?,
        cfg.usize("trajectory", "samples")?,
        |t| {
            let (s, c) = (omega * t + phase).sin_cos();
            (
                center + Vec2::new(rx * c, ry * s),
                Vec2::new(-rx * omega * s, ry * omega * c),
            )
        },
    )
    .map_err(physics("identity trajectory"))?;
    let series = verify_lagrangian_relation(
        &traj,
        &gauge,
        &tube,
        cfg.f64("identity", "charge")?,
        &ctx.units,
        ctx.quad,
        cfg.usize("identity", "levels")?,
    )
    .map_err(physics("identity residuals"))?;
    let note = format!(
        "residual cascade in gauge {}: order estimate {}, finest max residual {:e}",
        gauge,
        series
            .order_estimate
            .map_or_else(|| String::from("none (noise floor)"), |o| format!("{o:.3}")),
        series.levels.last().map_or(0.0, |l| l.max_residual),
    );
    Ok(vec![Dataset { filename: "residuals.dsv", contents: series.to_dsv(), note }])
}

// ------------------------------------------------------------ conservation

const CONSERVATION_SCHEMA: &[SchemaKey] = &[
    SchemaKey { section: "tube", key: "radius", default: "0", doc: "core radius a; 0 is the ideal line tube (the flux comes from the ramp)" },
    SchemaKey { section: "tube", key: "center_x", default: "0", doc: "tube axis position" },
    SchemaKey { section: "tube", key: "center_y", default: "0", doc: "" },
    SchemaKey { section: "ramp", key: "kind", default: "smoothstep", doc: "`linear` or `smoothstep` flux ramp Φ(t)" },
    SchemaKey { section: "ramp", key: "flux_from", default: "0.0", doc: "" },
    SchemaKey { section: "ramp", key: "flux_to", default: "1.0", doc: "" },
    SchemaKey { section: "ramp", key: "duration", default: "2.0", doc: "" },
    SchemaKey { section: "momentum", key: "charge", default: "1.0", doc: "held test charge Q for QE + dΠ_Q/dt = 0 (also used by the work balance)" },
    SchemaKey { section: "momentum", key: "position_x", default: "1.2", doc: "where the charge is held" },
    SchemaKey { section: "momentum", key: "position_y", default: "0.4", doc: "" },
    SchemaKey { section: "momentum", key: "time_samples", default: "5", doc: "interior ramp times checked" },
    SchemaKey { section: "momentum", key: "levels", default: "3", doc: "halvings of the differencing step (expect 4× residual decay each)" },
    SchemaKey { section: "faraday", key: "loop_radius", default: "1.5", doc: "closed circulation loop about the tube" },
    SchemaKey { section: "faraday", key: "loop_samples", default: "257", doc: "" },
    SchemaKey { section: "faraday", key: "at_time", default: "1.0", doc: "ramp time at which ∮E·dr is compared with −(1/c)dΦ/dt" },
    SchemaKey { section: "work", key: "velocity_x", default: "0.3", doc: "drag velocity ṙ in W_B = ṙ·ΔΠ_q" },
    SchemaKey { section: "work", key: "velocity_y", default: "0.1", doc: "" },
    SchemaKey { section: "work", key: "time_steps", default: "512", doc: "trapezoid panels for the work integral across the ramp" },
];

fn ramp_from(cfg: &Resolved) -> Result<FluxRamp, RunError> {
    let from = cfg.f64("ramp", "flux_from")?;
    let to = cfg.f64("ramp", "flux_to")?;
    let duration = cfg.f64("ramp", "duration")?;
    match cfg.str("ramp", "kind") {
        "linear" => Ok(FluxRamp::Linear { from, to, duration }),
        "smoothstep" => Ok(FluxRamp::Smoothstep { from, to, duration }),
        other => Err(RunError::Config(cfg.error_at(
            "ramp",
            "kind",
            format!("ramp.kind must be `linear` or `smoothstep`, got `{other}`"),
        ))),
    }
}

fn run_conservation(cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
    let center = Vec2::new(cfg.f64("tube", "center_x")?, cfg.f64("tube", "center_y")?);
    let geometry = FluxTube::new(center, cfg.f64("tube", "radius")?, 0.0)
        .map_err(physics("tube geometry"))?;
    let ramp = ramp_from(cfg)?;
    let tube = RampedTube::ramped(geometry, ramp).map_err(physics("flux ramp"))?;

    let q = cfg.f64("momentum", "charge")?;
    let position = Vec2::new(cfg.f64("momentum", "position_x")?, cfg.f64("momentum", "position_y")?);
    let report = momentum_conservation_check(
        q,
        position,
        &tube,
        cfg.usize("momentum", "time_samples")?,
        cfg.usize("momentum", "levels")?,
        &ctx.units,
        ctx.quad,
    )
    .map_err(physics("momentum conservation"))?;
    let mut momentum = report.series.to_dsv();
    momentum.push_str(&format!("# field_scale\t{}\n", report.scale));
    momentum.push_str(&format!("# max_relative_residual\t{}\n", report.max_relative_residual()));

    let at_time = cfg.f64("faraday", "at_time")?;
    let loop_traj = Trajectory::arc(
        center,
        cfg.f64("faraday", "loop_radius")?,
        0.15,
        0.15 + TAU,
        1.0,
        cfg.usize("faraday", "loop_samples")?,
    )
    .map_err(physics("faraday loop"))?;
    let circulation = faraday_check(&tube, &loop_traj, at_time, &ctx.units)
        .map_err(physics("faraday circulation"))?;
    let faraday = format!(
        "# t\tcirculation_residual\n{at_time}\t{circulation}\n",
    );

    let dragged = ChargeState::new(
        q,
        1.0,
        position,
        Vec2::new(cfg.f64("work", "velocity_x")?, cfg.f64("work", "velocity_y")?),
    )
    .map_err(physics("dragged charge"))?;
    let balance = work_balance_check(&dragged, &tube, cfg.usize("work", "time_steps")?, &ctx.units, ctx.quad)
        .map_err(physics("work balance"))?;
    let work = format!(
        "# work_integral\tmomentum_change\tresidual\n{}\t{}\t{}\n",
        balance.work_integral, balance.momentum_change, balance.residual,
    );

    Ok(vec![
        Dataset {
            filename: "momentum.dsv",
            contents: momentum,
            note: format!(
                "QE + dΠ_Q/dt residual cascade at ({}, {}); max relative residual {:e}",
                position.x,
                position.y,
                report.max_relative_residual(),
            ),
        },
        Dataset {
            filename: "faraday.dsv",
            contents: faraday,
            note: format!("|∮E·dr + (winding/c)dΦ/dt| at t = {at_time}: {circulation:e}"),
        },
        Dataset {
            filename: "work.dsv",
            contents: work,
            note: format!("W_B vs ṙ·ΔΠ_q across the ramp: residual {:e}", balance.residual),
        },
    ])
}

// -------------------------------------------------------------- trajectory

const TRAJECTORY_SCHEMA: &[SchemaKey] = &[
    SchemaKey { section: "tube", key: "flux", default: "1.0", doc: "tube flux Φ (the ramp, when enabled, overrides the flux over time)" },
    SchemaKey { section: "tube", key: "radius", default: "0", doc: "core radius a; 0 is the ideal line tube" },
    SchemaKey { section: "tube", key: "center_x", default: "0", doc: "tube axis position" },
    SchemaKey { section: "tube", key: "center_y", default: "0", doc: "" },
    SchemaKey { section: "ramp", key: "kind", default: "none", doc: "`none` (static tube), `linear`, or `smoothstep`" },
    SchemaKey { section: "ramp", key: "flux_from", default: "0.0", doc: "used when kind is not `none`" },
    SchemaKey { section: "ramp", key: "flux_to", default: "1.0", doc: "" },
    SchemaKey { section: "ramp", key: "duration", default: "1.0", doc: "" },
    SchemaKey { section: "initial", key: "charge", default: "1.0", doc: "charge and mass of the integrated particle" },
    SchemaKey { section: "initial", key: "mass", default: "1.0", doc: "" },
    SchemaKey { section: "initial", key: "position_x", default: "2.0", doc: "" },
    SchemaKey { section: "initial", key: "position_y", default: "-3.0", doc: "" },
    SchemaKey { section: "initial", key: "velocity_x", default: "0.0", doc: "" },
    SchemaKey { section: "initial", key: "velocity_y", default: "1.2", doc: "" },
    SchemaKey { section: "integration", key: "dt", default: "0.002", doc: "time step of the symmetric splitting (second order)" },
    SchemaKey { section: "integration", key: "total_time", default: "5.0", doc: "" },
    SchemaKey { section: "integration", key: "energy_drift_tolerance", default: "1e-6", doc: "relative energy-bookkeeping drift above which the run is rejected as unstable" },
];

fn run_trajectory(cfg: &Resolved, ctx: &RunContext) -> Result<Vec<Dataset>, RunError> {
    let geometry = tube_from(cfg)?;
    let tube = match cfg.str("ramp", "kind") {
        "none" => RampedTube::static_tube(geometry),
        _ => RampedTube::ramped(geometry, ramp_from(cfg)?).map_err(physics("flux ramp"))?,
    };
    let initial = ChargeState::new(
        cfg.f64("initial", "charge")?,
        cfg.f64("initial", "mass")?,
        Vec2::new(cfg.f64("initial", "position_x")?, cfg.f64("initial", "position_y")?),
        Vec2::new(cfg.f64("initial", "velocity_x")?, cfg.f64("initial", "velocity_y")?),
    )
    .map_err(physics("initial state"))?;
    let dynamics = DynamicsConfig {
        dt: cfg.f64("integration", "dt")?,
        total_time: cfg.f64("integration", "total_time")?,
        order: 2,
        energy_drift_tolerance: cfg.f64("integration", "energy_drift_tolerance")?,
    };
    let result = integrate_trajectory(&initial, &tube, &dynamics, &ctx.units)
        .map_err(physics("trajectory integration"))?;
    let v0 = initial.velocity;
    let v1 = result.trajectory.end().velocity;
    let deflection = v0.cross(v1).atan2(v0.dot(v1));
    let note = format!(
        "{} samples; energy drift {:e}, rotation speed error {:e}, net velocity deflection {:e} rad",
        result.trajectory.samples().len(),
        result.energy_drift,
        result.max_rotation_speed_error,
        deflection,
    );
    Ok(vec![Dataset { filename: "trajectory.dsv", contents: result.trajectory.to_dsv(), note }])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_six_experiments() {
        let names: Vec<_> = EXPERIMENTS.iter().map(|e| e.name).collect();
        assert_eq!(
            names,
            [
                "loopless-fringe",
                "andreev-sweep",
                "gauge-audit",
                "lagrangian-identity",
                "conservation-suite",
                "trajectory"
            ]
        );
    }

    #[test]
    fn schemas_have_no_duplicate_slots() {
        for exp in EXPERIMENTS {
            let schema = exp.schema();
            for (i, a) in schema.iter().enumerate() {
                for b in &schema[i + 1..] {
                    assert!(
                        !(a.section == b.section && a.key == b.key),
                        "{}: duplicate schema slot {}.{}",
                        exp.name,
                        a.section,
                        a.key
                    );
                }
            }
        }
    }

    #[test]
    fn every_default_parses_under_its_own_schema() {
        for exp in EXPERIMENTS {
            let schema = exp.schema();
            let template = crate::config::render_template(&schema);
            let resolved = crate::config::parse(&template)
                .and_then(|raw| raw.resolve(&schema))
                .unwrap_or_else(|e| panic!("{}: template fails to parse: {e}", exp.name));
            assert_eq!(resolved.str("experiment", "name"), exp.name);
        }
    }
}
