//! Time-stamped planar paths: construction, composition, and the angular
//! bookkeeping that open-path phases depend on.
//!
//! Interference phases only ever see the geometry (they are line
//! integrals), but the dynamical checks need velocities and time stamps,
//! so a trajectory stores full kinematic samples. The one quantity with
//! physics in it is [`Trajectory::subtended_angle`]: the continuous polar
//! angle swept about a reference point, accumulated exactly segment by
//! segment, which for a closed loop is 2π times the winding number.

use crate::error::{Error, Result};
use crate::geom::{polyline_is_closed, segment_angle, Vec2};

use std::f64::consts::TAU;

/// One kinematic sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub position: Vec2,
    pub velocity: Vec2,
}

/// A piecewise-linear path through time-stamped samples.
///
/// Invariants: at least two samples, strictly increasing time stamps,
/// every coordinate finite.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<Sample>,
    label: String,
}

/// Labels are provenance, not geometry: equality compares samples only.
impl PartialEq for Trajectory {
    fn eq(&self, other: &Self) -> bool {
        self.samples == other.samples
    }
}

impl Trajectory {
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DegenerateGeometry(
                "a trajectory needs at least two samples".into(),
            ));
        }
        for pair in samples.windows(2) {
            if !(pair[1].t > pair[0].t) {
                return Err(Error::InvalidParameter(format!(
                    "time stamps must increase strictly: {} then {}",
                    pair[0].t, pair[1].t
                )));
            }
        }
        if !samples
            .iter()
            .all(|s| s.t.is_finite() && s.position.is_finite() && s.velocity.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite trajectory sample".into()));
        }
        Ok(Self { samples, label: "sampled".into() })
    }

    /// Uniform motion from `from` to `to` at the given speed.
    pub fn straight(from: Vec2, to: Vec2, speed: f64, n: usize) -> Result<Self> {
        let dist = from.dist(to);
        if dist == 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "straight path endpoints coincide at {from}"
            )));
        }
        if !(speed > 0.0 && speed.is_finite()) || n < 2 {
            return Err(Error::InvalidParameter(
                "straight path needs speed > 0 and at least two samples".into(),
            ));
        }
        let duration = dist / speed;
        let v = (to - from) / duration;
        let samples = (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                Sample { t: f * duration, position: from + f * (to - from), velocity: v }
            })
            .collect();
        let mut tr = Self::from_samples(samples)?;
        tr.label = format!("straight {from}→{to}");
        Ok(tr)
    }

    /// Uniform circular motion about `center` from polar angle
    /// `theta_start` to `theta_end` (signed; more than 2π apart means
    /// multiple windings).
    ///
    /// When the sweep is a whole number of turns the final sample is
    /// pinned to the first bitwise, so full circles close exactly.
    pub fn arc(
        center: Vec2,
        radius: f64,
        theta_start: f64,
        theta_end: f64,
        speed: f64,
        n: usize,
    ) -> Result<Self> {
        let sweep = theta_end - theta_start;
        if !(radius > 0.0) || !(speed > 0.0 && speed.is_finite()) || n < 2 || sweep == 0.0 {
            return Err(Error::InvalidParameter(
                "arc needs radius > 0, speed > 0, a nonzero sweep, and at least two samples"
                    .into(),
            ));
        }
        let duration = sweep.abs() * radius / speed;
        let omega = sweep / duration;
        let at = |theta: f64| center + radius * Vec2::new(theta.cos(), theta.sin());
        let vel = |theta: f64| radius * omega * Vec2::new(-theta.sin(), theta.cos());
        let mut samples: Vec<Sample> = (0..n)
            .map(|k| {
                let f = k as f64 / (n - 1) as f64;
                let theta = theta_start + f * sweep;
                Sample { t: f * duration, position: at(theta), velocity: vel(theta) }
            })
            .collect();
        let turns = sweep / TAU;
        if turns.round() != 0.0 && (turns - turns.round()).abs() < 1e-12 {
            let first = samples[0];
            let last = samples.last_mut().unwrap();
            last.position = first.position;
            last.velocity = first.velocity;
        }
        let mut tr = Self::from_samples(samples)?;
        tr.label = format!("arc about {center} r={radius} θ={theta_start}→{theta_end}");
        Ok(tr)
    }

    /// Sample an analytic motion t ↦ (position, velocity) on [t0, t1].
    pub fn from_fn(
        t0: f64,
        t1: f64,
        n: usize,
        f: impl Fn(f64) -> (Vec2, Vec2),
    ) -> Result<Self> {
        if !(t1 > t0) || n < 2 {
            return Err(Error::InvalidParameter(
                "sampling needs t1 > t0 and at least two samples".into(),
            ));
        }
        let samples = (0..n)
            .map(|k| {
                let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
                let (position, velocity) = f(t);
                Sample { t, position, velocity }
            })
            .collect();
        Self::from_samples(samples)
    }

    /// Constructor provenance, carried into phase results.
    #[must_use]
    pub fn label(&self) -> &str {
        &self.label
    }

    #[must_use]
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[must_use]
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    #[must_use]
    pub fn positions(&self) -> Vec<Vec2> {
        self.samples.iter().map(|s| s.position).collect()
    }

    #[must_use]
    pub fn start(&self) -> Sample {
        self.samples[0]
    }

    #[must_use]
    pub fn end(&self) -> Sample {
        *self.samples.last().unwrap()
    }

    #[must_use]
    pub fn duration(&self) -> f64 {
        self.end().t - self.start().t
    }

    #[must_use]
    pub fn is_closed(&self) -> bool {
        polyline_is_closed(&self.positions())
    }

    /// The same path re-sampled on a uniform time grid by linear
    /// interpolation; the endpoints are kept bitwise.
    pub fn resampled(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "resampling needs at least two samples".into(),
            ));
        }
        let (t0, t1) = (self.start().t, self.end().t);
        let mut cursor = 0;
        let samples = (0..n)
            .map(|k| {
                if k == 0 {
                    return self.samples[0];
                }
                if k == n - 1 {
                    return *self.samples.last().unwrap();
                }
                let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
                while self.samples[cursor + 1].t < t {
                    cursor += 1;
                }
                let (a, b) = (self.samples[cursor], self.samples[cursor + 1]);
                let f = (t - a.t) / (b.t - a.t);
                Sample {
                    t,
                    position: a.position + f * (b.position - a.position),
                    velocity: a.velocity + f * (b.velocity - a.velocity),
                }
            })
            .collect();
        let mut tr = Self::from_samples(samples)?;
        tr.label = self.label.clone();
        Ok(tr)
    }

    /// This path continued by `next`, whose clock is shifted to start
    /// where this one ends. The positions must meet.
    pub fn then(&self, next: &Trajectory) -> Result<Self> {
        let here = self.end();
        let there = next.start();
        let scale = 1.0 + here.position.norm().max(there.position.norm());
        if here.position.dist(there.position) > 1e-9 * scale {
            return Err(Error::DegenerateGeometry(format!(
                "paths do not meet: {} vs {}",
                here.position, there.position
            )));
        }
        let shift = here.t - there.t;
        let mut samples = self.samples.clone();
        samples.extend(next.samples.iter().skip(1).map(|s| Sample {
            t: s.t + shift,
            position: s.position,
            velocity: s.velocity,
        }));
        let mut tr = Self::from_samples(samples)?;
        tr.label = format!("{} then {}", self.label, next.label);
        Ok(tr)
    }

    /// The same geometric path walked backwards over the same time span.
    #[must_use]
    pub fn reversed(&self) -> Self {
        let (t0, t1) = (self.start().t, self.end().t);
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| Sample {
                t: t0 + (t1 - s.t),
                position: s.position,
                velocity: -s.velocity,
            })
            .collect();
        Self { samples, label: format!("{} reversed", self.label) }
    }

    /// Continuous polar angle swept about `about`, summed exactly over
    /// the straight segments. Any segment through `about` is rejected.
    pub fn subtended_angle(&self, about: Vec2) -> Result<f64> {
        let mut total = 0.0;
        for (i, w) in self.samples.windows(2).enumerate() {
            total += segment_angle(about, w[0].position, w[1].position).map_err(|e| match e {
                Error::PathThroughPoint { .. } => Error::PathThroughPoint { index: i },
                other => other,
            })?;
        }
        Ok(total)
    }

    /// Winding number of a closed loop about `about`.
    pub fn winding_number(&self, about: Vec2) -> Result<i64> {
        if !self.is_closed() {
            return Err(Error::OpenLoop(
                "winding number is defined only for closed trajectories".into(),
            ));
        }
        let turns = self.subtended_angle(about)? / TAU;
        let rounded = turns.round();
        if (turns - rounded).abs() > 1e-6 {
            return Err(Error::DegenerateGeometry(format!(
                "swept angle {turns} turns is not an integer for a closed loop"
            )));
        }
        Ok(rounded as i64)
    }

    /// Tab-separated `t x y vx vy` rows. Floats are printed shortest-
    /// round-trip, so [`Trajectory::from_dsv`] recovers them bitwise.
    #[must_use]
    pub fn to_dsv(&self) -> String {
        let mut out = String::from("# t\tx\ty\tvx\tvy\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                s.t, s.position.x, s.position.y, s.velocity.x, s.velocity.y
            ));
        }
        out
    }

    pub fn from_dsv(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!(
                            "line {}: `{f}` is not a number",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() != 5 {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected 5 columns (t x y vx vy), got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            samples.push(Sample {
                t: fields[0],
                position: Vec2::new(fields[1], fields[2]),
                velocity: Vec2::new(fields[3], fields[4]),
            });
        }
        let mut tr = Self::from_samples(samples)?;
        tr.label = "imported".into();
        Ok(tr)
    }
}

/// The loopless interferometer geometry: two coherent sources firing
/// straight rays at one screen point, the flux tube off both rays.
///
/// `delta_theta` is θ₁ − θ₂, the signed angle the open wedge
/// source₁ → screen → source₂ sweeps about the tube. When the tube sits
/// inside the triangle the wedge is nearly a full turn; far from both
/// rays it shrinks to zero. It is what the open-path interference phase
/// is proportional to.
#[derive(Debug, Clone)]
pub struct TwoPathGeometry {
    pub path1: Trajectory,
    pub path2: Trajectory,
    pub delta_theta: f64,
}

/// Builds the two unit-speed rays and their swept-angle difference about
/// `tube_center`. A ray through the tube center is rejected.
pub fn two_path_geometry(
    source1: Vec2,
    source2: Vec2,
    screen_point: Vec2,
    tube_center: Vec2,
    samples_per_path: usize,
) -> Result<TwoPathGeometry> {
    let ray = |s: Vec2, name: &str| -> Result<(Trajectory, f64)> {
        if s.dist(screen_point) == 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "{name} coincides with the screen point {screen_point}"
            )));
        }
        let path = Trajectory::straight(s, screen_point, 1.0, samples_per_path)?;
        let theta = path.subtended_angle(tube_center).map_err(|_| {
            Error::DegenerateGeometry(format!(
                "the ray from {name} at {s} passes through the tube center {tube_center}"
            ))
        })?;
        Ok((path, theta))
    };
    let (path1, theta1) = ray(source1, "source 1")?;
    let (path2, theta2) = ray(source2, "source 2")?;
    Ok(TwoPathGeometry { path1, path2, delta_theta: theta1 - theta2 })
}
