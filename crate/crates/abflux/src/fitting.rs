//! Least-squares sinusoid fitting for fringe datasets:
//! y(x) = c₀ + a·cos(ωx) + b·sin(ωx).
//!
//! The linear coefficients are easy; the frequency is not (the loss is
//! riddled with local minima). The fit therefore scans an ω grid fine
//! enough to resolve the spectral peak — solving the 3×3 linear problem
//! exactly at each candidate — refines the best grid point parabolically,
//! and polishes all four parameters with damped Gauss–Newton. Standard
//! errors come from the usual (JᵀJ)⁻¹ curvature estimate with the noise
//! variance taken from the fit residuals.

use crate::error::{Error, Result};

use std::f64::consts::TAU;

/// Fitted parameters of y = c₀ + a·cos(ωx) + b·sin(ωx), with standard
/// errors from the residual-scaled curvature.
#[derive(Debug, Clone, Copy)]
pub struct SinusoidFit {
    pub offset: f64,
    pub cos_coeff: f64,
    pub sin_coeff: f64,
    pub omega: f64,
    pub se_offset: f64,
    pub se_cos: f64,
    pub se_sin: f64,
    pub se_omega: f64,
    /// Root-mean-square misfit of the final model.
    pub residual_rms: f64,
}

impl SinusoidFit {
    #[must_use]
    pub fn amplitude(&self) -> f64 {
        self.cos_coeff.hypot(self.sin_coeff)
    }

    #[must_use]
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// ψ in the equivalent form c₀ + A·cos(ωx − ψ).
    #[must_use]
    pub fn phase(&self) -> f64 {
        self.sin_coeff.atan2(self.cos_coeff)
    }
}

/// Solves M·x = rhs by Gaussian elimination with partial pivoting.
fn solve<const N: usize>(mut m: [[f64; N]; N], mut rhs: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; N];
    for col in (0..N).rev() {
        let mut s = rhs[col];
        for k in col + 1..N {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// Best (c₀, a, b) for a fixed ω, and the summed squared misfit.
fn linear_fit(xs: &[f64], ys: &[f64], omega: f64) -> Option<([f64; 3], f64)> {
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let basis = [1.0, (omega * x).cos(), (omega * x).sin()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }
    let p = solve(m, rhs)?;
    let mut sse = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - p[0] - p[1] * (omega * x).cos() - p[2] * (omega * x).sin();
        sse += r * r;
    }
    Some((p, sse))
}

fn model_sse(xs: &[f64], ys: &[f64], p: &[f64; 4]) -> f64 {
    let mut sse = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - p[0] - p[1] * (p[3] * x).cos() - p[2] * (p[3] * x).sin();
        sse += r * r;
    }
    sse
}

/// Fits y = c₀ + a·cos(ωx) + b·sin(ωx) to the samples.
///
/// Needs at least five points, a positive abscissa span, and an actual
/// oscillation to lock onto; a flat signal leaves ω unidentifiable and is
/// rejected rather than assigned an arbitrary frequency.
pub fn fit_sinusoid(xs: &[f64], ys: &[f64]) -> Result<SinusoidFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "abscissa and ordinate lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 5 {
        return Err(Error::InvalidParameter(
            "a four-parameter sinusoid fit needs at least five points".into(),
        ));
    }
    if !xs.iter().chain(ys).all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample in fit input".into()));
    }
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    let span = xmax - xmin;
    if !(span > 0.0) {
        return Err(Error::InvalidParameter("zero abscissa span".into()));
    }
    let mut gaps: Vec<f64> = {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > 0.0).collect()
    };
    gaps.sort_by(f64::total_cmp);
    let min_gap = *gaps.first().ok_or_else(|| {
        Error::InvalidParameter("all abscissa values coincide".into())
    })?;

    // Scan: resolve the spectral peak (width ~ 2π/span) with margin, from
    // a quarter cycle over the window up to just under the Nyquist limit.
    let omega_lo = 0.25 * TAU / span;
    let omega_hi = 0.45 * TAU / min_gap;
    let step = TAU / (8.0 * span);
    let mut best: Option<(f64, [f64; 3], f64)> = None;
    let mut omega = omega_lo;
    while omega <= omega_hi {
        if let Some((p, sse)) = linear_fit(xs, ys, omega) {
            if best.as_ref().is_none_or(|(_, _, b)| sse < *b) {
                best = Some((omega, p, sse));
            }
        }
        omega += step;
    }
    let (mut omega, lin, sse0) = best.ok_or_else(|| {
        Error::InvalidParameter("sinusoid scan found no solvable frequency".into())
    })?;
    let y_scale = ys.iter().fold(0.0f64, |m, &y| m.max(y.abs())).max(1e-300);
    if lin[1].hypot(lin[2]) < 1e-9 * y_scale {
        return Err(Error::InvalidParameter(
            "signal shows no oscillation; the frequency is unidentifiable".into(),
        ));
    }

    // Parabolic touch-up between grid neighbours.
    if let (Some((_, s_lo)), Some((_, s_hi))) = (
        linear_fit(xs, ys, omega - step),
        linear_fit(xs, ys, omega + step),
    ) {
        let denom = s_lo - 2.0 * sse0 + s_hi;
        if denom > 0.0 {
            let shift = 0.5 * (s_lo - s_hi) / denom;
            if shift.abs() <= 1.0 {
                omega += shift * step;
            }
        }
    }

    // Damped Gauss–Newton on all four parameters.
    let mut p = [lin[0], lin[1], lin[2], omega];
    if let Some((l, _)) = linear_fit(xs, ys, omega) {
        p = [l[0], l[1], l[2], omega];
    }
    let mut sse = model_sse(xs, ys, &p);
    for _ in 0..60 {
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&x, &y) in xs.iter().zip(ys) {
            let (s, c) = (p[3] * x).sin_cos();
            let j = [1.0, c, s, x * (-p[1] * s + p[2] * c)];
            let r = y - p[0] - p[1] * c - p[2] * s;
            for i in 0..4 {
                for k in 0..4 {
                    jtj[i][k] += j[i] * j[k];
                }
                jtr[i] += j[i] * r;
            }
        }
        let Some(delta) = solve(jtj, jtr) else { break };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial = [
                p[0] + scale * delta[0],
                p[1] + scale * delta[1],
                p[2] + scale * delta[2],
                p[3] + scale * delta[3],
            ];
            let trial_sse = model_sse(xs, ys, &trial);
            if trial_sse <= sse {
                let rel_drop = (sse - trial_sse) / sse.max(1e-300);
                p = trial;
                sse = trial_sse;
                accepted = true;
                if rel_drop < 1e-14 {
                    scale = 0.0; // converged
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted || scale == 0.0 {
            break;
        }
    }

    // Curvature-based uncertainties, noise level from the residuals.
    let mut jtj = [[0.0; 4]; 4];
    for &x in xs {
        let (s, c) = (p[3] * x).sin_cos();
        let j = [1.0, c, s, x * (-p[1] * s + p[2] * c)];
        for i in 0..4 {
            for k in 0..4 {
                jtj[i][k] += j[i] * j[k];
            }
        }
    }
    let dof = (n - 4).max(1) as f64;
    let noise_var = sse / dof;
    let mut ses = [0.0; 4];
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let col = solve(jtj, e).ok_or_else(|| {
            Error::InvalidParameter("fit curvature is singular; parameters are degenerate".into())
        })?;
        ses[i] = (noise_var * col[i]).max(0.0).sqrt();
    }
    Ok(SinusoidFit {
        offset: p[0],
        cos_coeff: p[1],
        sin_coeff: p[2],
        omega: p[3],
        se_offset: ses[0],
        se_cos: ses[1],
        se_sin: ses[2],
        se_omega: ses[3],
        residual_rms: (sse / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn grid(n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn clean_sinusoid_is_recovered_to_machine_precision() {
        let xs = grid(200, 9.0);
        let (c0, a, b, w) = (0.7, 1.3, -0.4, 2.7);
        let ys: Vec<f64> = xs.iter().map(|&x| c0 + a * (w * x).cos() + b * (w * x).sin()).collect();
        let fit = fit_sinusoid(&xs, &ys).unwrap();
        assert_relative_eq!(fit.omega, w, max_relative = 1e-10);
        assert_relative_eq!(fit.offset, c0, max_relative = 1e-9);
        assert_relative_eq!(fit.cos_coeff, a, max_relative = 1e-9);
        assert_relative_eq!(fit.sin_coeff, b, max_relative = 1e-9);
        assert!(fit.residual_rms < 1e-10);
        assert_relative_eq!(fit.amplitude(), a.hypot(b), max_relative = 1e-9);
        assert_relative_eq!(fit.period(), TAU / w, max_relative = 1e-10);
        assert_relative_eq!(fit.phase(), b.atan2(a), max_relative = 1e-8);
    }

    #[test]
    fn noisy_sinusoid_lands_within_quoted_uncertainty() {
        let xs = grid(400, 12.0);
        let (c0, a, b, w) = (2.0, 0.9, 0.5, 3.1);
        let sigma = 0.1;
        let mut rng = Rng::new(0x5eed);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| c0 + a * (w * x).cos() + b * (w * x).sin() + sigma * rng.normal())
            .collect();
        let fit = fit_sinusoid(&xs, &ys).unwrap();
        assert!(
            (fit.omega - w).abs() < 3.0 * fit.se_omega,
            "omega {} ± {} vs true {w}",
            fit.omega,
            fit.se_omega
        );
        assert!((fit.offset - c0).abs() < 4.0 * fit.se_offset);
        assert_relative_eq!(fit.residual_rms, sigma, max_relative = 0.15);
        assert!(fit.se_omega > 0.0);
    }

    #[test]
    fn slowly_beating_frequencies_are_separated() {
        // Two nearby candidate frequencies: the scan must pick the right
        // basin before polishing (a wrong basin would be off by ≫ se).
        let xs = grid(600, 40.0);
        let w = 1.45;
        let ys: Vec<f64> = xs.iter().map(|&x| (w * x).sin()).collect();
        let fit = fit_sinusoid(&xs, &ys).unwrap();
        assert_relative_eq!(fit.omega, w, max_relative = 1e-9);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let xs = grid(50, 5.0);
        let flat: Vec<f64> = xs.iter().map(|_| 3.25).collect();
        assert!(fit_sinusoid(&xs, &flat).is_err());
        let ys: Vec<f64> = xs.iter().map(|&x| x.sin()).collect();
        assert!(fit_sinusoid(&xs[..4], &ys[..4]).is_err());
        assert!(fit_sinusoid(&xs, &ys[..30]).is_err());
        let same_x = vec![1.0; 50];
        assert!(fit_sinusoid(&same_x, &ys).is_err());
        let mut bad = ys.clone();
        bad[7] = f64::NAN;
        assert!(fit_sinusoid(&xs, &bad).is_err());
    }

    #[test]
    fn linear_solver_handles_pivoting() {
        // First pivot is zero: elimination must row-swap to survive.
        let m = [[0.0, 2.0, 1.0], [1.0, 0.0, -1.0], [3.0, 1.0, 2.0]];
        let x = solve(m, [7.0, -1.0, 10.0]).unwrap();
        for (row, rhs) in m.iter().zip([7.0, -1.0, 10.0]) {
            let lhs: f64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        let singular = [[1.0, 2.0], [2.0, 4.0]];
        assert!(solve(singular, [1.0, 2.0]).is_none());
    }
}
