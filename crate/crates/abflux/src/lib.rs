//! Confined-flux interferometry in two theories of the electromagnetic
//! coupling.
//!
//! A charge moving outside an ideal (or finite-radius) flux tube feels no
//! local force, yet interference fringes shift with the enclosed flux Φ.
//! This crate computes that shift two ways and checks that they agree:
//!
//! * **potential coupling** — the interaction term (q/c) ṙ·A, which makes
//!   the phase a line integral of the vector potential and is gauge
//!   covariant only as a closed-loop statement;
//! * **field interaction** — the manifestly local pairing of the charge's
//!   own Coulomb field with the tube's fields, L = ṙ·Π_q − U_q with
//!   Π_q = (1/4πc) ∫ E_q × B d³r′, which assigns a gauge-independent
//!   phase to *open* paths and attributes the shift to momentum stored in
//!   the overlap of the two fields.
//!
//! The two Lagrangians differ by a total time derivative dF/dt with
//! F = (1/4πc) ∫ E_q·A d³r′, so closed-loop phases always agree at
//! qΦ/ħc per winding; the open-path machinery, fringe synthesis,
//! subgap-transport interferometer, and dynamical conservation checks all
//! live in the modules below.

pub mod dynamics;
pub mod em_fields;
pub mod error;
pub mod expr;
pub mod field_interaction;
pub mod fitting;
pub mod geom;
pub mod interferometers;
pub mod phase_engine;
pub mod quadrature;
pub mod rng;
pub mod trajectories;
pub mod units;

pub use error::{Error, Result};
pub use geom::{Vec2, Vec3};
pub use units::Units;
