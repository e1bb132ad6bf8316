//! Reynolds-averaged turbulent channel flow.
//!
//! The mean streamwise velocity of a pressure-driven, horizontally periodic
//! channel flow is a memory convolution of the pressure-drop history against a
//! sine-series heat kernel. This crate evaluates that kernel and its
//! identities, computes mean profiles from pressure histories (with an
//! independent mode-wise time stepper as a cross-check), bounds the Reynolds
//! number by the pressure drop, and models wall roughness as a self-similar
//! cascade of rugosities whose averaged effect is the NS-alpha operator
//! `1 - alpha^2 d^2/dx3^2`.
//!
//! Modules:
//! - [`channel_model`]: geometry, profiles, sine spectra, stationary NSE / NS-alpha profiles
//! - [`kernel`]: the heat kernel `K(x, t; h)`
//! - [`averaging`]: plane averages, Duhamel mean velocity, spectral evolution, incompressibility
//! - [`bounds`]: Reynolds number and its pressure-drop bound, Poincare check
//! - [`roughness`]: rugosity cascade, wavenumber matching, emergent `alpha`

// `!(a < b)` is used on purpose so that NaN inputs fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod bounds;
pub mod channel_model;
pub mod error;
pub mod kernel;
pub mod numerics;
pub mod roughness;

pub use error::{Error, Result};
