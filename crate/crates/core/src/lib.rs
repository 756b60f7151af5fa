//! Closed-loop lateral path-tracking benchmark.
//!
//! A simulation framework for comparing lateral path-tracking controllers
//! (LQR, MFC, SAMFC, PID and NLMPC) on a nonlinear single-track plant.
//! Besides the plant and the controllers, the crate provides:
//!
//! * shared numerical kernels (RK4, discrete Riccati solver, discrete
//!   filters, STFT, seeded sampling) in [`numerics`],
//! * path construction and acceleration-limited speed planning plus a
//!   six-trajectory benchmark suite in [`trajectory`],
//! * accuracy/stability/comfort metrics (IAE, MLE, M_epsilon, M_zeta)
//!   in [`metrics`],
//! * the multi-objective tuning and Monte Carlo robustness methodology
//!   in [`tuning`].
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the
//! default `std` feature for embedded targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod controllers;
pub mod mat;
pub mod metrics;
pub mod numerics;
pub mod trajectory;
pub mod tuning;
pub mod vehicle;
