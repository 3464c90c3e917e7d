//! Safe adaptive cruise control on a discrete speed ladder.
//!
//! A following vehicle picks among a finite set of cruising speeds, moving
//! one level at a time with constant-rate acceleration and braking. A level
//! is safe while the free distance ahead covers the braking distance to rest,
//! and the step up to the next level is only taken when the free distance
//! still covers that after the acceleration.
//!
//! - [`kinematics`]: braking and acceleration distances, the speed ladder.
//! - [`policy`]: safety predicate, maximal target speed, ideal control.
//! - [`controllers`]: synchronous, asynchronous and ideal controllers.
//! - [`simulator`]: closed-loop runs against a lead vehicle.
//! - [`experiment`]: scenario files, traces, sweeps and the reference experiment grid.

pub mod controllers;
pub mod experiment;
pub mod fmt;
pub mod kinematics;
pub mod policy;
pub mod simulator;
