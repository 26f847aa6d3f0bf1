//! Secure beamforming and ergodic secrecy rate analysis for a two-hop
//! amplify-and-forward relay link overheard by an eavesdropper, where a
//! multi-antenna source also powers a wireless jammer.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: scaled exponential integral, the single Meijer-G case the
//!   closed forms need, and slow quadrature oracles for both.
//! - [`channel`]: seeded Rayleigh block-fading draws.
//! - [`model`]: system parameters, link constants and per-realization SNRs.
//! - [`beamforming`]: IB/EB/combined beamformers and the closed-form mixing
//!   coefficient, plus brute-force search oracles.
//! - [`esr`]: closed-form ergodic secrecy rate lower bound.
//! - [`montecarlo`]: reproducible, parallel Monte Carlo estimation.
//! - [`cli`]: experiment scenarios, sweeps, CSV/SVG output and the
//!   validation report.

pub mod beamforming;
pub mod channel;
pub mod cli;
pub mod esr;
mod error;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};
