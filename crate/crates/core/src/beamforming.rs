//! Information, energy and combined beamformers, the closed-form mixing
//! coefficient, and brute-force search oracles for it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{complex_gaussian, ChannelRealization, SeedSpec};
use crate::model::{secrecy_capacity, snrs, LinkConstants, UNIT_NORM_TOLERANCE};
use crate::{Error, Result};

/// A unit-norm source beamformer, optionally tagged with the IB weight `t`
/// it was mixed from.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerWeights {
    w: Vec<Complex64>,
    t: Option<f64>,
}

impl BeamformerWeights {
    /// Wraps an arbitrary vector as-is; [`crate::model::snrs`] rejects it
    /// later if it is not unit-norm.
    pub fn from_raw(w: Vec<Complex64>) -> Self {
        Self { w, t: None }
    }

    /// Scales `w` to unit norm.
    pub fn normalized(mut w: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&w);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate("cannot normalise a zero or non-finite vector"));
        }
        w.iter_mut().for_each(|x| *x /= norm);
        Ok(Self { w, t: None })
    }

    pub fn w(&self) -> &[Complex64] {
        &self.w
    }

    pub fn t(&self) -> Option<f64> {
        self.t
    }

    pub fn norm(&self) -> f64 {
        norm(&self.w)
    }

    fn check_unit(&self, what: &str) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::Contract(format!("{what} has norm {n}, expected 1")));
        }
        Ok(())
    }
}

fn norm(w: &[Complex64]) -> f64 {
    w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Information beamforming: matched to the source-relay channel.
pub fn ib_vector(h_sr: &[Complex64]) -> Result<BeamformerWeights> {
    BeamformerWeights::normalized(h_sr.to_vec())
}

/// Energy beamforming: matched to the source-jammer channel.
pub fn eb_vector(h_sj: &[Complex64]) -> Result<BeamformerWeights> {
    BeamformerWeights::normalized(h_sj.to_vec())
}

/// Mixes `t w_I + sqrt(1 - t^2) w_E` and renormalises.
///
/// `w_I` and `w_E` are not orthogonal at finite `N`, so the raw mix is only
/// approximately unit-norm. The endpoints return exact copies of the
/// inputs.
pub fn combine(t: f64, w_i: &BeamformerWeights, w_e: &BeamformerWeights) -> Result<BeamformerWeights> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("mixing coefficient t", t));
    }
    if w_i.w.len() != w_e.w.len() {
        return Err(Error::Contract("IB and EB vectors differ in length".into()));
    }
    w_i.check_unit("IB vector")?;
    w_e.check_unit("EB vector")?;
    let w = if t == 1.0 {
        w_i.w.clone()
    } else if t == 0.0 {
        w_e.w.clone()
    } else {
        let s = (1.0 - t * t).sqrt();
        let mixed = w_i.w.iter().zip(&w_e.w).map(|(a, b)| a * t + b * s).collect();
        BeamformerWeights::normalized(mixed)?.w
    };
    Ok(BeamformerWeights { w, t: Some(t) })
}

/// Where the conditioning variables of the mixing rule come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiMode {
    /// Realized `gamma_RD`, `gamma_RE`, `X_JE` of the current block.
    Instantaneous,
    /// Their means `K2`, `K4`, `1`; yields one `t` for all blocks.
    Statistical,
}

/// `B0 = N (K1 gamma_RE/gamma_RD - K3 X_JE) / (K3 N X_JE + gamma_RE)`.
///
/// Mathematically `B0 >= -1`; the numerator and denominator share the
/// rounded jamming term so the bound also holds in floating point.
pub fn compute_b0(k: &LinkConstants, n_antennas: usize, gamma_rd: f64, gamma_re: f64, x_je: f64) -> Result<f64> {
    for (what, v) in [("gamma_rd", gamma_rd), ("gamma_re", gamma_re), ("x_je", x_je)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::domain(what, v));
        }
    }
    if gamma_rd == 0.0 {
        return Err(Error::Singular("gamma_rd = 0"));
    }
    let n = n_antennas as f64;
    let jam = k.k3 * n * x_je;
    let denominator = jam + gamma_re;
    if denominator <= 0.0 {
        return Err(Error::Singular("gamma_re = 0 and x_je = 0"));
    }
    let b0 = (n * k.k1 * gamma_re / gamma_rd - jam) / denominator;
    if b0 < -1.0 || b0.is_nan() {
        return Err(Error::Contract(format!("B0 = {b0} below -1")));
    }
    Ok(b0)
}

/// Roots `(y1, y2)` of `B0 y^2 + 2y - 1 = 0`; `None` when `B0 = 0` and the
/// equation is linear.
pub fn quadratic_roots(b0: f64) -> Option<(f64, f64)> {
    if b0 == 0.0 {
        return None;
    }
    let r = (1.0 + b0).sqrt();
    Some(((-1.0 - r) / b0, 1.0 / (1.0 + r)))
}

/// Near-optimal IB weight `t = sqrt(y2)`.
///
/// `y2 = (-1 + sqrt(1 + B0)) / B0` is evaluated as `1 / (1 + sqrt(1 + B0))`,
/// which is exact at `B0 = 0` (`t = 1/sqrt 2`) and `B0 = -1` (`t = 1`).
pub fn optimal_t(b0: f64) -> Result<f64> {
    if !(b0 >= -1.0) {
        return Err(Error::domain("B0", b0));
    }
    Ok((1.0 / (1.0 + (1.0 + b0).sqrt())).sqrt())
}

/// Conditioning state of the asymptotic objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticState {
    pub b0: f64,
    pub gamma_rd: f64,
    pub gamma_re: f64,
    pub x_je: f64,
}

impl AsymptoticState {
    pub fn new(k: &LinkConstants, n_antennas: usize, gamma_rd: f64, gamma_re: f64, x_je: f64) -> Result<Self> {
        let b0 = compute_b0(k, n_antennas, gamma_rd, gamma_re, x_je)?;
        Ok(Self {
            b0,
            gamma_rd,
            gamma_re,
            x_je,
        })
    }

    pub fn from_realization(k: &LinkConstants, realization: &ChannelRealization, mode: CsiMode) -> Result<Self> {
        match mode {
            CsiMode::Instantaneous => Self::new(
                k,
                realization.n_antennas(),
                k.k2 * realization.x_rd(),
                k.k4 * realization.x_re(),
                realization.x_je(),
            ),
            CsiMode::Statistical => Self::statistical(k, realization.n_antennas()),
        }
    }

    /// Random variables replaced by their means.
    pub fn statistical(k: &LinkConstants, n_antennas: usize) -> Result<Self> {
        Self::new(k, n_antennas, k.k2, k.k4, 1.0)
    }
}

/// Treatment of the unit-mean cross gains `Z_SR = |h_SR^H w_E|^2` and
/// `Z_SJ = |h_SJ^H w_I|^2` in the approximate SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZTerms {
    /// Replaced by their unit mean.
    #[default]
    Mean,
    /// Dropped, as in the large-`N` limit the mixing rule is derived in.
    Ignored,
}

impl ZTerms {
    fn value(self) -> f64 {
        match self {
            ZTerms::Mean => 1.0,
            ZTerms::Ignored => 0.0,
        }
    }
}

/// Large-`N` approximations of the SNRs as functions of `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxSnrs {
    pub gamma_sr: f64,
    pub gamma_d: f64,
    pub gamma_je: f64,
    pub gamma_e: f64,
}

/// Approximate SNRs with the cross gains at their unit mean.
pub fn approx_snrs(t: f64, state: &AsymptoticState, k: &LinkConstants, n_antennas: usize) -> ApproxSnrs {
    approx_snrs_with(t, state, k, n_antennas, ZTerms::Mean)
}

pub fn approx_snrs_with(
    t: f64,
    state: &AsymptoticState,
    k: &LinkConstants,
    n_antennas: usize,
    z: ZTerms,
) -> ApproxSnrs {
    let n = n_antennas as f64;
    let t2 = t * t;
    let zv = z.value();
    let gamma_sr = k.k1 * (n * t2 + (1.0 - t2) * zv);
    let gamma_d = if gamma_sr + state.gamma_rd > 0.0 {
        gamma_sr * state.gamma_rd / (gamma_sr + state.gamma_rd)
    } else {
        0.0
    };
    let gamma_je = k.k3 * (n * (1.0 - t2) + t2 * zv) * state.x_je;
    ApproxSnrs {
        gamma_sr,
        gamma_d,
        gamma_je,
        gamma_e: gamma_sr.min(jamming_ratio(state.gamma_re, gamma_je)),
    }
}

// gamma_RE / gamma_JE, taking 0 when the eavesdropper link itself is silent
fn jamming_ratio(gamma_re: f64, gamma_je: f64) -> f64 {
    if gamma_re == 0.0 {
        0.0
    } else if gamma_je == 0.0 {
        f64::INFINITY
    } else {
        gamma_re / gamma_je
    }
}

/// `g2(t) = [1 + gamma_RE / gamma_JE(t)] / gamma_D(t)`; `+inf` where either
/// approximate SNR vanishes.
pub fn objective_g2(t: f64, state: &AsymptoticState, k: &LinkConstants, n_antennas: usize) -> f64 {
    objective_g2_with(t, state, k, n_antennas, ZTerms::Mean)
}

pub fn objective_g2_with(t: f64, state: &AsymptoticState, k: &LinkConstants, n_antennas: usize, z: ZTerms) -> f64 {
    let a = approx_snrs_with(t, state, k, n_antennas, z);
    if a.gamma_d <= 0.0 {
        return f64::INFINITY;
    }
    (1.0 + jamming_ratio(state.gamma_re, a.gamma_je)) / a.gamma_d
}

/// `C~(t) = 0.5 [log2 gamma_D(t) - log2(1 + gamma_E(t))]^+`, valid when
/// `gamma_D(t) >> 1`.
pub fn approx_secrecy_capacity(t: f64, state: &AsymptoticState, k: &LinkConstants, n_antennas: usize) -> f64 {
    let a = approx_snrs(t, state, k, n_antennas);
    if a.gamma_d <= 0.0 {
        return 0.0;
    }
    (0.5 * (a.gamma_d.log2() - a.gamma_e.ln_1p() / std::f64::consts::LN_2)).max(0.0)
}

/// Grid argmin of [`objective_g2`] over `[0, 1]`; ties go to the smaller `t`.
pub fn grid_search_t(state: &AsymptoticState, k: &LinkConstants, n_antennas: usize, grid_step: f64) -> Result<f64> {
    grid_search_t_with(state, k, n_antennas, grid_step, ZTerms::Mean)
}

pub fn grid_search_t_with(
    state: &AsymptoticState,
    k: &LinkConstants,
    n_antennas: usize,
    grid_step: f64,
    z: ZTerms,
) -> Result<f64> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::domain("grid_step", grid_step));
    }
    let points = (1.0 / grid_step).ceil() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=points {
        let t = (i as f64 * grid_step).min(1.0);
        let g = objective_g2_with(t, state, k, n_antennas, z);
        if g < best.0 {
            best = (g, t);
        }
    }
    Ok(best.1)
}

/// The mixing-rule beamformer for one realization.
pub fn proposed_beamformer(
    realization: &ChannelRealization,
    k: &LinkConstants,
    mode: CsiMode,
) -> Result<BeamformerWeights> {
    let state = AsymptoticState::from_realization(k, realization, mode)?;
    let t = optimal_t(state.b0)?;
    combine(t, &ib_vector(&realization.h_sr)?, &eb_vector(&realization.h_sj)?)
}

/// Outcome of a random search over the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSearch {
    pub best: BeamformerWeights,
    pub best_capacity: f64,
    /// Capacities of `w_I`, `w_E` and the mixing-rule beamformer.
    pub candidate_capacities: [f64; 3],
}

impl SphereSearch {
    /// Shortfall of the mixing-rule beamformer against the search optimum.
    pub fn proposed_gap(&self) -> f64 {
        self.best_capacity - self.candidate_capacities[2]
    }
}

/// Brute-force maximisation of the exact secrecy capacity over random unit
/// vectors, seeded with `w_I`, `w_E` and the mixing-rule beamformer.
///
/// Samples are evaluated in parallel; the maximum is resolved by capacity
/// and then by lowest sample index, so the result does not depend on
/// scheduling.
pub fn sphere_search_w(
    realization: &ChannelRealization,
    k: &LinkConstants,
    samples: usize,
    seed: u64,
) -> Result<SphereSearch> {
    let w_i = ib_vector(&realization.h_sr)?;
    let w_e = eb_vector(&realization.h_sj)?;
    let proposed = proposed_beamformer(realization, k, CsiMode::Instantaneous)?;
    let candidates = [w_i, w_e, proposed];
    let mut candidate_capacities = [0.0; 3];
    for (c, w) in candidate_capacities.iter_mut().zip(&candidates) {
        *c = secrecy_capacity(&snrs(realization, w, k)?);
    }

    let n = realization.n_antennas();
    let sample = |j: usize| -> BeamformerWeights {
        let mut rng = SeedSpec::new(seed, j as u64).rng();
        let raw = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
        BeamformerWeights::normalized(raw).expect("gaussian draw is non-zero")
    };
    let random_best = (0..samples)
        .into_par_iter()
        .map(|j| {
            let c = snrs(realization, &sample(j), k).map(|s| secrecy_capacity(&s)).unwrap_or(0.0);
            (c, j + candidates.len())
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );

    let mut best = (candidate_capacities[0], 0usize);
    for (i, &c) in candidate_capacities.iter().enumerate().skip(1) {
        if c > best.0 {
            best = (c, i);
        }
    }
    if random_best.0 > best.0 {
        best = random_best;
    }
    let weights = if best.1 < candidates.len() {
        candidates[best.1].clone()
    } else {
        sample(best.1 - candidates.len())
    };
    Ok(SphereSearch {
        best: weights,
        best_capacity: best.0,
        candidate_capacities,
    })
}
