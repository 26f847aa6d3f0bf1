//! Numerical self-checks run by `relay-secrecy validate`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::{
    grid_search_t_with, optimal_t, AsymptoticState, BeamformerWeights, ZTerms,
};
use crate::channel::{complex_gaussian, draw_realization, SeedSpec};
use crate::esr::{destination_terms, eavesdropper_terms, ecd_closed_form, esr_closed_form};
use crate::model::{link_constants, secrecy_capacity, snrs, LinkConstants, SnrSample, SystemParams};
use crate::montecarlo::{simulate_bound_components, simulate_ergodic, simulate_ergodic_with_workers, McEstimate, Scheme};
use crate::specfun::{
    exp_e1_scaled, expect_log1p_exponential_oracle, meijer_g_1323, PairBranch, QuadratureSpec,
};
use crate::{Error, Result};

use super::{dbm_to_watts, format_sig, Scenario};

/// Direction of the pass condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `measured <= tolerance`
    AtMost,
    /// `measured >= tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64, bound: Bound) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            bound,
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.measured <= self.tolerance,
            Bound::AtLeast => self.measured >= self.tolerance,
        }
    }

    pub fn summary(&self) -> String {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        format!(
            "{} {}: measured {} {} {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            format_sig(self.measured),
            op,
            format_sig(self.tolerance)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub n_trials: u64,
    pub seed: u64,
    /// Multiplies every relative tolerance; exact checks are unaffected.
    pub tolerance_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            n_trials: 100_000,
            seed: 1,
            tolerance_scale: 1.0,
        }
    }
}

impl ValidateOptions {
    fn check(&self) -> Result<()> {
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return Err(Error::Config {
                key: "tolerance_scale".into(),
                reason: format!("must be positive, got {}", self.tolerance_scale),
            });
        }
        if self.n_trials < 2 {
            return Err(Error::Config {
                key: "trials".into(),
                reason: "at least two trials are needed for a standard error".into(),
            });
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `fig3` geometry at source power `p_s_dbm`.
pub fn figure3_params(p_s_dbm: f64) -> SystemParams {
    SystemParams {
        p_s: dbm_to_watts(p_s_dbm),
        ..Scenario::Fig3.params()
    }
}

/// `e^x E1(x)` against quadrature, and the Meijer-G unit identity.
pub fn special_functions(opts: &ValidateOptions) -> Result<Vec<Check>> {
    let spec = QuadratureSpec::new(1e-13, 4000)?;
    let mut worst: f64 = 0.0;
    for x in log_grid(1e-6, 1e6, 50) {
        // E[ln(1 + cX)] = e^{1/c} E1(1/c)
        let oracle = expect_log1p_exponential_oracle(1.0 / x, &spec)?;
        worst = worst.max(rel(exp_e1_scaled(x)?, oracle));
    }
    Ok(vec![
        Check::new("exp_e1_scaled_vs_quadrature", worst, 1e-9 * opts.tolerance_scale, Bound::AtMost),
        Check::new(
            "meijer_g_at_one",
            (meijer_g_1323(1.0)? - 1.0).abs(),
            1e-8 * opts.tolerance_scale,
            Bound::AtMost,
        ),
    ])
}

/// Random asymptotic states around the `fig3` geometry: source power
/// uniform in [10, 40] dBm and exponential channel gains.
pub fn random_states(count: usize, n_antennas: usize, seed: u64) -> Result<Vec<(LinkConstants, AsymptoticState)>> {
    let mut rng = SeedSpec::new(seed, u64::MAX).rng();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut params = figure3_params(rng.random_range(10.0..40.0));
        params.n_antennas = n_antennas;
        let k = link_constants(&params)?;
        let mut exp = || -(1.0 - rng.random::<f64>()).ln();
        let (x_rd, x_re, x_je) = (exp(), exp(), exp());
        if x_rd == 0.0 {
            continue;
        }
        out.push((k, AsymptoticState::new(&k, n_antennas, k.k2 * x_rd, k.k4 * x_re, x_je)?));
    }
    Ok(out)
}

/// Closed-form mixing weight against a fine grid search of the objective
/// in its large-`N` form, plus the exact boundary values. The gap to the
/// grid with the cross gains held at their mean is reported as well.
pub fn optimizer(opts: &ValidateOptions) -> Result<Vec<Check>> {
    const N: usize = 300;
    const STEP: f64 = 1e-4;
    let states = random_states(1000, N, opts.seed)?;
    let mut agree = 0usize;
    let mut mean_mode_gap = Vec::with_capacity(states.len());
    for (k, state) in &states {
        let t_bar = optimal_t(state.b0)?;
        let grid = grid_search_t_with(state, k, N, STEP, ZTerms::Ignored)?;
        if (t_bar - grid).abs() <= STEP * (1.0 + 1e-9) {
            agree += 1;
        }
        mean_mode_gap.push((t_bar - grid_search_t_with(state, k, N, 1e-3, ZTerms::Mean)?).abs());
    }
    mean_mode_gap.sort_by(f64::total_cmp);
    let boundary = (optimal_t(0.0)? - std::f64::consts::FRAC_1_SQRT_2)
        .abs()
        .max((optimal_t(-1.0)? - 1.0).abs());
    Ok(vec![
        Check::new(
            "optimal_t_vs_grid_fraction",
            agree as f64 / states.len() as f64,
            1.0 - 0.005 * opts.tolerance_scale,
            Bound::AtLeast,
        ),
        Check::new("optimal_t_boundary_identities", boundary, 0.0, Bound::AtMost),
        Check::new(
            "optimal_t_vs_mean_cross_gain_grid_median_gap",
            mean_mode_gap[mean_mode_gap.len() / 2],
            0.05 * opts.tolerance_scale,
            Bound::AtMost,
        ),
    ])
}

/// General-branch evaluation at a relative separation of `1e-5` against
/// each coincident branch.
pub fn degenerate_continuity(opts: &ValidateOptions) -> Result<Vec<Check>> {
    const EPS: f64 = 1e-5;
    let (n, t) = (50usize, 0.3f64);
    let (nf, t2) = (n as f64, t * t);
    let k = |a, b, c, d| LinkConstants::new(a, b, c, d);
    let mut worst = [0.0f64; 3];
    let mut branches_ok = true;
    for scale in log_grid(1e-2, 1e3, 20) {
        // lambda_D = mu_D; at t = 0 these are K1 and K2
        let exact = destination_terms(0.0, &k(scale, scale, 1.0, 1.0)?, n)?;
        let split = destination_terms(0.0, &k(scale, scale * (1.0 + EPS), 1.0, 1.0)?, n)?;
        branches_ok &= exact.cd3_branch == PairBranch::Coincident && split.cd3_branch == PairBranch::General;
        worst[0] = worst[0].max(rel(split.cd3, exact.cd3));

        // K4 = mu_E
        let k3 = scale / (nf * (1.0 - t2) + t2);
        let exact = eavesdropper_terms(t, &k(10.0, 1.0, k3, scale)?, n)?;
        let split = eavesdropper_terms(t, &k(10.0, 1.0, k3, scale * (1.0 + EPS))?, n)?;
        branches_ok &= exact.ce1_branch == PairBranch::Coincident && split.ce1_branch == PairBranch::General;
        worst[1] = worst[1].max(rel(split.ce1, exact.ce1));

        // lambda_E = mu_E
        let k4 = scale * (1.0 + 10.0 * (nf * t2 + 1.0 - t2));
        let exact = eavesdropper_terms(t, &k(10.0, 1.0, k3, k4)?, n)?;
        let split = eavesdropper_terms(t, &k(10.0, 1.0, k3, k4 * (1.0 + EPS))?, n)?;
        branches_ok &= exact.ce2_branch == PairBranch::Coincident && split.ce2_branch == PairBranch::General;
        worst[2] = worst[2].max(rel(split.ce2, exact.ce2));
    }
    let tol = 1e-4 * opts.tolerance_scale;
    Ok(vec![
        Check::new("continuity_lambda_d_eq_mu_d", worst[0], tol, Bound::AtMost),
        Check::new("continuity_k4_eq_mu_e", worst[1], tol, Bound::AtMost),
        Check::new("continuity_lambda_e_eq_mu_e", worst[2], tol, Bound::AtMost),
        Check::new(
            "continuity_branch_selection",
            if branches_ok { 0.0 } else { 1.0 },
            0.0,
            Bound::AtMost,
        ),
    ])
}

/// Counts violations of the SNR-model invariants over `count` random
/// link tuples.
pub fn model_invariants(count: u64, seed: u64) -> Result<Vec<Check>> {
    let mut rng = SeedSpec::new(seed, u64::MAX - 1).rng();
    let k = link_constants(&Scenario::Fig3.params())?;
    let log_snr = |rng: &mut rand_chacha::ChaCha8Rng| 10f64.powf(rng.random_range(-6.0..6.0));
    let mut violations = [0u64; 4];
    for i in 0..count {
        let (sr, rd, je, re) = (log_snr(&mut rng), log_snr(&mut rng), log_snr(&mut rng), log_snr(&mut rng));
        let s = SnrSample::from_links(sr, rd, je, re)?;
        if !(s.gamma_d < s.gamma_d_ub) {
            violations[0] += 1;
        }
        if !(secrecy_capacity(&s) >= 0.0) {
            violations[1] += 1;
        }
        let factor = rng.random_range(1.0..100.0);
        if SnrSample::from_links(sr, rd, je * factor, re)?.gamma_e > s.gamma_e {
            violations[2] += 1;
        }

        let r = draw_realization(4, SeedSpec::new(seed, i))?;
        let w = BeamformerWeights::normalized((0..4).map(|_| complex_gaussian(&mut rng)).collect())?;
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let rotated = BeamformerWeights::from_raw(w.w().iter().map(|x| x * phase).collect());
        let (a, b) = (snrs(&r, &w, &k)?, snrs(&r, &rotated, &k)?);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300);
        if !(close(a.gamma_d, b.gamma_d) && close(a.gamma_e, b.gamma_e)) {
            violations[3] += 1;
        }
    }
    Ok([
        "invariant_destination_snr_below_bound",
        "invariant_secrecy_capacity_nonnegative",
        "invariant_eavesdropper_snr_monotone_in_jamming",
        "invariant_phase_rotation",
    ]
    .iter()
    .zip(violations)
    .map(|(name, v)| Check::new(*name, v as f64, 0.0, Bound::AtMost))
    .collect())
}

/// Closed-form destination term and lower-bound ordering in the `fig3` geometry,
/// `P_S = 30` dBm, `t = 0.35`. Also returns the simulated fixed-weight
/// estimate for reuse.
pub fn closed_form_vs_simulation(opts: &ValidateOptions) -> Result<(Vec<Check>, McEstimate)> {
    let params = figure3_params(30.0);
    let k = link_constants(&params)?;
    let t = 0.35;
    let bound = simulate_bound_components(&params, t, opts.n_trials, opts.seed)?;
    let fixed = simulate_ergodic(&params, Scheme::FixedT(t), opts.n_trials, opts.seed)?;
    let cf = esr_closed_form(t, &k, params.n_antennas)?;
    let ecd = ecd_closed_form(t, &k, params.n_antennas)?;
    Ok((
        vec![
            Check::new(
                "ecd_closed_form_vs_simulation",
                rel(ecd, bound.e_cd.mean),
                0.03 * opts.tolerance_scale,
                Bound::AtMost,
            ),
            Check::new(
                "esr_closed_form_below_simulation",
                cf.esr - (fixed.mean + 2.0 * fixed.std_error),
                0.0,
                Bound::AtMost,
            ),
        ],
        fixed,
    ))
}

/// Proposed scheme against each baseline at 20, 30 and 40 dBm, and the
/// fixed weight against the proposed scheme at 30 dBm.
pub fn scheme_ordering(opts: &ValidateOptions, fixed_at_30: Option<McEstimate>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for p_s_dbm in [20.0, 30.0, 40.0] {
        let params = figure3_params(p_s_dbm);
        let proposed = simulate_ergodic(&params, Scheme::ProposedAdaptive, opts.n_trials, opts.seed)?;
        let mut margin = f64::INFINITY;
        for baseline in [Scheme::EnergyBeamforming, Scheme::InformationBeamforming, Scheme::NoJammer] {
            let b = simulate_ergodic(&params, baseline, opts.n_trials, opts.seed)?;
            let combined = proposed.std_error.hypot(b.std_error);
            margin = margin.min(proposed.mean - b.mean + 2.0 * combined);
        }
        checks.push(Check::new(
            format!("proposed_beats_baselines_p_s_{p_s_dbm}dbm"),
            margin,
            0.0,
            Bound::AtLeast,
        ));
        if p_s_dbm == 30.0 {
            let fixed = match fixed_at_30 {
                Some(f) => f,
                None => simulate_ergodic(&params, Scheme::FixedT(0.35), opts.n_trials, opts.seed)?,
            };
            checks.push(Check::new(
                "fixed_t_0.35_vs_proposed",
                rel(fixed.mean, proposed.mean),
                0.03 * opts.tolerance_scale,
                Bound::AtMost,
            ));
        }
    }
    Ok(checks)
}

/// Bit-identical estimates for 1, 4 and 16 workers.
pub fn determinism(opts: &ValidateOptions) -> Result<Vec<Check>> {
    let params = figure3_params(30.0);
    let n = opts.n_trials.min(20_000);
    let reference = simulate_ergodic_with_workers(&params, Scheme::ProposedAdaptive, n, opts.seed, Some(1))?;
    let mut mismatches = 0;
    for workers in [4, 16] {
        let e = simulate_ergodic_with_workers(&params, Scheme::ProposedAdaptive, n, opts.seed, Some(workers))?;
        if e.mean.to_bits() != reference.mean.to_bits() || e.std_error.to_bits() != reference.std_error.to_bits() {
            mismatches += 1;
        }
    }
    Ok(vec![Check::new("determinism_across_workers", mismatches as f64, 0.0, Bound::AtMost)])
}

/// Every check, fastest first.
pub fn run_all(opts: &ValidateOptions) -> Result<Vec<Check>> {
    opts.check()?;
    let mut checks = special_functions(opts)?;
    checks.extend(optimizer(opts)?);
    checks.extend(degenerate_continuity(opts)?);
    checks.extend(model_invariants(100_000, opts.seed)?);
    checks.extend(determinism(opts)?);
    let (cf, fixed) = closed_form_vs_simulation(opts)?;
    checks.extend(cf);
    checks.extend(scheme_ordering(opts, Some(fixed))?);
    Ok(checks)
}

/// CSV report with columns `check,measured,tolerance,bound,status`.
pub fn report_csv(checks: &[Check]) -> String {
    let mut out = String::from("check,measured,tolerance,bound,status\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.name,
            format_sig(c.measured),
            format_sig(c.tolerance),
            match c.bound {
                Bound::AtMost => "at_most",
                Bound::AtLeast => "at_least",
            },
            if c.passed() { "pass" } else { "fail" }
        );
    }
    out
}
