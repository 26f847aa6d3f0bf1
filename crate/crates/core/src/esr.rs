//! Closed-form ergodic secrecy rate for a fixed IB weight `t`.
//!
//! Each ergodic capacity is a signed sum of terms `E[ln(1 + aX + bY)]`
//! over independent unit-mean exponentials, evaluated by
//! [`crate::specfun::expect_log1p_pair`]. Those terms are in nats; the
//! conversion to bits happens once per capacity.

use std::f64::consts::LN_2;

use crate::model::LinkConstants;
use crate::specfun::{expect_log1p_pair_unchecked, expect_log1p_single, PairBranch};
use crate::{Error, Result};

/// Destination-side terms of `E(C_D)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DestinationTerms {
    pub mu: f64,
    pub lambda: f64,
    /// `E[ln(1 + mu Z_SR)]`
    pub cd1: f64,
    /// `E[ln(1 + K2 X_RD)]`
    pub cd2: f64,
    /// `E[ln(1 + mu Z_SR + lambda X_RD)]`
    pub cd3: f64,
    pub cd3_branch: PairBranch,
}

impl DestinationTerms {
    /// `E(C_D)` in bits/s/Hz.
    pub fn capacity(&self) -> f64 {
        (self.cd1 + self.cd2 - self.cd3) / LN_2
    }
}

/// Eavesdropper-side terms of `E(C_E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EavesdropperTerms {
    pub mu: f64,
    pub lambda: f64,
    /// `E[ln(1 + K4 X_RE + mu X_JE)]`
    pub ce1: f64,
    /// `E[ln(1 + mu X_JE + lambda X_RE)]`
    pub ce2: f64,
    pub ce1_branch: PairBranch,
    pub ce2_branch: PairBranch,
}

impl EavesdropperTerms {
    /// `E(C_E)` in bits/s/Hz.
    pub fn capacity(&self) -> f64 {
        (self.ce1 - self.ce2) / LN_2
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("mixing coefficient t", t));
    }
    Ok(())
}

/// Terms of `E(C_D)` with
/// `mu_D = K1 (1 - t^2) / (1 + K1 N t^2)` and `lambda_D = K2 / (1 + K1 N t^2)`.
///
/// At `t = 1` the cross term vanishes (`mu_D = 0`): `C_D1 = 0` and `C_D3`
/// reduces to a single-scale expectation.
pub fn destination_terms(t: f64, k: &LinkConstants, n_antennas: usize) -> Result<DestinationTerms> {
    check_t(t)?;
    let n = n_antennas as f64;
    let t2 = t * t;
    let scale = 1.0 + k.k1 * n * t2;
    let mu = if t == 1.0 { 0.0 } else { k.k1 * (1.0 - t2) / scale };
    let lambda = k.k2 / scale;
    let (cd3, cd3_branch) = expect_log1p_pair_unchecked(mu, lambda);
    Ok(DestinationTerms {
        mu,
        lambda,
        cd1: expect_log1p_single(mu),
        cd2: expect_log1p_single(k.k2),
        cd3,
        cd3_branch,
    })
}

/// Terms of `E(C_E)` with the cross gains at their unit mean:
/// `mu_E = K3 [N (1 - t^2) + t^2]` and
/// `lambda_E = K4 / (1 + K1 [N t^2 + (1 - t^2)])`.
pub fn eavesdropper_terms(t: f64, k: &LinkConstants, n_antennas: usize) -> Result<EavesdropperTerms> {
    check_t(t)?;
    let n = n_antennas as f64;
    let t2 = t * t;
    let mu = k.k3 * (n * (1.0 - t2) + t2);
    let lambda = k.k4 / (1.0 + k.k1 * (n * t2 + (1.0 - t2)));
    let (ce1, ce1_branch) = expect_log1p_pair_unchecked(k.k4, mu);
    let (ce2, ce2_branch) = expect_log1p_pair_unchecked(lambda, mu);
    Ok(EavesdropperTerms {
        mu,
        lambda,
        ce1,
        ce2,
        ce1_branch,
        ce2_branch,
    })
}

/// Large-`N` approximation of `E[log2(1 + gamma_D)]` for IB weight `t`.
pub fn ecd_closed_form(t: f64, k: &LinkConstants, n_antennas: usize) -> Result<f64> {
    Ok(destination_terms(t, k, n_antennas)?.capacity())
}

/// Large-`N` approximation of `E[log2(1 + gamma_E)]` for IB weight `t`.
pub fn ece_closed_form(t: f64, k: &LinkConstants, n_antennas: usize) -> Result<f64> {
    Ok(eavesdropper_terms(t, k, n_antennas)?.capacity())
}

/// Which formula evaluated each two-scale term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchFlags {
    pub cd3: PairBranch,
    pub ce1: PairBranch,
    pub ce2: PairBranch,
}

/// Closed-form ergodic secrecy rate and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsrClosedForm {
    pub e_cd: f64,
    pub e_ce: f64,
    /// `max(0, (e_cd - e_ce) / 2)`
    pub esr: f64,
    pub mu_d: f64,
    pub lambda_d: f64,
    pub mu_e: f64,
    pub lambda_e: f64,
    pub branch_flags: BranchFlags,
}

/// `(1/2) [E(C_D) - E(C_E)]^+`
pub fn secrecy_rate_from_parts(e_cd: f64, e_ce: f64) -> f64 {
    (0.5 * (e_cd - e_ce)).max(0.0)
}

/// Ergodic secrecy rate lower bound for IB weight `t`.
pub fn esr_closed_form(t: f64, k: &LinkConstants, n_antennas: usize) -> Result<EsrClosedForm> {
    let d = destination_terms(t, k, n_antennas)?;
    let e = eavesdropper_terms(t, k, n_antennas)?;
    let (e_cd, e_ce) = (d.capacity(), e.capacity());
    Ok(EsrClosedForm {
        e_cd,
        e_ce,
        esr: secrecy_rate_from_parts(e_cd, e_ce),
        mu_d: d.mu,
        lambda_d: d.lambda,
        mu_e: e.mu,
        lambda_e: e.lambda,
        branch_flags: BranchFlags {
            cd3: d.cd3_branch,
            ce1: e.ce1_branch,
            ce2: e.ce2_branch,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{
        exp_e1_scaled, expect_log1p_exponential_oracle, expect_log1p_pair_oracle, meijer_g_1323,
        QuadratureSpec,
    };

    fn k(k1: f64, k2: f64, k3: f64, k4: f64) -> LinkConstants {
        LinkConstants::new(k1, k2, k3, k4).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn invalid_t_is_rejected() {
        let kk = k(1.0, 1.0, 1.0, 1.0);
        for t in [-0.01, 1.01, f64::NAN] {
            assert!(ecd_closed_form(t, &kk, 10).is_err());
            assert!(ece_closed_form(t, &kk, 10).is_err());
            assert!(esr_closed_form(t, &kk, 10).is_err());
        }
    }

    #[test]
    fn pure_ib_collapses_cross_term() {
        let kk = k(2e3, 5e4, 0.5, 1e3);
        let d = destination_terms(1.0, &kk, 64).unwrap();
        assert_eq!(d.mu, 0.0);
        assert_eq!(d.cd1, 0.0);
        assert_eq!(d.cd3_branch, PairBranch::SingleScale);
        let single = exp_e1_scaled(1.0 / d.lambda).unwrap();
        assert!(rel(d.cd3, single) < 1e-15);
        let expected = (d.cd2 - single) / LN_2;
        assert!(rel(ecd_closed_form(1.0, &kk, 64).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn coincident_unit_scales_give_unit_cd3() {
        let d = destination_terms(0.0, &k(1.0, 1.0, 1.0, 1.0), 10).unwrap();
        assert_eq!(d.cd3_branch, PairBranch::Coincident);
        assert!((d.cd3 - 1.0).abs() < 1e-14);
        assert!((d.cd3 - meijer_g_1323(1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn vanishing_eavesdropper_link_drives_ece_to_zero() {
        let mut prev = f64::INFINITY;
        for k4 in [1e-2, 1e-4, 1e-6, 1e-9] {
            let v = ece_closed_form(0.4, &k(1e4, 1e4, 0.8, k4), 100).unwrap();
            assert!(v >= 0.0 && v < prev);
            prev = v;
        }
        assert!(prev < 1e-8, "{prev}");
    }

    #[test]
    fn coincident_eavesdropper_scales_use_meijer_value() {
        // lambda_E = mu_E
        let (k1, k3, n, t) = (50.0, 0.01, 20usize, 0.5f64);
        let nf = n as f64;
        let mu_e = k3 * (nf * (1.0 - t * t) + t * t);
        let k4 = mu_e * (1.0 + k1 * (nf * t * t + 1.0 - t * t));
        let e = eavesdropper_terms(t, &k(k1, 1.0, k3, k4), n).unwrap();
        assert_eq!(e.ce2_branch, PairBranch::Coincident);
        assert!(rel(e.ce2, meijer_g_1323(mu_e).unwrap()) < 1e-9);
    }

    #[test]
    fn arithmetic_of_the_rate() {
        assert_eq!(secrecy_rate_from_parts(4.0, 1.0), 1.5);
        assert_eq!(secrecy_rate_from_parts(2.0, 2.0), 0.0);
        assert_eq!(secrecy_rate_from_parts(1.0, 3.0), 0.0);
    }

    #[test]
    fn cd3_matches_two_dimensional_quadrature() {
        let spec = QuadratureSpec::new(1e-9, 4000).unwrap();
        for &mu in &log_grid(1e-2, 1e3, 5) {
            for &lambda in &log_grid(1e-2, 1e3, 5) {
                let (closed, _) = expect_log1p_pair_unchecked(mu, lambda);
                let oracle = expect_log1p_pair_oracle(mu, lambda, &spec).unwrap();
                assert!(rel(closed, oracle) < 1e-6, "({mu}, {lambda}): {closed} vs {oracle}");
            }
        }
    }

    #[test]
    fn ecd_matches_quadrature_assembly() {
        let spec = QuadratureSpec::new(1e-10, 4000).unwrap();
        let kk = k(30.0, 200.0, 0.1, 50.0);
        for t in [0.0, 0.2, 0.5, 0.9] {
            let d = destination_terms(t, &kk, 8).unwrap();
            let cd1 = expect_log1p_exponential_oracle(d.mu, &spec).unwrap();
            let cd2 = expect_log1p_exponential_oracle(kk.k2, &spec).unwrap();
            let cd3 = expect_log1p_pair_oracle(d.mu, d.lambda, &spec).unwrap();
            let oracle = (cd1 + cd2 - cd3) / LN_2;
            assert!(rel(d.capacity(), oracle) < 1e-6, "t={t}");
        }
    }

    // general formula at relative separation 1e-5 versus the coincident one
    #[test]
    fn degenerate_branches_are_continuous() {
        let eps = 1e-5;
        let (n, t) = (50usize, 0.3f64);
        let nf = n as f64;
        let t2 = t * t;
        for &scale in &log_grid(1e-2, 1e3, 20) {
            // lambda_D = mu_D; at t = 0 these are K1 and K2
            let exact = destination_terms(0.0, &k(scale, scale, 1.0, 1.0), n).unwrap();
            let split = destination_terms(0.0, &k(scale, scale * (1.0 + eps), 1.0, 1.0), n).unwrap();
            assert_eq!(exact.cd3_branch, PairBranch::Coincident);
            assert_eq!(split.cd3_branch, PairBranch::General);
            assert!(rel(split.cd3, exact.cd3) < 1e-4);

            // K4 = mu_E
            let k3 = scale / (nf * (1.0 - t2) + t2);
            let exact = eavesdropper_terms(t, &k(10.0, 1.0, k3, scale), n).unwrap();
            let split = eavesdropper_terms(t, &k(10.0, 1.0, k3, scale * (1.0 + eps)), n).unwrap();
            assert_eq!(exact.ce1_branch, PairBranch::Coincident);
            assert_eq!(split.ce1_branch, PairBranch::General);
            assert!(rel(split.ce1, exact.ce1) < 1e-4);

            // lambda_E = mu_E
            let k1 = 10.0;
            let k4 = scale * (1.0 + k1 * (nf * t2 + 1.0 - t2));
            let exact = eavesdropper_terms(t, &k(k1, 1.0, k3, k4), n).unwrap();
            let split = eavesdropper_terms(t, &k(k1, 1.0, k3, k4 * (1.0 + eps)), n).unwrap();
            assert_eq!(exact.ce2_branch, PairBranch::Coincident);
            assert_eq!(split.ce2_branch, PairBranch::General);
            assert!(rel(split.ce2, exact.ce2) < 1e-4);
        }
    }

    #[test]
    fn monotone_in_relay_and_jamming_gains() {
        for t in [0.1, 0.35, 0.8] {
            let mut prev_cd = f64::NEG_INFINITY;
            let mut prev_ce = f64::INFINITY;
            for &g in &log_grid(1e-1, 1e6, 30) {
                let cd = ecd_closed_form(t, &k(1e4, g, 1.0, 1e3), 100).unwrap();
                assert!(cd >= prev_cd - 1e-12);
                prev_cd = cd;
                let ce = ece_closed_form(t, &k(1e4, 1e4, g * 1e-3, 1e3), 100).unwrap();
                assert!(ce <= prev_ce + 1e-12);
                prev_ce = ce;
            }
        }
    }

    #[test]
    fn rate_is_never_negative() {
        for &g in &log_grid(1e-3, 1e6, 15) {
            for t in [0.0, 0.5, 1.0] {
                let r = esr_closed_form(t, &k(g, 1.0, 1.0, g), 30).unwrap();
                assert!(r.esr >= 0.0);
                assert_eq!(r.esr, secrecy_rate_from_parts(r.e_cd, r.e_ce));
            }
        }
    }
}
