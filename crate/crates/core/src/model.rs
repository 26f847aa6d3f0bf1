//! System parameters, link constants and per-realization SNRs.
//!
//! All powers are in watts; dBm appears only at the command-line boundary.

use num_complex::Complex64;

use crate::beamforming::BeamformerWeights;
use crate::channel::ChannelRealization;
use crate::{Error, Result};

/// Tolerance on `||w||` accepted by [`snrs`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Physical constants of the five-node network.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Source transmit power (W).
    pub p_s: f64,
    /// Relay transmit power (W).
    pub p_r: f64,
    /// Receiver noise power (W).
    pub noise_power: f64,
    /// RF-to-DC conversion efficiency at the jammer.
    pub eta: f64,
    /// Path-loss constant.
    pub l_c: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub d_sr: f64,
    pub d_sj: f64,
    pub d_rd: f64,
    pub d_re: f64,
    pub d_je: f64,
    pub n_antennas: usize,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_s", self.p_s),
            ("p_r", self.p_r),
            ("noise_power", self.noise_power),
            ("l_c", self.l_c),
            ("alpha", self.alpha),
            ("d_sr", self.d_sr),
            ("d_sj", self.d_sj),
            ("d_rd", self.d_rd),
            ("d_re", self.d_re),
            ("d_je", self.d_je),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Parameter {
                name: "eta",
                reason: format!("must lie in [0, 1], got {}", self.eta),
            });
        }
        if self.n_antennas == 0 {
            return Err(Error::Parameter {
                name: "n_antennas",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Dimensionless SNR scale factors of the four links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConstants {
    /// Source to relay.
    pub k1: f64,
    /// Relay to destination.
    pub k2: f64,
    /// Source to jammer to eavesdropper (harvest, then jam).
    pub k3: f64,
    /// Relay to eavesdropper.
    pub k4: f64,
}

impl LinkConstants {
    pub fn new(k1: f64, k2: f64, k3: f64, k4: f64) -> Result<Self> {
        for (name, v) in [("k1", k1), ("k2", k2), ("k3", k3), ("k4", k4)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Self { k1, k2, k3, k4 })
    }
}

/// Derives `K1..K4` from the physical parameters.
///
/// `K3 = eta P_S L_c^2 (d_SJ d_JE)^-alpha / sigma^2` follows from the
/// jammer's received-then-retransmitted power; only the distance product
/// is raised to `-alpha`.
pub fn link_constants(params: &SystemParams) -> Result<LinkConstants> {
    params.validate()?;
    let SystemParams {
        p_s,
        p_r,
        noise_power,
        eta,
        l_c,
        alpha,
        d_sr,
        d_sj,
        d_rd,
        d_re,
        d_je,
        ..
    } = *params;
    let loss = |d: f64| l_c * d.powf(-alpha);
    LinkConstants::new(
        p_s * loss(d_sr) / noise_power,
        p_r * loss(d_rd) / noise_power,
        eta * p_s * l_c * l_c * (d_sj * d_je).powf(-alpha) / noise_power,
        p_r * loss(d_re) / noise_power,
    )
}

/// Link and end-to-end SNRs of one realization under one beamformer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSample {
    pub gamma_sr: f64,
    pub gamma_rd: f64,
    pub gamma_je: f64,
    pub gamma_re: f64,
    /// Exact end-to-end SNR at the destination.
    pub gamma_d: f64,
    /// `gamma_SR gamma_RD / (gamma_SR + gamma_RD)`, strictly above `gamma_d`.
    pub gamma_d_ub: f64,
    /// End-to-end SNR at the eavesdropper.
    pub gamma_e: f64,
}

impl SnrSample {
    /// Combines per-link SNRs into the end-to-end values.
    pub fn from_links(gamma_sr: f64, gamma_rd: f64, gamma_je: f64, gamma_re: f64) -> Result<Self> {
        for (what, v) in [
            ("gamma_sr", gamma_sr),
            ("gamma_rd", gamma_rd),
            ("gamma_je", gamma_je),
            ("gamma_re", gamma_re),
        ] {
            // gamma_je may be infinite: jamming dominance limit
            if v.is_nan() || v < 0.0 || (v.is_infinite() && what != "gamma_je") {
                return Err(Error::domain(what, v));
            }
        }
        let product = gamma_sr * gamma_rd;
        let sum = gamma_sr + gamma_rd;
        let gamma_d = product / (sum + 1.0);
        let gamma_d_ub = if sum > 0.0 { product / sum } else { 0.0 };
        let gamma_e = gamma_sr * gamma_re / (gamma_re + (gamma_sr + 1.0) * (gamma_je + 1.0));
        Ok(Self {
            gamma_sr,
            gamma_rd,
            gamma_je,
            gamma_re,
            gamma_d,
            gamma_d_ub,
            gamma_e,
        })
    }

    /// The same sample with the jammer switched off.
    pub fn without_jamming(&self) -> Self {
        Self::from_links(self.gamma_sr, self.gamma_rd, 0.0, self.gamma_re)
            .expect("links already validated")
    }

    /// `log2(1 + gamma_D)`
    pub fn destination_capacity(&self) -> f64 {
        self.gamma_d.ln_1p() / std::f64::consts::LN_2
    }

    /// `log2(1 + gamma_E)`
    pub fn eavesdropper_capacity(&self) -> f64 {
        self.gamma_e.ln_1p() / std::f64::consts::LN_2
    }
}

/// `h^H w`
pub fn inner(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    h.iter().zip(w).map(|(h, w)| h.conj() * w).sum()
}

/// Evaluates the link SNRs and the end-to-end SNRs for one realization.
pub fn snrs(
    realization: &ChannelRealization,
    weights: &BeamformerWeights,
    k: &LinkConstants,
) -> Result<SnrSample> {
    let w = weights.w();
    if w.len() != realization.n_antennas() {
        return Err(Error::Contract(format!(
            "beamformer has {} entries, channel has {} antennas",
            w.len(),
            realization.n_antennas()
        )));
    }
    let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return Err(Error::Contract(format!("beamformer norm is {norm}, expected 1")));
    }
    let gain_sr = inner(&realization.h_sr, w).norm_sqr();
    let gain_sj = inner(&realization.h_sj, w).norm_sqr();
    SnrSample::from_links(
        k.k1 * gain_sr,
        k.k2 * realization.x_rd(),
        k.k3 * gain_sj * realization.x_je(),
        k.k4 * realization.x_re(),
    )
}

/// Instantaneous secrecy capacity in bits/s/Hz, half-duplex factor included.
pub fn secrecy_capacity(s: &SnrSample) -> f64 {
    0.5 * (s.destination_capacity() - s.eavesdropper_capacity()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_realization, SeedSpec};
    use proptest::prelude::*;

    fn base_params() -> SystemParams {
        SystemParams {
            p_s: 1.0,
            p_r: 1.0,
            noise_power: 1e-11,
            eta: 0.8,
            l_c: 0.1,
            alpha: 2.7,
            d_sr: 50.0,
            d_sj: 50.0,
            d_rd: 30.0,
            d_re: 60.0,
            d_je: 40.0,
            n_antennas: 300,
        }
    }

    #[test]
    fn unit_cancellation_gives_unit_k1() {
        let p = SystemParams {
            p_s: 2.0,
            noise_power: 2.0,
            l_c: 1.0,
            d_sr: 1.0,
            ..base_params()
        };
        assert_eq!(link_constants(&p).unwrap().k1, 1.0);
    }

    #[test]
    fn figure_three_constants() {
        let k = link_constants(&base_params()).unwrap();
        let expect_k1 = 0.1 * 50f64.powf(-2.7) * 1e11;
        assert!(((k.k1 - expect_k1) / expect_k1).abs() < 1e-14);
        let expect_k3 = 0.8 * 0.01 * 2000f64.powf(-2.7) * 1e11;
        assert!(((k.k3 - expect_k3) / expect_k3).abs() < 1e-14);
    }

    #[test]
    fn doubling_distance_scales_by_power_law() {
        let p = base_params();
        let k = link_constants(&p).unwrap();
        let far = link_constants(&SystemParams { d_sr: 100.0, ..p }).unwrap();
        assert!((far.k1 / k.k1 - 2f64.powf(-2.7)).abs() < 1e-14);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad = [
            SystemParams { p_s: 0.0, ..base_params() },
            SystemParams { eta: 1.5, ..base_params() },
            SystemParams { d_je: -1.0, ..base_params() },
            SystemParams { n_antennas: 0, ..base_params() },
            SystemParams { alpha: f64::NAN, ..base_params() },
        ];
        for p in bad {
            assert!(matches!(link_constants(&p), Err(Error::Parameter { .. })));
        }
        // eta = 0 silences the jammer, which makes K3 vanish
        let silent = SystemParams { eta: 0.0, ..base_params() };
        assert!(link_constants(&silent).is_err());
    }

    #[test]
    fn destination_snr_arithmetic() {
        let s = SnrSample::from_links(2.0, 2.0, 0.0, 0.0).unwrap();
        assert!((s.gamma_d - 0.8).abs() < 1e-15);
        assert!((s.gamma_d_ub - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eavesdropper_snr_arithmetic() {
        let s = SnrSample::from_links(2.0, 1.0, 0.0, 3.0).unwrap();
        assert!((s.gamma_e - 1.0).abs() < 1e-15);
        let jammed = SnrSample::from_links(2.0, 1.0, f64::INFINITY, 3.0).unwrap();
        assert_eq!(jammed.gamma_e, 0.0);
        let heavy = SnrSample::from_links(2.0, 1.0, 1e12, 3.0).unwrap();
        assert!(heavy.gamma_e < 1e-11);
    }

    #[test]
    fn secrecy_capacity_examples() {
        let s = |gd: f64, ge: f64| SnrSample {
            gamma_d: gd,
            gamma_e: ge,
            ..SnrSample::from_links(0.0, 0.0, 0.0, 0.0).unwrap()
        };
        assert!((secrecy_capacity(&s(3.0, 1.0)) - 0.5).abs() < 1e-15);
        assert_eq!(secrecy_capacity(&s(1.0, 3.0)), 0.0);
        assert_eq!(secrecy_capacity(&s(2.5, 2.5)), 0.0);
    }

    #[test]
    fn negative_or_nan_links_are_rejected() {
        assert!(SnrSample::from_links(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(SnrSample::from_links(1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(SnrSample::from_links(f64::INFINITY, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn snrs_rejects_non_unit_beamformer() {
        let r = draw_realization(4, SeedSpec::new(1, 1)).unwrap();
        let k = link_constants(&base_params()).unwrap();
        let w = BeamformerWeights::from_raw(vec![Complex64::new(0.6, 0.0); 4]);
        assert!(matches!(snrs(&r, &w, &k), Err(Error::Contract(_))));
        let w = BeamformerWeights::from_raw(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(matches!(snrs(&r, &w, &k), Err(Error::Contract(_))));
    }

    fn snr() -> impl Strategy<Value = f64> {
        (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #[test]
        fn exact_destination_snr_is_strictly_below_bound(a in snr(), b in snr()) {
            let s = SnrSample::from_links(a, b, 0.0, 1.0).unwrap();
            prop_assert!(s.gamma_d < s.gamma_d_ub);
        }

        #[test]
        fn eavesdropper_snr_monotonicity(sr in snr(), je in snr(), re in snr(), f in 1.0f64..100.0) {
            let base = SnrSample::from_links(sr, 1.0, je, re).unwrap();
            let more_jam = SnrSample::from_links(sr, 1.0, je * f, re).unwrap();
            let stronger_re = SnrSample::from_links(sr, 1.0, je, re * f).unwrap();
            prop_assert!(more_jam.gamma_e <= base.gamma_e);
            prop_assert!(stronger_re.gamma_e >= base.gamma_e);
        }

        #[test]
        fn capacity_is_bounded(sr in snr(), rd in snr(), je in snr(), re in snr()) {
            let s = SnrSample::from_links(sr, rd, je, re).unwrap();
            let c = secrecy_capacity(&s);
            prop_assert!(c >= 0.0);
            prop_assert!(c <= 0.5 * s.destination_capacity());
        }

        #[test]
        fn phase_rotation_leaves_snrs_unchanged(seed in any::<u64>(), theta in 0.0f64..std::f64::consts::TAU) {
            let r = draw_realization(6, SeedSpec::new(seed, 0)).unwrap();
            let k = link_constants(&base_params()).unwrap();
            let w = crate::beamforming::ib_vector(&r.h_sr).unwrap();
            let rotated = BeamformerWeights::from_raw(
                w.w().iter().map(|x| x * Complex64::from_polar(1.0, theta)).collect(),
            );
            let a = snrs(&r, &w, &k).unwrap();
            let b = snrs(&r, &rotated, &k).unwrap();
            for (x, y) in [(a.gamma_sr, b.gamma_sr), (a.gamma_je, b.gamma_je), (a.gamma_e, b.gamma_e)] {
                prop_assert!(((x - y) / x).abs() < 1e-12);
            }
        }
    }
}
