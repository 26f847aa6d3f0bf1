//! Seeded Monte Carlo estimation of ergodic capacities.
//!
//! Trials are grouped into fixed chunks of consecutive realization
//! indices. Each chunk is reduced sequentially and the chunk summaries are
//! merged in index order, so the estimate is bit-identical for any number
//! of worker threads.

use std::fmt;

use rayon::prelude::*;

use crate::beamforming::{combine, eb_vector, ib_vector, proposed_beamformer, CsiMode};
use crate::channel::{draw_realization, SeedSpec};
use crate::model::{link_constants, secrecy_capacity, snrs, LinkConstants, SnrSample, SystemParams};
use crate::{Error, Result};

const CHUNK: u64 = 512;

/// How the source beamformer is chosen for each realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Mixing rule with `t` recomputed from each realization.
    ProposedAdaptive,
    /// Mixing rule with a fixed IB weight.
    FixedT(f64),
    /// All power towards the jammer (`w_E`).
    EnergyBeamforming,
    /// All power towards the relay (`w_I`).
    InformationBeamforming,
    /// No jammer in the network; the source uses `w_I`.
    NoJammer,
}

impl Scheme {
    pub fn fixed_t(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain("fixed t", t));
        }
        Ok(Scheme::FixedT(t))
    }

    /// The five schemes compared in the power sweeps.
    pub fn all(fixed_t: f64) -> [Scheme; 5] {
        [
            Scheme::ProposedAdaptive,
            Scheme::FixedT(fixed_t),
            Scheme::EnergyBeamforming,
            Scheme::InformationBeamforming,
            Scheme::NoJammer,
        ]
    }

    /// The fixed IB weight the scheme uses, if any.
    pub fn fixed_weight(&self) -> Option<f64> {
        match *self {
            Scheme::FixedT(t) => Some(t),
            Scheme::EnergyBeamforming => Some(0.0),
            Scheme::InformationBeamforming | Scheme::NoJammer => Some(1.0),
            Scheme::ProposedAdaptive => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Scheme::FixedT(t) = *self {
            Scheme::fixed_t(t)?;
        }
        Ok(())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::ProposedAdaptive => f.write_str("proposed"),
            Scheme::FixedT(t) => write!(f, "fixed_t:{t}"),
            Scheme::EnergyBeamforming => f.write_str("eb"),
            Scheme::InformationBeamforming => f.write_str("ib"),
            Scheme::NoJammer => f.write_str("no_jammer"),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config {
            key: "schemes".into(),
            reason: format!("unknown scheme `{s}`"),
        };
        match s.trim() {
            "proposed" => Ok(Scheme::ProposedAdaptive),
            "eb" => Ok(Scheme::EnergyBeamforming),
            "ib" => Ok(Scheme::InformationBeamforming),
            "no_jammer" => Ok(Scheme::NoJammer),
            other => {
                let t = other
                    .strip_prefix("fixed_t:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(bad)?;
                Scheme::fixed_t(t).map_err(|_| bad())
            }
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: u64,
    pub seed: u64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.count as f64, other.count as f64);
        Moments {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
        }
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let n = self.count as f64;
        let std_error = if self.count > 1 {
            (self.m2 / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error,
            n_trials: self.count,
            seed,
        }
    }
}

/// Evaluates `trial` on realization indices `0..n_trials` and reduces each
/// of its `M` outputs deterministically.
fn run_trials<const M: usize, F>(n_trials: u64, workers: Option<usize>, trial: F) -> Result<[Moments; M]>
where
    F: Fn(u64) -> Result<[f64; M]> + Sync,
{
    if n_trials == 0 {
        return Err(Error::domain("n_trials", 0.0));
    }
    let chunks = n_trials.div_ceil(CHUNK);
    let work = || -> Result<Vec<[Moments; M]>> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = [Moments::default(); M];
                for i in c * CHUNK..((c + 1) * CHUNK).min(n_trials) {
                    let values = trial(i)?;
                    for (m, v) in acc.iter_mut().zip(values) {
                        m.push(v);
                    }
                }
                Ok(acc)
            })
            .collect()
    };
    let per_chunk = match workers {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Contract(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(per_chunk.into_iter().fold([Moments::default(); M], |acc, chunk| {
        let mut out = acc;
        for (o, c) in out.iter_mut().zip(chunk) {
            *o = o.merge(c);
        }
        out
    }))
}

/// SNRs of one trial under `scheme`.
pub fn trial_snrs(
    params: &SystemParams,
    k: &LinkConstants,
    scheme: Scheme,
    seed: SeedSpec,
) -> Result<SnrSample> {
    let r = draw_realization(params.n_antennas, seed)?;
    let w = match scheme {
        Scheme::ProposedAdaptive => proposed_beamformer(&r, k, CsiMode::Instantaneous)?,
        Scheme::FixedT(t) => combine(t, &ib_vector(&r.h_sr)?, &eb_vector(&r.h_sj)?)?,
        Scheme::EnergyBeamforming => eb_vector(&r.h_sj)?,
        Scheme::InformationBeamforming | Scheme::NoJammer => ib_vector(&r.h_sr)?,
    };
    let s = snrs(&r, &w, k)?;
    Ok(if scheme == Scheme::NoJammer {
        s.without_jamming()
    } else {
        s
    })
}

/// Monte Carlo ergodic secrecy capacity of `scheme`, using the global
/// thread pool.
pub fn simulate_ergodic(params: &SystemParams, scheme: Scheme, n_trials: u64, master_seed: u64) -> Result<McEstimate> {
    simulate_ergodic_with_workers(params, scheme, n_trials, master_seed, None)
}

/// As [`simulate_ergodic`] on a dedicated pool of `workers` threads.
pub fn simulate_ergodic_with_workers(
    params: &SystemParams,
    scheme: Scheme,
    n_trials: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<McEstimate> {
    scheme.validate()?;
    let k = link_constants(params)?;
    let [m] = run_trials(n_trials, workers, |i| {
        let s = trial_snrs(params, &k, scheme, SeedSpec::new(master_seed, i))?;
        Ok([secrecy_capacity(&s)])
    })?;
    Ok(m.estimate(master_seed))
}

/// Separate Monte Carlo estimates of `E[log2(1 + gamma_D)]` and
/// `E[log2(1 + gamma_E)]` for a fixed IB weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComponents {
    pub e_cd: McEstimate,
    pub e_ce: McEstimate,
}

impl BoundComponents {
    /// `(1/2) [E(C_D) - E(C_E)]^+` from the simulated components.
    pub fn secrecy_rate(&self) -> f64 {
        crate::esr::secrecy_rate_from_parts(self.e_cd.mean, self.e_ce.mean)
    }
}

pub fn simulate_bound_components(
    params: &SystemParams,
    t: f64,
    n_trials: u64,
    master_seed: u64,
) -> Result<BoundComponents> {
    let scheme = Scheme::fixed_t(t)?;
    let k = link_constants(params)?;
    let [cd, ce] = run_trials(n_trials, None, |i| {
        let s = trial_snrs(params, &k, scheme, SeedSpec::new(master_seed, i))?;
        Ok([s.destination_capacity(), s.eavesdropper_capacity()])
    })?;
    Ok(BoundComponents {
        e_cd: cd.estimate(master_seed),
        e_ce: ce.estimate(master_seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
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
            n_antennas: 32,
        }
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, all.count);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9 * all.m2);
    }

    #[test]
    fn zero_trials_and_bad_scheme_are_rejected() {
        assert!(simulate_ergodic(&params(), Scheme::NoJammer, 0, 1).is_err());
        assert!(simulate_ergodic(&params(), Scheme::FixedT(1.5), 10, 1).is_err());
        assert!(simulate_bound_components(&params(), -0.5, 10, 1).is_err());
    }

    #[test]
    fn scheme_labels_round_trip() {
        for s in Scheme::all(0.35) {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("fixed_t:2".parse::<Scheme>().is_err());
        assert!("beam".parse::<Scheme>().is_err());
    }

    #[test]
    fn identical_for_any_worker_count() {
        let p = params();
        let reference = simulate_ergodic_with_workers(&p, Scheme::ProposedAdaptive, 3000, 17, Some(1)).unwrap();
        for w in [2, 4, 16] {
            let e = simulate_ergodic_with_workers(&p, Scheme::ProposedAdaptive, 3000, 17, Some(w)).unwrap();
            assert_eq!(e.mean.to_bits(), reference.mean.to_bits());
            assert_eq!(e.std_error.to_bits(), reference.std_error.to_bits());
        }
        let global = simulate_ergodic(&p, Scheme::ProposedAdaptive, 3000, 17).unwrap();
        assert_eq!(global, reference);
    }

    #[test]
    fn silenced_eavesdropper_leaves_half_destination_rate() {
        let p = SystemParams { d_re: 1e6, ..params() };
        let n = 4000;
        let no_jam = simulate_ergodic(&p, Scheme::NoJammer, n, 3).unwrap();
        let parts = simulate_bound_components(&p, 1.0, n, 3).unwrap();
        assert!(parts.e_ce.mean < 1e-6);
        assert!((no_jam.mean - 0.5 * parts.e_cd.mean).abs() < 1e-6);
    }

    #[test]
    fn no_information_beam_starves_destination() {
        let p = params();
        let eb = simulate_bound_components(&p, 0.0, 2000, 5).unwrap();
        let ib = simulate_bound_components(&p, 1.0, 2000, 5).unwrap();
        assert!(eb.e_cd.mean + 2.0 < ib.e_cd.mean);
    }

    #[test]
    fn standard_error_shrinks_like_root_n() {
        let p = params();
        let a = simulate_ergodic(&p, Scheme::FixedT(0.35), 20_000, 9).unwrap();
        let b = simulate_ergodic(&p, Scheme::FixedT(0.35), 40_000, 9).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "{ratio}");
    }
}
