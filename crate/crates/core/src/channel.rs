//! Seeded Rayleigh block-fading draws.
//!
//! Each realization owns an independent ChaCha8 stream keyed by the master
//! seed and selected by the realization index, so any subset of
//! realizations can be regenerated in any order, on any thread.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Identifies one realization within a reproducible experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        Self {
            master_seed,
            realization_index,
        }
    }

    /// The counter-based generator for this realization.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization_index);
        rng
    }
}

/// One block-fading draw of every channel in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Source to relay, one entry per source antenna.
    pub h_sr: Vec<Complex64>,
    /// Source to jammer.
    pub h_sj: Vec<Complex64>,
    pub h_rd: Complex64,
    pub h_re: Complex64,
    pub h_je: Complex64,
}

impl ChannelRealization {
    /// Builds a realization from explicit coefficients.
    pub fn new(
        h_sr: Vec<Complex64>,
        h_sj: Vec<Complex64>,
        h_rd: Complex64,
        h_re: Complex64,
        h_je: Complex64,
    ) -> Result<Self> {
        if h_sr.is_empty() || h_sr.len() != h_sj.len() {
            return Err(Error::Contract(format!(
                "channel vectors must share a non-zero length, got {} and {}",
                h_sr.len(),
                h_sj.len()
            )));
        }
        let all_finite = h_sr
            .iter()
            .chain(&h_sj)
            .chain([&h_rd, &h_re, &h_je])
            .all(|h| h.re.is_finite() && h.im.is_finite());
        if !all_finite {
            return Err(Error::Contract("channel coefficients must be finite".into()));
        }
        Ok(Self {
            h_sr,
            h_sj,
            h_rd,
            h_re,
            h_je,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.h_sr.len()
    }

    /// `|h_RD|^2`
    pub fn x_rd(&self) -> f64 {
        self.h_rd.norm_sqr()
    }

    /// `|h_RE|^2`
    pub fn x_re(&self) -> f64 {
        self.h_re.norm_sqr()
    }

    /// `|h_JE|^2`
    pub fn x_je(&self) -> f64 {
        self.h_je.norm_sqr()
    }
}

/// Zero-mean, unit-variance circularly symmetric complex Gaussian.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws every channel of the network for one block.
///
/// Draw order within the stream is `h_SR`, `h_SJ`, `h_RD`, `h_RE`, `h_JE`.
pub fn draw_realization(n_antennas: usize, seed: SeedSpec) -> Result<ChannelRealization> {
    if n_antennas == 0 {
        return Err(Error::domain("n_antennas", 0.0));
    }
    let mut rng = seed.rng();
    let h_sr = (0..n_antennas).map(|_| complex_gaussian(&mut rng)).collect();
    let h_sj = (0..n_antennas).map(|_| complex_gaussian(&mut rng)).collect();
    let h_rd = complex_gaussian(&mut rng);
    let h_re = complex_gaussian(&mut rng);
    let h_je = complex_gaussian(&mut rng);
    Ok(ChannelRealization {
        h_sr,
        h_sj,
        h_rd,
        h_re,
        h_je,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_antennas_is_rejected() {
        assert!(matches!(
            draw_realization(0, SeedSpec::new(1, 0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = draw_realization(16, SeedSpec::new(42, 7)).unwrap();
        let b = draw_realization(16, SeedSpec::new(42, 7)).unwrap();
        assert_eq!(a, b);
        let c = draw_realization(16, SeedSpec::new(42, 8)).unwrap();
        assert_ne!(a, c);
        let d = draw_realization(16, SeedSpec::new(43, 7)).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn explicit_constructor_checks_shapes() {
        let one = Complex64::new(1.0, 0.0);
        assert!(ChannelRealization::new(vec![one], vec![one, one], one, one, one).is_err());
        assert!(ChannelRealization::new(vec![], vec![], one, one, one).is_err());
        let nan = Complex64::new(f64::NAN, 0.0);
        assert!(ChannelRealization::new(vec![nan], vec![one], one, one, one).is_err());
        assert!(ChannelRealization::new(vec![one], vec![one], one, one, one).is_ok());
    }

    #[test]
    fn relay_destination_gain_has_unit_mean() {
        let n = 1_000_000u64;
        let mean = (0..n)
            .map(|i| draw_realization(1, SeedSpec::new(2024, i)).unwrap().x_rd())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() <= 0.01, "{mean}");
    }

    #[test]
    fn source_vector_energy_concentrates() {
        let n_ant = 300;
        let trials = 10_000u64;
        let mean = (0..trials)
            .map(|i| {
                let r = draw_realization(n_ant, SeedSpec::new(99, i)).unwrap();
                r.h_sr.iter().map(|h| h.norm_sqr()).sum::<f64>() / n_ant as f64
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 1.0).abs() <= 0.02, "{mean}");
    }

    #[test]
    fn real_and_imaginary_parts_split_variance() {
        let mut rng = SeedSpec::new(5, 0).rng();
        let n = 200_000;
        let (mut re2, mut im2, mut re, mut im) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let h = complex_gaussian(&mut rng);
            re += h.re;
            im += h.im;
            re2 += h.re * h.re;
            im2 += h.im * h.im;
        }
        let nf = n as f64;
        assert!((re / nf).abs() < 0.01 && (im / nf).abs() < 0.01);
        assert!((re2 / nf - 0.5).abs() < 0.01, "{}", re2 / nf);
        assert!((im2 / nf - 0.5).abs() < 0.01, "{}", im2 / nf);
    }

    #[test]
    fn consecutive_indices_are_uncorrelated() {
        let pairs = 100_000u64;
        let xs: Vec<f64> = (0..=pairs)
            .map(|i| draw_realization(1, SeedSpec::new(77, i)).unwrap().x_rd())
            .collect();
        let a = &xs[..pairs as usize];
        let b = &xs[1..];
        let n = pairs as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
        let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() <= 0.02, "{corr}");
    }
}
