//! Adaptive Gauss-Kronrod quadrature and the expectation oracles built on
//! it. Nothing here calls into the closed-form special functions.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Kronrod 15-point abscissae; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Oracle configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if !(relative_tolerance > 0.0 && relative_tolerance.is_finite()) {
            return Err(Error::domain("relative_tolerance", relative_tolerance));
        }
        if max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions", 0.0));
        }
        Ok(Self {
            relative_tolerance,
            max_subdivisions,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` split at `breakpoints`, bisecting the
/// segment with the largest error estimate until the summed error is below
/// `rel_tol * |I| + abs_tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    let mut heap: BinaryHeap<Segment> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect();
    let mut subdivisions = 0;
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Convergence {
                subdivisions,
                estimate: value,
                error,
            });
        }
        if error <= rel_tol * value.abs() + abs_tol {
            return Ok(value);
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::Convergence {
                subdivisions,
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split any further in floating point
            return Err(Error::Convergence {
                subdivisions,
                estimate: value,
                error,
            });
        }
        heap.push(kronrod15(&f, worst.a, mid));
        heap.push(kronrod15(&f, mid, worst.b));
        subdivisions += 1;
    }
}

/// Shape of a Gamma(k, 1) variable with integer k in {1, 2}.
#[derive(Debug, Clone, Copy)]
enum Shape {
    Exponential,
    Erlang2,
}

impl Shape {
    fn k(self) -> i32 {
        match self {
            Shape::Exponential => 1,
            Shape::Erlang2 => 2,
        }
    }

    fn digamma(self) -> f64 {
        match self {
            Shape::Exponential => -EULER_GAMMA,
            Shape::Erlang2 => 1.0 - EULER_GAMMA,
        }
    }

    /// Upper bound of `int_Z^inf ln(1 + s z) z^{k-1} e^{-z} dz`, using
    /// `ln(1 + s z) <= ln(1 + s Z) + (z - Z) / Z` on the tail.
    fn upper_tail(self, scale: f64, cut: f64) -> f64 {
        let log_at_cut = (scale * cut).ln_1p();
        let e = (-cut).exp();
        match self {
            Shape::Exponential => e * (log_at_cut + 1.0 / cut),
            Shape::Erlang2 => e * (log_at_cut * (cut + 1.0) + (cut + 2.0) / cut),
        }
    }
}

/// `E[ln(1 + scale * S)]` for `S ~ Gamma(k, 1)` from the defining integral.
///
/// Integration runs in `v = ln z` between explicit truncation points. The
/// lower cut uses `ln(1 + s z) <= s z`; the upper cut uses
/// [`Shape::upper_tail`]. Each tail is held to a quarter of the requested
/// tolerance against the Jensen lower bound `ln(1 + s e^{psi(k)})`.
fn expect_log1p_gamma(scale: f64, shape: Shape, spec: &QuadratureSpec) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("oracle scale", scale));
    }
    let tol = spec.relative_tolerance;
    let lower_bound = (scale * shape.digamma().exp()).ln_1p();
    let budget = 0.25 * tol * lower_bound;

    let k = shape.k();
    let kp1 = f64::from(k + 1);
    let z_lo = (budget * kp1 / scale).powf(1.0 / kp1);

    let mut z_hi = 8.0_f64;
    while shape.upper_tail(scale, z_hi) > budget {
        z_hi *= 2.0;
    }

    let (v_lo, v_hi) = (z_lo.ln(), z_hi.ln());
    let pieces = 32;
    let breakpoints: Vec<f64> = (0..=pieces)
        .map(|i| v_lo + (v_hi - v_lo) * f64::from(i) / f64::from(pieces))
        .collect();
    let integrand = |v: f64| {
        let z = v.exp();
        (scale * z).ln_1p() * z.powi(k) * (-z).exp()
    };
    integrate(
        integrand,
        &breakpoints,
        0.5 * tol,
        0.0,
        spec.max_subdivisions,
    )
}

/// Quadrature value of `E[ln(1 + scale * Z)]`, `Z ~ Exp(1)`, i.e. of
/// `int_0^inf ln(1 + scale z) e^{-z} dz`.
pub fn expect_log1p_exponential_oracle(scale: f64, spec: &QuadratureSpec) -> Result<f64> {
    expect_log1p_gamma(scale, Shape::Exponential, spec)
}

/// Quadrature value of `int_0^inf ln(1 + scale s) s e^{-s} ds`, the
/// expectation over the sum of two independent unit-mean exponentials.
pub fn expect_log1p_erlang2_oracle(scale: f64, spec: &QuadratureSpec) -> Result<f64> {
    expect_log1p_gamma(scale, Shape::Erlang2, spec)
}

/// Nested quadrature of `E[ln(1 + a X + b Y)]` over independent unit-mean
/// exponentials.
///
/// The inner expectation over `Y` is rewritten as
/// `ln(1 + a x) + E[ln(1 + b/(1 + a x) Y)]` and evaluated with
/// [`expect_log1p_exponential_oracle`]; the outer integral over `x` runs on
/// `[0, X]` with the tail bounded by `e^{-X} (ln(1 + a X + b) + 1/X)`.
pub fn expect_log1p_pair_oracle(a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    for (what, v) in [("first scale", a), ("second scale", b)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(what, v));
        }
    }
    let tol = spec.relative_tolerance;
    let inner_spec = QuadratureSpec {
        relative_tolerance: 0.1 * tol,
        ..*spec
    };
    // E[ln(1 + aX + bY)] >= E[ln(1 + bY)] >= ln(1 + b e^{-gamma})
    let budget = 0.25 * tol * (b * (-EULER_GAMMA).exp()).ln_1p();
    let mut x_hi = 8.0_f64;
    while (-x_hi).exp() * ((a * x_hi + b).ln_1p() + 1.0 / x_hi) > budget {
        x_hi *= 2.0;
    }

    let mut breakpoints = vec![0.0];
    for c in [1e-3, 1e-2, 1e-1, 1.0, 10.0] {
        let p = c / a;
        if p < x_hi {
            breakpoints.push(p);
        }
    }
    let mut p = 1.0;
    while p < x_hi {
        breakpoints.push(p);
        p *= 2.0;
    }
    breakpoints.push(x_hi);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let failure = std::cell::Cell::new(None);
    let integrand = |x: f64| {
        let base = a * x;
        let inner = match expect_log1p_exponential_oracle(b / (1.0 + base), &inner_spec) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e.to_string()));
                f64::NAN
            }
        };
        (base.ln_1p() + inner) * (-x).exp()
    };
    let result = integrate(integrand, &breakpoints, 0.5 * tol, 0.0, spec.max_subdivisions);
    if let Some(msg) = failure.take() {
        return Err(Error::Contract(format!("inner oracle failed: {msg}")));
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 0).is_err());
        assert!(QuadratureSpec::new(1e-8, 1).is_ok());
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(|x| x * x * x - 2.0 * x, &[0.0, 2.0], 1e-14, 0.0, 10).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate(|x| x.powi(4), &[-1.0, 1.0], 1e-14, 0.0, 10).unwrap();
        assert!((v - 0.4).abs() < 1e-14);
    }

    #[test]
    fn adaptive_refinement_handles_a_kink() {
        let v = integrate(|x: f64| x.abs().sqrt(), &[-1.0, 1.0], 1e-10, 0.0, 500).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn subdivision_cap_reports_convergence_error() {
        let r = integrate(|x: f64| x.abs().sqrt(), &[-1.0, 1.0], 1e-14, 0.0, 1);
        assert!(matches!(r, Err(Error::Convergence { .. })));
        let tight = QuadratureSpec::new(1e-15, 1).unwrap();
        assert!(matches!(
            expect_log1p_exponential_oracle(1e6, &tight),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn exponential_oracle_linearises_for_small_scale() {
        let spec = QuadratureSpec::default();
        for s in [1e-8, 1e-6, 1e-4] {
            let v = expect_log1p_exponential_oracle(s, &spec).unwrap();
            // E[ln(1 + sZ)] = s - s^2 + O(s^3)
            assert!(((v - (s - s * s)) / s).abs() < 1e-12 + 3.0 * s * s, "{s}: {v}");
        }
    }

    #[test]
    fn erlang2_identity_by_parts() {
        // int ln(1+s) s e^{-s} ds = int e^{-s} ds = 1
        let v = expect_log1p_erlang2_oracle(1.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn pair_oracle_reduces_to_single_scale() {
        let spec = QuadratureSpec::new(1e-10, 4000).unwrap();
        // b tiny compared with a: E[ln(1 + aX + bY)] ~ E[ln(1 + aX)]
        let a = 3.0;
        let pair = expect_log1p_pair_oracle(a, 1e-9, &spec).unwrap();
        let single = expect_log1p_exponential_oracle(a, &spec).unwrap();
        assert!(((pair - single) / single).abs() < 1e-8);
    }
}
