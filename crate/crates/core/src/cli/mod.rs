//! Experiment runner behind the `relay-secrecy` binary.
//!
//! Experiments are described by a scenario preset plus a flat `key = value`
//! override file. Results are a long-format table written as CSV with the
//! columns `sweep_var,sweep_value,scheme,metric,value,std_error,seed`.

mod config;
pub mod plot;
pub mod validate;

pub use config::{ExperimentConfig, Scenario, Sweep, SweepVar};

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::beamforming::{
    approx_secrecy_capacity, combine, eb_vector, ib_vector, optimal_t, AsymptoticState, CsiMode,
};
use crate::channel::{draw_realization, ChannelRealization, SeedSpec};
use crate::esr::esr_closed_form;
use crate::model::{link_constants, secrecy_capacity, snrs, LinkConstants, SystemParams};
use crate::montecarlo::{simulate_ergodic, Scheme};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "sweep_var,sweep_value,scheme,metric,value,std_error,seed";

/// `10^((dBm - 30) / 10)`
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// One line of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub scheme: String,
    pub metric: String,
    pub value: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// Formats like C's `%.12g`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exponent) {
        format!("{}e{}", trim_zeros(mantissa), exponent)
    } else {
        let decimals = (DIGITS - 1 - exponent) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Renders rows as CSV text.
pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.sweep_var,
            format_sig(r.sweep_value),
            r.scheme,
            r.metric,
            format_sig(r.value),
            format_sig(r.std_error),
            r.seed
        );
    }
    out
}

/// Executes an experiment and returns its table.
pub fn run(config: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for value in config.sweep.points()? {
        let mut params = config.params.clone();
        config.sweep.var.apply(&mut params, value)?;
        match config.scenario {
            Scenario::Fig1 | Scenario::Fig2 => instantaneous_point(config, &params, value, &mut rows)?,
            Scenario::Fig3 | Scenario::Custom => ergodic_point(config, &params, value, &mut rows)?,
        }
    }
    Ok(rows)
}

/// Runs an experiment, writes the CSV and, if asked, an SVG beside it.
pub fn run_to_file(config: &ExperimentConfig, out: &Path, plot: bool) -> Result<Vec<Row>> {
    let rows = run(config)?;
    std::fs::write(out, to_csv(&rows))?;
    if plot {
        plot::render_csv_file(out, &out.with_extension("svg"))?;
    }
    Ok(rows)
}

/// The fixed channel of the single-realization scenarios.
fn fixed_realization(config: &ExperimentConfig, n_antennas: usize) -> Result<ChannelRealization> {
    let mut r = draw_realization(n_antennas, SeedSpec::new(config.master_seed, 0))?;
    let set = |h: &mut Complex64, x: Option<f64>| {
        if let Some(x) = x {
            *h = Complex64::new(x.sqrt(), 0.0);
        }
    };
    set(&mut r.h_rd, config.fixed_gains.x_rd);
    set(&mut r.h_re, config.fixed_gains.x_re);
    set(&mut r.h_je, config.fixed_gains.x_je);
    Ok(r)
}

fn instantaneous_point(
    config: &ExperimentConfig,
    params: &SystemParams,
    value: f64,
    rows: &mut Vec<Row>,
) -> Result<()> {
    let k = link_constants(params)?;
    let r = fixed_realization(config, params.n_antennas)?;
    let w_i = ib_vector(&r.h_sr)?;
    let w_e = eb_vector(&r.h_sj)?;
    let state = AsymptoticState::from_realization(&k, &r, CsiMode::Instantaneous)?;
    let t_bar = optimal_t(state.b0)?;
    let row = |scheme: String, metric: &str, sweep_value: f64, v: f64| Row {
        sweep_var: config.sweep.var.name(),
        sweep_value,
        scheme,
        metric: metric.into(),
        value: v,
        std_error: 0.0,
        seed: config.master_seed,
    };
    let capacity = |w| -> Result<f64> { Ok(secrecy_capacity(&snrs(&r, w, &k)?)) };

    if config.sweep.var == SweepVar::T {
        let w = combine(value, &w_i, &w_e)?;
        rows.push(row("fixed_t".into(), "secrecy_capacity", value, capacity(&w)?));
        rows.push(row(
            "fixed_t".into(),
            "approx_secrecy_capacity",
            value,
            approx_secrecy_capacity(value, &state, &k, params.n_antennas),
        ));
        if config.sweep.is_last(value)? {
            let w = combine(t_bar, &w_i, &w_e)?;
            let label = Scheme::ProposedAdaptive.to_string();
            rows.push(row(label.clone(), "t_bar", t_bar, t_bar));
            rows.push(row(label.clone(), "b0", t_bar, state.b0));
            rows.push(row(label, "secrecy_capacity", t_bar, capacity(&w)?));
        }
        return Ok(());
    }

    for scheme in &config.schemes {
        let label = scheme.to_string();
        let s = match scheme {
            Scheme::ProposedAdaptive => {
                rows.push(row(label.clone(), "t_bar", value, t_bar));
                rows.push(row(label.clone(), "b0", value, state.b0));
                snrs(&r, &combine(t_bar, &w_i, &w_e)?, &k)?
            }
            Scheme::FixedT(t) => snrs(&r, &combine(*t, &w_i, &w_e)?, &k)?,
            Scheme::EnergyBeamforming => snrs(&r, &w_e, &k)?,
            Scheme::InformationBeamforming => snrs(&r, &w_i, &k)?,
            Scheme::NoJammer => snrs(&r, &w_i, &k)?.without_jamming(),
        };
        rows.push(row(label, "secrecy_capacity", value, secrecy_capacity(&s)));
    }
    Ok(())
}

fn ergodic_point(config: &ExperimentConfig, params: &SystemParams, value: f64, rows: &mut Vec<Row>) -> Result<()> {
    let k = link_constants(params)?;
    let schemes = if config.sweep.var == SweepVar::T {
        vec![Scheme::fixed_t(value)?]
    } else {
        config.schemes.clone()
    };
    for scheme in schemes {
        let label = if config.sweep.var == SweepVar::T {
            "fixed_t".to_string()
        } else {
            scheme.to_string()
        };
        let mc = simulate_ergodic(params, scheme, config.n_trials, config.master_seed)?;
        let mut push = |metric: &str, v: f64, se: f64| {
            rows.push(Row {
                sweep_var: config.sweep.var.name(),
                sweep_value: value,
                scheme: label.clone(),
                metric: metric.into(),
                value: v,
                std_error: se,
                seed: config.master_seed,
            })
        };
        push("ergodic_secrecy_capacity", mc.mean, mc.std_error);
        if config.closed_form {
            if let Some(t) = closed_form_weight(scheme, &k, params.n_antennas)? {
                if scheme == Scheme::ProposedAdaptive {
                    push("t_bar_statistical", t, 0.0);
                }
                push("esr_closed_form", esr_closed_form(t, &k, params.n_antennas)?.esr, 0.0);
            }
        }
    }
    Ok(())
}

/// IB weight used for a scheme's closed-form rate. The adaptive scheme is
/// represented by its statistical-CSI weight; the jammer-free baseline has
/// no closed form here.
fn closed_form_weight(scheme: Scheme, k: &LinkConstants, n_antennas: usize) -> Result<Option<f64>> {
    Ok(match scheme {
        Scheme::ProposedAdaptive => Some(optimal_t(AsymptoticState::statistical(k, n_antennas)?.b0)?),
        Scheme::NoJammer => None,
        other => other.fixed_weight(),
    })
}

/// Maps a library error onto the binary's exit codes.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert_eq!(watts_to_dbm(1.0), 30.0);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
        for dbm in [-110.0, -80.0, 0.0, 20.0, 43.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-12);
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.1), "0.1");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(123456.7890123456), "123456.789012");
        assert_eq!(format_sig(1e-11), "1e-11");
        assert_eq!(format_sig(2.5869080263094e5), "258690.802631");
        assert_eq!(format_sig(1.23456789012345e15), "1.23456789012e15");
        assert_eq!(format_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 2);
        assert_eq!(
            exit_code(&Error::Config {
                key: "a".into(),
                reason: "b".into()
            }),
            1
        );
    }
}
