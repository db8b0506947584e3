//! CSV output for regression tables, binned cells and group lines. Floats are
//! printed with 12 significant digits (`%.12g`).

use std::io::Write;

use super::bins::{BinMode, BinnedCell, GroupLine};
use super::ols::{RegressionResult, INTERACTION_TERMS};
use super::Condition;

pub const REGRESSION_HEADER: [&str; 8] = ["condition", "term", "coef", "se", "t", "p", "n_obs", "r2"];
pub const BINS_HEADER: [&str; 6] = ["mode", "pop_bin", "perf_bin", "mean_delta", "count", "ci_half_width"];
pub const LINES_HEADER: [&str; 3] = ["pop_bin", "slope", "intercept"];

/// Formats like C's `%.12g`.
pub fn format_g12(x: f64) -> String {
    const PREC: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PREC).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (PREC - 1 - exp) as usize, x)).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_regression_csv<W: Write>(output: W, fits: &[(Condition, RegressionResult)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(REGRESSION_HEADER)?;
    for (condition, fit) in fits {
        for (j, term) in INTERACTION_TERMS.iter().enumerate() {
            w.write_record([
                condition.name(),
                term,
                &format_g12(fit.coefficients[j]),
                &format_g12(fit.standard_errors[j]),
                &format_g12(fit.t_stats[j]),
                &format_g12(fit.p_values[j]),
                &fit.n_obs.to_string(),
                &format_g12(fit.r_squared),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_bins_csv<W: Write>(output: W, tables: &[(BinMode, Vec<BinnedCell>)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(BINS_HEADER)?;
    for (mode, cells) in tables {
        for c in cells {
            w.write_record([
                mode.name(),
                &c.pop_bin.to_string(),
                &format_g12(c.perf_bin),
                &format_g12(c.mean_delta),
                &c.count.to_string(),
                &format_g12(c.ci_half_width),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_lines_csv<W: Write>(output: W, lines: &[GroupLine]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(LINES_HEADER)?;
    for l in lines {
        w.write_record([l.pop_bin.to_string(), format_g12(l.slope), format_g12(l.intercept)])?;
    }
    w.flush()?;
    Ok(())
}
