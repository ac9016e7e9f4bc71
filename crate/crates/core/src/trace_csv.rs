//! Trace CSV: one record per line, 9 significant digits in plain decimal
//! notation.
//!
//! For two joints and five parameters the header is
//!
//! ```text
//! t,q1,q2,qd1,qd2,e1,e2,ef1,ef2,eta1,eta2,tau1,tau2,tau1_raw,tau2_raw,th1,th2,th3,th4,th5,V
//! ```

use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::simulator::{Trace, TraceRecord};

/// Column names for `n` joints and `p` parameters.
pub fn header(n: usize, p: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for prefix in ["q", "qd", "e", "ef", "eta", "tau"] {
        cols.extend((1..=n).map(|i| format!("{prefix}{i}")));
    }
    cols.extend((1..=n).map(|i| format!("tau{i}_raw")));
    cols.extend((1..=p).map(|j| format!("th{j}")));
    cols.push("V".into());
    cols
}

/// `x` rounded to 9 significant digits, written without an exponent.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // `{:e}` does the decimal rounding; only the digit placement is ours.
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1; // digits before the decimal point
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> std::io::Result<()> {
    let Some(first) = trace.records.first() else {
        return Ok(());
    };
    writeln!(out, "{}", header(first.q.len(), first.theta_hat.len()).join(","))?;
    let mut line = String::new();
    for r in &trace.records {
        line.clear();
        line.push_str(&format_sig9(r.t));
        let groups = [&r.q, &r.q_d, &r.e, &r.e_f, &r.eta, &r.tau, &r.tau_raw, &r.theta_hat];
        for v in groups.into_iter().flat_map(|g| g.iter()) {
            line.push(',');
            line.push_str(&format_sig9(*v));
        }
        line.push(',');
        line.push_str(&format_sig9(r.v));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn trace_to_string(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Parses a trace written by [`write_trace`]. `K_e` is not stored in the
/// file, so the records come back with an empty `k_e`.
pub fn read_trace<R: BufRead>(input: R) -> Result<Trace> {
    let mut lines = input.lines().enumerate();
    let (_, head) = lines
        .next()
        .ok_or_else(|| Error::TraceParse("empty file".into()))?;
    let head = head.map_err(|e| Error::TraceParse(e.to_string()))?;
    let cols: Vec<&str> = head.trim_end().split(',').collect();

    let n = cols.iter().filter(|c| c.len() > 1 && c.starts_with('q') && c[1..].parse::<usize>().is_ok()).count();
    let p = cols.iter().filter(|c| c.starts_with("th")).count();
    let want = header(n, p);
    if n == 0 || cols != want {
        return Err(Error::TraceParse(format!(
            "line 1: unexpected header `{head}`"
        )));
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::TraceParse(format!("line {lineno}: {e}")))?;
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::TraceParse(format!("line {lineno}: {e}")))?;
        if vals.len() != want.len() {
            return Err(Error::TraceParse(format!(
                "line {lineno}: expected {} fields, found {}",
                want.len(),
                vals.len()
            )));
        }
        let mut at = 1;
        let mut take = |len: usize| {
            let v = DVector::from_column_slice(&vals[at..at + len]);
            at += len;
            v
        };
        let rec = TraceRecord {
            t: vals[0],
            q: take(n),
            q_d: take(n),
            e: take(n),
            e_f: take(n),
            eta: take(n),
            tau: take(n),
            tau_raw: take(n),
            theta_hat: take(p),
            v: vals[want.len() - 1],
            k_e: DVector::zeros(0),
        };
        if let Some(prev) = records.last().map(|r: &TraceRecord| r.t) {
            if !(rec.t > prev) {
                return Err(Error::TraceParse(format!(
                    "line {lineno}: time {} does not increase",
                    rec.t
                )));
            }
        }
        records.push(rec);
    }
    Ok(Trace { records })
}
