use std::fmt::Write;

use super::sweep::ConvergenceRecord;
use crate::error::{DwdgError, Result};

pub const CSV_HEADER: &str =
    "example,k,gamma,N,h,dof_state,dof_control,err_y_energy,rate_y,err_p_energy,rate_p,err_u_l2,rate_u,pdas_iters";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Three significant digits with a signed two-digit exponent: `5.46e-01`.
pub fn format_error(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Two decimals, or `--` where no rate exists.
pub fn format_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "--".to_string(), |r| format!("{r:.2}"))
}

fn h_label(n: usize) -> String {
    format!("1/{}", 2 * n)
}

pub fn emit_table(records: &[ConvergenceRecord], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => emit_csv(records),
        TableFormat::Markdown => emit_markdown(records),
    }
}

fn emit_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.example,
            r.k,
            r.gamma,
            r.n,
            r.h,
            r.dof_state,
            r.dof_control,
            format_error(r.err_y_energy),
            format_rate(r.rate_y),
            format_error(r.err_p_energy),
            format_rate(r.rate_p),
            format_error(r.err_u_l2),
            format_rate(r.rate_u),
            r.pdas_iters
        )
        .expect("writing to a String");
    }
    out
}

type Column = (&'static str, fn(&ConvergenceRecord) -> (f64, Option<f64>), fn(&ConvergenceRecord) -> usize);

fn emit_markdown(records: &[ConvergenceRecord]) -> String {
    let columns: [Column; 3] = [
        ("State energy error", |r| (r.err_y_energy, r.rate_y), |r| r.dof_state),
        ("Adjoint energy error", |r| (r.err_p_energy, r.rate_p), |r| r.dof_state),
        ("Control L2 error", |r| (r.err_u_l2, r.rate_u), |r| r.dof_control),
    ];
    let mut cases: Vec<(u8, usize)> = Vec::new();
    for r in records {
        if !cases.contains(&(r.example, r.k)) {
            cases.push((r.example, r.k));
        }
    }
    let mut out = String::new();
    for (example, k) in cases {
        let rows: Vec<&ConvergenceRecord> = records.iter().filter(|r| (r.example, r.k) == (example, k)).collect();
        let mut gammas: Vec<f64> = Vec::new();
        let mut levels: Vec<usize> = Vec::new();
        for r in &rows {
            if !gammas.contains(&r.gamma) {
                gammas.push(r.gamma);
            }
            if !levels.contains(&r.n) {
                levels.push(r.n);
            }
        }
        levels.sort_unstable();
        for (title, value, dofs) in columns {
            writeln!(out, "### Example {example}, k = {k}: {title}\n").unwrap();
            out.push_str("| h | DOF |");
            for g in &gammas {
                write!(out, " γ = {g} | rate |").unwrap();
            }
            out.push_str("\n|---|---|");
            out.push_str(&"---|---|".repeat(gammas.len()));
            out.push('\n');
            for &n in &levels {
                let first = rows.iter().find(|r| r.n == n).expect("level present");
                write!(out, "| {} | {} |", h_label(n), dofs(first)).unwrap();
                for &g in &gammas {
                    match rows.iter().find(|r| r.n == n && r.gamma == g) {
                        Some(r) => {
                            let (e, rate) = value(r);
                            write!(out, " {} | {} |", format_error(e), format_rate(rate)).unwrap();
                        }
                        None => out.push_str(" | |"),
                    }
                }
                out.push('\n');
            }
            out.push('\n');
        }
    }
    out
}

/// Reads back CSV produced by [`emit_table`]; rows are taken as converged.
pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(DwdgError::InvalidConfig("missing CSV header".into()));
    }
    let bad = |line: &str| DwdgError::InvalidConfig(format!("malformed CSV row: {line}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 14 {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
            let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(line));
            let rate = |i: usize| if f[i] == "--" { Ok(None) } else { num(i).map(Some) };
            Ok(ConvergenceRecord {
                example: f[0].parse().map_err(|_| bad(line))?,
                k: int(1)?,
                gamma: num(2)?,
                n: int(3)?,
                h: num(4)?,
                dof_state: int(5)?,
                dof_control: int(6)?,
                err_y_energy: num(7)?,
                rate_y: rate(8)?,
                err_p_energy: num(9)?,
                rate_p: rate(10)?,
                err_u_l2: num(11)?,
                rate_u: rate(12)?,
                pdas_iters: int(13)?,
                converged: true,
            })
        })
        .collect()
}
