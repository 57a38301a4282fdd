//! Human-readable reports (6 significant digits) and CSV rows (17).

use std::fmt::Write as _;

use crate::matops::{RankTol, RowVec, C64};
use crate::verdicts::{AnalysisOutcome, Verdict};

/// Format a real number with `sig` significant digits, `%g` style: fixed
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// removed. Negative zero prints as `0`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= sig as i32 {
        return format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six-significant-digit real.
pub fn fmt6(x: f64) -> String {
    fmt_sig(x, 6)
}

/// Six-significant-digit complex number: `a`, `bi`, `a+bi` or `a-bi`.
pub fn fmt_complex(z: C64) -> String {
    let re = fmt6(z.re);
    let im_abs = fmt6(z.im.abs());
    match (re.as_str(), im_abs.as_str()) {
        (_, "0") => re,
        ("0", _) => format!("{}{}i", if z.im < 0.0 { "-" } else { "" }, im_abs),
        _ => format!("{}{}{}i", re, if z.im < 0.0 { '-' } else { '+' }, im_abs),
    }
}

/// Components below `1e-12` of the largest magnitude are printed as zero so
/// rounding noise does not clutter witnesses.
pub fn fmt_vector(v: &RowVec) -> String {
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clean = |x: f64| if x.abs() <= 1e-12 * big { 0.0 } else { x };
    let parts: Vec<String> = v
        .iter()
        .map(|z| fmt_complex(C64::new(clean(z.re), clean(z.im))))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_tol(t: RankTol) -> String {
    match t {
        RankTol::Auto => "auto".into(),
        RankTol::Absolute(x) => fmt6(x),
    }
}

fn write_verdict(out: &mut String, v: &Verdict, indent: &str) {
    let _ = write!(out, "{indent}{}: {}", v.method, v.status);
    if let Some(r) = v.diagnostics.reach_rank {
        let _ = write!(out, " (reach rank {}/{})", r, v.diagnostics.state_dim);
    }
    out.push('\n');
    if v.diagnostics.sufficiency_only {
        let _ = writeln!(out, "{indent}  sufficient condition only");
    }
    if let Some(w) = &v.witness {
        let _ = writeln!(
            out,
            "{indent}  witness: {} at eigenvalue {}",
            w.condition,
            fmt_complex(w.eigenvalue)
        );
        let _ = writeln!(out, "{indent}    vector: {}", fmt_vector(&w.vector));
        let _ = writeln!(out, "{indent}    residual: {}", fmt6(w.residual));
    }
    for (name, r) in &v.diagnostics.ranks {
        let _ = writeln!(out, "{indent}  rank {name}: {r}");
    }
    for c in &v.diagnostics.layer_checks {
        match &c.witness {
            None => {
                let _ = writeln!(
                    out,
                    "{indent}  layer {} intra-layer check at {}: pass",
                    c.layer,
                    fmt_complex(c.eigenvalue)
                );
            }
            Some(eta) => {
                let _ = writeln!(
                    out,
                    "{indent}  layer {} intra-layer check at {}: fails, eta = {}",
                    c.layer,
                    fmt_complex(c.eigenvalue),
                    fmt_vector(eta)
                );
            }
        }
    }
    for n in &v.diagnostics.notes {
        let _ = writeln!(out, "{indent}  note: {n}");
    }
}

/// Full analysis report.
pub fn render_report(source: &str, o: &AnalysisOutcome) -> String {
    let mut out = String::new();
    let req = &o.request;
    let _ = writeln!(out, "netsamp controllability report");
    let _ = writeln!(out, "input: {source}");
    let _ = writeln!(out, "structure: {}", o.structure.name());
    let _ = writeln!(
        out,
        "sampling: pattern {}, h = {}, l = {}",
        req.pattern,
        fmt6(req.h),
        req.l
    );
    let _ = writeln!(
        out,
        "dimensions: state {}, input {}",
        o.system.phi.nrows(),
        o.system.psi.ncols()
    );
    let _ = writeln!(
        out,
        "tolerances: rank {}, eig {}, residual {}",
        fmt_tol(req.tol.rank),
        fmt6(req.tol.eig),
        fmt6(req.tol.residual)
    );
    let _ = writeln!(out, "method: {}", req.method.name());
    out.push('\n');
    let _ = writeln!(out, "verdict:");
    write_verdict(&mut out, o.primary(), "  ");
    let others: Vec<&Verdict> = o
        .verdicts
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != o.primary)
        .map(|(_, v)| v)
        .collect();
    if !others.is_empty() {
        out.push('\n');
        let _ = writeln!(out, "cross-checks:");
        for v in others {
            write_verdict(&mut out, v, "  ");
        }
    }
    out.push('\n');
    let _ = writeln!(out, "status: {}", o.status);
    out
}

pub const CSV_HEADER: &str =
    "h,pattern,l,method,status,reach_rank,state_dim,witness_eig_re,witness_eig_im";

fn csv_float(x: f64) -> String {
    // 17 significant digits: exact round trip.
    format!("{:.16e}", if x == 0.0 { 0.0 } else { x })
}

/// One CSV row for an outcome (the reported method is the primary verdict).
pub fn csv_row(o: &AnalysisOutcome) -> String {
    let p = o.primary();
    let witness = p.witness.as_ref().or_else(|| {
        o.verdicts
            .iter()
            .find_map(|v| v.witness.as_ref().filter(|_| v.status == o.status))
    });
    let (re, im) = match witness {
        Some(w) => (csv_float(w.eigenvalue.re), csv_float(w.eigenvalue.im)),
        None => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        csv_float(o.request.h),
        o.request.pattern,
        o.request.l,
        p.method,
        p.status,
        o.reach_rank().map(|r| r.to_string()).unwrap_or_default(),
        o.state_dim(),
        re,
        im
    )
}
