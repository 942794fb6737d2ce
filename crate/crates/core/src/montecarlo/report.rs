//! CSV and JSON emitters for Monte Carlo output.
//!
//! Floats are written with Rust's shortest round-trip formatting so a value
//! parsed back from the file is bit-identical to the one computed.

use super::{ExceedanceCell, McReport, McSummary, ReplicationRecord, TraceRow};
use crate::sampling::SamplingScheme;
use std::io::{self, Write};

pub const RECORD_HEADER: &str = "rep,n,scheme,alpha,na_n,n_ahat_err,q_n,eps,exceeded,na_n_alpha,q_full";

pub fn write_records_csv<W: Write>(mut w: W, scheme: &SamplingScheme, records: &[ReplicationRecord]) -> io::Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{:?},{:?},{:?},{:?},{:?},{},{:?},{:?}",
            r.rep,
            r.n,
            scheme.name(),
            scheme.alpha(),
            r.na_n,
            r.n_ahat_err,
            r.q_n,
            r.eps,
            u8::from(r.exceeded),
            r.na_n_alpha,
            r.q_full
        )?;
    }
    Ok(())
}

pub fn write_histograms_csv<W: Write>(mut w: W, summaries: &[McSummary]) -> io::Result<()> {
    writeln!(w, "statistic,bin,left,right,count")?;
    for s in summaries {
        let h = &s.histogram;
        for (i, c) in h.counts.iter().enumerate() {
            writeln!(w, "{},{},{:?},{:?},{}", s.statistic.key(), i, h.edges[i], h.edges[i + 1], c)?;
        }
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(mut w: W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(w, "n,mean_q,std_error,limit,deviation")?;
    for r in rows {
        writeln!(w, "{},{:?},{:?},{:?},{:?}", r.n, r.mean_q, r.std_error, r.limit, r.deviation)?;
    }
    Ok(())
}

pub fn write_exceedance_csv<W: Write>(mut w: W, cells: &[ExceedanceCell]) -> io::Result<()> {
    writeln!(w, "alpha,n,reps,count,probability,expected,band_low,band_high")?;
    for c in cells {
        writeln!(
            w,
            "{:?},{},{},{},{:?},{:?},{},{}",
            c.alpha, c.n, c.reps, c.count, c.probability, c.expected, c.band_low, c.band_high
        )?;
    }
    Ok(())
}

pub fn summary_json(report: &McReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// One table line per statistic: label, mean, variance, limit variance.
pub fn format_table(report: &McReport) -> String {
    let scheme = &report.config.scheme;
    let mut out = format!(
        "{} sampling, N={}, alpha={}, R={} (used {})\n{:<14}{:>16}{:>16}{:>14}{:>12}\n",
        scheme.name(),
        scheme.n(),
        scheme.alpha(),
        report.config.replications,
        report.summaries[0].replications_used,
        "statistic",
        "mean",
        "variance",
        "limit var",
        "KS"
    );
    for s in &report.summaries {
        let limit = s.limit_variance.map_or("-".to_string(), |v| format!("{v:.6}"));
        let ks = s.ks_distance.map_or("-".to_string(), |v| format!("{v:.5}"));
        out.push_str(&format!(
            "{:<14}{:>16.9}{:>16.9}{:>14}{:>12}\n",
            s.statistic.label(),
            s.mean,
            s.variance,
            limit,
            ks
        ));
    }
    if scheme.is_renewal() {
        out.push_str(&format!(
            "{:<14}{:>16.9}{:>16.9}{:>14}{:>12}\n",
            "N_a clock",
            report.na_n_alpha.mean,
            report.na_n_alpha.variance,
            format!("{:.6}", 1.0 / 3.0),
            "-"
        ));
    }
    out.push_str(&format!("exceeded: {}\n", report.summaries[0].exceed_count));
    out
}
