//! One function per subcommand.

use anyhow::{bail, Result};
use randtime_lse::estimator::expected_q_limit;
use randtime_lse::model::sample_increments;
use randtime_lse::montecarlo::{self, report, ExperimentConfig, McReport};
use randtime_lse::oracle::{
    exact_mean_q_js, exact_mean_q_rs, exact_second_moment_na_js, exact_second_moment_na_rs,
    exact_second_moment_q_rs, exact_variance_q_rs,
};
use randtime_lse::rng::stream;
use randtime_lse::sampling::{self, effective_count, tail_asymptotic, JitterKind};
use serde_json::json;
use std::path::PathBuf;

use crate::config::{resolve, Defaults, Resolved, RunArgs, SchemeArg};
use crate::output::{histogram_svg, trace_svg, Outputs};

pub const SIMULATE_TIMES_N: [usize; 3] = [10, 100, 1000];
pub const MC_N: usize = 5000;
pub const MC_REPS: usize = 10_000;
pub const TAIL_ALPHAS: [f64; 5] = [0.95, 0.96, 0.97, 0.98, 0.99];
pub const TAIL_N: [usize; 3] = [100, 1000, 10_000];
pub const TRACE_N: [usize; 10] = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];
pub const TRACE_REPS: usize = 200;

fn defaults(n: &[usize], reps: usize) -> Defaults {
    Defaults {
        n: n.to_vec(),
        reps,
        alpha: None,
        scheme: SchemeArg::Jittered,
    }
}

pub fn simulate_times(args: RunArgs) -> Result<PathBuf> {
    let cfg = resolve(args, defaults(&SIMULATE_TIMES_N, 1))?;
    let mut out = Outputs::new("simulate-times", &cfg.out_dir)?;
    let mut grids = Vec::new();
    for &n in &cfg.n {
        let scheme = cfg.scheme_at(n)?;
        let mut rng = stream(cfg.seed, n as u64);
        let grid = sampling::generate(&scheme, &mut rng)?;
        let dw = sample_increments(&grid, &mut rng);
        let t = grid.times();
        out.write(&format!("grid_n{n}.csv"), |w| {
            writeln!(w, "i,tau_i,gap")?;
            for (i, &x) in t.iter().enumerate() {
                let gap = if i == 0 { 0.0 } else { x - t[i - 1] };
                writeln!(w, "{i},{x:?},{gap:?}")?;
            }
            Ok(())
        })?;
        out.write(&format!("increments_n{n}.csv"), |w| {
            writeln!(w, "i,tau_i,dw,w,y")?;
            writeln!(w, "0,0.0,0.0,0.0,0.0")?;
            let mut path = 0.0;
            for (i, d) in dw.iter().enumerate() {
                path += d;
                let tau = t[i + 1];
                writeln!(w, "{},{tau:?},{d:?},{path:?},{:?}", i + 1, cfg.drift * tau + path)?;
            }
            Ok(())
        })?;
        println!(
            "{} N={n}: {} points, last time {:.6}{}",
            scheme.name(),
            t.len() - 1,
            t[t.len() - 1],
            if grid.exceeded() { " (exceeds 1)" } else { "" }
        );
        grids.push(json!({
            "n": n,
            "points": t.len() - 1,
            "observed": grid.n_obs(),
            "last_time": t[t.len() - 1],
            "exceeded": grid.exceeded(),
        }));
    }
    out.finish(cfg, json!({ "grids": grids }))
}

fn write_mc(out: &mut Outputs, cfg: &Resolved, report: &McReport) -> Result<()> {
    let n = report.config.scheme.n();
    let scheme = report.config.scheme;
    out.write(&format!("mc_n{n}_replications.csv"), |w| {
        report::write_records_csv(w, &scheme, &report.records)
    })?;
    out.write(&format!("mc_n{n}_summary.json"), |w| {
        writeln!(w, "{}", report::summary_json(report))
    })?;
    out.write(&format!("mc_n{n}_histograms.csv"), |w| {
        report::write_histograms_csv(w, &report.summaries)
    })?;
    if cfg.svg {
        for s in &report.summaries {
            let h = &s.histogram;
            let key = s.statistic.key();
            out.write(&format!("mc_n{n}_{key}.svg"), |w| {
                histogram_svg(w, s.statistic.label(), &h.edges, &h.counts)
            })?;
        }
    }
    print!("{}", report::format_table(report));
    Ok(())
}

pub fn mc(args: RunArgs) -> Result<PathBuf> {
    let cfg = resolve(args, defaults(&[MC_N], MC_REPS))?;
    let mut out = Outputs::new("mc", &cfg.out_dir)?;
    let mut config = ExperimentConfig::new(cfg.scheme_at(cfg.n[0])?, cfg.reps, cfg.seed);
    config.drift = cfg.drift;
    config.exclude_exceeded = cfg.exclude_exceeded;
    config.threads = cfg.threads;
    let reports = if cfg.n.len() == 1 {
        vec![montecarlo::run_replications(&config)?]
    } else {
        config.n_sweep = Some(cfg.n.clone());
        montecarlo::run_sweep(&config)?
    };
    for report in &reports {
        write_mc(&mut out, &cfg, report)?;
    }
    out.finish(cfg, serde_json::Value::Null)
}

struct MomentLine {
    quantity: &'static str,
    n: usize,
    exact: f64,
    limit: f64,
}

pub fn moments(args: RunArgs) -> Result<PathBuf> {
    let scheme_default = args.scheme.unwrap_or(SchemeArg::Jittered);
    let n_default: Vec<usize> = match scheme_default {
        SchemeArg::Jittered => vec![2, 3, 5, 10, 100, 1000, 10_000],
        SchemeArg::Renewal => vec![1, 2, 3, 5, 10, 100, 1000, 10_000],
    };
    let mut cfg = resolve(args, defaults(&n_default, 1))?;
    let alpha = cfg.single_alpha()?;
    if cfg.n == n_default {
        // The n = 1 row only exists when α = 1.
        cfg.n.retain(|&n| effective_count(alpha, n) >= 1);
    }
    let mut lines = Vec::new();
    let mut c1 = None;
    for &n in &cfg.n {
        match cfg.scheme {
            SchemeArg::Jittered => {
                if alpha != 1.0 {
                    bail!("jittered sampling observes the whole interval; --alpha must be 1");
                }
                let k = JitterKind::from(cfg.noise).second_moment_coefficient();
                c1 = Some(k);
                let limit = 1.0 / 3.0;
                lines.push(MomentLine {
                    quantity: "second_moment_na",
                    n,
                    exact: exact_second_moment_na_js(n, k)?.value,
                    limit,
                });
                lines.push(MomentLine {
                    quantity: "mean_q",
                    n,
                    exact: exact_mean_q_js(n, k)?.value,
                    limit,
                });
            }
            SchemeArg::Renewal => {
                let limit = alpha.powi(3) / 3.0;
                lines.push(MomentLine {
                    quantity: "second_moment_na",
                    n,
                    exact: exact_second_moment_na_rs(n, alpha)?.value,
                    limit,
                });
                lines.push(MomentLine {
                    quantity: "mean_q",
                    n,
                    exact: exact_mean_q_rs(n, alpha)?.value,
                    limit,
                });
                lines.push(MomentLine {
                    quantity: "second_moment_q",
                    n,
                    exact: exact_second_moment_q_rs(n, alpha)?.value,
                    limit: limit * limit,
                });
                lines.push(MomentLine {
                    quantity: "variance_q",
                    n,
                    exact: exact_variance_q_rs(n, alpha)?,
                    limit: 0.0,
                });
            }
        }
    }
    let mut out = Outputs::new("moments", &cfg.out_dir)?;
    out.write("moments.csv", |w| {
        writeln!(w, "quantity,n,exact,limit,gap,gap_n")?;
        for l in &lines {
            let gap = l.exact - l.limit;
            writeln!(w, "{},{},{:?},{:?},{:?},{:?}", l.quantity, l.n, l.exact, l.limit, gap, gap * l.n as f64)?;
        }
        Ok(())
    })?;
    println!("{:<18}{:>8}{:>20}{:>14}{:>16}{:>14}", "quantity", "n", "exact", "limit", "gap", "gap*n");
    for l in &lines {
        let gap = l.exact - l.limit;
        println!(
            "{:<18}{:>8}{:>20.12}{:>14.8}{:>16.3e}{:>14.6}",
            l.quantity,
            l.n,
            l.exact,
            l.limit,
            gap,
            gap * l.n as f64
        );
    }
    out.finish(cfg, json!({ "c1": c1 }))
}

pub fn tail_table(args: RunArgs) -> Result<PathBuf> {
    let cfg = resolve(
        args,
        Defaults {
            n: TAIL_N.to_vec(),
            reps: 10_000,
            alpha: Some(TAIL_ALPHAS.to_vec()),
            scheme: SchemeArg::Renewal,
        },
    )?;
    let cells = montecarlo::exceedance_table(&cfg.alpha, &cfg.n, cfg.reps, cfg.seed, cfg.threads)?;
    let mut out = Outputs::new("tail-table", &cfg.out_dir)?;
    out.write("tail_table.csv", |w| report::write_exceedance_csv(w, &cells))?;
    out.write("tail_matrix.csv", |w| {
        write!(w, "alpha")?;
        for n in &cfg.n {
            write!(w, ",n{n}")?;
        }
        writeln!(w)?;
        for (row, alpha) in cells.chunks(cfg.n.len()).zip(&cfg.alpha) {
            write!(w, "{alpha:?}")?;
            for c in row {
                write!(w, ",{}", c.count)?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    println!(
        "{:>6}{:>8}{:>8}{:>12}{:>14}{:>14}{:>12}",
        "alpha", "n", "count", "expected", "exact", "asymptotic", "99% band"
    );
    for c in &cells {
        let asym = tail_asymptotic(c.alpha, c.n).map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "{:>6}{:>8}{:>8}{:>12.2}{:>14.4e}{:>14}{:>12}",
            c.alpha,
            c.n,
            c.count,
            c.expected,
            c.probability,
            asym,
            format!("[{},{}]", c.band_low, c.band_high)
        );
    }
    let outside: Vec<_> = cells
        .iter()
        .filter(|c| !c.within_band())
        .map(|c| json!({ "alpha": c.alpha, "n": c.n }))
        .collect();
    out.finish(cfg, json!({ "outside_band": outside }))
}

pub fn qn_trace(args: RunArgs) -> Result<PathBuf> {
    let cfg = resolve(args, defaults(&TRACE_N, TRACE_REPS))?;
    let template = cfg.scheme_at(cfg.n[0])?;
    let rows = montecarlo::qn_trace(&template, &cfg.n, cfg.reps, cfg.seed, cfg.threads)?;
    let mut out = Outputs::new("qn-trace", &cfg.out_dir)?;
    out.write("qn_trace.csv", |w| report::write_trace_csv(w, &rows))?;
    if cfg.svg {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mean_q)).collect();
        out.write("qn_trace.svg", |w| {
            trace_svg(w, "mean Q_N", &points, expected_q_limit(&template))
        })?;
    }
    println!("{:>8}{:>16}{:>14}{:>14}{:>14}", "n", "mean Q_N", "std error", "limit", "deviation");
    for r in &rows {
        println!(
            "{:>8}{:>16.9}{:>14.3e}{:>14.9}{:>14.3e}",
            r.n, r.mean_q, r.std_error, r.limit, r.deviation
        );
    }
    out.finish(cfg, serde_json::Value::Null)
}
