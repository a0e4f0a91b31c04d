use std::io::{BufWriter, Write};

use pathwise::harness::{run_benchmark, BenchReport, BenchSpec, RunSummary};
use pathwise::Family;

use crate::args::BenchArgs;
use crate::commands::fit::solver_settings;
use crate::error::{create, CliError};

pub fn spec_from_args(args: &BenchArgs) -> Result<BenchSpec, CliError> {
    let (regularizer, config) = solver_settings(&args.solver)?;
    if args.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    Ok(BenchSpec {
        n: args.n,
        d: args.d,
        sparsity: args.sparsity,
        rho: args.rho,
        noise_sd: args.noise_sd,
        family: Family::from(args.solver.family),
        regularizer,
        seed: args.seed,
        repetitions: args.repetitions,
        nlambda: config.nlambda,
        lambda_min_ratio: config.lambda_min_ratio,
        prec: config.prec,
        baseline: !args.no_baseline,
        max_cells: args.max_cells,
    })
}

fn row(out: &mut dyn Write, label: &str, r: &RunSummary) -> std::io::Result<()> {
    writeln!(
        out,
        "{label:<12} {:>10.4} {:>9.4} {:>16.8} {:>10} {:>12} {:>8}",
        r.mean_seconds, r.sd_seconds, r.final_objective, r.total_kkt_scans, r.total_inner_sweeps, r.nonconverged_points
    )
}

pub fn print_report(report: &BenchReport, out: &mut dyn Write) -> std::io::Result<()> {
    let s = &report.spec;
    writeln!(
        out,
        "{} {} n={} d={} s={} rho={} seed={}: {} repetitions x {} lambdas",
        s.family,
        s.regularizer.kind(),
        s.n,
        s.d,
        s.sparsity,
        s.rho,
        s.seed,
        s.repetitions,
        report.screened.path_points
    )?;
    writeln!(
        out,
        "{:<12} {:>10} {:>9} {:>16} {:>10} {:>12} {:>8}",
        "screening", "mean (s)", "sd (s)", "final objective", "KKT scans", "sweeps", "nonconv"
    )?;
    row(out, "strong rule", &report.screened)?;
    if let Some(b) = &report.baseline {
        row(out, "none", b)?;
    }
    if let Some(speedup) = report.speedup {
        writeln!(out, "speedup {speedup:.2}x")?;
    }
    Ok(())
}

pub fn run(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = spec_from_args(args)?;
    let report = run_benchmark(&spec)?;
    print_report(&report, out)?;
    if let Some(path) = &args.json {
        let mut w = BufWriter::new(create(path)?);
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}
