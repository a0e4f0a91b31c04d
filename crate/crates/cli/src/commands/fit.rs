use std::io::{BufReader, BufWriter, Write};

use pathwise::{fit_path, read_csv, Family, ObjectiveSpec, PathConfig, RegularizerKind, RegularizerSpec, ResponseColumn};

use crate::args::{FamilyArg, FitArgs, SolverArgs};
use crate::error::{create, open, CliError};
use crate::output::{sidecar_path, write_path_table, ConfigEcho, Sidecar};

/// Regularizer and path settings from the shared solver flags.
pub(crate) fn solver_settings(s: &SolverArgs) -> Result<(RegularizerSpec, PathConfig), CliError> {
    let kind = RegularizerKind::from(s.method);
    if kind == RegularizerKind::L1 && s.gamma.is_some() {
        return Err(CliError::Usage("--gamma applies only to --method mcp or scad".into()));
    }
    let penalty = RegularizerSpec::new(kind, s.gamma)?;
    let config = PathConfig {
        nlambda: s.nlambda,
        lambda_min_ratio: s.lambda_min_ratio,
        prec: s.prec,
        max_inner_sweeps: s.max_inner_sweeps,
        max_middle_rounds: s.max_middle_rounds,
        max_newton_steps: s.max_newton_steps,
        ..Default::default()
    };
    config.validate()?;
    Ok((penalty, config))
}

fn objective(args: &FitArgs) -> Result<ObjectiveSpec, CliError> {
    let family = Family::from(args.solver.family);
    match args.type_gaussian {
        Some(update) if args.solver.family == FamilyArg::Gaussian => Ok(ObjectiveSpec::gaussian(update.into())),
        Some(_) => Err(CliError::Usage(format!(
            "--type-gaussian applies only to --family gaussian, not {family}"
        ))),
        None => Ok(ObjectiveSpec::new(family)),
    }
}

pub fn run(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    // Every flag is checked before the data are touched.
    let (penalty, config) = solver_settings(&args.solver)?;
    let objective = objective(args)?;
    let Ok(response) = args.response.parse::<ResponseColumn>();
    if sidecar_path(&args.output) == args.output {
        return Err(CliError::Usage(format!(
            "--output {} would be overwritten by its own JSON sidecar; use another extension",
            args.output.display()
        )));
    }

    let data = read_csv(BufReader::new(open(&args.input)?), args.header, &response)?;
    let fit = fit_path(&data, &objective, &penalty, &config)?;

    let echo = ConfigEcho {
        method: penalty.kind().to_string(),
        family: args.solver.family.name().to_string(),
        type_gaussian: (objective.family() == Family::Gaussian).then(|| objective.gaussian_update().to_string()),
        gamma: penalty.gamma(),
        nlambda: config.nlambda,
        lambda_min_ratio: config.lambda_min_ratio,
        prec: config.prec,
        max_inner_sweeps: config.max_inner_sweeps,
        max_middle_rounds: config.max_middle_rounds,
        max_newton_steps: config.max_newton_steps,
        response: args.response.clone(),
        header: args.header,
    };
    let sidecar = Sidecar::new(&fit, echo, data.n());

    let mut table = BufWriter::new(create(&args.output)?);
    write_path_table(&fit, &mut table)?;
    table.flush()?;
    let json_path = sidecar_path(&args.output);
    let mut json = BufWriter::new(create(&json_path)?);
    sidecar.write(&mut json)?;
    json.flush()?;

    let nnz_last = fit.beta_path.column_nnz(fit.len().saturating_sub(1));
    writeln!(
        out,
        "fitted {} path points ({} {}, n={}, d={}), lambda {:.6} -> {:.6}, {} nonzero at the last point",
        fit.len(),
        penalty.kind(),
        sidecar.config.family,
        data.n(),
        data.d(),
        fit.lambdas.first().copied().unwrap_or(f64::NAN),
        fit.lambdas.last().copied().unwrap_or(f64::NAN),
        nnz_last,
    )?;
    let max_kkt = fit.kkt_residuals().into_iter().fold(0.0f64, f64::max);
    writeln!(out, "max KKT residual {max_kkt:.3e}, {} non-converged", sidecar.nonconverged.len())?;
    if let Some(reason) = &fit.stopped_early {
        writeln!(out, "path stopped early: {reason}")?;
    }
    writeln!(out, "wrote {} and {}", args.output.display(), json_path.display())?;

    if args.strict && !sidecar.nonconverged.is_empty() {
        return Err(CliError::Convergence(format!(
            "{} path point(s) did not converge (first at lambda_index {}); see {}",
            sidecar.nonconverged.len(),
            sidecar.nonconverged[0],
            json_path.display()
        )));
    }
    Ok(())
}
