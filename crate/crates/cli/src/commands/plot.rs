use std::collections::BTreeSet;
use std::fs;
use std::io::{BufReader, Write};

use crate::args::PlotArgs;
use crate::error::{create, open, CliError};
use crate::output::{fmt_f64, read_path_table, sidecar_path, Sidecar};
use crate::svg;

/// Dense coefficient trajectories of every feature that is ever nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct WideTable {
    pub lambdas: Vec<f64>,
    pub features: Vec<String>,
    /// `values[f][k]`: coefficient of `features[f]` at path point `k`.
    pub values: Vec<Vec<f64>>,
}

/// Rebuilds the wide table from a path table and its sidecar.
pub fn build_table(
    entries: &[crate::output::PathEntry],
    sidecar: &Sidecar,
) -> Result<WideTable, CliError> {
    let k_max = sidecar.lambdas.len();
    let mut used = BTreeSet::new();
    let position = |name: &str| sidecar.feature_names.iter().position(|f| f == name);
    for e in entries {
        if e.lambda_index > k_max {
            return Err(CliError::Data(format!(
                "path table references lambda_index {} but the sidecar has {k_max} points",
                e.lambda_index
            )));
        }
        if e.lambda != sidecar.lambdas[e.lambda_index - 1] {
            return Err(CliError::Data(format!(
                "lambda {} at index {} disagrees with the sidecar",
                e.lambda, e.lambda_index
            )));
        }
        let j = position(&e.feature)
            .ok_or_else(|| CliError::Data(format!("unknown feature '{}' in path table", e.feature)))?;
        used.insert(j);
    }
    let order: Vec<usize> = used.into_iter().collect();
    let mut values = vec![vec![0.0; k_max]; order.len()];
    for e in entries {
        let j = position(&e.feature).expect("checked above");
        let f = order.binary_search(&j).expect("collected above");
        values[f][e.lambda_index - 1] = e.coefficient;
    }
    Ok(WideTable {
        lambdas: sidecar.lambdas.clone(),
        features: order.iter().map(|&j| sidecar.feature_names[j].clone()).collect(),
        values,
    })
}

pub fn write_table<W: Write>(table: &WideTable, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["lambda_index".to_string(), "lambda".to_string()];
    header.extend(table.features.iter().cloned());
    out.write_record(&header)?;
    for (k, &lambda) in table.lambdas.iter().enumerate() {
        let mut row = vec![(k + 1).to_string(), fmt_f64(lambda)];
        row.extend(table.values.iter().map(|v| fmt_f64(v[k])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn run(args: &PlotArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sidecar_file = args.sidecar.clone().unwrap_or_else(|| sidecar_path(&args.input));
    let sidecar = Sidecar::read(BufReader::new(open(&sidecar_file)?))?;
    let entries = read_path_table(BufReader::new(open(&args.input)?))?;
    let table = build_table(&entries, &sidecar)?;

    write_table(&table, create(&args.output)?)?;
    writeln!(
        out,
        "wrote {} ({} path points, {} features ever nonzero)",
        args.output.display(),
        table.lambdas.len(),
        table.features.len()
    )?;
    if let Some(svg_path) = &args.svg {
        let title = format!("{} solution path ({})", sidecar.config.method, sidecar.config.family);
        let series: Vec<(String, Vec<f64>)> = table.features.iter().cloned().zip(table.values.iter().cloned()).collect();
        fs::write(svg_path, svg::render(&title, &table.lambdas, &series))?;
        writeln!(out, "wrote {}", svg_path.display())?;
    }
    Ok(())
}
