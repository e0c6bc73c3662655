use crate::cli::{BacktestArgs, MetricArg, OutFormat, SidedArg};
use crate::manifest::RunManifest;
use crate::output::{full, pct4, sig6, with_thread_cap, write_atomic, CliResult};
use convlab::backtest::{
    emit_contours, grid_search, BacktestConfig, GridResult, Metric, StrategyGrid,
};
use convlab::policies::Sided;
use convlab::process::Ar1Params;
use std::path::PathBuf;

pub fn run(args: &BacktestArgs) -> CliResult<()> {
    let process = Ar1Params::new(args.beta, args.sigma_d)?;
    let sided = match args.sided {
        SidedArg::One => Sided::OneSided,
        SidedArg::Two => Sided::Symmetric,
    };
    let config = BacktestConfig::new(
        process,
        args.realizations,
        args.steps,
        args.cost,
        args.common.seed,
        sided,
    )?;
    let grid = StrategyGrid::from_candidates(
        args.open_thresholds.0.clone(),
        args.close_thresholds.0.clone(),
    )?;

    let mut result = with_thread_cap(args.common.threads, || grid_search(&config, &grid))?;
    // leverage scales mean and std; applied here so the table reflects --L
    if args.leverage != 1.0 {
        for cell in &mut result.cells {
            cell.stats.mean_daily *= args.leverage;
            cell.stats.std_daily = cell.stats.std_daily.map(|s| s * args.leverage);
        }
    }

    println!("cells evaluated  {}", result.cells.len());
    for (metric, label) in [(Metric::Mean, "mean"), (Metric::Sharpe, "sharpe")] {
        match result.argmax(metric) {
            Some(cell) => println!(
                "argmax {label:<6}  S = {} s = {} value = {}",
                full(cell.open_threshold),
                full(cell.close_threshold),
                full(match metric {
                    Metric::Mean => cell.stats.mean_daily,
                    Metric::Sharpe => cell.stats.sharpe.unwrap_or(f64::NAN),
                    Metric::Std => unreachable!(),
                })
            ),
            None => println!("argmax {label:<6}  undefined on this grid"),
        }
    }

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let mut outputs = Vec::new();
        outputs.push(write_grid(&result, dir, args.common.format)?);
        let metrics: Vec<Metric> = match args.metric {
            MetricArg::Mean => vec![Metric::Mean],
            MetricArg::Std => vec![Metric::Std],
            MetricArg::Sharpe => vec![Metric::Sharpe],
            MetricArg::All => vec![Metric::Mean, Metric::Std, Metric::Sharpe],
        };
        for metric in metrics {
            outputs.push(write_contour(&result, metric, dir, args.common.format)?);
        }
        RunManifest::new("backtest", args, outputs)?.write(&dir.join("manifest.json"))?;
    }
    Ok(())
}

fn write_grid(result: &GridResult, dir: &std::path::Path, format: OutFormat) -> CliResult<PathBuf> {
    let path = dir.join(match format {
        OutFormat::Csv => "grid.csv",
        OutFormat::Json => "grid.ndjson",
    });
    let mut body = String::new();
    match format {
        OutFormat::Csv => {
            body.push_str("S,s,mean_daily,std_daily,sharpe,n\n");
            for cell in &result.cells {
                body.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    full(cell.open_threshold),
                    full(cell.close_threshold),
                    full(cell.stats.mean_daily),
                    cell.stats.std_daily.map(full).unwrap_or_default(),
                    cell.stats.sharpe.map(full).unwrap_or_default(),
                    cell.stats.n
                ));
            }
        }
        OutFormat::Json => {
            for cell in &result.cells {
                let record = serde_json::json!({
                    "S": cell.open_threshold,
                    "s": cell.close_threshold,
                    "mean_daily": cell.stats.mean_daily,
                    "std_daily": cell.stats.std_daily,
                    "sharpe": cell.stats.sharpe,
                    "n": cell.stats.n,
                });
                body.push_str(&record.to_string());
                body.push('\n');
            }
        }
    }
    write_atomic(&path, &body)?;
    Ok(path)
}

/// Long-format contour table `S_pct,Sms_pct,value` (axes in percent, value
/// to six significant digits). Cells where the metric is undefined are
/// omitted from CSV and null in JSON.
fn write_contour(
    result: &GridResult,
    metric: Metric,
    dir: &std::path::Path,
    format: OutFormat,
) -> CliResult<PathBuf> {
    let rows = emit_contours(result, metric);
    let path = dir.join(match format {
        OutFormat::Csv => format!("contour_{}.csv", metric.name()),
        OutFormat::Json => format!("contour_{}.ndjson", metric.name()),
    });
    let mut body = String::new();
    match format {
        OutFormat::Csv => {
            body.push_str("S_pct,Sms_pct,value\n");
            for row in &rows {
                if let Some(value) = row.value {
                    body.push_str(&format!(
                        "{},{},{}\n",
                        pct4(row.open_pct),
                        pct4(row.spread_pct),
                        sig6(value)
                    ));
                }
            }
        }
        OutFormat::Json => {
            for row in &rows {
                let record = serde_json::json!({
                    "S_pct": row.open_pct,
                    "Sms_pct": row.spread_pct,
                    "value": row.value,
                });
                body.push_str(&record.to_string());
                body.push('\n');
            }
        }
    }
    write_atomic(&path, &body)?;
    Ok(path)
}
