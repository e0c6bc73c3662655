use crate::cli::{AnalyzeArgs, OutFormat};
use crate::manifest::{sibling_manifest, RunManifest};
use crate::output::{full, with_thread_cap, write_atomic, CliResult};
use convlab::analytics::{
    linear_policy_rates, optimal_leverage_given_threshold, optimal_threshold_policy, phi, psi,
    reduced_utility, RiskPreference,
};
use convlab::process::OuParams;

struct Row {
    threshold: f64,
    phi: f64,
    psi: f64,
    leverage: f64,
    utility: f64,
}

pub fn run(args: &AnalyzeArgs) -> CliResult<()> {
    let params = OuParams::new(args.alpha, args.sigma)?;
    let stat_var = params.stationary_variance();

    if args.gamma == 0.0 {
        // The growth-optimal investor has no finite threshold leverage:
        // utility is linear in L. Report the linear-rule rates instead.
        let rates = linear_policy_rates(1.0, &params)?;
        println!("gamma = 0: threshold leverage is unbounded (utility is linear in L).");
        println!("Linear rule per unit sensitivity k:");
        println!("  growth rate            {} * k", full(rates.growth_rate));
        println!("  variance growth rate   0");
        println!(
            "  long-run wealth var    {} * k^2 (deterministic start)",
            full(rates.long_run_wealth_variance)
        );
        return Ok(());
    }

    let pref = RiskPreference::new(args.gamma)?;
    let rows: CliResult<Vec<Row>> = with_thread_cap(args.common.threads, || {
        args.thresholds
            .0
            .iter()
            .map(|&threshold| {
                Ok(Row {
                    threshold,
                    phi: phi(threshold, stat_var)?,
                    psi: psi(threshold, args.alpha, stat_var)?,
                    leverage: optimal_leverage_given_threshold(threshold, &params, &pref)?,
                    utility: reduced_utility(threshold, &params, &pref)?,
                })
            })
            .collect()
    });
    let rows = rows?;
    let best = optimal_threshold_policy(&params, &pref)?;

    println!(
        "{:>10} {:>14} {:>14} {:>14} {:>14}",
        "S", "phi", "psi", "L(S)", "U(S)"
    );
    for row in &rows {
        println!(
            "{:>10} {:>14} {:>14} {:>14} {:>14}",
            format!("{:.6}", row.threshold),
            format!("{:.6e}", row.phi),
            format!("{:.6e}", row.psi),
            format!("{:.6e}", row.leverage),
            format!("{:.6e}", row.utility),
        );
    }
    println!(
        "optimum: S = 0, L = {}, U = {}",
        full(best.leverage),
        full(best.utility)
    );

    if let Some(out) = &args.out {
        let body = match args.common.format {
            OutFormat::Csv => {
                let mut body = String::from("S,phi,psi,L,U\n");
                for r in &rows {
                    body.push_str(&format!(
                        "{},{},{},{},{}\n",
                        full(r.threshold),
                        full(r.phi),
                        full(r.psi),
                        full(r.leverage),
                        full(r.utility)
                    ));
                }
                body
            }
            OutFormat::Json => {
                let mut body = String::new();
                for r in &rows {
                    let record = serde_json::json!({
                        "S": r.threshold,
                        "phi": r.phi,
                        "psi": r.psi,
                        "L": r.leverage,
                        "U": r.utility,
                    });
                    body.push_str(&record.to_string());
                    body.push('\n');
                }
                body
            }
        };
        write_atomic(out, &body)?;
        RunManifest::new("analyze", args, vec![out.clone()])?.write(&sibling_manifest(out))?;
    }
    Ok(())
}
