use crate::cli::{EstimateArgs, OutFormat};
use crate::manifest::{sibling_manifest, RunManifest};
use crate::output::{full, write_atomic, CliResult};
use convlab::estimation::{
    ar1_ols, ar1_ols_with_intercept, mispricing, summary_stats, PriceSeries,
};

pub fn run(args: &EstimateArgs) -> CliResult<()> {
    let series = PriceSeries::from_csv_path(&args.input)?;
    let x = mispricing(&series);
    let summary = summary_stats(&x);

    println!("observations     {}", summary.n);
    println!("mean x           {}", full(summary.mean));
    println!("std x            {}", full(summary.std));
    println!("min x            {}", full(summary.min));
    println!("max x            {}", full(summary.max));

    let fit = if args.intercept {
        ar1_ols_with_intercept(&x)
    } else {
        ar1_ols(&x)
    };
    let fit = match fit {
        Ok(fit) => fit,
        Err(e) => {
            // the summary above still stands; the regression does not
            println!("fit              unavailable: {e}");
            return Err(e.into());
        }
    };

    println!("beta_hat         {}", full(fit.beta_hat));
    println!("beta_stderr      {}", full(fit.beta_stderr));
    println!("sigma_hat        {}", full(fit.sigma_hat));
    if args.intercept {
        println!("intercept        {}", full(fit.intercept));
    }
    println!("durbin_watson    {}", full(fit.durbin_watson));

    match fit.to_params() {
        Ok(ar1) => {
            let ou = ar1.to_ou(args.dt);
            println!("implied alpha    {} per time unit (dt = {})", full(ou.alpha()), args.dt);
            println!("implied sigma    {}", full(ou.sigma()));
            println!("implied Sigma    {}", full(ou.stationary_variance()));
        }
        Err(e) => println!("implied process  unavailable: {e}"),
    }

    if let Some(out) = &args.out {
        let body = match args.common.format {
            OutFormat::Json => {
                let record = serde_json::json!({
                    "n": summary.n,
                    "mean": summary.mean,
                    "std": summary.std,
                    "min": summary.min,
                    "max": summary.max,
                    "beta_hat": fit.beta_hat,
                    "beta_stderr": fit.beta_stderr,
                    "sigma_hat": fit.sigma_hat,
                    "intercept": fit.intercept,
                    "durbin_watson": fit.durbin_watson,
                });
                format!("{record}\n")
            }
            OutFormat::Csv => {
                let mut body =
                    String::from("n,mean,std,min,max,beta_hat,beta_stderr,sigma_hat,durbin_watson\n");
                body.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    summary.n,
                    full(summary.mean),
                    full(summary.std),
                    full(summary.min),
                    full(summary.max),
                    full(fit.beta_hat),
                    full(fit.beta_stderr),
                    full(fit.sigma_hat),
                    full(fit.durbin_watson)
                ));
                body
            }
        };
        write_atomic(out, &body)?;
        RunManifest::new("estimate", args, vec![out.clone()])?.write(&sibling_manifest(out))?;
    }
    Ok(())
}
