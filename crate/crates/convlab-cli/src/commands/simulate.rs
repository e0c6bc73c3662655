use crate::cli::{PolicyKind, SidedArg, SimulateArgs};
use crate::manifest::{sibling_manifest, RunManifest};
use crate::output::{full, write_atomic, CliResult};
use convlab::policies::{
    realized_growth_stats, wealth_path, Policy, Sided, ThresholdPolicy,
};
use convlab::process::{simulate_with, OuParams, PathGrid, Start};

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let params = OuParams::new(args.alpha, args.sigma)?;
    let grid = PathGrid::new(args.dt, args.steps, args.common.seed)?;
    let start = if args.stationary {
        Start::Stationary
    } else {
        Start::Fixed(args.x0)
    };
    let path = simulate_with(&params, &grid, start, 0);

    let policy = match args.policy {
        PolicyKind::None => Policy::linear(0.0)?,
        PolicyKind::Linear => Policy::linear(args.k)?,
        PolicyKind::Threshold => {
            let sided = match args.sided {
                SidedArg::One => Sided::OneSided,
                SidedArg::Two => Sided::Symmetric,
            };
            Policy::Threshold(
                ThresholdPolicy::new(args.open_threshold, args.close_threshold, args.leverage)?
                    .with_sided(sided),
            )
        }
    };
    let wealth = wealth_path(&path, &policy, args.cost)?;

    let mut body = String::from("step,t,x,u\n");
    for (k, (&x, &u)) in path.values().iter().zip(wealth.values()).enumerate() {
        body.push_str(&format!(
            "{},{},{},{}\n",
            k,
            full(k as f64 * args.dt),
            full(x),
            full(u)
        ));
    }
    write_atomic(&args.out, &body)?;
    let mut outputs = vec![args.out.clone()];

    if let Some(price_path) = &args.price_csv {
        // price = exp(x) against a unit NAV reproduces x = ln(price/nav)
        let mut prices = String::from("date,price,nav\n");
        let epoch = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        for (k, &x) in path.values().iter().enumerate() {
            let date = epoch + chrono::Duration::days(k as i64);
            prices.push_str(&format!("{},{},1\n", date.format("%Y-%m-%d"), full(x.exp())));
        }
        write_atomic(price_path, &prices)?;
        outputs.push(price_path.clone());
    }

    let stats = realized_growth_stats(&wealth, args.dt);
    println!("steps            {}", args.steps);
    println!("terminal x       {}", full(*path.values().last().unwrap()));
    println!("terminal u       {}", full(stats.terminal));
    println!("growth per time  {}", full(stats.growth_rate));
    match stats.variance_rate {
        Some(v) => println!("variance rate    {}", full(v)),
        None => println!("variance rate    undefined (path too short)"),
    }
    println!("transactions     {}", wealth.transactions());

    RunManifest::new("simulate", args, outputs)?.write(&sibling_manifest(&args.out))?;
    Ok(())
}
