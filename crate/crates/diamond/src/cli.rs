//! Command-line front end. See `main.rs` for the binary entry point; this
//! module is library code so the parsing and formatting logic is testable.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{cutset_bound, theorem1_upper_with_card, theorem2_lower, AuxCard, BoundReport};
use crate::closed_forms::{
    adder_match_report, adder_upper, gaussian_cutset, gaussian_lower, gaussian_lower_mixture,
    gaussian_upper, theorem3_report,
};
use crate::error::{Error, Result};
use crate::network::{load_mac, DiamondConfig, DiscreteMac, GaussianMacParams};
use crate::optim::SearchOpts;

#[derive(Debug, Parser)]
#[command(name = "diamond", version, about = "Capacity bounds for the two-relay diamond network")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Grid resolution per simplex dimension
    #[arg(long, default_value_t = 24)]
    resolution: usize,
    /// Number of random restarts for local ascent
    #[arg(long, default_value_t = 64)]
    multistarts: usize,
    /// RNG seed for reproducible searches
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn opts(&self) -> SearchOpts {
        SearchOpts {
            grid_steps: self.resolution,
            multistarts: self.multistarts,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct GaussianArgs {
    /// Power constraint of transmitter 1
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    p1: f64,
    /// Power constraint of transmitter 2
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    p2: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute cut-set, upper, and lower bounds at one configuration
    Bound {
        #[command(subcommand)]
        target: BoundTarget,
    },
    /// Sweep the symmetric bit-pipe capacity and emit CSV
    Sweep {
        #[command(subcommand)]
        target: SweepTarget,
    },
    /// Report the regimes where the bounds meet
    Match {
        #[command(subcommand)]
        target: MatchTarget,
    },
    /// Run internal consistency checks on random instances
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
}

#[derive(Debug, Subcommand)]
enum BoundTarget {
    /// Discrete memoryless MAC loaded from a channel JSON file
    Discrete {
        /// Path to the channel description (JSON)
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, allow_negative_numbers = true)]
        c2: f64,
        /// Auxiliary alphabet size override (default |Y| for the upper
        /// bound, the safe cap for the lower bound)
        #[arg(long)]
        aux_card: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Scalar Gaussian MAC with unit noise power
    Gaussian {
        #[command(flatten)]
        gaussian: GaussianArgs,
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, allow_negative_numbers = true)]
        c2: f64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
enum SweepTarget {
    /// Symmetric Gaussian network: columns include single and mixture lower bounds
    Gaussian {
        #[command(flatten)]
        gaussian: GaussianArgs,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        c_min: f64,
        #[arg(long, default_value_t = 1.3)]
        c_max: f64,
        #[arg(long, default_value_t = 65)]
        steps: usize,
        /// Matching tolerance for the `match` column
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Symmetric discrete network over a channel JSON file
    Discrete {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        c_min: f64,
        #[arg(long, default_value_t = 1.0)]
        c_max: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Debug, Subcommand)]
enum MatchTarget {
    /// Matching thresholds for the symmetric Gaussian network
    Gaussian {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        power: f64,
    },
    /// Matching thresholds for the binary adder network
    Adder,
}

fn report_to_text(name: &str, r: &BoundReport) -> String {
    format!("{name}: {:.6} (binding: {})", r.value, r.binding)
}

fn print_reports(format: Format, reports: &[(&str, BoundReport)]) {
    match format {
        Format::Json => {
            let obj: serde_json::Map<String, serde_json::Value> = reports
                .iter()
                .map(|(name, r)| {
                    (
                        name.to_string(),
                        json!({
                            "value": r.value,
                            "binding": r.binding,
                            "witness": r.witness,
                            "meta": r.meta,
                        }),
                    )
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
        }
        Format::Text => {
            for (name, r) in reports {
                println!("{}", report_to_text(name, r));
            }
        }
    }
}

fn write_csv(out: Option<&PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn read_channel(path: &PathBuf) -> Result<DiscreteMac> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))?;
    load_mac(&text)
}

fn run_bound_discrete(
    mac: &DiscreteMac,
    cfg: &DiamondConfig,
    aux_card: Option<usize>,
    opts: &SearchOpts,
) -> Result<Vec<(&'static str, BoundReport)>> {
    let cutset = cutset_bound(mac, cfg, opts)?;
    let upper_card = AuxCard(aux_card.unwrap_or(mac.y_size));
    let upper = theorem1_upper_with_card(mac, cfg, upper_card, opts)?;
    let lower_card = AuxCard(aux_card.unwrap_or_else(|| AuxCard::lower_bound_cap(mac)));
    let lower = theorem2_lower(mac, cfg, lower_card, opts)?;
    Ok(vec![("cutset", cutset), ("upper", upper), ("lower", lower)])
}

fn run_bound_gaussian(
    params: &GaussianMacParams,
    cfg: &DiamondConfig,
    opts: &SearchOpts,
) -> Result<Vec<(&'static str, BoundReport)>> {
    let upper = gaussian_upper(params, cfg)?;
    let cutset_value = gaussian_cutset(params, cfg);
    let mut cutset = upper.clone();
    cutset.value = cutset_value;
    cutset.binding = "min of the four cut-set constraints".to_string();
    let lower = gaussian_lower(params, cfg, opts)?;
    let mixture = gaussian_lower_mixture(params, cfg, opts)?;
    Ok(vec![
        ("cutset", cutset),
        ("upper", upper),
        ("lower", lower),
        ("lower_mixture", mixture),
    ])
}

fn grid(c_min: f64, c_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::Argument(format!("sweep needs at least 2 steps, got {steps}")));
    }
    if !(c_min >= 0.0 && c_max > c_min) {
        return Err(Error::Argument(format!(
            "sweep range needs 0 <= c_min < c_max, got [{c_min}, {c_max}]"
        )));
    }
    let h = (c_max - c_min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| c_min + i as f64 * h).collect())
}

fn sweep_gaussian(
    params: &GaussianMacParams,
    c_min: f64,
    c_max: f64,
    steps: usize,
    tol: f64,
    opts: &SearchOpts,
) -> Result<String> {
    let cs = grid(c_min, c_max, steps)?;
    // compute single-witness rows first, then reuse their chart points as
    // the mixture table so each row costs one pair scan instead of a
    // fresh table build
    let singles: Vec<(f64, crate::bounds::BoundReport)> = cs
        .iter()
        .map(|&c| {
            let cfg = DiamondConfig::new(c, c)?;
            Ok((c, gaussian_lower(params, &cfg, opts)?))
        })
        .collect::<Result<_>>()?;
    let chart_of = |r: &BoundReport| -> [f64; 3] {
        let ch = &r.witness["components"][0]["chart"];
        [
            ch["a1"].as_f64().unwrap_or(0.0),
            ch["a2"].as_f64().unwrap_or(0.0),
            ch["t"].as_f64().unwrap_or(0.0),
        ]
    };
    // witness table keyed by bit-pipe sum, shared across all rows
    let charts: Vec<(f64, [f64; 3])> = singles
        .iter()
        .map(|(c, r)| (2.0 * c, chart_of(r)))
        .collect();
    let mut body = String::from("c,cutset,upper,lower,lower_single,lower_mixture,match\n");
    for (c, single) in &singles {
        let cfg = DiamondConfig::new(*c, *c)?;
        let cutset = gaussian_cutset(params, &cfg);
        let upper = gaussian_upper(params, &cfg)?.value;
        let mixture = crate::closed_forms::mixture_value_from_table(
            params,
            &cfg,
            &charts,
            single.value,
            chart_of(single),
            opts,
        )?
        .max(single.value);
        let lower = mixture.max(single.value);
        let matched = (upper - lower).abs() <= tol;
        body.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            c, cutset, upper, lower, single.value, mixture, matched
        ));
    }
    Ok(body)
}

fn sweep_discrete(
    mac: &DiscreteMac,
    c_min: f64,
    c_max: f64,
    steps: usize,
    tol: f64,
    opts: &SearchOpts,
) -> Result<String> {
    let cs = grid(c_min, c_max, steps)?;
    let mut body = String::from("c,cutset,upper,lower,match\n");
    for &c in &cs {
        let cfg = DiamondConfig::new(c, c)?;
        let cutset = cutset_bound(mac, &cfg, opts)?.value;
        let upper = theorem1_upper_with_card(mac, &cfg, AuxCard(mac.y_size), opts)?.value;
        let lower = theorem2_lower(mac, &cfg, AuxCard(AuxCard::lower_bound_cap(mac)), opts)?.value;
        let matched = (upper - lower).abs() <= tol;
        body.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{}\n",
            c, cutset, upper, lower, matched
        ));
    }
    Ok(body)
}

fn run_match_gaussian(power: f64) -> Result<()> {
    let r = theorem3_report(power)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "power": power,
            "rho1": r.rho1,
            "rho2": r.rho2,
            "matching_regimes": [
                { "c_from": 0.0, "c_to": r.c_low },
                { "c_from": r.c_mid_lo, "c_to": r.c_mid_hi },
                { "c_from": r.c_high, "c_to": null },
            ],
        }))
        .expect("serializable")
    );
    Ok(())
}

fn run_match_adder() -> Result<()> {
    let (c_low, c_high) = adder_match_report();
    // sanity anchor: at C = c_low the upper bound equals 2C
    let anchor = adder_upper(c_low)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "c_low": c_low,
            "c_high": c_high,
            "upper_at_c_low": anchor.value,
            "matching_regimes": [
                { "c_from": 0.0, "c_to": c_low },
                { "c_from": c_high, "c_to": null },
            ],
        }))
        .expect("serializable")
    );
    Ok(())
}

/// Seeded consistency checks: the two equivalent forms of the auxiliary
/// upper-bound constraint, the rate-split LP against the min-term formula,
/// and the Markov properties of the adder and Gaussian auxiliary choices.
fn selftest_case(rng: &mut impl rand::Rng) -> Result<Vec<String>> {
    use crate::bounds::{constraint5, equiv_constraint5, fm_split_oracle, theorem2_terms};
    use crate::closed_forms::{adder_alpha, gaussian_aux_noise, rho_threshold};
    use crate::measures::{JointDist, Kernel};
    use crate::network::{
        adder_aux_channel, attach_aux, binary_adder_mac, doubly_symmetric_input, induced_joint,
    };
    use ndarray::{ArrayD, IxDyn};

    let mut failures = Vec::new();
    let mac = binary_adder_mac();
    let cfg = DiamondConfig::new(rng.gen_range(0.0..1.5), rng.gen_range(0.0..1.5))?;

    // (1) the two forms of the auxiliary constraint agree
    let mut mass: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|v| *v /= total);
    let input = JointDist::new(
        vec![("x1", 2), ("x2", 2)],
        ArrayD::from_shape_vec(IxDyn(&[2, 2]), mass).expect("shape"),
    )?;
    let mut aux_rows: Vec<f64> = Vec::with_capacity(6);
    for _ in 0..3 {
        let a: f64 = rng.gen_range(0.01..0.99);
        aux_rows.extend([a, 1.0 - a]);
    }
    let aux = Kernel::new(
        vec![("y", 3)],
        ("u", 2),
        ArrayD::from_shape_vec(IxDyn(&[3, 2]), aux_rows).expect("shape"),
    )?;
    let c5 = constraint5(&input, &mac, &aux, &cfg)?;
    let c5e = equiv_constraint5(&input, &mac, &aux, &cfg)?;
    if (c5 - c5e).abs() > 1e-10 {
        failures.push(format!("aux constraint forms disagree: {c5} vs {c5e}"));
    }

    // (2) rate-split LP equals the five-term minimum
    let mut coding: Vec<f64> = (0..8).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = coding.iter().sum();
    coding.iter_mut().for_each(|v| *v /= total);
    let coding = JointDist::new(
        vec![("u", 2), ("x1", 2), ("x2", 2)],
        ArrayD::from_shape_vec(IxDyn(&[2, 2, 2]), coding).expect("shape"),
    )?;
    let lp = fm_split_oracle(&coding, &mac, &cfg)?;
    let terms = theorem2_terms(&coding, &mac, &cfg)?;
    let direct = terms.into_iter().fold(f64::INFINITY, f64::min).max(0.0);
    if (lp - direct).abs() > 1e-9 {
        failures.push(format!("rate-split LP {lp} differs from min-term value {direct}"));
    }

    // (3) adder auxiliary makes X1 - U - X2 Markov
    let p = rng.gen_range(0.05..0.5);
    let alpha = adder_alpha(p)?;
    let joint = attach_aux(
        &induced_joint(&doubly_symmetric_input(p)?, &mac)?,
        &adder_aux_channel(alpha)?,
    )?;
    let cmi = joint.cond_mutual_info(&["x1"], &["x2"], &["u"])?;
    if cmi.abs() > 1e-9 {
        failures.push(format!("adder Markov violation at p={p}: I(X1;X2|U)={cmi}"));
    }

    // (4) Gaussian auxiliary noise decorrelates the inputs given U
    let params = GaussianMacParams::new(rng.gen_range(0.2..4.0), rng.gen_range(0.2..4.0))?;
    let rho = rho_threshold(&params) * rng.gen_range(0.05..0.95);
    let n = gaussian_aux_noise(&params, rho)?;
    let g = (params.p1 * params.p2).sqrt();
    let var_u = params.p1 + params.p2 + 2.0 * rho * g + 1.0 + n;
    let cond = rho * g - (params.p1 + rho * g) * (params.p2 + rho * g) / var_u;
    if cond.abs() > 1e-9 {
        failures.push(format!("Gaussian Markov violation at rho={rho}: cov={cond}"));
    }
    Ok(failures)
}

fn run_selftest(seed: u64, cases: usize) -> Result<()> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        for f in selftest_case(&mut rng)? {
            failures.push(format!("case {case}: {f}"));
        }
    }
    if failures.is_empty() {
        println!("selftest: {cases} cases passed");
        Ok(())
    } else {
        for f in &failures {
            eprintln!("selftest failure: {f}");
        }
        Err(Error::Argument(format!("{} selftest checks failed", failures.len())))
    }
}

/// Run the parsed command. Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Bound { target } => match target {
            BoundTarget::Discrete { channel, c1, c2, aux_card, search, format } => (|| {
                let mac = read_channel(&channel)?;
                let cfg = DiamondConfig::new(c1, c2)?;
                let reports = run_bound_discrete(&mac, &cfg, aux_card, &search.opts())?;
                print_reports(format, &reports);
                Ok(())
            })(),
            BoundTarget::Gaussian { gaussian, c1, c2, search, format } => (|| {
                let params = GaussianMacParams::new(gaussian.p1, gaussian.p2)?;
                let cfg = DiamondConfig::new(c1, c2)?;
                let reports = run_bound_gaussian(&params, &cfg, &search.opts())?;
                print_reports(format, &reports);
                Ok(())
            })(),
        },
        Command::Sweep { target } => match target {
            SweepTarget::Gaussian { gaussian, c_min, c_max, steps, tol, out, search } => (|| {
                let params = GaussianMacParams::new(gaussian.p1, gaussian.p2)?;
                let body = sweep_gaussian(&params, c_min, c_max, steps, tol, &search.opts())?;
                write_csv(out.as_ref(), &body)
            })(),
            SweepTarget::Discrete { channel, c_min, c_max, steps, tol, out, search } => (|| {
                let mac = read_channel(&channel)?;
                let body = sweep_discrete(&mac, c_min, c_max, steps, tol, &search.opts())?;
                write_csv(out.as_ref(), &body)
            })(),
        },
        Command::Match { target } => match target {
            MatchTarget::Gaussian { power } => run_match_gaussian(power),
            MatchTarget::Adder => run_match_adder(),
        },
        Command::Selftest { seed, cases } => run_selftest(seed, cases),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
