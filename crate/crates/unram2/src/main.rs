use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use unram2::count::CountPlan;
use unram2::discs::{factor_prime_discriminants, Sieve, Sign, SweepRange};
use unram2::group::{admissible_pairs_up_to_iso, summarize, GroupPair};
use unram2::predict;
use unram2::sweep::{sweep_distribution, sweep_moments, SweepConfig};
use unram2::verify::{self, Outcome};
use unram2::Error;

#[derive(Parser)]
#[command(name = "unram2", version, about = "Count unramified central 2-group extensions of quadratic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Admissible pairs (G, H) up to isomorphism.
    Groups {
        #[command(subcommand)]
        action: GroupsAction,
    },
    /// f(d) for one discriminant, or a CSV over a range.
    Count {
        /// Preset name or `n; a=<hex>; h=<bits>`.
        #[arg(long)]
        group: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "range")]
        d: Option<i64>,
        /// Every fundamental d with 0 < ±d < RANGE.
        #[arg(long)]
        range: Option<u64>,
        #[arg(long, default_value = "neg")]
        sign: Sign,
        #[arg(long)]
        alpha: Option<u8>,
    },
    /// Predicted k-th moment of the product of f/c^ω over the given pairs.
    Predict {
        /// Comma-separated presets or specs.
        #[arg(long, value_delimiter = ',', required = true)]
        pairs: Vec<String>,
        #[arg(long)]
        sign: Sign,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Empirical moments over a discriminant range, as JSON.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        pairs: Vec<String>,
        #[arg(long)]
        sign: Sign,
        /// Upper bound X on |d|.
        #[arg(long)]
        x: u64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
        #[arg(long)]
        alpha: Option<u8>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Also report the histogram of f/c^ω (single pair).
        #[arg(long)]
        distribution: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Brute-force verifications; exit code 0 iff all pass.
    Verify {
        #[arg(value_enum, required = true)]
        targets: Vec<Target>,
        /// Largest dimension for `quadforms` and `groups`.
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Largest power k for `graphs`.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Range bound for `redei` and `integrality`.
        #[arg(long, default_value_t = 100_000)]
        xmax: u64,
        #[arg(long, default_value = "neg")]
        sign: Sign,
    },
}

#[derive(Subcommand)]
enum GroupsAction {
    List {
        /// A dimension `N` or an inclusive range `A..B`.
        #[arg(long)]
        n: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Quadforms,
    Groups,
    Graphs,
    Redei,
    Integrality,
    Localmass,
    Gamma,
    Cl,
}

fn parse_dims(s: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::Parse(format!("bad dimension range {s:?}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.parse().map_err(|_| bad())?, b.trim_start_matches('=').parse().map_err(|_| bad())?),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if a == 0 || b > 5 || a > b {
        return Err(Error::Invalid("dimensions must satisfy 1 ≤ A ≤ B ≤ 5".into()));
    }
    Ok((a..=b).collect())
}

fn json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Groups {
            action: GroupsAction::List { n, json: as_json },
        } => {
            let rows: Vec<_> = parse_dims(&n)?
                .into_iter()
                .flat_map(admissible_pairs_up_to_iso)
                .map(|p| summarize(&p))
                .collect();
            if as_json {
                println!("{}", json(&rows));
            } else {
                println!("n,label,spec,t0,c,components,complete_bipartite,h_abelian,aut_h");
                for r in rows {
                    println!(
                        "{},{},\"{}\",{},{},{},{},{},{}",
                        r.n,
                        r.label,
                        r.spec,
                        r.t0.join(" "),
                        r.c,
                        r.components,
                        r.complete_bipartite,
                        r.h_abelian,
                        r.aut_h
                    );
                }
            }
            Ok(true)
        }
        Command::Count {
            group,
            d,
            range,
            sign,
            alpha,
        } => {
            let pair = GroupPair::parse(&group)?;
            let plan = CountPlan::new(&pair)?;
            println!("d,omega,f");
            if let Some(d) = d {
                let t = plan.evaluate(&factor_prime_discriminants(d)?)?;
                println!("{},{},{}", t.d, t.omega, t.f);
            } else if let Some(x) = range {
                Sieve::new(SweepRange::new(sign, x, alpha)?).for_each(|fact| {
                    println!("{},{},{}", fact.d, fact.omega(), plan.f(fact));
                });
            } else {
                return Err(Error::Invalid("give --d or --range".into()));
            }
            Ok(true)
        }
        Command::Predict { pairs, sign, k } => {
            let pairs = pairs.iter().map(|s| GroupPair::parse(s)).collect::<Result<Vec<_>, _>>()?;
            println!("{}", json(&predict::predict(&pairs, sign, k)?));
            Ok(true)
        }
        Command::Sweep {
            pairs,
            sign,
            x,
            k,
            alpha,
            workers,
            distribution,
            output,
        } => {
            let cfg = SweepConfig {
                pairs,
                sign,
                xmax: x,
                alpha,
                ks: k,
                workers,
                output: output.clone(),
            };
            let start = Instant::now();
            let report = if distribution {
                sweep_distribution(&cfg)?
            } else {
                sweep_moments(&cfg)?
            };
            eprintln!("swept {} discriminants in {:.2?}", report.count, start.elapsed());
            if output.is_none() {
                println!("{}", report.to_json());
            }
            Ok(true)
        }
        Command::Verify {
            targets,
            n,
            k,
            xmax,
            sign,
        } => {
            let mut all = true;
            for t in targets {
                let start = Instant::now();
                let out: Outcome = match t {
                    Target::Quadforms => verify::quadforms(n)?,
                    Target::Groups => verify::groups(n)?,
                    Target::Graphs => verify::graphs(k)?,
                    Target::Redei => verify::redei(sign, xmax)?,
                    Target::Integrality => verify::integrality(sign, xmax)?,
                    Target::Localmass => verify::localmass(&[3, 5, 7, 11, 13])?,
                    Target::Gamma => verify::gamma()?,
                    Target::Cl => verify::cl()?,
                };
                println!(
                    "{} {}: {} checked, {} failed ({:.2?}); {}",
                    if out.passed { "PASS" } else { "FAIL" },
                    out.name,
                    out.checked,
                    out.failures,
                    start.elapsed(),
                    out.detail
                );
                all &= out.passed;
            }
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
