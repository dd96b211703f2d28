mod input;

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};

use coiso_core::kontsevich::{enumerate_graphs, WeightEngine};
use coiso_core::quantize::{a_infinity_residual, mu0_anomaly, star_assemble};
use coiso_core::weighted::WeightMethod;

#[derive(Parser)]
#[command(name = "coiso", about = "graded brackets, star products and coisotropic checks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// quasi-Monte-Carlo samples per graph weight
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// randomized replicates used for the error estimate
    #[arg(long, default_value_t = 16)]
    replicates: u32,
    /// seed for the randomized shifts
    #[arg(long, default_value_t = 2718)]
    seed: u64,
}

impl EngineArgs {
    fn engine(&self) -> WeightEngine {
        WeightEngine::new(self.samples, self.replicates, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// List admissible graphs: one line per graph, targets in order
    Graphs {
        n: usize,
        m: usize,
        /// comma-separated out-degrees, one per aerial vertex
        degrees: String,
    },
    /// List graphs with their weights
    Weights {
        n: usize,
        m: usize,
        degrees: String,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print the bracket family of a problem file
    Lambda {
        file: PathBuf,
        /// highest arity printed
        #[arg(long, default_value_t = 4)]
        max_arity: u32,
    },
    /// Coisotropy verdict and the induced differential
    Coiso { file: PathBuf },
    /// Assemble the deformed product and print its coefficients
    Star {
        file: PathBuf,
        /// verify associativity and the anomaly gates, exit nonzero on failure
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
}

fn read_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| anyhow!("reading {}: {e}", path.display()))
}

fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| anyhow!("bad degree `{p}`: {e}")))
        .collect()
}

fn main() -> Result<()> {
    // Die quietly when the output pipe closes (e.g. piping into head).
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Graphs { n, m, degrees } => {
            let degs = parse_degrees(&degrees)?;
            for g in enumerate_graphs(n, m, &degs) {
                println!("{g}");
            }
        }
        Command::Weights {
            n,
            m,
            degrees,
            engine,
        } => {
            let degs = parse_degrees(&degrees)?;
            let eng = engine.engine();
            for g in enumerate_graphs(n, m, &degs) {
                let w = eng.weight(&g);
                match (w.method, &w.exact) {
                    (WeightMethod::Exact, Some(q)) => {
                        println!("{g}  w={q} err=0 method=exact");
                    }
                    _ => {
                        println!(
                            "{g}  w={:.6} err={:.6} method=qmc",
                            w.value, w.std_err
                        );
                    }
                }
            }
        }
        Command::Lambda { file, max_arity } => {
            let problem = input::parse_problem(&read_file(&file)?)?;
            let spec = problem.spec()?;
            let pi = problem.poisson(&spec)?;
            if !pi.check_poisson().map_err(|e| anyhow!("{e}"))? {
                bail!("[poisson] input does not square to zero");
            }
            let pinf = spec
                .pinfinity_from_poisson(&pi)
                .map_err(|e| anyhow!("{e}"))?;
            for n in 0..=max_arity.max(pinf.n_max()) {
                let avatar = pinf
                    .avatar(n)
                    .map(|a| a.to_string())
                    .unwrap_or_else(|| "0".into());
                println!("lambda_{n} = {avatar}");
            }
        }
        Command::Coiso { file } => {
            let problem = input::parse_problem(&read_file(&file)?)?;
            let spec = problem.spec()?;
            let pi = problem.poisson(&spec)?;
            if !pi.check_poisson().map_err(|e| anyhow!("{e}"))? {
                bail!("[poisson] input does not square to zero");
            }
            let coiso = spec.is_coisotropic(&pi).map_err(|e| anyhow!("{e}"))?;
            let pinf = spec
                .pinfinity_from_poisson(&pi)
                .map_err(|e| anyhow!("{e}"))?;
            println!(
                "coisotropic: {}",
                if coiso { "yes" } else { "no" }
            );
            let l1 = pinf
                .avatar(1)
                .map(|a| a.to_string())
                .unwrap_or_else(|| "0".into());
            println!("lambda_1 = {l1}");
            if !coiso {
                let l0 = pinf
                    .avatar(0)
                    .map(|a| a.to_string())
                    .unwrap_or_else(|| "0".into());
                println!("lambda_0 = {l0}");
            }
        }
        Command::Star {
            file,
            check,
            engine,
        } => {
            let problem = input::parse_problem(&read_file(&file)?)?;
            let spec = problem.spec()?;
            let pi = problem.poisson(&spec)?;
            let eng = engine.engine();
            let series = star_assemble(&eng, &spec, &pi, problem.order)
                .map_err(|e| anyhow!("{e}"))?;
            for eps in 0..=series.order() {
                for arity in series.arities_at(eps) {
                    let op = series.op(eps, arity).unwrap();
                    println!("eps^{eps} arity {arity}: {op}");
                }
            }
            if check {
                let mut ok = true;
                let pinf = spec
                    .pinfinity_from_poisson(&pi)
                    .map_err(|e| anyhow!("{e}"))?;
                // Associativity on generator triples.
                let base = spec.dictionary().a_side().base_context().clone();
                let gens: Vec<_> = base
                    .vars()
                    .map(|v| coiso_core::poly::GradedPoly::var(&base, v))
                    .collect();
                'outer: for a in &gens {
                    for b in &gens {
                        for c in &gens {
                            let rs = a_infinity_residual(
                                &series,
                                &[a.clone(), b.clone(), c.clone()],
                            )
                            .map_err(|e| anyhow!("{e}"))?;
                            for (eps, r) in rs.iter().enumerate() {
                                if !r.is_zero_within(3.0, 1e-9) {
                                    println!(
                                        "FAIL associativity at eps^{eps} on ({a}, {b}, {c}): {r}"
                                    );
                                    ok = false;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                if ok {
                    println!("associativity: ok (3 sigma)");
                }
                if problem.order >= 2 {
                    let report =
                        mu0_anomaly(&series, &pinf).map_err(|e| anyhow!("{e}"))?;
                    let coiso = spec.is_coisotropic(&pi).map_err(|e| anyhow!("{e}"))?;
                    if coiso {
                        if report.eps1_exactly_zero() {
                            println!("anomaly eps^1: exactly zero");
                        } else {
                            println!("FAIL anomaly eps^1 nonzero: {}", report.eps1);
                            ok = false;
                        }
                    } else {
                        println!("anomaly eps^1: {}", report.eps1);
                    }
                    println!("anomaly F (eps^2): {}", report.f);
                    if report.df.is_exactly_zero() {
                        println!("dF: exactly zero");
                    } else if report.df.is_zero_within(3.0, 1e-9) {
                        println!("dF: zero within 3 sigma");
                    } else {
                        println!("FAIL dF nonzero: {}", report.df);
                        ok = false;
                    }
                }
                if !ok {
                    std::process::exit(1);
                }
            }
        }
    }
    Ok(())
}
