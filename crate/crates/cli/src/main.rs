//! Command-line front end: instance generation, relaxation solving, the two
//! rounding pipelines, exact solving, consistency checks, language analysis,
//! and the experiment harness.
//!
//! Exit codes: 0 success, 1 usage/runtime error, 2 pipeline contract
//! violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use robust_csp::algebra::{self, classify_01all, Classification};
use robust_csp::consistency::check::{
    check_ipq, pattern_to_json, CheckOptions, CheckVerdict,
};
use robust_csp::consistency::{exact_solve, LevelSets};
use robust_csp::csp::generate::generate_planted;
use robust_csp::csp::json as csp_json;
use robust_csp::csp::{Domain, Relation};
use robust_csp::error::Error;
use robust_csp::experiment::{self, ExperimentConfig};
use robust_csp::{dd, nu, sdp, Instance};

#[derive(Parser)]
#[command(
    name = "robust-csp",
    about = "Robust approximation algorithms for weighted CSPs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted (1 - eps)-satisfiable instance.
    Gen {
        /// Built-in language: twosat | ug-<d> | implicational-<d>, or a path
        /// to a language JSON file.
        #[arg(long)]
        language: String,
        #[arg(long, default_value_t = 8)]
        vars: usize,
        #[arg(long, default_value_t = 40)]
        constraints: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the vector relaxation of an instance.
    SolveSdp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the near-unanimity rounding pipeline.
    RoundNu {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the dual-discriminator rounding pipeline.
    RoundDd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decide satisfiability exactly and print a witness.
    Exact {
        #[arg(long)]
        input: PathBuf,
    },
    /// Bounded consistency falsifier over paths of n-trees.
    CheckIpq {
        #[arg(long)]
        input: PathBuf,
        /// Pattern size cap (total constraint occurrences).
        #[arg(long, default_value_t = 6)]
        cap: usize,
        /// Repetition cap; 2^|D| is exact.
        #[arg(long)]
        jcap: Option<usize>,
        /// Leaf bound per tree segment.
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Polymorphism profile of a language file.
    Analyze {
        #[arg(long)]
        language: PathBuf,
    },
    /// Exact optimum, relaxation optimum, and the sandwich check.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Run a seeded experiment grid from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    csp_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{content}"),
    }
    Ok(())
}

fn builtin_language(spec: &str) -> Option<Vec<Arc<Relation>>> {
    use robust_csp::csp::generate as g;
    if spec == "twosat" {
        return Some(g::two_sat_language());
    }
    if let Some(d) = spec.strip_prefix("ug-").and_then(|s| s.parse::<usize>().ok()) {
        return Some(g::unique_games_language(d));
    }
    if let Some(d) = spec
        .strip_prefix("implicational-")
        .and_then(|s| s.parse::<usize>().ok())
    {
        return Some(g::implicational_language(d));
    }
    None
}

fn load_language(spec: &str) -> anyhow::Result<Vec<Arc<Relation>>> {
    if let Some(lang) = builtin_language(spec) {
        return Ok(lang);
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(csp_json::language_from_str(&text)?)
}

fn classification_name(c: &Classification) -> String {
    match c {
        Classification::Type1 { a, b } => format!("disjunction(a={a}, b={b})"),
        Classification::Type2 { perm } => format!("permutation({perm:?})"),
        Classification::Type3 { p, q } => format!("product(P={p:?}, Q={q:?})"),
        Classification::Type4 { base, p, q } => format!(
            "intersection({} with P={p:?}, Q={q:?})",
            classification_name(base)
        ),
        Classification::None => "none".into(),
    }
}

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            language,
            vars,
            constraints,
            eps,
            seed,
            out,
        } => {
            let relations = load_language(&language)?;
            let (instance, planted) =
                generate_planted::<f64>(&relations, vars, constraints, eps, seed)?;
            let content = csp_json::to_string(&instance)?;
            write_or_print(&out, &content)?;
            eprintln!(
                "planted assignment satisfies {:.4}",
                instance.evaluate(&planted)?
            );
            Ok(0)
        }
        Command::SolveSdp { input, delta, out } => {
            let instance = read_instance(&input)?.normalize_weights()?;
            let problem = sdp::build_relaxation(&instance)?;
            let sol = sdp::solve(&problem, delta)?;
            let report = sdp::validate_feasibility(&sol, sdp::FEASIBILITY_TOL);
            let json = serde_json::json!({
                "schema": 1,
                "objective": sol.objective,
                "iterations": sol.iterations,
                "dimension": sol.dim,
                "v0": sol.v0,
                "vectors": (0..instance.num_vars).map(|x| {
                    (0..instance.domain.size()).map(|a| sol.vector(x, a).to_vec()).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
                "residuals": report,
            });
            write_or_print(&out, &serde_json::to_string_pretty(&json)?)?;
            Ok(0)
        }
        Command::RoundNu {
            input,
            seed,
            report,
        } => {
            let original = read_instance(&input)?;
            let (instance, back) = if original.max_arity() > 2 {
                let (binarized, back) = algebra::binarize(&original)?;
                eprintln!(
                    "binarized to domain size {}",
                    binarized.domain.size()
                );
                (binarized, Some(back))
            } else {
                (original.clone(), None)
            };
            match nu::run_nu(&instance, seed) {
                Ok((assignment, run)) => {
                    let assignment = match &back {
                        Some(back) => back.recover(&assignment),
                        None => assignment,
                    };
                    let satisfied = original
                        .clone()
                        .normalize_weights()?
                        .evaluate(&assignment)?;
                    let json = serde_json::json!({
                        "schema": 1,
                        "assignment": assignment.values,
                        "satisfied_weight": satisfied,
                        "binarized_satisfied_weight": run.satisfied_weight,
                        "k": run.k,
                        "kappa": run.kappa,
                        "alpha": run.alpha,
                        "m0": run.m0,
                        "m_ell": run.m_ell,
                        "sdp_objective": run.sdp_objective,
                        "early_exit": format!("{:?}", run.early_exit),
                        "removed_weight_per_step": run.removed_weight,
                        "removed_per_step": run.removed,
                        "survivor_size": run.survivor.len(),
                    });
                    write_or_print(&report, &serde_json::to_string_pretty(&json)?)?;
                    Ok(0)
                }
                Err(e @ Error::PipelineContractViolation { .. }) => {
                    eprintln!("{e}");
                    Ok(2)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::RoundDd {
            input,
            seed,
            report,
        } => {
            let instance = read_instance(&input)?;
            let (assignment, run) = dd::run_dd(&instance, seed)?;
            let json = serde_json::json!({
                "schema": 1,
                "assignment": assignment.values,
                "satisfied_weight": run.satisfied_weight,
                "converted_satisfied_weight": run.converted_satisfied_weight,
                "r": run.r,
                "sdp_objective": run.sdp_objective,
                "early_exit": run.early_exit,
                "group_sizes": run.group_sizes,
                "weight_satisfied_by_partition": run.weight_satisfied_by_partition,
                "weight_conservatively_violated": run.weight_conservatively_violated,
                "weight_instance_one": run.weight_instance_one,
                "weight_instance_two": run.weight_instance_two,
                "weight_bad_labeling": run.weight_bad_labeling,
                "instance_one_loss": run.instance_one_loss,
                "instance_two_loss": run.instance_two_loss,
                "admissible_pieces_ok": run.admissible_pieces_ok,
            });
            write_or_print(&report, &serde_json::to_string_pretty(&json)?)?;
            Ok(0)
        }
        Command::Exact { input } => {
            let instance = read_instance(&input)?;
            match exact_solve(&instance) {
                Some(s) => {
                    println!("{}", serde_json::json!({ "satisfiable": true, "assignment": s.values }));
                    Ok(0)
                }
                None => {
                    println!("{}", serde_json::json!({ "satisfiable": false }));
                    Ok(0)
                }
            }
        }
        Command::CheckIpq {
            input,
            cap,
            jcap,
            n,
        } => {
            let instance = read_instance(&input)?;
            let d = instance.domain.size();
            let levels = LevelSets::full(d, instance.num_vars);
            let mut options = CheckOptions::new(n, cap, d);
            if let Some(j) = jcap {
                options.j_cap = j;
            }
            let verdict = check_ipq(&instance, &levels, &options)?;
            match verdict {
                CheckVerdict::NoViolationUpToBound { map_classes } => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "verdict": "no-violation-up-to-bound",
                            "map_classes": map_classes,
                            "pattern_edge_cap": options.pattern_edge_cap,
                            "j_cap": options.j_cap,
                        })
                    );
                }
                CheckVerdict::Violated(w) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "verdict": "violated",
                            "var": w.var,
                            "level": w.level,
                            "value": w.value,
                            "p": pattern_to_json(&w.p),
                            "q": pattern_to_json(&w.q),
                        })
                    );
                }
                CheckVerdict::Inconclusive { var, level, value } => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "verdict": "inconclusive-j-cap-exhausted",
                            "var": var, "level": level, "value": value,
                        })
                    );
                }
            }
            Ok(0)
        }
        Command::Analyze { language } => {
            let text = std::fs::read_to_string(&language)
                .with_context(|| format!("reading {}", language.display()))?;
            let (domain_size, relations) = csp_json::language_with_domain_from_str(&text)?;
            let domain = Domain::new(domain_size)?;
            let profile = algebra::analyze_language(&relations, domain)?;
            println!("domain size:        {domain_size}");
            println!("max arity:          {}", profile.max_arity);
            println!("majority:           {}", profile.has_majority);
            println!(
                "near-unanimity:     {}",
                profile
                    .has_nu
                    .map(|a| format!("yes (arity {a})"))
                    .unwrap_or_else(|| "none found (ternary search)".into())
            );
            println!("dual discriminator: {}", profile.has_dual_discriminator);
            for (i, rel) in relations.iter().enumerate() {
                if rel.arity() == 2 {
                    println!(
                        "relation {i}: {}",
                        classification_name(&classify_01all(rel))
                    );
                } else {
                    println!("relation {i}: arity {}", rel.arity());
                }
            }
            Ok(0)
        }
        Command::Oracle { input, delta } => {
            let instance = read_instance(&input)?.normalize_weights()?;
            let m = instance.num_constraints().max(1);
            let delta = delta.unwrap_or(1.0 / (m as f64 * m as f64));
            let (opt, witness) = instance.opt_bruteforce()?;
            let problem = sdp::build_relaxation(&instance)?;
            let sol = sdp::solve(&problem, delta)?;
            println!("Opt (max satisfied weight):    {opt:.6}");
            println!("1 - Opt (min unsatisfied):     {:.6}", 1.0 - opt);
            println!("relaxation optimum (min form): {:.6}", sol.objective);
            println!("witness: {:?}", witness.values);
            if sol.objective < -1e-9 || sol.objective > 1.0 - opt + delta + 1e-9 {
                return Err(anyhow!(
                    "sandwich violated: relaxation value {} outside [0, {}]",
                    sol.objective,
                    1.0 - opt + delta
                ));
            }
            println!("sandwich 0 <= sdp <= 1 - Opt + delta holds");
            Ok(0)
        }
        Command::Experiment {
            config,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let config: ExperimentConfig = serde_json::from_str(&text)?;
            match experiment::run_experiment(&config) {
                Ok(report) => {
                    let content = match format {
                        Format::Json => serde_json::to_string_pretty(&report)?,
                        Format::Csv => experiment::aggregates_csv(&report),
                    };
                    write_or_print(&out, &content)?;
                    for fit in &report.fits {
                        eprintln!(
                            "{}: slope {:.3} (r^2 {:.3}, {} points)",
                            fit.pipeline, fit.slope, fit.r_squared, fit.points_used
                        );
                    }
                    Ok(0)
                }
                Err(e @ Error::PipelineContractViolation { .. }) => {
                    eprintln!("{e}");
                    Ok(2)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
