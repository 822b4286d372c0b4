//! Command-line front end: productivity checks, solution enumeration,
//! prefix evaluation, flattening, observation graphs, equivalence,
//! automaton conversions, mixed-base numerals, PDL model checking and the
//! Fractran reduction.
//!
//! Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage
//! error, 3 analysis error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use zipstream_core::analysis::{leftmost_cycles, solve_all};
use zipstream_core::automata::{
    dfao_to_graph, generate_mix, graph_to_dfao, make_zero_invariant_dfao,
    make_zero_invariant_mix, repr_mix, Automaton,
};
use zipstream_core::fractran::{
    build_gadget, gadget_equiv_probe, run_output, to_zip_pi_spec, FractranProgram,
    ProbeOutcome, RunOutcome,
};
use zipstream_core::graph::{
    equivalent, minimize, ngraph_to_ograph, prefix_compare, BisimWitness, Cobasis, ObsGraph,
    PrefixOutcome, StreamHandle,
};
use zipstream_core::pdl::{characterize, eval as pdl_eval, model_of_graph, Formula};
use zipstream_core::semantics::{eval_prefix, project_prefix, Prefix, RewriteBudget};
use zipstream_core::spec::Dialect;
use zipstream_core::transform::flatten;
use zipstream_core::ZipSpec;

#[derive(Parser)]
#[command(name = "zipstream", version, about = "analysis of zip-specifications of streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide productivity and list the leftmost cycles
    Check {
        file: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Enumerate all solutions of a (possibly unproductive) specification
    Solve { file: PathBuf },
    /// Print the first N symbols of the root stream
    Eval {
        file: PathBuf,
        #[arg(short)]
        n: u64,
        /// Evaluate the projection proj_{i,k} of the root instead
        #[arg(long, num_args = 2, value_names = ["I", "K"])]
        proj: Option<Vec<u64>>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Print an equivalent flat specification
    Flatten { file: PathBuf },
    /// Build the observation graph of a specification
    Graph {
        file: PathBuf,
        /// Cobasis: n, o or mix
        #[arg(long, default_value = "n")]
        cobasis: String,
        #[arg(long)]
        minimize: bool,
        /// Output format: dot or json
        #[arg(long, default_value = "dot")]
        format: String,
    },
    /// Decide equivalence of two zip-k specifications, or compare prefixes
    Equiv {
        file1: PathBuf,
        file2: PathBuf,
        /// Compare the first N symbols instead of deciding
        #[arg(long)]
        prefix: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Automaton conversions (JSON in, JSON out)
    Dfao {
        #[command(subcommand)]
        cmd: DfaoCmd,
    },
    /// Mixed-base numerals and mix-DFAO generation
    Mix {
        #[command(subcommand)]
        cmd: MixCmd,
    },
    /// Dynamic logic over observation graphs
    Pdl {
        #[command(subcommand)]
        cmd: PdlCmd,
    },
    /// Fractran programs, the halting gadget, and the stream encoding
    Fractran {
        #[command(subcommand)]
        cmd: FractranCmd,
    },
}

#[derive(Subcommand)]
enum DfaoCmd {
    /// Read a graph JSON file and print the corresponding automaton
    FromGraph { file: PathBuf },
    /// Read an automaton JSON file and print its observation graph
    ToGraph { file: PathBuf },
    /// Make an automaton invariant under leading zeros
    ZeroInvariant { file: PathBuf },
}

#[derive(Subcommand)]
enum MixCmd {
    /// Print the base-P representation of N
    Repr {
        n: u64,
        /// Mix automaton JSON file whose structure fixes the numeration
        #[arg(long)]
        determiner: PathBuf,
    },
    /// Print the first N entries generated by a mix automaton
    Gen {
        file: PathBuf,
        #[arg(short)]
        n: u64,
    },
}

#[derive(Subcommand)]
enum PdlCmd {
    /// Evaluate a formula on the model of a graph
    Eval {
        graph: PathBuf,
        #[arg(short, long)]
        formula: String,
    },
    /// Print the characterizing sentence of a state
    Characterize {
        graph: PathBuf,
        #[arg(short, long)]
        state: String,
    },
}

#[derive(Subcommand)]
enum FractranCmd {
    /// Run a program on N and print the output
    Run {
        file: PathBuf,
        #[arg(short)]
        n: BigUint,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
    },
    /// Print the two gadget programs and their primes
    Gadget { file: PathBuf },
    /// Print the stream specification encoding a decreasing program
    ToSpec { file: PathBuf },
    /// Compare the gadget streams up to position N
    Probe {
        file: PathBuf,
        #[arg(short)]
        n: u64,
        #[arg(long)]
        budget: Option<u64>,
    },
}

/// Positive verdict or success.
const OK: u8 = 0;
/// Negative verdict.
const NO: u8 = 1;
/// Analysis or input error.
const FAIL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(FAIL)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_spec(path: &Path) -> Result<ZipSpec, String> {
    ZipSpec::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<ObsGraph, String> {
    ObsGraph::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_automaton(path: &Path) -> Result<Automaton, String> {
    Automaton::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn budget_of(flag: Option<u64>) -> RewriteBudget {
    flag.map(RewriteBudget::new).unwrap_or_default()
}

fn render_prefix(prefix: &Prefix) -> String {
    if prefix.iter().all(|s| s.name().len() == 1) {
        prefix.iter().map(|s| s.name()).collect()
    } else {
        prefix
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Check { file, budget } => {
            let spec = load_spec(&file)?;
            if spec.dialect() == Dialect::ZipPi {
                // no exact cycle analysis with projections; bounded witness only
                match eval_prefix(&spec, 50, budget_of(budget)) {
                    Ok(_) => {
                        println!("productive (bounded evaluation witness; zip-pi is a semi-decision)");
                        Ok(OK)
                    }
                    Err(e) => {
                        println!("not productive within budget: {e}");
                        Ok(NO)
                    }
                }
            } else {
                let report = leftmost_cycles(&spec).map_err(|e| e.to_string())?;
                for cycle in &report.cycles {
                    let kind = if cycle.guarded { "guarded" } else { "unguarded" };
                    let mut path: Vec<&str> =
                        cycle.vars.iter().map(|v| v.name()).collect();
                    path.push(cycle.vars[0].name());
                    println!("{kind} leftmost cycle: {}", path.join(" -> "));
                }
                if report.all_guarded() {
                    println!("productive");
                    Ok(OK)
                } else {
                    println!("not productive");
                    Ok(NO)
                }
            }
        }
        Command::Solve { file } => {
            let spec = load_spec(&file)?;
            let solutions = solve_all(&spec).map_err(|e| e.to_string())?;
            for (i, s) in solutions.iter().enumerate() {
                println!("# solution {i}");
                print!("{}", s.to_text());
            }
            Ok(OK)
        }
        Command::Eval {
            file,
            n,
            proj,
            budget,
        } => {
            let spec = load_spec(&file)?;
            let budget = budget_of(budget);
            let prefix = match proj {
                Some(ik) => project_prefix(&spec, ik[0], ik[1], n, budget),
                None => eval_prefix(&spec, n, budget),
            }
            .map_err(|e| e.to_string())?;
            println!("{}", render_prefix(&prefix));
            Ok(OK)
        }
        Command::Flatten { file } => {
            let spec = load_spec(&file)?;
            let flat = flatten(&spec).map_err(|e| e.to_string())?;
            print!("{}", flat.spec().to_text());
            Ok(OK)
        }
        Command::Graph {
            file,
            cobasis,
            minimize: want_minimal,
            format,
        } => {
            let spec = load_spec(&file)?;
            let mut g = match cobasis.as_str() {
                "n" | "mix" => ObsGraph::of_spec(&spec).map_err(|e| e.to_string())?,
                "o" => {
                    let n = ObsGraph::of_spec(&spec).map_err(|e| e.to_string())?;
                    ngraph_to_ograph(&n).map_err(|e| e.to_string())?
                }
                other => return Err(format!("unknown cobasis {other} (use n, o or mix)")),
            };
            if cobasis == "mix" && !matches!(g.cobasis(), Cobasis::Mix) {
                return Err(format!(
                    "{} is a {} specification; its graph uses the {} cobasis",
                    file.display(),
                    spec.dialect(),
                    g.cobasis()
                ));
            }
            if want_minimal {
                g = minimize(&g);
            }
            match format.as_str() {
                "dot" => print!("{}", g.to_dot()),
                "json" => println!("{}", g.to_json()),
                other => return Err(format!("unknown format {other} (use dot or json)")),
            }
            Ok(OK)
        }
        Command::Equiv {
            file1,
            file2,
            prefix,
            budget,
        } => {
            let s1 = load_spec(&file1)?;
            let s2 = load_spec(&file2)?;
            if let Some(n) = prefix {
                return match prefix_compare(
                    StreamHandle::Spec(&s1),
                    StreamHandle::Spec(&s2),
                    n,
                    budget_of(budget),
                )
                .map_err(|e| e.to_string())?
                {
                    PrefixOutcome::Equal => {
                        println!("equal up to {n}");
                        Ok(OK)
                    }
                    PrefixOutcome::DiffersAt { index, left, right } => {
                        println!("differ at index {index}: {left} vs {right}");
                        Ok(NO)
                    }
                };
            }
            let report = equivalent(&s1, &s2).map_err(|e| {
                format!("{e}\nhint: --prefix N compares prefixes of any two specifications")
            })?;
            if report.equivalent {
                println!("equivalent");
                for m in &report.matches {
                    println!("# solution {} ~ solution {}", m.left, m.right);
                    for (a, b) in &m.relation {
                        println!("#   {a} ~ {b}");
                    }
                }
                Ok(OK)
            } else {
                match &report.witness {
                    Some(BisimWitness::DifferentOutput { index, left, right }) => {
                        println!("not equivalent: streams differ at index {index}: {left} vs {right}");
                    }
                    _ => println!(
                        "not equivalent: {} of {} left and {} of {} right solutions matched",
                        report.matches.len(),
                        report.left_solutions,
                        report.matches.len(),
                        report.right_solutions
                    ),
                }
                Ok(NO)
            }
        }
        Command::Dfao { cmd } => match cmd {
            DfaoCmd::FromGraph { file } => {
                let g = load_graph(&file)?;
                let a = graph_to_dfao(&g).map_err(|e| e.to_string())?;
                println!("{}", a.to_json());
                Ok(OK)
            }
            DfaoCmd::ToGraph { file } => {
                let a = load_automaton(&file)?;
                let g = dfao_to_graph(&a).map_err(|e| e.to_string())?;
                println!("{}", g.to_json());
                Ok(OK)
            }
            DfaoCmd::ZeroInvariant { file } => {
                let a = load_automaton(&file)?;
                let fixed = match a {
                    Automaton::Dfao(d) => Automaton::Dfao(make_zero_invariant_dfao(&d)),
                    Automaton::Mix(m) => Automaton::Mix(make_zero_invariant_mix(&m)),
                };
                println!("{}", fixed.to_json());
                Ok(OK)
            }
        },
        Command::Mix { cmd } => match cmd {
            MixCmd::Repr { n, determiner } => {
                let a = load_automaton(&determiner)?;
                let p = match a {
                    Automaton::Mix(m) => m.induced_determiner(),
                    Automaton::Dfao(_) => {
                        return Err("the determiner must be a mixdfao".to_string())
                    }
                };
                println!("{}", repr_mix(n, &p));
                Ok(OK)
            }
            MixCmd::Gen { file, n } => {
                let a = load_automaton(&file)?;
                let m = match a {
                    Automaton::Mix(m) => m,
                    Automaton::Dfao(_) => {
                        return Err("mix gen needs a mixdfao; use dfao commands otherwise".into())
                    }
                };
                let prefix: Prefix = (0..n).map(|i| generate_mix(&m, m.initial(), i)).collect();
                println!("{}", render_prefix(&prefix));
                Ok(OK)
            }
        },
        Command::Pdl { cmd } => match cmd {
            PdlCmd::Eval { graph, formula } => {
                let g = load_graph(&graph)?;
                let model = model_of_graph(&g);
                let f = Formula::parse(&formula).map_err(|e| e.to_string())?;
                let sat = pdl_eval(&model, &f).map_err(|e| e.to_string())?;
                let names: Vec<&str> = sat
                    .iter()
                    .map(|&i| model.state_names[i].as_str())
                    .collect();
                println!("satisfied at: {}", names.join(", "));
                if sat.contains(&g.root().0) {
                    println!("root satisfies the sentence");
                    Ok(OK)
                } else {
                    println!("root does not satisfy the sentence");
                    Ok(NO)
                }
            }
            PdlCmd::Characterize { graph, state } => {
                let g = load_graph(&graph)?;
                let model = model_of_graph(&g);
                let x = model
                    .state_by_name(&state)
                    .ok_or_else(|| format!("no state named {state}"))?;
                println!("{}", characterize(&model, x));
                Ok(OK)
            }
        },
        Command::Fractran { cmd } => match cmd {
            FractranCmd::Run { file, n, max_steps } => {
                let program =
                    FractranProgram::parse(&read(&file)?).map_err(|e| e.to_string())?;
                match run_output(&program, &n, max_steps) {
                    RunOutcome::Output(s) => {
                        println!("{s}");
                        Ok(OK)
                    }
                    RunOutcome::Halt => {
                        println!("bot");
                        Ok(OK)
                    }
                    RunOutcome::Timeout => {
                        println!("timeout after {max_steps} steps");
                        Ok(FAIL)
                    }
                    RunOutcome::Cancelled => unreachable!("no cancellation token"),
                }
            }
            FractranCmd::Gadget { file } => {
                let program =
                    FractranProgram::parse(&read(&file)?).map_err(|e| e.to_string())?;
                let (f0, f1, primes) = build_gadget(&program).map_err(|e| e.to_string())?;
                println!(
                    "c = {}, z2 = {}, z1 = {}",
                    primes.c, primes.z2, primes.z1
                );
                println!("# F0");
                print!("{}", f0.to_text());
                println!("# F1");
                print!("{}", f1.to_text());
                Ok(OK)
            }
            FractranCmd::ToSpec { file } => {
                let program =
                    FractranProgram::parse(&read(&file)?).map_err(|e| e.to_string())?;
                let spec = to_zip_pi_spec(&program).map_err(|e| e.to_string())?;
                print!("{}", spec.to_text());
                Ok(OK)
            }
            FractranCmd::Probe { file, n, budget } => {
                let program =
                    FractranProgram::parse(&read(&file)?).map_err(|e| e.to_string())?;
                match gadget_equiv_probe(&program, n, budget_of(budget))
                    .map_err(|e| e.to_string())?
                {
                    ProbeOutcome::AgreeUpTo(n) => {
                        println!("agree up to {n}");
                        Ok(OK)
                    }
                    ProbeOutcome::Difference { index, left, right } => {
                        println!(
                            "first difference at index {index}: {left} vs {right} (the program halts on 2)"
                        );
                        Ok(NO)
                    }
                }
            }
        },
    }
}
