use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dppmle::coloring::{self, DecoderParams};
use dppmle::diagonal;
use dppmle::linalg::Vec3;
use dppmle::mle::{self, OptimizerConfig};
use dppmle::project::{self, ProjectionParams};
use dppmle::reduction::{build_expander, BotGraph, CnfFormula, PlainGraphFile};
use dppmle::{Dataset, Error, GramFactor, Graph, MarginalKernel};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "dppmle",
    version,
    about = "DPP likelihood, diagonal certificates and the coloring reduction"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "DPPMLE_SEED", default_value_t = 0)]
    seed: u64,
    /// Numerical tolerance for checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Suppress the header and human summaries on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct KernelSource {
    /// Dense kernel file.
    #[arg(long, conflicts_with = "factor", required_unless_present = "factor")]
    kernel: Option<PathBuf>,
    /// Gram factor file.
    #[arg(long)]
    factor: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check symmetry and that the spectrum lies in [0, 1].
    Validate {
        #[arg(long)]
        kernel: PathBuf,
    },
    /// Mean negative log-likelihood of a dataset.
    Likelihood {
        #[command(flatten)]
        source: KernelSource,
        #[arg(long)]
        data: PathBuf,
    },
    /// Probability of every subset (small ground sets only).
    Enumerate {
        #[arg(long)]
        kernel: PathBuf,
    },
    /// Diagonal kernel diag(a_i/m) and its likelihood.
    Diag {
        #[arg(long)]
        data: PathBuf,
        /// Write the kernel file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximation-ratio certificate of the diagonal kernel.
    Bound {
        #[arg(long)]
        data: PathBuf,
    },
    /// Build the reduction graph of a 3-CNF formula.
    Reduce {
        #[arg(long)]
        cnf: PathBuf,
        /// Occurrence bound; defaults to the formula's own.
        #[arg(long)]
        k: Option<usize>,
        /// Expander degree.
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        max_retries: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hypergraph lift of a graph into a dataset of triples.
    Lift {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gram factor of the kernel induced by a proper 3-coloring.
    ColorKernel {
        #[arg(long)]
        graph: PathBuf,
        /// Coloring file.
        #[arg(long, group = "how")]
        colors: Option<PathBuf>,
        /// Assignment file; the graph must be a reduction graph.
        #[arg(long, group = "how")]
        assignment: Option<PathBuf>,
        /// Find a coloring with the exact solver.
        #[arg(long, group = "how")]
        solve: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form optimal likelihood of a 3-colorable graph's lift.
    OptimalValue {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Mean squared edge inner product of a vector or discrete coloring.
    VectorError {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
    },
    /// Round a near-optimal kernel on a lifted dataset to rank 3.
    Project3 {
        #[command(flatten)]
        source: KernelSource,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon0: f64,
        /// Override the measured slack ℓ(K) - ℓ*.
        #[arg(long)]
        delta: Option<f64>,
        /// Enforce the slack precondition and the residual bound.
        #[arg(long)]
        guarantee: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read an assignment off a coloring of a reduction graph.
    Decode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        coloring: PathBuf,
        #[arg(long, default_value_t = 0.005)]
        slack: f64,
        #[arg(long)]
        trim_threshold: Option<f64>,
        /// Write the assignment file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical maximum-likelihood search.
    Mle {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        /// Write the best kernel file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce, lift, color and compare the likelihood with the optimum.
    Pipeline {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        max_retries: usize,
    },
}

/// A check that ran but did not pass; exits with code 1.
struct CheckFailed {
    kind: &'static str,
    message: String,
    report: Option<Value>,
}

enum Failure {
    Lib(Error),
    Check(CheckFailed),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

/// Reports are JSON values; artifacts pass through verbatim so stdout is
/// byte-identical to the library's serialization.
enum Payload {
    Report(Value),
    Artifact(String),
}

impl From<Value> for Payload {
    fn from(v: Value) -> Self {
        Payload::Report(v)
    }
}

type Outcome = Result<Payload, Failure>;

/// JSON has no infinities; non-finite values become strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::Lib(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

/// Writes `artifact` to `out`, or returns it as the stdout payload.
fn deliver(artifact: String, out: Option<&Path>, report: Value) -> Outcome {
    match out {
        Some(p) => {
            fs::write(p, artifact + "\n")?;
            Ok(report.into())
        }
        None => Ok(Payload::Artifact(artifact)),
    }
}

fn load_factor(src: &KernelSource) -> Result<GramFactor, Failure> {
    match (&src.kernel, &src.factor) {
        (_, Some(f)) => Ok(GramFactor::from_json_str(&read(f)?)?),
        (Some(k), None) => Ok(GramFactor::from_kernel(
            &MarginalKernel::from_json_str(&read(k)?)?,
            1e-12,
        )),
        (None, None) => unreachable!("clap requires one source"),
    }
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    Ok(PlainGraphFile::from_json_str(&read(path)?)?.to_graph()?)
}

fn load_vectors(path: &Path) -> Result<Vec<Vec3>, Failure> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if v.get("vectors").is_some() {
        Ok(coloring::vector::vectors_from_json_str(&text)?)
    } else {
        Ok(coloring::discrete_to_vectors(
            &coloring::discrete::colors_from_json_str(&text)?,
        ))
    }
}

fn count_graph(
    f: &CnfFormula,
    k: Option<usize>,
    d: usize,
    seed: u64,
    retries: usize,
) -> dppmle::Result<BotGraph> {
    let k = k.unwrap_or_else(|| f.k());
    let e = build_expander(2 * k * f.n_vars(), d, seed, retries)?;
    BotGraph::build(f, k, e)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Validate { kernel } => {
            let k = MarginalKernel::from_json_str(&read(kernel)?)?;
            let rep = k.validate(cli.tol);
            let value = serde_json::to_value(&rep).expect("report serializes");
            if rep.passed {
                Ok(value.into())
            } else {
                Err(Failure::Check(CheckFailed {
                    kind: "validation",
                    message: rep.failures.join("; "),
                    report: Some(value),
                }))
            }
        }
        Cmd::Likelihood { source, data } => {
            let d = Dataset::from_json_str(&read(data)?)?;
            let ll = match &source.kernel {
                Some(k) => MarginalKernel::from_json_str(&read(k)?)?.log_likelihood(&d)?,
                None => load_factor(source)?.log_likelihood(&d)?,
            };
            Ok(Payload::Report(
                json!({"n": d.n(), "m": d.m(), "log_likelihood": num(ll)}),
            ))
        }
        Cmd::Enumerate { kernel } => {
            let k = MarginalKernel::from_json_str(&read(kernel)?)?;
            let p = k.enumerate_distribution()?;
            let rows: Vec<Value> = p
                .iter()
                .enumerate()
                .map(|(mask, &pr)| {
                    let s: Vec<usize> = (0..k.n())
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| i + 1)
                        .collect();
                    json!({"subset": s, "probability": pr})
                })
                .collect();
            Ok(Payload::Report(
                json!({"n": k.n(), "total": p.iter().sum::<f64>(), "distribution": rows}),
            ))
        }
        Cmd::Diag { data, out } => {
            let d = Dataset::from_json_str(&read(data)?)?;
            let k = diagonal::diagonal_kernel(&d);
            let ll = diagonal::diag_log_likelihood(&d);
            let report = json!({"diagonal": k.diag(), "log_likelihood": num(ll)});
            match out {
                Some(p) => {
                    fs::write(p, k.to_json_string() + "\n")?;
                    Ok(report.into())
                }
                None => Ok(report.into()),
            }
        }
        Cmd::Bound { data } => {
            let d = Dataset::from_json_str(&read(data)?)?;
            let c = diagonal::certificate(&d)?;
            Ok(Payload::Report(json!({
                "m": c.m,
                "factored_elements": c.factored_elements.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "a_max": c.a_max,
                "diag_log_likelihood": num(c.diag_log_likelihood),
                "lower_bound": num(c.lower_bound),
                "achieved_ratio": num(c.achieved_ratio),
                "conditional_bound": num(c.conditional_bound),
                "unconditional_bound": num(c.unconditional_bound),
            })))
        }
        Cmd::Reduce {
            cnf,
            k,
            d,
            max_retries,
            out,
        } => {
            let f = CnfFormula::parse_dimacs(&read(cnf)?)?;
            let g = count_graph(&f, *k, *d, cli.seed, *max_retries)?;
            let audit = g.count_audit(&[]);
            let report = serde_json::to_value(&audit).expect("audit serializes");
            if !audit.passed() {
                return Err(Failure::Check(CheckFailed {
                    kind: "count_audit",
                    message: audit.mismatches.join("; "),
                    report: Some(report),
                }));
            }
            deliver(g.to_json_string(), out.as_deref(), report)
        }
        Cmd::Lift { graph, out } => {
            let g = load_graph(graph)?;
            let d = g.lift_to_hypergraph()?;
            let report = json!({"ground_set_size": d.n(), "m": d.m()});
            deliver(d.to_json_string(), out.as_deref(), report)
        }
        Cmd::ColorKernel {
            graph,
            colors,
            assignment,
            solve,
            out,
        } => {
            let text = read(graph)?;
            let g = PlainGraphFile::from_json_str(&text)?.to_graph()?;
            let c = if let Some(p) = colors {
                coloring::discrete::colors_from_json_str(&read(p)?)?
            } else if let Some(p) = assignment {
                let bot = BotGraph::from_json_str(&text)?;
                let a = coloring::discrete::assignment_from_json_str(&read(p)?)?;
                coloring::assignment_to_coloring(&bot, &a)?
            } else if *solve {
                coloring::find_three_coloring(&g, None)?.ok_or_else(|| {
                    Failure::Check(CheckFailed {
                        kind: "not_colorable",
                        message: "graph has no proper 3-coloring".into(),
                        report: None,
                    })
                })?
            } else {
                return Err(Error::Parameter(
                    "one of --colors, --assignment or --solve is required".into(),
                )
                .into());
            };
            let f = coloring::coloring_to_kernel(&g, &c)?;
            let d = g.lift_to_hypergraph()?;
            let report = json!({
                "columns": f.n(),
                "rank": f.rank(),
                "log_likelihood": num(f.log_likelihood(&d)?),
                "optimal_value": num(coloring::optimal_value(&g)?),
            });
            deliver(f.to_json_string(), out.as_deref(), report)
        }
        Cmd::OptimalValue { graph } => {
            let g = load_graph(graph)?;
            Ok(Payload::Report(
                json!({"optimal_value": num(coloring::optimal_value(&g)?), "edges": g.m()}),
            ))
        }
        Cmd::VectorError {
            graph,
            coloring: path,
        } => {
            let g = load_graph(graph)?;
            let v = load_vectors(path)?;
            Ok(Payload::Report(json!({
                "error": num(coloring::vector_error(&g, &v)?),
                "log_likelihood": num(coloring::likelihood_from_angles(&g, &v)?),
            })))
        }
        Cmd::Project3 {
            source,
            graph,
            data,
            epsilon0,
            delta,
            guarantee,
            out,
        } => {
            let f = load_factor(source)?;
            let g = load_graph(graph)?;
            let d = Dataset::from_json_str(&read(data)?)?;
            let params = ProjectionParams {
                epsilon0: *epsilon0,
                delta: *delta,
                guarantee: *guarantee,
                ..Default::default()
            };
            let p = project::project_to_rank3(&f, &d, &g, &params)?;
            let report = serde_json::to_value(&p.report).expect("report serializes");
            deliver(p.factor.to_json_string(), out.as_deref(), report)
        }
        Cmd::Decode {
            graph,
            coloring: path,
            slack,
            trim_threshold,
            out,
        } => {
            let bot = BotGraph::from_json_str(&read(graph)?)?;
            let v = load_vectors(path)?;
            let params = DecoderParams {
                slack: *slack,
                trim_threshold: *trim_threshold,
                ..Default::default()
            };
            let o = coloring::decode_assignment(&bot, &v, &params)?;
            if let Some(p) = out {
                fs::write(
                    p,
                    coloring::discrete::assignment_to_json_string(&o.assignment) + "\n",
                )?;
            }
            Ok(Payload::Report(
                serde_json::to_value(&o).expect("outcome serializes"),
            ))
        }
        Cmd::Mle {
            data,
            rank,
            restarts,
            iters,
            out,
        } => {
            let d = Dataset::from_json_str(&read(data)?)?;
            let cfg = OptimizerConfig {
                rank: *rank,
                restarts: *restarts,
                max_iters: *iters,
                tol: cli.tol.max(1e-12),
                seed: cli.seed,
            };
            let res = mle::optimize(&d, &cfg)?;
            let st = d.stats();
            let deviation: Vec<f64> = res
                .kernel
                .diag()
                .iter()
                .zip(&st.frequencies)
                .map(|(k, &a)| k - a as f64 / st.m as f64)
                .collect();
            let restarts: Vec<Value> = res
                .restarts
                .iter()
                .map(|s| {
                    json!({
                        "log_likelihood": num(s.log_likelihood),
                        "iterations": s.iterations,
                        "converged": s.converged,
                        "gradient_norm": num(s.gradient_norm),
                    })
                })
                .collect();
            let report = json!({
                "log_likelihood": num(res.log_likelihood),
                "diagonal_deviation": deviation,
                "restarts": restarts,
                "singular_samples": res.singular_samples,
                "failed": !res.log_likelihood.is_finite(),
            });
            if let Some(p) = out {
                fs::write(p, res.kernel.to_json_string() + "\n")?;
            }
            Ok(report.into())
        }
        Cmd::Pipeline {
            cnf,
            k,
            d,
            max_retries,
        } => {
            let f = CnfFormula::parse_dimacs(&read(cnf)?)?;
            let a = f.solve().ok_or_else(|| {
                Failure::Lib(Error::Precondition(
                    "formula is unsatisfiable; the pipeline needs a satisfiable one".into(),
                ))
            })?;
            let g = count_graph(&f, *k, *d, cli.seed, *max_retries)?;
            let data = g.graph().lift_to_hypergraph()?;
            let colors = coloring::assignment_to_coloring(&g, &a)?;
            let factor = coloring::coloring_to_kernel(g.graph(), &colors)?;
            let ll = factor.log_likelihood(&data)?;
            let opt = coloring::optimal_value(g.graph())?;
            let matched = (ll - opt).abs() <= cli.tol;
            let decoded = coloring::decode_assignment(
                &g,
                &coloring::discrete_to_vectors(&colors),
                &DecoderParams::default(),
            )
            .map(|o| json!(o.satisfied_clauses))
            .unwrap_or_else(|e| json!(e.to_string()));
            let report = json!({
                "status": if matched { "OPTIMAL-MATCH" } else { "OPTIMAL-MISMATCH" },
                "nodes": g.graph().n(),
                "edges": g.graph().m(),
                "ground_set_size": data.n(),
                "samples": data.m(),
                "log_likelihood": num(ll),
                "optimal_value": num(opt),
                "difference": num(ll - opt),
                "decoded_satisfied_clauses": decoded,
                "clauses": f.m(),
            });
            if matched {
                Ok(report.into())
            } else {
                Err(Failure::Check(CheckFailed {
                    kind: "optimal_mismatch",
                    message: format!(
                        "likelihood {ll} differs from optimum {opt} by more than {}",
                        cli.tol
                    ),
                    report: Some(report),
                }))
            }
        }
    }
}

fn summary(cmd: &Cmd, v: &Value) -> Option<String> {
    let get = |k: &str| v.get(k).map(|x| x.to_string());
    match cmd {
        Cmd::Pipeline { .. } => get("status"),
        Cmd::Likelihood { .. } | Cmd::Mle { .. } => {
            get("log_likelihood").map(|x| format!("log-likelihood {x}"))
        }
        Cmd::OptimalValue { .. } => get("optimal_value").map(|x| format!("optimal value {x}")),
        Cmd::Bound { .. } => get("achieved_ratio").map(|x| format!("achieved ratio {x}")),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !cli.quiet {
        let args: Vec<String> = std::env::args().skip(1).collect();
        eprintln!(
            "# dppmle {} seed={} tol={:e} args=[{}]",
            env!("CARGO_PKG_VERSION"),
            cli.seed,
            cli.tol,
            args.join(" ")
        );
    }
    match run(&cli) {
        Ok(Payload::Artifact(text)) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Payload::Report(v)) => {
            println!("{v}");
            if !cli.quiet {
                if let Some(s) = summary(&cli.cmd, &v) {
                    eprintln!("{s}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Lib(e)) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
        Err(Failure::Check(c)) => {
            if let Some(r) = c.report {
                println!("{r}");
            }
            eprintln!("{}", json!({"error": c.kind, "message": c.message}));
            ExitCode::from(1)
        }
    }
}
