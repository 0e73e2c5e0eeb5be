use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use klwl_core::count::{self, CountMode, Pattern, PatternKind};
use klwl_core::gen::Family;
use klwl_core::graph::parse_any;
use klwl_core::klwl::{matrix_ascii, DEFAULT_BUDGET};
use klwl_core::suite::{run_suite, Level, SuiteOptions};
use klwl_core::{kl_color, Graph, KlConfig, Pooling, ScopePolicy, SelectionPolicy, Variant};

#[derive(Parser)]
#[command(
    name = "klwl",
    version,
    about = "k,l-WL graph distinguishability experiments"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated graph, e.g. `rook4`, `cycle:6`, `cfi:chi:clique:3:twisted`.
    Gen {
        family: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "edges")]
        format: GraphFormat,
    },
    /// Run one k,l-WL comparison and print a JSON report.
    /// Exit code: 0 not distinguished, 1 distinguished, 2 error.
    Compare {
        g: PathBuf,
        h: PathBuf,
        #[command(flatten)]
        algo: AlgoArgs,
    },
    /// Distinguishability matrix over k and l ranges.
    Matrix {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, default_value = "1,2")]
        k_range: String,
        #[arg(long, default_value = "0,1,2")]
        l_range: String,
        #[arg(long, default_value = "fwl")]
        variant: Variant,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "ascii")]
        format: MatrixFormat,
    },
    /// Count pattern occurrences in a graph.
    Count {
        file: PathBuf,
        /// Comma-separated: triangle, tailed, star, chordal, cycle:K.
        #[arg(long, default_value = "triangle")]
        patterns: String,
        #[arg(long, default_value = "induced")]
        mode: CountMode,
    },
    /// Exact isomorphism test by backtracking. Exit code: 0 isomorphic, 1 not, 2 error.
    IsoOracle {
        g: PathBuf,
        h: PathBuf,
        #[arg(long, default_value_t = count::ORACLE_MAX_NODES)]
        max_nodes: usize,
    },
    /// Run the acceptance criteria.
    Suite {
        #[arg(long, default_value = "quick")]
        level: Level,
        /// Include the multi-hour gamma separation check.
        #[arg(long)]
        optional: bool,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Print the full report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct AlgoArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long, default_value = "wl")]
    variant: Variant,
    #[arg(long, default_value = "tl")]
    pooling: Pooling,
    /// all | random:RATE[:SEED] | ego:K | constraint:D | cluster:M
    #[arg(long, default_value = "all")]
    select: String,
    /// full | labels | khop:R | rooted:R
    #[arg(long, default_value = "full")]
    scope: ScopePolicy,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Seed for random selection when the policy string does not carry one.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Edges,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Json,
    Ascii,
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (g, _) = parse_any(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(g)
}

fn selection(s: &str, seed: u64) -> anyhow::Result<SelectionPolicy> {
    let s = match s.split(':').count() {
        2 if s.starts_with("random:") => format!("{s}:{seed}"),
        _ => s.to_string(),
    };
    Ok(s.parse()?)
}

fn parse_range(s: &str) -> anyhow::Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range {s:?}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().with_context(|| format!("bad range {s:?}")))
        .collect()
}

#[derive(Serialize)]
struct ConfigEcho {
    k: usize,
    l: usize,
    variant: Variant,
    pooling: Pooling,
    selection: String,
    scope: String,
    budget: usize,
    seed: u64,
    threads: usize,
}

#[derive(Serialize)]
struct Decision {
    distinguished: bool,
    color_g: u32,
    color_h: u32,
}

#[derive(Serialize)]
struct Flags {
    sampled: bool,
    heuristic: bool,
}

#[derive(Serialize)]
struct RunReport {
    config: ConfigEcho,
    g: String,
    h: String,
    decision: Option<Decision>,
    iterations: Option<usize>,
    labeled_copies: Option<usize>,
    tracked_tuples: Option<usize>,
    wall_ms: u128,
    flags: Flags,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn compare(g: &Path, h: &Path, a: &AlgoArgs) -> ExitCode {
    let start = Instant::now();
    let sel = selection(&a.select, a.seed);
    let config = ConfigEcho {
        k: a.k,
        l: a.l,
        variant: a.variant,
        pooling: a.pooling,
        selection: sel
            .as_ref()
            .map_or_else(|_| a.select.clone(), |s| s.to_string()),
        scope: a.scope.to_string(),
        budget: a.budget,
        seed: a.seed,
        threads: rayon::current_num_threads(),
    };
    let flags = Flags {
        sampled: sel.as_ref().is_ok_and(SelectionPolicy::is_sampled),
        heuristic: sel.as_ref().is_ok_and(SelectionPolicy::is_heuristic),
    };
    let result = (|| -> anyhow::Result<_> {
        let sel = sel?;
        let (gg, hh) = (read_graph(g)?, read_graph(h)?);
        let cfg = KlConfig::new(a.k, a.l, a.variant)
            .pooling(a.pooling)
            .selection(sel)
            .scope(a.scope)
            .budget(a.budget);
        Ok(kl_color(&gg, &hh, &cfg)?)
    })();
    let mut report = RunReport {
        config,
        g: g.display().to_string(),
        h: h.display().to_string(),
        decision: None,
        iterations: None,
        labeled_copies: None,
        tracked_tuples: None,
        wall_ms: 0,
        flags,
        error: None,
    };
    let code = match result {
        Ok(out) => {
            report.decision = Some(Decision {
                distinguished: out.distinguished,
                color_g: out.color_g,
                color_h: out.color_h,
            });
            report.iterations = Some(out.iterations);
            report.labeled_copies = Some(out.labeled_copies);
            report.tracked_tuples = Some(out.tracked_tuples);
            if out.distinguished {
                1
            } else {
                0
            }
        }
        Err(e) => {
            report.error = Some(format!("{e:#}"));
            2
        }
    };
    report.wall_ms = start.elapsed().as_millis();
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    ExitCode::from(code)
}

fn matrix_csv(m: &[Vec<bool>], ks: &[usize], ls: &[usize]) -> String {
    let mut out = String::from("k\\l");
    for l in ls {
        out.push_str(&format!(",{l}"));
    }
    out.push('\n');
    for (k, row) in ks.iter().zip(m) {
        out.push_str(&k.to_string());
        for &b in row {
            out.push_str(if b { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen {
            family,
            output,
            format,
        } => {
            let g = family.parse::<Family>()?.build()?;
            let text = match format {
                GraphFormat::Edges => g.to_edge_list(),
                GraphFormat::Json => g.to_json() + "\n",
            };
            match output {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{text}"),
            }
        }
        Cmd::Compare { g, h, algo } => return Ok(compare(&g, &h, &algo)),
        Cmd::Matrix {
            g,
            h,
            k_range,
            l_range,
            variant,
            budget,
            format,
        } => {
            let (ks, ls) = (parse_range(&k_range)?, parse_range(&l_range)?);
            let (gg, hh) = (read_graph(&g)?, read_graph(&h)?);
            let m = klwl_core::kl_matrix(&gg, &hh, &ks, &ls, variant, budget)?;
            match format {
                MatrixFormat::Ascii => print!("{}", matrix_ascii(&m, &ks, &ls)),
                MatrixFormat::Csv => print!("{}", matrix_csv(&m, &ks, &ls)),
                MatrixFormat::Json => {
                    let v = serde_json::json!({
                        "variant": variant,
                        "k_range": ks,
                        "l_range": ls,
                        "matrix": m,
                    });
                    println!("{v}");
                }
            }
        }
        Cmd::Count {
            file,
            patterns,
            mode,
        } => {
            let g = read_graph(&file)?;
            let mut counts = serde_json::Map::new();
            for name in patterns.split(',').map(str::trim) {
                let kind: PatternKind = name.parse()?;
                let c = count::count_pattern(&g, &Pattern::new(kind, mode))?;
                counts.insert(kind.to_string(), c.into());
            }
            let v = serde_json::json!({ "file": file.display().to_string(), "mode": mode, "counts": counts });
            println!("{v}");
        }
        Cmd::IsoOracle { g, h, max_nodes } => {
            let (gg, hh) = (read_graph(&g)?, read_graph(&h)?);
            let iso = count::brute_force_isomorphic_with_limit(&gg, &hh, max_nodes)?;
            println!("{}", serde_json::json!({ "isomorphic": iso }));
            return Ok(ExitCode::from(if iso { 0 } else { 1 }));
        }
        Cmd::Suite {
            level,
            optional,
            seed,
            json,
        } => {
            let opts = SuiteOptions {
                level,
                optional,
                seed,
            };
            let report = run_suite(&opts, |r| {
                if json {
                    eprintln!("{r}");
                } else {
                    println!("{r}");
                }
            });
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                let failed = report
                    .criteria
                    .iter()
                    .filter(|c| !c.passed && !c.skipped)
                    .count();
                println!("{} criteria, {failed} failed", report.criteria.len());
            }
            return Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
