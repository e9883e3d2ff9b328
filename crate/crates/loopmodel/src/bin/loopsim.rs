//! Command-line runner for reproducible loop-model experiments.
//!
//! Every output starts with `#`-prefixed metadata lines (version, spec
//! hash, seed, wall time); the data section below them is byte-identical
//! across re-runs with the same spec and seed.
//!
//! Exit codes: 0 ok, 2 spec error, 3 resource/truncation guard,
//! 4 internal invariant violation.

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopmodel::domination::{self, DeltaVariant, Verdict};
use loopmodel::loops::{count_loops, decompose};
use loopmodel::oracle::{enumerate, naive_trace};
use loopmodel::percolation::{decay_profile, estimate_reach_both, fit_log_slope};
use loopmodel::sampler::{sample_direct_theta1, Mcmc, SamplerConfig};
use loopmodel::{blocking, Graph, LinkConfig, ModelError, Params, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

const DEFAULT_SEED: u64 = 0x4C4F_4F50; // fixed by default: reproducibility first

#[derive(Parser)]
#[command(name = "loopsim", version, about = "Random loop model simulator")]
struct Cli {
    /// TOML file providing defaults for model/sampler/graph options
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// write output here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the domination bound delta(beta, u, theta) in both forms
    Delta {
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, short = 'K')]
        k: usize,
        #[arg(long, value_enum, default_value_t = VariantOpt::Conservative)]
        variant: VariantOpt,
    },
    /// Draw link configurations (direct at theta = 1, Metropolis otherwise)
    Sample {
        #[command(flatten)]
        graph: GraphOpt,
        #[command(flatten)]
        model: ModelOpt,
        #[command(flatten)]
        run: RunOpt,
        /// append each configuration as JSON in a trailing column
        #[arg(long)]
        dump_config: bool,
    },
    /// Per-edge open/blocking/non-blocking indicators of one sample
    Indicators {
        #[command(flatten)]
        graph: GraphOpt,
        #[command(flatten)]
        model: ModelOpt,
        #[command(flatten)]
        run: RunOpt,
    },
    /// Probability that the source's cluster reaches a given radius
    Reach {
        #[command(flatten)]
        graph: GraphOpt,
        #[command(flatten)]
        model: ModelOpt,
        #[command(flatten)]
        run: RunOpt,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long)]
        radius: usize,
    },
    /// Boundary-reaching probabilities on centered 2D boxes
    Decay {
        #[command(flatten)]
        model: ModelOpt,
        #[command(flatten)]
        run: RunOpt,
        /// comma-separated box radii, e.g. 4,8,12,16
        #[arg(long, default_value = "4,8,12,16")]
        sizes: String,
    },
    /// Cross-validate the two loop-decomposition engines on random inputs
    VerifyLoops {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_vertices: usize,
        #[arg(long, default_value_t = 10)]
        max_links: usize,
        #[command(flatten)]
        run: RunOpt,
    },
    /// Exhaustive check of the conditional blocking probability bound
    VerifyDomination {
        #[command(flatten)]
        graph: GraphOpt,
        #[command(flatten)]
        model: ModelOpt,
        #[arg(long, default_value_t = 0)]
        e0: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Materialize the truncated configuration distribution
    Enumerate {
        #[command(flatten)]
        graph: GraphOpt,
        #[command(flatten)]
        model: ModelOpt,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantOpt {
    Conservative,
    Optimistic,
}

#[derive(Args)]
struct GraphOpt {
    /// generator spec: box:DIM:SIDE or box:DIM:SIDE:periodic
    #[arg(long)]
    graph: Option<String>,
    /// edge-list file: one `u v` pair per line, `#` comments
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

#[derive(Args)]
struct ModelOpt {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct RunOpt {
    /// 64-bit seed, or `random` for entropy
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Deserialize, Default)]
struct FileConfig {
    model: Option<FileModel>,
    sampler: Option<FileSampler>,
    graph: Option<FileGraph>,
}

#[derive(Deserialize, Default)]
struct FileModel {
    beta: Option<f64>,
    u: Option<f64>,
    theta: Option<f64>,
}

#[derive(Deserialize, Default)]
struct FileSampler {
    seed: Option<u64>,
    burn_in: Option<usize>,
    thinning: Option<usize>,
    chains: Option<usize>,
    samples: Option<u64>,
}

#[derive(Deserialize, Default)]
struct FileGraph {
    spec: Option<String>,
    file: Option<String>,
}

struct CliError {
    code: i32,
    msg: String,
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::Guard(_) | ModelError::ConditioningMass { .. } => 3,
            ModelError::DominationHypothesis { .. } => 4,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 2,
            msg: e.to_string(),
        }
    }
}

fn spec_err(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        msg: msg.into(),
    }
}

fn fnv1a(data: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn resolve_seed(run: &RunOpt, file: &FileConfig) -> Result<u64, CliError> {
    match run.seed.as_deref() {
        Some("random") => Ok(rand::thread_rng().gen()),
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| spec_err(format!("seed: expected u64 or `random`, got `{s}`"))),
        None => Ok(file
            .sampler
            .as_ref()
            .and_then(|s| s.seed)
            .unwrap_or(DEFAULT_SEED)),
    }
}

fn resolve_graph(opt: &GraphOpt, file: &FileConfig) -> Result<(Graph, String), CliError> {
    let from_spec = |spec: &str| -> Result<Graph, CliError> {
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["box", d, s] | ["box", d, s, "periodic"] => {
                let dim: usize = d.parse().map_err(|_| spec_err("graph: bad dimension"))?;
                let side: usize = s.parse().map_err(|_| spec_err("graph: bad side"))?;
                Ok(Graph::build_box(dim, side, parts.len() == 4)?)
            }
            _ => Err(spec_err(format!(
                "graph: expected box:DIM:SIDE[:periodic], got `{spec}`"
            ))),
        }
    };
    if let Some(path) = &opt.graph_file {
        let text = std::fs::read_to_string(path)?;
        return Ok((Graph::parse_edge_list(&text)?, format!("file:{}", path.display())));
    }
    if let Some(spec) = &opt.graph {
        return Ok((from_spec(spec)?, spec.clone()));
    }
    if let Some(fg) = &file.graph {
        if let Some(path) = &fg.file {
            let text = std::fs::read_to_string(path)?;
            return Ok((Graph::parse_edge_list(&text)?, format!("file:{path}")));
        }
        if let Some(spec) = &fg.spec {
            return Ok((from_spec(spec)?, spec.clone()));
        }
    }
    Err(spec_err("graph: provide --graph or --graph-file (or [graph] in --config)"))
}

fn resolve_params(opt: &ModelOpt, file: &FileConfig) -> Result<Params, CliError> {
    let fm = file.model.as_ref();
    let beta = opt
        .beta
        .or(fm.and_then(|m| m.beta))
        .ok_or_else(|| spec_err("model: --beta is required"))?;
    let u = opt
        .u
        .or(fm.and_then(|m| m.u))
        .ok_or_else(|| spec_err("model: --u is required"))?;
    let theta = opt.theta.or(fm.and_then(|m| m.theta)).unwrap_or(1.0);
    Ok(Params::new(beta, u, theta)?)
}

fn resolve_sampler(run: &RunOpt, file: &FileConfig, seed: u64) -> SamplerConfig {
    let fs = file.sampler.as_ref();
    let mut cfg = SamplerConfig {
        seed,
        ..SamplerConfig::default()
    };
    if let Some(b) = run.burn_in.or(fs.and_then(|s| s.burn_in)) {
        cfg.burn_in = b;
    }
    if let Some(t) = run.thin.or(fs.and_then(|s| s.thinning)) {
        cfg.thinning = t;
    }
    cfg
}

fn resolve_count(run: &RunOpt, file: &FileConfig, default: u64) -> u64 {
    run.samples
        .or(file.sampler.as_ref().and_then(|s| s.samples))
        .unwrap_or(default)
}

fn resolve_chains(run: &RunOpt, file: &FileConfig) -> usize {
    run.chains
        .or(file.sampler.as_ref().and_then(|s| s.chains))
        .unwrap_or(1)
        .max(1)
}

/// Metadata header + data section; the data section alone is the
/// reproducible part.
fn emit(out: &Option<PathBuf>, cmd: &str, spec: &str, seed: u64, started: Instant, data: &str) -> Result<(), CliError> {
    let mut text = String::new();
    let _ = writeln!(text, "# loopsim {}", loopmodel::VERSION);
    let _ = writeln!(text, "# cmd {cmd}");
    let _ = writeln!(text, "# spec {:016x}", fnv1a(spec.as_bytes()));
    let _ = writeln!(text, "# seed {seed}");
    let _ = writeln!(text, "# wall_time_ms {}", started.elapsed().as_millis());
    text.push_str(data);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sample_config(
    g: &Graph,
    p: &Params,
    cfg: &SamplerConfig,
    chain_seed: u64,
) -> Result<Vec<LinkConfig>, ModelError> {
    // caller drives counts; here: one warmed-up chain producing one config
    let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);
    if p.theta == 1.0 {
        return sample_direct_theta1(g, p, &mut rng).map(|c| vec![c]);
    }
    let mut chain = Mcmc::new(g, *p, cfg)?;
    for _ in 0..cfg.burn_in {
        chain.sweep(&mut rng);
    }
    Ok(vec![chain.state().clone()])
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| spec_err(format!("config: {e}")))?
        }
        None => FileConfig::default(),
    };

    match &cli.cmd {
        Cmd::Delta {
            beta,
            u,
            theta,
            k,
            variant,
        } => {
            let fm = file.model.as_ref();
            let beta = beta.or(fm.and_then(|m| m.beta)).ok_or_else(|| spec_err("--beta required"))?;
            let u = u.or(fm.and_then(|m| m.u)).ok_or_else(|| spec_err("--u required"))?;
            let theta = theta.or(fm.and_then(|m| m.theta)).unwrap_or(1.0);
            let conservative = domination::delta(beta, u, theta, *k, DeltaVariant::Conservative)?;
            let optimistic = domination::delta(beta, u, theta, *k, DeltaVariant::Optimistic)?;
            let selected = match variant {
                VariantOpt::Conservative => conservative,
                VariantOpt::Optimistic => optimistic,
            };
            let mut data = String::from("variant,delta\n");
            let _ = writeln!(data, "conservative,{conservative:e}");
            let _ = writeln!(data, "optimistic,{optimistic:e}");
            let _ = writeln!(data, "selected,{selected:e}");
            let spec = format!("delta beta={beta} u={u} theta={theta} K={k}");
            emit(&cli.output, "delta", &spec, 0, started, &data)?;
        }

        Cmd::Sample {
            graph,
            model,
            run: ropt,
            dump_config,
        } => {
            let (g, gspec) = resolve_graph(graph, &file)?;
            let p = resolve_params(model, &file)?;
            let seed = resolve_seed(ropt, &file)?;
            let cfg = resolve_sampler(ropt, &file, seed);
            let n_samples = resolve_count(ropt, &file, 100);
            let chains = resolve_chains(ropt, &file);
            let mut data = String::from("chain,sample,n,crosses,loops,open_edges");
            if *dump_config {
                data.push_str(",config");
            }
            data.push('\n');
            for chain_idx in 0..chains {
                let chain_seed = seed.wrapping_add(chain_idx as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(chain_seed);
                let mut mcmc = if p.theta != 1.0 {
                    let mut m = Mcmc::new(&g, p, &cfg)?;
                    for _ in 0..cfg.burn_in {
                        m.sweep(&mut rng);
                    }
                    Some(m)
                } else {
                    None
                };
                let per_chain = n_samples / chains as u64
                    + u64::from((n_samples % chains as u64) > chain_idx as u64);
                for s in 0..per_chain {
                    let c = match &mut mcmc {
                        Some(m) => {
                            for _ in 0..cfg.thinning.max(1) {
                                m.sweep(&mut rng);
                            }
                            m.state().clone()
                        }
                        None => sample_direct_theta1(&g, &p, &mut rng)?,
                    };
                    let counts = c.edge_counts(&g);
                    let open = counts.iter().filter(|&&k| k > 0).count();
                    let _ = write!(
                        data,
                        "{chain_idx},{s},{},{},{},{}",
                        c.len(),
                        c.cross_count(),
                        count_loops(&g, &c),
                        open
                    );
                    if *dump_config {
                        let _ = write!(data, ",{}", c.to_json());
                    }
                    data.push('\n');
                }
            }
            let spec = format!(
                "sample graph={gspec} beta={} u={} theta={} samples={n_samples} chains={chains} burn_in={} thin={}",
                p.beta, p.u, p.theta, cfg.burn_in, cfg.thinning
            );
            emit(&cli.output, "sample", &spec, seed, started, &data)?;
        }

        Cmd::Indicators {
            graph,
            model,
            run: ropt,
        } => {
            let (g, gspec) = resolve_graph(graph, &file)?;
            let p = resolve_params(model, &file)?;
            let seed = resolve_seed(ropt, &file)?;
            let cfg = resolve_sampler(ropt, &file, seed);
            let c = sample_config(&g, &p, &cfg, seed)?.remove(0);
            let ind = blocking::indicators(&g, &c);
            let mut data = String::from("edge,open,blocking,nb\n");
            for e in 0..g.edge_count() {
                let _ = writeln!(
                    data,
                    "{e},{},{},{}",
                    ind.open[e] as u8, ind.blocking[e] as u8, ind.nb[e] as u8
                );
            }
            let spec = format!(
                "indicators graph={gspec} beta={} u={} theta={}",
                p.beta, p.u, p.theta
            );
            emit(&cli.output, "indicators", &spec, seed, started, &data)?;
        }

        Cmd::Reach {
            graph,
            model,
            run: ropt,
            source,
            radius,
        } => {
            let (g, gspec) = resolve_graph(graph, &file)?;
            let p = resolve_params(model, &file)?;
            let seed = resolve_seed(ropt, &file)?;
            let n_samples = resolve_count(ropt, &file, 10_000);
            let (lo, li) = estimate_reach_both(&g, *source, *radius, &p, n_samples, seed)?;
            let mut data = String::from("kind,radius,estimate,ci_low,ci_high,hits,samples\n");
            for (kind, e) in [("loop", lo), ("link", li)] {
                let _ = writeln!(
                    data,
                    "{kind},{radius},{:.6},{:.6},{:.6},{},{}",
                    e.estimate, e.ci_low, e.ci_high, e.hits, e.samples
                );
            }
            let spec = format!(
                "reach graph={gspec} source={source} radius={radius} beta={} u={} samples={n_samples}",
                p.beta, p.u
            );
            emit(&cli.output, "reach", &spec, seed, started, &data)?;
        }

        Cmd::Decay {
            model,
            run: ropt,
            sizes,
        } => {
            let p = resolve_params(model, &file)?;
            let seed = resolve_seed(ropt, &file)?;
            let n_samples = resolve_count(ropt, &file, 10_000);
            let radii: Vec<usize> = sizes
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| spec_err("sizes: expected comma-separated integers"))?;
            let rows = decay_profile(&radii, &p, n_samples, seed)?;
            let mut data = String::from(
                "n,estimate,ci_low,ci_high,samples,link_estimate,link_ci_low,link_ci_high\n",
            );
            for r in &rows {
                let _ = writeln!(
                    data,
                    "{},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6}",
                    r.n,
                    r.loop_reach.estimate,
                    r.loop_reach.ci_low,
                    r.loop_reach.ci_high,
                    r.loop_reach.samples,
                    r.link_reach.estimate,
                    r.link_reach.ci_low,
                    r.link_reach.ci_high
                );
            }
            match fit_log_slope(&rows) {
                Some(s) => {
                    let _ = writeln!(data, "slope,{s:.6}");
                }
                None => data.push_str("slope,nan\n"),
            }
            let spec = format!(
                "decay sizes={radii:?} beta={} u={} samples={n_samples}",
                p.beta, p.u
            );
            emit(&cli.output, "decay", &spec, seed, started, &data)?;
        }

        Cmd::VerifyLoops {
            trials,
            max_vertices,
            max_links,
            run: ropt,
        } => {
            let seed = resolve_seed(ropt, &file)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mismatches = 0usize;
            for _ in 0..*trials {
                let nv = rng.gen_range(2..=(*max_vertices).max(2));
                let mut pairs = Vec::new();
                for a in 0..nv {
                    for b in (a + 1)..nv {
                        if rng.gen_bool(0.5) {
                            pairs.push((a, b));
                        }
                    }
                }
                if pairs.is_empty() {
                    pairs.push((0, 1));
                }
                let g = match Graph::from_edge_list(&pairs) {
                    Ok(g) => g,
                    Err(_) => continue,
                };
                let n = rng.gen_range(0..=*max_links);
                let links: Vec<(usize, Sign)> = (0..n)
                    .map(|_| {
                        (
                            rng.gen_range(0..g.edge_count()),
                            if rng.gen_bool(0.5) { Sign::Cross } else { Sign::Bar },
                        )
                    })
                    .collect();
                let c = LinkConfig::from_links(links);
                if decompose(&g, &c) != naive_trace(&g, &c) {
                    mismatches += 1;
                    eprintln!("mismatch: graph {pairs:?}, config {}", c.to_json());
                }
            }
            let data = format!("trials,mismatches\n{trials},{mismatches}\n");
            let spec = format!(
                "verify-loops trials={trials} max_vertices={max_vertices} max_links={max_links}"
            );
            emit(&cli.output, "verify-loops", &spec, seed, started, &data)?;
            if mismatches > 0 {
                return Err(CliError {
                    code: 4,
                    msg: format!("{mismatches} decomposition mismatches"),
                });
            }
        }

        Cmd::VerifyDomination {
            graph,
            model,
            e0,
            n_max,
        } => {
            let (g, gspec) = resolve_graph(graph, &file)?;
            let p = resolve_params(model, &file)?;
            let report = domination::verify_domination_exact(&g, *e0, &p, *n_max)?;
            let summary = serde_json::json!({
                "min_conditional": report.min_conditional_lower,
                "delta": report.delta,
                "gap": report.gap,
                "truncation_bound": report.truncation_bound,
                "patterns_checked": report.patterns_checked,
                "verdict": report.verdict,
            });
            let data = format!("{}\n", serde_json::to_string_pretty(&summary).unwrap());
            let spec = format!(
                "verify-domination graph={gspec} e0={e0} beta={} u={} theta={} n_max={n_max}",
                p.beta, p.u, p.theta
            );
            emit(&cli.output, "verify-domination", &spec, 0, started, &data)?;
            match report.verdict {
                Verdict::Holds => {}
                Verdict::Inconclusive => {
                    return Err(CliError {
                        code: 3,
                        msg: format!(
                            "truncation too coarse at n_max={n_max}; raise n_max"
                        ),
                    })
                }
                Verdict::Violated => {
                    return Err(CliError {
                        code: 4,
                        msg: "conditional blocking probability below delta".into(),
                    })
                }
            }
        }

        Cmd::Enumerate {
            graph,
            model,
            n_max,
        } => {
            let (g, gspec) = resolve_graph(graph, &file)?;
            let p = resolve_params(model, &file)?;
            let dist = enumerate(&g, &p, *n_max)?;
            let data = if dist.entries.len() <= 10_000 {
                let mut rows: Vec<(Vec<(usize, i8)>, f64)> = dist
                    .entries
                    .iter()
                    .map(|(c, &pr)| {
                        (
                            c.links().iter().map(|&(e, s)| (e, s.value())).collect(),
                            pr,
                        )
                    })
                    .collect();
                rows.sort_by(|a, b| {
                    (a.0.len(), &a.0)
                        .partial_cmp(&(b.0.len(), &b.0))
                        .unwrap()
                });
                let body = serde_json::json!({
                    "n_max": n_max,
                    "truncation_bound": dist.truncation_bound,
                    "support": rows.len(),
                    "entries": rows
                        .iter()
                        .map(|(links, pr)| serde_json::json!({"links": links, "p": pr}))
                        .collect::<Vec<_>>(),
                });
                format!("{}\n", serde_json::to_string_pretty(&body).unwrap())
            } else {
                let mean_n = dist.expectation(|c| c.len() as f64);
                let mean_loops = dist.expectation(|c| count_loops(&g, c) as f64);
                let p_all_open = dist.probability(|c| {
                    c.edge_counts(&g).iter().all(|&k| k > 0)
                });
                let body = serde_json::json!({
                    "n_max": n_max,
                    "truncation_bound": dist.truncation_bound,
                    "support": dist.entries.len(),
                    "mean_n": mean_n,
                    "mean_loops": mean_loops,
                    "p_all_open": p_all_open,
                });
                format!("{}\n", serde_json::to_string_pretty(&body).unwrap())
            };
            let spec = format!(
                "enumerate graph={gspec} beta={} u={} theta={} n_max={n_max}",
                p.beta, p.u, p.theta
            );
            emit(&cli.output, "enumerate", &spec, 0, started, &data)?;
        }
    }
    Ok(())
}

fn main() {
    if let Ok(v) = std::env::var("LOOPSIM_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.msg);
        std::process::exit(e.code);
    }
}
