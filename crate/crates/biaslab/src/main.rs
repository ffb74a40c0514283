use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use biaslab::bias::BiasSpec;
use biaslab::builders::{
    circulant, complete_uniform, generate_meeting_network, max_degree_weights, metropolis_hastings_weights, octopus_layout,
    random_regular, regular_network, star, GeneratorParams, SimpleGraph,
};
use biaslab::error::{Error, Result};
use biaslab::io::{parse_beliefs, read_network, to_json, to_text};
use biaslab::learn::run;
use biaslab::media::{fringe_table, Fringe};
use biaslab::metrics::{detect_shock, wisdom_index, ElectionRecord, SwingRule};
use biaslab::network::ListeningNetwork;
use biaslab::seeds;
use biaslab::simlab::{run_experiment, write_outputs, Scale, ScenarioConfig};
use biaslab::spectral::spectrum;
use biaslab::tol;

#[derive(Parser)]
#[command(name = "biaslab", version, about = "DeGroot learning under confirmation bias")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write results into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; BIASLAB_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Meeting,
    Circulant,
    Regular,
    Complete,
    Star,
}

#[derive(Clone, Copy, ValueEnum)]
enum Heuristic {
    Maxdeg,
    Mh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Set1,
    Set2,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetScale {
    Desk,
    Full,
}

#[derive(clap::Args)]
struct BiasArgs {
    /// Bias strength; omit for no bias.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    /// Generalized bias: share of a cut link moved to the diagonal.
    #[arg(long)]
    alpha: Option<f64>,
    /// Re-evaluate generalized bias every period.
    #[arg(long)]
    per_period: bool,
}

impl BiasArgs {
    fn spec(&self) -> Option<BiasSpec> {
        let q = self.q?;
        Some(match (self.phi, self.alpha) {
            (_, Some(a)) => BiasSpec::generalized_uniform(q, a, self.per_period),
            (Some(phi), None) => BiasSpec::phi(q, phi),
            (None, None) if self.per_period => BiasSpec::generalized_uniform(q, 1.0, true),
            (None, None) => BiasSpec::core(q),
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a network and print or save it.
    Generate {
        #[arg(long, value_enum, default_value_t = Family::Meeting)]
        family: Family,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Degree for circulant and regular families.
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 40)]
        m0: usize,
        #[arg(long, default_value_t = 20)]
        m_r: usize,
        #[arg(long, default_value_t = 0.8)]
        p_r: f64,
        #[arg(long, default_value_t = 20)]
        m_n: usize,
        #[arg(long, default_value_t = 0.8)]
        p_n: f64,
    },
    /// One belief trajectory, with elections at every period.
    Run {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        beliefs: String,
        #[command(flatten)]
        bias: BiasArgs,
        #[arg(long, default_value_t = tol::EPS_SMALL)]
        eps: f64,
        #[arg(long, default_value_t = tol::T_MAX)]
        t_max: usize,
        /// Voters at exactly 0.5 vote Left instead of tossing a coin.
        #[arg(long)]
        swing_left: bool,
    },
    /// Paired Monte Carlo sweep from a config file or a preset.
    Sweep {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long, value_enum, default_value_t = PresetScale::Desk)]
        scale: PresetScale,
        /// Print the resolved config and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Influence weights, eigenvalues and mixing of a network file.
    Spectra { network: PathBuf },
    /// Elections with and without bias on a network and belief profile.
    Voting {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        beliefs: String,
        #[command(flatten)]
        bias: BiasArgs,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long, default_value_t = tol::T_MAX)]
        t_max: usize,
        #[arg(long)]
        swing_left: bool,
    },
    /// Fringe outlet ideology over a grid of market sizes and strengths.
    Media {
        /// Comma-separated market sizes.
        #[arg(long = "M", value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5, 6, 10])]
        m: Vec<usize>,
        /// Comma-separated strengths.
        #[arg(long, value_delimiter = ',', conflicts_with = "q_steps")]
        q: Vec<f64>,
        /// Evenly spaced strengths 0, 1/k, ..., 1 instead of --q.
        #[arg(long)]
        q_steps: Option<usize>,
    },
    /// Octopus network that carries everyone to the average belief.
    Octopus {
        #[arg(long)]
        beliefs: String,
        #[arg(long)]
        q: f64,
    },
    /// Symmetric weights on an undirected graph.
    Weights {
        #[arg(long, value_enum)]
        heuristic: Heuristic,
        /// Edge list ("i j" per line) or a network file whose links define the graph.
        graph: PathBuf,
    },
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    threads: Option<usize>,
    json: bool,
}

impl Ctx {
    /// Writes `body` to DIR/name, or to stdout.
    fn emit(&self, name: &str, body: &str) -> Result<()> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(name), body)?;
            }
            None => io::stdout().write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("utf8"))
}

fn threads_from_env(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var("BIASLAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Parse(format!("BIASLAB_THREADS = {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn network_out(ctx: &Ctx, name: &str, net: &ListeningNetwork) -> Result<()> {
    if ctx.json {
        ctx.emit(&format!("{name}.json"), &(to_json(net) + "\n"))
    } else {
        ctx.emit(&format!("{name}.txt"), &to_text(net))
    }
}

fn read_graph(path: &Path) -> Result<SimpleGraph> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
    if first.starts_with('{') || first.split_whitespace().count() != 2 || first.contains('.') {
        return SimpleGraph::from_network(&read_network(path)?);
    }
    let mut edges = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad edge line {line:?}"))))
            .collect::<Result<_>>()?;
        if ids.len() != 2 {
            return Err(Error::Parse(format!("bad edge line {line:?}")));
        }
        edges.push((ids[0], ids[1]));
    }
    let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    SimpleGraph::from_edges(n, &edges)
}

fn election_rows(arm: &str, rec: &ElectionRecord) -> Vec<serde_json::Value> {
    rec.tallies
        .iter()
        .enumerate()
        .map(|(t, tally)| {
            json!({
                "t": t,
                "arm": arm,
                "votes_left": tally.votes_left,
                "votes_right": tally.votes_right,
                "winner": format!("{:?}", tally.winner).to_lowercase(),
                "is_shock": rec.shock_times.contains(&t),
            })
        })
        .collect()
}

fn rows_to_csv(rows: &[serde_json::Value], cols: &[&str]) -> String {
    let mut s = cols.join(",") + "\n";
    for r in rows {
        let cells: Vec<String> = cols
            .iter()
            .map(|c| match &r[*c] {
                serde_json::Value::String(v) => v.clone(),
                serde_json::Value::Null => String::new(),
                v => v.to_string(),
            })
            .collect();
        s += &(cells.join(",") + "\n");
    }
    s
}

fn rule(swing_left: bool) -> SwingRule {
    if swing_left {
        SwingRule::CountsLeft
    } else {
        SwingRule::CoinToss
    }
}

fn execute(cli: Cli) -> Result<()> {
    let ctx = Ctx { seed: cli.seed, out: cli.out, threads: threads_from_env(cli.threads)?, json: cli.format == Format::Json };
    match cli.cmd {
        Cmd::Generate { family, n, d, m0, m_r, p_r, m_n, p_n } => {
            let net = match family {
                Family::Meeting => generate_meeting_network(&GeneratorParams { n, m0, m_r, p_r, m_n, p_n, seed: ctx.seed })?,
                Family::Circulant => circulant(n, d)?,
                Family::Regular => {
                    let mut rng = seeds::stream(ctx.seed, &[seeds::tag("regular")]);
                    regular_network(&random_regular(n, d, &mut rng)?)?
                }
                Family::Complete => complete_uniform(n, None)?,
                Family::Star => star(n)?,
            };
            network_out(&ctx, "network", &net)
        }
        Cmd::Run { network, beliefs, bias, eps, t_max, swing_left } => {
            let net = read_network(&network)?;
            let x0 = parse_beliefs(&beliefs)?;
            let spec = bias.spec();
            let tr = run(&net, &x0, spec.as_ref(), eps, t_max)?;
            let rec = detect_shock(&tr, ctx.seed, rule(swing_left));
            let summary = json!({
                "convergence_time": tr.belief_convergence_time,
                "periods": tr.states.len() - 1,
                "consensus": tr.consensus_value,
                "final_beliefs": tr.last(),
                "in_scope": rec.in_scope,
                "shock_times": rec.shock_times,
            });
            if let Some(dir) = &ctx.out {
                fs::create_dir_all(dir)?;
                tr.write_csv(io::BufWriter::new(fs::File::create(dir.join("trajectory.csv"))?))?;
                rec.write_csv(io::BufWriter::new(fs::File::create(dir.join("elections.csv"))?))?;
                fs::write(dir.join("run.json"), pretty(&summary))?;
                return Ok(());
            }
            if ctx.json {
                ctx.emit("run.json", &pretty(&summary))
            } else {
                let mut s = format!(
                    "convergence_time,{}\nconsensus,{}\nshock_times,{}\n",
                    tr.belief_convergence_time.map(|t| t.to_string()).unwrap_or_default(),
                    tr.consensus_value.map(|c| format!("{c:?}")).unwrap_or_default(),
                    rec.shock_times.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                );
                s += &csv_string(|b| rec.write_csv(b))?;
                ctx.emit("run.csv", &s)
            }
        }
        Cmd::Sweep { config, preset, scale, dump_config } => {
            let scale = match scale {
                PresetScale::Desk => Scale::Desk,
                PresetScale::Full => Scale::Full,
            };
            let cfg = match (config, preset) {
                (Some(path), _) => ScenarioConfig::from_json(&fs::read_to_string(path)?)?,
                (None, Some(Preset::Set1)) => ScenarioConfig::set1(scale, ctx.seed),
                (None, Some(Preset::Set2)) => ScenarioConfig::set2(scale, ctx.seed),
                (None, None) => return Err(Error::ConfigInvalid("give --config FILE or --preset".into())),
            };
            if dump_config {
                return ctx.emit("config.json", &(cfg.to_json() + "\n"));
            }
            let out = run_experiment(&cfg, ctx.threads)?;
            let dir = ctx.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            write_outputs(&dir, &out)?;
            fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;
            let s = &out.summary;
            eprintln!(
                "{} runs -> {}: mean convergence {:.3} without bias, {:.3} with bias",
                s.runs,
                dir.display(),
                s.no_bias.mean.unwrap_or(f64::NAN),
                s.bias.mean.unwrap_or(f64::NAN)
            );
            Ok(())
        }
        Cmd::Spectra { network } => {
            let net = read_network(&network)?;
            let s = spectrum(&net)?;
            if ctx.json {
                let mut v = serde_json::to_value(&s)?;
                v["wisdom_index"] = json!(wisdom_index(&s));
                v["approximate"] = json!(s.is_approximate());
                ctx.emit("spectra.json", &pretty(&v))
            } else {
                let mut body = String::from("agent,influence\n");
                for (i, w) in s.influence.iter().enumerate() {
                    body += &format!("{i},{w:?}\n");
                }
                ctx.emit("spectra.csv", &body)
            }
        }
        Cmd::Voting { network, beliefs, bias, eps, t_max, swing_left } => {
            let net = read_network(&network)?;
            let x0 = parse_beliefs(&beliefs)?;
            let spec = bias.spec().ok_or_else(|| Error::ConfigInvalid("voting needs --q".into()))?;
            let plain = run(&net, &x0, None, eps, t_max)?;
            let biased = run(&net, &x0, Some(&spec), eps, t_max)?;
            let mut rows = election_rows("no_bias", &detect_shock(&plain, ctx.seed, rule(swing_left)));
            rows.extend(election_rows("bias", &detect_shock(&biased, ctx.seed, rule(swing_left))));
            if ctx.json {
                ctx.emit("voting.json", &pretty(&json!(rows)))
            } else {
                ctx.emit("voting.csv", &rows_to_csv(&rows, &["t", "arm", "votes_left", "votes_right", "winner", "is_shock"]))
            }
        }
        Cmd::Media { m, q, q_steps } => {
            let qs = match (q_steps, q.is_empty()) {
                (Some(k), _) => (0..=k.max(1)).map(|i| i as f64 / k.max(1) as f64).collect(),
                (None, false) => q,
                (None, true) => (0..=20).map(|i| i as f64 / 20.0).collect(),
            };
            let rows: Vec<serde_json::Value> = fringe_table(&m, &qs)?
                .into_iter()
                .map(|mk| {
                    let fringe = match mk.fringe {
                        Fringe::Point { value } => json!(value),
                        Fringe::Interval { lo, hi } => json!(format!("[{lo:?};{hi:?}]")),
                        Fringe::None => serde_json::Value::Null,
                    };
                    json!({ "M": mk.m, "q": mk.q, "fringe": fringe, "exists": mk.exists })
                })
                .collect();
            if ctx.json {
                ctx.emit("media.json", &pretty(&json!(rows)))
            } else {
                ctx.emit("media.csv", &rows_to_csv(&rows, &["M", "q", "fringe", "exists"]))
            }
        }
        Cmd::Octopus { beliefs, q } => {
            let x0 = parse_beliefs(&beliefs)?;
            let layout = octopus_layout(&x0, q)?;
            if ctx.out.is_some() {
                network_out(&ctx, "octopus", &layout.network)?;
            }
            let info = json!({
                "truth": layout.truth,
                "center": layout.center,
                "layers": layout.layers,
                "depth": layout.depth(),
                "weights": layout.network.to_rows(),
            });
            if ctx.json || ctx.out.is_some() {
                ctx.emit("octopus_layout.json", &pretty(&info))
            } else {
                ctx.emit("octopus.txt", &to_text(&layout.network))
            }
        }
        Cmd::Weights { heuristic, graph } => {
            let g = read_graph(&graph)?;
            let net = match heuristic {
                Heuristic::Maxdeg => max_degree_weights(&g)?,
                Heuristic::Mh => metropolis_hastings_weights(&g)?,
            };
            network_out(&ctx, "weights", &net)
        }
    }
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let wants_json = args.windows(2).any(|w| w[0] == "--format" && w[1] == "json") || args.iter().any(|a| a == "--format=json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if wants_json && e.use_stderr() => {
            println!("{}", json!({ "error": "Usage", "message": e.to_string().trim() }));
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    let json_errors = cli.format == Format::Json;
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json_errors {
                println!("{}", json!({ "error": error_kind(&e), "message": e.to_string() }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(1)
        }
    }
}
