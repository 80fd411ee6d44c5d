use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use eden::datasynth::{
    corpus_stats, filter_corpus, read_jsonl, synthesize, write_jsonl, RawConversation, SynthConversation,
    TopicCatalog,
};
use eden::llm::{ChatProvider, MockProvider, MockScript};
use eden::metrics::{
    fleiss_kappa, group_sizes, l2_total, pas, pearson_with, read_surveys, reassign_conditions, summarize, win_lose_tie,
    write_surveys, PValueMode, PasRow, PreferenceVote, SurveyRecord, MEASURES,
};
use eden::service::{parse_script, run_script, serve, AppState, Engine, EngineOptions, JsonlStore, ServiceConfig};

#[derive(Parser)]
#[command(name = "eden", version, about = "Empathetic English-practice dialogue tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Play a scripted session against a mock provider and print the transcript.
    Simulate {
        #[arg(long)]
        script: PathBuf,
        /// Print the transcript as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Generate raw persona conversations.
    Synth {
        /// Topic catalog; the built-in one when omitted.
        #[arg(long)]
        topics: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = eden::datasynth::DEFAULT_PER_TOPIC)]
        per_topic: usize,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Run format, assumption and recommendation filters over raw conversations.
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quarantine: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
    },
    /// Corpus size, per-area counts and average turns.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        topics: Option<PathBuf>,
    },
    /// Study statistics.
    Metrics {
        #[command(subcommand)]
        which: MetricsCommand,
    },
}

#[derive(Args)]
struct ProviderArgs {
    /// Service config whose assistant provider is used.
    #[arg(long, conflicts_with = "mock")]
    config: Option<PathBuf>,
    /// JSON mock script instead of a live provider.
    #[arg(long)]
    mock: Option<PathBuf>,
}

#[derive(Args)]
struct SurveyInput {
    /// Survey CSV with one pre and one post row per participant.
    #[arg(long = "in")]
    input: PathBuf,
    /// Move participants who never triggered empathy to the none group first.
    #[arg(long)]
    reassign: bool,
    #[arg(long, value_parser = ["condition"])]
    by: Option<String>,
    /// Input holds one row of per-item values per condition instead of survey answers.
    #[arg(long, conflicts_with = "reassign")]
    items: bool,
}

#[derive(serde::Deserialize)]
struct PasItems {
    condition: String,
    #[serde(rename = "ENC")]
    enc: f64,
    #[serde(rename = "LIST")]
    list: f64,
    #[serde(rename = "CARE")]
    care: f64,
    #[serde(rename = "APP")]
    app: f64,
}

#[derive(serde::Deserialize)]
struct L2Items {
    condition: String,
    d1: f64,
    d2: f64,
    d3: f64,
    d4: f64,
    d5: f64,
    d6: f64,
    d7: f64,
    d8: f64,
    d9: f64,
}

fn item_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, String> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Per-condition perceived-attitude scores.
    Pas(SurveyInput),
    /// Per-condition grit deltas.
    L2(SurveyInput),
    /// Pearson correlation between two measures.
    Corr {
        #[command(flatten)]
        survey: SurveyInput,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Permutation rounds; the t distribution is used when omitted.
        #[arg(long)]
        permutations: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fleiss' kappa over a CSV of per-item category counts.
    Kappa {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Win, lose and tie rates from JSONL preference votes.
    Wlt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        majority: bool,
    },
    /// Apply condition reassignment and report group sizes.
    Reassign {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

type CliResult = Result<(), String>;

fn open(path: &Path) -> Result<BufReader<File>, String> {
    File::open(path).map(BufReader::new).map_err(|e| format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    File::create(path).map(BufWriter::new).map_err(|e| format!("{}: {e}", path.display()))
}

fn catalog(path: Option<&Path>) -> Result<TopicCatalog, String> {
    match path {
        Some(p) => TopicCatalog::parse(&std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Ok(TopicCatalog::builtin().clone()),
    }
}

fn provider(args: &ProviderArgs) -> Result<Arc<dyn ChatProvider>, String> {
    match (&args.mock, &args.config) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Arc::new(MockProvider::new(MockScript::from_json(&text)?)))
        }
        (None, Some(path)) => Ok(Arc::new(ServiceConfig::load(path)?.gateway()?)),
        (None, None) => Err("either --config or --mock is required".into()),
    }
}

fn surveys(args: &SurveyInput) -> Result<Vec<SurveyRecord>, String> {
    let records = read_surveys(open(&args.input)?).map_err(|e| e.to_string())?;
    Ok(if args.reassign { reassign_conditions(&records) } else { records })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?.with_env();
            let options = EngineOptions {
                policy: config.policy()?,
                snapshot_every: config.snapshot_every,
                ..EngineOptions::default()
            };
            let store = JsonlStore::open(&config.data_dir).map_err(|e| e.to_string())?;
            let engine = Engine::new(Arc::new(config.gateway()?), Box::new(store), options).map_err(|e| e.to_string())?;
            let state = AppState {
                engine: Arc::new(engine),
                token: config.token.clone(),
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(serve(state, &config.bind, config.static_dir.clone()))
                .map_err(|e| e.to_string())
        }
        Command::Simulate { script, json } => {
            let text = std::fs::read_to_string(&script).map_err(|e| format!("{}: {e}", script.display()))?;
            let transcript = run_script(&parse_script(&text)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&transcript).map_err(|e| e.to_string())?);
            } else {
                print!("{}", transcript.render());
            }
            Ok(())
        }
        Command::Synth {
            topics,
            out,
            per_topic,
            workers,
            provider: p,
        } => {
            let catalog = catalog(topics.as_deref())?;
            let provider = provider(&p)?;
            let pairs: Vec<(String, String)> = catalog.iter().map(|(a, t)| (a.to_string(), t.to_string())).collect();
            let raws = synthesize(&pairs, per_topic, &catalog, provider.as_ref(), workers).map_err(|e| e.to_string())?;
            write_jsonl(create(&out)?, &raws).map_err(|e| e.to_string())?;
            eprintln!("wrote {} conversations to {}", raws.len(), out.display());
            Ok(())
        }
        Command::Filter {
            input,
            out,
            quarantine,
            provider: p,
        } => {
            let raws: Vec<RawConversation> = read_jsonl(open(&input)?).map_err(|e| e.to_string())?;
            let provider = provider(&p)?;
            let report = filter_corpus(&raws, provider.as_ref()).map_err(|e| e.to_string())?;
            write_jsonl(create(&out)?, &report.kept).map_err(|e| e.to_string())?;
            write_jsonl(create(&quarantine)?, &report.quarantined).map_err(|e| e.to_string())?;
            eprintln!("kept {}, quarantined {}", report.kept.len(), report.quarantined.len());
            Ok(())
        }
        Command::Stats { input, topics } => {
            let corpus: Vec<SynthConversation> = read_jsonl(open(&input)?).map_err(|e| e.to_string())?;
            print!("{}", corpus_stats(&corpus).report(&catalog(topics.as_deref())?));
            Ok(())
        }
        Command::Metrics { which } => metrics(which),
    }
}

fn metrics(which: MetricsCommand) -> CliResult {
    let mut out = std::io::stdout().lock();
    let w = |r: std::io::Result<()>| r.map_err(|e| e.to_string());
    match which {
        MetricsCommand::Pas(args) if args.items => {
            w(writeln!(out, "condition\tENC\tLIST\tCARE\tAPP\tPAS"))?;
            for r in item_rows::<PasItems>(&args.input)? {
                let row = PasRow::new(r.enc, r.list, r.care, r.app).map_err(|e| e.to_string())?;
                let [e, l, c, a] = row.items();
                w(writeln!(out, "{}\t{e:.2}\t{l:.2}\t{c:.2}\t{a:.2}\t{:.2}", r.condition, pas(&row)))?;
            }
        }
        MetricsCommand::Pas(args) => {
            let records = surveys(&args)?;
            w(writeln!(out, "condition\tn\tENC\tLIST\tCARE\tAPP\tPAS"))?;
            for s in summarize(&records) {
                let [e, l, c, a] = s.pas_items;
                w(writeln!(out, "{}\t{}\t{e:.2}\t{l:.2}\t{c:.2}\t{a:.2}\t{:.2}", s.condition, s.n, s.pas))?;
            }
        }
        MetricsCommand::L2(args) if args.items => {
            w(writeln!(out, "condition\ttotal"))?;
            for r in item_rows::<L2Items>(&args.input)? {
                let d = [r.d1, r.d2, r.d3, r.d4, r.d5, r.d6, r.d7, r.d8, r.d9];
                w(writeln!(out, "{}\t{:.2}", r.condition, l2_total(&d)))?;
            }
        }
        MetricsCommand::L2(args) => {
            let records = surveys(&args)?;
            let head: Vec<String> = (1..=9).map(|k| format!("d{k}")).collect();
            w(writeln!(out, "condition\tn\t{}\ttotal", head.join("\t")))?;
            for s in summarize(&records) {
                let items: Vec<String> = s.l2_delta.iter().map(|v| format!("{v:.2}")).collect();
                w(writeln!(out, "{}\t{}\t{}\t{:.2}", s.condition, s.n, items.join("\t"), s.l2_total))?;
            }
        }
        MetricsCommand::Corr {
            survey,
            x,
            y,
            permutations,
            seed,
        } => {
            let records = surveys(&survey)?;
            let pick = |name: &str| -> Result<Vec<f64>, String> {
                records
                    .iter()
                    .map(|r| r.measure(name))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| format!("unknown measure {name:?}; known: {}, TRIGGERS, DL2_1..DL2_9", MEASURES.join(", ")))
            };
            let (xs, ys) = (pick(&x)?, pick(&y)?);
            let mode = match permutations {
                Some(rounds) => PValueMode::Permutation { rounds, seed },
                None => PValueMode::TDist,
            };
            let c = pearson_with(&xs, &ys, mode).map_err(|e| e.to_string())?;
            w(writeln!(out, "{x} vs {y}: r = {:.3}, p = {:.4}, n = {}", c.r, c.p, c.n))?;
        }
        MetricsCommand::Kappa { input } => {
            let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(open(&input)?);
            let rows = reader
                .deserialize::<Vec<u32>>()
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let k = fleiss_kappa(&rows).map_err(|e| e.to_string())?;
            w(writeln!(out, "kappa = {k:.4}"))?;
        }
        MetricsCommand::Wlt { input, majority } => {
            let votes: Vec<PreferenceVote> = read_jsonl(open(&input)?).map_err(|e| e.to_string())?;
            let r = win_lose_tie(&votes, majority).map_err(|e| e.to_string())?;
            w(writeln!(out, "win {:.3}\tlose {:.3}\ttie {:.3}\t(votes {})", r.win, r.lose, r.tie, r.votes))?;
        }
        MetricsCommand::Reassign { input, csv } => {
            let records = reassign_conditions(&read_surveys(open(&input)?).map_err(|e| e.to_string())?);
            for (condition, n) in group_sizes(&records) {
                w(writeln!(out, "{condition}\t{n}"))?;
            }
            if let Some(path) = csv {
                write_surveys(create(&path)?, &records).map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
