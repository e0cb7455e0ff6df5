use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polysem::cli::{
    cmd_induce, cmd_ingest, cmd_neighbors, cmd_pipeline, cmd_project, cmd_simmatrix, cmd_train,
    RunConfig,
};

#[derive(Parser)]
#[command(
    name = "polysem",
    about = "Cross-lingual polysemy toolkit: embeddings, PCA projection, LDA sense induction",
    version
)]
struct Cli {
    /// Run configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's global seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Restrict to one language ("ur" or "en")
    #[arg(long, global = true)]
    lang: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize and stopword-filter the corpora; write tokenized JSONL and vocabulary TSV
    Ingest,
    /// Train per-language SGNS embeddings; export word2vec text models
    Train,
    /// Print the top-k nearest neighbors of a word as TSV
    Neighbors {
        word: String,
        #[arg(short, default_value_t = 5)]
        k: usize,
    },
    /// Project sense words and their neighbors to 2D; write points TSV and scatter SVG
    Project {
        /// Neighbors per sense word
        #[arg(long, default_value_t = 5)]
        neighbors: usize,
    },
    /// Pairwise cosine similarity matrix; write TSV and heatmap SVG
    Simmatrix {
        /// Words to compare (default: one seed word per sense)
        words: Vec<String>,
    },
    /// Mask senses, sweep topic counts by coherence, fit LDA, export distributions
    Induce,
    /// Run every stage in dependency order and write the run manifest
    Pipeline,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config_path = cli
        .config
        .ok_or_else(|| anyhow::anyhow!("--config <path> is required"))?;
    let mut config = RunConfig::load(&config_path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    let lang = cli.lang.as_deref();
    match cli.command {
        Command::Ingest => cmd_ingest(&config, lang),
        Command::Train => cmd_train(&config, lang),
        Command::Neighbors { word, k } => {
            let lang = lang.ok_or_else(|| anyhow::anyhow!("neighbors requires --lang"))?;
            let tsv = cmd_neighbors(&config, lang, &word, k)?;
            print!("{tsv}");
            Ok(())
        }
        Command::Project { neighbors } => cmd_project(&config, lang, neighbors),
        Command::Simmatrix { words } => {
            let words = if words.is_empty() { None } else { Some(&words[..]) };
            cmd_simmatrix(&config, lang, words)
        }
        Command::Induce => cmd_induce(&config, lang),
        Command::Pipeline => cmd_pipeline(&config, lang),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
