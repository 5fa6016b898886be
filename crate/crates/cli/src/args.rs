use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "slr", version, about = "Search, deduplicate, screen and report a systematic literature study")]
pub struct Cli {
    /// Project directory.
    #[arg(long, global = true, env = "SLRKIT_PROJECT", default_value = ".")]
    pub project: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Log verbosity; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    PerDatabase,
    CrossDatabase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TemplateArg {
    Standard,
    Blank,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project in the project directory.
    Init {
        #[arg(long, value_enum, default_value_t = TemplateArg::Standard)]
        template: TemplateArg,
        /// Defaults to the directory name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Show datasets, imports and selection progress.
    Status,
    /// Add an inclusion or exclusion criterion.
    Criterion {
        id: String,
        #[arg(long, value_parser = ["inclusion", "exclusion"])]
        kind: String,
        #[arg(long)]
        text: String,
    },
    /// Import one search export as a raw result set.
    Import(ImportArgs),
    /// Integrate raw sets per database, or database sets into the integrated set.
    Merge {
        #[arg(long, value_enum)]
        stage: StageArg,
        /// Limit a per-database merge to one database.
        #[arg(long)]
        database: Option<String>,
    },
    /// Find and resolve duplicates in the datasets of a stage.
    Dedupe(DedupeArgs),
    /// Completion report: records missing abstract, keywords, year or venue.
    Audit {
        #[arg(long)]
        slot: Option<String>,
    },
    /// Check that known reference publications were found.
    CheckRefs {
        /// One title per line, optionally followed by a tab and the year.
        file: PathBuf,
        #[arg(long)]
        slot: Option<String>,
        /// Exit with status 1 when a reference is missing.
        #[arg(long)]
        strict: bool,
    },
    /// Exclude records of some databases that match none of the required terms.
    Filter {
        #[arg(long)]
        name: String,
        #[arg(long, value_delimiter = ',', required = true)]
        databases: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        require_any: Vec<String>,
        #[arg(long)]
        criterion: String,
    },
    /// Complete missing metadata of one record.
    Patch(PatchArgs),
    /// Fix the reviewers and voting workflow over the integrated set.
    Assign(AssignArgs),
    /// Add a reviewer or moderator, or list reviewers and their API tokens.
    Reviewer {
        #[command(subcommand)]
        action: ReviewerAction,
    },
    /// Import or export votes.
    Votes {
        #[command(subcommand)]
        action: VotesAction,
    },
    /// Close voting rounds.
    Rounds {
        #[command(subcommand)]
        action: RoundsAction,
    },
    /// Record joint decisions from a CSV file (paper,state,criteria).
    Decide {
        file: PathBuf,
        /// Moderator or workshop recorded with the decisions.
        #[arg(long)]
        by: Option<String>,
    },
    /// Fix the decided set once every paper is decided.
    Finalize,
    /// Inter-rater agreement over the primary votes.
    Kappa {
        #[arg(long, default_value = "cohen_kappa")]
        method: String,
        #[arg(long, value_parser = ["linear", "quadratic"], default_value = "linear")]
        weighting: String,
    },
    /// Search and selection funnel.
    Report {
        /// Also write the funnel as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the text table to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the handover bundle to an empty directory.
    Export { dir: PathBuf },
    /// Check a handover bundle against its manifest checksums.
    VerifyBundle { dir: PathBuf },
    /// Serve the review API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: SocketAddr,
    },
    /// Term frequencies of keywords or abstracts.
    Wordfreq(WordfreqArgs),
    /// Co-author network.
    Network {
        #[arg(long)]
        slot: Option<String>,
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Counts per year, vehicle, database and metadata class.
    Demographics {
        #[arg(long)]
        slot: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub database: Option<String>,
    /// Query label, e.g. S1.
    #[arg(long)]
    pub query: String,
    #[arg(long)]
    pub query_text: Option<String>,
    /// Source profile JSON; defaults by file extension.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DedupeArgs {
    #[arg(long, value_enum)]
    pub stage: StageArg,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Resolution policy JSON.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Resolve conference/journal extension pairs automatically.
    #[arg(long)]
    pub auto_extensions: bool,
    /// List candidate pairs without removing anything.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct PatchArgs {
    pub id: String,
    #[arg(long, default_value = "integrated")]
    pub slot: String,
    /// Patch JSON with any of abstract, keywords, year, venue, vehicle,
    /// full_text_available, abstract_substitute.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long = "abstract")]
    pub abstract_text: Option<String>,
    #[arg(long, value_delimiter = ';')]
    pub keywords: Option<Vec<String>>,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub venue: Option<String>,
    #[arg(long)]
    pub vehicle: Option<String>,
    #[arg(long)]
    pub full_text: Option<bool>,
    #[arg(long)]
    pub abstract_substitute: Option<bool>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[arg(long)]
    pub workflow: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub reviewers: Vec<String>,
    #[arg(long)]
    pub coverage: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Full selection policy JSON; the flags below override its fields.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, value_parser = ["binary", "likert5"])]
    pub scale: Option<String>,
    #[arg(long, value_parser = ["headcount_sum", "mean", "mode", "weighted_3point"])]
    pub aggregator: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Criterion recorded on papers the vote rules irrelevant.
    #[arg(long)]
    pub default_exclusion: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ReviewerAction {
    Add {
        id: String,
        #[arg(long)]
        moderator: bool,
    },
    List,
}

#[derive(Debug, Subcommand)]
pub enum VotesAction {
    /// CSV columns: reviewer,paper,round,value[,timestamp].
    Import { file: PathBuf },
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RoundsAction {
    Close { rounds: Vec<u32> },
}

#[derive(Debug, Args)]
pub struct WordfreqArgs {
    #[arg(long)]
    pub slot: Option<String>,
    #[arg(long, value_parser = ["keywords", "abstracts"], default_value = "keywords")]
    pub scope: String,
    /// CSV of term,code pairs applied before counting.
    #[arg(long)]
    pub coding: Option<PathBuf>,
    /// Extra stopwords, one per line; the bundled list is always applied.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stopwords: bool,
    /// Expected terms, one per line; unexpected terms are listed as outliers.
    #[arg(long)]
    pub expected: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
