//! `cmake-exposure`: analyze CMake projects into condition-labeled build
//! dependency graphs and query the exposure of source changes.

mod render;

use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use exposure_core::bdg::{export_dot, load_bdg, save_bdg, Bdg};
use exposure_core::cond::ConfigurationAssignment;
use exposure_core::diff::{parse_unified_diff, to_changeset};
use exposure_core::exposure::{
    filter_patches, impacted_deliverables, paths_for_change, rank_patches, ChangeSet,
    FilterTarget, RankKey, PATH_CAP,
};
use exposure_core::scoring::{score_list, score_ranking};
use exposure_core::warn::summarize;

/// Exit codes: 0 success, 1 warnings under --strict, 2 usage error,
/// 3 input error, 4 internal invariant violation.
const EXIT_WARNINGS: u8 = 1;
const EXIT_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cmake-exposure",
    version,
    about = "Static change-exposure analysis for CMake build specifications"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct ChangeArgs {
    /// Unified diff file ('-' for standard input).
    #[arg(long)]
    diff: Option<String>,
    /// Changed files, given directly.
    #[arg(long, num_args = 1.., value_name = "PATH")]
    files: Vec<String>,
    /// Strip this many leading path components from diff paths.
    #[arg(long, default_value_t = 0)]
    strip: usize,
    /// Changeset label used in reports.
    #[arg(long, default_value = "change")]
    id: String,
}

#[derive(Args)]
struct AssignArgs {
    /// Configuration overrides, CMake style: -D NAME=VALUE.
    #[arg(short = 'D', value_name = "NAME=VALUE", action = clap::ArgAction::Append)]
    define: Vec<String>,
    /// Leave unassigned options unknown instead of defaulting them.
    #[arg(long)]
    partial: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a project tree and write its build dependency graph.
    Analyze {
        /// Project root containing CMakeLists.txt.
        project_dir: PathBuf,
        /// Output path for the graph JSON.
        #[arg(long, default_value = "bdg.json")]
        out: PathBuf,
        /// Exit 1 when the analysis produced warnings.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Report impacted deliverables for a change.
    Impact {
        #[arg(long)]
        bdg: PathBuf,
        #[command(flatten)]
        change: ChangeArgs,
        #[command(flatten)]
        assign: AssignArgs,
        /// Report per-deliverable propagation conditions over all
        /// configurations instead of one verdict.
        #[arg(long)]
        all_configs: bool,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// List all conditional dependency paths to the changed files.
    Paths {
        #[arg(long)]
        bdg: PathBuf,
        #[command(flatten)]
        change: ChangeArgs,
        /// Retained paths per (deliverable, file) pair.
        #[arg(long, default_value_t = PATH_CAP)]
        path_cap: usize,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Rank patches by impacted deliverables or impacted variants.
    Rank {
        #[arg(long)]
        bdg: PathBuf,
        /// Patches as ID=DIFF_FILE pairs.
        #[arg(long = "patch", value_name = "ID=DIFF", required = true)]
        patches: Vec<String>,
        /// Ranking key.
        #[arg(long, value_enum)]
        by: RankBy,
        #[command(flatten)]
        assign: AssignArgs,
        #[arg(long, default_value_t = 0)]
        strip: usize,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Keep the patches that affect a deliverable or a variant.
    Filter {
        #[arg(long)]
        bdg: PathBuf,
        #[arg(long = "patch", value_name = "ID=DIFF", required = true)]
        patches: Vec<String>,
        /// Filter by deliverable id.
        #[arg(long, conflicts_with = "define")]
        deliverable: Option<String>,
        #[command(flatten)]
        assign: AssignArgs,
        #[arg(long, default_value_t = 0)]
        strip: usize,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Score an answer against ground truth.
    Score {
        #[arg(long, value_enum)]
        mode: ScoreMode,
        /// JSON answer file: {"deliverables": [...]} or {"ranking": [...]}.
        #[arg(long)]
        answer: PathBuf,
        /// JSON ground-truth file of the same shape.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Write the graph in DOT form.
    ExportDot {
        #[arg(long)]
        bdg: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RankBy {
    Deliverables,
    Variants,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScoreMode {
    List,
    Rank,
}

/// An error with a designated exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Analyze {
            project_dir,
            out,
            strict,
            format,
        } => cmd_analyze(&project_dir, &out, strict, format),
        Command::Impact {
            bdg,
            change,
            assign,
            all_configs,
            format,
        } => {
            let bdg = load_graph(&bdg)?;
            let changeset = read_changeset(&change)?;
            if all_configs {
                render::print_conditions(&bdg, &changeset, format)
                    .map_err(CliError::internal)?;
            } else {
                let assignment = build_assignment(&assign, &bdg)?;
                let report = impacted_deliverables(&bdg, &changeset, &assignment);
                render::print_impact(&report, format);
            }
            Ok(0)
        }
        Command::Paths {
            bdg,
            change,
            path_cap,
            format,
        } => {
            let bdg = load_graph(&bdg)?;
            let changeset = read_changeset(&change)?;
            let objects = paths_for_change(&bdg, &changeset, path_cap);
            render::print_paths(&changeset, &objects, format);
            Ok(0)
        }
        Command::Rank {
            bdg,
            patches,
            by,
            assign,
            strip,
            format,
        } => {
            let bdg = load_graph(&bdg)?;
            let patches = read_patches(&patches, strip)?;
            let key = match by {
                RankBy::Deliverables => {
                    RankKey::DeliverableCount(build_assignment(&assign, &bdg)?)
                }
                RankBy::Variants => RankKey::VariantCount,
            };
            let ranking = rank_patches(&bdg, &patches, &key);
            render::print_ranking(&ranking, by == RankBy::Variants, format);
            Ok(0)
        }
        Command::Filter {
            bdg,
            patches,
            deliverable,
            assign,
            strip,
            format,
        } => {
            let bdg = load_graph(&bdg)?;
            let patches = read_patches(&patches, strip)?;
            let (matches, target_desc) = match &deliverable {
                Some(id) => {
                    let matches =
                        filter_patches(&bdg, &patches, FilterTarget::Deliverable(id))
                            .map_err(|e| CliError::input(e.to_string()))?;
                    (matches, render::FilterDesc::Deliverable(id.clone()))
                }
                None => {
                    if assign.define.is_empty() {
                        return Err(CliError::input(
                            "filter needs --deliverable or at least one -D NAME=VALUE",
                        ));
                    }
                    let assignment = build_assignment(&assign, &bdg)?;
                    let matches =
                        filter_patches(&bdg, &patches, FilterTarget::Variant(&assignment))
                            .map_err(|e| CliError::input(e.to_string()))?;
                    (matches, render::FilterDesc::Variant(assignment))
                }
            };
            render::print_filter(&matches, &target_desc, format);
            Ok(0)
        }
        Command::Score {
            mode,
            answer,
            truth,
            format,
        } => cmd_score(mode, &answer, &truth, format),
        Command::ExportDot { bdg, out } => {
            let bdg = load_graph(&bdg)?;
            let dot = export_dot(&bdg);
            std::fs::write(&out, dot)
                .map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;
            eprintln!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn cmd_analyze(
    project_dir: &std::path::Path,
    out: &std::path::Path,
    strict: bool,
    format: Format,
) -> Result<u8, CliError> {
    let analysis = exposure_core::analyze_project(project_dir)
        .map_err(|e| CliError::input(e.to_string()))?;
    save_bdg(&analysis.bdg, out)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;
    for warning in &analysis.warnings {
        eprintln!("warning: {warning}");
    }
    let summary = summarize(&analysis.warnings);
    render::print_analyze_summary(&analysis.bdg, out, &summary, format);
    if strict && !analysis.warnings.is_empty() {
        return Ok(EXIT_WARNINGS);
    }
    Ok(0)
}

fn cmd_score(
    mode: ScoreMode,
    answer: &std::path::Path,
    truth: &std::path::Path,
    format: Format,
) -> Result<u8, CliError> {
    let answer_doc = read_json(answer)?;
    let truth_doc = read_json(truth)?;
    match mode {
        ScoreMode::List => {
            let estimated = string_set(&answer_doc, "deliverables", answer)?;
            let actual = string_set(&truth_doc, "deliverables", truth)?;
            let score =
                score_list(&estimated, &actual).map_err(|e| CliError::input(e.to_string()))?;
            render::print_list_score(&score, format);
        }
        ScoreMode::Rank => {
            let estimate = string_vec(&answer_doc, "ranking", answer)?;
            let truth_ranking = string_vec(&truth_doc, "ranking", truth)?;
            let score = score_ranking(&estimate, &truth_ranking)
                .map_err(|e| CliError::input(e.to_string()))?;
            render::print_rank_score(&score, format);
        }
    }
    Ok(0)
}

fn load_graph(path: &std::path::Path) -> Result<Bdg, CliError> {
    load_bdg(path).map_err(|e| CliError::input(format!("cannot load {}: {e}", path.display())))
}

fn read_changeset(args: &ChangeArgs) -> Result<ChangeSet, CliError> {
    if args.diff.is_none() && args.files.is_empty() {
        return Err(CliError::input(
            "no change source: pass --diff or --files",
        ));
    }
    let mut files: Vec<String> = args.files.clone();
    if let Some(diff_path) = &args.diff {
        let text = if diff_path == "-" {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::input(format!("cannot read standard input: {e}")))?;
            buf
        } else {
            std::fs::read_to_string(diff_path)
                .map_err(|e| CliError::input(format!("cannot read {diff_path}: {e}")))?
        };
        let doc = parse_unified_diff(&text).map_err(|e| CliError::input(e.to_string()))?;
        files.extend(to_changeset(&doc, &args.id, args.strip).changed_files);
    }
    Ok(ChangeSet::new(args.id.clone(), files))
}

fn read_patches(specs: &[String], strip: usize) -> Result<Vec<ChangeSet>, CliError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for spec in specs {
        let (id, path) = spec.split_once('=').ok_or_else(|| CliError::input(
            format!("--patch takes ID=DIFF_FILE, got `{spec}`"),
        ))?;
        if id.is_empty() {
            return Err(CliError::input(format!("empty patch id in `{spec}`")));
        }
        if !seen.insert(id.to_string()) {
            return Err(CliError::input(format!("duplicate patch id `{id}`")));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {path}: {e}")))?;
        let doc = parse_unified_diff(&text)
            .map_err(|e| CliError::input(format!("{path}: {e}")))?;
        out.push(to_changeset(&doc, id, strip));
    }
    Ok(out)
}

/// Build the query assignment from -D pairs. Unknown option names are
/// accepted and registered with a warning (CMake allows overriding names a
/// project never declares); out-of-domain values are warned about too.
fn build_assignment(args: &AssignArgs, bdg: &Bdg) -> Result<ConfigurationAssignment, CliError> {
    let mut values = Vec::new();
    for pair in &args.define {
        let (name, value) = pair.split_once('=').ok_or_else(|| {
            CliError::input(format!("-D takes NAME=VALUE, got `{pair}`"))
        })?;
        if name.is_empty() {
            return Err(CliError::input(format!("empty option name in `{pair}`")));
        }
        if !bdg.options.iter().any(|o| o.name == name) {
            eprintln!("warning: option {name} is not declared by the project; accepted anyway");
        }
        values.push((name.to_string(), value.to_string()));
    }
    let assignment = if args.partial {
        ConfigurationAssignment::partial(values)
    } else {
        ConfigurationAssignment::total(values, &bdg.options)
    };
    for (name, value) in assignment.domain_violations(&bdg.options) {
        eprintln!("warning: value `{value}` is outside the declared domain of {name}");
    }
    Ok(assignment)
}

fn read_json(path: &std::path::Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: invalid JSON: {e}", path.display())))
}

fn string_vec(
    doc: &serde_json::Value,
    key: &str,
    path: &std::path::Path,
) -> Result<Vec<String>, CliError> {
    doc.get(key)
        .and_then(|v| v.as_array())
        .map(|items| {
            items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
        })
        .flatten()
        .ok_or_else(|| {
            CliError::input(format!(
                "{}: expected {{\"{key}\": [\"...\"]}}",
                path.display()
            ))
        })
}

fn string_set(
    doc: &serde_json::Value,
    key: &str,
    path: &std::path::Path,
) -> Result<BTreeSet<String>, CliError> {
    Ok(string_vec(doc, key, path)?.into_iter().collect())
}
