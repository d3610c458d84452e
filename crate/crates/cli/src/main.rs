//! `coursesem` command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 I/O error, 3 data validation
//! error, 4 internal invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coursesem::model::{write_courses, write_registrations, CatalogColumns, PerformanceColumns};
use coursesem::pipeline::{
    analyze, build_similarity, load_inputs, write_manifest, write_reports, ConfigFile,
    PipelineConfig, ReportOptions,
};
use coursesem::scoring::IndexRounding;
use coursesem::simmatrix::SimilarityMatrix;
use coursesem::synth::{generate, header_comment, SynthConfig, SynthSidecar};
use coursesem::{Error, ErrorKind};

#[derive(Debug, Parser)]
#[command(
    name = "coursesem",
    version,
    about = "Course-similarity domain knowledge analysis"
)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, env = "COURSESEM_CONFIG")]
    config: Option<PathBuf>,

    /// Upper bound on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the normalized course similarity matrix and cache it.
    BuildMatrix(InputArgs),
    /// Filter, score and mine the registration data; write reports.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic catalog and registration history.
    Synth(SynthArgs),
    /// Export a cached matrix as dense CSV.
    ExportMatrix(ExportArgs),
}

#[derive(Debug, Args, Default)]
struct InputArgs {
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// LSA rank (default: min(150, courses − 1, vocabulary − 1)).
    #[arg(long)]
    rank: Option<usize>,
    /// Matrix cache file (default: <out>/similarity.csim).
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[arg(long)]
    performance: Option<PathBuf>,
    /// Build the matrix first instead of loading the cache.
    #[arg(long)]
    build: bool,
    /// Also write every scored record to scored_records.csv.
    #[arg(long)]
    dump_scored: bool,
    /// Add a generation timestamp to summary.txt.
    #[arg(long)]
    timestamp: bool,
    #[arg(long, value_parser = parse_rounding)]
    rounding: Option<IndexRounding>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    students: Option<usize>,
    #[arg(long)]
    courses: Option<usize>,
    #[arg(long)]
    semesters: Option<u32>,
    #[arg(long)]
    courses_per_semester: Option<usize>,
    #[arg(long)]
    topics: Option<usize>,
    /// Five probabilities P(δ ≥ 0 | NG, LT, RS, SF, MX), comma-separated.
    #[arg(long, value_parser = parse_coupling)]
    coupling: Option<[f64; 5]>,
    #[arg(long)]
    missing_grade_rate: Option<f64>,
    #[arg(long)]
    zero_delta_share: Option<f64>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Destination CSV (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_rounding(s: &str) -> Result<IndexRounding, String> {
    match s {
        "floor" => Ok(IndexRounding::Floor),
        "nearest" => Ok(IndexRounding::Nearest),
        other => Err(format!("expected `floor` or `nearest`, got `{other}`")),
    }
}

fn parse_coupling(s: &str) -> Result<[f64; 5], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()?;
    let arr: [f64; 5] = values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 5 comma-separated values, got {}", v.len()))?;
    if let Some(p) = arr.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("{p} is not a probability"));
    }
    Ok(arr)
}

struct Failure {
    stage: &'static str,
    error: Error,
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> Stage<T> for Result<T, Error> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { stage, error })
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Io => 2,
        ErrorKind::Data => 3,
        ErrorKind::Internal => 4,
    }
}

fn load_config(cli_config: Option<&Path>) -> Result<ConfigFile, Error> {
    match cli_config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn merge_inputs(cfg: &mut ConfigFile, args: &InputArgs) {
    if let Some(v) = &args.catalog {
        cfg.inputs.catalog = Some(v.clone());
    }
    if let Some(v) = &args.lexicon {
        cfg.inputs.lexicon = Some(v.clone());
    }
    if let Some(v) = &args.stoplist {
        cfg.inputs.stoplist = Some(v.clone());
    }
    if let Some(v) = args.rank {
        cfg.lsa.rank = Some(v);
    }
    if let Some(v) = &args.matrix {
        cfg.output.matrix = Some(v.clone());
    }
    if let Some(v) = &args.out {
        cfg.output.dir = Some(v.clone());
    }
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn build_and_save(cfg: &PipelineConfig) -> Result<SimilarityMatrix, Failure> {
    let catalog = coursesem::model::parse_course_csv(&cfg.catalog, &cfg.catalog_columns)
        .stage("load catalog")?;
    let pre = cfg.preprocessor().stage("load stoplist")?;
    let kb = cfg.lexicon().stage("load lexicon")?;
    let build = build_similarity(&catalog, &pre, &kb, cfg.lsa_rank).stage("build matrix")?;
    if let Some(parent) = cfg
        .matrix_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        create_dir(parent).stage("save matrix")?;
    }
    build.matrix.save(&cfg.matrix_path).stage("save matrix")?;
    println!("{}", build.summary());
    println!("matrix written to {}", cfg.matrix_path.display());
    Ok(build.matrix)
}

fn cmd_build_matrix(config: Option<&Path>, args: &InputArgs) -> Result<(), Failure> {
    let mut file = load_config(config).stage("config")?;
    merge_inputs(&mut file, args);
    let cfg = PipelineConfig::from_file(file).stage("config")?;
    build_and_save(&cfg).map(|_| ())
}

fn cmd_analyze(config: Option<&Path>, args: &AnalyzeArgs) -> Result<(), Failure> {
    let mut file = load_config(config).stage("config")?;
    merge_inputs(&mut file, &args.inputs);
    if let Some(p) = &args.performance {
        file.inputs.performance = Some(p.clone());
    }
    if let Some(r) = args.rounding {
        file.scoring.rounding = Some(r);
    }
    let cfg = PipelineConfig::from_file(file).stage("config")?;
    if cfg.performance.is_none() {
        return Err(Failure {
            stage: "config",
            error: Error::Config("no performance CSV path given".into()),
        });
    }

    let matrix = if args.build {
        build_and_save(&cfg)?
    } else {
        SimilarityMatrix::load(&cfg.matrix_path).stage("load matrix")?
    };
    let (catalog, regs) = load_inputs(&cfg).stage("load inputs")?;
    let analysis = analyze(&catalog, &regs, &matrix, cfg.scoring).stage("analyze")?;
    if analysis.filter_stats.retained == 0 {
        log::warn!("no registration records were retained; reports are empty");
    }
    let written = write_reports(
        &analysis,
        &cfg.out_dir,
        ReportOptions {
            dump_scored: args.dump_scored,
            timestamp: args.timestamp,
        },
    )
    .stage("write reports")?;
    let s = &analysis.filter_stats;
    println!(
        "records {} retained {} (missing grade {}, missing CGPA {}, unknown course {})",
        s.total_read,
        s.retained,
        s.dropped_missing_grade,
        s.dropped_missing_cgpa,
        s.dropped_unknown_course
    );
    println!(
        "{} report files written to {}",
        written.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        seed: args.seed.unwrap_or(d.seed),
        n_students: args.students.unwrap_or(d.n_students),
        n_courses: args.courses.unwrap_or(d.n_courses),
        n_semesters: args.semesters.unwrap_or(d.n_semesters),
        courses_per_semester: args.courses_per_semester.unwrap_or(d.courses_per_semester),
        topic_count: args.topics.unwrap_or(d.topic_count),
        coupling: args.coupling.unwrap_or(d.coupling),
        missing_grade_rate: args.missing_grade_rate.unwrap_or(d.missing_grade_rate),
        zero_delta_share: args.zero_delta_share.unwrap_or(d.zero_delta_share),
        ..d
    };
    let data = generate(&cfg).stage("synth")?;
    create_dir(&args.out).stage("synth")?;
    let comment = header_comment(&cfg);

    let io = |path: &Path, e: std::io::Error| Failure {
        stage: "synth",
        error: Error::io(path, e),
    };
    let courses = args.out.join("courses.csv");
    let file = std::fs::File::create(&courses).map_err(|e| io(&courses, e))?;
    write_courses(
        file,
        &data.courses,
        &CatalogColumns::default(),
        Some(&comment),
    )
    .map_err(|e| io(&courses, e))?;
    let regs = args.out.join("registrations.csv");
    let file = std::fs::File::create(&regs).map_err(|e| io(&regs, e))?;
    write_registrations(
        file,
        &data.registrations,
        &PerformanceColumns::default(),
        Some(&comment),
    )
    .map_err(|e| io(&regs, e))?;
    let lexicon = args.out.join("lexicon.txt");
    std::fs::write(&lexicon, &data.lexicon).map_err(|e| io(&lexicon, e))?;
    let sidecar = args.out.join("synth.json");
    std::fs::write(&sidecar, SynthSidecar::new(&cfg).to_json()).map_err(|e| io(&sidecar, e))?;
    write_manifest(
        &args.out.join("manifest.txt"),
        &args.out,
        &[courses, regs, lexicon, sidecar],
    )
    .stage("synth")?;

    let coupling: Vec<String> = cfg.coupling.iter().map(|p| p.to_string()).collect();
    println!(
        "{} courses, {} registrations written to {}",
        data.courses.len(),
        data.registrations.len(),
        args.out.display()
    );
    println!(
        "planted coupling P(delta >= 0 | NG..MX) = {}",
        coupling.join(",")
    );
    Ok(())
}

fn cmd_export(config: Option<&Path>, args: &ExportArgs) -> Result<(), Failure> {
    let file = load_config(config).stage("config")?;
    let path = args
        .matrix
        .clone()
        .or(file.output.matrix)
        .unwrap_or_else(|| {
            args.out
                .clone()
                .or(file.output.dir)
                .unwrap_or_else(|| PathBuf::from("out"))
                .join(coursesem::pipeline::DEFAULT_MATRIX_FILE)
        });
    let matrix = SimilarityMatrix::load(&path).stage("load matrix")?;
    match &args.output {
        Some(out) => {
            let f = std::fs::File::create(out)
                .map_err(|e| Error::io(out, e))
                .stage("export")?;
            matrix
                .write_csv(f)
                .map_err(|e| Error::io(out, e))
                .stage("export")
        }
        None => matrix
            .write_csv(std::io::stdout().lock())
            .map_err(|e| Error::io("<stdout>", e))
            .stage("export"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error [config]: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error [config]: {e}");
            return ExitCode::from(4);
        }
    }
    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::BuildMatrix(args) => cmd_build_matrix(config, args),
        Command::Analyze(args) => cmd_analyze(config, args),
        Command::Synth(args) => cmd_synth(args),
        Command::ExportMatrix(args) => cmd_export(config, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { stage, error }) => {
            eprintln!("error [{stage}]: {error}");
            ExitCode::from(exit_code(error.kind()))
        }
    }
}
