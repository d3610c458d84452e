//! Configuration and end-to-end orchestration: catalog → similarity matrix,
//! and registrations + matrix → scored records → rule metrics → reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mining::{
    emit_confidence_charts, emit_support_table, mine_all, partition_by_quality, MetricsDump,
    RuleMetrics,
};
use crate::model::{
    filter_records, history_pool, parse_course_csv, parse_performance_csv, CatalogColumns,
    CourseRecord, FilterStats, PerformanceColumns, RegistrationRecord,
};
use crate::scoring::{
    score_dataset_with_history, write_scored_csv, ExpectedRounding, IndexRounding, ScoredRecord,
    ScoringOptions,
};
use crate::simmatrix::{build_raw_matrix, normalize, SimilarityMatrix};
use crate::textsim::lsa::build_lsa_from_matrix;
use crate::textsim::{default_rank, LexicalKb, Preprocessor, TermDocMatrix, TokenList};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputsSection {
    pub catalog: Option<PathBuf>,
    pub performance: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsaSection {
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringSection {
    pub rounding: Option<IndexRounding>,
    pub expected_rounding: Option<ExpectedRounding>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnsSection {
    pub catalog: CatalogColumns,
    pub performance: PerformanceColumns,
}

/// On-disk configuration. Every field is optional; command-line flags
/// override whatever is set here.
///
/// ```toml
/// [inputs]
/// catalog = "courses.csv"
/// performance = "registrations.csv"
/// lexicon = "lexicon.txt"
///
/// [lsa]
/// rank = 100
///
/// [scoring]
/// rounding = "floor"            # or "nearest"
///
/// [output]
/// dir = "out"
///
/// [columns.performance]
/// preceding_cgpa = "preceding-CGPA"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub inputs: InputsSection,
    pub lsa: LsaSection,
    pub scoring: ScoringSection,
    pub output: OutputSection,
    pub columns: ColumnsSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Resolved settings for the pipeline stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub catalog: PathBuf,
    pub performance: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub lsa_rank: Option<usize>,
    pub scoring: ScoringOptions,
    pub out_dir: PathBuf,
    pub matrix_path: PathBuf,
    pub catalog_columns: CatalogColumns,
    pub performance_columns: PerformanceColumns,
}

pub const DEFAULT_MATRIX_FILE: &str = "similarity.csim";

impl PipelineConfig {
    /// Resolves a config file into settings. The catalog is required; the
    /// matrix path defaults to `<out_dir>/similarity.csim`.
    pub fn from_file(cfg: ConfigFile) -> Result<Self> {
        let catalog = cfg
            .inputs
            .catalog
            .filter(|p| !p.as_os_str().is_empty())
            .ok_or_else(|| Error::Config("no catalog path given".into()))?;
        if cfg.lsa.rank == Some(0) {
            return Err(Error::Config("LSA rank must be at least 1".into()));
        }
        let out_dir = cfg.output.dir.unwrap_or_else(|| PathBuf::from("out"));
        let matrix_path = cfg
            .output
            .matrix
            .unwrap_or_else(|| out_dir.join(DEFAULT_MATRIX_FILE));
        Ok(PipelineConfig {
            catalog,
            performance: cfg.inputs.performance,
            lexicon: cfg.inputs.lexicon,
            stoplist: cfg.inputs.stoplist,
            lsa_rank: cfg.lsa.rank,
            scoring: ScoringOptions {
                rounding: cfg.scoring.rounding.unwrap_or_default(),
                expected_rounding: cfg.scoring.expected_rounding.unwrap_or_default(),
            },
            out_dir,
            matrix_path,
            catalog_columns: cfg.columns.catalog,
            performance_columns: cfg.columns.performance,
        })
    }

    pub fn preprocessor(&self) -> Result<Preprocessor> {
        match &self.stoplist {
            Some(p) => Preprocessor::from_stoplist_file(p),
            None => Ok(Preprocessor::default()),
        }
    }

    pub fn lexicon(&self) -> Result<LexicalKb> {
        match &self.lexicon {
            Some(p) => LexicalKb::load(p),
            None => Ok(LexicalKb::new()),
        }
    }
}

/// Result of the similarity stage.
#[derive(Debug, Clone)]
pub struct MatrixBuild {
    pub matrix: SimilarityMatrix,
    pub raw_range: Option<(f64, f64)>,
    pub lsa_rank: usize,
    pub vocabulary_size: usize,
    pub excluded_courses: usize,
    pub elapsed: Duration,
}

impl MatrixBuild {
    pub fn summary(&self) -> String {
        let range = match self.raw_range {
            Some((lo, hi)) => format!("raw similarity min {lo:.6} max {hi:.6}"),
            None => "raw similarity n/a".to_string(),
        };
        format!(
            "courses {} (excluded without syllabus: {}), vocabulary {}, LSA rank {}, {range}, {:.2}s",
            self.matrix.len(),
            self.excluded_courses,
            self.vocabulary_size,
            self.lsa_rank,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Builds the normalized similarity matrix for every catalog course that has
/// a syllabus. The LSA model is trained on those syllabi.
pub fn build_similarity(
    catalog: &[CourseRecord],
    preprocessor: &Preprocessor,
    kb: &LexicalKb,
    rank: Option<usize>,
) -> Result<MatrixBuild> {
    let start = Instant::now();
    let courses: Vec<CourseRecord> = catalog
        .iter()
        .filter(|c| c.has_syllabus())
        .cloned()
        .collect();
    if courses.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let corpus: Vec<TokenList> = courses
        .iter()
        .map(|c| preprocessor.preprocess(&c.syllabus))
        .collect();
    let tdm = TermDocMatrix::from_corpus(&corpus)?;
    let vocabulary_size = tdm.terms.len();
    let rank = rank.unwrap_or_else(|| default_rank(corpus.len(), vocabulary_size));
    let model = build_lsa_from_matrix(tdm, rank)?;
    let raw = build_raw_matrix(&courses, preprocessor, &model, kb)?;
    let raw_range = raw.matrix().off_diagonal_range();
    let matrix = normalize(raw);
    Ok(MatrixBuild {
        matrix,
        raw_range,
        lsa_rank: model.rank(),
        vocabulary_size,
        excluded_courses: catalog.len() - courses.len(),
        elapsed: start.elapsed(),
    })
}

/// Loads inputs named in `cfg` and builds the matrix.
pub fn run_build_matrix(cfg: &PipelineConfig) -> Result<MatrixBuild> {
    let catalog = parse_course_csv(&cfg.catalog, &cfg.catalog_columns)?;
    build_similarity(
        &catalog,
        &cfg.preprocessor()?,
        &cfg.lexicon()?,
        cfg.lsa_rank,
    )
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub filter_stats: FilterStats,
    pub scored: Vec<ScoredRecord>,
    pub metrics: Vec<RuleMetrics>,
    pub dump: MetricsDump,
}

/// filter → score → partition → mine.
pub fn analyze(
    catalog: &[CourseRecord],
    regs: &[RegistrationRecord],
    matrix: &SimilarityMatrix,
    opts: ScoringOptions,
) -> Result<Analysis> {
    let (kept, filter_stats) = filter_records(regs, catalog);
    let pool = history_pool(regs, catalog);
    let scored = score_dataset_with_history(&kept, &pool, matrix, opts)?;
    let partitions = partition_by_quality(&scored);
    let metrics = mine_all(&partitions);
    let dump = MetricsDump::new(&partitions, &metrics, Some(filter_stats));
    Ok(Analysis {
        filter_stats,
        scored,
        metrics,
        dump,
    })
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<(Vec<CourseRecord>, Vec<RegistrationRecord>)> {
    let catalog = parse_course_csv(&cfg.catalog, &cfg.catalog_columns)?;
    let perf = cfg
        .performance
        .as_ref()
        .ok_or_else(|| Error::Config("no performance CSV path given".into()))?;
    let regs = parse_performance_csv(perf, &cfg.performance_columns)?;
    Ok((catalog, regs))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions {
    pub dump_scored: bool,
    pub timestamp: bool,
}

pub const MANIFEST_FILE: &str = "manifest.txt";

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Human-readable run summary: filter counts and partition sizes.
pub fn summary_text(analysis: &Analysis, timestamp: Option<&str>) -> String {
    let s = &analysis.filter_stats;
    let mut out = String::new();
    let _ = writeln!(out, "records read            {}", s.total_read);
    let _ = writeln!(out, "dropped missing grade   {}", s.dropped_missing_grade);
    let _ = writeln!(out, "dropped missing CGPA    {}", s.dropped_missing_cgpa);
    let _ = writeln!(out, "dropped unknown course  {}", s.dropped_unknown_course);
    let _ = writeln!(out, "retained                {}", s.retained);
    let _ = writeln!(out);
    let _ = writeln!(out, "partition sizes");
    for p in &analysis.dump.partition_sizes {
        let _ = writeln!(out, "  {:<10} {}", p.quality.long_name(), p.size);
    }
    let _ = writeln!(out, "  {:<10} {}", "total", analysis.dump.total_records);
    if let Some(ts) = timestamp {
        let _ = writeln!(out);
        let _ = writeln!(out, "generated {ts}");
    }
    out
}

/// Writes all report files under `out_dir` plus a manifest of CRC-32
/// checksums, and returns the paths written (manifest last).
pub fn write_reports(
    analysis: &Analysis,
    out_dir: &Path,
    opts: ReportOptions,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let timestamp = opts.timestamp.then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("at unix time {secs}")
    });
    let summary = out_dir.join("summary.txt");
    write_file(
        &summary,
        summary_text(analysis, timestamp.as_deref()).as_bytes(),
    )?;
    written.push(summary);

    let table = emit_support_table(&analysis.metrics);
    let csv = out_dir.join("support_table.csv");
    write_file(&csv, table.csv.as_bytes())?;
    written.push(csv);
    let txt = out_dir.join("support_table.txt");
    write_file(&txt, table.text.as_bytes())?;
    written.push(txt);

    written.extend(emit_confidence_charts(&analysis.metrics, out_dir)?);

    let json = out_dir.join("metrics.json");
    write_file(&json, analysis.dump.to_json().as_bytes())?;
    written.push(json);

    if opts.dump_scored {
        let path = out_dir.join("scored_records.csv");
        let mut buf = Vec::new();
        write_scored_csv(&mut buf, &analysis.scored).map_err(|e| Error::io(&path, e))?;
        write_file(&path, &buf)?;
        written.push(path);
    }

    let manifest = out_dir.join(MANIFEST_FILE);
    write_manifest(&manifest, out_dir, &written)?;
    written.push(manifest);
    Ok(written)
}

/// `<crc32 hex>  <bytes>  <file name>` per artifact.
pub fn write_manifest(manifest: &Path, base: &Path, files: &[PathBuf]) -> Result<()> {
    let mut out = String::new();
    for f in files {
        let bytes = std::fs::read(f).map_err(|e| Error::io(f, e))?;
        let name = f.strip_prefix(base).unwrap_or(f);
        let _ = writeln!(
            out,
            "{:08x}  {:>10}  {}",
            crc32fast::hash(&bytes),
            bytes.len(),
            name.display()
        );
    }
    write_file(manifest, out.as_bytes())
}
