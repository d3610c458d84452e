//! Support and confidence of the rules `knowledge → improvement`, counted
//! separately within each student-quality partition, plus the table, chart,
//! and JSON emitters for the results.
//!
//! The rule space is fixed (5 quality bands × 5 knowledge levels × 2
//! consequents), so every cell is counted exhaustively with integers. Support
//! is `joint / partition size`; confidence is `joint / antecedent` and is
//! absent when no record of the partition has the antecedent knowledge level.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FilterStats;
use crate::scoring::{Improvement, KnowledgeLevel, QualityBand, ScoredRecord, I1, I2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Consequent {
    #[serde(rename = "I1_NonNegative")]
    I1NonNegative,
    #[serde(rename = "I2_Positive")]
    I2Positive,
    #[serde(rename = "I1_Negative")]
    I1Negative,
    #[serde(rename = "I2_NonPositive")]
    I2NonPositive,
}

impl Consequent {
    /// The two consequents the analysis reports; the other two are their
    /// complements.
    pub const ANALYZED: [Consequent; 2] = [Consequent::I1NonNegative, Consequent::I2Positive];

    pub fn holds(self, imp: &Improvement) -> bool {
        match self {
            Consequent::I1NonNegative => imp.i1 == I1::NonNegative,
            Consequent::I1Negative => imp.i1 == I1::Negative,
            Consequent::I2Positive => imp.i2 == I2::Positive,
            Consequent::I2NonPositive => imp.i2 == I2::NonPositive,
        }
    }

    pub fn complement(self) -> Consequent {
        match self {
            Consequent::I1NonNegative => Consequent::I1Negative,
            Consequent::I1Negative => Consequent::I1NonNegative,
            Consequent::I2Positive => Consequent::I2NonPositive,
            Consequent::I2NonPositive => Consequent::I2Positive,
        }
    }

    /// File-name fragment.
    pub fn slug(self) -> &'static str {
        match self {
            Consequent::I1NonNegative => "nonnegative",
            Consequent::I2Positive => "positive",
            Consequent::I1Negative => "negative",
            Consequent::I2NonPositive => "nonpositive",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Consequent::I1NonNegative => "Non-negative",
            Consequent::I2Positive => "Positive",
            Consequent::I1Negative => "Negative",
            Consequent::I2NonPositive => "Non-positive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QualityPartition<'a> {
    pub band: QualityBand,
    pub records: Vec<&'a ScoredRecord>,
}

impl QualityPartition<'_> {
    pub fn size(&self) -> usize {
        self.records.len()
    }
}

/// Splits scored records into the five quality partitions, in band order.
pub fn partition_by_quality(scored: &[ScoredRecord]) -> [QualityPartition<'_>; 5] {
    let mut parts = QualityBand::ALL.map(|band| QualityPartition {
        band,
        records: Vec::new(),
    });
    for r in scored {
        parts[r.quality.ordinal()].records.push(r);
    }
    parts
}

/// Counts for one `(quality, knowledge) → consequent` rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleMetrics {
    pub quality: QualityBand,
    pub knowledge: KnowledgeLevel,
    pub consequent: Consequent,
    pub joint_count: u64,
    pub antecedent_count: u64,
    pub total: u64,
}

impl RuleMetrics {
    /// `None` for an empty partition.
    pub fn support(&self) -> Option<f64> {
        (self.total > 0).then(|| self.joint_count as f64 / self.total as f64)
    }

    /// `None` when no record carries the antecedent.
    pub fn confidence(&self) -> Option<f64> {
        (self.antecedent_count > 0).then(|| self.joint_count as f64 / self.antecedent_count as f64)
    }

    pub fn is_empty_partition(&self) -> bool {
        self.total == 0
    }
}

pub fn rule_metrics(
    partition: &QualityPartition<'_>,
    knowledge: KnowledgeLevel,
    consequent: Consequent,
) -> RuleMetrics {
    let antecedent = partition
        .records
        .iter()
        .filter(|r| r.knowledge.level == knowledge);
    let (antecedent_count, joint_count) = antecedent.fold((0u64, 0u64), |(a, j), r| {
        (a + 1, j + u64::from(consequent.holds(&r.improvement)))
    });
    RuleMetrics {
        quality: partition.band,
        knowledge,
        consequent,
        joint_count,
        antecedent_count,
        total: partition.size() as u64,
    }
}

/// Every cell of the rule grid, ordered by consequent, then quality, then
/// knowledge level. Always 50 entries.
pub fn mine_all(partitions: &[QualityPartition<'_>; 5]) -> Vec<RuleMetrics> {
    // one pass per partition: [level][consequent] joint counts plus antecedent counts
    let tallies: Vec<([u64; 5], [[u64; 2]; 5], u64)> = partitions
        .iter()
        .map(|p| {
            let mut antecedent = [0u64; 5];
            let mut joint = [[0u64; 2]; 5];
            for r in &p.records {
                let k = r.knowledge.level.ordinal();
                antecedent[k] += 1;
                for (c, cons) in Consequent::ANALYZED.iter().enumerate() {
                    joint[k][c] += u64::from(cons.holds(&r.improvement));
                }
            }
            (antecedent, joint, p.size() as u64)
        })
        .collect();

    let mut out = Vec::with_capacity(50);
    for (c, consequent) in Consequent::ANALYZED.into_iter().enumerate() {
        for (p, (antecedent, joint, total)) in partitions.iter().zip(&tallies) {
            for knowledge in KnowledgeLevel::ALL {
                let k = knowledge.ordinal();
                out.push(RuleMetrics {
                    quality: p.band,
                    knowledge,
                    consequent,
                    joint_count: joint[k][c],
                    antecedent_count: antecedent[k],
                    total: *total,
                });
            }
        }
    }
    out
}

fn find(
    metrics: &[RuleMetrics],
    q: QualityBand,
    k: KnowledgeLevel,
    c: Consequent,
) -> Option<&RuleMetrics> {
    metrics
        .iter()
        .find(|m| m.quality == q && m.knowledge == k && m.consequent == c)
}

fn format_support(m: Option<&RuleMetrics>) -> String {
    match m.and_then(RuleMetrics::support) {
        Some(s) => format!("{s:.4}"),
        None => "n/a".to_string(),
    }
}

pub const SUPPORT_TABLE_TITLE: &str = "SUPPORT OF NON-NEGATIVE AND POSITIVE IMPROVEMENTS";

/// Support table as two 5×5 blocks (non-negative, then positive), rows by
/// quality band and columns by knowledge level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportTable {
    pub csv: String,
    pub text: String,
}

pub fn emit_support_table(metrics: &[RuleMetrics]) -> SupportTable {
    let mut csv = String::from("improvement,quality");
    for k in KnowledgeLevel::ALL {
        let _ = write!(csv, ",{k}");
    }
    csv.push('\n');

    let mut text = String::new();
    let _ = writeln!(text, "{SUPPORT_TABLE_TITLE}");
    let _ = write!(text, "{:<18}", "Student quality");
    for k in KnowledgeLevel::ALL {
        let _ = write!(text, "{:>8}", k.label());
    }
    text.push('\n');

    for consequent in Consequent::ANALYZED {
        let _ = writeln!(text, "Improvement: {}", consequent.title());
        for q in QualityBand::ALL {
            let _ = write!(csv, "{},{}", consequent.title().to_lowercase(), q.label());
            let _ = write!(text, "{:<18}", q.label());
            for k in KnowledgeLevel::ALL {
                let cell = format_support(find(metrics, q, k, consequent));
                let _ = write!(csv, ",{cell}");
                let _ = write!(text, "{cell:>8}");
            }
            csv.push('\n');
            text.push('\n');
        }
    }
    SupportTable { csv, text }
}

const CHART_WIDTH: f64 = 360.0;
const CHART_HEIGHT: f64 = 280.0;
const PLOT_LEFT: f64 = 50.0;
const PLOT_TOP: f64 = 40.0;
/// Pixel height of a bar with confidence 1.
pub const PLOT_HEIGHT: f64 = 200.0;
const SLOT_WIDTH: f64 = 60.0;
const BAR_WIDTH: f64 = 36.0;

/// Static SVG bar chart of confidence by knowledge level for one quality band
/// and consequent. Levels without a defined confidence get no bar.
pub fn confidence_chart_svg(metrics: &[RuleMetrics], q: QualityBand, c: Consequent) -> String {
    let baseline = PLOT_TOP + PLOT_HEIGHT;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" viewBox="0 0 {CHART_WIDTH} {CHART_HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="13">{} improvement, {} students</text>"#,
        CHART_WIDTH / 2.0,
        c.title(),
        q.long_name()
    );
    let _ = writeln!(
        svg,
        r##"  <line x1="{PLOT_LEFT}" y1="{baseline}" x2="{}" y2="{baseline}" stroke="#000"/>"##,
        PLOT_LEFT + SLOT_WIDTH * 5.0
    );
    let _ = writeln!(
        svg,
        r##"  <line x1="{PLOT_LEFT}" y1="{PLOT_TOP}" x2="{PLOT_LEFT}" y2="{baseline}" stroke="#000"/>"##
    );
    for tick in 0..=4 {
        let v = f64::from(tick) * 0.25;
        let y = baseline - v * PLOT_HEIGHT;
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{v:.2}</text>"#,
            PLOT_LEFT - 4.0,
            y + 3.0
        );
    }
    for (slot, k) in KnowledgeLevel::ALL.into_iter().enumerate() {
        let x = PLOT_LEFT + SLOT_WIDTH * slot as f64 + (SLOT_WIDTH - BAR_WIDTH) / 2.0;
        if let Some(conf) = find(metrics, q, k, c).and_then(RuleMetrics::confidence) {
            let h = conf * PLOT_HEIGHT;
            let _ = writeln!(
                svg,
                r##"  <rect class="bar" data-knowledge="{k}" data-confidence="{conf}" x="{x:.2}" y="{:.4}" width="{BAR_WIDTH}" height="{h:.4}" fill="#4a7bb7"/>"##,
                baseline - h
            );
        }
        let _ = writeln!(
            svg,
            r#"  <text x="{:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{k}</text>"#,
            x + BAR_WIDTH / 2.0,
            baseline + 16.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Companion CSV of a chart: one row per knowledge level with the exact
/// counts and the confidence (blank when absent).
pub fn confidence_chart_csv(metrics: &[RuleMetrics], q: QualityBand, c: Consequent) -> String {
    let mut out = String::from("knowledge,joint_count,antecedent_count,confidence\n");
    for k in KnowledgeLevel::ALL {
        let (joint, ante, conf) = match find(metrics, q, k, c) {
            Some(m) => (
                m.joint_count,
                m.antecedent_count,
                m.confidence().map(|v| v.to_string()).unwrap_or_default(),
            ),
            None => (0, 0, String::new()),
        };
        let _ = writeln!(out, "{k},{joint},{ante},{conf}");
    }
    out
}

pub fn chart_file_stem(q: QualityBand, c: Consequent) -> String {
    format!("confidence_{}_{}", q.label(), c.slug())
}

/// Writes one SVG and one CSV per (quality, analyzed consequent) into
/// `out_dir`, returning the written paths.
pub fn emit_confidence_charts(metrics: &[RuleMetrics], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for c in Consequent::ANALYZED {
        for q in QualityBand::ALL {
            let stem = chart_file_stem(q, c);
            let svg = out_dir.join(format!("{stem}.svg"));
            std::fs::write(&svg, confidence_chart_svg(metrics, q, c))
                .map_err(|e| Error::io(&svg, e))?;
            let csv = out_dir.join(format!("{stem}.csv"));
            std::fs::write(&csv, confidence_chart_csv(metrics, q, c))
                .map_err(|e| Error::io(&csv, e))?;
            written.push(svg);
            written.push(csv);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSize {
    pub quality: QualityBand,
    pub size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCell {
    #[serde(flatten)]
    pub metrics: RuleMetrics,
    pub support: Option<f64>,
    pub confidence: Option<f64>,
}

/// Structured dump written as `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDump {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub filter_stats: Option<FilterStats>,
    pub total_records: u64,
    pub partition_sizes: Vec<PartitionSize>,
    pub cells: Vec<MetricCell>,
}

impl MetricsDump {
    pub fn new(
        partitions: &[QualityPartition<'_>; 5],
        metrics: &[RuleMetrics],
        filter_stats: Option<FilterStats>,
    ) -> Self {
        let partition_sizes: Vec<PartitionSize> = partitions
            .iter()
            .map(|p| PartitionSize {
                quality: p.band,
                size: p.size() as u64,
            })
            .collect();
        MetricsDump {
            filter_stats,
            total_records: partition_sizes.iter().map(|p| p.size).sum(),
            partition_sizes,
            cells: metrics
                .iter()
                .map(|m| MetricCell {
                    metrics: *m,
                    support: m.support(),
                    confidence: m.confidence(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}
