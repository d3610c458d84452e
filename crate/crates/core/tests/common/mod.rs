//! Independent reference implementations shared by the integration suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use coursesem::mining::{Consequent, RuleMetrics};
use coursesem::model::{Grade, RegistrationRecord};
use coursesem::scoring::{
    Improvement, KnowledgeBand, KnowledgeLevel, NumericGrade, QualityBand, ScoredRecord,
};
use coursesem::simmatrix::SimilarityMatrix;
use coursesem::textsim::svd::DenseMatrix;
use coursesem::textsim::TokenList;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One prior course as `(similarity, numeric grade, semester gap)`.
pub type Factor = (f64, u8, u32);

/// Searches downward for the largest integer level reached by any single
/// prior course.
pub fn brute_knowledge_index(history: &[Factor]) -> u8 {
    for level in (1..=10u8).rev() {
        let reached = history
            .iter()
            .any(|&(s, g, t)| s * f64::from(g) / f64::from(t) >= f64::from(level));
        if reached {
            return level;
        }
    }
    0
}

/// Matrix over `CUR` and `P0..Pn` where `s(CUR, Pj) = history[j].0`.
pub fn matrix_for_history(history: &[Factor]) -> SimilarityMatrix {
    let mut ids = vec!["CUR".to_string()];
    ids.extend((0..history.len()).map(|j| format!("P{j}")));
    SimilarityMatrix::from_pair_fn(ids, |i, j| if i == 0 { history[j - 1].0 } else { 0.25 })
        .expect("valid matrix")
}

pub const GRADE_VALUES: [u8; 7] = [0, 5, 6, 7, 8, 9, 10];

pub fn grade_letter(value: u8) -> Grade {
    match value {
        10 => Grade::EX,
        9 => Grade::A,
        8 => Grade::B,
        7 => Grade::C,
        6 => Grade::D,
        5 => Grade::P,
        _ => Grade::F,
    }
}

fn level_for(index: u8) -> KnowledgeLevel {
    [
        KnowledgeLevel::NG,
        KnowledgeLevel::NG,
        KnowledgeLevel::NG,
        KnowledgeLevel::LT,
        KnowledgeLevel::LT,
        KnowledgeLevel::RS,
        KnowledgeLevel::RS,
        KnowledgeLevel::SF,
        KnowledgeLevel::SF,
        KnowledgeLevel::MX,
        KnowledgeLevel::MX,
    ][usize::from(index)]
}

fn quality_for(cgpa: f64) -> QualityBand {
    [
        (6.0, QualityBand::EP),
        (7.0, QualityBand::PR),
        (8.0, QualityBand::MD),
        (9.0, QualityBand::GD),
    ]
    .into_iter()
    .find(|&(hi, _)| cgpa < hi)
    .map_or(QualityBand::VG, |(_, q)| q)
}

/// A random scored dataset. Some quality bands may be absent entirely.
pub fn random_scored(rng: &mut ChaCha8Rng, n: usize) -> Vec<ScoredRecord> {
    let skip_band = rng.gen_bool(0.3).then(|| rng.gen_range(0..5usize));
    (0..n)
        .map(|i| {
            let cgpa = loop {
                let c = (rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0;
                if skip_band.is_none_or(|b| quality_for(c) != QualityBand::ALL[b]) {
                    break c;
                }
            };
            let g = GRADE_VALUES[rng.gen_range(0..GRADE_VALUES.len())];
            let index = rng.gen_range(0..=10u8);
            let expected = cgpa.round() as u8;
            ScoredRecord {
                registration: RegistrationRecord {
                    student_code: format!("S{}", i % 97),
                    semester: 2,
                    preceding_cgpa: Some(cgpa),
                    course_number: format!("C{}", i % 31),
                    registration_type: "regular".into(),
                    grade: Some(grade_letter(g)),
                },
                cgpa,
                numeric_grade: NumericGrade::new(g).unwrap(),
                quality: quality_for(cgpa),
                knowledge: KnowledgeBand {
                    index,
                    level: level_for(index),
                },
                improvement: Improvement::new(expected, NumericGrade::new(g).unwrap()),
            }
        })
        .collect()
}

/// `(joint, antecedent, total)` counted by scanning the full record list once
/// per cell.
pub fn naive_counts(
    records: &[ScoredRecord],
    q: QualityBand,
    k: KnowledgeLevel,
    c: Consequent,
) -> (u64, u64, u64) {
    let (mut joint, mut ante, mut total) = (0, 0, 0);
    for r in records {
        if r.quality != q {
            continue;
        }
        total += 1;
        if r.knowledge.level == k {
            ante += 1;
            let delta = i32::from(r.numeric_grade.value()) - i32::from(r.improvement.expected);
            let holds = match c {
                Consequent::I1NonNegative => delta >= 0,
                Consequent::I2Positive => delta > 0,
                Consequent::I1Negative => delta < 0,
                Consequent::I2NonPositive => delta <= 0,
            };
            if holds {
                joint += 1;
            }
        }
    }
    (joint, ante, total)
}

/// Checks every mined cell against [`naive_counts`], including the exact
/// floating-point ratios.
pub fn check_metrics(records: &[ScoredRecord], metrics: &[RuleMetrics]) -> Result<(), String> {
    if metrics.len() != 50 {
        return Err(format!("expected 50 cells, got {}", metrics.len()));
    }
    let mut seen = BTreeSet::new();
    for m in metrics {
        let (joint, ante, total) = naive_counts(records, m.quality, m.knowledge, m.consequent);
        if (m.joint_count, m.antecedent_count, m.total) != (joint, ante, total) {
            return Err(format!(
                "{:?}/{:?}/{:?}: got ({}, {}, {}), oracle ({joint}, {ante}, {total})",
                m.quality, m.knowledge, m.consequent, m.joint_count, m.antecedent_count, m.total
            ));
        }
        let support = (total > 0).then(|| joint as f64 / total as f64);
        let confidence = (ante > 0).then(|| joint as f64 / ante as f64);
        if m.support() != support || m.confidence() != confidence {
            return Err(format!(
                "{:?}/{:?}/{:?}: ratio mismatch",
                m.quality, m.knowledge, m.consequent
            ));
        }
        seen.insert((
            m.quality.ordinal(),
            m.knowledge.ordinal(),
            m.consequent as u8,
        ));
    }
    if seen.len() != 50 {
        return Err("duplicate cells".into());
    }
    Ok(())
}

/// Random token corpus with `docs` documents drawn from `vocab` words.
pub fn random_corpus(rng: &mut ChaCha8Rng, docs: usize, vocab: usize) -> Vec<TokenList> {
    (0..docs)
        .map(|_| {
            let len = rng.gen_range(1..=12);
            (0..len)
                .map(|_| format!("w{}", rng.gen_range(0..vocab)))
                .collect()
        })
        .collect()
}

pub fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Rank-k reconstruction from nalgebra's SVD, with singular values sorted
/// descending. Returns `None` when σ_k and σ_{k+1} are too close for the
/// truncation to be unique.
pub fn oracle_reconstruction(m: &DenseMatrix, k: usize) -> Option<DMatrix<f64>> {
    let a = to_nalgebra(m);
    let svd = a.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    if k < sv.len() && sv[k - 1] - sv[k] < 1e-6 * sv[0].max(1.0) {
        return None;
    }
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for &i in order.iter().take(k) {
        out += svd.singular_values[i] * u.column(i) * vt.row(i);
    }
    Some(out)
}

pub fn max_abs_diff(ours: &DenseMatrix, oracle: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..ours.rows() {
        for c in 0..ours.cols() {
            worst = worst.max((ours.get(r, c) - oracle[(r, c)]).abs());
        }
    }
    worst
}

/// Plain bag-of-words cosine between two token lists.
pub fn token_cosine(a: &TokenList, b: &TokenList) -> f64 {
    fn count(t: &TokenList) -> BTreeMap<&str, f64> {
        let mut m: BTreeMap<&str, f64> = BTreeMap::new();
        for w in t.tokens() {
            *m.entry(w.as_str()).or_default() += 1.0;
        }
        m
    }
    let (ca, cb) = (count(a), count(b));
    let dot: f64 = ca
        .iter()
        .filter_map(|(w, x)| cb.get(w).map(|y| x * y))
        .sum();
    let norm = |m: &BTreeMap<&str, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    let denom = norm(&ca) * norm(&cb);
    if denom == 0.0 {
        0.0
    } else {
        dot / denom
    }
}
