//! Per-registration derived attributes: numeric grade, student quality band,
//! domain knowledge index and band, and the improvement indicators.
//!
//! The knowledge index of a registration is
//!
//! ```text
//! θ̃ = ⌊ max_j  s(i, j) · g̃_j / t_ij ⌋
//! ```
//!
//! over the student's earlier graded courses `j`, where `s` is course
//! similarity, `g̃_j` the numeric grade and `t_ij ≥ 1` the semester gap.
//! Only strictly earlier semesters count; with no earlier course θ̃ is 0.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Grade, RegistrationRecord};
use crate::simmatrix::SimilarityMatrix;

/// Numeric grade in `{0, 5, 6, 7, 8, 9, 10}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct NumericGrade(u8);

impl NumericGrade {
    pub const VALID: [u8; 7] = [0, 5, 6, 7, 8, 9, 10];

    pub fn new(value: u8) -> Result<Self> {
        if Self::VALID.contains(&value) {
            Ok(NumericGrade(value))
        } else {
            Err(Error::OutOfRange {
                value: value.into(),
                range: "{0, 5, 6, 7, 8, 9, 10}",
            })
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for NumericGrade {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        NumericGrade::new(v)
    }
}

impl From<NumericGrade> for u8 {
    fn from(g: NumericGrade) -> u8 {
        g.0
    }
}

pub fn grade_to_numeric(grade: Grade) -> NumericGrade {
    NumericGrade(match grade {
        Grade::EX => 10,
        Grade::A => 9,
        Grade::B => 8,
        Grade::C => 7,
        Grade::D => 6,
        Grade::P => 5,
        Grade::F => 0,
    })
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal, $long:literal;)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant,)*
        }

        impl $name {
            pub const ALL: [$name; 5] = [$($name::$variant,)*];

            pub fn label(self) -> &'static str {
                match self { $($name::$variant => $label,)* }
            }

            pub fn long_name(self) -> &'static str {
                match self { $($name::$variant => $long,)* }
            }

            pub fn ordinal(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                $name::ALL
                    .into_iter()
                    .find(|v| v.label().eq_ignore_ascii_case(s.trim()))
                    .ok_or_else(|| Error::Config(format!("unknown {} `{s}`", stringify!($name))))
            }
        }
    };
}

label_enum! {
    /// Student quality from the preceding CGPA.
    QualityBand {
        EP => "EP", "Ext. poor";
        PR => "PR", "Poor";
        MD => "MD", "Medium";
        GD => "GD", "Good";
        VG => "VG", "Very good";
    }
}

label_enum! {
    /// Domain knowledge level from the knowledge index.
    KnowledgeLevel {
        NG => "NG", "Negligible";
        LT => "LT", "Little";
        RS => "RS", "Reasonable";
        SF => "SF", "Sufficient";
        MX => "MX", "Maximum";
    }
}

/// Maps a preceding CGPA to its quality band.
pub fn quality_of(cgpa: f64) -> Result<QualityBand> {
    if !(0.0..=10.0).contains(&cgpa) {
        return Err(Error::OutOfRange {
            value: cgpa,
            range: "[0, 10]",
        });
    }
    Ok(if cgpa < 6.0 {
        QualityBand::EP
    } else if cgpa < 7.0 {
        QualityBand::PR
    } else if cgpa < 8.0 {
        QualityBand::MD
    } else if cgpa < 9.0 {
        QualityBand::GD
    } else {
        QualityBand::VG
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnowledgeBand {
    pub index: u8,
    pub level: KnowledgeLevel,
}

pub fn knowledge_band(index: u8) -> Result<KnowledgeBand> {
    let level = match index {
        0..=2 => KnowledgeLevel::NG,
        3 | 4 => KnowledgeLevel::LT,
        5 | 6 => KnowledgeLevel::RS,
        7 | 8 => KnowledgeLevel::SF,
        9 | 10 => KnowledgeLevel::MX,
        _ => {
            return Err(Error::OutOfRange {
                value: index.into(),
                range: "0..=10",
            })
        }
    };
    Ok(KnowledgeBand { index, level })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum I1 {
    NonNegative,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum I2 {
    Positive,
    NonPositive,
}

/// Actual minus expected grade, with its two binary classifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Improvement {
    pub expected: u8,
    pub delta: i32,
    pub i1: I1,
    pub i2: I2,
}

impl Improvement {
    pub fn new(expected: u8, actual: NumericGrade) -> Self {
        let delta = i32::from(actual.value()) - i32::from(expected);
        Improvement {
            expected,
            delta,
            i1: if delta >= 0 {
                I1::NonNegative
            } else {
                I1::Negative
            },
            i2: if delta > 0 {
                I2::Positive
            } else {
                I2::NonPositive
            },
        }
    }
}

/// How the maximum knowledge factor becomes an integer index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexRounding {
    #[default]
    Floor,
    Nearest,
}

/// How the preceding CGPA becomes the expected grade.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedRounding {
    #[default]
    HalfAwayFromZero,
    HalfEven,
}

impl ExpectedRounding {
    pub fn apply(self, cgpa: f64) -> u8 {
        let r = match self {
            ExpectedRounding::HalfAwayFromZero => cgpa.round(),
            ExpectedRounding::HalfEven => cgpa.round_ties_even(),
        };
        r.clamp(0.0, 10.0) as u8
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringOptions {
    pub rounding: IndexRounding,
    pub expected_rounding: ExpectedRounding,
}

pub fn improvement(grade: NumericGrade, cgpa: f64, rounding: ExpectedRounding) -> Improvement {
    Improvement::new(rounding.apply(cgpa), grade)
}

/// One earlier course in a student's history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorCourse {
    pub course_number: String,
    pub semester: u32,
    pub grade: NumericGrade,
}

/// Knowledge factor `s · g̃ / t` of one earlier course.
pub fn knowledge_factor(similarity: f64, grade: NumericGrade, gap: u32) -> f64 {
    similarity * f64::from(grade.value()) / f64::from(gap)
}

pub(crate) fn index_from_factors(
    factors: impl Iterator<Item = f64>,
    rounding: IndexRounding,
) -> u8 {
    let Some(best) = factors.reduce(f64::max) else {
        return 0;
    };
    let r = match rounding {
        IndexRounding::Floor => best.floor(),
        IndexRounding::Nearest => best.round(),
    };
    r.clamp(0.0, 10.0) as u8
}

/// Knowledge index of a registration of `course` in `semester` given the
/// student's earlier courses.
pub fn knowledge_index(
    course: &str,
    semester: u32,
    history: &[PriorCourse],
    matrix: &SimilarityMatrix,
    rounding: IndexRounding,
) -> Result<u8> {
    let i = matrix
        .index_of(course)
        .ok_or_else(|| Error::UnknownCourse(course.to_string()))?;
    let mut factors = Vec::with_capacity(history.len());
    for h in history {
        if h.semester >= semester {
            return Err(Error::Precondition(format!(
                "history course `{}` in semester {} is not before semester {semester}",
                h.course_number, h.semester
            )));
        }
        let j = matrix
            .index_of(&h.course_number)
            .ok_or_else(|| Error::UnknownCourse(h.course_number.clone()))?;
        factors.push(knowledge_factor(
            matrix.get(i, j),
            h.grade,
            semester - h.semester,
        ));
    }
    Ok(index_from_factors(factors.into_iter(), rounding))
}

/// A filtered registration with all derived attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub registration: RegistrationRecord,
    pub cgpa: f64,
    pub numeric_grade: NumericGrade,
    pub quality: QualityBand,
    pub knowledge: KnowledgeBand,
    pub improvement: Improvement,
}

#[derive(Debug, Clone, Copy)]
struct IndexedPrior {
    course: usize,
    semester: u32,
    grade: NumericGrade,
}

/// Scores filtered registrations, using the registrations themselves as the
/// history source.
pub fn score_dataset(
    regs: &[RegistrationRecord],
    matrix: &SimilarityMatrix,
    opts: ScoringOptions,
) -> Result<Vec<ScoredRecord>> {
    score_dataset_with_history(regs, regs, matrix, opts)
}

/// Scores filtered registrations against a separate history pool of graded,
/// catalog-resolvable records (which may include records that were filtered
/// out for lacking a preceding CGPA). Output order follows `regs`.
pub fn score_dataset_with_history(
    regs: &[RegistrationRecord],
    history: &[RegistrationRecord],
    matrix: &SimilarityMatrix,
    opts: ScoringOptions,
) -> Result<Vec<ScoredRecord>> {
    let mut by_student: HashMap<&str, Vec<IndexedPrior>> = HashMap::new();
    for h in history {
        let Some(grade) = h.grade else { continue };
        let course = matrix
            .index_of(&h.course_number)
            .ok_or_else(|| Error::UnknownCourse(h.course_number.clone()))?;
        by_student
            .entry(h.student_code.as_str())
            .or_default()
            .push(IndexedPrior {
                course,
                semester: h.semester,
                grade: grade_to_numeric(grade),
            });
    }

    regs.par_iter()
        .map(|r| {
            let grade = r.grade.ok_or_else(|| {
                Error::Precondition(format!(
                    "unfiltered record without grade for {}",
                    r.student_code
                ))
            })?;
            let cgpa = r.preceding_cgpa.ok_or_else(|| {
                Error::Precondition(format!(
                    "unfiltered record without CGPA for {}",
                    r.student_code
                ))
            })?;
            let i = matrix
                .index_of(&r.course_number)
                .ok_or_else(|| Error::UnknownCourse(r.course_number.clone()))?;
            let priors = by_student
                .get(r.student_code.as_str())
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            let factors = priors.iter().filter(|p| p.semester < r.semester).map(|p| {
                knowledge_factor(matrix.get(i, p.course), p.grade, r.semester - p.semester)
            });
            let index = index_from_factors(factors, opts.rounding);
            let numeric_grade = grade_to_numeric(grade);
            Ok(ScoredRecord {
                registration: r.clone(),
                cgpa,
                numeric_grade,
                quality: quality_of(cgpa)?,
                knowledge: knowledge_band(index)?,
                improvement: improvement(numeric_grade, cgpa, opts.expected_rounding),
            })
        })
        .collect()
}

pub const SCORED_CSV_HEADER: [&str; 14] = [
    "student_code",
    "semester",
    "preceding_cgpa",
    "course_number",
    "registration_type",
    "grade",
    "numeric_grade",
    "quality",
    "knowledge_index",
    "knowledge",
    "expected_grade",
    "delta",
    "i1",
    "i2",
];

/// One row per scored record with every derived column.
pub fn write_scored_csv<W: Write>(wtr: W, records: &[ScoredRecord]) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(wtr);
    csv.write_record(SCORED_CSV_HEADER)?;
    for s in records {
        let r = &s.registration;
        csv.write_record([
            r.student_code.clone(),
            r.semester.to_string(),
            s.cgpa.to_string(),
            r.course_number.clone(),
            r.registration_type.clone(),
            r.grade.map(|g| g.to_string()).unwrap_or_default(),
            s.numeric_grade.value().to_string(),
            s.quality.label().to_string(),
            s.knowledge.index.to_string(),
            s.knowledge.level.label().to_string(),
            s.improvement.expected.to_string(),
            s.improvement.delta.to_string(),
            match s.improvement.i1 {
                I1::NonNegative => "non-negative",
                I1::Negative => "negative",
            }
            .to_string(),
            match s.improvement.i2 {
                I2::Positive => "positive",
                I2::NonPositive => "non-positive",
            }
            .to_string(),
        ])?;
    }
    csv.flush()
}
