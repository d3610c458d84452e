//! Seeded synthetic catalog and registration data with a planted
//! knowledge → improvement association.
//!
//! Courses belong to topics. A syllabus draws most of its words from its
//! topic's vocabulary (sometimes swapping a word for its synonym, which is
//! recorded in the generated lexicon) plus a few generic words shared by all
//! topics. The generator builds the same similarity matrix the pipeline
//! builds, and for every registration it computes the knowledge band from the
//! student's graded history first and only then draws the grade: with
//! probability `coupling[band]` the grade lands above the expected grade,
//! otherwise below it. The planted confidence is therefore exact in
//! expectation for every band.
//!
//! Randomness comes from [`ChaCha8Rng`], whose stream is stable across
//! platforms for a given seed.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CourseRecord, Grade, RegistrationRecord};
use crate::pipeline::build_similarity;
use crate::scoring::{
    grade_to_numeric, index_from_factors, knowledge_band, knowledge_factor, ExpectedRounding,
    IndexRounding, KnowledgeLevel, NumericGrade,
};
use crate::simmatrix::SimilarityMatrix;
use crate::textsim::{LexicalKb, Preprocessor, ENGLISH_STOPWORDS};

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_courses: usize,
    pub n_students: usize,
    pub n_semesters: u32,
    pub courses_per_semester: usize,
    pub topic_count: usize,
    pub words_per_topic: usize,
    pub syllabus_words: usize,
    pub generic_words: usize,
    pub generic_per_syllabus: usize,
    /// Probability that a token is replaced by its synonym.
    pub synonym_rate: f64,
    /// P(δ ≥ 0 | knowledge level), NG..MX.
    pub coupling: [f64; 5],
    /// Share of non-negative draws that land exactly on the expected grade.
    pub zero_delta_share: f64,
    pub missing_grade_rate: f64,
    pub lsa_rank: Option<usize>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_courses: 60,
            n_students: 200,
            n_semesters: 6,
            courses_per_semester: 5,
            topic_count: 6,
            words_per_topic: 14,
            syllabus_words: 10,
            generic_words: 30,
            generic_per_syllabus: 4,
            synonym_rate: 0.2,
            coupling: [0.1, 0.3, 0.5, 0.7, 0.9],
            zero_delta_share: 0.0,
            missing_grade_rate: 0.01,
            lsa_rank: None,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Synth(m));
        for (name, p) in [
            ("synonym_rate", self.synonym_rate),
            ("zero_delta_share", self.zero_delta_share),
            ("missing_grade_rate", self.missing_grade_rate),
        ]
        .into_iter()
        .chain(self.coupling.iter().map(|p| ("coupling", *p)))
        {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} value {p} is not a probability"));
            }
        }
        if self.topic_count == 0 || self.n_courses == 0 || self.n_students == 0 {
            return bad("topic, course and student counts must be positive".into());
        }
        if self.n_semesters == 0 || self.courses_per_semester == 0 {
            return bad("semester count and courses per semester must be positive".into());
        }
        if self.n_courses < self.topic_count {
            return bad(format!(
                "{} courses cannot cover {} topics",
                self.n_courses, self.topic_count
            ));
        }
        let per_student = self.n_semesters as usize * self.courses_per_semester;
        if per_student > self.n_courses {
            return bad(format!(
                "each student takes {per_student} distinct courses but only {} exist",
                self.n_courses
            ));
        }
        if self.syllabus_words == 0 || self.syllabus_words > self.words_per_topic {
            return bad(format!(
                "syllabus_words {} must be in 1..={}",
                self.syllabus_words, self.words_per_topic
            ));
        }
        if self.generic_per_syllabus > self.generic_words {
            return bad(format!(
                "generic_per_syllabus {} exceeds generic_words {}",
                self.generic_per_syllabus, self.generic_words
            ));
        }
        if self.lsa_rank == Some(0) {
            return bad("LSA rank must be at least 1".into());
        }
        Ok(())
    }

    pub fn record_count(&self) -> usize {
        self.n_students * self.n_semesters as usize * self.courses_per_semester
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub courses: Vec<CourseRecord>,
    pub registrations: Vec<RegistrationRecord>,
    pub lexicon: String,
    pub matrix: SimilarityMatrix,
}

/// Sidecar describing how a dataset was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSidecar {
    pub rng: String,
    pub planted_coupling: [f64; 5],
    pub config: SynthConfig,
    pub note: String,
}

impl SynthSidecar {
    pub fn new(cfg: &SynthConfig) -> Self {
        SynthSidecar {
            rng: RNG_NAME.to_string(),
            planted_coupling: cfg.coupling,
            config: cfg.clone(),
            note: "grades are conditioned on knowledge levels computed with the bundled stoplist, \
                   the generated lexicon, floor rounding and half-away-from-zero expected grades"
                .to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serialize");
        s.push('\n');
        s
    }
}

/// Provenance comment for generated CSV files.
pub fn header_comment(cfg: &SynthConfig) -> String {
    format!(
        "generated by coursesem synth; rng={RNG_NAME}; seed={}",
        cfg.seed
    )
}

const SYLLABLES: [&str; 16] = [
    "ba", "ce", "di", "fo", "gu", "ha", "ji", "ko", "lu", "ma", "ne", "pi", "ro", "sa", "te", "vu",
];

/// Pronounceable pseudo-word for `id`; distinct ids give distinct words.
fn pseudo_word(id: usize) -> String {
    let mut digits = Vec::new();
    let mut n = id;
    loop {
        digits.push(n % SYLLABLES.len());
        n /= SYLLABLES.len();
        if n == 0 {
            break;
        }
    }
    while digits.len() < 3 {
        digits.push(0);
    }
    digits.iter().rev().map(|&d| SYLLABLES[d]).collect()
}

struct Vocabulary {
    topics: Vec<Vec<(String, String)>>,
    generic: Vec<String>,
}

fn vocabulary(cfg: &SynthConfig) -> Vocabulary {
    let stop: HashSet<&str> = ENGLISH_STOPWORDS.iter().copied().collect();
    let mut next = 0usize;
    let mut fresh = || loop {
        let w = pseudo_word(next);
        next += 1;
        if !stop.contains(w.as_str()) {
            return w;
        }
    };
    let topics = (0..cfg.topic_count)
        .map(|_| {
            (0..cfg.words_per_topic)
                .map(|_| (fresh(), fresh()))
                .collect()
        })
        .collect();
    let generic = (0..cfg.generic_words).map(|_| fresh()).collect();
    Vocabulary { topics, generic }
}

fn make_catalog(cfg: &SynthConfig, vocab: &Vocabulary, rng: &mut ChaCha8Rng) -> Vec<CourseRecord> {
    (0..cfg.n_courses)
        .map(|c| {
            let topic = c % cfg.topic_count;
            let words = &vocab.topics[topic];
            let mut picks: Vec<usize> = (0..words.len()).collect();
            picks.shuffle(rng);
            let mut tokens: Vec<&str> = picks[..cfg.syllabus_words]
                .iter()
                .map(|&i| {
                    let (word, synonym) = &words[i];
                    if rng.gen_bool(cfg.synonym_rate) {
                        synonym.as_str()
                    } else {
                        word.as_str()
                    }
                })
                .collect();
            tokens.extend(
                vocab
                    .generic
                    .choose_multiple(rng, cfg.generic_per_syllabus)
                    .map(String::as_str),
            );
            tokens.shuffle(rng);
            CourseRecord {
                course_number: format!("T{topic:02}C{c:04}"),
                course_name: format!("Topic {topic} course {c}"),
                syllabus: tokens.join(" "),
            }
        })
        .collect()
}

fn lexicon_text(vocab: &Vocabulary) -> String {
    let mut out = String::from("# synonym pairs of the synthetic topic vocabularies\n");
    for topic in &vocab.topics {
        for (w, s) in topic {
            out.push_str(&format!("syn: {w} {s}\n"));
        }
    }
    out
}

fn grade_for(value: u8) -> Grade {
    Grade::ALL
        .into_iter()
        .find(|g| grade_to_numeric(*g).value() == value)
        .expect("valid numeric grade")
}

#[derive(Clone, Copy)]
struct Prior {
    course: usize,
    semester: u32,
    grade: NumericGrade,
}

fn level_of(
    matrix: &SimilarityMatrix,
    course: usize,
    semester: u32,
    history: &[Prior],
) -> KnowledgeLevel {
    let factors = history
        .iter()
        .filter(|p| p.semester < semester)
        .map(|p| knowledge_factor(matrix.get(course, p.course), p.grade, semester - p.semester));
    let index = index_from_factors(factors, IndexRounding::Floor);
    knowledge_band(index).expect("index within 0..=10").level
}

const QUALITY_RANGES: [(f64, f64); 5] =
    [(4.5, 6.0), (6.0, 7.0), (7.0, 8.0), (8.0, 9.0), (9.0, 9.49)];
const CGPA_JITTER: f64 = 0.3;
const CGPA_FLOOR: f64 = 4.0;
// expected grade must stay ≤ 9 so a strictly better grade exists
const CGPA_CEIL: f64 = 9.49;

fn draw_grade(rng: &mut ChaCha8Rng, cfg: &SynthConfig, expected: u8, level: KnowledgeLevel) -> u8 {
    let above: Vec<u8> = NumericGrade::VALID
        .iter()
        .copied()
        .filter(|&g| g > expected)
        .collect();
    let below: Vec<u8> = NumericGrade::VALID
        .iter()
        .copied()
        .filter(|&g| g < expected)
        .collect();
    if rng.gen_bool(cfg.coupling[level.ordinal()]) {
        if NumericGrade::VALID.contains(&expected) && rng.gen_bool(cfg.zero_delta_share) {
            expected
        } else {
            *above.choose(rng).expect("expected grade below 10")
        }
    } else {
        *below.choose(rng).expect("expected grade above 0")
    }
}

/// Generates a dataset. Identical configs give identical output.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = vocabulary(cfg);
    let courses = make_catalog(cfg, &vocab, &mut rng);
    let lexicon = lexicon_text(&vocab);
    let kb = LexicalKb::parse(&lexicon, "synthetic lexicon")?;
    let matrix = build_similarity(&courses, &Preprocessor::default(), &kb, cfg.lsa_rank)?.matrix;

    let expected_rounding = ExpectedRounding::HalfAwayFromZero;
    let mut registrations = Vec::with_capacity(cfg.record_count());
    for s in 0..cfg.n_students {
        let student = format!("S{s:06}");
        let (lo, hi) = QUALITY_RANGES[rng.gen_range(0..QUALITY_RANGES.len())];
        let base = rng.gen_range(lo..hi);
        let mut taken = vec![false; courses.len()];
        let mut history: Vec<Prior> = Vec::new();

        for semester in 1..=cfg.n_semesters {
            let cgpa =
                (base + rng.gen_range(-CGPA_JITTER..CGPA_JITTER)).clamp(CGPA_FLOOR, CGPA_CEIL);
            let cgpa = (cgpa * 100.0).round() / 100.0;
            let expected = expected_rounding.apply(cgpa);
            let mut this_semester = Vec::with_capacity(cfg.courses_per_semester);

            for _ in 0..cfg.courses_per_semester {
                let target = KnowledgeLevel::ALL[rng.gen_range(0..5)];
                let mut candidates: Vec<usize> =
                    (0..courses.len()).filter(|&c| !taken[c]).collect();
                candidates.shuffle(&mut rng);
                let mut best: Option<(usize, KnowledgeLevel, usize)> = None;
                for &c in &candidates {
                    let level = level_of(&matrix, c, semester, &history);
                    let dist = level.ordinal().abs_diff(target.ordinal());
                    if best.is_none_or(|(_, _, d)| dist < d) {
                        best = Some((c, level, dist));
                    }
                    if dist == 0 {
                        break;
                    }
                }
                let (course, level, _) = best.expect("validated: enough untaken courses");
                taken[course] = true;

                let grade_value = draw_grade(&mut rng, cfg, expected, level);
                let missing = rng.gen_bool(cfg.missing_grade_rate);
                let grade = (!missing).then(|| grade_for(grade_value));
                if !missing {
                    this_semester.push(Prior {
                        course,
                        semester,
                        grade: NumericGrade::new(grade_value).expect("valid grade"),
                    });
                }
                registrations.push(RegistrationRecord {
                    student_code: student.clone(),
                    semester,
                    preceding_cgpa: (semester > 1).then_some(cgpa),
                    course_number: courses[course].course_number.clone(),
                    registration_type: "regular".to_string(),
                    grade,
                });
            }
            history.extend(this_semester);
        }
    }

    Ok(SynthDataset {
        courses,
        registrations,
        lexicon,
        matrix,
    })
}
