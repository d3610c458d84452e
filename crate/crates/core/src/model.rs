//! Domain records for the course catalog and the registration history, CSV
//! ingestion for both, and the record filter that precedes scoring.
//!
//! Both inputs are comma-delimited UTF-8 with a header row. Column names are
//! configurable through [`CatalogColumns`] and [`PerformanceColumns`]; lines
//! starting with `#` are treated as comments so generated files can carry a
//! provenance header.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Letter grades accepted by the registration data, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grade {
    EX,
    A,
    B,
    C,
    D,
    P,
    F,
}

impl Grade {
    pub const ALL: [Grade; 7] = [
        Grade::EX,
        Grade::A,
        Grade::B,
        Grade::C,
        Grade::D,
        Grade::P,
        Grade::F,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Grade::EX => "EX",
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
            Grade::P => "P",
            Grade::F => "F",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Grade {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Grade::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| s.to_string())
    }
}

/// One catalog entry. The syllabus is kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseRecord {
    pub course_number: String,
    pub course_name: String,
    pub syllabus: String,
}

impl CourseRecord {
    pub fn has_syllabus(&self) -> bool {
        !self.syllabus.trim().is_empty()
    }
}

/// One student-course-semester transaction.
///
/// `registration_type` is carried through untouched; nothing downstream reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationRecord {
    pub student_code: String,
    pub semester: u32,
    pub preceding_cgpa: Option<f64>,
    pub course_number: String,
    pub registration_type: String,
    pub grade: Option<Grade>,
}

/// Audit counts for [`filter_records`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub total_read: usize,
    pub dropped_missing_grade: usize,
    pub dropped_missing_cgpa: usize,
    pub dropped_unknown_course: usize,
    pub retained: usize,
}

impl FilterStats {
    pub fn dropped(&self) -> usize {
        self.dropped_missing_grade + self.dropped_missing_cgpa + self.dropped_unknown_course
    }

    pub fn is_balanced(&self) -> bool {
        self.retained + self.dropped() == self.total_read
    }
}

/// Header names of the catalog CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogColumns {
    pub course_number: String,
    pub course_name: String,
    pub syllabus: String,
}

impl Default for CatalogColumns {
    fn default() -> Self {
        Self {
            course_number: "course_number".into(),
            course_name: "course_name".into(),
            syllabus: "syllabus".into(),
        }
    }
}

/// Header names of the performance CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerformanceColumns {
    pub student_code: String,
    pub semester: String,
    pub preceding_cgpa: String,
    pub course_number: String,
    pub registration_type: String,
    pub grade: String,
}

impl Default for PerformanceColumns {
    fn default() -> Self {
        Self {
            student_code: "student_code".into(),
            semester: "semester".into(),
            preceding_cgpa: "preceding_cgpa".into(),
            course_number: "course_number".into(),
            registration_type: "registration_type".into(),
            grade: "grade".into(),
        }
    }
}

fn csv_reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::Headers)
        .from_reader(rdr)
}

fn parse_error(source_name: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn csv_error(source_name: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    parse_error(source_name, line, err.to_string())
}

fn column_index(headers: &csv::StringRecord, name: &str, source_name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| parse_error(source_name, 1, format!("missing column `{name}` in header")))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads the course catalog from `path`.
pub fn parse_course_csv(path: &Path, columns: &CatalogColumns) -> Result<Vec<CourseRecord>> {
    read_courses(open(path)?, columns, &path.display().to_string())
}

/// Reads a course catalog from any reader; `source_name` labels errors.
pub fn read_courses<R: Read>(
    rdr: R,
    columns: &CatalogColumns,
    source_name: &str,
) -> Result<Vec<CourseRecord>> {
    let mut rdr = csv_reader(rdr);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(source_name, e))?
        .clone();
    let i_num = column_index(&headers, &columns.course_number, source_name)?;
    let i_name = column_index(&headers, &columns.course_name, source_name)?;
    let i_syl = column_index(&headers, &columns.syllabus, source_name)?;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(source_name, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let course_number = row.get(i_num).unwrap_or("").trim().to_string();
        if course_number.is_empty() {
            return Err(parse_error(source_name, line, "empty course number"));
        }
        if !seen.insert(course_number.clone()) {
            return Err(Error::DuplicateCourse {
                source_name: source_name.to_string(),
                line,
                course: course_number,
            });
        }
        out.push(CourseRecord {
            course_number,
            course_name: row.get(i_name).unwrap_or("").to_string(),
            syllabus: row.get(i_syl).unwrap_or("").to_string(),
        });
    }
    Ok(out)
}

/// Reads the registration history from `path`.
pub fn parse_performance_csv(
    path: &Path,
    columns: &PerformanceColumns,
) -> Result<Vec<RegistrationRecord>> {
    read_registrations(open(path)?, columns, &path.display().to_string())
}

/// Reads registrations from any reader. Blank grade or CGPA cells become
/// `None`; anything else that does not parse is an error.
pub fn read_registrations<R: Read>(
    rdr: R,
    columns: &PerformanceColumns,
    source_name: &str,
) -> Result<Vec<RegistrationRecord>> {
    let mut rdr = csv_reader(rdr);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(source_name, e))?
        .clone();
    let i_student = column_index(&headers, &columns.student_code, source_name)?;
    let i_sem = column_index(&headers, &columns.semester, source_name)?;
    let i_cgpa = column_index(&headers, &columns.preceding_cgpa, source_name)?;
    let i_course = column_index(&headers, &columns.course_number, source_name)?;
    let i_type = column_index(&headers, &columns.registration_type, source_name)?;
    let i_grade = column_index(&headers, &columns.grade, source_name)?;

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(source_name, e))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| row.get(i).unwrap_or("").trim();

        let semester: u32 = field(i_sem).parse().map_err(|_| {
            parse_error(
                source_name,
                line,
                format!("invalid semester `{}`", field(i_sem)),
            )
        })?;
        if semester == 0 {
            return Err(parse_error(source_name, line, "semester must be >= 1"));
        }

        let preceding_cgpa = match field(i_cgpa) {
            "" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| {
                    parse_error(source_name, line, format!("invalid preceding CGPA `{s}`"))
                })?;
                if !(0.0..=10.0).contains(&v) {
                    return Err(Error::CgpaRange {
                        source_name: source_name.to_string(),
                        line,
                        value: v,
                    });
                }
                Some(v)
            }
        };

        let grade = match field(i_grade) {
            "" => None,
            s => Some(s.parse::<Grade>().map_err(|value| Error::InvalidGrade {
                source_name: source_name.to_string(),
                line,
                value,
            })?),
        };

        out.push(RegistrationRecord {
            student_code: field(i_student).to_string(),
            semester,
            preceding_cgpa,
            course_number: field(i_course).to_string(),
            registration_type: field(i_type).to_string(),
            grade,
        });
    }
    Ok(out)
}

/// Writes a catalog in the format [`read_courses`] accepts. Each line of
/// `comment` is emitted as a leading `# ` comment.
pub fn write_courses<W: Write>(
    wtr: W,
    courses: &[CourseRecord],
    columns: &CatalogColumns,
    comment: Option<&str>,
) -> std::io::Result<()> {
    let mut wtr = wtr;
    write_comment(&mut wtr, comment)?;
    let mut csv = csv::Writer::from_writer(wtr);
    csv.write_record([
        &columns.course_number,
        &columns.course_name,
        &columns.syllabus,
    ])?;
    for c in courses {
        csv.write_record([&c.course_number, &c.course_name, &c.syllabus])?;
    }
    csv.flush()
}

/// Writes registrations in the format [`read_registrations`] accepts.
pub fn write_registrations<W: Write>(
    wtr: W,
    regs: &[RegistrationRecord],
    columns: &PerformanceColumns,
    comment: Option<&str>,
) -> std::io::Result<()> {
    let mut wtr = wtr;
    write_comment(&mut wtr, comment)?;
    let mut csv = csv::Writer::from_writer(wtr);
    csv.write_record([
        &columns.student_code,
        &columns.semester,
        &columns.preceding_cgpa,
        &columns.course_number,
        &columns.registration_type,
        &columns.grade,
    ])?;
    for r in regs {
        csv.write_record([
            r.student_code.as_str(),
            &r.semester.to_string(),
            &r.preceding_cgpa.map(|c| c.to_string()).unwrap_or_default(),
            &r.course_number,
            &r.registration_type,
            r.grade.map(Grade::as_str).unwrap_or(""),
        ])?;
    }
    csv.flush()
}

fn write_comment<W: Write>(wtr: &mut W, comment: Option<&str>) -> std::io::Result<()> {
    if let Some(text) = comment {
        for line in text.lines() {
            writeln!(wtr, "# {line}")?;
        }
    }
    Ok(())
}

fn courses_with_syllabus(catalog: &[CourseRecord]) -> HashSet<&str> {
    catalog
        .iter()
        .filter(|c| c.has_syllabus())
        .map(|c| c.course_number.as_str())
        .collect()
}

/// Keeps registrations that have a grade, a preceding CGPA, and a course
/// with a non-empty syllabus. A record failing several tests is counted
/// under the first failing test in that order.
pub fn filter_records(
    regs: &[RegistrationRecord],
    catalog: &[CourseRecord],
) -> (Vec<RegistrationRecord>, FilterStats) {
    let known = courses_with_syllabus(catalog);
    let mut stats = FilterStats {
        total_read: regs.len(),
        ..FilterStats::default()
    };
    let mut kept = Vec::with_capacity(regs.len());
    for r in regs {
        if r.grade.is_none() {
            stats.dropped_missing_grade += 1;
        } else if r.preceding_cgpa.is_none() {
            stats.dropped_missing_cgpa += 1;
        } else if !known.contains(r.course_number.as_str()) {
            stats.dropped_unknown_course += 1;
        } else {
            kept.push(r.clone());
        }
    }
    stats.retained = kept.len();
    (kept, stats)
}

/// Records usable as prior-course evidence: graded and resolvable to a course
/// with a syllabus. The preceding CGPA is irrelevant here, so first-semester
/// registrations qualify.
pub fn history_pool(
    regs: &[RegistrationRecord],
    catalog: &[CourseRecord],
) -> Vec<RegistrationRecord> {
    let known = courses_with_syllabus(catalog);
    regs.iter()
        .filter(|r| r.grade.is_some() && known.contains(r.course_number.as_str()))
        .cloned()
        .collect()
}

/// Looks up catalog entries by course number.
pub fn catalog_index(catalog: &[CourseRecord]) -> HashMap<&str, &CourseRecord> {
    catalog
        .iter()
        .map(|c| (c.course_number.as_str(), c))
        .collect()
}
