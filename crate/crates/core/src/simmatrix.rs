//! Course-by-course similarity matrix.
//!
//! The matrix is symmetric with a unit diagonal, so only the upper triangle
//! (diagonal included) is stored, row-major. Every unordered pair is computed
//! once and mirrored on query, which keeps `s(i, j) == s(j, i)` exact.
//!
//! # File format
//!
//! All integers little-endian.
//!
//! | field      | bytes                        |
//! |------------|------------------------------|
//! | magic      | `b"CSIM"`                    |
//! | version    | `u8`, currently 1            |
//! | n          | `u64`                        |
//! | ids        | n × (`u32` length + UTF-8)   |
//! | values     | n(n+1)/2 × `f64` upper triangle |
//! | crc32      | `u32` over all prior bytes   |

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CourseRecord;
use crate::textsim::{LexicalKb, LsaModel, PreparedDoc, Preprocessor};

pub const MAGIC: &[u8; 4] = b"CSIM";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    upper: Vec<f64>,
}

fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // offset of row i = i·n − i(i−1)/2
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

impl SimilarityMatrix {
    /// Builds a matrix from ids and a packed upper triangle. Values must lie in
    /// `[0, 1]` and the diagonal must be exactly 1.
    pub fn new(ids: Vec<String>, upper: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if upper.len() != packed_len(n) {
            return Err(Error::Precondition(format!(
                "upper triangle has {} values, expected {}",
                upper.len(),
                packed_len(n)
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Precondition(format!("duplicate course id `{id}`")));
            }
        }
        let m = SimilarityMatrix { ids, index, upper };
        for i in 0..n {
            if m.get(i, i) != 1.0 {
                return Err(Error::Precondition(format!("diagonal entry {i} is not 1")));
            }
        }
        if let Some(v) = m.upper.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfRange {
                value: *v,
                range: "[0, 1]",
            });
        }
        Ok(m)
    }

    /// Builds a matrix by evaluating `f(i, j)` for every `i < j`.
    pub fn from_pair_fn(ids: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = ids.len();
        let mut upper = Vec::with_capacity(packed_len(n));
        for i in 0..n {
            upper.push(1.0);
            for j in i + 1..n {
                upper.push(f(i, j));
            }
        }
        Self::new(ids, upper)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, course: &str) -> Option<usize> {
        self.index.get(course).copied()
    }

    pub fn contains(&self, course: &str) -> bool {
        self.index.contains_key(course)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.len(), i, j)]
    }

    pub fn upper_triangle(&self) -> &[f64] {
        &self.upper
    }

    /// `s(c1, c2)` by course number.
    pub fn similarity(&self, c1: &str, c2: &str) -> Result<f64> {
        let i = self
            .index_of(c1)
            .ok_or_else(|| Error::UnknownCourse(c1.to_string()))?;
        let j = self
            .index_of(c2)
            .ok_or_else(|| Error::UnknownCourse(c2.to_string()))?;
        Ok(self.get(i, j))
    }

    /// Minimum and maximum over off-diagonal entries, `None` when `n < 2`.
    pub fn off_diagonal_range(&self) -> Option<(f64, f64)> {
        let n = self.len();
        let mut range: Option<(f64, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let v = self.get(i, j);
                range = Some(match range {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
        range
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(13 + self.upper.len() * 8 + self.ids.len() * 12);
        buf.extend_from_slice(MAGIC);
        buf.push(FORMAT_VERSION);
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for id in &self.ids {
            buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
            buf.extend_from_slice(id.as_bytes());
        }
        for v in &self.upper {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.take(1, "version")?[0];
        if version != FORMAT_VERSION {
            return Err(Error::Version(version));
        }
        let n = u64::from_le_bytes(r.array("dimension")?) as usize;
        // every id costs at least 4 bytes, every value 8
        if n > bytes.len() {
            return Err(Error::Truncated("dimension exceeds file size"));
        }
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            let len = u32::from_le_bytes(r.array("id length")?) as usize;
            let raw = r.take(len, "course id")?;
            let id =
                std::str::from_utf8(raw).map_err(|_| Error::Truncated("course id is not UTF-8"))?;
            ids.push(id.to_string());
        }
        let count = packed_len(n);
        if bytes.len().saturating_sub(r.pos) < count * 8 + 4 {
            return Err(Error::Truncated("values"));
        }
        let mut upper = Vec::with_capacity(count);
        for _ in 0..count {
            upper.push(f64::from_le_bytes(r.array("values")?));
        }
        let body_end = r.pos;
        let stored = u32::from_le_bytes(r.array("checksum")?);
        if r.pos != bytes.len() {
            return Err(Error::Truncated("trailing bytes after checksum"));
        }
        let computed = crc32fast::hash(&bytes[..body_end]);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        SimilarityMatrix::new(ids, upper)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Dense CSV: a header of course ids, then one row per course.
    pub fn write_csv<W: Write>(&self, wtr: W) -> std::io::Result<()> {
        let mut csv = csv::Writer::from_writer(wtr);
        let mut header = vec![String::from("course_number")];
        header.extend(self.ids.iter().cloned());
        csv.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![self.ids[i].clone()];
            row.extend((0..self.len()).map(|j| self.get(i, j).to_string()));
            csv.write_record(&row)?;
        }
        csv.flush()
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, len: usize, what: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::Truncated(what)),
        }
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N]> {
        let mut out = [0u8; N];
        out.copy_from_slice(self.take(N, what)?);
        Ok(out)
    }
}

/// Pairwise similarities before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMatrix(SimilarityMatrix);

impl RawMatrix {
    pub fn matrix(&self) -> &SimilarityMatrix {
        &self.0
    }

    pub fn into_inner(self) -> SimilarityMatrix {
        self.0
    }
}

impl From<SimilarityMatrix> for RawMatrix {
    fn from(m: SimilarityMatrix) -> Self {
        RawMatrix(m)
    }
}

/// Scores every unordered pair of catalog syllabi. Rows are evaluated in
/// parallel; each pair is written exactly once.
pub fn build_raw_matrix(
    catalog: &[CourseRecord],
    preprocessor: &Preprocessor,
    model: &LsaModel,
    kb: &LexicalKb,
) -> Result<RawMatrix> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    if let Some(c) = catalog.iter().find(|c| !c.has_syllabus()) {
        return Err(Error::Corpus(format!(
            "course `{}` has no syllabus",
            c.course_number
        )));
    }
    let docs: Vec<PreparedDoc> = catalog
        .par_iter()
        .map(|c| PreparedDoc::new(model, kb, &preprocessor.preprocess(&c.syllabus)))
        .collect();
    let n = docs.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(n - i);
            row.push(1.0);
            for j in i + 1..n {
                row.push(docs[i].similarity(&docs[j], model, kb).value());
            }
            row
        })
        .collect();
    let ids = catalog.iter().map(|c| c.course_number.clone()).collect();
    Ok(RawMatrix(SimilarityMatrix::new(ids, rows.concat())?))
}

/// Rescales off-diagonal entries by their global min and max so that they
/// span `[0, 1]`. When all off-diagonal entries are equal they become 0.
/// Matrices smaller than 2×2 are returned unchanged with a warning.
pub fn normalize(raw: RawMatrix) -> SimilarityMatrix {
    let m = raw.0;
    let Some((lo, hi)) = m.off_diagonal_range() else {
        log::warn!("similarity matrix has fewer than 2 courses; normalization skipped");
        return m;
    };
    let n = m.len();
    let span = hi - lo;
    let mut upper = m.upper.clone();
    for i in 0..n {
        for j in i..n {
            let k = packed_index(n, i, j);
            upper[k] = if i == j {
                1.0
            } else if span > 0.0 {
                ((m.upper[k] - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    SimilarityMatrix {
        ids: m.ids,
        index: m.index,
        upper,
    }
}
