//! File plumbing: opening inputs, atomic outputs, and the CSV layouts that
//! connect the stages.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use onematch_core::model::{parse_dataset, parse_truth_set};
use onematch_core::{DataFormat, Dataset, Error, FeatureVector, Matching, Result, Side, TruthSet};
use tempfile::NamedTempFile;

pub fn open(path: &Path) -> Result<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::FileNotFound(path.display().to_string())),
        Err(e) => Err(e.into()),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn read_dataset(path: &Path, side: Side) -> Result<Dataset> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_dataset(open(path)?, DataFormat::from_path(path), side, name)
}

pub fn read_truth(path: &Path, left: &Dataset, right: &Dataset) -> Result<TruthSet> {
    parse_truth_set(open(path)?, left, right)
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub const SCORE_HEADER: [&str; 8] = ["id1", "id2", "cast", "title", "year", "directors", "runtime", "score"];

/// One row of a score file. Features and score may each be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub id1: String,
    pub id2: String,
    pub features: Option<FeatureVector>,
    pub score: Option<f64>,
}

pub fn write_scores(w: &mut dyn Write, rows: &[ScoreRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SCORE_HEADER)?;
    for row in rows {
        let f = row.features.map(|f| f.to_array()).unwrap_or([None; 5]);
        out.write_record([
            row.id1.clone(),
            row.id2.clone(),
            fmt_opt(f[0]),
            fmt_opt(f[1]),
            fmt_opt(f[2]),
            fmt_opt(f[3]),
            fmt_opt(f[4]),
            fmt_opt(row.score),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(open(path)?);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let required = |name: &str| column(name).ok_or_else(|| Error::Schema(format!("missing column {name:?}")));
    let (c1, c2) = (required("id1")?, required("id2")?);
    let feature_cols: Vec<Option<usize>> = SCORE_HEADER[2..7].iter().map(|n| column(n)).collect();
    let has_features = feature_cols.iter().all(Option::is_some);
    let score_col = column("score");

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let cell = |c: usize, field: &str| -> Result<Option<f64>> {
            let v = record.get(c).unwrap_or("").trim();
            if v.is_empty() {
                return Ok(None);
            }
            v.parse::<f64>().map(Some).map_err(|_| Error::Field { row, field: field.into() })
        };
        let features = if has_features {
            let mut values = [None; 5];
            for (k, c) in feature_cols.iter().enumerate() {
                values[k] = cell(c.expect("checked"), SCORE_HEADER[k + 2])?;
            }
            // A row with no feature values at all carries none.
            values.iter().any(Option::is_some).then(|| FeatureVector::from_array(values))
        } else {
            None
        };
        let score = match score_col {
            Some(c) => cell(c, "score")?,
            None => None,
        };
        rows.push(ScoreRow {
            id1: record.get(c1).unwrap_or("").trim().to_string(),
            id2: record.get(c2).unwrap_or("").trim().to_string(),
            features,
            score,
        });
    }
    Ok(rows)
}

/// Maps string ids to handles, either from datasets or, without them, in
/// order of first appearance.
pub struct IdSpace {
    pub left: Vec<String>,
    pub right: Vec<String>,
    left_map: HashMap<String, usize>,
    right_map: HashMap<String, usize>,
    /// Whether unknown ids are errors (true when built from datasets).
    closed: bool,
}

impl IdSpace {
    pub fn from_datasets(left: &Dataset, right: &Dataset) -> Self {
        let ids = |d: &Dataset| d.entities().iter().map(|e| e.id.clone()).collect::<Vec<_>>();
        let (l, r) = (ids(left), ids(right));
        IdSpace {
            left_map: l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect(),
            right_map: r.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect(),
            left: l,
            right: r,
            closed: true,
        }
    }

    pub fn open() -> Self {
        IdSpace { left: Vec::new(), right: Vec::new(), left_map: HashMap::new(), right_map: HashMap::new(), closed: false }
    }

    pub fn left_handle(&mut self, id: &str) -> Result<usize> {
        Self::handle(&mut self.left, &mut self.left_map, self.closed, id)
    }

    pub fn right_handle(&mut self, id: &str) -> Result<usize> {
        Self::handle(&mut self.right, &mut self.right_map, self.closed, id)
    }

    fn handle(ids: &mut Vec<String>, map: &mut HashMap<String, usize>, closed: bool, id: &str) -> Result<usize> {
        if let Some(&h) = map.get(id) {
            return Ok(h);
        }
        if closed {
            return Err(Error::DanglingReference(id.to_string()));
        }
        ids.push(id.to_string());
        map.insert(id.to_string(), ids.len() - 1);
        Ok(ids.len() - 1)
    }
}

pub fn write_matching(w: &mut dyn Write, m: &Matching, ids: &IdSpace) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id1", "id2", "score"])?;
    for p in m.pairs() {
        out.write_record([ids.left[p.left].as_str(), ids.right[p.right].as_str(), &fmt_f64(p.score)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a matching CSV (`id1,id2[,score]`) against the given id space.
pub fn read_matching(path: &Path, ids: &mut IdSpace) -> Result<Matching> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(open(path)?);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let c1 = column("id1").ok_or_else(|| Error::Schema("missing column \"id1\"".into()))?;
    let c2 = column("id2").ok_or_else(|| Error::Schema("missing column \"id2\"".into()))?;
    let cs = column("score");
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let score = match cs.and_then(|c| record.get(c)).map(str::trim) {
            None | Some("") => 1.0,
            Some(v) => v.parse().map_err(|_| Error::Field { row: i + 1, field: "score".into() })?,
        };
        pairs.push(onematch_core::MatchedPair {
            left: ids.left_handle(record.get(c1).unwrap_or("").trim())?,
            right: ids.right_handle(record.get(c2).unwrap_or("").trim())?,
            score,
        });
    }
    Ok(Matching::new(pairs, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 0.9999999999999999, 1e-300, 0.45] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn open_id_space_assigns_in_order() {
        let mut ids = IdSpace::open();
        assert_eq!(ids.left_handle("b").unwrap(), 0);
        assert_eq!(ids.left_handle("a").unwrap(), 1);
        assert_eq!(ids.left_handle("b").unwrap(), 0);
    }
}
