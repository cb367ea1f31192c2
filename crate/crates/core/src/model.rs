//! Domain types, dataset containers and the CSV/JSON ingestion boundary.
//!
//! Entities carry opaque string ids only at the I/O boundary; everywhere
//! else they are addressed by a dense `usize` handle, their position in the
//! owning [`Dataset`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Separator for multi-valued CSV fields.
pub const LIST_SEPARATOR: char = '|';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// One catalog row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub titles: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<u32>,
    #[serde(default)]
    pub cast: Vec<String>,
    #[serde(default)]
    pub directors: Vec<String>,
}

impl Entity {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Entity {
            id: id.into(),
            titles: vec![title.into()],
            year: None,
            runtime: None,
            cast: Vec::new(),
            directors: Vec::new(),
        }
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn with_runtime(mut self, minutes: u32) -> Self {
        self.runtime = Some(minutes);
        self
    }

    pub fn with_cast<S: Into<String>>(mut self, cast: impl IntoIterator<Item = S>) -> Self {
        self.cast = cast.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_directors<S: Into<String>>(mut self, directors: impl IntoIterator<Item = S>) -> Self {
        self.directors = directors.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.titles.push(title.into());
        self
    }
}

/// An immutable collection of entities from one source.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    side: Side,
    entities: Vec<Entity>,
    handles: HashMap<String, usize>,
}

impl Dataset {
    /// Builds a dataset, enforcing unique non-empty ids and non-empty titles.
    pub fn new(name: impl Into<String>, side: Side, entities: Vec<Entity>) -> Result<Self> {
        let mut handles = HashMap::with_capacity(entities.len());
        for (row, e) in entities.iter().enumerate() {
            if e.id.is_empty() {
                return Err(Error::Field { row: row + 1, field: "id".into() });
            }
            if e.titles.is_empty() {
                return Err(Error::Field { row: row + 1, field: "titles".into() });
            }
            if handles.insert(e.id.clone(), row).is_some() {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        Ok(Dataset { name: name.into(), side, entities, handles })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity(&self, handle: usize) -> &Entity {
        &self.entities[handle]
    }

    pub fn id(&self, handle: usize) -> &str {
        &self.entities[handle].id
    }

    pub fn handle(&self, id: &str) -> Option<usize> {
        self.handles.get(id).copied()
    }

    /// Resolves an id or fails with `DanglingReference`.
    pub fn resolve(&self, id: &str) -> Result<usize> {
        self.handle(id).ok_or_else(|| Error::DanglingReference(id.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

/// Parses a dataset from CSV (`id,titles,year,runtime,cast,directors`) or a
/// JSON array of objects with the same field names.
///
/// Row numbers in `FieldError` are 1-based and count data rows only.
pub fn parse_dataset<R: Read>(
    input: R,
    format: DataFormat,
    side: Side,
    name: impl Into<String>,
) -> Result<Dataset> {
    let entities = match format {
        DataFormat::Csv => parse_csv_entities(input)?,
        DataFormat::Json => parse_json_entities(input)?,
    };
    Dataset::new(name, side, entities)
}

fn parse_csv_entities<R: Read>(input: R) -> Result<Vec<Entity>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = column("id").ok_or_else(|| Error::Schema("missing column \"id\"".into()))?;
    let titles_col =
        column("titles").ok_or_else(|| Error::Schema("missing column \"titles\"".into()))?;
    let year_col = column("year");
    let runtime_col = column("runtime");
    let cast_col = column("cast");
    let directors_col = column("directors");

    let mut entities = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let get = |col: Option<usize>| col.and_then(|c| record.get(c)).unwrap_or("");
        let id = get(Some(id_col)).to_string();
        if id.is_empty() {
            return Err(Error::Field { row, field: "id".into() });
        }
        let titles = split_list(get(Some(titles_col)));
        if titles.is_empty() {
            return Err(Error::Field { row, field: "titles".into() });
        }
        let year = parse_optional::<i32>(get(year_col), row, "year")?;
        let runtime = parse_optional::<u32>(get(runtime_col), row, "runtime")?;
        entities.push(Entity {
            id,
            titles,
            year,
            runtime,
            cast: split_list(get(cast_col)),
            directors: split_list(get(directors_col)),
        });
    }
    Ok(entities)
}

fn split_list(field: &str) -> Vec<String> {
    if field.is_empty() {
        Vec::new()
    } else {
        field.split(LIST_SEPARATOR).map(str::to_string).collect()
    }
}

fn parse_optional<T: std::str::FromStr>(raw: &str, row: usize, field: &str) -> Result<Option<T>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<T>()
        .map(Some)
        .map_err(|_| Error::Field { row, field: field.into() })
}

fn parse_json_entities<R: Read>(input: R) -> Result<Vec<Entity>> {
    let value: Value = serde_json::from_reader(input)?;
    let rows = value
        .as_array()
        .ok_or_else(|| Error::Schema("dataset JSON must be an array of objects".into()))?;
    let mut entities = Vec::with_capacity(rows.len());
    for (i, row_value) in rows.iter().enumerate() {
        let row = i + 1;
        let obj = row_value
            .as_object()
            .ok_or_else(|| Error::Schema(format!("row {row} is not an object")))?;
        let id = match obj.get("id") {
            None => return Err(Error::Schema(format!("row {row} has no \"id\""))),
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(_) => return Err(Error::Field { row, field: "id".into() }),
        };
        let titles = match obj.get("titles") {
            None => return Err(Error::Schema(format!("row {row} has no \"titles\""))),
            Some(v) => json_string_list(v, row, "titles")?,
        };
        if titles.is_empty() {
            return Err(Error::Field { row, field: "titles".into() });
        }
        let year = json_optional_int(obj.get("year"), row, "year")?
            .map(|y| i32::try_from(y).map_err(|_| Error::Field { row, field: "year".into() }))
            .transpose()?;
        let runtime = json_optional_int(obj.get("runtime"), row, "runtime")?
            .map(|r| u32::try_from(r).map_err(|_| Error::Field { row, field: "runtime".into() }))
            .transpose()?;
        let cast = match obj.get("cast") {
            None | Some(Value::Null) => Vec::new(),
            Some(v) => json_string_list(v, row, "cast")?,
        };
        let directors = match obj.get("directors") {
            None | Some(Value::Null) => Vec::new(),
            Some(v) => json_string_list(v, row, "directors")?,
        };
        entities.push(Entity { id, titles, year, runtime, cast, directors });
    }
    Ok(entities)
}

fn json_string_list(v: &Value, row: usize, field: &str) -> Result<Vec<String>> {
    let err = || Error::Field { row, field: field.into() };
    v.as_array()
        .ok_or_else(err)?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(err))
        .collect()
}

fn json_optional_int(v: Option<&Value>, row: usize, field: &str) -> Result<Option<i64>> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => n.as_i64().map(Some).ok_or_else(|| Error::Field {
            row,
            field: field.into(),
        }),
        Some(_) => Err(Error::Field { row, field: field.into() }),
    }
}

/// Serializes a dataset in the same layout [`parse_dataset`] reads.
///
/// CSV cannot represent list elements containing `|`; such datasets are
/// rejected with a schema error rather than written lossily.
pub fn write_dataset<W: Write>(dataset: &Dataset, format: DataFormat, out: W) -> Result<()> {
    match format {
        DataFormat::Json => {
            serde_json::to_writer_pretty(out, dataset.entities())?;
            Ok(())
        }
        DataFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["id", "titles", "year", "runtime", "cast", "directors"])?;
            for e in dataset.entities() {
                let year = e.year.map(|y| y.to_string()).unwrap_or_default();
                let runtime = e.runtime.map(|r| r.to_string()).unwrap_or_default();
                w.write_record([
                    e.id.as_str(),
                    &join_list(&e.titles)?,
                    &year,
                    &runtime,
                    &join_list(&e.cast)?,
                    &join_list(&e.directors)?,
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn join_list(items: &[String]) -> Result<String> {
    if let Some(bad) = items.iter().find(|s| s.contains(LIST_SEPARATOR)) {
        return Err(Error::Schema(format!("value {bad:?} contains the list separator")));
    }
    Ok(items.join(&LIST_SEPARATOR.to_string()))
}

/// Which pairs count as known non-matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Negatives {
    /// Only the listed pairs.
    Explicit(BTreeSet<(usize, usize)>),
    /// Every pair that is not a positive (complete ground truth).
    Complement,
}

/// Labeled positive and negative pairs, addressed by entity handles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthSet {
    positives: BTreeSet<(usize, usize)>,
    negatives: Negatives,
    left_len: usize,
    right_len: usize,
}

impl TruthSet {
    pub fn new(
        left_len: usize,
        right_len: usize,
        positives: BTreeSet<(usize, usize)>,
        negatives: Negatives,
    ) -> Result<Self> {
        let check = |&(l, r): &(usize, usize)| {
            if l >= left_len {
                Err(Error::DanglingReference(format!("left handle {l}")))
            } else if r >= right_len {
                Err(Error::DanglingReference(format!("right handle {r}")))
            } else {
                Ok(())
            }
        };
        positives.iter().try_for_each(check)?;
        if let Negatives::Explicit(neg) = &negatives {
            neg.iter().try_for_each(check)?;
            if let Some(&(l, r)) = positives.intersection(neg).next() {
                return Err(Error::ConflictingLabel(l.to_string(), r.to_string()));
            }
        }
        Ok(TruthSet { positives, negatives, left_len, right_len })
    }

    /// Truth in which every unlisted pair is a known non-match.
    pub fn complete(left_len: usize, right_len: usize, positives: BTreeSet<(usize, usize)>) -> Result<Self> {
        Self::new(left_len, right_len, positives, Negatives::Complement)
    }

    pub fn positives(&self) -> &BTreeSet<(usize, usize)> {
        &self.positives
    }

    pub fn negatives(&self) -> &Negatives {
        &self.negatives
    }

    pub fn is_positive(&self, left: usize, right: usize) -> bool {
        self.positives.contains(&(left, right))
    }

    pub fn is_negative(&self, left: usize, right: usize) -> bool {
        match &self.negatives {
            Negatives::Explicit(set) => set.contains(&(left, right)),
            Negatives::Complement => {
                left < self.left_len && right < self.right_len && !self.is_positive(left, right)
            }
        }
    }

    pub fn left_len(&self) -> usize {
        self.left_len
    }

    pub fn right_len(&self) -> usize {
        self.right_len
    }

    /// Labeled pairs in handle order; for complete truth only positives and
    /// the supplied extra pairs can be enumerated.
    pub fn explicit_pairs(&self) -> impl Iterator<Item = ((usize, usize), bool)> + '_ {
        let negs: Box<dyn Iterator<Item = &(usize, usize)>> = match &self.negatives {
            Negatives::Explicit(set) => Box::new(set.iter()),
            Negatives::Complement => Box::new(std::iter::empty()),
        };
        self.positives.iter().map(|&p| (p, true)).chain(negs.map(|&p| (p, false)))
    }
}

/// Wildcard id used in truth CSV to declare complete ground truth: a row
/// `*,*,-` marks every pair not labeled positive as a known negative.
pub const TRUTH_WILDCARD: &str = "*";

/// Parses a truth-set CSV with columns `id1,id2,label`, label one of
/// `+`, `-`, `1`, `0`.
pub fn parse_truth_set<R: Read>(input: R, left: &Dataset, right: &Dataset) -> Result<TruthSet> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let (c1, c2, cl) = (column("id1")?, column("id2")?, column("label")?);

    let mut labels: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let mut complete = false;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let id1 = record.get(c1).unwrap_or("").trim();
        let id2 = record.get(c2).unwrap_or("").trim();
        let label = match record.get(cl).unwrap_or("").trim() {
            "+" | "1" => true,
            "-" | "0" => false,
            _ => return Err(Error::Field { row, field: "label".into() }),
        };
        if id1 == TRUTH_WILDCARD && id2 == TRUTH_WILDCARD && !label {
            complete = true;
            continue;
        }
        let pair = (left.resolve(id1)?, right.resolve(id2)?);
        if let Some(prev) = labels.insert(pair, label) {
            if prev != label {
                return Err(Error::ConflictingLabel(id1.to_string(), id2.to_string()));
            }
        }
    }
    let positives: BTreeSet<_> = labels.iter().filter(|(_, &l)| l).map(|(&p, _)| p).collect();
    let negatives = if complete {
        Negatives::Complement
    } else {
        Negatives::Explicit(labels.iter().filter(|(_, &l)| !l).map(|(&p, _)| p).collect())
    };
    TruthSet::new(left.len(), right.len(), positives, negatives)
}

pub fn write_truth_set<W: Write>(truth: &TruthSet, left: &Dataset, right: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id1", "id2", "label"])?;
    for ((l, r), positive) in truth.explicit_pairs() {
        w.write_record([left.id(l), right.id(r), if positive { "+" } else { "-" }])?;
    }
    if truth.negatives == Negatives::Complement {
        w.write_record([TRUTH_WILDCARD, TRUTH_WILDCARD, "-"])?;
    }
    w.flush()?;
    Ok(())
}

/// One resolved pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub left: usize,
    pub right: usize,
    pub score: f64,
}

/// A retrieved resolution. Pairs are kept sorted by `(left, right)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pairs: Vec<MatchedPair>,
    constrained: bool,
}

impl Matching {
    pub fn new(mut pairs: Vec<MatchedPair>, constrained: bool) -> Self {
        pairs.sort_by_key(|p| (p.left, p.right));
        pairs.dedup_by_key(|p| (p.left, p.right));
        Matching { pairs, constrained }
    }

    pub fn pairs(&self) -> &[MatchedPair] {
        &self.pairs
    }

    /// Whether the producing algorithm promises one-to-one output.
    pub fn is_constrained(&self) -> bool {
        self.constrained
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, left: usize, right: usize) -> bool {
        self.pairs.binary_search_by_key(&(left, right), |p| (p.left, p.right)).is_ok()
    }

    /// Total score, summed in `(left, right)` order.
    pub fn weight(&self) -> f64 {
        self.pairs.iter().map(|p| p.score).sum()
    }

    pub fn handle_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|p| (p.left, p.right))
    }

    /// Whether every pair here is also in `other`.
    pub fn is_subset_of(&self, other: &Matching) -> bool {
        self.pairs.iter().all(|p| other.contains(p.left, p.right))
    }
}

/// An id that appears more than once in a constrained matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub side: Side,
    pub handle: usize,
    pub partners: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} handle {} matched {} times (partners {:?})", self.side, self.handle, self.partners.len(), self.partners)
    }
}

/// Reports every entity matched more than once. Unconstrained matchings
/// never violate anything.
pub fn validate_matching(m: &Matching) -> Vec<Violation> {
    if !m.is_constrained() {
        return Vec::new();
    }
    let mut by_left: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut by_right: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in m.pairs() {
        by_left.entry(p.left).or_default().push(p.right);
        by_right.entry(p.right).or_default().push(p.left);
    }
    let collect = |side, map: BTreeMap<usize, Vec<usize>>| {
        map.into_iter()
            .filter(|(_, partners)| partners.len() > 1)
            .map(move |(handle, partners)| Violation { side, handle, partners })
    };
    collect(Side::Left, by_left).chain(collect(Side::Right, by_right)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_dataset(text: &str) -> Result<Dataset> {
        parse_dataset(text.as_bytes(), DataFormat::Csv, Side::Left, "t")
    }

    #[test]
    fn minimal_json_row() {
        let d = parse_dataset(
            r#"[{"id":"tt1","titles":["Avatar"],"year":2009}]"#.as_bytes(),
            DataFormat::Json,
            Side::Left,
            "imdb",
        )
        .unwrap();
        assert_eq!(d.len(), 1);
        let e = d.entity(0);
        assert_eq!(e.year, Some(2009));
        assert_eq!(e.runtime, None);
        assert!(e.cast.is_empty());
        assert_eq!(d.handle("tt1"), Some(0));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = csv_dataset("id,titles\ntt1,A\ntt1,B\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "tt1"), "{err:?}");
        assert_eq!(err.code(), "model:DuplicateId");
    }

    #[test]
    fn unparseable_year_reports_row_and_field() {
        let err = csv_dataset("id,titles,year\na,A,1990\nb,B,\nc,C,199x\n").unwrap_err();
        match err {
            Error::Field { row, field } => {
                assert_eq!(row, 3);
                assert_eq!(field, "year");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_columns_are_schema_errors() {
        assert!(matches!(csv_dataset("titles,year\nA,1990\n"), Err(Error::Schema(_))));
        assert!(matches!(csv_dataset("id,year\na,1990\n"), Err(Error::Schema(_))));
        let json = r#"[{"id":"a"}]"#;
        assert!(matches!(
            parse_dataset(json.as_bytes(), DataFormat::Json, Side::Left, "j"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn csv_lists_and_absent_fields() {
        let d = csv_dataset(
            "id,titles,year,runtime,cast,directors,extra\n\
             a,Se7en|Seven,1995,127,Brad Pitt|Morgan Freeman,David Fincher,zzz\n\
             b,Heat,,,,,\n",
        )
        .unwrap();
        let a = d.entity(0);
        assert_eq!(a.titles, vec!["Se7en", "Seven"]);
        assert_eq!(a.cast.len(), 2);
        assert_eq!(a.runtime, Some(127));
        let b = d.entity(1);
        assert_eq!((b.year, b.runtime), (None, None));
        assert!(b.cast.is_empty() && b.directors.is_empty());
    }

    #[test]
    fn negative_runtime_is_a_field_error() {
        let json = r#"[{"id":"a","titles":["A"],"runtime":-5}]"#;
        let err = parse_dataset(json.as_bytes(), DataFormat::Json, Side::Left, "j").unwrap_err();
        assert!(matches!(err, Error::Field { row: 1, ref field } if field == "runtime"));
        assert!(matches!(csv_dataset("id,titles,runtime\na,A,-5\n"), Err(Error::Field { .. })));
    }

    #[test]
    fn empty_titles_rejected() {
        assert!(matches!(csv_dataset("id,titles\na,\n"), Err(Error::Field { row: 1, .. })));
    }

    fn pair_datasets() -> (Dataset, Dataset) {
        let left = Dataset::new(
            "l",
            Side::Left,
            vec![Entity::new("a1", "A"), Entity::new("a2", "B")],
        )
        .unwrap();
        let right = Dataset::new(
            "r",
            Side::Right,
            vec![Entity::new("b1", "A"), Entity::new("b2", "B")],
        )
        .unwrap();
        (left, right)
    }

    #[test]
    fn truth_labels_map_to_sets() {
        let (l, r) = pair_datasets();
        let t = parse_truth_set("id1,id2,label\na1,b1,+\na2,b2,-\n".as_bytes(), &l, &r).unwrap();
        assert_eq!(t.positives().iter().copied().collect::<Vec<_>>(), vec![(0, 0)]);
        assert!(t.is_negative(1, 1));
        assert!(!t.is_negative(0, 1));
        let t = parse_truth_set("id1,id2,label\na1,b1,1\na2,b2,0\n".as_bytes(), &l, &r).unwrap();
        assert!(t.is_positive(0, 0) && t.is_negative(1, 1));
    }

    #[test]
    fn truth_dangling_and_conflicting() {
        let (l, r) = pair_datasets();
        let err = parse_truth_set("id1,id2,label\nzz,b1,+\n".as_bytes(), &l, &r).unwrap_err();
        assert!(matches!(err, Error::DanglingReference(ref id) if id == "zz"));
        let err = parse_truth_set("id1,id2,label\na1,b1,+\na1,b1,-\n".as_bytes(), &l, &r).unwrap_err();
        assert!(matches!(err, Error::ConflictingLabel(..)));
    }

    #[test]
    fn complete_truth_round_trips_through_wildcard_row() {
        let (l, r) = pair_datasets();
        let t = TruthSet::complete(2, 2, [(0, 0), (1, 1)].into_iter().collect()).unwrap();
        assert!(t.is_negative(0, 1) && !t.is_negative(0, 0));
        let mut buf = Vec::new();
        write_truth_set(&t, &l, &r, &mut buf).unwrap();
        let back = parse_truth_set(buf.as_slice(), &l, &r).unwrap();
        assert_eq!(back, t);
    }

    fn mp(left: usize, right: usize) -> MatchedPair {
        MatchedPair { left, right, score: 0.9 }
    }

    #[test]
    fn validate_constrained_matchings() {
        assert!(validate_matching(&Matching::new(vec![mp(0, 0), mp(1, 1)], true)).is_empty());
        let v = validate_matching(&Matching::new(vec![mp(0, 0), mp(0, 1)], true));
        assert_eq!(v, vec![Violation { side: Side::Left, handle: 0, partners: vec![0, 1] }]);
        assert!(validate_matching(&Matching::new(vec![mp(0, 0), mp(0, 1)], false)).is_empty());
    }
}
