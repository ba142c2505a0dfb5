//! Curve families from LMFDB-style CSV exports.
//!
//! Schema (version 1), UTF-8, integers in decimal:
//!
//! ```text
//! label,isogeny_class,a1,a2,a3,a4,a6,conductor,rank[,cm][,bad_ap_json]
//! ```
//!
//! `cm` is `true`/`false` or empty; `bad_ap_json` is a JSON object mapping
//! bad primes to their a_p, e.g. `{"37": -1}` (quoted as a CSV field). An
//! optional first line `# schema: 1` pins the version.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::ec::CurveOverQ;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

const BASE_COLUMNS: [&str; 9] = [
    "label",
    "isogeny_class",
    "a1",
    "a2",
    "a3",
    "a4",
    "a6",
    "conductor",
    "rank",
];

/// One curve of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRecord {
    pub label: String,
    pub isogeny_class: String,
    /// Model with label, conductor, rank and CM flag attached.
    pub curve: CurveOverQ,
    /// Ingested a_p at bad primes.
    pub bad_ap: BTreeMap<u64, i64>,
}

impl CurveRecord {
    pub fn conductor(&self) -> &BigInt {
        self.curve.conductor.as_ref().expect("records carry a conductor")
    }

    pub fn rank(&self) -> u32 {
        self.curve.arithmetic_rank.expect("records carry a rank")
    }
}

/// Arithmetic rank and inclusive conductor range `[N1, N2]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyFilter {
    pub rank: u32,
    pub conductor_min: u64,
    pub conductor_max: u64,
}

impl FamilyFilter {
    pub fn new(rank: u32, conductor_min: u64, conductor_max: u64) -> Result<Self> {
        if conductor_min < 1 || conductor_min > conductor_max {
            return Err(Error::Domain(format!(
                "conductor range [{conductor_min}, {conductor_max}] must satisfy 1 <= N1 <= N2"
            )));
        }
        Ok(Self {
            rank,
            conductor_min,
            conductor_max,
        })
    }

    pub fn matches(&self, rec: &CurveRecord) -> bool {
        rec.rank() == self.rank
            && *rec.conductor() >= BigInt::from(self.conductor_min)
            && *rec.conductor() <= BigInt::from(self.conductor_max)
    }
}

/// Parses a conductor range written `N1:N2`.
pub fn parse_conductor_range(s: &str) -> Result<(u64, u64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("conductor range `{s}` is not N1:N2")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u64>()
            .map_err(|e| Error::Domain(format!("conductor bound `{v}`: {e}")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

impl fmt::Display for FamilyFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank {} conductor [{}, {}]",
            self.rank, self.conductor_min, self.conductor_max
        )
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn split_schema_line(text: &str) -> Result<(&str, u64)> {
    let first = text.lines().next().unwrap_or("");
    let Some(rest) = first.trim().strip_prefix('#') else {
        return Ok((text, 0));
    };
    let Some(version) = rest.trim().strip_prefix("schema:") else {
        return Err(Error::Schema(format!("unrecognised preamble `{first}`")));
    };
    let version: u32 = version
        .trim()
        .parse()
        .map_err(|_| Error::Schema(format!("bad schema version in `{first}`")))?;
    if version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "file declares schema {version}, this build reads schema {SCHEMA_VERSION}"
        )));
    }
    let body = text.split_once('\n').map(|(_, b)| b).unwrap_or("");
    Ok((body, 1))
}

fn parse_cm(s: &str, line: u64) -> Result<Option<bool>> {
    match s.trim() {
        "" => Ok(None),
        "true" | "1" | "True" | "TRUE" => Ok(Some(true)),
        "false" | "0" | "False" | "FALSE" => Ok(Some(false)),
        other => Err(parse_err(line, format!("cm flag `{other}`"))),
    }
}

fn parse_bad_ap(s: &str, line: u64) -> Result<BTreeMap<u64, i64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(BTreeMap::new());
    }
    let raw: BTreeMap<String, i64> =
        serde_json::from_str(s).map_err(|e| parse_err(line, format!("bad_ap_json: {e}")))?;
    raw.into_iter()
        .map(|(k, v)| {
            k.parse::<u64>()
                .map(|p| (p, v))
                .map_err(|_| parse_err(line, format!("bad_ap_json key `{k}` is not a prime")))
        })
        .collect()
}

/// Reads every record of a family CSV.
pub fn read_family<R: Read>(mut reader: R) -> Result<Vec<CurveRecord>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let (body, line_offset) = split_schema_line(&text)?;

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    if headers.len() < BASE_COLUMNS.len() || headers[..BASE_COLUMNS.len()] != BASE_COLUMNS {
        return Err(Error::Schema(format!(
            "header `{}` does not start with `{}`",
            headers.join(","),
            BASE_COLUMNS.join(",")
        )));
    }
    let extra: Vec<&str> = headers[BASE_COLUMNS.len()..].iter().map(String::as_str).collect();
    let (cm_col, bad_col) = match extra.as_slice() {
        [] => (None, None),
        ["cm"] => (Some(9), None),
        ["bad_ap_json"] => (None, Some(9)),
        ["cm", "bad_ap_json"] => (Some(9), Some(10)),
        _ => {
            return Err(Error::Schema(format!(
                "unexpected optional columns `{}`",
                extra.join(",")
            )))
        }
    };

    let mut out = Vec::new();
    for row in csv.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0) + line_offset;
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0) + line_offset;
        let int = |k: usize| {
            BigInt::from_str(&row[k])
                .map_err(|_| parse_err(line, format!("{} = `{}` is not an integer", BASE_COLUMNS[k], &row[k])))
        };
        let ainvs = [int(2)?, int(3)?, int(4)?, int(5)?, int(6)?];
        let conductor = int(7)?;
        if !conductor.is_positive() {
            return Err(parse_err(line, "conductor must be positive"));
        }
        let rank: u32 = row[8]
            .parse()
            .map_err(|_| parse_err(line, format!("rank `{}`", &row[8])))?;
        let cm = match cm_col {
            Some(k) => parse_cm(&row[k], line)?,
            None => None,
        };
        let bad_ap = match bad_col {
            Some(k) => parse_bad_ap(&row[k], line)?,
            None => BTreeMap::new(),
        };
        let label = row[0].to_string();
        let mut curve = CurveOverQ::new(ainvs)
            .map_err(|_| parse_err(line, format!("curve {label} is singular")))?
            .with_label(label.clone())
            .with_conductor(conductor)
            .with_rank(rank);
        curve.cm_flag = cm;
        out.push(CurveRecord {
            label,
            isogeny_class: row[1].to_string(),
            curve,
            bad_ap,
        });
    }
    Ok(out)
}

pub fn read_family_file(path: impl AsRef<Path>) -> Result<Vec<CurveRecord>> {
    read_family(std::fs::File::open(path)?)
}

/// One representative per isogeny class: the lexicographically smallest
/// label. Representatives keep their original relative order.
pub fn dedupe(records: Vec<CurveRecord>) -> Vec<CurveRecord> {
    let mut best: HashMap<&str, &str> = HashMap::new();
    for r in &records {
        let e = best.entry(r.isogeny_class.as_str()).or_insert(r.label.as_str());
        if r.label.as_str() < *e {
            *e = r.label.as_str();
        }
    }
    let keep: Vec<bool> = records
        .iter()
        .map(|r| best[r.isogeny_class.as_str()] == r.label.as_str())
        .collect();
    let mut seen = std::collections::HashSet::new();
    records
        .into_iter()
        .zip(keep)
        .filter(|(r, k)| *k && seen.insert(r.label.clone()))
        .map(|(r, _)| r)
        .collect()
}

/// Loads a family file, keeps records matching the filter and optionally
/// dedupes isogeny classes.
pub fn load_family(path: impl AsRef<Path>, filter: &FamilyFilter, dedupe_classes: bool) -> Result<Vec<CurveRecord>> {
    let all = read_family_file(path)?;
    Ok(select(all, filter, dedupe_classes))
}

pub fn select(records: Vec<CurveRecord>, filter: &FamilyFilter, dedupe_classes: bool) -> Vec<CurveRecord> {
    let filtered: Vec<CurveRecord> = records.into_iter().filter(|r| filter.matches(r)).collect();
    if dedupe_classes {
        dedupe(filtered)
    } else {
        filtered
    }
}

/// Writes records in the schema above, with both optional columns.
pub fn write_family<W: Write>(records: &[CurveRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
    header.extend(["cm", "bad_ap_json"]);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.label.clone(), r.isogeny_class.clone()];
        row.extend(r.curve.ainvs.iter().map(|a| a.to_string()));
        row.push(r.conductor().to_string());
        row.push(r.rank().to_string());
        row.push(r.curve.cm_flag.map(|b| b.to_string()).unwrap_or_default());
        row.push(if r.bad_ap.is_empty() {
            String::new()
        } else {
            let m: BTreeMap<String, i64> = r.bad_ap.iter().map(|(p, a)| (p.to_string(), *a)).collect();
            serde_json::to_string(&m)?
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Resolves a label (exact match) within a family.
pub fn find_label<'a>(records: &'a [CurveRecord], label: &str) -> Option<&'a CurveRecord> {
    records.iter().find(|r| r.label == label)
}


#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
label,isogeny_class,a1,a2,a3,a4,a6,conductor,rank
11.a2,11.a,0,-1,1,-10,-20,11,0
11.a3,11.a,0,-1,1,0,0,11,0
37.a1,37.a,0,0,1,-1,0,37,1
";

    #[test]
    fn filters_by_rank() {
        let all = read_family(FIXTURE.as_bytes()).unwrap();
        assert_eq!(all.len(), 3);
        let f = FamilyFilter::new(0, 1, 100).unwrap();
        assert_eq!(select(all.clone(), &f, false).len(), 2);
        let f = FamilyFilter::new(1, 1, 100).unwrap();
        assert_eq!(select(all, &f, false).len(), 1);
    }

    #[test]
    fn dedupe_keeps_smallest_label() {
        let text = "\
label,isogeny_class,a1,a2,a3,a4,a6,conductor,rank
37.a1,37a,0,0,1,-1,0,37,1
37.a0,37a,0,0,1,-1,0,37,1
";
        let recs = read_family(text.as_bytes()).unwrap();
        let d = dedupe(recs);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].label, "37.a0");
    }

    #[test]
    fn optional_columns() {
        let text = "\
# schema: 1
label,isogeny_class,a1,a2,a3,a4,a6,conductor,rank,cm,bad_ap_json
37.a1,37.a,0,0,1,-1,0,37,1,false,\"{\"\"37\"\": -1}\"
";
        let recs = read_family(text.as_bytes()).unwrap();
        assert_eq!(recs[0].bad_ap.get(&37), Some(&-1));
        assert_eq!(recs[0].curve.cm_flag, Some(false));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "\
label,isogeny_class,a1,a2,a3,a4,a6,conductor,rank
11.a3,11.a,0,-1,1,0,0,11,0
bad,x,0,0,0,0,zero,1,0
";
        match read_family(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let singular = "label,isogeny_class,a1,a2,a3,a4,a6,conductor,rank\ns,s,0,0,0,0,0,1,0\n";
        assert!(matches!(read_family(singular.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            read_family("label,a1,a2\n".as_bytes()),
            Err(Error::Schema(_))
        ));
        let v2 = format!("# schema: 2\n{FIXTURE}");
        assert!(matches!(read_family(v2.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn filter_validation() {
        assert!(FamilyFilter::new(0, 0, 10).is_err());
        assert!(FamilyFilter::new(0, 10, 5).is_err());
        assert_eq!(parse_conductor_range("7500:10000").unwrap(), (7500, 10000));
        assert!(parse_conductor_range("7500").is_err());
    }
}
