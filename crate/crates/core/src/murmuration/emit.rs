//! Text outputs for a murmuration series: CSV (`i,p,value,count`), JSON
//! and an SVG scatter plot.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use super::{MurmurationSeries, SeriesPoint, XAxis};
use crate::fmt::sig12;
use crate::{svg, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(Error::Domain(format!("unknown output format `{other}` (csv, json, svg)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

pub fn write_csv<W: Write>(series: &MurmurationSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "p", "value", "count"])?;
    for pt in &series.points {
        w.write_record([pt.i.to_string(), pt.p.to_string(), sig12(pt.value), pt.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct Row {
    i: usize,
    p: u64,
    value: f64,
    count: usize,
}

/// Reads back the points of a CSV written by [`write_csv`].
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<SeriesPoint>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["i", "p", "value", "count"] {
        return Err(Error::Schema(format!("expected header i,p,value,count, got {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    r.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(SeriesPoint {
                i: row.i,
                p: row.p,
                value: row.value,
                count: row.count,
            })
        })
        .collect()
}

fn round12(v: f64) -> f64 {
    sig12(v).parse().unwrap_or(v)
}

pub fn write_json<W: Write>(series: &MurmurationSeries, writer: W) -> Result<()> {
    let mut rounded = series.clone();
    for pt in &mut rounded.points {
        pt.value = round12(pt.value);
    }
    serde_json::to_writer_pretty(writer, &rounded)?;
    Ok(())
}

pub fn write_svg<W: Write>(series: &MurmurationSeries, axis: XAxis, mut writer: W) -> Result<()> {
    let pts: Vec<(f64, f64)> = series
        .points
        .iter()
        .map(|pt| {
            let x = match axis {
                XAxis::Index => pt.i as f64,
                XAxis::Prime => pt.p as f64,
            };
            (x, pt.value)
        })
        .collect();
    let title = match &series.filter {
        Some(f) => format!("rank-{} murmuration, {f}", series.n),
        None => format!("rank-{} murmuration", series.n),
    };
    let x_label = match axis {
        XAxis::Index => "prime index i",
        XAxis::Prime => "prime p",
    };
    let doc = svg::scatter(&pts, &title, x_label, &format!("f(i), n = {}", series.n));
    writer.write_all(doc.as_bytes())?;
    Ok(())
}

/// Writes the series to `path` in the chosen format.
pub fn emit_series(series: &MurmurationSeries, format: OutputFormat, axis: XAxis, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_csv(series, &mut out)?,
        OutputFormat::Json => write_json(series, &mut out)?,
        OutputFormat::Svg => write_svg(series, axis, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::BadPrimePolicy;

    fn series() -> MurmurationSeries {
        MurmurationSeries {
            n: 1,
            filter: None,
            policy: BadPrimePolicy::Skip,
            family_size: 2,
            points: vec![
                SeriesPoint { i: 1, p: 2, value: -2.0, count: 1 },
                SeriesPoint { i: 2, p: 3, value: 1.0 / 3.0, count: 2 },
                SeriesPoint { i: 3, p: 5, value: std::f64::consts::PI, count: 2 },
            ],
            empty_indices: vec![],
        }
    }

    #[test]
    fn csv_shape_and_round_trip() {
        let mut buf = Vec::new();
        write_csv(&series(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next(), Some("i,p,value,count"));

        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in back.iter().zip(&series().points) {
            assert_eq!(a.value, round12(b.value));
            assert_eq!((a.i, a.p, a.count), (b.i, b.p, b.count));
        }
        // re-emitting parsed values is byte-identical
        let mut again = series();
        again.points = back;
        let mut buf2 = Vec::new();
        write_csv(&again, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn svg_has_one_marker_per_point() {
        let mut buf = Vec::new();
        write_svg(&series(), XAxis::Index, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        let markers = doc
            .descendants()
            .filter(|n| n.has_tag_name("circle") && n.attribute("class") == Some("marker"))
            .count();
        assert_eq!(markers, 3);
    }

    #[test]
    fn json_values_rounded() {
        let mut buf = Vec::new();
        write_json(&series(), &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["points"][2]["value"].as_f64(), Some("3.14159265359".parse::<f64>().unwrap()));
        assert_eq!(v["n"], 1);
    }

    #[test]
    fn format_parse() {
        assert_eq!("SVG".parse::<OutputFormat>().unwrap(), OutputFormat::Svg);
        assert!("png".parse::<OutputFormat>().is_err());
    }
}
