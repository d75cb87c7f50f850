use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kcover::Edge;

/// A parsed or generated input stream.
#[derive(Debug, Clone, PartialEq)]
pub enum Stream {
    Bits(Vec<u8>),
    Edges(Vec<Edge>),
    Points(Vec<Point>),
}

impl Stream {
    pub fn len(&self) -> usize {
        match self {
            Stream::Bits(v) => v.len(),
            Stream::Edges(v) => v.len(),
            Stream::Points(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One record per line in the file format of the stream kind.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match self {
            Stream::Bits(v) => v.iter().for_each(|b| writeln!(out, "{b}").expect("string write")),
            Stream::Edges(v) => v.iter().for_each(|e| writeln!(out, "{}\t{}", e.set_id, e.elem_id).expect("string write")),
            Stream::Points(v) => v.iter().for_each(|p| {
                let coords: Vec<String> = p.coords().iter().map(i64::to_string).collect();
                writeln!(out, "{}", coords.join(",")).expect("string write")
            }),
        }
        out
    }
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

pub fn parse_bits(text: &str) -> Result<Vec<u8>> {
    records(text)
        .map(|(line, rec)| match rec {
            "0" => Ok(0),
            "1" => Ok(1),
            _ => parse_err(line, format!("expected 0 or 1, got {rec:?}")),
        })
        .collect()
}

/// `set_id<TAB>elem_id` records with `set_id < n` and `elem_id < m`.
pub fn parse_edges(text: &str, n: u32, m: u32) -> Result<Vec<Edge>> {
    records(text)
        .map(|(line, rec)| {
            let fields: Vec<&str> = rec.split('\t').collect();
            let [s, e] = fields.as_slice() else {
                return parse_err(line, format!("expected set_id<TAB>elem_id, got {rec:?}"));
            };
            let (Ok(s), Ok(e)) = (s.trim().parse::<u32>(), e.trim().parse::<u32>()) else {
                return parse_err(line, format!("non-integer field in {rec:?}"));
            };
            if s >= n || e >= m {
                return parse_err(line, format!("edge ({s}, {e}) outside [0, {n}) x [0, {m})"));
            }
            Ok(Edge::new(s, e))
        })
        .collect()
}

/// `d` comma-separated integers per record, each in `[1, Δ]`.
pub fn parse_points(text: &str, d: usize, delta: i64) -> Result<Vec<Point>> {
    records(text)
        .map(|(line, rec)| {
            let coords: std::result::Result<Vec<i64>, _> = rec.split(',').map(|c| c.trim().parse::<i64>()).collect();
            let Ok(coords) = coords else {
                return parse_err(line, format!("non-integer coordinate in {rec:?}"));
            };
            let p = Point::new(coords);
            p.check_in_grid(d, delta).or_else(|e| parse_err(line, e.to_string()))?;
            Ok(p)
        })
        .collect()
}
