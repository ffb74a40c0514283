//! Plain-text and JSON network formats, and belief list parsing.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ListeningNetwork;

#[derive(Debug, Serialize, Deserialize)]
struct NetworkJson {
    n: usize,
    weights: Vec<Vec<f64>>,
}

/// One row per line, whitespace separated. Rust's float formatting is the
/// shortest exact representation, so parsing gives back identical bits.
pub fn to_text(net: &ListeningNetwork) -> String {
    let mut s = String::new();
    for i in 0..net.n() {
        let row: Vec<String> = net.row(i).iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn from_text(text: &str) -> Result<ListeningNetwork> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|e| Error::Parse(format!("{tok:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ListeningNetwork::new(rows)
}

pub fn to_json(net: &ListeningNetwork) -> String {
    serde_json::to_string(&NetworkJson { n: net.n(), weights: net.to_rows() }).expect("finite weights serialize")
}

pub fn from_json(text: &str) -> Result<ListeningNetwork> {
    let doc: NetworkJson = serde_json::from_str(text)?;
    if doc.weights.len() != doc.n {
        return Err(Error::Parse(format!("n = {} but {} rows", doc.n, doc.weights.len())));
    }
    ListeningNetwork::new(doc.weights)
}

/// Reads either format; JSON is recognised by a leading `{`.
pub fn read_network(path: impl AsRef<Path>) -> Result<ListeningNetwork> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        from_json(&text)
    } else {
        from_text(&text)
    }
}

pub fn write_network(path: impl AsRef<Path>, net: &ListeningNetwork, json: bool) -> Result<()> {
    let body = if json { to_json(net) } else { to_text(net) };
    std::fs::write(path, body)?;
    Ok(())
}

/// Parses "0.1,0.2 0.3" style belief lists.
pub fn parse_beliefs(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}
