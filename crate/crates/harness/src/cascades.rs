//! Observed cascades and held-out evaluation.
//!
//! One cascade per line: `product; node:time,node:time,...` with strictly
//! increasing times. Blank lines and lines starting with `#` are skipped.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeRecord {
    pub product: usize,
    /// `(node, time)` in increasing time order.
    pub events: Vec<(usize, f64)>,
}

fn parse_line(line: usize, text: &str) -> Result<CascadeRecord> {
    let err = |msg: String| HarnessError::Cascade { line, msg };
    let (product, rest) = text.split_once(';').ok_or_else(|| err("missing `;` after product id".into()))?;
    let product = product.trim().parse().map_err(|_| err(format!("bad product id `{}`", product.trim())))?;
    let mut events: Vec<(usize, f64)> = Vec::new();
    for item in rest.split(',') {
        let item = item.trim();
        let (node, time) = item.split_once(':').ok_or_else(|| err(format!("event `{item}` is not node:time")))?;
        let node = node.trim().parse().map_err(|_| err(format!("bad node id `{}`", node.trim())))?;
        let time: f64 = time.trim().parse().map_err(|_| err(format!("bad timestamp `{}`", time.trim())))?;
        if !time.is_finite() {
            return Err(err(format!("timestamp {time} is not finite")));
        }
        if let Some(&(_, prev)) = events.last() {
            if time <= prev {
                return Err(err(format!("timestamp {time} does not increase after {prev}")));
            }
        }
        events.push((node, time));
    }
    Ok(CascadeRecord { product, events })
}

pub fn parse_cascades<R: Read>(reader: R) -> Result<Vec<CascadeRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        out.push(parse_line(i + 1, text)?);
    }
    Ok(out)
}

pub fn load_cascades(path: impl AsRef<Path>) -> Result<Vec<CascadeRecord>> {
    parse_cascades(std::fs::File::open(path)?)
}

/// Sum over allocated `(product, node)` pairs of the average number of events
/// after `node` in the product's cascades that contain it. Pairs whose node
/// appears in no cascade contribute 0.
pub fn heldout_evaluate(allocation: &[(usize, usize)], cascades: &[CascadeRecord]) -> f64 {
    // (product, node) -> (sum of later events, cascades containing node)
    let mut stats: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for c in cascades {
        let mut seen = std::collections::HashSet::new();
        for (pos, &(node, _)) in c.events.iter().enumerate() {
            if seen.insert(node) {
                let e = stats.entry((c.product, node)).or_default();
                e.0 += c.events.len() - pos - 1;
                e.1 += 1;
            }
        }
    }
    allocation
        .iter()
        .map(|key| stats.get(key).map_or(0.0, |&(later, n)| later as f64 / n as f64))
        .sum()
}
