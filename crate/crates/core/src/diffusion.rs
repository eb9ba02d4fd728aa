//! Continuous-time independent cascade networks.
//!
//! Each product spreads over its own directed network whose edges carry a
//! transmission-time distribution. A cascade draws one delay per edge and
//! infects every node at its earliest arrival time from the source set; only
//! nodes reached within the observation horizon are reported as infected.
//!
//! # Network file format
//!
//! Plain text, whitespace-delimited, one record per line. Blank lines and
//! lines starting with `#` are ignored. The first record is the header
//!
//! ```text
//! nodes <N> product <P>
//! ```
//!
//! followed by one edge per line:
//!
//! ```text
//! <src> <dst> exp <rate>
//! <src> <dst> weibull <shape> <scale>
//! <src> <dst> det <delay>
//! ```
//!
//! Node ids are integers in `[0, N)`. Self-loops and repeated `(src, dst)`
//! pairs are rejected.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-edge transmission-time distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransmissionFunction {
    /// Exponential delay with the given rate (1 / time unit).
    Exponential { rate: f64 },
    /// Weibull delay with CDF `1 - exp(-(t / scale)^shape)`.
    Weibull { shape: f64, scale: f64 },
    /// A fixed delay.
    Deterministic { delay: f64 },
}

impl TransmissionFunction {
    pub fn exponential(rate: f64) -> Result<Self> {
        let tf = TransmissionFunction::Exponential { rate };
        tf.validate()?;
        Ok(tf)
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        let tf = TransmissionFunction::Weibull { shape, scale };
        tf.validate()?;
        Ok(tf)
    }

    pub fn deterministic(delay: f64) -> Result<Self> {
        let tf = TransmissionFunction::Deterministic { delay };
        tf.validate()?;
        Ok(tf)
    }

    /// Checks parameter ranges: rates, shapes and scales must be finite and
    /// strictly positive; a fixed delay must be finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidTransmission(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            TransmissionFunction::Exponential { rate } => positive("rate", rate),
            TransmissionFunction::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            TransmissionFunction::Deterministic { delay } => {
                if delay.is_finite() && delay >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidTransmission(format!(
                        "delay must be non-negative and finite, got {delay}"
                    )))
                }
            }
        }
    }

    /// Draws one delay by inverse-CDF transform of a single uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            TransmissionFunction::Deterministic { delay } => delay,
            TransmissionFunction::Exponential { rate } => {
                let u: f64 = rng.random();
                // 1 - u lies in (0, 1], so the log is finite and non-positive.
                -(1.0 - u).ln() / rate
            }
            TransmissionFunction::Weibull { shape, scale } => {
                let u: f64 = rng.random();
                scale * (-(1.0 - u).ln()).powf(1.0 / shape)
            }
        }
    }

    /// Analytic mean of the distribution.
    pub fn mean(&self) -> f64 {
        match *self {
            TransmissionFunction::Deterministic { delay } => delay,
            TransmissionFunction::Exponential { rate } => 1.0 / rate,
            TransmissionFunction::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
        }
    }
}

/// Draws one delay from `tf`.
pub fn sample_delay<R: Rng + ?Sized>(tf: &TransmissionFunction, rng: &mut R) -> f64 {
    tf.sample(rng)
}

// Lanczos approximation, g = 7, n = 9.
fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = COEF[0];
        let t = x + G + 0.5;
        for (i, c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// A directed edge with its transmission function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub tf: TransmissionFunction,
}

/// The diffusion network of one product.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionNetwork {
    node_count: usize,
    product: usize,
    edges: Vec<Edge>,
    // CSR over out-edges: edge ids of node u are out_edges[offsets[u]..offsets[u + 1]].
    offsets: Vec<usize>,
    out_edges: Vec<usize>,
}

impl DiffusionNetwork {
    /// Builds a network, rejecting out-of-range ids, self-loops, duplicate
    /// directed edges and invalid transmission parameters.
    pub fn new(node_count: usize, product: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.src >= node_count || e.dst >= node_count {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({}, {}) references a node outside [0, {node_count})",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::InvalidNetwork(format!("self-loop on node {}", e.src)));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({}, {})", e.src, e.dst)));
            }
            e.tf.validate()?;
        }

        let mut offsets = vec![0usize; node_count + 1];
        for e in &edges {
            offsets[e.src + 1] += 1;
        }
        for u in 0..node_count {
            offsets[u + 1] += offsets[u];
        }
        let mut fill = offsets.clone();
        let mut out_edges = vec![0usize; edges.len()];
        for (id, e) in edges.iter().enumerate() {
            out_edges[fill[e.src]] = id;
            fill[e.src] += 1;
        }

        Ok(DiffusionNetwork { node_count, product, edges, offsets, out_edges })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn product(&self) -> usize {
        self.product
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Edge ids leaving `node`.
    pub fn out_edge_ids(&self, node: usize) -> &[usize] {
        &self.out_edges[self.offsets[node]..self.offsets[node + 1]]
    }

    /// Draws one delay per edge, in edge order.
    pub fn sample_delays<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.edges.iter().map(|e| e.tf.sample(rng)).collect()
    }

    fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        match nodes.iter().find(|&&v| v >= self.node_count) {
            Some(v) => Err(Error::InvalidNetwork(format!(
                "source {v} outside [0, {})",
                self.node_count
            ))),
            None => Ok(()),
        }
    }

    /// Parses the plain-text edge-list format described in the module docs.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            let err = |msg: String| Error::NetworkFormat { line: lineno, msg };
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("expected an integer, got `{s}`")));
            let real = |s: &str| s.parse::<f64>().map_err(|_| err(format!("expected a number, got `{s}`")));

            if header.is_none() {
                if fields.len() != 4 || fields[0] != "nodes" || fields[2] != "product" {
                    return Err(err("expected header `nodes N product P`".into()));
                }
                header = Some((int(fields[1])?, int(fields[3])?));
                continue;
            }

            if fields.len() < 4 {
                return Err(err("expected `src dst kind p1 [p2]`".into()));
            }
            let (src, dst) = (int(fields[0])?, int(fields[1])?);
            let tf = match (fields[2], fields.len()) {
                ("exp", 4) => TransmissionFunction::Exponential { rate: real(fields[3])? },
                ("det", 4) => TransmissionFunction::Deterministic { delay: real(fields[3])? },
                ("weibull", 5) => TransmissionFunction::Weibull {
                    shape: real(fields[3])?,
                    scale: real(fields[4])?,
                },
                (kind @ ("exp" | "det" | "weibull"), n) => {
                    return Err(err(format!("wrong parameter count {} for `{kind}`", n - 3)))
                }
                (kind, _) => return Err(err(format!("unknown transmission kind `{kind}`"))),
            };
            tf.validate().map_err(|e| err(e.to_string()))?;
            edges.push(Edge { src, dst, tf });
        }
        let (nodes, product) = header.ok_or(Error::NetworkFormat { line: 0, msg: "missing header".into() })?;
        DiffusionNetwork::new(nodes, product, edges)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        DiffusionNetwork::from_reader(std::fs::File::open(path)?)
    }

    /// Renders the network in the edge-list format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {} product {}", self.node_count, self.product);
        for e in &self.edges {
            let _ = match e.tf {
                TransmissionFunction::Exponential { rate } => writeln!(out, "{} {} exp {}", e.src, e.dst, rate),
                TransmissionFunction::Weibull { shape, scale } => {
                    writeln!(out, "{} {} weibull {} {}", e.src, e.dst, shape, scale)
                }
                TransmissionFunction::Deterministic { delay } => writeln!(out, "{} {} det {}", e.src, e.dst, delay),
            };
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Infection times of one cascade. Nodes not reached within the horizon carry
/// `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    pub infection_time: Vec<f64>,
}

impl CascadeOutcome {
    /// Nodes infected within the horizon, ascending.
    pub fn infected(&self) -> Vec<usize> {
        self.infection_time
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_finite())
            .map(|(v, _)| v)
            .collect()
    }

    pub fn infected_count(&self) -> usize {
        self.infection_time.iter().filter(|t| t.is_finite()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    time: f64,
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we pop the earliest arrival.
        other.time.total_cmp(&self.time).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable buffers for truncated earliest-arrival searches.
#[derive(Debug, Default)]
pub struct ArrivalScratch {
    time: Vec<f64>,
    done: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<Label>,
}

impl ArrivalScratch {
    pub fn new(node_count: usize) -> Self {
        ArrivalScratch {
            time: vec![f64::INFINITY; node_count],
            done: vec![false; node_count],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self, node_count: usize) {
        if self.time.len() != node_count {
            *self = ArrivalScratch::new(node_count);
            return;
        }
        for &v in &self.touched {
            self.time[v] = f64::INFINITY;
            self.done[v] = false;
        }
        self.touched.clear();
        self.heap.clear();
    }

    /// Multi-source Dijkstra over `delays`, never settling labels beyond
    /// `horizon`. Settled nodes are pushed onto `self.touched` in arrival order.
    fn run(&mut self, net: &DiffusionNetwork, sources: &[usize], delays: &[f64], horizon: f64) {
        self.reset(net.node_count());
        for &s in sources {
            if self.time[s] > 0.0 {
                if self.time[s].is_infinite() {
                    self.touched.push(s);
                }
                self.time[s] = 0.0;
                self.heap.push(Label { time: 0.0, node: s });
            }
        }
        let mut settled = 0;
        while let Some(Label { time, node }) = self.heap.pop() {
            if self.done[node] || time > self.time[node] {
                continue;
            }
            self.done[node] = true;
            settled += 1;
            for &eid in net.out_edge_ids(node) {
                let next = time + delays[eid];
                let dst = net.edges[eid].dst;
                if next <= horizon && next < self.time[dst] {
                    if self.time[dst].is_infinite() {
                        self.touched.push(dst);
                    }
                    self.time[dst] = next;
                    self.heap.push(Label { time: next, node: dst });
                }
            }
        }
        debug_assert_eq!(settled, self.touched.len());
    }

    /// Sorted ids of nodes whose earliest arrival from `source` is within `horizon`.
    pub fn reach_within(
        &mut self,
        net: &DiffusionNetwork,
        source: usize,
        delays: &[f64],
        horizon: f64,
    ) -> Vec<u32> {
        self.run(net, std::slice::from_ref(&source), delays, horizon);
        let mut reach: Vec<u32> = self.touched.iter().map(|&v| v as u32).collect();
        reach.sort_unstable();
        reach
    }
}

/// Earliest-arrival cascade over a fixed set of per-edge delays (indexed like
/// `net.edges()`), truncated at `horizon`.
pub fn cascade_from_delays(
    net: &DiffusionNetwork,
    sources: &[usize],
    delays: &[f64],
    horizon: f64,
) -> Result<CascadeOutcome> {
    net.check_nodes(sources)?;
    if delays.len() != net.edge_count() {
        return Err(Error::InvalidNetwork(format!(
            "expected {} delays, got {}",
            net.edge_count(),
            delays.len()
        )));
    }
    if !(horizon >= 0.0) {
        return Err(Error::InvalidNetwork(format!("horizon must be non-negative, got {horizon}")));
    }
    let mut scratch = ArrivalScratch::new(net.node_count());
    scratch.run(net, sources, delays, horizon);
    Ok(CascadeOutcome { infection_time: scratch.time })
}

/// Samples one cascade: one delay per edge, then earliest arrival from
/// `sources` truncated at `horizon`.
pub fn sample_cascade<R: Rng + ?Sized>(
    net: &DiffusionNetwork,
    sources: &[usize],
    horizon: f64,
    rng: &mut R,
) -> Result<CascadeOutcome> {
    let delays = net.sample_delays(rng);
    cascade_from_delays(net, sources, &delays, horizon)
}
