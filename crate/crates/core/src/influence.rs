//! Monte-Carlo influence estimation as an exact coverage function.
//!
//! A [`SampleBank`] fixes `r` independent draws of every edge delay. For each
//! sample `s` and candidate source `j`, the [`CoverageIndex`] stores the set of
//! nodes whose earliest arrival from `j` is within the horizon. The influence
//! estimate of a source set `R` is then
//!
//! ```text
//! σ̂(R) = (1/r) Σ_s |∪_{j ∈ R} reach(s, j)|
//! ```
//!
//! which is a weighted coverage function: normalized, monotone and submodular
//! with no estimation slack, because the samples never change after the
//! index is built.
//!
//! # Cache format
//!
//! [`CoverageIndex::write_cache`] emits a little-endian binary file:
//!
//! ```text
//! magic        4 bytes  "BMCI"
//! version      u8       1
//! network_hash u64
//! seed         u64
//! samples      u32      r
//! horizon      f64
//! product      u32
//! node_count   u32
//! candidates   u32 count, then count × u32 node ids
//! reach lists  r × count lists in sample-major order, each a u32 length
//!              followed by that many ascending u32 node ids
//! ```

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::diffusion::{ArrivalScratch, DiffusionNetwork};
use crate::error::{Error, Result};
use crate::seed;

/// Default number of Monte-Carlo samples per product.
pub const DEFAULT_SAMPLES: usize = 2048;

const CACHE_MAGIC: &[u8; 4] = b"BMCI";
const CACHE_VERSION: u8 = 1;

/// Stable 64-bit fingerprint of a network's text rendering.
pub fn network_hash(net: &DiffusionNetwork) -> u64 {
    let digest = Sha256::digest(net.to_text().as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// `r` independent draws of every edge delay of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBank {
    product: usize,
    samples: usize,
    edge_count: usize,
    seed: u64,
    network_hash: u64,
    delays: Vec<f64>,
}

impl SampleBank {
    pub fn product(&self) -> usize {
        self.product
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn network_hash(&self) -> u64 {
        self.network_hash
    }

    /// Edge delays of sample `s`, indexed like `net.edges()`.
    pub fn delays(&self, s: usize) -> &[f64] {
        &self.delays[s * self.edge_count..(s + 1) * self.edge_count]
    }
}

/// Draws `r` full sets of edge delays. Sample `s` uses its own stream derived
/// from `seed`, so the bank is identical whether built serially or in parallel.
pub fn build_sample_bank(net: &DiffusionNetwork, r: usize, seed: u64) -> Result<SampleBank> {
    if r == 0 {
        return Err(Error::ZeroSamples);
    }
    let per_sample: Vec<Vec<f64>> = (0..r)
        .into_par_iter()
        .map(|s| net.sample_delays(&mut seed::stream(seed, "sample-bank", s as u64)))
        .collect();
    Ok(SampleBank {
        product: net.product(),
        samples: r,
        edge_count: net.edge_count(),
        seed,
        network_hash: network_hash(net),
        delays: per_sample.concat(),
    })
}

/// Per-sample, per-candidate reach sets within a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageIndex {
    product: usize,
    horizon: f64,
    node_count: usize,
    samples: usize,
    seed: u64,
    network_hash: u64,
    candidates: Vec<usize>,
    position: HashMap<usize, usize>,
    // reach[s * candidates.len() + c], ascending node ids
    reach: Vec<Vec<u32>>,
}

/// Builds the coverage index of `candidates` over the samples in `bank`.
pub fn build_coverage_index(
    bank: &SampleBank,
    net: &DiffusionNetwork,
    candidates: &[usize],
    horizon: f64,
) -> Result<CoverageIndex> {
    if bank.edge_count != net.edge_count() || bank.network_hash != network_hash(net) {
        return Err(Error::InvalidNetwork("sample bank was drawn from a different network".into()));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidNetwork(format!("horizon must be finite and non-negative, got {horizon}")));
    }
    let position = candidate_positions(candidates, net.node_count())?;

    let c = candidates.len();
    let per_sample: Vec<Vec<Vec<u32>>> = (0..bank.samples)
        .into_par_iter()
        .map_init(
            || ArrivalScratch::new(net.node_count()),
            |scratch, s| {
                let delays = bank.delays(s);
                candidates.iter().map(|&j| scratch.reach_within(net, j, delays, horizon)).collect()
            },
        )
        .collect();
    let mut reach = Vec::with_capacity(bank.samples * c);
    for lists in per_sample {
        reach.extend(lists);
    }

    Ok(CoverageIndex {
        product: net.product(),
        horizon,
        node_count: net.node_count(),
        samples: bank.samples,
        seed: bank.seed,
        network_hash: bank.network_hash,
        candidates: candidates.to_vec(),
        position,
        reach,
    })
}

fn candidate_positions(candidates: &[usize], node_count: usize) -> Result<HashMap<usize, usize>> {
    let mut position = HashMap::with_capacity(candidates.len());
    for (pos, &j) in candidates.iter().enumerate() {
        if j >= node_count {
            return Err(Error::InvalidNetwork(format!("candidate {j} outside [0, {node_count})")));
        }
        if position.insert(j, pos).is_some() {
            return Err(Error::InvalidNetwork(format!("candidate {j} listed twice")));
        }
    }
    Ok(position)
}

impl CoverageIndex {
    pub fn product(&self) -> usize {
        self.product
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn network_hash(&self) -> u64 {
        self.network_hash
    }

    /// Candidate node ids, in position order.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// Position of node `node` in the candidate list.
    pub fn position_of(&self, node: usize) -> Result<usize> {
        self.position.get(&node).copied().ok_or(Error::UnknownCandidate { node })
    }

    /// Reach set of the candidate at `pos` in sample `s`.
    pub fn reach(&self, s: usize, pos: usize) -> &[u32] {
        &self.reach[s * self.candidates.len() + pos]
    }

    /// Total stored reach entries across all samples and candidates.
    pub fn stored_entries(&self) -> usize {
        self.reach.iter().map(Vec::len).sum()
    }

    fn positions_of(&self, nodes: &[usize]) -> Result<Vec<usize>> {
        nodes.iter().map(|&v| self.position_of(v)).collect()
    }

    /// Per-sample covered counts of the union of reach sets of `positions`,
    /// computed from scratch.
    pub fn sample_counts(&self, positions: &[usize]) -> Vec<u64> {
        (0..self.samples)
            .map(|s| {
                let union: BTreeSet<u32> =
                    positions.iter().flat_map(|&p| self.reach(s, p).iter().copied()).collect();
                union.len() as u64
            })
            .collect()
    }

    /// Σ_s |∪_{p} reach(s, p)| for candidate positions, from scratch.
    pub fn coverage_count(&self, positions: &[usize]) -> u64 {
        self.sample_counts(positions).iter().sum()
    }

    /// Influence estimate of the source set `sources` (node ids), computed from
    /// scratch. Returns 0 for the empty set.
    pub fn influence_value(&self, sources: &[usize]) -> Result<f64> {
        let positions = self.positions_of(sources)?;
        Ok(self.count_to_value(self.coverage_count(&positions)))
    }

    /// Mean and unbiased per-sample variance of the covered count of `sources`.
    pub fn influence_stats(&self, sources: &[usize]) -> Result<(f64, f64)> {
        let positions = self.positions_of(sources)?;
        let counts = self.sample_counts(&positions);
        let r = counts.len() as f64;
        let mean = counts.iter().sum::<u64>() as f64 / r;
        let var = if counts.len() > 1 {
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (r - 1.0)
        } else {
            0.0
        };
        Ok((mean, var))
    }

    /// Converts a summed covered count into the influence estimate.
    pub fn count_to_value(&self, count: u64) -> f64 {
        count as f64 / self.samples as f64
    }

    pub fn new_state(&self) -> CoverageState {
        CoverageState::new(self)
    }

    /// Number of newly covered (sample, node) pairs if the candidate at `pos`
    /// joined the state's source set.
    pub fn marginal_count(&self, state: &CoverageState, pos: usize) -> u64 {
        if state.contains(pos) {
            return 0;
        }
        let mut gain = 0u64;
        for s in 0..self.samples {
            let words = state.sample_words(s);
            for &v in self.reach(s, pos) {
                let v = v as usize;
                if words[v / 64] & (1u64 << (v % 64)) == 0 {
                    gain += 1;
                }
            }
        }
        gain
    }

    /// Marginal influence of the candidate at `pos` given `state`.
    pub fn marginal_gain(&self, state: &CoverageState, pos: usize) -> f64 {
        self.count_to_value(self.marginal_count(state, pos))
    }

    /// Adds the candidate at `pos` to the state. Re-adding is a no-op.
    pub fn commit(&self, state: &mut CoverageState, pos: usize) {
        if state.contains(pos) {
            return;
        }
        state.in_set[pos] = true;
        state.sources.push(pos);
        for s in 0..self.samples {
            let base = s * state.words_per_sample;
            for &v in self.reach(s, pos) {
                let v = v as usize;
                let word = &mut state.covered[base + v / 64];
                let bit = 1u64 << (v % 64);
                if *word & bit == 0 {
                    *word |= bit;
                    state.counts[s] += 1;
                    state.total += 1;
                }
            }
        }
    }

    /// Writes the binary cache described in the module docs.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 4 * (self.stored_entries() + self.reach.len()));
        buf.extend_from_slice(CACHE_MAGIC);
        buf.push(CACHE_VERSION);
        buf.extend_from_slice(&self.network_hash.to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&to_u32(self.samples)?.to_le_bytes());
        buf.extend_from_slice(&self.horizon.to_le_bytes());
        buf.extend_from_slice(&to_u32(self.product)?.to_le_bytes());
        buf.extend_from_slice(&to_u32(self.node_count)?.to_le_bytes());
        buf.extend_from_slice(&to_u32(self.candidates.len())?.to_le_bytes());
        for &j in &self.candidates {
            buf.extend_from_slice(&to_u32(j)?.to_le_bytes());
        }
        for list in &self.reach {
            buf.extend_from_slice(&to_u32(list.len())?.to_le_bytes());
            for &v in list {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a cache written by [`CoverageIndex::write_cache`].
    pub fn read_cache<R: Read>(mut r: R) -> Result<CoverageIndex> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, at: 0 };
        if cur.take(4)? != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = cur.take(1)?[0];
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let network_hash = cur.u64()?;
        let seed = cur.u64()?;
        let samples = cur.u32()? as usize;
        let horizon = f64::from_bits(cur.u64()?);
        let product = cur.u32()? as usize;
        let node_count = cur.u32()? as usize;
        let c = cur.u32()? as usize;
        let candidates = (0..c).map(|_| cur.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let position = candidate_positions(&candidates, node_count).map_err(|e| Error::Cache(e.to_string()))?;
        let mut reach = Vec::with_capacity(samples * c);
        for _ in 0..samples * c {
            let len = cur.u32()? as usize;
            let list = (0..len).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
            if list.iter().any(|&v| v as usize >= node_count) || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Cache("reach list out of range or unsorted".into()));
            }
            reach.push(list);
        }
        if cur.at != bytes.len() {
            return Err(Error::Cache("trailing bytes".into()));
        }
        if samples == 0 {
            return Err(Error::Cache("zero samples".into()));
        }
        Ok(CoverageIndex { product, horizon, node_count, samples, seed, network_hash, candidates, position, reach })
    }

    /// True when this index was built from `(net, seed, r, horizon)`.
    pub fn matches_key(&self, net: &DiffusionNetwork, seed: u64, r: usize, horizon: f64) -> bool {
        self.network_hash == network_hash(net)
            && self.seed == seed
            && self.samples == r
            && self.horizon.to_bits() == horizon.to_bits()
    }

    pub fn write_cache_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_cache(std::io::BufWriter::new(file))
    }

    pub fn read_cache_file(path: impl AsRef<Path>) -> Result<CoverageIndex> {
        CoverageIndex::read_cache(std::fs::File::open(path)?)
    }
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Cache(format!("{v} does not fit in u32")))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(Error::Cache("truncated file".into()));
        }
        let out = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Incremental evaluation state for one product: the current source set and
/// per-sample covered-node bitmaps.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageState {
    sources: Vec<usize>,
    in_set: Vec<bool>,
    words_per_sample: usize,
    covered: Vec<u64>,
    counts: Vec<u32>,
    total: u64,
}

impl CoverageState {
    pub fn new(index: &CoverageIndex) -> Self {
        let words_per_sample = index.node_count.div_ceil(64).max(1);
        CoverageState {
            sources: Vec::new(),
            in_set: vec![false; index.candidate_count()],
            words_per_sample,
            covered: vec![0; words_per_sample * index.samples],
            counts: vec![0; index.samples],
            total: 0,
        }
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.in_set[pos]
    }

    /// Candidate positions in the order they were committed.
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// Σ_s covered count.
    pub fn covered_total(&self) -> u64 {
        self.total
    }

    pub fn sample_count(&self, s: usize) -> u32 {
        self.counts[s]
    }

    fn sample_words(&self, s: usize) -> &[u64] {
        &self.covered[s * self.words_per_sample..(s + 1) * self.words_per_sample]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{Edge, TransmissionFunction};

    fn det(src: usize, dst: usize, delay: f64) -> Edge {
        Edge { src, dst, tf: TransmissionFunction::Deterministic { delay } }
    }

    fn exp(src: usize, dst: usize, rate: f64) -> Edge {
        Edge { src, dst, tf: TransmissionFunction::Exponential { rate } }
    }

    #[test]
    fn zero_samples_rejected() {
        let net = DiffusionNetwork::new(2, 0, vec![det(0, 1, 1.0)]).unwrap();
        assert!(matches!(build_sample_bank(&net, 0, 1), Err(Error::ZeroSamples)));
    }

    #[test]
    fn deterministic_bank_repeats_delay() {
        let net = DiffusionNetwork::new(2, 0, vec![det(0, 1, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 3, 5).unwrap();
        assert_eq!(bank.samples(), 3);
        for s in 0..3 {
            assert_eq!(bank.delays(s), &[1.0]);
        }
    }

    #[test]
    fn empty_edge_set_bank() {
        let net = DiffusionNetwork::new(3, 0, vec![]).unwrap();
        let bank = build_sample_bank(&net, 16, 5).unwrap();
        assert!((0..16).all(|s| bank.delays(s).is_empty()));
        let idx = build_coverage_index(&bank, &net, &[0, 2], 1.0).unwrap();
        assert_eq!(idx.influence_value(&[0, 2]).unwrap(), 2.0);
    }

    #[test]
    fn exponential_bank_matches_cdf() {
        let net = DiffusionNetwork::new(2, 0, vec![exp(0, 1, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 2048, 17).unwrap();
        let frac = (0..2048).filter(|&s| bank.delays(s)[0] <= 1.0).count() as f64 / 2048.0;
        let cdf = 1.0 - (-1.0f64).exp();
        assert!((frac - cdf).abs() <= 0.03, "fraction {frac}");
    }

    #[test]
    fn bank_is_deterministic_in_seed() {
        let net = DiffusionNetwork::new(3, 0, vec![exp(0, 1, 1.0), exp(1, 2, 2.0)]).unwrap();
        assert_eq!(build_sample_bank(&net, 64, 9).unwrap(), build_sample_bank(&net, 64, 9).unwrap());
        assert_ne!(build_sample_bank(&net, 64, 9).unwrap(), build_sample_bank(&net, 64, 10).unwrap());
    }

    #[test]
    fn path_reach_sets() {
        let net = DiffusionNetwork::new(2, 0, vec![det(0, 1, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 4, 1).unwrap();
        let idx = build_coverage_index(&bank, &net, &[0, 1], 5.0).unwrap();
        for s in 0..4 {
            assert_eq!(idx.reach(s, 0), &[0, 1]);
            assert_eq!(idx.reach(s, 1), &[1]);
        }
        let idx = build_coverage_index(&bank, &net, &[0, 1], 0.5).unwrap();
        assert_eq!(idx.reach(0, 0), &[0]);
    }

    #[test]
    fn star_average_reach() {
        let net = DiffusionNetwork::new(4, 0, vec![exp(0, 1, 1.0), exp(0, 2, 1.0), exp(0, 3, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 2048, 3).unwrap();
        let idx = build_coverage_index(&bank, &net, &[0], 1.0).unwrap();
        let avg = idx.influence_value(&[0]).unwrap();
        let expected = 1.0 + 3.0 * (1.0 - (-1.0f64).exp());
        assert!((avg - expected).abs() <= 0.1, "avg {avg}");
    }

    #[test]
    fn influence_value_examples() {
        let net = DiffusionNetwork::new(2, 0, vec![det(0, 1, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 8, 1).unwrap();
        let idx = build_coverage_index(&bank, &net, &[0, 1], 5.0).unwrap();
        assert_eq!(idx.influence_value(&[]).unwrap(), 0.0);
        assert_eq!(idx.influence_value(&[0]).unwrap(), 2.0);
        assert!(matches!(idx.influence_value(&[7]), Err(Error::UnknownCandidate { node: 7 })));

        let net = DiffusionNetwork::new(2, 0, vec![exp(0, 1, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 2048, 21).unwrap();
        let idx = build_coverage_index(&bank, &net, &[0], 1.0).unwrap();
        let v = idx.influence_value(&[0]).unwrap();
        assert!((v - (2.0 - (-1.0f64).exp())).abs() <= 0.05, "value {v}");
    }

    #[test]
    fn marginal_gain_and_commit() {
        let net = DiffusionNetwork::new(2, 0, vec![det(0, 1, 1.0)]).unwrap();
        let bank = build_sample_bank(&net, 8, 1).unwrap();
        let idx = build_coverage_index(&bank, &net, &[0, 1], 5.0).unwrap();
        let mut state = idx.new_state();
        assert_eq!(idx.marginal_gain(&state, 0), 2.0);
        let before = state.clone();
        let _ = idx.marginal_gain(&state, 1);
        assert_eq!(state, before);
        idx.commit(&mut state, 0);
        assert_eq!(idx.marginal_gain(&state, 1), 0.0);
        assert_eq!(idx.marginal_gain(&state, 0), 0.0);
        let snapshot = state.clone();
        idx.commit(&mut state, 0);
        assert_eq!(state, snapshot);
    }

    #[test]
    fn mismatched_bank_rejected() {
        let a = DiffusionNetwork::new(2, 0, vec![det(0, 1, 1.0)]).unwrap();
        let b = DiffusionNetwork::new(2, 0, vec![det(0, 1, 2.0)]).unwrap();
        let bank = build_sample_bank(&a, 2, 1).unwrap();
        assert!(build_coverage_index(&bank, &b, &[0], 1.0).is_err());
        assert!(build_coverage_index(&bank, &a, &[0, 0], 1.0).is_err());
        assert!(build_coverage_index(&bank, &a, &[5], 1.0).is_err());
    }

    #[test]
    fn cache_round_trip_and_validation() {
        let net = DiffusionNetwork::new(4, 2, vec![exp(0, 1, 1.0), exp(1, 2, 1.0), exp(2, 3, 0.5)]).unwrap();
        let bank = build_sample_bank(&net, 32, 4).unwrap();
        let idx = build_coverage_index(&bank, &net, &[0, 2, 3], 2.5).unwrap();
        let mut buf = Vec::new();
        idx.write_cache(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"BMCI");
        assert_eq!(buf[4], 1);
        let back = CoverageIndex::read_cache(buf.as_slice()).unwrap();
        assert_eq!(back, idx);
        assert!(back.matches_key(&net, 4, 32, 2.5));
        assert!(!back.matches_key(&net, 5, 32, 2.5));

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(CoverageIndex::read_cache(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(CoverageIndex::read_cache(bad.as_slice()).is_err());
        assert!(CoverageIndex::read_cache(&buf[..buf.len() - 1]).is_err());
    }
}
