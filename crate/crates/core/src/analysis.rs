//! Orthogonality sampling and nearest-neighbor preservation analysis.
//!
//! Orthogonality is measured on two disjoint random samples of a
//! vocabulary, paired index-wise. Neighborhood preservation compares the
//! top-k neighbors of each core word in the original embedding space with
//! those in the compressed space, classifying each neighbor as kept at the
//! same rank, kept at a different rank, or present in only one list.
//!
//! Similarity is cosine throughout; "distance" means `1 − cosine`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingTable;
use crate::encoder::CompressedVocabulary;
use crate::error::{Error, Result};
use crate::hrr::{dot, seeded_rng, DenseVector};

/// Spaces at or below this size are scanned serially.
const PARALLEL_SCAN_MIN: usize = 4096;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.25;
pub const DEFAULT_SAMPLE_SIZE: usize = 100_000;
pub const HISTOGRAM_BUCKET_WIDTH: f64 = 0.05;
/// Largest space [`exhaustive_orthogonality`] will scan.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20_000;

/// Neighborhood composition reported at full scale (same rank, shifted,
/// disjoint), carried in reports for comparison only.
pub const REFERENCE_FRACTIONS: Fractions = Fractions {
    same_position: 0.18,
    shifted: 0.43,
    disjoint: 0.39,
};

/// Sorts by descending cosine, then ascending key.
fn rank_order(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

fn cosine_raw(a: &[f64], an: f64, b: &[f64], bn: f64) -> f64 {
    (dot(a, b) / (an * bn)).clamp(-1.0, 1.0)
}

/// A keyed set of nonzero vectors with cached norms.
#[derive(Debug, Clone)]
pub struct VectorSpace {
    keys: Vec<String>,
    vectors: Vec<DenseVector>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
}

impl VectorSpace {
    pub fn new<I: IntoIterator<Item = (String, DenseVector)>>(entries: I) -> Result<Self> {
        let mut space = VectorSpace {
            keys: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            index: HashMap::new(),
        };
        for (key, vector) in entries {
            if let Some(first) = space.vectors.first() {
                if first.len() != vector.len() {
                    return Err(Error::DimensionMismatch {
                        expected: first.len(),
                        found: vector.len(),
                    });
                }
            }
            let norm = vector.norm();
            if norm == 0.0 {
                return Err(Error::DegenerateKey(key));
            }
            if space.index.insert(key.clone(), space.keys.len()).is_some() {
                return Err(Error::Integrity(format!("duplicate key {key:?}")));
            }
            space.keys.push(key);
            space.vectors.push(vector);
            space.norms.push(norm);
        }
        Ok(space)
    }

    pub fn from_table(table: &EmbeddingTable) -> Result<Self> {
        VectorSpace::new(table.iter().map(|(k, v)| (k.clone(), v.clone())))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn get(&self, key: &str) -> Option<&DenseVector> {
        self.index.get(key).map(|&i| &self.vectors[i])
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub key: String,
    pub cosine: f64,
}

/// The `k` keys most similar to `core`, excluding `core`, in non-increasing
/// cosine order with ties broken by key.
pub fn k_nearest(space: &VectorSpace, core: &str, k: usize) -> Result<Vec<Neighbor>> {
    Ok(space
        .neighborhood(core, k, &|_| true)?
        .neighbors
        .into_iter()
        .map(|n| Neighbor {
            key: n.key,
            cosine: n.cosine,
        })
        .collect())
}

/// One entry of a neighborhood, with the vector that represents it.
#[derive(Debug, Clone)]
pub struct RankedNeighbor {
    pub key: String,
    pub cosine: f64,
    /// The underlying key when the space projects several keys onto one
    /// word, e.g. the composite key chosen for a word type.
    pub representative: Option<String>,
    pub vector: DenseVector,
}

#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub core_vector: DenseVector,
    pub neighbors: Vec<RankedNeighbor>,
}

/// A space that can answer word-level top-k queries.
pub trait NeighborSource: Sync {
    fn contains_word(&self, word: &str) -> bool;

    fn words(&self) -> Box<dyn Iterator<Item = &str> + '_>;

    /// Top-`k` neighbors of `core` among words for which `allow` holds.
    fn neighborhood(&self, core: &str, k: usize, allow: &(dyn Fn(&str) -> bool + Sync)) -> Result<Neighborhood>;
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InsufficientData("k must be at least 1".into()));
    }
    Ok(())
}

fn select_top<'k, T>(mut scored: Vec<(T, f64)>, k: usize, key: impl Fn(&T) -> &'k str) -> Vec<(T, f64)> {
    let cmp = |a: &(T, f64), b: &(T, f64)| rank_order((key(&a.0), a.1), (key(&b.0), b.1));
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_by(cmp);
    scored
}

impl NeighborSource for VectorSpace {
    fn contains_word(&self, word: &str) -> bool {
        self.contains(word)
    }

    fn words(&self) -> Box<dyn Iterator<Item = &str> + '_> {
        Box::new(self.keys.iter().map(String::as_str))
    }

    fn neighborhood(&self, core: &str, k: usize, allow: &(dyn Fn(&str) -> bool + Sync)) -> Result<Neighborhood> {
        check_k(k)?;
        let ci = *self.index.get(core).ok_or_else(|| Error::MissingKey(core.to_owned()))?;
        let (cv, cn) = (self.vectors[ci].as_slice(), self.norms[ci]);
        let score = |i: usize| -> Option<(usize, f64)> {
            (i != ci && allow(&self.keys[i]))
                .then(|| (i, cosine_raw(cv, cn, self.vectors[i].as_slice(), self.norms[i])))
        };
        let scored: Vec<(usize, f64)> = if self.len() > PARALLEL_SCAN_MIN {
            (0..self.len()).into_par_iter().filter_map(score).collect()
        } else {
            (0..self.len()).filter_map(score).collect()
        };
        let top = select_top(scored, k, |&i| self.keys[i].as_str());
        Ok(Neighborhood {
            core_vector: self.vectors[ci].clone(),
            neighbors: top
                .into_iter()
                .map(|(i, cosine)| RankedNeighbor {
                    key: self.keys[i].clone(),
                    cosine,
                    representative: None,
                    vector: self.vectors[i].clone(),
                })
                .collect(),
        })
    }
}

/// A compressed vocabulary viewed at word-type level.
///
/// The core word is represented by its first composite key (first
/// occurrence in the corpus). Every other word type is represented by
/// whichever of its composite keys is most similar to that core vector.
/// Other variants of the core word itself are never neighbors.
#[derive(Debug, Clone)]
pub struct WordProjectedSpace {
    groups: IndexMap<String, Vec<(String, DenseVector, f64)>>,
}

impl WordProjectedSpace {
    /// Builds from `(word_type, composite_key, vector)` triples.
    pub fn new<I: IntoIterator<Item = (String, String, DenseVector)>>(entries: I) -> Result<Self> {
        let mut groups: IndexMap<String, Vec<(String, DenseVector, f64)>> = IndexMap::new();
        let mut dim = None;
        for (word, key, vector) in entries {
            if *dim.get_or_insert(vector.len()) != vector.len() {
                return Err(Error::DimensionMismatch {
                    expected: dim.unwrap_or_default(),
                    found: vector.len(),
                });
            }
            let norm = vector.norm();
            if norm == 0.0 {
                return Err(Error::DegenerateKey(key));
            }
            groups.entry(word).or_default().push((key, vector, norm));
        }
        Ok(WordProjectedSpace { groups })
    }

    pub fn from_vocabulary(vocab: &CompressedVocabulary) -> Result<Self> {
        WordProjectedSpace::new(
            vocab
                .iter()
                .map(|(k, e)| (e.word_type.clone(), k.clone(), e.vector.clone())),
        )
    }

    pub fn word_count(&self) -> usize {
        self.groups.len()
    }
}

impl NeighborSource for WordProjectedSpace {
    fn contains_word(&self, word: &str) -> bool {
        self.groups.contains_key(word)
    }

    fn words(&self) -> Box<dyn Iterator<Item = &str> + '_> {
        Box::new(self.groups.keys().map(String::as_str))
    }

    fn neighborhood(&self, core: &str, k: usize, allow: &(dyn Fn(&str) -> bool + Sync)) -> Result<Neighborhood> {
        check_k(k)?;
        let ci = self
            .groups
            .get_index_of(core)
            .ok_or_else(|| Error::MissingKey(core.to_owned()))?;
        let (_, core_variant, cn) = &self.groups[ci][0];
        let cv = core_variant.as_slice();
        let best = |i: usize| -> Option<((usize, usize), f64)> {
            let (word, variants) = self.groups.get_index(i)?;
            if i == ci || !allow(word) {
                return None;
            }
            variants
                .iter()
                .enumerate()
                .map(|(vi, (key, v, n))| (vi, key.as_str(), cosine_raw(cv, *cn, v.as_slice(), *n)))
                .min_by(|a, b| rank_order((a.1, a.2), (b.1, b.2)))
                .map(|(vi, _, c)| ((i, vi), c))
        };
        let scored: Vec<((usize, usize), f64)> = if self.groups.len() > PARALLEL_SCAN_MIN {
            (0..self.groups.len()).into_par_iter().filter_map(best).collect()
        } else {
            (0..self.groups.len()).filter_map(best).collect()
        };
        let top = select_top(scored, k, |&(i, _)| self.groups.get_index(i).map_or("", |(w, _)| w.as_str()));
        Ok(Neighborhood {
            core_vector: core_variant.clone(),
            neighbors: top
                .into_iter()
                .map(|((i, vi), cosine)| {
                    let (word, variants) = self.groups.get_index(i).expect("index from scan");
                    let (key, v, _) = &variants[vi];
                    RankedNeighbor {
                        key: word.clone(),
                        cosine,
                        representative: Some(key.clone()),
                        vector: v.clone(),
                    }
                })
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborClass {
    SamePosition,
    Shifted,
    Disjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    pub same_position: f64,
    pub shifted: f64,
    pub disjoint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedNeighbor {
    pub key: String,
    /// 1-based rank in the original top-k, if present.
    pub rank_original: Option<usize>,
    pub rank_compressed: Option<usize>,
    pub class: NeighborClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListedNeighbor {
    pub key: String,
    pub cosine: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub representative: Option<String>,
}

/// Pairwise cosines among the core and its neighbors, for external plotting.
/// Row and column 0 are the core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineMatrix {
    pub keys: Vec<String>,
    pub cosines: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreClassification {
    pub core: String,
    pub original: Vec<ListedNeighbor>,
    pub compressed: Vec<ListedNeighbor>,
    /// Original-list members in rank order, then compressed-only members.
    pub neighbors: Vec<ClassifiedNeighbor>,
    pub same_position: usize,
    pub shifted: usize,
    pub disjoint: usize,
    pub original_plot: CosineMatrix,
    pub compressed_plot: CosineMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub generator: String,
    pub k: usize,
    /// Words present in both spaces; neighbors are drawn from these only.
    pub shared_words: usize,
    pub cores: Vec<CoreClassification>,
    pub fractions: Fractions,
    pub reference_fractions: Fractions,
}

impl NeighborhoodReport {
    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Integrity(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn plot_matrix(core: &str, hood: &Neighborhood) -> CosineMatrix {
    let mut keys = vec![core.to_owned()];
    let mut vectors = vec![&hood.core_vector];
    for n in &hood.neighbors {
        keys.push(n.key.clone());
        vectors.push(&n.vector);
    }
    let norms: Vec<f64> = vectors.iter().map(|v| v.norm()).collect();
    let cosines = vectors
        .iter()
        .zip(&norms)
        .map(|(a, an)| {
            vectors
                .iter()
                .zip(&norms)
                .map(|(b, bn)| cosine_raw(a.as_slice(), *an, b.as_slice(), *bn))
                .collect()
        })
        .collect();
    CosineMatrix { keys, cosines }
}

fn classify_core(core: &str, original: &Neighborhood, compressed: &Neighborhood) -> CoreClassification {
    let comp_rank: HashMap<&str, usize> = compressed
        .neighbors
        .iter()
        .enumerate()
        .map(|(i, n)| (n.key.as_str(), i + 1))
        .collect();
    let orig_keys: BTreeSet<&str> = original.neighbors.iter().map(|n| n.key.as_str()).collect();

    let mut neighbors = Vec::new();
    let (mut same, mut shifted, mut disjoint) = (0, 0, 0);
    for (i, n) in original.neighbors.iter().enumerate() {
        let rank_original = i + 1;
        let rank_compressed = comp_rank.get(n.key.as_str()).copied();
        let class = match rank_compressed {
            Some(r) if r == rank_original => NeighborClass::SamePosition,
            Some(_) => NeighborClass::Shifted,
            None => NeighborClass::Disjoint,
        };
        match class {
            NeighborClass::SamePosition => same += 1,
            NeighborClass::Shifted => shifted += 1,
            NeighborClass::Disjoint => disjoint += 1,
        }
        neighbors.push(ClassifiedNeighbor {
            key: n.key.clone(),
            rank_original: Some(rank_original),
            rank_compressed,
            class,
        });
    }
    for (i, n) in compressed.neighbors.iter().enumerate() {
        if !orig_keys.contains(n.key.as_str()) {
            neighbors.push(ClassifiedNeighbor {
                key: n.key.clone(),
                rank_original: None,
                rank_compressed: Some(i + 1),
                class: NeighborClass::Disjoint,
            });
        }
    }

    let listed = |h: &Neighborhood| {
        h.neighbors
            .iter()
            .map(|n| ListedNeighbor {
                key: n.key.clone(),
                cosine: n.cosine,
                representative: n.representative.clone(),
            })
            .collect()
    };
    CoreClassification {
        core: core.to_owned(),
        original: listed(original),
        compressed: listed(compressed),
        neighbors,
        same_position: same,
        shifted,
        disjoint,
        original_plot: plot_matrix(core, original),
        compressed_plot: plot_matrix(core, compressed),
    }
}

/// Compares top-`k` neighborhoods of each core between two spaces.
///
/// Only words present in both spaces are candidates. Cores are
/// de-duplicated and processed in sorted order, so the report does not
/// depend on the order they were given in. Fractions are taken over the
/// original neighborhoods: each neighbor counts once as same-position,
/// shifted or disjoint.
pub fn classify_neighborhoods<A, B>(original: &A, compressed: &B, cores: &[String], k: usize) -> Result<NeighborhoodReport>
where
    A: NeighborSource + ?Sized,
    B: NeighborSource + ?Sized,
{
    check_k(k)?;
    let cores: BTreeSet<&str> = cores.iter().map(String::as_str).collect();
    for core in &cores {
        if !original.contains_word(core) || !compressed.contains_word(core) {
            return Err(Error::MissingKey((*core).to_owned()));
        }
    }
    let shared = |w: &str| original.contains_word(w) && compressed.contains_word(w);
    let per_core = cores
        .par_iter()
        .map(|core| {
            let o = original.neighborhood(core, k, &shared)?;
            let c = compressed.neighborhood(core, k, &shared)?;
            Ok(classify_core(core, &o, &c))
        })
        .collect::<Result<Vec<_>>>()?;

    let total: usize = per_core.iter().map(|c| c.original.len()).sum();
    if total == 0 {
        return Err(Error::InsufficientData("no neighbors to classify".into()));
    }
    let sum = |f: fn(&CoreClassification) -> usize| per_core.iter().map(f).sum::<usize>() as f64 / total as f64;
    let fractions = Fractions {
        same_position: sum(|c| c.same_position),
        shifted: sum(|c| c.shifted),
        disjoint: sum(|c| c.disjoint),
    };
    Ok(NeighborhoodReport {
        generator: crate::GENERATOR.to_owned(),
        k,
        shared_words: original.words().filter(|w| compressed.contains_word(w)).count(),
        cores: per_core,
        fractions,
        reference_fractions: REFERENCE_FRACTIONS,
    })
}

/// Bucketed |cosine| counts; bucket `i` covers `[i·w, (i+1)·w)` and the
/// last bucket also takes 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bucket_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(bucket_width: f64) -> Self {
        let buckets = (1.0 / bucket_width).round() as usize;
        Histogram {
            bucket_width,
            counts: vec![0; buckets],
        }
    }

    pub fn add(&mut self, abs_cosine: f64) {
        let last = self.counts.len() - 1;
        let i = ((abs_cosine / self.bucket_width) as usize).min(last);
        self.counts[i] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Mass in buckets entirely below `threshold`.
    pub fn mass_below(&self, threshold: f64) -> usize {
        self.counts
            .iter()
            .enumerate()
            .take_while(|(i, _)| (*i as f64 + 1.0) * self.bucket_width <= threshold + 1e-12)
            .map(|(_, c)| c)
            .sum()
    }

    fn merge(mut self, other: &Histogram) -> Self {
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub generator: String,
    pub seed: u64,
    pub vocabulary_size: usize,
    pub requested_sample_size: usize,
    /// Pairs actually compared; equals the per-list sample size.
    pub sample_pairs: usize,
    /// True when the request exceeded half the vocabulary.
    pub clamped: bool,
    pub threshold: f64,
    pub fraction_below: f64,
    pub mean_abs_cosine: f64,
    pub max_abs_cosine: f64,
    pub histogram: Histogram,
}

impl OrthogonalityReport {
    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

fn abs_cosine(a: &DenseVector, b: &DenseVector) -> Result<f64> {
    Ok(crate::hrr::cosine_similarity(a, b)?.abs())
}

/// Draws two disjoint uniform samples of `sample_size` vectors without
/// replacement, pairs them index-wise and reports how many pairs have
/// |cosine| below `threshold`. A sample size above half the vocabulary is
/// clamped and the clamp recorded.
pub fn sample_orthogonality<V>(vectors: &[V], sample_size: usize, threshold: f64, seed: u64) -> Result<OrthogonalityReport>
where
    V: AsRef<DenseVector> + Sync,
{
    if vectors.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "orthogonality sampling needs at least 2 vectors, got {}",
            vectors.len()
        )));
    }
    if sample_size == 0 {
        return Err(Error::InsufficientData("sample size must be at least 1".into()));
    }
    let pairs = sample_size.min(vectors.len() / 2);
    let mut rng = seeded_rng(seed);
    let drawn = index::sample(&mut rng, vectors.len(), 2 * pairs).into_vec();
    let (left, right) = drawn.split_at(pairs);

    let mut member = vec![false; vectors.len()];
    left.iter().for_each(|&i| member[i] = true);
    assert!(right.iter().all(|&i| !member[i]), "sample lists overlap");

    let cosines = left
        .par_iter()
        .zip(right.par_iter())
        .map(|(&i, &j)| abs_cosine(vectors[i].as_ref(), vectors[j].as_ref()))
        .collect::<Result<Vec<f64>>>()?;

    let mut histogram = Histogram::new(HISTOGRAM_BUCKET_WIDTH);
    cosines.iter().for_each(|&c| histogram.add(c));
    let below = cosines.iter().filter(|&&c| c < threshold).count();
    Ok(OrthogonalityReport {
        generator: crate::GENERATOR.to_owned(),
        seed,
        vocabulary_size: vectors.len(),
        requested_sample_size: sample_size,
        sample_pairs: pairs,
        clamped: pairs < sample_size,
        threshold,
        fraction_below: below as f64 / pairs as f64,
        mean_abs_cosine: cosines.iter().sum::<f64>() / pairs as f64,
        max_abs_cosine: cosines.iter().copied().fold(0.0, f64::max),
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseReport {
    pub pairs: usize,
    pub threshold: f64,
    pub fraction_below: f64,
    pub max_abs_cosine: f64,
    pub histogram: Histogram,
}

/// All-pairs |cosine| statistics. Refused above `limit` vectors, where
/// sampling should be used instead.
pub fn exhaustive_orthogonality<V>(vectors: &[V], threshold: f64, limit: usize) -> Result<PairwiseReport>
where
    V: AsRef<DenseVector> + Sync,
{
    if vectors.len() > limit {
        return Err(Error::TooLarge {
            size: vectors.len(),
            limit,
        });
    }
    if vectors.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 vectors".into()));
    }
    let (hist, below, max) = (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            let mut h = Histogram::new(HISTOGRAM_BUCKET_WIDTH);
            let (mut below, mut max) = (0usize, 0.0f64);
            for j in i + 1..vectors.len() {
                let c = abs_cosine(vectors[i].as_ref(), vectors[j].as_ref())?;
                h.add(c);
                below += usize::from(c < threshold);
                max = max.max(c);
            }
            Ok::<_, Error>((h, below, max))
        })
        .try_reduce(
            || (Histogram::new(HISTOGRAM_BUCKET_WIDTH), 0, 0.0),
            |a, b| Ok((a.0.merge(&b.0), a.1 + b.1, a.2.max(b.2))),
        )?;
    let pairs = hist.total();
    Ok(PairwiseReport {
        pairs,
        threshold,
        fraction_below: below as f64 / pairs as f64,
        max_abs_cosine: max,
        histogram: hist,
    })
}
