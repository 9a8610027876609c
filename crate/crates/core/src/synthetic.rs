//! Seeded synthetic inputs for self-tests and benchmarks: random embedding
//! tables and annotated token streams over a codebook's tag sets.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::codebook::Codebook;
use crate::embeddings::EmbeddingTable;
use crate::encoder::AnnotatedToken;
use crate::error::{Error, Result};
use crate::hrr::random_vector;

/// `count` words named `w00000`, `w00001`, … with N(0, 1/n) vectors.
pub fn random_table<R: Rng + ?Sized>(rng: &mut R, count: usize, dimension: usize) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable::new(dimension)?;
    for i in 0..count {
        table.insert(format!("w{i:05}"), random_vector(rng, dimension)?)?;
    }
    Ok(table)
}

/// How tags are assigned to words when building a synthetic corpus.
#[derive(Debug, Clone, Copy)]
pub struct CorpusProfile {
    /// Probability that a usage carries an NER type.
    pub ner_fraction: f64,
    /// Probability of adding one more distinct usage to a word, applied
    /// repeatedly; the mean number of usages per word is `1 / (1 − p)`.
    pub extra_usage: f64,
    /// POS tags are drawn with weight `1 / (rank + 1)^zipf` in codebook
    /// order; 0 gives a uniform draw.
    pub zipf: f64,
}

impl CorpusProfile {
    /// Uniform tags, one usage per word.
    pub const UNIFORM: CorpusProfile = CorpusProfile {
        ner_fraction: 0.5,
        extra_usage: 0.0,
        zipf: 0.0,
    };

    /// Skewed tags with about 1.73 usages per word type.
    pub const NATURAL: CorpusProfile = CorpusProfile {
        ner_fraction: 0.15,
        extra_usage: 0.42,
        zipf: 1.0,
    };
}

struct TagSampler<'a> {
    pos: Vec<&'a str>,
    ner: Vec<&'a str>,
    pos_weights: WeightedIndex<f64>,
    profile: CorpusProfile,
}

impl<'a> TagSampler<'a> {
    fn new(cb: &'a Codebook, profile: CorpusProfile) -> Result<Self> {
        let pos: Vec<&str> = cb.pos_tags().collect();
        let weights: Vec<f64> = (0..pos.len()).map(|r| 1.0 / ((r + 1) as f64).powf(profile.zipf)).collect();
        let pos_weights = WeightedIndex::new(&weights).map_err(|e| Error::InsufficientData(e.to_string()))?;
        Ok(TagSampler {
            pos,
            ner: cb.ner_types().collect(),
            pos_weights,
            profile,
        })
    }

    fn token<R: Rng + ?Sized>(&self, rng: &mut R, surface: &str) -> Result<AnnotatedToken> {
        let pos = self.pos[self.pos_weights.sample(rng)];
        let ner = (rng.random::<f64>() < self.profile.ner_fraction)
            .then(|| self.ner[rng.random_range(0..self.ner.len())].to_owned());
        AnnotatedToken::new(surface, pos, ner)
    }
}

/// `count` tokens drawn uniformly from `words`, tagged per `profile`.
pub fn random_stream<R: Rng + ?Sized>(
    rng: &mut R,
    words: &[String],
    cb: &Codebook,
    count: usize,
    profile: CorpusProfile,
) -> Result<Vec<AnnotatedToken>> {
    if words.is_empty() {
        return Err(Error::InsufficientData("no words to sample from".into()));
    }
    let sampler = TagSampler::new(cb, profile)?;
    (0..count)
        .map(|_| {
            let i = rng.random_range(0..words.len());
            sampler.token(rng, &words[i])
        })
        .collect()
}

/// Every word in order, each used one or more times with independently
/// drawn tags. Duplicate usages collapse to one composite key later.
pub fn annotate_words<R: Rng + ?Sized>(
    rng: &mut R,
    words: &[String],
    cb: &Codebook,
    profile: CorpusProfile,
) -> Result<Vec<AnnotatedToken>> {
    let sampler = TagSampler::new(cb, profile)?;
    let mut out = Vec::with_capacity(words.len() * 2);
    for word in words {
        out.push(sampler.token(rng, word)?);
        while rng.random::<f64>() < profile.extra_usage {
            out.push(sampler.token(rng, word)?);
        }
    }
    Ok(out)
}
