//! Label vectors: the frame label, the TOK/POS/ENT slot labels, one filler
//! per POS tag and NER type, and the unknown-token vector.
//!
//! Everything is drawn from a single [`LabelRng`] seeded with the codebook
//! seed, in this order: frame, TOK, POS, ENT, POS fillers in list order,
//! NER fillers in list order, unknown token. The seed, dimension and tag
//! lists therefore determine every vector bit for bit.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TagKind};
use crate::hrr::{cosine_similarity, random_vector, seeded_rng, DenseVector};
use crate::io::write_atomic;

pub const DEFAULT_DIMENSION: usize = 300;
pub const DEFAULT_SEED: u64 = 20_190_414;

const DEFAULT_POS_TAGS: &str = include_str!("../data/pos_tags.txt");
const DEFAULT_NER_TYPES: &str = include_str!("../data/ner_types.txt");

/// The shipped 50-entry English fine-grained POS tagset.
pub fn default_pos_tags() -> Vec<String> {
    parse_tag_list(DEFAULT_POS_TAGS)
}

/// The shipped 19-entry NER typeset.
pub fn default_ner_types() -> Vec<String> {
    parse_tag_list(DEFAULT_NER_TYPES)
}

/// One tag per line; surrounding whitespace and blank lines are ignored.
pub fn parse_tag_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

/// The three slots of the token frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Tok,
    Pos,
    Ent,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Tok, Slot::Pos, Slot::Ent];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Tok => "TOK",
            Slot::Pos => "POS",
            Slot::Ent => "ENT",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dimension: usize,
    seed: u64,
    frame: DenseVector,
    tok_slot: DenseVector,
    pos_slot: DenseVector,
    ent_slot: DenseVector,
    pos_fillers: IndexMap<String, DenseVector>,
    ner_fillers: IndexMap<String, DenseVector>,
    unknown_token: DenseVector,
}

fn check_tags(tags: &[String], kind: TagKind) -> Result<()> {
    if tags.is_empty() {
        return Err(Error::EmptyTagList { kind });
    }
    let mut seen = HashSet::new();
    for tag in tags {
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken(format!("{kind} {tag:?} is empty or contains whitespace")));
        }
        if !seen.insert(tag.as_str()) {
            return Err(Error::DuplicateTag {
                kind,
                tag: tag.clone(),
            });
        }
    }
    Ok(())
}

impl Codebook {
    /// Generates a codebook. Tag lists must be nonempty and duplicate-free,
    /// and `dimension` at least 2.
    pub fn build(pos_tags: &[String], ner_types: &[String], dimension: usize, seed: u64) -> Result<Codebook> {
        if dimension < 2 {
            return Err(Error::InvalidDimension(dimension));
        }
        check_tags(pos_tags, TagKind::Pos)?;
        check_tags(ner_types, TagKind::Ner)?;

        let mut rng = seeded_rng(seed);
        let mut draw = || random_vector(&mut rng, dimension);
        let frame = draw()?;
        let tok_slot = draw()?;
        let pos_slot = draw()?;
        let ent_slot = draw()?;
        let pos_fillers = pos_tags
            .iter()
            .map(|t| Ok((t.clone(), draw()?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        let ner_fillers = ner_types
            .iter()
            .map(|t| Ok((t.clone(), draw()?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        let unknown_token = draw()?;

        Ok(Codebook {
            dimension,
            seed,
            frame,
            tok_slot,
            pos_slot,
            ent_slot,
            pos_fillers,
            ner_fillers,
            unknown_token,
        })
    }

    /// Codebook over the shipped tag lists.
    pub fn with_defaults(dimension: usize, seed: u64) -> Result<Codebook> {
        Codebook::build(&default_pos_tags(), &default_ner_types(), dimension, seed)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The frame label (`HRR TOK`).
    pub fn frame_label(&self) -> &DenseVector {
        &self.frame
    }

    pub fn slot_label(&self, slot: Slot) -> &DenseVector {
        match slot {
            Slot::Tok => &self.tok_slot,
            Slot::Pos => &self.pos_slot,
            Slot::Ent => &self.ent_slot,
        }
    }

    pub fn pos_fillers(&self) -> &IndexMap<String, DenseVector> {
        &self.pos_fillers
    }

    pub fn ner_fillers(&self) -> &IndexMap<String, DenseVector> {
        &self.ner_fillers
    }

    pub fn pos_filler(&self, tag: &str) -> Result<&DenseVector> {
        self.pos_fillers.get(tag).ok_or_else(|| Error::UnknownTag {
            kind: TagKind::Pos,
            tag: tag.to_owned(),
        })
    }

    pub fn ner_filler(&self, tag: &str) -> Result<&DenseVector> {
        self.ner_fillers.get(tag).ok_or_else(|| Error::UnknownTag {
            kind: TagKind::Ner,
            tag: tag.to_owned(),
        })
    }

    pub fn unknown_token(&self) -> &DenseVector {
        &self.unknown_token
    }

    pub fn pos_tags(&self) -> impl Iterator<Item = &str> {
        self.pos_fillers.keys().map(String::as_str)
    }

    pub fn ner_types(&self) -> impl Iterator<Item = &str> {
        self.ner_fillers.keys().map(String::as_str)
    }

    /// Total number of vectors: 1 + 3 + |POS| + |NER| + 1.
    pub fn vector_count(&self) -> usize {
        5 + self.pos_fillers.len() + self.ner_fillers.len()
    }

    /// Every vector with its persisted name, in draw order.
    pub fn named_vectors(&self) -> Vec<(String, &DenseVector)> {
        let mut out = vec![
            (FRAME_NAME.to_owned(), &self.frame),
            (slot_name(Slot::Tok), &self.tok_slot),
            (slot_name(Slot::Pos), &self.pos_slot),
            (slot_name(Slot::Ent), &self.ent_slot),
        ];
        out.extend(self.pos_fillers.iter().map(|(t, v)| (format!("{POS_PREFIX}{t}"), v)));
        out.extend(self.ner_fillers.iter().map(|(t, v)| (format!("{NER_PREFIX}{t}"), v)));
        out.push((UNKNOWN_NAME.to_owned(), &self.unknown_token));
        out
    }

    /// Rebuilds from the stored seed, dimension and tag order.
    pub fn regenerate(&self) -> Result<Codebook> {
        let pos: Vec<String> = self.pos_fillers.keys().cloned().collect();
        let ner: Vec<String> = self.ner_fillers.keys().cloned().collect();
        Codebook::build(&pos, &ner, self.dimension, self.seed)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CodebookFile {
            format: FORMAT_NAME.to_owned(),
            generator: crate::GENERATOR.to_owned(),
            dimension: self.dimension,
            seed: self.seed,
            pos_tags: self.pos_fillers.keys().cloned().collect(),
            ner_types: self.ner_fillers.keys().cloned().collect(),
            vectors: self
                .named_vectors()
                .into_iter()
                .map(|(name, v)| (name, v.as_slice().to_vec()))
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::Integrity(format!("serializing codebook: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Codebook> {
        let file: CodebookFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            field: field_from_serde_error(&e),
            message: e.to_string(),
        })?;
        file.into_codebook()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Codebook> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Codebook::from_json(&text)
    }
}

const FORMAT_NAME: &str = "holo-embed-codebook/1";
const FRAME_NAME: &str = "frame";
const UNKNOWN_NAME: &str = "unknown";
const POS_PREFIX: &str = "pos:";
const NER_PREFIX: &str = "ner:";

fn slot_name(slot: Slot) -> String {
    format!("slot:{}", slot.name())
}

/// On-disk layout. Numbers are written by `serde_json` in shortest
/// round-trip form and read back with `float_roundtrip`, so vectors survive
/// bit for bit.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    format: String,
    generator: String,
    dimension: usize,
    seed: u64,
    pos_tags: Vec<String>,
    ner_types: Vec<String>,
    vectors: IndexMap<String, Vec<f64>>,
}

impl CodebookFile {
    fn into_codebook(mut self) -> Result<Codebook> {
        if self.format != FORMAT_NAME {
            return Err(Error::Parse {
                field: "format".into(),
                message: format!("expected {FORMAT_NAME:?}, found {:?}", self.format),
            });
        }
        let dimension = self.dimension;
        if dimension < 2 {
            return Err(Error::Integrity(format!("declared dimension {dimension} is below 2")));
        }
        check_tags(&self.pos_tags, TagKind::Pos)?;
        check_tags(&self.ner_types, TagKind::Ner)?;

        let expected = 5 + self.pos_tags.len() + self.ner_types.len();
        if self.vectors.len() != expected {
            return Err(Error::Integrity(format!(
                "file holds {} vectors, tag lists imply {expected}",
                self.vectors.len()
            )));
        }

        let mut take = |name: String| -> Result<DenseVector> {
            let raw = self
                .vectors
                .swap_remove(&name)
                .ok_or_else(|| Error::Integrity(format!("vector {name:?} is missing")))?;
            if raw.len() != dimension {
                return Err(Error::Integrity(format!(
                    "vector {name:?} has {} elements, declared dimension is {dimension}",
                    raw.len()
                )));
            }
            DenseVector::new(raw).map_err(|e| Error::Integrity(format!("vector {name:?}: {e}")))
        };

        let frame = take(FRAME_NAME.into())?;
        let tok_slot = take(slot_name(Slot::Tok))?;
        let pos_slot = take(slot_name(Slot::Pos))?;
        let ent_slot = take(slot_name(Slot::Ent))?;
        let pos_fillers = self
            .pos_tags
            .iter()
            .map(|t| Ok((t.clone(), take(format!("{POS_PREFIX}{t}"))?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        let ner_fillers = self
            .ner_types
            .iter()
            .map(|t| Ok((t.clone(), take(format!("{NER_PREFIX}{t}"))?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        let unknown_token = take(UNKNOWN_NAME.into())?;

        Ok(Codebook {
            dimension,
            seed: self.seed,
            frame,
            tok_slot,
            pos_slot,
            ent_slot,
            pos_fillers,
            ner_fillers,
            unknown_token,
        })
    }
}

fn field_from_serde_error(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    // serde reports fields as `name`; take the first backticked word if any.
    msg.split('`')
        .nth(1)
        .map(str::to_owned)
        .unwrap_or_else(|| format!("line {} column {}", e.line(), e.column()))
}

/// Result of a cleanup-memory lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub key: String,
    pub similarity: f64,
}

/// Returns the candidate with the highest cosine similarity to `query`.
/// Ties go to the lexicographically smallest key, so the result does not
/// depend on candidate order.
pub fn cleanup<'a, K, I>(query: &DenseVector, candidates: I) -> Result<Match>
where
    K: AsRef<str> + 'a,
    I: IntoIterator<Item = (&'a K, &'a DenseVector)>,
{
    let qn = query.norm();
    if qn == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut best: Option<(&str, f64)> = None;
    for (key, vector) in candidates {
        let key = key.as_ref();
        if vector.len() != query.len() {
            return Err(Error::DimensionMismatch {
                expected: query.len(),
                found: vector.len(),
            });
        }
        let cn = vector.norm();
        if cn == 0.0 {
            return Err(Error::DegenerateKey(key.to_owned()));
        }
        let sim = (crate::hrr::dot(query.as_slice(), vector.as_slice()) / (qn * cn)).clamp(-1.0, 1.0);
        let better = match best {
            None => true,
            Some((bk, bs)) => sim > bs || (sim == bs && key < bk),
        };
        if better {
            best = Some((key, sim));
        }
    }
    best.map(|(key, similarity)| Match {
        key: key.to_owned(),
        similarity,
    })
    .ok_or(Error::EmptyInput("cleanup"))
}

/// Largest |cosine| and the fraction of pairs below `threshold` over all
/// codebook vector pairs.
pub fn pairwise_summary(cb: &Codebook, threshold: f64) -> Result<(f64, f64)> {
    let vectors = cb.named_vectors();
    let mut max_abs: f64 = 0.0;
    let mut below = 0usize;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let c = cosine_similarity(vectors[i].1, vectors[j].1)?.abs();
            max_abs = max_abs.max(c);
            below += usize::from(c < threshold);
            pairs += 1;
        }
    }
    Ok((max_abs, below as f64 / pairs.max(1) as f64))
}
