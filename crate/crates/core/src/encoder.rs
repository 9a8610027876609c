//! Frame–slot compression of annotated tokens.
//!
//! A token with a named-entity type becomes
//! `(frame + TOK⊛filler + POS⊛pos + ENT⊛ner) / 4`; without one the ENT term
//! is dropped and the sum is divided by 3. Each distinct composite key
//! (lowercased word, POS tag and NER type concatenated) indexes one
//! compressed vector.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, Slot};
use crate::embeddings::{write_glove_records, EmbeddingTable};
use crate::error::{Error, Result, TagKind};
use crate::hrr::{bind, superpose, DenseVector, Strategy};
use crate::io::write_atomic_with;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotatedToken {
    surface: String,
    pos_tag: String,
    ner_type: Option<String>,
}

fn check_field(value: &str, what: &str) -> Result<()> {
    if value.is_empty() {
        return Err(Error::InvalidToken(format!("{what} is empty")));
    }
    if value.chars().any(char::is_whitespace) {
        return Err(Error::InvalidToken(format!("{what} {value:?} contains whitespace")));
    }
    Ok(())
}

impl AnnotatedToken {
    pub fn new(surface: impl Into<String>, pos_tag: impl Into<String>, ner_type: Option<String>) -> Result<Self> {
        let (surface, pos_tag) = (surface.into(), pos_tag.into());
        check_field(&surface, "surface form")?;
        check_field(&pos_tag, "POS tag")?;
        if let Some(ner) = &ner_type {
            check_field(ner, "NER type")?;
        }
        Ok(AnnotatedToken {
            surface,
            pos_tag,
            ner_type,
        })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn pos_tag(&self) -> &str {
        &self.pos_tag
    }

    pub fn ner_type(&self) -> Option<&str> {
        self.ner_type.as_deref()
    }

    /// The lowercased surface form.
    pub fn word_type(&self) -> String {
        self.surface.to_lowercase()
    }

    /// `lowercase(surface) ++ pos_tag ++ ner_type`, no separators:
    /// `("Fish", NNP, PERSON)` → `"fishNNPPERSON"`.
    pub fn composite_key(&self) -> String {
        let mut key = self.word_type();
        key.push_str(&self.pos_tag);
        if let Some(ner) = &self.ner_type {
            key.push_str(ner);
        }
        key
    }

    /// Number of superposed vectors `m`: 4 with an NER type, 3 without.
    pub fn component_count(&self) -> usize {
        if self.ner_type.is_some() {
            4
        } else {
            3
        }
    }

    /// Checks the tags against `cb`.
    pub fn validate(&self, cb: &Codebook) -> Result<()> {
        cb.pos_filler(&self.pos_tag)?;
        if let Some(ner) = &self.ner_type {
            cb.ner_filler(ner)?;
        }
        Ok(())
    }
}

pub fn composite_key(token: &AnnotatedToken) -> String {
    token.composite_key()
}

/// A token with the input line it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineToken {
    pub line: usize,
    pub token: AnnotatedToken,
}

/// Numbers tokens 1, 2, … for inputs that have no source file.
pub fn number_tokens<I: IntoIterator<Item = AnnotatedToken>>(tokens: I) -> Vec<LineToken> {
    tokens
        .into_iter()
        .enumerate()
        .map(|(i, token)| LineToken { line: i + 1, token })
        .collect()
}

/// Marker for "no named-entity type" in annotation files.
pub const NO_ENTITY: &str = "-";

/// Parses `surface<TAB>pos<TAB>ner-or-"-"` lines. Blank lines are skipped.
pub fn parse_annotations<R: BufRead>(reader: R) -> Result<Vec<LineToken>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidToken(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            ))
            .at_line(lineno));
        }
        let ner = (fields[2] != NO_ENTITY).then(|| fields[2].to_owned());
        let token = AnnotatedToken::new(fields[0], fields[1], ner).map_err(|e| e.at_line(lineno))?;
        out.push(LineToken { line: lineno, token });
    }
    Ok(out)
}

pub fn read_annotations(path: &Path) -> Result<Vec<LineToken>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    parse_annotations(BufReader::new(file))
}

pub fn write_annotations<'a, W, I>(w: &mut W, tokens: I) -> std::io::Result<()>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = &'a AnnotatedToken>,
{
    for t in tokens {
        writeln!(w, "{}\t{}\t{}", t.surface, t.pos_tag, t.ner_type().unwrap_or(NO_ENTITY))?;
    }
    Ok(())
}

/// Where a token's filler vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillerSource {
    Exact,
    Lowercased,
    Unknown,
}

/// Exact-case hit, then lowercase hit, then the codebook's unknown vector.
pub fn lookup_filler<'a>(surface: &str, table: &'a EmbeddingTable, cb: &'a Codebook) -> (&'a DenseVector, FillerSource) {
    if let Some(v) = table.get(surface) {
        return (v, FillerSource::Exact);
    }
    let lower = surface.to_lowercase();
    if lower != surface {
        if let Some(v) = table.get(&lower) {
            return (v, FillerSource::Lowercased);
        }
    }
    (cb.unknown_token(), FillerSource::Unknown)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EncoderOptions {
    /// Rescale every compressed vector to unit norm after dividing by m.
    pub unit_norm: bool,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedToken {
    pub vector: DenseVector,
    pub component_count: usize,
    pub filler_source: FillerSource,
}

/// Compresses tokens against one codebook and embedding table. The POS and
/// NER bindings are computed once up front.
pub struct Encoder<'a> {
    codebook: &'a Codebook,
    table: &'a EmbeddingTable,
    options: EncoderOptions,
    pos_terms: HashMap<&'a str, DenseVector>,
    ner_terms: HashMap<&'a str, DenseVector>,
}

impl<'a> Encoder<'a> {
    pub fn new(codebook: &'a Codebook, table: &'a EmbeddingTable) -> Result<Self> {
        Encoder::with_options(codebook, table, EncoderOptions::default())
    }

    pub fn with_options(codebook: &'a Codebook, table: &'a EmbeddingTable, options: EncoderOptions) -> Result<Self> {
        if table.dimension() != codebook.dimension() {
            return Err(Error::DimensionMismatch {
                expected: codebook.dimension(),
                found: table.dimension(),
            });
        }
        let bind_all = |slot: Slot, fillers: &'a IndexMap<String, DenseVector>| {
            fillers
                .iter()
                .map(|(tag, v)| Ok((tag.as_str(), bind(codebook.slot_label(slot), v, options.strategy)?.0)))
                .collect::<Result<HashMap<_, _>>>()
        };
        Ok(Encoder {
            codebook,
            table,
            options,
            pos_terms: bind_all(Slot::Pos, codebook.pos_fillers())?,
            ner_terms: bind_all(Slot::Ent, codebook.ner_fillers())?,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        self.codebook
    }

    pub fn compress(&self, token: &AnnotatedToken) -> Result<CompressedToken> {
        let pos_term = self.pos_terms.get(token.pos_tag()).ok_or_else(|| Error::UnknownTag {
            kind: TagKind::Pos,
            tag: token.pos_tag().to_owned(),
        })?;
        let ner_term = token
            .ner_type()
            .map(|ner| {
                self.ner_terms.get(ner).ok_or_else(|| Error::UnknownTag {
                    kind: TagKind::Ner,
                    tag: ner.to_owned(),
                })
            })
            .transpose()?;

        let (filler, filler_source) = lookup_filler(token.surface(), self.table, self.codebook);
        let (tok_term, _) = bind(self.codebook.slot_label(Slot::Tok), filler, self.options.strategy)?;

        let mut terms = vec![self.codebook.frame_label(), &tok_term, pos_term];
        terms.extend(ner_term);
        let m = terms.len();
        let mut vector = superpose(&terms, m)?;
        if self.options.unit_norm {
            vector = vector.normalized()?;
        }
        Ok(CompressedToken {
            vector,
            component_count: m,
            filler_source,
        })
    }

    /// One entry per distinct composite key, in first-occurrence order.
    ///
    /// The first token seen under a key supplies its filler. A later token
    /// with a different surface form can resolve to a different filler
    /// (e.g. `The` and `the` in a cased table); the first one is kept and
    /// the collision is counted in [`BuildStats::case_variant_conflicts`].
    pub fn build_vocabulary(&self, tokens: &[LineToken]) -> Result<CompressedVocabulary> {
        let mut first: IndexMap<String, usize> = IndexMap::new();
        let mut word_types: HashSet<String> = HashSet::new();
        let mut unknown_tokens = 0usize;
        let mut conflicts: HashSet<usize> = HashSet::new();

        for (idx, lt) in tokens.iter().enumerate() {
            lt.token.validate(self.codebook).map_err(|e| e.at_line(lt.line))?;
            let (filler, source) = lookup_filler(lt.token.surface(), self.table, self.codebook);
            unknown_tokens += usize::from(source == FillerSource::Unknown);
            word_types.insert(lt.token.word_type());
            match first.entry(lt.token.composite_key()) {
                indexmap::map::Entry::Vacant(e) => {
                    e.insert(idx);
                }
                indexmap::map::Entry::Occupied(e) => {
                    let rep = &tokens[*e.get()].token;
                    if rep.surface() != lt.token.surface() {
                        let (rep_filler, _) = lookup_filler(rep.surface(), self.table, self.codebook);
                        if rep_filler != filler {
                            conflicts.insert(e.index());
                        }
                    }
                }
            }
        }

        let compressed: Vec<Result<(String, VocabEntry)>> = first
            .par_iter()
            .map(|(key, &idx)| {
                let lt = &tokens[idx];
                let c = self.compress(&lt.token).map_err(|e| e.at_line(lt.line))?;
                Ok((
                    key.clone(),
                    VocabEntry {
                        vector: c.vector,
                        component_count: c.component_count,
                        filler_source: c.filler_source,
                        word_type: lt.token.word_type(),
                        surface: lt.token.surface().to_owned(),
                        pos_tag: lt.token.pos_tag().to_owned(),
                        ner_type: lt.token.ner_type().map(str::to_owned),
                    },
                ))
            })
            .collect();
        let entries = compressed.into_iter().collect::<Result<IndexMap<_, _>>>()?;

        let unknown_keys = entries
            .values()
            .filter(|e| e.filler_source == FillerSource::Unknown)
            .count();
        let stats = BuildStats {
            input_tokens: tokens.len(),
            distinct_word_types: word_types.len(),
            distinct_keys: entries.len(),
            unknown_filler_tokens: unknown_tokens,
            unknown_filler_keys: unknown_keys,
            case_variant_conflicts: conflicts.len(),
            growth_ratio: (!word_types.is_empty()).then(|| entries.len() as f64 / word_types.len() as f64),
        };
        Ok(CompressedVocabulary {
            dimension: self.codebook.dimension(),
            codebook_seed: self.codebook.seed(),
            unit_norm: self.options.unit_norm,
            entries,
            stats,
        })
    }
}

/// Compresses a single token; see [`Encoder`] for batch use.
pub fn compress_token(token: &AnnotatedToken, table: &EmbeddingTable, cb: &Codebook) -> Result<(DenseVector, usize)> {
    let c = Encoder::new(cb, table)?.compress(token)?;
    Ok((c.vector, c.component_count))
}

pub fn build_vocabulary(tokens: &[LineToken], table: &EmbeddingTable, cb: &Codebook) -> Result<CompressedVocabulary> {
    Encoder::new(cb, table)?.build_vocabulary(tokens)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub input_tokens: usize,
    pub distinct_word_types: usize,
    pub distinct_keys: usize,
    pub unknown_filler_tokens: usize,
    pub unknown_filler_keys: usize,
    pub case_variant_conflicts: usize,
    /// Composite keys per word type; `None` for an empty stream.
    pub growth_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabEntry {
    pub vector: DenseVector,
    pub component_count: usize,
    pub filler_source: FillerSource,
    pub word_type: String,
    pub surface: String,
    pub pos_tag: String,
    pub ner_type: Option<String>,
}

impl VocabEntry {
    fn metadata(&self) -> EntryMetadata {
        EntryMetadata {
            word_type: self.word_type.clone(),
            surface: self.surface.clone(),
            pos_tag: self.pos_tag.clone(),
            ner_type: self.ner_type.clone(),
            component_count: self.component_count,
            filler_source: self.filler_source,
        }
    }
}

/// Per-key record in the metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryMetadata {
    pub word_type: String,
    pub surface: String,
    pub pos_tag: String,
    pub ner_type: Option<String>,
    pub component_count: usize,
    pub filler_source: FillerSource,
}

pub const METADATA_FORMAT: &str = "holo-embed-vocabulary/1";

/// The JSON sidecar written next to a vocabulary's vector file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyMetadata {
    pub format: String,
    pub generator: String,
    pub dimension: usize,
    pub codebook_seed: u64,
    pub unit_norm: bool,
    pub stats: BuildStats,
    pub entries: IndexMap<String, EntryMetadata>,
}

impl VocabularyMetadata {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let meta: VocabularyMetadata = serde_json::from_str(&text).map_err(|e| Error::Parse {
            field: path.display().to_string(),
            message: e.to_string(),
        })?;
        if meta.format != METADATA_FORMAT {
            return Err(Error::Parse {
                field: "format".into(),
                message: format!("expected {METADATA_FORMAT:?}, found {:?}", meta.format),
            });
        }
        Ok(meta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedVocabulary {
    dimension: usize,
    codebook_seed: u64,
    unit_norm: bool,
    entries: IndexMap<String, VocabEntry>,
    stats: BuildStats,
}

impl CompressedVocabulary {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&VocabEntry> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &VocabEntry)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn vectors(&self) -> Vec<&DenseVector> {
        self.entries.values().map(|e| &e.vector).collect()
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    pub fn metadata(&self) -> VocabularyMetadata {
        VocabularyMetadata {
            format: METADATA_FORMAT.to_owned(),
            generator: crate::GENERATOR.to_owned(),
            dimension: self.dimension,
            codebook_seed: self.codebook_seed,
            unit_norm: self.unit_norm,
            stats: self.stats.clone(),
            entries: self.entries.iter().map(|(k, e)| (k.clone(), e.metadata())).collect(),
        }
    }

    /// Composite keys and vectors as a GloVe-format table.
    pub fn to_table(&self) -> Result<EmbeddingTable> {
        EmbeddingTable::from_entries(
            self.dimension,
            self.entries.iter().map(|(k, e)| (k.clone(), e.vector.clone())),
        )
    }

    pub fn write_vectors<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        write_glove_records(w, self.entries.iter().map(|(k, e)| (k, &e.vector)))
    }

    pub fn metadata_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&self.metadata())
            .map_err(|e| Error::Integrity(format!("serializing metadata: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    /// Writes the vector file and its sidecar, each atomically.
    pub fn save(&self, vectors_path: &Path, metadata_path: &Path) -> Result<()> {
        let meta = self.metadata_json()?;
        write_atomic_with(vectors_path, |w| self.write_vectors(w))?;
        crate::io::write_atomic(metadata_path, meta.as_bytes())
    }

    /// Reassembles a vocabulary from its vector table and sidecar.
    pub fn from_parts(vectors: EmbeddingTable, meta: VocabularyMetadata) -> Result<Self> {
        if vectors.dimension() != meta.dimension {
            return Err(Error::DimensionMismatch {
                expected: meta.dimension,
                found: vectors.dimension(),
            });
        }
        if vectors.len() != meta.entries.len() {
            return Err(Error::Integrity(format!(
                "vector file has {} keys, metadata has {}",
                vectors.len(),
                meta.entries.len()
            )));
        }
        let mut vectors = vectors.entries().clone();
        let entries = meta
            .entries
            .into_iter()
            .map(|(key, m)| {
                let vector = vectors
                    .swap_remove(&key)
                    .ok_or_else(|| Error::Integrity(format!("key {key:?} has metadata but no vector")))?;
                Ok((
                    key,
                    VocabEntry {
                        vector,
                        component_count: m.component_count,
                        filler_source: m.filler_source,
                        word_type: m.word_type,
                        surface: m.surface,
                        pos_tag: m.pos_tag,
                        ner_type: m.ner_type,
                    },
                ))
            })
            .collect::<Result<IndexMap<_, _>>>()?;
        Ok(CompressedVocabulary {
            dimension: meta.dimension,
            codebook_seed: meta.codebook_seed,
            unit_norm: meta.unit_norm,
            entries,
            stats: meta.stats,
        })
    }

    pub fn load(vectors_path: &Path, metadata_path: &Path) -> Result<Self> {
        let meta = VocabularyMetadata::load(metadata_path)?;
        let vectors = EmbeddingTable::load_glove(vectors_path, Some(meta.dimension))?;
        CompressedVocabulary::from_parts(vectors, meta)
    }
}
