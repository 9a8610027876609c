use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use holo_embed::analysis::{classify_neighborhoods, sample_orthogonality, VectorSpace, WordProjectedSpace};
use holo_embed::codebook::{default_ner_types, default_pos_tags, pairwise_summary, parse_tag_list, Codebook, Match};
use holo_embed::decoder::{decode_attributes, decode_token_identity_among, infer_component_count};
use holo_embed::encoder::{read_annotations, BuildStats, CompressedVocabulary, Encoder, EncoderOptions};
use holo_embed::hrr::DenseVector;
use holo_embed::io::write_atomic;
use holo_embed::{EmbeddingTable, GENERATOR};
use rayon::prelude::*;
use serde::Serialize;

use crate::{BuildCodebookArgs, CompressArgs, DecodeArgs, NeighborhoodArgs, OrthogonalityArgs};

/// Candidate key under which the unknown-token vector is offered to
/// token-identity cleanup.
const UNKNOWN_CANDIDATE: &str = "<unknown>";

/// `<vocab>.meta.json` next to the vocabulary file.
pub(crate) fn default_meta_path(vocabulary: &Path) -> PathBuf {
    let mut name = OsString::from(vocabulary.as_os_str());
    name.push(".meta.json");
    PathBuf::from(name)
}

fn read_tags(path: Option<&Path>, default: fn() -> Vec<String>) -> Result<Vec<String>> {
    match path {
        None => Ok(default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading tag list {}", p.display()))?;
            Ok(parse_tag_list(&text))
        }
    }
}

fn load_codebook(path: &Path) -> Result<Codebook> {
    Codebook::load(path).with_context(|| format!("loading codebook {}", path.display()))
}

fn load_table(path: &Path, dimension: Option<usize>) -> Result<EmbeddingTable> {
    EmbeddingTable::load_glove(path, dimension).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn build_codebook(args: BuildCodebookArgs) -> Result<()> {
    let pos = read_tags(args.pos_tags.as_deref(), default_pos_tags)?;
    let ner = read_tags(args.ner_types.as_deref(), default_ner_types)?;
    let cb = Codebook::build(&pos, &ner, args.dim, args.seed)?;
    let (max_abs, below) = pairwise_summary(&cb, 0.25)?;
    cb.save(&args.output)?;
    println!(
        "wrote {} vectors ({} POS tags, {} NER types, dimension {}, seed {}) to {}",
        cb.vector_count(),
        pos.len(),
        ner.len(),
        cb.dimension(),
        cb.seed(),
        args.output.display()
    );
    println!("max pairwise |cosine| {max_abs:.4}; pairs with |cosine| < 0.25: {:.2}%", below * 100.0);
    Ok(())
}

fn print_stats(stats: &BuildStats) {
    println!("input tokens          {}", stats.input_tokens);
    println!("word types            {}", stats.distinct_word_types);
    println!("composite keys        {}", stats.distinct_keys);
    match stats.growth_ratio {
        Some(g) => println!("growth ratio          {g:.4}"),
        None => println!("growth ratio          null"),
    }
    println!("unknown-filler tokens {}", stats.unknown_filler_tokens);
    println!("unknown-filler keys   {}", stats.unknown_filler_keys);
    println!("case-variant conflicts {}", stats.case_variant_conflicts);
}

pub(crate) fn compress(args: CompressArgs) -> Result<()> {
    let cb = load_codebook(&args.codebook)?;
    let table = load_table(&args.embeddings, None)?;
    if table.dimension() != cb.dimension() {
        bail!(
            "dimension mismatch: codebook {} has dimension {}, embeddings {} have dimension {}",
            args.codebook.display(),
            cb.dimension(),
            args.embeddings.display(),
            table.dimension()
        );
    }
    let tokens = read_annotations(&args.annotations).with_context(|| format!("reading {}", args.annotations.display()))?;
    let options = EncoderOptions {
        unit_norm: args.unit_norm,
        ..EncoderOptions::default()
    };
    let vocab = Encoder::with_options(&cb, &table, options)?.build_vocabulary(&tokens)?;
    let meta = args.meta.unwrap_or_else(|| default_meta_path(&args.output));
    vocab.save(&args.output, &meta)?;
    println!("wrote {} and {}", args.output.display(), meta.display());
    print_stats(vocab.stats());
    Ok(())
}

#[derive(Serialize)]
struct Correctness {
    pos_tag: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    ner_type: Option<bool>,
}

#[derive(Serialize)]
struct DecodedEntry {
    key: String,
    component_count: usize,
    pos_tag: Match,
    ner_type: Option<Match>,
    #[serde(skip_serializing_if = "Option::is_none")]
    token: Option<Match>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correct: Option<Correctness>,
}

#[derive(Serialize)]
struct Accuracy {
    entries: usize,
    pos_tag: f64,
    ner_entries: usize,
    ner_type: Option<f64>,
}

#[derive(Serialize)]
struct DecodeReport {
    generator: String,
    codebook_seed: u64,
    dimension: usize,
    /// "metadata" when component counts came from the sidecar, else "inferred".
    component_counts: &'static str,
    accuracy: Option<Accuracy>,
    entries: Vec<DecodedEntry>,
}

struct Target<'a> {
    key: &'a str,
    vector: &'a DenseVector,
    /// Known component count and ground truth, from the sidecar.
    truth: Option<(usize, &'a str, Option<&'a str>)>,
}

fn decode_one(target: &Target, cb: &Codebook, candidates: Option<&[(String, DenseVector)]>) -> holo_embed::Result<DecodedEntry> {
    let m = match target.truth {
        Some((m, _, _)) => m,
        None => infer_component_count(target.vector, cb)?.0,
    };
    let decoded = decode_attributes(target.vector, m, cb)?;
    let token = candidates
        .map(|c| decode_token_identity_among(target.vector, m, cb, c.iter().map(|(k, v)| (k, v))))
        .transpose()?;
    let correct = target.truth.map(|(_, pos, ner)| Correctness {
        pos_tag: decoded.pos_tag.key == pos,
        ner_type: ner.map(|n| decoded.ner_type.as_ref().is_some_and(|d| d.key == n)),
    });
    Ok(DecodedEntry {
        key: target.key.to_owned(),
        component_count: m,
        pos_tag: decoded.pos_tag,
        ner_type: decoded.ner_type,
        token,
        correct,
    })
}

pub(crate) fn decode(args: DecodeArgs) -> Result<()> {
    let cb = load_codebook(&args.codebook)?;
    let meta_path = match args.meta {
        Some(p) => Some(p),
        None => Some(default_meta_path(&args.vocabulary)).filter(|p| p.exists()),
    };
    let vocab = match &meta_path {
        Some(meta) => Some(
            CompressedVocabulary::load(&args.vocabulary, meta)
                .with_context(|| format!("loading {} with {}", args.vocabulary.display(), meta.display()))?,
        ),
        None => None,
    };
    let table = match &vocab {
        Some(_) => None,
        None => Some(load_table(&args.vocabulary, Some(cb.dimension()))?),
    };
    let dimension = vocab.as_ref().map_or_else(|| table.as_ref().map_or(0, |t| t.dimension()), |v| v.dimension());
    if dimension != cb.dimension() {
        bail!("dimension mismatch: codebook has {}, vocabulary has {dimension}", cb.dimension());
    }

    let candidates: Option<Vec<(String, DenseVector)>> = match &args.embeddings {
        Some(path) => {
            let t = load_table(path, Some(cb.dimension()))?;
            let mut c: Vec<(String, DenseVector)> = t.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            c.push((UNKNOWN_CANDIDATE.to_owned(), cb.unknown_token().clone()));
            Some(c)
        }
        None => None,
    };

    let targets: Vec<Target> = match (&vocab, &table) {
        (Some(v), _) => v
            .iter()
            .map(|(k, e)| Target {
                key: k,
                vector: &e.vector,
                truth: Some((e.component_count, e.pos_tag.as_str(), e.ner_type.as_deref())),
            })
            .collect(),
        (None, Some(t)) => t.iter().map(|(k, v)| Target { key: k, vector: v, truth: None }).collect(),
        (None, None) => unreachable!(),
    };
    let entries = targets
        .par_iter()
        .map(|t| decode_one(t, &cb, candidates.as_deref()))
        .collect::<holo_embed::Result<Vec<_>>>()?;

    let accuracy = vocab.as_ref().map(|_| {
        let pos_ok = entries.iter().filter(|e| e.correct.as_ref().is_some_and(|c| c.pos_tag)).count();
        let ner: Vec<bool> = entries.iter().filter_map(|e| e.correct.as_ref().and_then(|c| c.ner_type)).collect();
        Accuracy {
            entries: entries.len(),
            pos_tag: if entries.is_empty() { 0.0 } else { pos_ok as f64 / entries.len() as f64 },
            ner_entries: ner.len(),
            ner_type: (!ner.is_empty()).then(|| ner.iter().filter(|&&b| b).count() as f64 / ner.len() as f64),
        }
    });
    let report = DecodeReport {
        generator: GENERATOR.to_owned(),
        codebook_seed: cb.seed(),
        dimension,
        component_counts: if vocab.is_some() { "metadata" } else { "inferred" },
        accuracy,
        entries,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_atomic(&args.output, json.as_bytes())?;

    println!("decoded {} keys into {}", report.entries.len(), args.output.display());
    match &report.accuracy {
        Some(a) => {
            println!("POS accuracy {:.4} over {} keys", a.pos_tag, a.entries);
            match a.ner_type {
                Some(n) => println!("NER accuracy {n:.4} over {} keys", a.ner_entries),
                None => println!("NER accuracy n/a (no entity-bearing keys)"),
            }
        }
        None => println!("no metadata sidecar: component counts inferred, accuracy not reported"),
    }
    Ok(())
}

pub(crate) fn orthogonality(args: OrthogonalityArgs) -> Result<()> {
    let table = load_table(&args.vocabulary, None)?;
    let vectors: Vec<&DenseVector> = table.iter().map(|(_, v)| v).collect();
    let report = sample_orthogonality(&vectors, args.sample_size, args.threshold, args.seed)?;
    write_atomic(&args.output, report.to_json()?.as_bytes())?;
    println!(
        "{} pairs from {} keys{}; |cosine| < {}: {:.4}; mean |cosine| {:.4}; max {:.4}",
        report.sample_pairs,
        report.vocabulary_size,
        if report.clamped { " (sample size clamped)" } else { "" },
        report.threshold,
        report.fraction_below,
        report.mean_abs_cosine,
        report.max_abs_cosine
    );
    println!("wrote {}", args.output.display());
    Ok(())
}

pub(crate) fn read_cores(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading cores {}", path.display()))?;
    let cores: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect();
    if cores.is_empty() {
        bail!("{} lists no core words", path.display());
    }
    Ok(cores)
}

pub(crate) fn neighborhoods(args: NeighborhoodArgs) -> Result<()> {
    let cores = read_cores(&args.cores)?;
    let table = load_table(&args.embeddings, None)?;
    let meta = args.meta.unwrap_or_else(|| default_meta_path(&args.vocabulary));
    let vocab = CompressedVocabulary::load(&args.vocabulary, &meta)
        .with_context(|| format!("loading {} with {}", args.vocabulary.display(), meta.display()))?;
    let original = VectorSpace::from_table(&table)?;
    let compressed = WordProjectedSpace::from_vocabulary(&vocab)?;
    for core in &cores {
        if !original.contains(core) {
            bail!("core word {core:?} is not in the original embeddings {}", args.embeddings.display());
        }
        if !holo_embed::analysis::NeighborSource::contains_word(&compressed, core) {
            bail!("core word {core:?} is not in the compressed vocabulary {}", args.vocabulary.display());
        }
    }
    let report = classify_neighborhoods(&original, &compressed, &cores, args.k)?;
    write_atomic(&args.output, report.to_json()?.as_bytes())?;
    let f = report.fractions;
    println!(
        "{} cores, k = {}: same position {:.4}, shifted {:.4}, disjoint {:.4}",
        report.cores.len(),
        report.k,
        f.same_position,
        f.shifted,
        f.disjoint
    );
    let r = report.reference_fractions;
    println!(
        "reference split at full scale: {:.2} / {:.2} / {:.2}",
        r.same_position, r.shifted, r.disjoint
    );
    println!("wrote {}", args.output.display());
    Ok(())
}
