//! Prints the Monte-Carlo distributions used to pin test thresholds.

use std::path::Path;

use holo_embed::analysis::sample_orthogonality;
use holo_embed::codebook::{cleanup, pairwise_summary, Codebook, Slot, DEFAULT_SEED};
use holo_embed::decoder::{decode_attributes, unbind_slot};
use holo_embed::encoder::{number_tokens, Encoder};
use holo_embed::hrr::{circular_convolve, circular_correlate, cosine_similarity, random_vector, seeded_rng};
use holo_embed::synthetic::{annotate_words, random_stream, random_table, CorpusProfile};
use holo_embed::EmbeddingTable;

fn quantiles(mut xs: Vec<f64>) -> String {
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[((xs.len() - 1) as f64 * p) as usize];
    format!(
        "min {:.4} p01 {:.4} p50 {:.4} mean {:.4} max {:.4}",
        xs[0],
        q(0.01),
        q(0.5),
        xs.iter().sum::<f64>() / xs.len() as f64,
        xs[xs.len() - 1]
    )
}

fn main() {
    let n = 300;
    let mut rng = seeded_rng(1);
    let recov: Vec<f64> = (0..1000)
        .map(|_| {
            let a = random_vector(&mut rng, n).unwrap();
            let x = random_vector(&mut rng, n).unwrap();
            let t = circular_convolve(&a, &x).unwrap();
            cosine_similarity(&circular_correlate(&a, &t).unwrap(), &x).unwrap()
        })
        .collect();
    println!("correlate recovery cosine: {}", quantiles(recov));

    let cb = Codebook::with_defaults(300, DEFAULT_SEED).unwrap();
    let (max, frac) = pairwise_summary(&cb, 0.25).unwrap();
    println!("default codebook: max |cos| {max:.4}, fraction below 0.25 {frac:.4}");

    let mut sq = Vec::new();
    let mut pos_wrong = Vec::new();
    let mut baseline = Vec::new();
    for dim in [32, 100, 300] {
        for seed in 0..3u64 {
            let cb = Codebook::with_defaults(dim, 100 + seed).unwrap();
            let mut rng = seeded_rng(200 + seed);
            let table = random_table(&mut rng, 1000, dim).unwrap();
            let words: Vec<String> = table.iter().map(|(k, _)| k.clone()).collect();
            let stream = random_stream(&mut rng, &words, &cb, 1000, CorpusProfile::UNIFORM).unwrap();
            let vocab = Encoder::new(&cb, &table).unwrap().build_vocabulary(&number_tokens(stream)).unwrap();
            let (mut pos_ok, mut ner_ok, mut ner_n) = (0, 0, 0);
            for (_, e) in vocab.iter() {
                let d = decode_attributes(&e.vector, e.component_count, &cb).unwrap();
                pos_ok += usize::from(d.pos_tag.key == e.pos_tag);
                if let Some(ner) = &e.ner_type {
                    ner_n += 1;
                    ner_ok += usize::from(d.ner_type.unwrap().key == *ner);
                }
                if dim == 300 {
                    sq.push(e.vector.norm().powi(2) * e.component_count as f64);
                    let probe = unbind_slot(&e.vector, cb.slot_label(Slot::Tok), e.component_count, cb.frame_label()).unwrap();
                    pos_wrong.push(cleanup(&probe, cb.pos_fillers()).unwrap().similarity);
                    let q = random_vector(&mut rng, dim).unwrap();
                    baseline.push(cleanup(&q, cb.pos_fillers()).unwrap().similarity);
                }
            }
            println!(
                "n={dim} seed={seed}: {} keys, POS acc {:.4}, NER acc {:.4} ({ner_n})",
                vocab.len(),
                pos_ok as f64 / vocab.len() as f64,
                ner_ok as f64 / ner_n as f64
            );
        }
    }
    println!("m·‖c‖² at n=300: {}", quantiles(sq));
    println!("wrong-slot cleanup sim: {}", quantiles(pos_wrong));
    println!("random baseline sim:    {}", quantiles(baseline));

    let glove = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/glove_6b_100d_5k.txt");
    let table = EmbeddingTable::load_glove(&glove, None).unwrap();
    let words: Vec<String> = table.iter().map(|(k, _)| k.clone()).collect();
    for seed in 0..5u64 {
        let cb = Codebook::with_defaults(table.dimension(), DEFAULT_SEED + seed).unwrap();
        let toks = annotate_words(&mut seeded_rng(seed), &words, &cb, CorpusProfile::NATURAL).unwrap();
        let vocab = Encoder::new(&cb, &table).unwrap().build_vocabulary(&number_tokens(toks)).unwrap();
        let vs = vocab.vectors();
        let raw: Vec<_> = table.iter().map(|(_, v)| v).collect();
        let r = sample_orthogonality(&vs, 100_000, 0.25, seed).unwrap();
        let rr = sample_orthogonality(&raw, 100_000, 0.25, seed).unwrap();
        println!(
            "glove fixture seed {seed}: {} keys, compressed fraction {:.4} ({} pairs), raw fraction {:.4}",
            vocab.len(),
            r.fraction_below,
            r.sample_pairs,
            rr.fraction_below
        );
    }
}
