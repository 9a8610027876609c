//! Attribute recovery from compressed vectors.
//!
//! Unbinding reverses the frame construction: scale by `m`, subtract the
//! frame label, correlate with the slot label. What remains is the slot's
//! filler plus crosstalk from the other bindings, which cleanup against
//! the relevant codebook table removes.

use serde::{Deserialize, Serialize};

use crate::codebook::{cleanup, Codebook, Match, Slot};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::hrr::{unbind, DenseVector, Strategy};

/// `correlate(slot_label, m·compressed − frame_label)`.
pub fn unbind_slot(
    compressed: &DenseVector,
    slot_label: &DenseVector,
    m: usize,
    frame_label: &DenseVector,
) -> Result<DenseVector> {
    if m == 0 {
        return Err(Error::InvalidDivisor);
    }
    let residual = compressed.scale(m as f64).sub(frame_label)?;
    Ok(unbind(slot_label, &residual, Strategy::Auto)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedToken {
    pub pos_tag: Match,
    pub ner_type: Option<Match>,
    pub token: Option<Match>,
}

/// Recovers the POS tag, and the NER type when `m == 4`.
pub fn decode_attributes(compressed: &DenseVector, m: usize, cb: &Codebook) -> Result<DecodedToken> {
    check_m(m)?;
    let frame = cb.frame_label();
    let pos_probe = unbind_slot(compressed, cb.slot_label(Slot::Pos), m, frame)?;
    let pos_tag = cleanup(&pos_probe, cb.pos_fillers())?;
    let ner_type = if m == 4 {
        let ent_probe = unbind_slot(compressed, cb.slot_label(Slot::Ent), m, frame)?;
        Some(cleanup(&ent_probe, cb.ner_fillers())?)
    } else {
        None
    };
    Ok(DecodedToken {
        pos_tag,
        ner_type,
        token: None,
    })
}

fn check_m(m: usize) -> Result<()> {
    if m == 3 || m == 4 {
        Ok(())
    } else {
        Err(Error::Integrity(format!("component count must be 3 or 4, got {m}")))
    }
}

/// Cleans up the TOK-slot unbinding against `table`. No threshold is
/// applied; the caller judges the similarity.
pub fn decode_token_identity(compressed: &DenseVector, m: usize, cb: &Codebook, table: &EmbeddingTable) -> Result<Match> {
    decode_token_identity_among(compressed, m, cb, table.iter())
}

/// Token-identity decoding over an arbitrary candidate set.
pub fn decode_token_identity_among<'a, K, I>(compressed: &DenseVector, m: usize, cb: &Codebook, candidates: I) -> Result<Match>
where
    K: AsRef<str> + 'a,
    I: IntoIterator<Item = (&'a K, &'a DenseVector)>,
{
    check_m(m)?;
    let probe = unbind_slot(compressed, cb.slot_label(Slot::Tok), m, cb.frame_label())?;
    cleanup(&probe, candidates)
}

/// Cleanup similarity above which an ENT-slot unbinding counts as carrying
/// an NER filler.
pub const ENTITY_PRESENCE_THRESHOLD: f64 = 0.3;

/// Guesses `m` for a vector without metadata: unbind the ENT slot as if
/// `m = 4` and check whether any NER filler stands out. Returns the guess
/// and the best NER similarity. Reliable when fillers are of comparable
/// norm to the labels; large-norm embeddings swamp the ENT signal.
pub fn infer_component_count(compressed: &DenseVector, cb: &Codebook) -> Result<(usize, f64)> {
    let probe = unbind_slot(compressed, cb.slot_label(Slot::Ent), 4, cb.frame_label())?;
    let best = cleanup(&probe, cb.ner_fillers())?;
    let m = if best.similarity >= ENTITY_PRESENCE_THRESHOLD { 4 } else { 3 };
    Ok((m, best.similarity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{compress_token, AnnotatedToken};
    use crate::hrr::{circular_convolve, random_vector, seeded_rng, superpose};

    #[test]
    fn ibm_decodes() {
        let cb = Codebook::with_defaults(300, 4).unwrap();
        let mut rng = seeded_rng(5);
        let mut table = EmbeddingTable::new(300).unwrap();
        table.insert("IBM".into(), random_vector(&mut rng, 300).unwrap()).unwrap();
        let t = AnnotatedToken::new("IBM", "NNP", Some("ORG".into())).unwrap();
        let (v, m) = compress_token(&t, &table, &cb).unwrap();
        let d = decode_attributes(&v, m, &cb).unwrap();
        assert_eq!(d.pos_tag.key, "NNP");
        assert_eq!(d.ner_type.unwrap().key, "ORG");
        assert_eq!(decode_token_identity(&v, m, &cb, &table).unwrap().key, "IBM");
        assert_eq!(infer_component_count(&v, &cb).unwrap().0, 4);
    }

    #[test]
    fn three_component_entry_has_no_ner() {
        let cb = Codebook::with_defaults(300, 4).unwrap();
        let table = EmbeddingTable::new(300).unwrap();
        let t = AnnotatedToken::new("zzz", "VB", None).unwrap();
        let (v, m) = compress_token(&t, &table, &cb).unwrap();
        let d = decode_attributes(&v, m, &cb).unwrap();
        assert!(d.ner_type.is_none());
        assert_eq!(d.pos_tag.key, "VB");
        assert_eq!(infer_component_count(&v, &cb).unwrap().0, 3);
    }

    #[test]
    fn rejects_bad_component_count() {
        let cb = Codebook::with_defaults(16, 4).unwrap();
        let v = random_vector(&mut seeded_rng(1), 16).unwrap();
        assert!(decode_attributes(&v, 2, &cb).is_err());
        assert!(unbind_slot(&v, cb.frame_label(), 0, cb.frame_label()).is_err());
    }

    #[test]
    fn lone_binding_recovers_filler() {
        let n = 300;
        let mut rng = seeded_rng(21);
        let mut wins = 0;
        for _ in 0..50 {
            let frame = random_vector(&mut rng, n).unwrap();
            let slot = random_vector(&mut rng, n).unwrap();
            let filler = random_vector(&mut rng, n).unwrap();
            let bound = circular_convolve(&slot, &filler).unwrap();
            let c = superpose(&[frame.clone(), bound], 2).unwrap();
            let probe = unbind_slot(&c, &slot, 2, &frame).unwrap();
            let target = crate::hrr::cosine_similarity(&probe, &filler).unwrap();
            let best_distractor = (0..100)
                .map(|_| {
                    let d = random_vector(&mut rng, n).unwrap();
                    crate::hrr::cosine_similarity(&probe, &d).unwrap()
                })
                .fold(f64::MIN, f64::max);
            wins += usize::from(target > best_distractor);
        }
        assert_eq!(wins, 50);
    }
}
