//! Holographically compressed word embeddings.
//!
//! A token's pre-trained embedding, part-of-speech tag and named-entity
//! type are bound into slots of a frame with circular convolution and
//! superposed into one vector of the embedding's own dimension. The crate
//! covers the vector algebra ([`hrr`]), seeded label vectors ([`codebook`]),
//! vocabulary construction ([`encoder`]), attribute recovery ([`decoder`])
//! and the orthogonality and neighborhood analyses ([`analysis`]).
//!
//! ```
//! use holo_embed::{AnnotatedToken, Codebook, EmbeddingTable, Encoder, decode_attributes};
//!
//! let cb = Codebook::with_defaults(300, 7).unwrap();
//! let table = EmbeddingTable::new(300).unwrap();
//! let token = AnnotatedToken::new("IBM", "NNP", Some("ORG".into())).unwrap();
//! let encoded = Encoder::new(&cb, &table).unwrap().compress(&token).unwrap();
//! assert_eq!(encoded.component_count, 4);
//!
//! let decoded = decode_attributes(&encoded.vector, 4, &cb).unwrap();
//! assert_eq!(decoded.pos_tag.key, "NNP");
//! ```

pub mod analysis;
pub mod codebook;
pub mod decoder;
pub mod embeddings;
pub mod encoder;
pub mod error;
pub mod hrr;
pub mod io;
pub mod synthetic;

pub use analysis::{
    classify_neighborhoods, exhaustive_orthogonality, k_nearest, sample_orthogonality, NeighborhoodReport,
    OrthogonalityReport, VectorSpace, WordProjectedSpace,
};
pub use codebook::{cleanup, Codebook, Match, Slot};
pub use decoder::{decode_attributes, decode_token_identity, unbind_slot, DecodedToken};
pub use embeddings::EmbeddingTable;
pub use encoder::{
    build_vocabulary, composite_key, compress_token, lookup_filler, AnnotatedToken, CompressedVocabulary, Encoder,
    FillerSource, LineToken,
};
pub use error::{Error, Result};
pub use hrr::{
    circular_convolve, circular_convolve_fft, circular_correlate, cosine_similarity, random_vector, superpose,
    DenseVector,
};

/// Version string written into every generated document.
pub const GENERATOR: &str = concat!("holo-embed ", env!("CARGO_PKG_VERSION"));
