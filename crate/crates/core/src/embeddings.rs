//! Pre-trained embedding tables in GloVe text format.
//!
//! One record per line: the word followed by its components, separated by
//! single spaces, no header. A few GloVe releases contain words with inner
//! spaces; once the dimension is known the last `dimension` fields are the
//! vector and everything before them is the word.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::hrr::DenseVector;
use crate::io::write_atomic_with;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: IndexMap<String, DenseVector>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(EmbeddingTable {
            dimension,
            entries: IndexMap::new(),
        })
    }

    pub fn from_entries<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, DenseVector)>,
    {
        let mut table = EmbeddingTable::new(dimension)?;
        for (word, vector) in entries {
            table.insert(word, vector)?;
        }
        Ok(table)
    }

    /// Adds a word. Duplicate words and wrong-length vectors are rejected.
    pub fn insert(&mut self, word: String, vector: DenseVector) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if word.is_empty() {
            return Err(Error::InvalidToken("empty word".into()));
        }
        if self.entries.contains_key(&word) {
            return Err(Error::Integrity(format!("duplicate word {word:?}")));
        }
        self.entries.insert(word, vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&DenseVector> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&String, &DenseVector)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &IndexMap<String, DenseVector> {
        &self.entries
    }

    /// Reads GloVe text. With `dimension == None` the width of the first
    /// record decides.
    pub fn read_glove<R: BufRead>(reader: R, dimension: Option<usize>) -> Result<Self> {
        let mut table: Option<EmbeddingTable> = dimension.map(EmbeddingTable::new).transpose()?;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n', ' ']);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            let table = match table.as_mut() {
                Some(t) => t,
                None => {
                    if fields.len() < 2 {
                        return Err(Error::Integrity("record has no components".into()).at_line(lineno));
                    }
                    table.insert(EmbeddingTable::new(fields.len() - 1)?)
                }
            };
            let (word, vector) = parse_record(&fields, table.dimension).map_err(|e| e.at_line(lineno))?;
            table.insert(word, vector).map_err(|e| e.at_line(lineno))?;
        }
        match table {
            Some(t) => Ok(t),
            None => Err(Error::InsufficientData(
                "embedding file is empty and no dimension was given".into(),
            )),
        }
    }

    pub fn load_glove(path: &Path, dimension: Option<usize>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        EmbeddingTable::read_glove(BufReader::new(file), dimension)
    }

    pub fn write_glove<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        write_glove_records(w, self.entries.iter())
    }

    pub fn save_glove(&self, path: &Path) -> Result<()> {
        write_atomic_with(path, |w| self.write_glove(w))
    }
}

fn parse_record(fields: &[&str], dimension: usize) -> Result<(String, DenseVector)> {
    let found = fields.len().saturating_sub(1);
    if fields.len() < dimension + 1 {
        return Err(Error::Integrity(format!(
            "expected {dimension} components, found {found}"
        )));
    }
    let split = fields.len() - dimension;
    // Extra leading fields are only accepted as part of the word when they
    // cannot be read as numbers; otherwise the record is too long.
    if split > 1 && fields[1..split].iter().any(|f| f.parse::<f64>().is_ok()) {
        return Err(Error::Integrity(format!(
            "expected {dimension} components, found {found}"
        )));
    }
    let word = fields[..split].join(" ");
    let values = fields[split..]
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.parse::<f64>()
                .map_err(|_| Error::Integrity(format!("component {} is not a number: {f:?}", i + 1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let vector = DenseVector::new(values).map_err(|e| Error::Integrity(e.to_string()))?;
    Ok((word, vector))
}

/// Writes `word v1 v2 …` lines with shortest round-trip decimal components.
pub fn write_glove_records<'a, W, I>(w: &mut W, records: I) -> std::io::Result<()>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = (&'a String, &'a DenseVector)>,
{
    for (word, vector) in records {
        w.write_all(word.as_bytes())?;
        for x in vector.iter() {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_infers_dimension() {
        let text = "the 0.1 0.2 0.3\nfish -1 2.5 3e-2\n\n";
        let t = EmbeddingTable::read_glove(text.as_bytes(), None).unwrap();
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("fish").unwrap().as_slice(), &[-1.0, 2.5, 0.03]);
        assert_eq!(t.iter().next().unwrap().0, "the");
    }

    #[test]
    fn words_with_inner_spaces() {
        let text = "a b 1 2\n";
        let t = EmbeddingTable::read_glove(text.as_bytes(), Some(2)).unwrap();
        assert!(t.contains("a b"));
    }

    #[test]
    fn short_record_names_line() {
        let text = "a 1 2 3\nb 1 2\n";
        let err = EmbeddingTable::read_glove(text.as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Line { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn long_record_is_rejected() {
        let err = EmbeddingTable::read_glove("a 1 2 3\n".as_bytes(), Some(2)).unwrap_err();
        assert!(matches!(err, Error::Line { line: 1, .. }));
    }

    #[test]
    fn bad_number_and_duplicates() {
        assert!(EmbeddingTable::read_glove("a 1 x\n".as_bytes(), None).is_err());
        assert!(EmbeddingTable::read_glove("a 1 nan\n".as_bytes(), None).is_err());
        let err = EmbeddingTable::read_glove("a 1 2\na 3 4\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Line { line: 2, .. }));
    }

    #[test]
    fn empty_input() {
        assert!(EmbeddingTable::read_glove("".as_bytes(), None).is_err());
        let t = EmbeddingTable::read_glove("".as_bytes(), Some(4)).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn write_then_read_is_exact() {
        let mut t = EmbeddingTable::new(3).unwrap();
        t.insert("x".into(), DenseVector::new(vec![0.1, -1.0 / 3.0, 1e-7]).unwrap()).unwrap();
        let mut buf = Vec::new();
        t.write_glove(&mut buf).unwrap();
        let back = EmbeddingTable::read_glove(buf.as_slice(), Some(3)).unwrap();
        assert_eq!(back, t);
    }
}
