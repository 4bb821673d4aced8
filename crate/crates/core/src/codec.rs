//! word2vec binary and text codecs.
//!
//! Binary layout: an ASCII header `<count> <dims>\n`, then for every word the
//! token bytes, one space, and `dims` little-endian `f32`s. A single newline
//! after each vector is written and tolerated on read.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EmbeddingModel, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFormat {
    #[default]
    Binary,
    Text,
}

impl FromStr for ModelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "binary" | "bin" => Ok(ModelFormat::Binary),
            "text" | "txt" => Ok(ModelFormat::Text),
            other => Err(format!("unknown model format `{other}` (expected binary or text)")),
        }
    }
}

impl fmt::Display for ModelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFormat::Binary => "binary",
            ModelFormat::Text => "text",
        })
    }
}

/// Read a word2vec binary model. `max_rows` keeps only the first rows of the file.
pub fn load_word2vec_binary<R: BufRead>(reader: &mut R, max_rows: Option<usize>) -> Result<EmbeddingModel> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let header = String::from_utf8_lossy(&header);
    let (count, dims) = parse_header(&header)
        .ok_or_else(|| Error::MalformedHeader(header.trim_end().to_string()))?;
    if count == 0 || dims == 0 {
        return Err(Error::EmptyModel);
    }

    let rows = max_rows.map_or(count, |m| m.min(count));
    let mut vocab = Vocabulary::with_capacity(rows);
    let mut raw = Vec::with_capacity(rows * dims);
    let mut payload = vec![0u8; dims * 4];
    let mut token = Vec::new();

    for found in 0..rows {
        let truncated = Error::TruncatedPayload { expected: count, found };
        token.clear();
        if !read_token(reader, &mut token)? {
            return Err(truncated);
        }
        if let Err(e) = reader.read_exact(&mut payload) {
            return Err(if e.kind() == io::ErrorKind::UnexpectedEof { truncated } else { e.into() });
        }
        let token = String::from_utf8(token.clone())
            .unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned());
        vocab.push(token)?;
        raw.extend(
            payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
        );
    }

    EmbeddingModel::new(vocab, dims, raw)
}

/// Read one space-terminated token, skipping the optional newline left over
/// from the previous vector. Returns `false` at end of input.
fn read_token<R: BufRead>(reader: &mut R, token: &mut Vec<u8>) -> Result<bool> {
    loop {
        let buf = reader.fill_buf()?;
        match buf.first() {
            None => return Ok(false),
            Some(b'\n') | Some(b'\r') => reader.consume(1),
            Some(_) => break,
        }
    }
    reader.read_until(b' ', token)?;
    if token.last() != Some(&b' ') {
        return Ok(false);
    }
    token.pop();
    if token.is_empty() || token.iter().any(u8::is_ascii_whitespace) {
        return Err(Error::InvalidToken(String::from_utf8_lossy(token).into_owned()));
    }
    Ok(true)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut fields = line.split_ascii_whitespace();
    let count = fields.next()?.parse().ok()?;
    let dims = fields.next()?.parse().ok()?;
    fields.next().is_none().then_some((count, dims))
}

/// Read a word2vec text model (optional `<count> <dims>` header line).
pub fn load_word2vec_text<R: BufRead>(reader: &mut R, max_rows: Option<usize>) -> Result<EmbeddingModel> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)))
        .filter(|line| !matches!(line, Ok((_, l)) if l.trim().is_empty()))
        .peekable();

    let mut declared = None;
    let mut dims = None;
    if let Some(Ok((_, first))) = lines.peek() {
        if let Some((count, d)) = parse_header(first) {
            let first = first.clone();
            lines.next();
            // "<count> <dims>" is a header unless it is really a 1-d data row.
            match lines.peek() {
                Some(Ok((_, next))) if next.split_ascii_whitespace().count() != d + 1 => {
                    let mut fields = first.split_ascii_whitespace();
                    let token = fields.next().unwrap_or_default().to_string();
                    let value = fields.next().unwrap_or_default().to_string();
                    return read_text_rows(Some((1, token, vec![value])), lines, None, Some(1), max_rows);
                }
                _ => {
                    if count == 0 || d == 0 {
                        return Err(Error::EmptyModel);
                    }
                    declared = Some(count);
                    dims = Some(d);
                }
            }
        }
    }
    read_text_rows(None, lines, declared, dims, max_rows)
}

fn read_text_rows<I>(
    first: Option<(usize, String, Vec<String>)>,
    lines: I,
    declared: Option<usize>,
    mut dims: Option<usize>,
    max_rows: Option<usize>,
) -> Result<EmbeddingModel>
where
    I: Iterator<Item = io::Result<(usize, String)>>,
{
    let limit = match (declared, max_rows) {
        (Some(c), Some(m)) => Some(c.min(m)),
        (c, m) => c.or(m),
    };
    let mut vocab = Vocabulary::new();
    let mut raw = Vec::new();

    if let Some((line_no, token, values)) = first {
        let values: Vec<&str> = values.iter().map(String::as_str).collect();
        push_text_row(&mut vocab, &mut raw, &mut dims, line_no, token, &values)?;
    }
    for line in lines {
        if limit.is_some_and(|l| vocab.len() >= l) {
            break;
        }
        let (line_no, line) = line?;
        let mut fields = line.split_ascii_whitespace();
        let token = fields.next().unwrap_or_default().to_string();
        let values: Vec<&str> = fields.collect();
        push_text_row(&mut vocab, &mut raw, &mut dims, line_no, token, &values)?;
    }

    if let Some(count) = declared {
        let expected = max_rows.map_or(count, |m| m.min(count));
        if vocab.len() < expected {
            return Err(Error::TruncatedPayload { expected: count, found: vocab.len() });
        }
    }
    EmbeddingModel::new(vocab, dims.unwrap_or(0), raw)
}

fn push_text_row(
    vocab: &mut Vocabulary,
    raw: &mut Vec<f32>,
    dims: &mut Option<usize>,
    line_no: usize,
    token: String,
    values: &[&str],
) -> Result<()> {
    let expected = *dims.get_or_insert(values.len());
    if values.len() != expected || expected == 0 {
        return Err(Error::InconsistentColumns {
            line: line_no,
            expected: expected + 1,
            found: values.len() + 1,
        });
    }
    vocab.push(token)?;
    for field in values {
        let v: f32 = field.parse().map_err(|_| Error::NonNumeric {
            line: line_no,
            field: field.to_string(),
        })?;
        raw.push(v);
    }
    Ok(())
}

/// Serialize `model` in the requested format.
pub fn save_model<W: Write>(model: &EmbeddingModel, format: ModelFormat, writer: &mut W) -> Result<()> {
    writeln!(writer, "{} {}", model.len(), model.dims())?;
    for (id, token) in model.vocab().words().iter().enumerate() {
        let row = model.row(id);
        match format {
            ModelFormat::Binary => {
                writer.write_all(token.as_bytes())?;
                writer.write_all(b" ")?;
                for v in row {
                    writer.write_all(&v.to_le_bytes())?;
                }
                writer.write_all(b"\n")?;
            }
            ModelFormat::Text => {
                writer.write_all(token.as_bytes())?;
                for v in row {
                    // `Display` for f32 prints the shortest string that parses back exactly.
                    write!(writer, " {v}")?;
                }
                writer.write_all(b"\n")?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn load_path(path: impl AsRef<Path>, format: ModelFormat, max_rows: Option<usize>) -> Result<EmbeddingModel> {
    let mut reader = BufReader::with_capacity(1 << 20, File::open(path)?);
    match format {
        ModelFormat::Binary => load_word2vec_binary(&mut reader, max_rows),
        ModelFormat::Text => load_word2vec_text(&mut reader, max_rows),
    }
}

pub fn save_path(model: &EmbeddingModel, format: ModelFormat, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::with_capacity(1 << 20, File::create(path)?);
    save_model(model, format, &mut writer)
}
