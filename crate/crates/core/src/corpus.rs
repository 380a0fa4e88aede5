//! Comment-CSV ingestion, tokenization, and corpus frequency statistics.
//!
//! The CSV side is deliberately forgiving: crawled comment exports are dirty,
//! so optional fields that fail to parse become absent instead of aborting the
//! run. Only a missing text column or broken CSV framing is fatal.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Size of the default high-frequency word set used for co-occurrence stats.
pub const DEFAULT_HIGH_FREQUENCY_WORDS: usize = 200;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("text column `{0}` not found in CSV header")]
    MissingTextColumn(String),
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },
    #[error("corpus is empty; frequency statistics are undefined")]
    EmptyCorpus,
    #[error("word `{0}` not present in frequency table")]
    UnknownWord(String),
    #[error("high-frequency word set is empty")]
    EmptyHighFrequencySet,
    #[error("no document contains a high-frequency word; pair rate is undefined")]
    NoHighFrequencyDocuments,
    #[error("unknown tokenize mode `{0}`; expected `pretokenized` or `cjk-chars`")]
    UnknownTokenizeMode(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// One parsed comment row: user metadata plus the comment text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentRecord {
    pub nickname: String,
    /// Age in years, kept only when parseable and within [0, 150].
    pub age: Option<u32>,
    /// 0 = female, 1 = male.
    pub gender: Option<u8>,
    pub likes: u64,
    pub text: String,
}

/// Maps logical fields to the column names used by a particular CSV export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub nickname: String,
    pub age: String,
    pub gender: String,
    pub likes: String,
    pub text: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            nickname: "nickname".into(),
            age: "age".into(),
            gender: "gender".into(),
            likes: "likes".into(),
            text: "comment".into(),
        }
    }
}

/// Accepted spellings for the binarized gender field.
fn normalize_gender(raw: &str) -> Option<u8> {
    match raw.trim().to_lowercase().as_str() {
        "0" | "female" | "f" | "女" => Some(0),
        "1" | "male" | "m" | "男" => Some(1),
        _ => None,
    }
}

/// Parses a comment CSV into records. The text column is required; every
/// other column is optional and parsed leniently. Rows whose text is empty
/// are dropped, so the result never contains a record with empty text.
pub fn parse_comments<R: Read>(
    reader: R,
    schema: &CsvSchema,
) -> Result<Vec<CommentRecord>, CorpusError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let headers = csv_reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    let column = |name: &str| headers.iter().position(|h| h == name);

    let text_idx = column(&schema.text).ok_or_else(|| {
        CorpusError::MissingTextColumn(schema.text.clone())
    })?;
    let nickname_idx = column(&schema.nickname);
    let age_idx = column(&schema.age);
    let gender_idx = column(&schema.gender);
    let likes_idx = column(&schema.likes);

    let mut records = Vec::new();
    for row in csv_reader.records() {
        let row = row.map_err(|e| csv_error(&e))?;
        let field = |idx: Option<usize>| idx.and_then(|i| row.get(i)).unwrap_or("");

        let text = field(Some(text_idx)).trim();
        if text.is_empty() {
            continue;
        }
        records.push(CommentRecord {
            nickname: field(nickname_idx).trim().to_string(),
            age: field(age_idx)
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|&a| a <= 150),
            gender: normalize_gender(field(gender_idx)),
            likes: field(likes_idx).trim().parse::<u64>().unwrap_or(0),
            text: text.to_string(),
        });
    }
    Ok(records)
}

fn csv_error(e: &csv::Error) -> CorpusError {
    CorpusError::MalformedCsv {
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    }
}

/// Tokenization strategy for comment text.
///
/// `Pretokenized` expects whitespace-separated input. `CjkChars` additionally
/// splits runs of Han ideographs into single-character tokens so Chinese text
/// is usable without an external segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizeMode {
    Pretokenized,
    CjkChars,
}

impl FromStr for TokenizeMode {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pretokenized" => Ok(Self::Pretokenized),
            "cjk-chars" => Ok(Self::CjkChars),
            other => Err(CorpusError::UnknownTokenizeMode(other.to_string())),
        }
    }
}

impl TokenizeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pretokenized => "pretokenized",
            Self::CjkChars => "cjk-chars",
        }
    }
}

/// True for codepoints in the CJK unified ideograph blocks (including the
/// extensions and the compatibility block).
pub fn is_cjk(c: char) -> bool {
    matches!(
        c as u32,
        0x4E00..=0x9FFF        // CJK Unified Ideographs
        | 0x3400..=0x4DBF      // Extension A
        | 0xF900..=0xFAFF      // Compatibility Ideographs
        | 0x20000..=0x2A6DF    // Extension B
        | 0x2A700..=0x2EBEF    // Extensions C-F
        | 0x30000..=0x3134F    // Extension G
    )
}

/// Splits text into tokens. Input is NFC-normalized first so vocabulary keys
/// are stable; punctuation is stripped from token edges and tokens that end
/// up empty are dropped.
pub fn tokenize(text: &str, mode: TokenizeMode) -> Vec<String> {
    let normalized: String = text.nfc().collect();
    let mut tokens = Vec::new();
    match mode {
        TokenizeMode::Pretokenized => {
            for raw in normalized.split_whitespace() {
                push_trimmed(raw, &mut tokens);
            }
        }
        TokenizeMode::CjkChars => {
            for chunk in normalized.split_whitespace() {
                let mut rest = String::new();
                for ch in chunk.chars() {
                    if is_cjk(ch) {
                        push_trimmed(&rest, &mut tokens);
                        rest.clear();
                        tokens.push(ch.to_string());
                    } else {
                        rest.push(ch);
                    }
                }
                push_trimmed(&rest, &mut tokens);
            }
        }
    }
    tokens
}

fn push_trimmed(raw: &str, out: &mut Vec<String>) {
    let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

/// A corpus of tokenized documents. Empty documents are never retained and
/// tokens never contain whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedCorpus {
    documents: Vec<Vec<String>>,
}

impl TokenizedCorpus {
    /// Builds a corpus from token sequences, dropping empty tokens and empty
    /// documents. Tokens containing whitespace are split apart.
    pub fn from_documents<I>(documents: I) -> Self
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let documents = documents
            .into_iter()
            .map(|doc| {
                doc.iter()
                    .flat_map(|t| t.split_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .filter(|doc: &Vec<String>| !doc.is_empty())
            .collect();
        Self { documents }
    }

    /// Tokenizes each text into one document.
    pub fn from_texts<'a, I>(texts: I, mode: TokenizeMode) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        Self::from_documents(texts.into_iter().map(|t| tokenize(t, mode)))
    }

    pub fn documents(&self) -> &[Vec<String>] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    pub fn iter_tokens(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().flatten().map(String::as_str)
    }

    /// Writes one document per line, tokens separated by single spaces.
    pub fn write_lines<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for doc in &self.documents {
            writeln!(w, "{}", doc.join(" "))?;
        }
        Ok(())
    }

    /// Reads the line-per-document format produced by [`write_lines`].
    ///
    /// [`write_lines`]: TokenizedCorpus::write_lines
    pub fn read_lines<R: BufRead>(r: R) -> Result<Self, CorpusError> {
        let mut documents = Vec::new();
        for line in r.lines() {
            let line = line?;
            let doc: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if !doc.is_empty() {
                documents.push(doc);
            }
        }
        Ok(Self { documents })
    }
}

/// Word occurrence counts plus the count of the most frequent word.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    max_count: u64,
}

impl FrequencyTable {
    /// Adds `n` occurrences of `word` (no-op for `n == 0`), keeping
    /// `max_count` in sync.
    pub fn add(&mut self, word: &str, n: u64) {
        if n == 0 {
            return;
        }
        let count = self.counts.entry(word.to_string()).or_insert(0);
        *count += n;
        self.max_count = self.max_count.max(*count);
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    pub fn max_count(&self) -> u64 {
        self.max_count
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of token occurrences.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Entries sorted by count descending, ties broken lexicographically.
    pub fn sorted_entries(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<(&str, u64)> = self
            .counts
            .iter()
            .map(|(w, &c)| (w.as_str(), c))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        entries
    }

    /// The `n` most frequent words under the same ordering as
    /// [`sorted_entries`](FrequencyTable::sorted_entries).
    pub fn top_n(&self, n: usize) -> Vec<String> {
        self.sorted_entries()
            .into_iter()
            .take(n)
            .map(|(w, _)| w.to_string())
            .collect()
    }

    /// Writes `word<TAB>count` lines, count descending, ties lexicographic.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (word, count) in self.sorted_entries() {
            writeln!(w, "{word}\t{count}")?;
        }
        Ok(())
    }
}

/// Counts exact token occurrences over all documents.
pub fn build_frequency_table(corpus: &TokenizedCorpus) -> Result<FrequencyTable, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut table = FrequencyTable::default();
    for token in corpus.iter_tokens() {
        table.add(token, 1);
    }
    Ok(table)
}

/// A word's count divided by the count of the most frequent word.
pub fn term_frequency(table: &FrequencyTable, word: &str) -> Result<f64, CorpusError> {
    let count = table
        .count(word)
        .ok_or_else(|| CorpusError::UnknownWord(word.to_string()))?;
    Ok(count as f64 / table.max_count() as f64)
}

/// Among documents containing at least one high-frequency word, the fraction
/// containing two or more high-frequency word occurrences (counted with
/// multiplicity).
pub fn cooccurrence_pair_rate(
    corpus: &TokenizedCorpus,
    hi_freq: &HashSet<String>,
) -> Result<f64, CorpusError> {
    if hi_freq.is_empty() {
        return Err(CorpusError::EmptyHighFrequencySet);
    }
    let mut with_any = 0u64;
    let mut with_pair = 0u64;
    for doc in corpus.documents() {
        let occurrences = doc.iter().filter(|t| hi_freq.contains(t.as_str())).count();
        if occurrences >= 1 {
            with_any += 1;
        }
        if occurrences >= 2 {
            with_pair += 1;
        }
    }
    if with_any == 0 {
        return Err(CorpusError::NoHighFrequencyDocuments);
    }
    Ok(with_pair as f64 / with_any as f64)
}
