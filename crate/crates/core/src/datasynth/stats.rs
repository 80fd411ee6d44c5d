use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{DatasynthError, SynthConversation, TopicCatalog};

/// Share of the corpus used for training; the rest is validation.
pub const TRAIN_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub per_area: BTreeMap<String, usize>,
    pub total_turns: usize,
    /// 0 when the corpus is empty; see `empty`.
    pub avg_turns: f64,
    pub empty: bool,
}

impl CorpusStats {
    /// Training and validation sizes for the fixed split.
    pub fn split_sizes(&self) -> (usize, usize) {
        let train = (self.total as f64 * TRAIN_FRACTION).floor() as usize;
        (train, self.total - train)
    }

    /// Human-readable report, areas in catalog order then any others.
    pub fn report(&self, catalog: &TopicCatalog) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "conversations: {}", self.total);
        let mut listed = Vec::new();
        for area in catalog.areas() {
            if let Some(n) = self.per_area.get(&area.name) {
                let _ = writeln!(out, "  {}: {n}", area.name);
                listed.push(area.name.as_str());
            }
        }
        for (area, n) in &self.per_area {
            if !listed.contains(&area.as_str()) {
                let _ = writeln!(out, "  {area}: {n}");
            }
        }
        if self.empty {
            let _ = writeln!(out, "average turns: n/a (empty corpus)");
        } else {
            let _ = writeln!(out, "average turns: {:.2}", self.avg_turns);
        }
        out
    }
}

pub fn corpus_stats(corpus: &[SynthConversation]) -> CorpusStats {
    let mut per_area = BTreeMap::new();
    for c in corpus {
        *per_area.entry(c.area.clone()).or_insert(0) += 1;
    }
    let total_turns: usize = corpus.iter().map(|c| c.turns.len()).sum();
    let empty = corpus.is_empty();
    CorpusStats {
        total: corpus.len(),
        per_area,
        total_turns,
        avg_turns: if empty { 0.0 } else { total_turns as f64 / corpus.len() as f64 },
        empty,
    }
}

/// Reads JSON Lines, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, DatasynthError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DatasynthError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DatasynthError::Json { line: n + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, items: &[T]) -> Result<(), DatasynthError> {
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| DatasynthError::Io(e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| DatasynthError::Io(e.to_string()))?;
    }
    Ok(())
}
