//! Parsers for free-association and feature-production norms, plus the
//! common-vocabulary extraction both evaluation paths rely on.
//!
//! Both inputs are plain TSV, one relation per line, `#` comments allowed:
//!   free association:   `cue<TAB>target<TAB>frequency`
//!   feature production: `concept<TAB>feature<TAB>frequency`

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{split_edge_line, BuildOptions, DupPolicy, WeightedNetwork};
use crate::vocab::{normalize_token, Vocabulary};

/// Concept-by-feature production frequencies, stored sparse.
///
/// Every stored value is positive and every concept keeps at least one
/// nonzero feature, so all row norms are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    vocab: Vocabulary,
    features: Vec<String>,
    rows: Vec<Vec<(u32, f64)>>,
}

impl FeatureMatrix {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn concept_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    /// Sparse feature row of a concept, sorted by feature index.
    pub fn row(&self, concept: u32) -> &[(u32, f64)] {
        &self.rows[concept as usize]
    }

    pub fn row_norm(&self, concept: u32) -> f64 {
        self.rows[concept as usize]
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Restrict to `keep` concepts, preserving their relative order and
    /// dropping features no remaining concept uses.
    pub fn restrict<S: AsRef<str>>(&self, keep: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut keep_mask = vec![false; self.vocab.len()];
        for token in keep {
            let i = self
                .vocab
                .index_of(token.as_ref())
                .ok_or_else(|| Error::UnknownToken(token.as_ref().to_string()))?;
            keep_mask[i as usize] = true;
        }
        let mut tokens = Vec::new();
        let mut kept_rows = Vec::new();
        for (i, token) in self.vocab.iter() {
            if keep_mask[i as usize] {
                tokens.push(token.to_string());
                kept_rows.push(&self.rows[i as usize]);
            }
        }
        let vocab = Vocabulary::new(tokens)?;
        let mut feature_remap: HashMap<u32, u32> = HashMap::new();
        let mut features = Vec::new();
        let mut used: BTreeSet<u32> = BTreeSet::new();
        for row in &kept_rows {
            used.extend(row.iter().map(|&(f, _)| f));
        }
        for f in used {
            feature_remap.insert(f, features.len() as u32);
            features.push(self.features[f as usize].clone());
        }
        let rows = kept_rows
            .into_iter()
            .map(|row| {
                row.iter()
                    .map(|&(f, v)| (feature_remap[&f], v))
                    .collect()
            })
            .collect();
        Ok(FeatureMatrix {
            vocab,
            features,
            rows,
        })
    }

    pub fn write_tsv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# semdis-features v1")?;
        for (i, token) in self.vocab.iter() {
            for &(f, v) in self.row(i) {
                writeln!(w, "{token}\t{}\t{v}", self.features[f as usize])?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_tsv(&mut w).map_err(|e| Error::io(path, e))
    }
}

/// Parse free-association norms into a directed network. Targets that never
/// occur as cues stay in the vocabulary with out-degree 0.
pub fn parse_fa(path: &Path, dup_policy: DupPolicy) -> Result<WeightedNetwork> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fa_reader(BufReader::new(file), dup_policy)
}

pub fn parse_fa_reader<R: BufRead>(reader: R, dup_policy: DupPolicy) -> Result<WeightedNetwork> {
    let mut vocab = Vocabulary::empty();
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: lineno,
            reason: e.to_string(),
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (cue, target, w) = split_edge_line(line, lineno)?;
        let cue_norm = normalize_token(cue);
        let target_norm = normalize_token(target);
        if cue_norm.is_empty() || target_norm.is_empty() {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: "blank token".to_string(),
            });
        }
        if w <= 0.0 {
            return Err(Error::NonPositiveWeight {
                from: cue_norm,
                to: target_norm,
                weight: w,
            });
        }
        let ci = vocab.intern(&cue_norm).expect("non-empty token");
        let ti = vocab.intern(&target_norm).expect("non-empty token");
        edges.push((ci, ti, w));
    }
    if vocab.is_empty() {
        return Err(Error::EmptyInput("no association rows".to_string()));
    }
    let opts = BuildOptions {
        dup_policy,
        ..BuildOptions::default()
    };
    WeightedNetwork::from_indexed_edges(vocab, true, edges, opts)
}

/// Parse feature-production norms. Duplicate (concept, feature) pairs are
/// rejected; an empty file is an error.
pub fn parse_fp(path: &Path) -> Result<FeatureMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_fp_reader(BufReader::new(file))
}

pub fn parse_fp_reader<R: BufRead>(reader: R) -> Result<FeatureMatrix> {
    let mut vocab = Vocabulary::empty();
    let mut features: Vec<String> = Vec::new();
    let mut feature_index: HashMap<String, u32> = HashMap::new();
    let mut rows: Vec<HashMap<u32, f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: lineno,
            reason: e.to_string(),
        })?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (concept, feature, v) = split_edge_line(line, lineno)?;
        let concept_norm = normalize_token(concept);
        let feature_norm = normalize_token(feature);
        if concept_norm.is_empty() || feature_norm.is_empty() {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: "blank concept or feature".to_string(),
            });
        }
        if v <= 0.0 {
            return Err(Error::NonPositiveWeight {
                from: concept_norm,
                to: feature_norm,
                weight: v,
            });
        }
        let ci = vocab.intern(&concept_norm).expect("non-empty token");
        if ci as usize == rows.len() {
            rows.push(HashMap::new());
        }
        let fi = match feature_index.get(&feature_norm) {
            Some(&f) => f,
            None => {
                let f = features.len() as u32;
                feature_index.insert(feature_norm.clone(), f);
                features.push(feature_norm.clone());
                f
            }
        };
        if rows[ci as usize].insert(fi, v).is_some() {
            return Err(Error::DuplicateFeature {
                concept: concept_norm,
                feature: feature_norm,
                line: lineno,
            });
        }
    }
    if vocab.is_empty() {
        return Err(Error::EmptyInput("no feature rows".to_string()));
    }
    let rows = rows
        .into_iter()
        .map(|row| {
            let mut sorted: Vec<(u32, f64)> = row.into_iter().collect();
            sorted.sort_unstable_by_key(|&(f, _)| f);
            sorted
        })
        .collect();
    Ok(FeatureMatrix {
        vocab,
        features,
        rows,
    })
}

/// Tokens present in both vocabularies. An empty intersection is reported
/// as an error, never as a silently empty set.
pub fn intersect_vocabulary(a: &Vocabulary, b: &Vocabulary) -> Result<BTreeSet<String>> {
    let common: BTreeSet<String> = a
        .tokens()
        .iter()
        .filter(|t| b.contains(t))
        .cloned()
        .collect();
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(common)
}
