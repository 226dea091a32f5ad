//! Sparse weighted networks over a vocabulary, plus the canonical TSV
//! serialization (`# semdis-network v1`).

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// What to do when the same edge appears twice in the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DupPolicy {
    #[default]
    Error,
    Sum,
}

/// How two opposite arcs collapse into one undirected weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetrizeRule {
    /// Larger of the two weights (absent arc counts as 0).
    #[default]
    Max,
    /// Sum of both weights (absent arc counts as 0).
    Sum,
    /// Mean over the arcs that are present.
    Mean,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub dup_policy: DupPolicy,
    pub allow_self_loops: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            dup_policy: DupPolicy::Error,
            allow_self_loops: false,
        }
    }
}

/// Weighted graph, directed or undirected, with strictly positive weights.
///
/// Neighbor lists are kept sorted by index, so traversal order (and every
/// artifact derived from it) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    vocab: Vocabulary,
    directed: bool,
    adj: Vec<Vec<(u32, f64)>>,
    edge_count: usize,
}

/// Build a network from token triples resolved against an existing vocabulary.
pub fn build_network<S: AsRef<str>>(
    vocab: Vocabulary,
    edge_triples: &[(S, S, f64)],
    directed: bool,
    dup_policy: DupPolicy,
) -> Result<WeightedNetwork> {
    let opts = BuildOptions {
        dup_policy,
        ..BuildOptions::default()
    };
    let mut indexed = Vec::with_capacity(edge_triples.len());
    for (s, t, w) in edge_triples {
        let si = vocab
            .index_of(s.as_ref())
            .ok_or_else(|| Error::UnknownToken(s.as_ref().to_string()))?;
        let ti = vocab
            .index_of(t.as_ref())
            .ok_or_else(|| Error::UnknownToken(t.as_ref().to_string()))?;
        indexed.push((si, ti, *w));
    }
    WeightedNetwork::from_indexed_edges(vocab, directed, indexed, opts)
}

impl WeightedNetwork {
    pub(crate) fn from_indexed_edges(
        vocab: Vocabulary,
        directed: bool,
        edges: impl IntoIterator<Item = (u32, u32, f64)>,
        opts: BuildOptions,
    ) -> Result<Self> {
        let n = vocab.len();
        let mut canonical: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (s, t, w) in edges {
            debug_assert!((s as usize) < n && (t as usize) < n);
            if s == t && !opts.allow_self_loops {
                return Err(Error::SelfLoop(vocab.token(s).to_string()));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight {
                    from: vocab.token(s).to_string(),
                    to: vocab.token(t).to_string(),
                    weight: w,
                });
            }
            let key = if directed || s <= t { (s, t) } else { (t, s) };
            match canonical.entry(key) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(w);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => match opts.dup_policy {
                    DupPolicy::Error => {
                        return Err(Error::DuplicateEdge {
                            from: vocab.token(s).to_string(),
                            to: vocab.token(t).to_string(),
                        })
                    }
                    DupPolicy::Sum => *e.get_mut() += w,
                },
            }
        }
        Ok(Self::from_canonical(vocab, directed, canonical))
    }

    /// Assemble a network from prebuilt adjacency rows. Rows must be sorted
    /// by neighbor index and, for undirected networks, mirror-symmetric;
    /// used by the similarity projection where edges come straight out of a
    /// symmetric dense matrix.
    pub(crate) fn from_parts(
        vocab: Vocabulary,
        directed: bool,
        adj: Vec<Vec<(u32, f64)>>,
        edge_count: usize,
    ) -> Self {
        debug_assert_eq!(adj.len(), vocab.len());
        debug_assert!(adj
            .iter()
            .all(|row| row.windows(2).all(|w| w[0].0 < w[1].0)));
        WeightedNetwork {
            vocab,
            directed,
            adj,
            edge_count,
        }
    }

    fn from_canonical(
        vocab: Vocabulary,
        directed: bool,
        canonical: BTreeMap<(u32, u32), f64>,
    ) -> Self {
        let mut adj = vec![Vec::new(); vocab.len()];
        let edge_count = canonical.len();
        for (&(s, t), &w) in &canonical {
            adj[s as usize].push((t, w));
            if !directed && s != t {
                adj[t as usize].push((s, w));
            }
        }
        for row in &mut adj {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        WeightedNetwork {
            vocab,
            directed,
            adj,
            edge_count,
        }
    }

    /// Collapse a directed network into an undirected one. Already-undirected
    /// networks come back unchanged.
    pub fn symmetrize(&self, rule: SymmetrizeRule) -> WeightedNetwork {
        if !self.directed {
            return self.clone();
        }
        let mut forward: BTreeMap<(u32, u32), (f64, u32)> = BTreeMap::new();
        for (s, t, w) in self.edges() {
            let key = if s <= t { (s, t) } else { (t, s) };
            let slot = forward.entry(key).or_insert((0.0, 0));
            slot.0 += w;
            slot.1 += 1;
        }
        let canonical: BTreeMap<(u32, u32), f64> = forward
            .into_iter()
            .map(|(key, (sum, count))| {
                let w = match rule {
                    // weights are positive, so max over present arcs works
                    // pairwise even though we only kept the sum; recompute:
                    SymmetrizeRule::Sum => sum,
                    SymmetrizeRule::Mean => sum / f64::from(count),
                    SymmetrizeRule::Max => {
                        let (i, j) = key;
                        let a = self.weight(i, j).unwrap_or(0.0);
                        let b = self.weight(j, i).unwrap_or(0.0);
                        a.max(b)
                    }
                };
                (key, w)
            })
            .collect();
        Self::from_canonical(self.vocab.clone(), false, canonical)
    }

    /// Restrict the network to `keep` tokens; vocabulary order is preserved
    /// and only edges with both endpoints kept survive.
    pub fn induced_subnetwork<S: AsRef<str>>(
        &self,
        keep: impl IntoIterator<Item = S>,
    ) -> Result<WeightedNetwork> {
        let mut keep_mask = vec![false; self.vocab.len()];
        for token in keep {
            let i = self
                .vocab
                .index_of(token.as_ref())
                .ok_or_else(|| Error::UnknownToken(token.as_ref().to_string()))?;
            keep_mask[i as usize] = true;
        }
        let mut remap = vec![u32::MAX; self.vocab.len()];
        let mut tokens = Vec::new();
        for (i, token) in self.vocab.iter() {
            if keep_mask[i as usize] {
                remap[i as usize] = tokens.len() as u32;
                tokens.push(token.to_string());
            }
        }
        let vocab = Vocabulary::new(tokens)?;
        let canonical: BTreeMap<(u32, u32), f64> = self
            .edges()
            .filter(|&(s, t, _)| keep_mask[s as usize] && keep_mask[t as usize])
            .map(|(s, t, w)| ((remap[s as usize], remap[t as usize]), w))
            .collect();
        Ok(Self::from_canonical(vocab, self.directed, canonical))
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn node_count(&self) -> usize {
        self.vocab.len()
    }

    /// Arcs when directed, unordered pairs when undirected.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn neighbors(&self, i: u32) -> &[(u32, f64)] {
        &self.adj[i as usize]
    }

    pub fn weight(&self, i: u32, j: u32) -> Option<f64> {
        let row = &self.adj[i as usize];
        row.binary_search_by_key(&j, |&(t, _)| t)
            .ok()
            .map(|pos| row[pos].1)
    }

    pub fn degree(&self, i: u32) -> usize {
        self.adj[i as usize].len()
    }

    pub fn strength(&self, i: u32) -> f64 {
        self.adj[i as usize].iter().map(|&(_, w)| w).sum()
    }

    /// Canonical edge iteration: every arc when directed, every unordered
    /// pair once (source index <= target index) when undirected.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(move |(i, row)| {
            let i = i as u32;
            row.iter().filter_map(move |&(j, w)| {
                if self.directed || i <= j {
                    Some((i, j, w))
                } else {
                    None
                }
            })
        })
    }

    /// Canonical TSV form. `# node` lines declare the vocabulary in index
    /// order (so isolated nodes and the exact ordering survive a round
    /// trip); plain parsers may treat them as ordinary comments.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# semdis-network v1")?;
        writeln!(w, "# directed={}", self.directed)?;
        for (_, token) in self.vocab.iter() {
            writeln!(w, "# node\t{token}")?;
        }
        for (s, t, weight) in self.edges() {
            writeln!(
                w,
                "{}\t{}\t{}",
                self.vocab.token(s),
                self.vocab.token(t),
                weight
            )?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_tsv(&mut w).map_err(|e| Error::io(path, e))
    }

    pub fn parse_tsv<R: BufRead>(reader: R, dup_policy: DupPolicy) -> Result<WeightedNetwork> {
        let mut directed: Option<bool> = None;
        let mut saw_magic = false;
        let mut vocab = Vocabulary::empty();
        let mut edges: Vec<(u32, u32, f64)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::MalformedLine {
                line: lineno,
                reason: e.to_string(),
            })?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if rest == "semdis-network v1" {
                    saw_magic = true;
                } else if let Some(flag) = rest.strip_prefix("directed=") {
                    directed = Some(match flag.trim() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(Error::MalformedLine {
                                line: lineno,
                                reason: format!("bad directed flag `{other}`"),
                            })
                        }
                    });
                } else if let Some(token) = rest.strip_prefix("node\t").or_else(|| {
                    rest.strip_prefix("node ")
                }) {
                    vocab.intern(token).ok_or(Error::MalformedLine {
                        line: lineno,
                        reason: "blank node token".to_string(),
                    })?;
                }
                continue;
            }
            if !saw_magic {
                return Err(Error::MalformedLine {
                    line: lineno,
                    reason: "missing `# semdis-network v1` header".to_string(),
                });
            }
            let directed = directed.ok_or(Error::MalformedLine {
                line: lineno,
                reason: "missing `# directed=` header".to_string(),
            })?;
            let _ = directed;
            let (s, t, w) = split_edge_line(line, lineno)?;
            let si = vocab.intern(s).ok_or(Error::MalformedLine {
                line: lineno,
                reason: "blank source token".to_string(),
            })?;
            let ti = vocab.intern(t).ok_or(Error::MalformedLine {
                line: lineno,
                reason: "blank target token".to_string(),
            })?;
            edges.push((si, ti, w));
        }
        if !saw_magic {
            return Err(Error::MalformedLine {
                line: 0,
                reason: "missing `# semdis-network v1` header".to_string(),
            });
        }
        let directed = directed.ok_or(Error::MalformedLine {
            line: 0,
            reason: "missing `# directed=` header".to_string(),
        })?;
        if vocab.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let opts = BuildOptions {
            dup_policy,
            ..BuildOptions::default()
        };
        WeightedNetwork::from_indexed_edges(vocab, directed, edges, opts)
    }

    pub fn load(path: &Path) -> Result<WeightedNetwork> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(BufReader::new(file), DupPolicy::Error)
    }
}

pub(crate) fn split_edge_line(line: &str, lineno: usize) -> Result<(&str, &str, f64)> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::MalformedLine {
            line: lineno,
            reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
        });
    }
    let w: f64 = fields[2].trim().parse().map_err(|_| Error::MalformedLine {
        line: lineno,
        reason: format!("bad weight `{}`", fields[2]),
    })?;
    if !w.is_finite() {
        return Err(Error::MalformedLine {
            line: lineno,
            reason: format!("non-finite weight `{}`", fields[2]),
        });
    }
    Ok((fields[0], fields[1], w))
}
