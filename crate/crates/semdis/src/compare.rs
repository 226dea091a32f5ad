//! Microscopic evaluation: ordered neighbor lists, match rates and the
//! mismatch/misplacement error score.
//!
//! For two length-l lists the score is E = E_M + E_O / (l - E_M), where E_M
//! counts tokens missing from the other list and E_O counts shared tokens
//! whose 1-based rank differs. Zero overlap is capped at E = l + 1, one
//! notch worse than any scoring with at least one match.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::WeightedNetwork;

/// Neighbors of one word ordered by descending weight, ties broken by
/// ascending token, self excluded, truncated to the requested length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborList {
    pub owner: String,
    pub entries: Vec<(String, f64)>,
}

impl NeighborList {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn from_tokens<S: AsRef<str>>(owner: &str, tokens: &[S]) -> Self {
        // synthetic ranks as weights so fixture lists sort stably
        let entries = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_ref().to_string(), (tokens.len() - i) as f64))
            .collect();
        NeighborList {
            owner: owner.to_string(),
            entries,
        }
    }
}

/// Mismatch/misplacement decomposition of the error between two lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorScore {
    pub mismatches: usize,
    pub misplacements: usize,
    pub value: f64,
    pub complete_mismatch: bool,
}

/// The first `l` neighbors of `word`, fewer if the word has fewer.
pub fn neighbor_list(net: &WeightedNetwork, word: &str, l: usize) -> Result<NeighborList> {
    assert!(l >= 1, "list length must be at least 1");
    let i = net
        .vocab()
        .index_of(word)
        .ok_or_else(|| Error::UnknownToken(word.to_string()))?;
    let mut entries: Vec<(String, f64)> = net
        .neighbors(i)
        .iter()
        .map(|&(j, w)| (net.vocab().token(j).to_string(), w))
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(l);
    Ok(NeighborList {
        owner: net.vocab().token(i).to_string(),
        entries,
    })
}

/// Score a candidate list against a reference list of nominal length `l`.
///
/// Tokens missing from either side count as mismatches (a list shorter than
/// `l` pays for its absent positions), so E_M = l - |shared| and zero
/// overlap yields the capped score l + 1.
pub fn error_score(
    reference: &NeighborList,
    candidate: &NeighborList,
    l: usize,
) -> Result<ErrorScore> {
    check_length(reference, l)?;
    check_length(candidate, l)?;
    let mut misplacements = 0usize;
    let mut matched = 0usize;
    for (ref_rank, token) in reference.tokens().enumerate() {
        if let Some(cand_rank) = candidate.tokens().position(|t| t == token) {
            matched += 1;
            if cand_rank != ref_rank {
                misplacements += 1;
            }
        }
    }
    let mismatches = l - matched;
    let (value, complete_mismatch) = if matched == 0 {
        ((l + 1) as f64, true)
    } else {
        (mismatches as f64 + misplacements as f64 / matched as f64, false)
    };
    Ok(ErrorScore {
        mismatches,
        misplacements,
        value,
        complete_mismatch,
    })
}

/// Fraction of the `l` reference slots found anywhere in the candidate list.
pub fn match_rate(reference: &NeighborList, candidate: &NeighborList, l: usize) -> Result<f64> {
    check_length(reference, l)?;
    check_length(candidate, l)?;
    let matched = reference
        .tokens()
        .filter(|t| candidate.tokens().any(|c| c == *t))
        .count();
    Ok(matched as f64 / l as f64)
}

fn check_length(list: &NeighborList, l: usize) -> Result<()> {
    if list.entries.len() > l {
        return Err(Error::LengthMismatch {
            l,
            found: list.entries.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct WordComparison {
    pub token: String,
    /// One entry per list length l = 1..=l_max.
    pub per_l: Vec<LengthComparison>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LengthComparison {
    pub l: usize,
    pub match_fraction: f64,
    #[serde(flatten)]
    pub score: ErrorScore,
}

/// Per-word and aggregate comparison of a candidate network against a
/// reference over list lengths 1..=l_max.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub l_max: usize,
    pub mean_match_pct: Vec<f64>,
    pub mean_error: Vec<f64>,
    pub grand_mean_match_pct: f64,
    pub grand_mean_error: f64,
    pub per_word: Vec<WordComparison>,
}

impl ComparisonReport {
    /// CSV with one row per list length: `l,mean_match_pct,mean_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,mean_match_pct,mean_error\n");
        for l in 1..=self.l_max {
            out.push_str(&format!(
                "{},{},{}\n",
                l,
                self.mean_match_pct[l - 1],
                self.mean_error[l - 1]
            ));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compare every word's candidate neighborhood against the reference.
/// Both networks must cover the same token set.
pub fn compare_networks(
    reference: &WeightedNetwork,
    candidate: &WeightedNetwork,
    l_max: usize,
) -> Result<ComparisonReport> {
    assert!(l_max >= 1, "l_max must be at least 1");
    check_same_vocabulary(reference, candidate)?;
    let words: Vec<&str> = reference.vocab().tokens().iter().map(String::as_str).collect();
    let mut per_word = Vec::with_capacity(words.len());
    for word in &words {
        let ref_full = neighbor_list(reference, word, l_max)?;
        let cand_full = neighbor_list(candidate, word, l_max)?;
        let mut per_l = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            let ref_l = truncated(&ref_full, l);
            let cand_l = truncated(&cand_full, l);
            let score = error_score(&ref_l, &cand_l, l)?;
            let match_fraction = match_rate(&ref_l, &cand_l, l)?;
            per_l.push(LengthComparison {
                l,
                match_fraction,
                score,
            });
        }
        per_word.push(WordComparison {
            token: word.to_string(),
            per_l,
        });
    }
    let words_n = per_word.len() as f64;
    let mut mean_match_pct = Vec::with_capacity(l_max);
    let mut mean_error = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        let match_sum: f64 = per_word
            .iter()
            .map(|w| w.per_l[l - 1].match_fraction)
            .sum();
        let error_sum: f64 = per_word.iter().map(|w| w.per_l[l - 1].score.value).sum();
        mean_match_pct.push(100.0 * match_sum / words_n);
        mean_error.push(error_sum / words_n);
    }
    let grand_mean_match_pct = mean_match_pct.iter().sum::<f64>() / l_max as f64;
    let grand_mean_error = mean_error.iter().sum::<f64>() / l_max as f64;
    Ok(ComparisonReport {
        l_max,
        mean_match_pct,
        mean_error,
        grand_mean_match_pct,
        grand_mean_error,
        per_word,
    })
}

fn truncated(list: &NeighborList, l: usize) -> NeighborList {
    NeighborList {
        owner: list.owner.clone(),
        entries: list.entries.iter().take(l).cloned().collect(),
    }
}

fn check_same_vocabulary(a: &WeightedNetwork, b: &WeightedNetwork) -> Result<()> {
    let missing_in_b: Vec<&String> = a
        .vocab()
        .tokens()
        .iter()
        .filter(|t| !b.vocab().contains(t))
        .collect();
    let missing_in_a: Vec<&String> = b
        .vocab()
        .tokens()
        .iter()
        .filter(|t| !a.vocab().contains(t))
        .collect();
    if missing_in_a.is_empty() && missing_in_b.is_empty() {
        return Ok(());
    }
    Err(Error::VocabularyMismatch(format!(
        "{} token(s) only in reference, {} only in candidate",
        missing_in_b.len(),
        missing_in_a.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, DupPolicy};
    use crate::vocab::Vocabulary;

    fn star_net() -> WeightedNetwork {
        build_network(
            Vocabulary::new(["q", "a", "b", "c"]).unwrap(),
            &[("q", "b", 0.9), ("q", "c", 0.9), ("q", "a", 0.5)],
            false,
            DupPolicy::Error,
        )
        .unwrap()
    }

    #[test]
    fn ties_break_alphabetically() {
        let list = neighbor_list(&star_net(), "q", 2).unwrap();
        let tokens: Vec<&str> = list.tokens().collect();
        assert_eq!(tokens, vec!["b", "c"]);
    }

    #[test]
    fn list_shorter_than_l() {
        let list = neighbor_list(&star_net(), "q", 10).unwrap();
        assert_eq!(list.entries.len(), 3);
    }

    #[test]
    fn isolated_word_empty_list() {
        let net = build_network(
            Vocabulary::new(["a", "b", "lone"]).unwrap(),
            &[("a", "b", 1.0)],
            false,
            DupPolicy::Error,
        )
        .unwrap();
        let list = neighbor_list(&net, "lone", 5).unwrap();
        assert!(list.entries.is_empty());
    }

    #[test]
    fn unknown_word_rejected() {
        let err = neighbor_list(&star_net(), "zebra", 3).unwrap_err();
        assert!(matches!(err, Error::UnknownToken(_)));
    }

    #[test]
    fn identical_lists_zero_error() {
        let a = NeighborList::from_tokens("w", &["x", "y", "z"]);
        let score = error_score(&a, &a, 3).unwrap();
        assert_eq!(score.value, 0.0);
        assert_eq!(score.mismatches, 0);
        assert_eq!(score.misplacements, 0);
        assert!(!score.complete_mismatch);
        assert_eq!(match_rate(&a, &a, 3).unwrap(), 1.0);
    }

    #[test]
    fn zero_overlap_is_capped() {
        let a = NeighborList::from_tokens("w", &["x", "y"]);
        let b = NeighborList::from_tokens("w", &["u", "v"]);
        let score = error_score(&a, &b, 2).unwrap();
        assert!(score.complete_mismatch);
        assert_eq!(score.value, 3.0);
    }

    #[test]
    fn single_misplaced_match_scores_l() {
        // one shared token in the wrong slot: E = (l-1) + 1/1 = l
        let a = NeighborList::from_tokens("w", &["x", "y", "z"]);
        let b = NeighborList::from_tokens("w", &["u", "x", "v"]);
        let score = error_score(&a, &b, 3).unwrap();
        assert_eq!(score.mismatches, 2);
        assert_eq!(score.misplacements, 1);
        assert_eq!(score.value, 3.0);
    }

    #[test]
    fn short_candidate_pays_absent_positions() {
        let a = NeighborList::from_tokens("w", &["x", "y", "z"]);
        let b = NeighborList::from_tokens("w", &["x"]);
        let score = error_score(&a, &b, 3).unwrap();
        assert_eq!(score.mismatches, 2);
        assert_eq!(score.misplacements, 0);
        assert_eq!(score.value, 2.0);
    }

    #[test]
    fn overlong_list_rejected() {
        let a = NeighborList::from_tokens("w", &["x", "y", "z"]);
        let b = NeighborList::from_tokens("w", &["x", "y"]);
        let err = error_score(&a, &b, 2).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { l: 2, found: 3 }));
    }

    #[test]
    fn swap_preserves_mismatch_count() {
        let a = NeighborList::from_tokens("w", &["x", "y", "z", "p"]);
        let b = NeighborList::from_tokens("w", &["y", "x", "q", "r"]);
        let ab = error_score(&a, &b, 4).unwrap();
        let ba = error_score(&b, &a, 4).unwrap();
        assert_eq!(ab.mismatches, ba.mismatches);
        assert_eq!(ab.misplacements, ba.misplacements);
    }

    #[test]
    fn self_comparison_is_perfect() {
        // complete graph with distinct weights: every word has 3 neighbors,
        // so every list is full-length
        let net = build_network(
            Vocabulary::new(["a", "b", "c", "d"]).unwrap(),
            &[
                ("a", "b", 0.9),
                ("a", "c", 0.8),
                ("a", "d", 0.7),
                ("b", "c", 0.6),
                ("b", "d", 0.5),
                ("c", "d", 0.4),
            ],
            false,
            DupPolicy::Error,
        )
        .unwrap();
        let report = compare_networks(&net, &net, 3).unwrap();
        for l in 0..3 {
            assert_eq!(report.mean_error[l], 0.0);
            assert_eq!(report.mean_match_pct[l], 100.0);
        }
        assert_eq!(report.grand_mean_error, 0.0);
        assert_eq!(report.grand_mean_match_pct, 100.0);
    }

    #[test]
    fn vocabulary_mismatch_detected() {
        let net = star_net();
        let other = build_network(
            Vocabulary::new(["q", "a", "b"]).unwrap(),
            &[("q", "a", 1.0)],
            false,
            DupPolicy::Error,
        )
        .unwrap();
        let err = compare_networks(&net, &other, 3).unwrap_err();
        assert!(matches!(err, Error::VocabularyMismatch(_)));
    }

    #[test]
    fn aggregates_match_recomputation() {
        let reference = star_net();
        let candidate = build_network(
            Vocabulary::new(["q", "a", "b", "c"]).unwrap(),
            &[("q", "a", 0.9), ("q", "b", 0.5), ("a", "c", 0.2)],
            false,
            DupPolicy::Error,
        )
        .unwrap();
        let report = compare_networks(&reference, &candidate, 4).unwrap();
        for l in 1..=4 {
            let n = report.per_word.len() as f64;
            let mean_err: f64 = report
                .per_word
                .iter()
                .map(|w| w.per_l[l - 1].score.value)
                .sum::<f64>()
                / n;
            let mean_match: f64 = report
                .per_word
                .iter()
                .map(|w| w.per_l[l - 1].match_fraction)
                .sum::<f64>()
                / n
                * 100.0;
            assert!((report.mean_error[l - 1] - mean_err).abs() < 1e-12);
            assert!((report.mean_match_pct[l - 1] - mean_match).abs() < 1e-12);
        }
    }
}
