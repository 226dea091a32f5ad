//! The random-inheritance pipeline: row-normalize an association network
//! into a transition matrix, accumulate the first S transition powers, and
//! project the accumulated rows onto pairwise cosines to obtain a synthetic
//! feature-similarity network.
//!
//! A Monte Carlo walker realization of the same inheritance mechanism is
//! provided as a stochastic cross-check of the algebraic path: walks of S
//! steps propagate the canonical basis vector of every visited node back to
//! the start node, and averaged visit counts estimate the accumulated
//! transition matrix row by row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::network::WeightedNetwork;
use crate::vocab::Vocabulary;

/// Tolerance used for the entry-count flavor of the convergence profile.
pub const HAMMING_TOL: f64 = 1e-4;

/// Treatment of nodes with no outgoing edges during row normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DanglingPolicy {
    /// Reject the network.
    Error,
    /// Remove dangling nodes (repeatedly, until none remain) and normalize
    /// over the reduced vocabulary.
    Drop,
    /// Keep an all-zero row; the matrix becomes substochastic.
    #[default]
    KeepZero,
}

/// Row-stochastic (or substochastic) transition matrix over a vocabulary.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    vocab: Vocabulary,
    entries: DenseMatrix,
}

impl TransitionMatrix {
    /// Wrap a matrix of transition probabilities. Entries must lie in
    /// [0, 1] and no row may sum to more than 1 (+1e-12 slack); rows from
    /// [`row_normalize`] sum to exactly 1 or are identically zero, but
    /// substochastic rows are accepted too.
    pub fn new(vocab: Vocabulary, entries: DenseMatrix) -> Result<Self> {
        assert_eq!(entries.rows(), vocab.len());
        assert_eq!(entries.cols(), vocab.len());
        for i in 0..entries.rows() {
            let mut sum = 0.0;
            for (j, &v) in entries.row(i).iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidProbability {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                sum += v;
            }
            if sum > 1.0 + 1e-12 {
                return Err(Error::InvalidRowSum { row: i, sum });
            }
        }
        Ok(TransitionMatrix { vocab, entries })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.vocab.len()
    }
}

/// Sum of the first `steps` powers of a transition matrix.
#[derive(Debug, Clone)]
pub struct AccumulatedTransition {
    vocab: Vocabulary,
    steps: usize,
    entries: DenseMatrix,
}

impl AccumulatedTransition {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn from_entries(vocab: Vocabulary, steps: usize, entries: DenseMatrix) -> Self {
        assert_eq!(entries.rows(), vocab.len());
        assert_eq!(entries.cols(), vocab.len());
        AccumulatedTransition {
            vocab,
            steps,
            entries,
        }
    }
}

/// Undirected cosine-similarity network together with the dense matrix it
/// was thresholded from.
#[derive(Debug, Clone)]
pub struct SimilarityNetwork {
    network: WeightedNetwork,
    matrix: DenseMatrix,
}

impl SimilarityNetwork {
    pub fn network(&self) -> &WeightedNetwork {
        &self.network
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn vocab(&self) -> &Vocabulary {
        self.network.vocab()
    }

    pub fn into_network(self) -> WeightedNetwork {
        self.network
    }

    pub(crate) fn from_matrix(vocab: Vocabulary, mut fs: DenseMatrix, threshold: f64) -> Self {
        let n = vocab.len();
        // clamp accumulated rounding above 1 and pin the diagonal of
        // nonzero rows to an exact 1
        for i in 0..n {
            let diag_nonzero = fs.get(i, i) > 0.0;
            let row = fs.row_mut(i);
            for v in row.iter_mut() {
                if *v > 1.0 {
                    *v = 1.0;
                }
            }
            if diag_nonzero {
                row[i] = 1.0;
            }
        }
        let mut adj: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
        let mut half_edges = 0usize;
        for i in 0..n {
            let row = fs.row(i);
            let mut out = Vec::new();
            for (j, &w) in row.iter().enumerate() {
                if j != i && w > threshold {
                    out.push((j as u32, w));
                }
            }
            half_edges += out.len();
            adj.push(out);
        }
        debug_assert_eq!(half_edges % 2, 0);
        let network = WeightedNetwork::from_parts(vocab, false, adj, half_edges / 2);
        SimilarityNetwork {
            network,
            matrix: fs,
        }
    }
}

/// Options for the cosine projection step.
#[derive(Debug, Clone, Copy)]
pub struct CosineOptions {
    /// Add the initial canonical basis vector (identity matrix) to the
    /// accumulated transitions before normalizing.
    pub include_identity: bool,
    /// Keep only similarities strictly above this value as network edges.
    pub threshold: f64,
}

impl Default for CosineOptions {
    fn default() -> Self {
        CosineOptions {
            include_identity: false,
            threshold: 0.0,
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct RimConfig {
    pub dangling: DanglingPolicy,
    pub cosine: CosineOptions,
}

/// Normalize outgoing weights into transition probabilities (each row
/// divided by its sum), handling dangling nodes per policy.
pub fn row_normalize(net: &WeightedNetwork, dangling: DanglingPolicy) -> Result<TransitionMatrix> {
    let n = net.node_count();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    match dangling {
        DanglingPolicy::Error => {
            for i in 0..n as u32 {
                if net.degree(i) == 0 {
                    return Err(Error::DanglingNode(net.vocab().token(i).to_string()));
                }
            }
            Ok(normalize_all(net))
        }
        DanglingPolicy::KeepZero => Ok(normalize_all(net)),
        DanglingPolicy::Drop => {
            // removing a dangling node can strand its predecessors, so prune
            // to a fixed point
            let mut alive = vec![true; n];
            loop {
                let mut changed = false;
                for i in 0..n as u32 {
                    if !alive[i as usize] {
                        continue;
                    }
                    let has_out = net
                        .neighbors(i)
                        .iter()
                        .any(|&(j, _)| alive[j as usize]);
                    if !has_out {
                        alive[i as usize] = false;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if alive.iter().all(|&a| !a) {
                return Err(Error::EmptyNetwork);
            }
            let keep: Vec<&str> = net
                .vocab()
                .iter()
                .filter(|(i, _)| alive[*i as usize])
                .map(|(_, t)| t)
                .collect();
            let sub = net.induced_subnetwork(keep)?;
            Ok(normalize_all(&sub))
        }
    }
}

fn normalize_all(net: &WeightedNetwork) -> TransitionMatrix {
    let vocab = net.vocab().clone();
    let n = net.node_count();
    let mut entries = DenseMatrix::zeros(n, n);
    for i in 0..n as u32 {
        let total = net.strength(i);
        if total <= 0.0 {
            continue;
        }
        let row = entries.row_mut(i as usize);
        for &(j, w) in net.neighbors(i) {
            row[j as usize] = w / total;
        }
    }
    TransitionMatrix { vocab, entries }
}

/// Accumulate T = sum of P^i for i = 1..=steps. Each power is formed as
/// P * previous, so the left factor stays sparse and the summation order is
/// fixed.
pub fn power_sum(p: &TransitionMatrix, steps: usize) -> AccumulatedTransition {
    assert!(steps >= 1, "steps must be at least 1");
    let mut total = p.entries.clone();
    let mut power = p.entries.clone();
    for _ in 2..=steps {
        power = p.entries.matmul(&power);
        total.add_assign(&power);
    }
    AccumulatedTransition {
        vocab: p.vocab.clone(),
        steps,
        entries: total,
    }
}

fn cosine_matrix(entries: &DenseMatrix, include_identity: bool) -> DenseMatrix {
    let mut m = entries.clone();
    if include_identity {
        let n = m.rows();
        for i in 0..n {
            let v = m.get(i, i);
            m.set(i, i, v + 1.0);
        }
    }
    m.normalize_rows_l2();
    m.gram()
}

/// Project accumulated transition rows onto pairwise cosine similarities.
/// All-zero rows have similarity 0 against everything; self-similarities are
/// excluded from the network's edge set.
pub fn cosine_project(t: &AccumulatedTransition, opts: CosineOptions) -> SimilarityNetwork {
    let fs = cosine_matrix(&t.entries, opts.include_identity);
    SimilarityNetwork::from_matrix(t.vocab.clone(), fs, opts.threshold)
}

/// One row of the convergence profile: deltas between steps S-1 and S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub steps: usize,
    /// Max absolute elementwise change of the cosine-projected matrix.
    pub fs_delta: f64,
    /// Max absolute elementwise change of the raw accumulated matrix
    /// (equals the largest entry of P^S).
    pub t_delta: f64,
    /// Fraction of cosine entries that moved by more than [`HAMMING_TOL`].
    pub fs_hamming: f64,
}

/// Step-by-step convergence measurements for S = 2..=s_max.
pub fn convergence_profile(p: &TransitionMatrix, s_max: usize) -> Vec<ConvergencePoint> {
    assert!(s_max >= 2, "s_max must be at least 2");
    let mut total = p.entries.clone();
    let mut power = p.entries.clone();
    let mut prev_fs = cosine_matrix(&total, false);
    let mut points = Vec::with_capacity(s_max - 1);
    for s in 2..=s_max {
        power = p.entries.matmul(&power);
        let t_delta = power.max_entry().max(0.0);
        total.add_assign(&power);
        let fs = cosine_matrix(&total, false);
        points.push(ConvergencePoint {
            steps: s,
            fs_delta: fs.max_abs_diff(&prev_fs),
            t_delta,
            fs_hamming: fs.diff_fraction(&prev_fs, HAMMING_TOL),
        });
        prev_fs = fs;
    }
    points
}

/// Monte Carlo estimate of the accumulated transition matrix: for every
/// start node, `runs` independent walks of `steps` steps; each visited node
/// contributes its canonical basis vector (walks always inherit initial
/// vectors, never updated ones) and counts are averaged over runs. Walks
/// stop early at dangling nodes.
///
/// Every start node draws from its own seeded stream, so the result is
/// bit-identical for any thread count.
pub fn mc_inheritance(
    net: &WeightedNetwork,
    steps: usize,
    runs: u64,
    seed: u64,
) -> Result<AccumulatedTransition> {
    if runs == 0 {
        return Err(Error::InvalidRunCount);
    }
    let n = net.node_count();
    let totals: Vec<f64> = (0..n as u32).map(|i| net.strength(i)).collect();
    let cumulative: Vec<Vec<f64>> = (0..n as u32)
        .map(|i| {
            let mut acc = 0.0;
            net.neighbors(i)
                .iter()
                .map(|&(_, w)| {
                    acc += w;
                    acc
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(start as u64 + 1);
            let mut counts = vec![0u64; n];
            for _ in 0..runs {
                let mut current = start as u32;
                for _ in 0..steps {
                    let neigh = net.neighbors(current);
                    if neigh.is_empty() {
                        break;
                    }
                    let x: f64 = rng.gen::<f64>() * totals[current as usize];
                    let cum = &cumulative[current as usize];
                    let pick = cum.partition_point(|&c| c <= x).min(neigh.len() - 1);
                    current = neigh[pick].0;
                    counts[current as usize] += 1;
                }
            }
            counts
                .into_iter()
                .map(|c| c as f64 / runs as f64)
                .collect()
        })
        .collect();
    let entries = DenseMatrix::from_rows(rows).expect("counts are finite");
    Ok(AccumulatedTransition {
        vocab: net.vocab().clone(),
        steps,
        entries,
    })
}

/// Composition of normalization, power accumulation and cosine projection.
pub fn rim_pipeline(
    fa: &WeightedNetwork,
    steps: usize,
    config: &RimConfig,
) -> Result<SimilarityNetwork> {
    let p = row_normalize(fa, config.dangling)?;
    let t = power_sum(&p, steps);
    Ok(cosine_project(&t, config.cosine))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, DupPolicy};

    fn directed(tokens: &[&str], edges: &[(&str, &str, f64)]) -> WeightedNetwork {
        build_network(
            Vocabulary::new(tokens.to_vec()).unwrap(),
            edges,
            true,
            DupPolicy::Error,
        )
        .unwrap()
    }

    fn two_cycle() -> WeightedNetwork {
        directed(&["a", "b"], &[("a", "b", 2.0), ("b", "a", 1.0)])
    }

    #[test]
    fn row_normalize_single_entry_rows() {
        let p = row_normalize(&two_cycle(), DanglingPolicy::Error).unwrap();
        assert_eq!(p.entries().row(0), &[0.0, 1.0]);
        assert_eq!(p.entries().row(1), &[1.0, 0.0]);
    }

    #[test]
    fn row_normalize_divides_by_row_sum() {
        let net = directed(
            &["a", "b", "c"],
            &[("a", "b", 3.0), ("a", "c", 1.0), ("b", "a", 1.0), ("c", "a", 2.0)],
        );
        let p = row_normalize(&net, DanglingPolicy::Error).unwrap();
        assert_eq!(p.entries().row(0), &[0.0, 0.75, 0.25]);
    }

    #[test]
    fn dangling_error_policy_rejects() {
        let net = directed(&["a", "b"], &[("a", "b", 1.0)]);
        let err = row_normalize(&net, DanglingPolicy::Error).unwrap_err();
        assert!(matches!(err, Error::DanglingNode(t) if t == "b"));
    }

    #[test]
    fn dangling_keep_zero_retains_zero_row() {
        let net = directed(&["a", "b"], &[("a", "b", 1.0)]);
        let p = row_normalize(&net, DanglingPolicy::KeepZero).unwrap();
        assert_eq!(p.entries().row(1), &[0.0, 0.0]);
        assert_eq!(p.entries().row(0), &[0.0, 1.0]);
    }

    #[test]
    fn dangling_drop_prunes_to_fixed_point() {
        // dropping c strands b, which must be dropped in turn; a keeps its
        // edge into the x/y cycle and survives
        let net = directed(
            &["a", "b", "c", "x", "y"],
            &[
                ("a", "b", 1.0),
                ("b", "c", 1.0),
                ("x", "y", 1.0),
                ("y", "x", 1.0),
                ("a", "x", 1.0),
            ],
        );
        let p = row_normalize(&net, DanglingPolicy::Drop).unwrap();
        let tokens: Vec<&str> = p.vocab().tokens().iter().map(String::as_str).collect();
        assert_eq!(tokens, vec!["a", "x", "y"]);
        // a's only surviving edge is a -> x, renormalized to 1
        assert_eq!(p.entries().row(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn dangling_drop_everything_is_empty() {
        let net = directed(&["a", "b"], &[("a", "b", 1.0)]);
        let err = row_normalize(&net, DanglingPolicy::Drop).unwrap_err();
        assert!(matches!(err, Error::EmptyNetwork));
    }

    #[test]
    fn power_sum_two_cycle() {
        let p = row_normalize(&two_cycle(), DanglingPolicy::Error).unwrap();
        let t = power_sum(&p, 4);
        assert_eq!(t.entries().row(0), &[2.0, 2.0]);
        assert_eq!(t.entries().row(1), &[2.0, 2.0]);
    }

    #[test]
    fn power_sum_one_step_is_p() {
        let p = row_normalize(&two_cycle(), DanglingPolicy::Error).unwrap();
        let t = power_sum(&p, 1);
        assert_eq!(t.entries(), p.entries());
    }

    #[test]
    fn power_sum_matches_naive_oracle() {
        // random-ish substochastic 5x5 with fixed entries
        let rows = vec![
            vec![0.1, 0.2, 0.0, 0.3, 0.1],
            vec![0.0, 0.0, 0.5, 0.5, 0.0],
            vec![0.2, 0.2, 0.2, 0.2, 0.2],
            vec![0.0, 0.9, 0.0, 0.0, 0.0],
            vec![0.3, 0.0, 0.3, 0.0, 0.3],
        ];
        let entries = DenseMatrix::from_rows(rows.clone()).unwrap();
        let vocab = Vocabulary::new(["a", "b", "c", "d", "e"]).unwrap();
        let p = TransitionMatrix::new(vocab, entries.clone()).unwrap();
        let t = power_sum(&p, 4);
        // naive oracle: recompute each power from scratch, right-multiplying
        let mut expected = DenseMatrix::zeros(5, 5);
        for s in 1..=4 {
            let mut pow = entries.clone();
            for _ in 1..s {
                pow = pow.matmul(&entries);
            }
            expected.add_assign(&pow);
        }
        assert!(t.entries().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn cosine_identity_rows_give_no_edges() {
        let vocab = Vocabulary::new(["a", "b", "c"]).unwrap();
        let t = AccumulatedTransition::from_entries(vocab, 1, DenseMatrix::identity(3));
        let sim = cosine_project(&t, CosineOptions::default());
        assert_eq!(sim.network().edge_count(), 0);
        for i in 0..3 {
            assert_eq!(sim.matrix().get(i, i), 1.0);
        }
    }

    #[test]
    fn cosine_identical_rows_similarity_one() {
        let vocab = Vocabulary::new(["a", "b"]).unwrap();
        let entries =
            DenseMatrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let t = AccumulatedTransition::from_entries(vocab, 1, entries);
        let sim = cosine_project(&t, CosineOptions::default());
        assert!((sim.matrix().get(0, 1) - 1.0).abs() < 1e-12);
        assert!((sim.network().weight(0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_half_overlap() {
        let vocab = Vocabulary::new(["a", "b"]).unwrap();
        let entries =
            DenseMatrix::from_rows(vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        // rectangular feature space: wrap manually
        let mut m = entries;
        m.normalize_rows_l2();
        let fs = m.gram();
        let sim = SimilarityNetwork::from_matrix(vocab, fs, 0.0);
        assert!((sim.matrix().get(0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cosine_zero_row_has_no_similarity() {
        let vocab = Vocabulary::new(["a", "b"]).unwrap();
        let entries = DenseMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.3, 0.7]]).unwrap();
        let t = AccumulatedTransition::from_entries(vocab, 1, entries);
        let sim = cosine_project(&t, CosineOptions::default());
        assert_eq!(sim.matrix().get(0, 0), 0.0);
        assert_eq!(sim.matrix().get(0, 1), 0.0);
        assert_eq!(sim.matrix().get(1, 1), 1.0);
        assert_eq!(sim.network().edge_count(), 0);
    }

    #[test]
    fn convergence_zero_matrix_is_fixed_point() {
        let vocab = Vocabulary::new(["a", "b"]).unwrap();
        let p = TransitionMatrix::new(vocab, DenseMatrix::zeros(2, 2)).unwrap();
        for point in convergence_profile(&p, 5) {
            assert_eq!(point.fs_delta, 0.0);
            assert_eq!(point.t_delta, 0.0);
            assert_eq!(point.fs_hamming, 0.0);
        }
    }

    #[test]
    fn convergence_two_cycle_oscillates() {
        // period-2 chain: T_2=[[1,1],[1,1]], T_3=[[1,2],[2,1]], T_4=[[2,2],[2,2]]
        // so the off-diagonal cosine alternates 1, 4/5, 1 and the deltas are
        // 1, 0.2, 0.2 from hand computation
        let p = row_normalize(&two_cycle(), DanglingPolicy::Error).unwrap();
        let points = convergence_profile(&p, 4);
        assert!((points[0].fs_delta - 1.0).abs() < 1e-15);
        assert!((points[1].fs_delta - 0.2).abs() < 1e-15);
        assert!((points[2].fs_delta - 0.2).abs() < 1e-15);
    }

    #[test]
    fn mc_two_cycle_is_deterministic() {
        let t = mc_inheritance(&two_cycle(), 4, 10_000, 7).unwrap();
        assert_eq!(t.entries().row(0), &[2.0, 2.0]);
        assert_eq!(t.entries().row(1), &[2.0, 2.0]);
    }

    #[test]
    fn mc_dangling_start_gives_zero_row() {
        let net = directed(&["a", "b"], &[("b", "a", 1.0)]);
        let t = mc_inheritance(&net, 4, 100, 3).unwrap();
        assert_eq!(t.entries().row(0), &[0.0, 0.0]);
        // b's walk hops to a and halts there
        assert_eq!(t.entries().row(1), &[1.0, 0.0]);
    }

    #[test]
    fn mc_zero_runs_rejected() {
        let err = mc_inheritance(&two_cycle(), 4, 0, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidRunCount));
    }

    #[test]
    fn mc_same_seed_same_result() {
        let net = directed(
            &["a", "b", "c"],
            &[
                ("a", "b", 1.0),
                ("a", "c", 2.0),
                ("b", "c", 1.0),
                ("c", "a", 1.0),
            ],
        );
        let t1 = mc_inheritance(&net, 3, 500, 42).unwrap();
        let t2 = mc_inheritance(&net, 3, 500, 42).unwrap();
        assert_eq!(t1.entries(), t2.entries());
    }

    #[test]
    fn pipeline_two_cycle_full_similarity() {
        // both T rows equal (2,2), so the single similarity is 1
        let sim = rim_pipeline(&two_cycle(), 4, &RimConfig::default()).unwrap();
        assert!((sim.network().weight(0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pipeline_drop_policy_shrinks_vocabulary() {
        let net = directed(
            &["a", "b", "sink"],
            &[("a", "b", 1.0), ("b", "a", 1.0), ("a", "sink", 1.0)],
        );
        let config = RimConfig {
            dangling: DanglingPolicy::Drop,
            ..RimConfig::default()
        };
        let sim = rim_pipeline(&net, 4, &config).unwrap();
        assert_eq!(sim.vocab().len(), 2);
    }
}
