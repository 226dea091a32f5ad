//! Empirical reference network: pairwise cosine similarity of feature
//! production vectors. Two concepts are linked whenever their vectors
//! overlap at all; the link weight is the cosine.

use rayon::prelude::*;

use crate::ingest::FeatureMatrix;
use crate::matrix::DenseMatrix;
use crate::rim::SimilarityNetwork;

/// Build the feature-similarity network of a feature matrix.
///
/// `threshold` keeps only cosines strictly above it as edges; the default
/// pipeline uses 0.0 (any positive overlap is an edge).
pub fn fp_cosine_network(fm: &FeatureMatrix, threshold: f64) -> SimilarityNetwork {
    let n = fm.concept_count();
    let norms: Vec<f64> = (0..n as u32).map(|i| fm.row_norm(i)).collect();
    let mut fs = DenseMatrix::zeros(n, n);
    // upper triangle in parallel, then mirror for exact symmetry
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row_i = fm.row(i as u32);
            (i..n)
                .map(|j| {
                    if i == j {
                        return 1.0;
                    }
                    let dot = sparse_dot_kahan(row_i, fm.row(j as u32));
                    dot / (norms[i] * norms[j])
                })
                .collect()
        })
        .collect();
    for (i, row) in upper.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + offset;
            fs.set(i, j, v);
            fs.set(j, i, v);
        }
    }
    SimilarityNetwork::from_matrix(fm.vocab().clone(), fs, threshold)
}

/// Dot product of two sorted sparse rows with compensated (Kahan) summation;
/// production-norm rows can carry dozens of terms and the reference values
/// should not drift with summation error.
fn sparse_dot_kahan(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        match a[ia].0.cmp(&b[ib].0) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                let term = a[ia].1 * b[ib].1 - comp;
                let next = sum + term;
                comp = (next - sum) - term;
                sum = next;
                ia += 1;
                ib += 1;
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_fp_reader;

    fn matrix(input: &str) -> FeatureMatrix {
        parse_fp_reader(input.as_bytes()).unwrap()
    }

    #[test]
    fn identical_vectors_cosine_one() {
        let fm = matrix("banjo\tstrings\t20\nbanjo\twood\t5\naccordion\tstrings\t20\naccordion\twood\t5\n");
        let sim = fp_cosine_network(&fm, 0.0);
        assert!((sim.network().weight(0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_vectors_no_edge() {
        let fm = matrix("banjo\tstrings\t20\nspider\tlegs\t8\n");
        let sim = fp_cosine_network(&fm, 0.0);
        assert_eq!(sim.network().edge_count(), 0);
        assert_eq!(sim.matrix().get(0, 1), 0.0);
    }

    #[test]
    fn half_overlap_cosine() {
        let fm = matrix("a\tf1\t1\na\tf2\t1\nb\tf2\t1\nb\tf3\t1\n");
        let sim = fp_cosine_network(&fm, 0.0);
        assert!((sim.network().weight(0, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scaling_a_row_leaves_network_unchanged() {
        let base = matrix("a\tf1\t2\na\tf2\t3\nb\tf2\t1\nb\tf3\t4\nc\tf1\t5\n");
        let scaled = matrix("a\tf1\t14\na\tf2\t21\nb\tf2\t1\nb\tf3\t4\nc\tf1\t5\n");
        let s1 = fp_cosine_network(&base, 0.0);
        let s2 = fp_cosine_network(&scaled, 0.0);
        assert_eq!(s1.network().edge_count(), s2.network().edge_count());
        assert!(s1.matrix().max_abs_diff(s2.matrix()) < 1e-12);
    }

    #[test]
    fn output_is_symmetric_with_unit_diagonal() {
        let fm = matrix("a\tf1\t1\na\tf2\t2\nb\tf2\t3\nc\tf1\t1\nc\tf3\t9\n");
        let sim = fp_cosine_network(&fm, 0.0);
        let m = sim.matrix();
        for i in 0..3 {
            assert_eq!(m.get(i, i), 1.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
            }
        }
    }
}
