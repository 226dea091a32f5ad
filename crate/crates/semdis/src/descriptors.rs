//! Statistical descriptors of a weighted network: degree and strength,
//! clustering, hop-metric path lengths, diameter, assortativity and
//! cumulative distributions.
//!
//! Path metrics and clustering are computed on the binarized graph (any
//! positive weight is an edge, hop counts not weighted lengths). Directed
//! networks are symmetrized with the max rule before any descriptor is
//! computed.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{SymmetrizeRule, WeightedNetwork};

#[derive(Debug, Clone, Serialize)]
pub struct NodeMetrics {
    pub token: String,
    pub degree: usize,
    pub strength: f64,
    pub clustering: f64,
}

/// Whole-network descriptor summary, serializable to JSON (stable key
/// order) and to a one-row CSV in table column order N, <s>, L, D, C, r.
#[derive(Debug, Clone, Serialize)]
pub struct DescriptorReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub mean_degree: f64,
    pub mean_strength: f64,
    #[serde(rename = "L")]
    pub avg_path_length: f64,
    #[serde(rename = "D")]
    pub diameter: usize,
    #[serde(rename = "C")]
    pub avg_clustering: f64,
    #[serde(rename = "r")]
    pub assortativity: Option<f64>,
    pub component_count: usize,
    pub per_node: Vec<NodeMetrics>,
}

impl DescriptorReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let r = self
            .assortativity
            .map_or_else(|| "NaN".to_string(), |r| r.to_string());
        format!(
            "N,mean_strength,L,D,C,r\n{},{},{},{},{},{}\n",
            self.n, self.mean_strength, self.avg_path_length, self.diameter, self.avg_clustering, r
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    /// Mean hop distance over ordered reachable pairs (i != j).
    pub avg_path_length: f64,
    /// Longest geodesic among reachable pairs.
    pub diameter: usize,
    pub component_count: usize,
}

/// Cumulative distribution flavor: `Survival` is the fraction of values at
/// or above x, `Below` the fraction strictly below x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistributionMode {
    #[default]
    Survival,
    Below,
}

/// Per-node (degree, strength) pairs.
pub fn strength_and_degree(net: &WeightedNetwork) -> Vec<(usize, f64)> {
    (0..net.node_count() as u32)
        .map(|i| (net.degree(i), net.strength(i)))
        .collect()
}

/// Per-node clustering coefficients and their arithmetic mean. Nodes of
/// degree < 2 count as 0.
pub fn clustering(net: &WeightedNetwork) -> (Vec<f64>, f64) {
    let n = net.node_count();
    let per_node: Vec<f64> = (0..n as u32)
        .into_par_iter()
        .map(|i| {
            let neigh = net.neighbors(i);
            let k = neigh.len();
            if k < 2 {
                return 0.0;
            }
            let mut links = 0usize;
            for &(u, _) in neigh {
                links += count_common_sorted(neigh, net.neighbors(u));
            }
            // every neighbor-neighbor edge was seen from both endpoints
            let e_i = links / 2;
            2.0 * e_i as f64 / (k as f64 * (k as f64 - 1.0))
        })
        .collect();
    let avg = per_node.iter().sum::<f64>() / n as f64;
    (per_node, avg)
}

fn count_common_sorted(a: &[(u32, f64)], b: &[(u32, f64)]) -> usize {
    let mut count = 0;
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        match a[ia].0.cmp(&b[ib].0) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                ia += 1;
                ib += 1;
            }
        }
    }
    count
}

/// Average geodesic length, diameter and component count via per-source
/// breadth-first search. Unreachable pairs are excluded from the average.
pub fn path_stats(net: &WeightedNetwork) -> Result<PathStats> {
    let n = net.node_count();
    if net.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let (dist_sum, max_dist, pair_count) = (0..n as u32)
        .into_par_iter()
        .map(|src| {
            let dist = bfs_distances(net, src);
            let mut sum = 0u64;
            let mut max = 0u32;
            let mut count = 0u64;
            for (j, &d) in dist.iter().enumerate() {
                if j as u32 != src && d != u32::MAX {
                    sum += u64::from(d);
                    max = max.max(d);
                    count += 1;
                }
            }
            (sum, max, count)
        })
        .reduce(
            || (0, 0, 0),
            |a, b| (a.0 + b.0, a.1.max(b.1), a.2 + b.2),
        );
    let component_count = count_components(net);
    Ok(PathStats {
        avg_path_length: dist_sum as f64 / pair_count as f64,
        diameter: max_dist as usize,
        component_count,
    })
}

fn bfs_distances(net: &WeightedNetwork, src: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; net.node_count()];
    dist[src as usize] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let d = dist[u as usize];
        for &(v, _) in net.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = d + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn count_components(net: &WeightedNetwork) -> usize {
    let n = net.node_count();
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n as u32 {
        if seen[start as usize] {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::new();
        seen[start as usize] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in net.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    components
}

/// Degree assortativity: Pearson correlation over edge-end degree pairs,
/// both orientations of every edge. `None` when the degree variance is zero
/// (regular graphs) or there are no edges.
pub fn assortativity(net: &WeightedNetwork) -> Option<f64> {
    let degrees: Vec<f64> = (0..net.node_count() as u32)
        .map(|i| net.degree(i) as f64)
        .collect();
    let mut pairs = 0u64;
    let mut sum_x = 0.0;
    let mut sum_x2 = 0.0;
    let mut sum_xy = 0.0;
    for (i, j, _) in net.edges() {
        let (ki, kj) = (degrees[i as usize], degrees[j as usize]);
        pairs += 2;
        sum_x += ki + kj;
        sum_x2 += ki * ki + kj * kj;
        sum_xy += 2.0 * ki * kj;
    }
    if pairs == 0 {
        return None;
    }
    let n = pairs as f64;
    let mean = sum_x / n;
    let var = sum_x2 / n - mean * mean;
    if var <= 0.0 {
        return None;
    }
    Some((sum_xy / n - mean * mean) / var)
}

/// Cumulative distribution over the distinct values of the input, ascending.
pub fn distribution_points(values: &[f64], mode: DistributionMode) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to bin".to_string()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut pos = 0;
    while pos < sorted.len() {
        let x = sorted[pos];
        let fraction = match mode {
            DistributionMode::Survival => (sorted.len() - pos) as f64 / n,
            DistributionMode::Below => pos as f64 / n,
        };
        points.push((x, fraction));
        let mut next = pos + 1;
        while next < sorted.len() && sorted[next] == x {
            next += 1;
        }
        pos = next;
    }
    Ok(points)
}

/// Full descriptor report. Directed input is symmetrized (max rule) first.
pub fn descriptor_report(net: &WeightedNetwork) -> Result<DescriptorReport> {
    let sym;
    let net = if net.is_directed() {
        sym = net.symmetrize(SymmetrizeRule::Max);
        &sym
    } else {
        net
    };
    let n = net.node_count();
    let ks = strength_and_degree(net);
    let (per_node_c, avg_clustering) = clustering(net);
    let paths = path_stats(net)?;
    let per_node = net
        .vocab()
        .iter()
        .map(|(i, token)| NodeMetrics {
            token: token.to_string(),
            degree: ks[i as usize].0,
            strength: ks[i as usize].1,
            clustering: per_node_c[i as usize],
        })
        .collect();
    Ok(DescriptorReport {
        n,
        mean_degree: 2.0 * net.edge_count() as f64 / n as f64,
        mean_strength: ks.iter().map(|&(_, s)| s).sum::<f64>() / n as f64,
        avg_path_length: paths.avg_path_length,
        diameter: paths.diameter,
        avg_clustering,
        assortativity: assortativity(net),
        component_count: paths.component_count,
        per_node,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_network, DupPolicy};
    use crate::vocab::Vocabulary;

    fn undirected(tokens: &[&str], edges: &[(&str, &str, f64)]) -> WeightedNetwork {
        build_network(
            Vocabulary::new(tokens.to_vec()).unwrap(),
            edges,
            false,
            DupPolicy::Error,
        )
        .unwrap()
    }

    #[test]
    fn triangle_strength_and_degree() {
        let net = undirected(
            &["a", "b", "c"],
            &[("a", "b", 0.5), ("b", "c", 0.5), ("c", "a", 0.5)],
        );
        for (k, s) in strength_and_degree(&net) {
            assert_eq!(k, 2);
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn isolated_node_zero_metrics() {
        let net = undirected(&["a", "b", "lone"], &[("a", "b", 1.0)]);
        let ks = strength_and_degree(&net);
        assert_eq!(ks[2], (0, 0.0));
    }

    #[test]
    fn star_degrees() {
        let net = undirected(
            &["hub", "x", "y", "z"],
            &[("hub", "x", 1.0), ("hub", "y", 1.0), ("hub", "z", 1.0)],
        );
        let ks = strength_and_degree(&net);
        assert_eq!(ks[0], (3, 3.0));
        for leaf in 1..4 {
            assert_eq!(ks[leaf], (1, 1.0));
        }
    }

    #[test]
    fn triangle_is_fully_clustered() {
        let net = undirected(
            &["a", "b", "c"],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)],
        );
        let (per_node, avg) = clustering(&net);
        assert_eq!(per_node, vec![1.0, 1.0, 1.0]);
        assert_eq!(avg, 1.0);
    }

    #[test]
    fn path_has_no_triangles() {
        let net = undirected(&["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 1.0)]);
        let (_, avg) = clustering(&net);
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn pendant_on_triangle_clustering() {
        // 1-2, 1-3, 2-3, 1-4
        let net = undirected(
            &["n1", "n2", "n3", "n4"],
            &[
                ("n1", "n2", 1.0),
                ("n1", "n3", 1.0),
                ("n2", "n3", 1.0),
                ("n1", "n4", 1.0),
            ],
        );
        let (per_node, avg) = clustering(&net);
        assert!((per_node[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((per_node[1] - 1.0).abs() < 1e-15);
        assert!((per_node[2] - 1.0).abs() < 1e-15);
        assert_eq!(per_node[3], 0.0);
        assert!((avg - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn path_stats_on_three_node_path() {
        let net = undirected(&["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 1.0)]);
        let stats = path_stats(&net).unwrap();
        assert!((stats.avg_path_length - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(stats.diameter, 2);
        assert_eq!(stats.component_count, 1);
    }

    #[test]
    fn complete_graph_diameter_one() {
        let net = undirected(
            &["a", "b", "c", "d"],
            &[
                ("a", "b", 1.0),
                ("a", "c", 1.0),
                ("a", "d", 1.0),
                ("b", "c", 1.0),
                ("b", "d", 1.0),
                ("c", "d", 1.0),
            ],
        );
        let stats = path_stats(&net).unwrap();
        assert_eq!(stats.avg_path_length, 1.0);
        assert_eq!(stats.diameter, 1);
    }

    #[test]
    fn disjoint_edges_exclude_unreachable_pairs() {
        let net = undirected(
            &["a", "b", "c", "d"],
            &[("a", "b", 1.0), ("c", "d", 1.0)],
        );
        let stats = path_stats(&net).unwrap();
        assert_eq!(stats.avg_path_length, 1.0);
        assert_eq!(stats.diameter, 1);
        assert_eq!(stats.component_count, 2);
    }

    #[test]
    fn no_edges_is_an_error() {
        let net = undirected(&["a", "b"], &[]);
        assert!(matches!(path_stats(&net).unwrap_err(), Error::NoEdges));
    }

    #[test]
    fn regular_graph_assortativity_undefined() {
        let net = undirected(
            &["a", "b", "c"],
            &[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)],
        );
        assert_eq!(assortativity(&net), None);
    }

    #[test]
    fn star_assortativity_is_minus_one() {
        let net = undirected(
            &["hub", "x", "y", "z"],
            &[("hub", "x", 1.0), ("hub", "y", 1.0), ("hub", "z", 1.0)],
        );
        let r = assortativity(&net).unwrap();
        assert!((r - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn joined_triangles_match_direct_pearson() {
        let net = undirected(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b", 1.0),
                ("b", "c", 1.0),
                ("c", "a", 1.0),
                ("d", "e", 1.0),
                ("e", "f", 1.0),
                ("f", "d", 1.0),
                ("c", "d", 1.0),
            ],
        );
        let r = assortativity(&net).unwrap();
        // direct Pearson over the 14 orientation pairs
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, j, _) in net.edges() {
            let (ki, kj) = (net.degree(i) as f64, net.degree(j) as f64);
            xs.push(ki);
            ys.push(kj);
            xs.push(kj);
            ys.push(ki);
        }
        assert_eq!(xs.len(), 14);
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / n;
        let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / n;
        let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / n;
        let expected = cov / (vx.sqrt() * vy.sqrt());
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn distribution_survival_and_below() {
        let values = [1.0, 2.0, 2.0, 5.0];
        let survival = distribution_points(&values, DistributionMode::Survival).unwrap();
        assert_eq!(survival, vec![(1.0, 1.0), (2.0, 0.75), (5.0, 0.25)]);
        let below = distribution_points(&values, DistributionMode::Below).unwrap();
        assert_eq!(below, vec![(1.0, 0.0), (2.0, 0.25), (5.0, 0.75)]);
    }

    #[test]
    fn distribution_degenerate_constant() {
        let points = distribution_points(&[3.0, 3.0, 3.0], DistributionMode::Survival).unwrap();
        assert_eq!(points, vec![(3.0, 1.0)]);
    }

    #[test]
    fn distribution_empty_is_error() {
        assert!(matches!(
            distribution_points(&[], DistributionMode::Survival).unwrap_err(),
            Error::EmptyInput(_)
        ));
    }

    #[test]
    fn report_symmetrizes_directed_input() {
        let net = build_network(
            Vocabulary::new(["a", "b", "c"]).unwrap(),
            &[("a", "b", 2.0), ("b", "a", 4.0), ("b", "c", 1.0)],
            true,
            DupPolicy::Error,
        )
        .unwrap();
        let report = descriptor_report(&net).unwrap();
        assert_eq!(report.n, 3);
        // max-rule symmetrization: strengths a=4, b=5, c=1
        assert!((report.per_node[0].strength - 4.0).abs() < 1e-15);
        assert!((report.per_node[1].strength - 5.0).abs() < 1e-15);
        assert!((report.mean_degree - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn report_json_keys() {
        let net = undirected(&["a", "b"], &[("a", "b", 1.0)]);
        let json = descriptor_report(&net).unwrap().to_json_string();
        for key in ["\"N\"", "\"L\"", "\"D\"", "\"C\"", "\"r\"", "\"mean_strength\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }
}
