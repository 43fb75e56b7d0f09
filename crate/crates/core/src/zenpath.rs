//! Zen-paths: variable sequences whose consecutive pairs pick the
//! bivariate PDPs worth drawing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VividError};
use crate::vivi::ViviMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    /// Non-isolated variables, in matrix order.
    pub nodes: Vec<String>,
    /// Edges above the cutoff, `u < v`, in matrix pair order.
    pub edges: Vec<Edge>,
    /// Duplicate edges added by [`zpath_greedy`] to even out degrees.
    pub augmented: Vec<Edge>,
    /// Full interaction lookup, indexed like `nodes`.
    weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "greedy.weighted")]
    GreedyWeighted,
    #[serde(rename = "strictly.weighted")]
    StrictlyWeighted,
}

impl std::str::FromStr for Method {
    type Err = VividError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy.weighted" | "greedy" => Ok(Self::GreedyWeighted),
            "strictly.weighted" | "strict" => Ok(Self::StrictlyWeighted),
            other => Err(invalid(format!(
                "zen-path method must be `greedy.weighted` or `strictly.weighted`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZPath {
    pub method: Method,
    pub connected: bool,
    pub sequences: Vec<Vec<String>>,
}

impl ZPath {
    /// Consecutive pairs across all sequences, in drawing order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        self.sequences
            .iter()
            .flat_map(|s| s.windows(2).map(|w| (w[0].clone(), w[1].clone())))
            .collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (R's default, type 7).
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("quantile of no values"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("quantile probability {p} outside [0, 1]")));
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let h = (xs.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    Ok(xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo]))
}

/// Quantile of the off-diagonal entries (both triangles).
pub fn offdiag_quantile(v: &ViviMatrix, p: f64) -> Result<f64> {
    let m = v.len();
    let vals: Vec<f64> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| v.matrix[i][j])
        .collect();
    quantile(&vals, p)
}

pub fn build_graph(v: &ViviMatrix, cutoff: f64) -> Result<WeightedGraph> {
    if !cutoff.is_finite() {
        return Err(invalid("cutoff must be finite"));
    }
    let kept: Vec<(usize, usize, f64)> = v.pairs().into_iter().filter(|p| p.2 > cutoff).collect();
    if kept.is_empty() {
        return Err(VividError::EmptyGraph(cutoff));
    }
    let used: BTreeSet<usize> = kept.iter().flat_map(|&(i, j, _)| [i, j]).collect();
    let idx: Vec<usize> = used.into_iter().collect();
    let nodes: Vec<String> = idx.iter().map(|&i| v.vars[i].clone()).collect();
    let weights = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| v.matrix[i][j]).collect())
        .collect();
    let edges = kept
        .into_iter()
        .map(|(i, j, w)| {
            let (a, b) = (&v.vars[i], &v.vars[j]);
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            Edge {
                u: u.clone(),
                v: v.clone(),
                weight: w,
            }
        })
        .collect();
    Ok(WeightedGraph {
        nodes,
        edges,
        augmented: Vec::new(),
        weights,
    })
}

struct MultiEdge {
    a: usize,
    b: usize,
    weight: f64,
    augmented: bool,
}

impl WeightedGraph {
    fn node(&self, name: &str) -> usize {
        self.nodes.iter().position(|n| n == name).expect("edge endpoint is a node")
    }

    fn index_edges(&self) -> Vec<MultiEdge> {
        self.edges
            .iter()
            .map(|e| MultiEdge {
                a: self.node(&e.u),
                b: self.node(&e.v),
                weight: e.weight,
                augmented: false,
            })
            .collect()
    }

    /// Edges in strictly decreasing weight, ties by `(u, v)`.
    fn sorted_edges(&self) -> Vec<&Edge> {
        let mut es: Vec<&Edge> = self.edges.iter().collect();
        es.sort_by(|x, y| {
            y.weight
                .total_cmp(&x.weight)
                .then_with(|| x.u.cmp(&y.u))
                .then_with(|| x.v.cmp(&y.v))
        });
        es
    }
}

fn components(n: usize, edges: &[MultiEdge]) -> Vec<usize> {
    let mut comp: Vec<usize> = (0..n).collect();
    let find = |comp: &mut Vec<usize>, mut x: usize| {
        while comp[x] != x {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        x
    };
    for e in edges {
        let (ra, rb) = (find(&mut comp, e.a), find(&mut comp, e.b));
        if ra != rb {
            comp[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|x| find(&mut comp, x)).collect()
}

/// Greedy Eulerian traversal, one sequence per connected component.
pub fn zpath_greedy(g: &WeightedGraph) -> (ZPath, WeightedGraph) {
    let n = g.nodes.len();
    let mut edges = g.index_edges();
    let comp = components(n, &edges);
    let incident = |edges: &[MultiEdge], x: usize| -> f64 {
        edges
            .iter()
            .filter(|e| !e.augmented && (e.a == x || e.b == x))
            .map(|e| e.weight)
            .sum()
    };
    let sums: Vec<f64> = (0..n).map(|x| incident(&edges, x)).collect();
    let by_sum = |x: &usize, y: &usize| {
        sums[*y]
            .total_cmp(&sums[*x])
            .then_with(|| g.nodes[*x].cmp(&g.nodes[*y]))
    };

    let mut roots: Vec<usize> = comp.clone();
    roots.sort_unstable();
    roots.dedup();

    let mut augmented = Vec::new();
    for &r in &roots {
        let mut odd: Vec<usize> = (0..n)
            .filter(|&x| comp[x] == r)
            .filter(|&x| edges.iter().filter(|e| e.a == x || e.b == x).count() % 2 == 1)
            .collect();
        odd.sort_by(by_sum);
        for pair in odd.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            edges.push(MultiEdge {
                a,
                b,
                weight: g.weights[a][b],
                augmented: true,
            });
            let (u, v) = if g.nodes[a] < g.nodes[b] { (a, b) } else { (b, a) };
            augmented.push(Edge {
                u: g.nodes[u].clone(),
                v: g.nodes[v].clone(),
                weight: g.weights[a][b],
            });
        }
    }

    // Heaviest original edge of each component decides the start and the
    // order of the tours.
    let heaviest = |r: usize| {
        edges
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.augmented && comp[e.a] == r)
            .min_by(|(_, x), (_, y)| {
                y.weight
                    .total_cmp(&x.weight)
                    .then_with(|| edge_key(g, x).cmp(&edge_key(g, y)))
            })
            .map(|(k, _)| k)
            .expect("component has an edge")
    };
    let mut tours: Vec<(usize, usize)> = roots.iter().map(|&r| (r, heaviest(r))).collect();
    tours.sort_by(|(_, x), (_, y)| {
        edges[*y]
            .weight
            .total_cmp(&edges[*x].weight)
            .then_with(|| edge_key(g, &edges[*x]).cmp(&edge_key(g, &edges[*y])))
    });

    let mut used = vec![false; edges.len()];
    let sequences = tours
        .iter()
        .map(|&(_, h)| {
            let (a, b) = (edges[h].a, edges[h].b);
            let start = match sums[a]
                .total_cmp(&sums[b])
                .then_with(|| g.nodes[a].cmp(&g.nodes[b]))
            {
                std::cmp::Ordering::Greater => b,
                _ => a,
            };
            hierholzer(g, &edges, &mut used, start)
                .into_iter()
                .map(|x| g.nodes[x].clone())
                .collect()
        })
        .collect::<Vec<Vec<String>>>();
    let connected = sequences.len() == 1;
    let mut graph = g.clone();
    graph.augmented = augmented;
    (
        ZPath {
            method: Method::GreedyWeighted,
            connected,
            sequences,
        },
        graph,
    )
}

fn edge_key<'a>(g: &'a WeightedGraph, e: &MultiEdge) -> (&'a str, &'a str) {
    let (x, y) = (g.nodes[e.a].as_str(), g.nodes[e.b].as_str());
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Stack form of Hierholzer's algorithm that always leaves a vertex by its
/// heaviest unused edge (original before augmented, then by neighbour
/// name). Augmented edges at the end of the tour are dropped.
fn hierholzer(g: &WeightedGraph, edges: &[MultiEdge], used: &mut [bool], start: usize) -> Vec<usize> {
    // Each entry carries whether the edge it was reached by is augmented.
    let mut stack = vec![(start, false)];
    let mut circuit = Vec::new();
    while let Some(&(x, _)) = stack.last() {
        let next = edges
            .iter()
            .enumerate()
            .filter(|(k, e)| !used[*k] && (e.a == x || e.b == x))
            .min_by(|(_, p), (_, q)| {
                let other = |e: &MultiEdge| if e.a == x { e.b } else { e.a };
                q.weight
                    .total_cmp(&p.weight)
                    .then(p.augmented.cmp(&q.augmented))
                    .then_with(|| g.nodes[other(p)].cmp(&g.nodes[other(q)]))
            })
            .map(|(k, e)| (k, if e.a == x { e.b } else { e.a }, e.augmented));
        match next {
            Some((k, y, aug)) => {
                used[k] = true;
                stack.push((y, aug));
            }
            None => circuit.extend(stack.pop()),
        }
    }
    // In pop order an entry's flag describes the edge to the entry popped
    // after it, so after reversal it describes the edge into it.
    circuit.reverse();
    while circuit.len() > 2 && circuit.last().is_some_and(|c| c.1) {
        circuit.pop();
    }
    circuit.into_iter().map(|c| c.0).collect()
}

/// Visits the original edges in strictly decreasing weight, starting a new
/// sequence whenever the next edge does not touch the current end.
pub fn zpath_strict(g: &WeightedGraph, connect: bool) -> ZPath {
    let es = g.sorted_edges();
    let mut sequences: Vec<Vec<String>> = Vec::new();
    for (k, e) in es.iter().enumerate() {
        if let Some(cur) = sequences.last_mut() {
            let last = cur.last().expect("sequences are nonempty");
            if *last == e.u {
                cur.push(e.v.clone());
                continue;
            }
            if *last == e.v {
                cur.push(e.u.clone());
                continue;
            }
        }
        let shares = |x: &str| es.get(k + 1).is_some_and(|n| n.u == x || n.v == x);
        let start = if shares(&e.u) && !shares(&e.v) {
            vec![e.v.clone(), e.u.clone()]
        } else {
            vec![e.u.clone(), e.v.clone()]
        };
        sequences.push(start);
    }
    if connect {
        sequences = vec![sequences.concat()];
    }
    ZPath {
        method: Method::StrictlyWeighted,
        connected: sequences.len() == 1,
        sequences,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vivi::Meta;

    fn matrix(names: &[&str], pairs: &[(&str, &str, f64)]) -> ViviMatrix {
        let m = names.len();
        let mut x = vec![vec![0.0; m]; m];
        for &(a, b, w) in pairs {
            let i = names.iter().position(|n| *n == a).unwrap();
            let j = names.iter().position(|n| *n == b).unwrap();
            x[i][j] = w;
            x[j][i] = w;
        }
        ViviMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            x,
            "agnostic",
            false,
            Meta::default(),
        )
        .unwrap()
    }

    fn seqs(z: &ZPath) -> Vec<Vec<&str>> {
        z.sequences
            .iter()
            .map(|s| s.iter().map(String::as_str).collect())
            .collect()
    }

    #[test]
    fn threshold_filter() {
        let v = matrix(&["a", "b", "c"], &[("a", "b", 0.5), ("b", "c", 0.2), ("a", "c", 0.1)]);
        let g = build_graph(&v, 0.15).unwrap();
        let e: Vec<(&str, &str)> = g.edges.iter().map(|e| (e.u.as_str(), e.v.as_str())).collect();
        assert_eq!(e, vec![("a", "b"), ("b", "c")]);
        assert_eq!(build_graph(&v, -1.0).unwrap().edges.len(), 3);
        assert!(matches!(build_graph(&v, 0.5), Err(VividError::EmptyGraph(_))));
        assert!(build_graph(&v, f64::NAN).is_err());
    }

    #[test]
    fn isolated_nodes_are_dropped() {
        let v = matrix(&["a", "b", "c"], &[("a", "c", 0.5)]);
        assert_eq!(build_graph(&v, 0.1).unwrap().nodes, vec!["a", "c"]);
    }

    #[test]
    fn greedy_examples() {
        let v = matrix(&["a", "b"], &[("a", "b", 1.0)]);
        let (z, _) = zpath_greedy(&build_graph(&v, 0.0).unwrap());
        assert_eq!(seqs(&z), vec![vec!["a", "b"]]);

        let v = matrix(&["a", "b", "c"], &[("a", "b", 3.0), ("b", "c", 2.0), ("a", "c", 1.0)]);
        let (z, aug) = zpath_greedy(&build_graph(&v, 0.0).unwrap());
        assert_eq!(seqs(&z), vec![vec!["a", "b", "c", "a"]]);
        assert!(aug.augmented.is_empty());

        let v = matrix(&["a", "b", "c"], &[("a", "b", 3.0), ("b", "c", 2.0)]);
        let (z, aug) = zpath_greedy(&build_graph(&v, 0.0).unwrap());
        assert_eq!(aug.augmented.len(), 1);
        assert_eq!(seqs(&z), vec![vec!["a", "b", "c"]]);
        let pairs = z.pairs();
        for (x, y) in [("a", "b"), ("b", "c")] {
            assert!(pairs.iter().any(|(p, q)| (p == x && q == y) || (p == y && q == x)));
        }
    }

    #[test]
    fn greedy_components_are_separate_tours() {
        let v = matrix(&["a", "b", "c", "d"], &[("a", "b", 1.0), ("c", "d", 2.0)]);
        let (z, _) = zpath_greedy(&build_graph(&v, 0.0).unwrap());
        assert_eq!(seqs(&z), vec![vec!["c", "d"], vec!["a", "b"]]);
        assert!(!z.connected);
    }

    #[test]
    fn strict_examples() {
        let v = matrix(
            &["a", "b", "c", "d", "e"],
            &[("a", "b", 5.0), ("b", "c", 4.0), ("d", "e", 3.0)],
        );
        let g = build_graph(&v, 0.0).unwrap();
        assert_eq!(seqs(&zpath_strict(&g, false)), vec![vec!["a", "b", "c"], vec!["d", "e"]]);
        let z = zpath_strict(&g, true);
        assert_eq!(seqs(&z), vec![vec!["a", "b", "c", "d", "e"]]);
        assert!(z.connected);

        let v = matrix(&["u", "v"], &[("u", "v", 1.0)]);
        assert_eq!(seqs(&zpath_strict(&build_graph(&v, 0.0).unwrap(), false)), vec![vec!["u", "v"]]);

        // The first edge is turned so that it leads into the second.
        let v = matrix(&["a", "b", "c"], &[("a", "b", 5.0), ("a", "c", 4.0)]);
        assert_eq!(seqs(&zpath_strict(&build_graph(&v, 0.0).unwrap(), false)), vec![vec!["b", "a", "c"]]);
    }

    #[test]
    fn type_seven_quantile() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.5);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 1.0).unwrap(), 3.0);
        assert_eq!(quantile(&[5.0], 0.9).unwrap(), 5.0);
        assert!((quantile(&[0.0, 10.0], 0.9).unwrap() - 9.0).abs() < 1e-12);
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn json_shape() {
        let z = ZPath {
            method: Method::StrictlyWeighted,
            connected: false,
            sequences: vec![vec!["a".into(), "b".into()]],
        };
        let text = serde_json::to_string(&z).unwrap();
        assert_eq!(
            text,
            r#"{"method":"strictly.weighted","connected":false,"sequences":[["a","b"]]}"#
        );
    }
}
