//! Reordering of VIVI matrices: strongly interacting variables end up
//! adjacent and high-VIVI variables move to the top-left.
//!
//! Each variable gets a weight, the sum of its importance and its largest
//! interaction, both rescaled to [0, 1] across variables. Variables are
//! clustered by average linkage on `max(offdiag) - offdiag`, and at every
//! merge the subtree holding the heavier variable goes first. Every tie is
//! broken by variable name, so the result does not depend on the incoming
//! order.

use std::cmp::Ordering as CmpOrdering;

use crate::error::{invalid, Result, VividError};
use crate::vivi::{Meta, ViviMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    pub perm: Vec<usize>,
    pub objective: f64,
}

fn rescale01(xs: &[f64]) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        xs.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; xs.len()]
    }
}

fn row_max_offdiag(v: &ViviMatrix) -> Vec<f64> {
    let m = v.len();
    (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i)
                .map(|j| v.matrix[i][j])
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Per-variable weight used to pull variables towards the top-left.
pub fn weights(v: &ViviMatrix) -> Vec<f64> {
    let diag = rescale01(&v.importance());
    let rows = rescale01(&row_max_offdiag(v));
    diag.iter().zip(&rows).map(|(a, b)| a + b).collect()
}

fn dissimilarity(v: &ViviMatrix) -> Vec<Vec<f64>> {
    let top = v.pairs().iter().map(|p| p.2).fold(0.0, f64::max);
    let m = v.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| if i == j { 0.0 } else { top - v.matrix[i][j] })
                .collect()
        })
        .collect()
}

/// Cost minimized in spirit by [`ordering`]: position-weighted variable
/// weights plus the scaled dissimilarity between neighbours.
pub fn objective(v: &ViviMatrix, perm: &[usize]) -> f64 {
    let w = weights(v);
    let d = dissimilarity(v);
    let dmax = d.iter().flatten().copied().fold(0.0, f64::max);
    let m = perm.len() as f64;
    let position: f64 = perm.iter().enumerate().map(|(k, &i)| k as f64 * w[i]).sum();
    let adjacency: f64 = perm
        .windows(2)
        .map(|p| if dmax > 0.0 { d[p[0]][p[1]] / dmax } else { 0.0 })
        .sum();
    position + adjacency / m
}

enum Tree {
    Leaf(usize),
    Node(Box<Tree>, Box<Tree>),
}

struct Merge {
    tree: Tree,
    members: Vec<usize>,
}

/// Average-linkage merge history: the final tree plus each merge's pair of
/// member lists, in merge order.
fn cluster(v: &ViviMatrix) -> (Tree, Vec<(Vec<usize>, Vec<usize>)>) {
    let d = dissimilarity(v);
    let name = |i: usize| v.vars[i].as_str();
    let mut live: Vec<Merge> = (0..v.len())
        .map(|i| Merge {
            tree: Tree::Leaf(i),
            members: vec![i],
        })
        .collect();
    let mut history = Vec::new();
    while live.len() > 1 {
        let mut best: Option<(f64, &str, &str, usize, usize)> = None;
        for a in 0..live.len() {
            for b in a + 1..live.len() {
                let (ma, mb) = (&live[a].members, &live[b].members);
                let sum: f64 = ma
                    .iter()
                    .flat_map(|&i| mb.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| d[i][j])
                    .sum();
                let dist = sum / (ma.len() * mb.len()) as f64;
                let (na, nb) = (name(ma[0]), name(mb[0]));
                let (lo, hi) = if na < nb { (na, nb) } else { (nb, na) };
                let better = match &best {
                    None => true,
                    Some((bd, bl, bh, _, _)) => dist
                        .total_cmp(bd)
                        .then_with(|| lo.cmp(bl))
                        .then_with(|| hi.cmp(bh))
                        .is_lt(),
                };
                if better {
                    best = Some((dist, lo, hi, a, b));
                }
            }
        }
        let (_, _, _, a, b) = best.expect("at least two clusters");
        let right = live.remove(b);
        let left = live.remove(a);
        history.push((left.members.clone(), right.members.clone()));
        let mut members: Vec<usize> = left.members.into_iter().chain(right.members).collect();
        members.sort_by(|&i, &j| name(i).cmp(name(j)));
        live.push(Merge {
            tree: Tree::Node(Box::new(left.tree), Box::new(right.tree)),
            members,
        });
    }
    (live.pop().expect("nonempty").tree, history)
}

struct Summary<'a> {
    max_w: f64,
    sum_w: f64,
    first: &'a str,
}

fn leaves<'a>(t: &Tree, w: &[f64], names: &'a [String], out: &mut Vec<usize>) -> Summary<'a> {
    match t {
        Tree::Leaf(i) => {
            out.push(*i);
            Summary {
                max_w: w[*i],
                sum_w: w[*i],
                first: &names[*i],
            }
        }
        Tree::Node(l, r) => {
            let mut lo = Vec::new();
            let mut ro = Vec::new();
            let ls = leaves(l, w, names, &mut lo);
            let rs = leaves(r, w, names, &mut ro);
            let left_first = match rs
                .max_w
                .total_cmp(&ls.max_w)
                .then(rs.sum_w.total_cmp(&ls.sum_w))
            {
                CmpOrdering::Less => true,
                CmpOrdering::Greater => false,
                CmpOrdering::Equal => ls.first <= rs.first,
            };
            if left_first {
                out.extend(lo);
                out.extend(ro);
            } else {
                out.extend(ro);
                out.extend(lo);
            }
            Summary {
                max_w: ls.max_w.max(rs.max_w),
                sum_w: ls.sum_w + rs.sum_w,
                first: ls.first.min(rs.first),
            }
        }
    }
}

pub fn ordering(v: &ViviMatrix) -> Ordering {
    let (tree, _) = cluster(v);
    let w = weights(v);
    let mut perm = Vec::with_capacity(v.len());
    leaves(&tree, &w, &v.vars, &mut perm);
    let objective = objective(v, &perm);
    Ordering { perm, objective }
}

fn permute(v: &ViviMatrix, perm: &[usize]) -> ViviMatrix {
    let matrix = perm
        .iter()
        .map(|&i| perm.iter().map(|&j| v.matrix[i][j]).collect())
        .collect();
    let mut meta = v.meta.clone();
    if let Some(reps) = &meta.replicates {
        meta.replicates = Some(perm.iter().map(|&i| reps[i].clone()).collect());
    }
    ViviMatrix {
        vars: perm.iter().map(|&i| v.vars[i].clone()).collect(),
        matrix,
        importance_type: v.importance_type.clone(),
        normalized: v.normalized,
        meta,
    }
}

pub fn reorder(v: &ViviMatrix) -> ViviMatrix {
    permute(v, &ordering(v).perm)
}

/// Symmetric permutation of `v` into the order given by `vars`.
pub fn apply_order(v: &ViviMatrix, vars: &[String]) -> Result<ViviMatrix> {
    let perm = vars
        .iter()
        .map(|name| {
            v.index_of(name)
                .ok_or_else(|| VividError::VarMismatch(format!("`{name}` is not in the matrix")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = vec![false; v.len()];
    for &i in &perm {
        if std::mem::replace(&mut seen[i], true) {
            return Err(VividError::VarMismatch(format!(
                "`{}` appears twice in the order",
                v.vars[i]
            )));
        }
    }
    if perm.len() != v.len() {
        return Err(VividError::VarMismatch(format!(
            "order names {} of {} variables",
            perm.len(),
            v.len()
        )));
    }
    Ok(permute(v, &perm))
}

/// Elementwise mean, aligned by variable name to the first input's order.
pub fn average_matrices(list: &[ViviMatrix]) -> Result<ViviMatrix> {
    let first = list
        .first()
        .ok_or_else(|| invalid("nothing to average"))?;
    let aligned = list
        .iter()
        .map(|v| {
            if v.len() != first.len() {
                return Err(VividError::VarMismatch(format!(
                    "{} variables versus {}",
                    v.len(),
                    first.len()
                )));
            }
            apply_order(v, &first.vars)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = first.len();
    let n = aligned.len() as f64;
    let matrix = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| aligned.iter().map(|v| v.matrix[i][j]).sum::<f64>() / n)
                .collect()
        })
        .collect();
    let agree = |f: &dyn Fn(&ViviMatrix) -> Option<String>| {
        let x = f(first);
        aligned.iter().all(|v| f(v) == x)
    };
    let importance_type = if agree(&|v| Some(v.importance_type.clone())) {
        first.importance_type.clone()
    } else {
        "mixed".to_string()
    };
    let meta = Meta {
        grid_size: first
            .meta
            .grid_size
            .filter(|_| agree(&|v| v.meta.grid_size.map(|x| x.to_string()))),
        nmax: first
            .meta
            .nmax
            .filter(|_| agree(&|v| v.meta.nmax.map(|x| x.to_string()))),
        num_perm: first
            .meta
            .num_perm
            .filter(|_| agree(&|v| v.meta.num_perm.map(|x| x.to_string()))),
        seed: None,
        task: first.meta.task.clone().filter(|_| agree(&|v| v.meta.task.clone())),
        replicates: None,
        averaged: true,
    };
    ViviMatrix::new(
        first.vars.clone(),
        matrix,
        importance_type,
        aligned.iter().all(|v| v.normalized),
        meta,
    )
}

/// Group index per variable after cutting the average-linkage tree into
/// `k` groups. Groups are numbered in order of first appearance.
pub fn cluster_groups(v: &ViviMatrix, k: usize) -> Result<Vec<usize>> {
    let m = v.len();
    if k == 0 || k > m {
        return Err(invalid(format!("cluster count must be in 1..={m}")));
    }
    let (_, history) = cluster(v);
    let mut group: Vec<usize> = (0..m).collect();
    for (a, b) in history.iter().take(m - k) {
        let target = group[a[0]];
        let from = group[b[0]];
        for g in group.iter_mut() {
            if *g == from {
                *g = target;
            }
        }
    }
    let mut ids: Vec<usize> = Vec::new();
    Ok(group
        .iter()
        .map(|g| match ids.iter().position(|x| x == g) {
            Some(p) => p,
            None => {
                ids.push(*g);
                ids.len() - 1
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(names: &[&str], m: Vec<Vec<f64>>) -> ViviMatrix {
        ViviMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            m,
            "agnostic",
            false,
            Meta::default(),
        )
        .unwrap()
    }

    fn example() -> ViviMatrix {
        mat(
            &["a", "b", "c", "q"],
            vec![
                vec![1.0, 0.1, 0.4, 0.2],
                vec![0.1, 0.5, 0.05, 0.9],
                vec![0.4, 0.05, 2.0, 0.3],
                vec![0.2, 0.9, 0.3, 5.0],
            ],
        )
    }

    #[test]
    fn two_by_two_puts_importance_first() {
        let v = mat(&["a", "b"], vec![vec![1.0, 0.3], vec![0.3, 2.0]]);
        let r = reorder(&v);
        assert_eq!(r.vars, vec!["b", "a"]);
        assert_eq!(r.matrix, vec![vec![2.0, 0.3], vec![0.3, 1.0]]);
        let one = mat(&["a"], vec![vec![1.0]]);
        assert_eq!(reorder(&one), one);
    }

    #[test]
    fn dominant_first_and_fixpoint() {
        let v = example();
        let r = reorder(&v);
        assert_eq!(r.vars[0], "q");
        assert_eq!(r.vars[1], "b");
        assert_eq!(ordering(&r).perm, vec![0, 1, 2, 3]);
        r.validate().unwrap();
    }

    #[test]
    fn scaling_keeps_the_order() {
        let v = example();
        let mut s = v.clone();
        for x in s.matrix.iter_mut().flatten() {
            *x *= 7.5;
        }
        assert_eq!(ordering(&v).perm, ordering(&s).perm);
    }

    #[test]
    fn apply_order_checks() {
        let v = example();
        let same = apply_order(&v, &v.vars).unwrap();
        assert_eq!(same, v);
        let two = mat(&["a", "b"], vec![vec![1.0, 0.3], vec![0.3, 2.0]]);
        let rev = apply_order(&two, &["b".into(), "a".into()]).unwrap();
        assert_eq!(rev.matrix, vec![vec![2.0, 0.3], vec![0.3, 1.0]]);
        assert!(apply_order(&two, &["a".into()]).is_err());
        assert!(apply_order(&two, &["a".into(), "a".into()]).is_err());
        assert!(apply_order(&two, &["a".into(), "z".into()]).is_err());
    }

    #[test]
    fn averaging() {
        let a = mat(&["x", "y"], vec![vec![1.0, 0.0], vec![0.0, 3.0]]);
        let b = mat(&["x", "y"], vec![vec![3.0, 2.0], vec![2.0, 1.0]]);
        let avg = average_matrices(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(avg.matrix, vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!(avg.meta.averaged);
        assert_eq!(average_matrices(&[a.clone(), a.clone()]).unwrap().matrix, a.matrix);
        let b_rev = apply_order(&b, &["y".into(), "x".into()]).unwrap();
        assert_eq!(average_matrices(&[a.clone(), b_rev]).unwrap(), avg);
        let other = mat(&["x", "z"], vec![vec![1.0, 0.0], vec![0.0, 3.0]]);
        assert!(average_matrices(&[a, other]).is_err());
        assert!(average_matrices(&[]).is_err());
    }

    #[test]
    fn groups_follow_interaction_blocks() {
        let v = mat(
            &["a", "b", "c", "d"],
            vec![
                vec![1.0, 0.9, 0.0, 0.1],
                vec![0.9, 1.0, 0.1, 0.0],
                vec![0.0, 0.1, 1.0, 0.8],
                vec![0.1, 0.0, 0.8, 1.0],
            ],
        );
        assert_eq!(cluster_groups(&v, 2).unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(cluster_groups(&v, 4).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(cluster_groups(&v, 1).unwrap(), vec![0, 0, 0, 0]);
        assert!(cluster_groups(&v, 0).is_err());
    }
}
