//! Structural (zero-pattern) analysis of square matrices.

use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Strongly connected components of the directed graph with an edge
/// `j -> i` whenever `m[i][j] != 0`.
///
/// Components are returned with their members sorted ascending, and the list
/// itself is sorted by smallest member.
pub fn strongly_connected_components<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    // Adjacency by rows: node i links to every j with m[i][j] != 0. SCCs are
    // invariant under reversing all edges, so the direction convention is moot.
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != T::zero())
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut comps = tarjan(&adj);
    for c in comps.iter_mut() {
        c.sort_unstable();
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Iterative Tarjan.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::with_capacity(n);
    let mut comps = Vec::new();
    let mut counter = 0usize;
    // (node, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, pos)) = call.last() {
            if pos == 0 && index[v] == UNVISITED {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(pos) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// True iff the zero pattern of `m` is strongly connected. A 1x1 matrix is
/// irreducible by convention.
pub fn is_irreducible<T: Scalar>(m: &Matrix<T>) -> bool {
    m.is_square() && m.nrows() >= 1 && strongly_connected_components(m).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pattern(n: usize, bits: &[bool]) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| if bits[i * n + j] { 1.0 } else { 0.0 })
    }

    /// Floyd-Warshall style transitive closure.
    fn brute_force(n: usize, bits: &[bool]) -> bool {
        let mut reach: Vec<bool> = bits.to_vec();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i * n + k] && reach[k * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
        (0..n).all(|i| (0..n).all(|j| i == j || reach[i * n + j]))
    }

    #[test]
    fn small_cases() {
        let two_cycle = Matrix::<f64>::from_f64_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert!(is_irreducible(&two_cycle));
        let upper = Matrix::<f64>::from_f64_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        assert!(!is_irreducible(&upper));
        assert_eq!(strongly_connected_components(&upper), vec![vec![0], vec![1]]);
        let ring = Matrix::<f64>::from_fn(5, 5, |i, j| if j == (i + 1) % 5 { 1.0 } else { 0.0 });
        assert!(is_irreducible(&ring));
        assert!(is_irreducible(&Matrix::<f64>::zeros(1, 1)));
    }

    proptest! {
        #[test]
        fn agrees_with_reachability(n in 1usize..=6, seed in prop::collection::vec(0u8..4, 36)) {
            let bits: Vec<bool> = seed.iter().take(n * n).map(|&b| b == 0).collect();
            let m = pattern(n, &bits);
            prop_assert_eq!(is_irreducible(&m), brute_force(n, &bits));
            let comps = strongly_connected_components(&m);
            prop_assert_eq!(comps.iter().map(Vec::len).sum::<usize>(), n);
        }
    }
}
