//! Exact linear minimization over a transportation polytope, the linear
//! oracle of the BROJA conditional-gradient solver.

use std::collections::VecDeque;

const MAX_PIVOTS: usize = 10_000;

/// Minimizes `Σ cost[i][j]·x[i][j]` over nonnegative `m×n` matrices with row
/// sums `supply` and column sums `demand`, returning an optimal vertex.
///
/// Transportation simplex: north-west-corner start, potentials for reduced
/// costs, and Bland's smallest-index rule on both entering and leaving cells
/// so degenerate pivots cannot cycle. Rows and columns with zero total are
/// left empty. `cost` is row-major.
pub fn transport_vertex(supply: &[f64], demand: &[f64], cost: &[f64]) -> Vec<f64> {
    let (m_all, n_all) = (supply.len(), demand.len());
    assert_eq!(cost.len(), m_all * n_all, "cost must be supply.len() × demand.len()");
    let rows: Vec<usize> = (0..m_all).filter(|&i| supply[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n_all).filter(|&j| demand[j] > 0.0).collect();
    let mut out = vec![0.0; m_all * n_all];
    if rows.is_empty() || cols.is_empty() {
        return out;
    }
    let (m, n) = (rows.len(), cols.len());
    let c = |i: usize, j: usize| cost[rows[i] * n_all + cols[j]];

    let mut x = vec![0.0; m * n];
    let mut basic = vec![false; m * n];
    {
        let mut s: Vec<f64> = rows.iter().map(|&i| supply[i]).collect();
        let mut d: Vec<f64> = cols.iter().map(|&j| demand[j]).collect();
        let (mut i, mut j) = (0, 0);
        loop {
            basic[i * n + j] = true;
            let row_done = s[i] <= d[j];
            let a = if row_done { s[i] } else { d[j] };
            x[i * n + j] = a;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (row_done && i < m - 1) || j == n - 1 {
                d[j] -= a;
                s[i] = 0.0;
                i += 1;
            } else {
                s[i] -= a;
                d[j] = 0.0;
                j += 1;
            }
        }
    }

    let scale = cost.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, &v| a.max(v.abs()));
    let eps = 1e-14 * (1.0 + scale);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];

    for _ in 0..MAX_PIVOTS {
        // Adjacency of the basis tree: nodes 0..m are rows, m..m+n columns.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n];
        for i in 0..m {
            for j in 0..n {
                if basic[i * n + j] {
                    adj[i].push(m + j);
                    adj[m + j].push(i);
                }
            }
        }

        let mut seen = vec![false; m + n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &next in &adj[node] {
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                if node < m {
                    let (i, j) = (node, next - m);
                    v[j] = c(i, j) - u[i];
                } else {
                    let (i, j) = (next, node - m);
                    u[i] = c(i, j) - v[j];
                }
                queue.push_back(next);
            }
        }

        let entering = (0..m * n).find(|&k| !basic[k] && c(k / n, k % n) - u[k / n] - v[k % n] < -eps);
        let Some(enter) = entering else { break };
        let (ei, ej) = (enter / n, enter % n);

        // Tree path from column ej back to row ei closes the pivot cycle.
        let mut parent = vec![usize::MAX; m + n];
        let start = m + ej;
        parent[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == ei {
                break;
            }
            for &next in &adj[node] {
                if parent[next] == usize::MAX {
                    parent[next] = node;
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = ei;
        while node != start {
            let prev = parent[node];
            let (i, j) = if node < m { (node, prev - m) } else { (prev, node - m) };
            path.push(i * n + j);
            node = prev;
        }
        // path runs from row ei to column ej; the cell touching column ej
        // takes the first decrement.
        path.reverse();
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let plus: Vec<usize> = path.iter().skip(1).step_by(2).copied().collect();
        let theta = minus.iter().map(|&k| x[k]).fold(f64::INFINITY, f64::min);
        let leave = *minus
            .iter()
            .filter(|&&k| x[k] == theta)
            .min()
            .expect("cycle has a decrementing cell");

        for &k in &minus {
            x[k] -= theta;
        }
        for &k in &plus {
            x[k] += theta;
        }
        x[enter] = theta;
        x[leave] = 0.0;
        basic[leave] = false;
        basic[enter] = true;
    }

    for i in 0..m {
        for j in 0..n {
            out[rows[i] * n_all + cols[j]] = x[i * n + j].max(0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn objective(x: &[f64], cost: &[f64]) -> f64 {
        x.iter().zip(cost).map(|(a, b)| a * b).sum()
    }

    /// Enumerates vertices of a 2×n polytope: the first row is determined
    /// by which columns it fills, visited in every order.
    fn brute_force_2xn(supply: &[f64; 2], demand: &[f64], cost: &[f64]) -> f64 {
        let n = demand.len();
        let mut best = f64::INFINITY;
        let mut order: Vec<usize> = (0..n).collect();
        permute(&mut order, 0, &mut |ord| {
            let mut left = supply[0];
            let mut x = vec![0.0; 2 * n];
            for &j in ord {
                let a = left.min(demand[j]);
                x[j] = a;
                x[n + j] = demand[j] - a;
                left -= a;
            }
            best = best.min(objective(&x, cost));
        });
        best
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn classic_instance() {
        let supply = [20.0, 30.0, 25.0];
        let demand = [10.0, 10.0, 35.0, 20.0];
        let cost = [
            2.0, 3.0, 11.0, 7.0, //
            1.0, 0.0, 6.0, 1.0, //
            5.0, 8.0, 15.0, 9.0,
        ];
        let x = transport_vertex(&supply, &demand, &cost);
        for i in 0..3 {
            let s: f64 = x[i * 4..i * 4 + 4].iter().sum();
            assert!((s - supply[i]).abs() < 1e-9);
        }
        for j in 0..4 {
            let s: f64 = (0..3).map(|i| x[i * 4 + j]).sum();
            assert!((s - demand[j]).abs() < 1e-9);
        }
        // Optimum from an independent LP solve.
        assert!((objective(&x, &cost) - 480.0).abs() < 1e-9, "{}", objective(&x, &cost));
    }

    #[test]
    fn zero_rows_are_skipped() {
        let x = transport_vertex(&[0.0, 1.0], &[0.5, 0.0, 0.5], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(x, vec![0.0, 0.0, 0.0, 0.5, 0.0, 0.5]);
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            a in 0.05f64..0.95,
            raw in prop::collection::vec(0.05f64..1.0, 4),
            cost in prop::collection::vec(-5.0f64..5.0, 8),
        ) {
            let total: f64 = raw.iter().sum();
            let demand: Vec<f64> = raw.iter().map(|d| d / total).collect();
            let supply = [a, 1.0 - a];
            let x = transport_vertex(&supply, &demand, &cost);
            let got = objective(&x, &cost);
            let best = brute_force_2xn(&supply, &demand, &cost);
            prop_assert!((got - best).abs() < 1e-9, "got {got}, best {best}");
            prop_assert!(x.iter().all(|&v| v >= 0.0));
        }
    }
}
