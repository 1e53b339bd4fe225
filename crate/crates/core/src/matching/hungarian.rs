//! Minimum-cost bipartite assignment (shortest augmenting paths with row and
//! column potentials). Rectangular inputs are solved directly on the smaller
//! side, so every row of the smaller dimension is matched.

/// Optimal `(row, col)` pairs, sorted by row.
pub fn hungarian(costs: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = costs.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = costs[0].len();
    if cols == 0 {
        return Vec::new();
    }
    debug_assert!(costs.iter().all(|r| r.len() == cols));
    let mut pairs = if rows <= cols {
        solve(rows, cols, |i, j| costs[i][j])
    } else {
        solve(cols, rows, |i, j| costs[j][i])
            .into_iter()
            .map(|(c, r)| (r, c))
            .collect()
    };
    pairs.sort_unstable();
    pairs
}

/// Sum of the entries chosen by [`hungarian`], accumulated in row order.
pub fn hungarian_cost(costs: &[Vec<f64>]) -> f64 {
    hungarian(costs).into_iter().map(|(i, j)| costs[i][j]).sum()
}

/// `n <= m`; `cost(i, j)` for row `i < n`, column `j < m`.
fn solve(n: usize, m: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| (owner[j] - 1, j - 1))
        .collect()
}
