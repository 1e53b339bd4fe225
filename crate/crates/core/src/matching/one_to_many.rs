/// Greedy one-to-many assignment.
///
/// All `(student, pseudo)` entries are visited in ascending cost (ties by
/// student then pseudo index). An entry is taken when the student is still
/// free and the pseudo-label has fewer than `k` students. Every student ends
/// up with at most one pseudo-label; each pseudo-label with at most `k`.
pub fn one_to_many_assign(costs: &[Vec<f64>], k: usize) -> Vec<(usize, usize)> {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || k == 0 {
        return Vec::new();
    }
    let mut order: Vec<(usize, usize)> = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .collect();
    order.sort_by(|&(i1, j1), &(i2, j2)| {
        costs[i1][j1]
            .total_cmp(&costs[i2][j2])
            .then(i1.cmp(&i2))
            .then(j1.cmp(&j2))
    });

    let mut taken = vec![false; rows];
    let mut load = vec![0usize; cols];
    let mut pairs = Vec::new();
    for (i, j) in order {
        if taken[i] || load[j] >= k {
            continue;
        }
        taken[i] = true;
        load[j] += 1;
        pairs.push((i, j));
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::hungarian;

    #[test]
    fn k1_matches_hungarian_on_dominant_diagonal() {
        let m: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                (0..6)
                    .map(|j| if i == j { 0.1 * i as f64 } else { 5.0 + (i * j) as f64 })
                    .collect()
            })
            .collect();
        assert_eq!(one_to_many_assign(&m, 1), hungarian(&m));
    }

    #[test]
    fn large_k_gives_each_student_its_argmin() {
        let m = vec![
            vec![0.3, 0.1, 0.9],
            vec![0.2, 0.8, 0.4],
            vec![0.5, 0.05, 0.6],
            vec![0.7, 0.6, 0.1],
        ];
        let pairs = one_to_many_assign(&m, 4);
        assert_eq!(pairs, vec![(0, 1), (1, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn teacher_load_is_capped() {
        let m = vec![vec![0.1, 0.9]; 5];
        let pairs = one_to_many_assign(&m, 2);
        let on_first = pairs.iter().filter(|p| p.1 == 0).count();
        assert_eq!(on_first, 2);
        assert_eq!(pairs.len(), 4);
    }
}
