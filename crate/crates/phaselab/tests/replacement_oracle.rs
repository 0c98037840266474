//! Independent linear-algebra oracle for the 2-D p = 2 replacement solve:
//! the discrete harmonic extension from a dense LU solve of the 5-point
//! Laplacian system (on a uniform square grid the P1 criss-cross
//! stiffness matrix reduces to the 5-point stencil).

use phaselab::*;

/// Dense Gaussian elimination with partial pivoting (test-only).
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        assert!(diag.abs() > 1e-14, "singular system");
        for row in (col + 1)..n {
            let f = a[row][col] / diag;
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

#[test]
fn p2_replacement_matches_dense_harmonic_solve() {
    let n = 12;
    let grid = Grid::build(Domain::Rect { a: [0.0, 0.0], b: [1.0, 1.0] }, n).unwrap();
    // boundary trace of the harmonic polynomial x^2 - y^2
    let u = DiscreteFunction::sample(grid.clone(), |x| x[0] * x[0] - x[1] * x[1]);

    let interior = grid.interior_nodes();
    let h = p_harmonic_replacement(&u, &interior, 2.0, ReplacementOpts::default()).unwrap();

    // 5-point Laplacian system over interior unknowns
    let index_of = |node: usize| interior.binary_search(&node).ok();
    let m = interior.len();
    let mut a = vec![vec![0.0f64; m]; m];
    let mut b = vec![0.0f64; m];
    for (row, &node) in interior.iter().enumerate() {
        let (i, j) = grid.node_ij(node);
        a[row][row] = 4.0;
        for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
            let neighbor = grid.node_index(ni, nj);
            match index_of(neighbor) {
                Some(col) => a[row][col] = -1.0,
                None => b[row] += u.values()[neighbor],
            }
        }
    }
    let x = solve_dense(a, b);

    let mut worst = 0.0f64;
    for (row, &node) in interior.iter().enumerate() {
        worst = worst.max((h.values()[node] - x[row]).abs());
    }
    assert!(worst <= 1e-6, "replacement vs dense harmonic solve: sup diff {worst:.3e}");
}

#[test]
fn p2_replacement_on_subregion_matches_dense_solve() {
    let n = 14;
    let grid = Grid::build(Domain::Rect { a: [0.0, 0.0], b: [1.0, 1.0] }, n).unwrap();
    let u = DiscreteFunction::sample(grid.clone(), |x| (3.0 * x[0]).sin() * (2.0 * x[1]).cos());

    let mut region = grid.ball_nodes(&[0.5, 0.5], 0.3);
    region.sort_unstable();
    let free: Vec<usize> =
        region.iter().copied().filter(|&i| !grid.is_boundary(i)).collect();
    let h = p_harmonic_replacement(&u, &region, 2.0, ReplacementOpts::default()).unwrap();

    let index_of = |node: usize| free.binary_search(&node).ok();
    let m = free.len();
    let mut a = vec![vec![0.0f64; m]; m];
    let mut b = vec![0.0f64; m];
    for (row, &node) in free.iter().enumerate() {
        let (i, j) = grid.node_ij(node);
        a[row][row] = 4.0;
        for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
            let neighbor = grid.node_index(ni, nj);
            match index_of(neighbor) {
                Some(col) => a[row][col] = -1.0,
                None => b[row] += u.values()[neighbor],
            }
        }
    }
    let x = solve_dense(a, b);

    let mut worst = 0.0f64;
    for (row, &node) in free.iter().enumerate() {
        worst = worst.max((h.values()[node] - x[row]).abs());
    }
    assert!(worst <= 1e-6, "sup diff {worst:.3e}");
    // untouched outside the region
    for idx in 0..grid.node_count() {
        if !region.contains(&idx) {
            assert_eq!(h.values()[idx], u.values()[idx]);
        }
    }
}
