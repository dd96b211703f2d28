//! Dense exact linear algebra over the rationals, just enough for the
//! truncated cocycle decompositions and gauge steps.

use num::{BigRational, Zero};

/// Solves A x = b by Gaussian elimination. Pivots are chosen left to
/// right, so earlier columns absorb as much of the solution as possible;
/// free variables are set to zero. Returns None when inconsistent.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    if rows == 0 {
        return Some(Vec::new());
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut next_row = 0usize;
    for col in 0..cols {
        let Some(pr) = (next_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(next_row, pr);
        let inv = m[next_row][col].clone();
        for c in col..=cols {
            let v = &m[next_row][c] / &inv;
            m[next_row][c] = v;
        }
        for r in 0..rows {
            if r != next_row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let v = &m[r][c] - &f * &m[next_row][c];
                    m[r][c] = v;
                }
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    // Inconsistency: a zero row with nonzero rhs.
    for r in 0..rows {
        if m[r][..cols].iter().all(|v| v.is_zero()) && !m[r][cols].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); cols];
    for (col, pr) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pr {
            x[col] = m[*r][cols].clone();
        }
    }
    Some(x)
}
