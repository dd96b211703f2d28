//! Permutation signs for graded tuples.

use crate::error::{CoreError, Result};

/// A permutation of {0..n-1} stored as the image list: position `i` is sent
/// to position `self.0[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        let n = self.0.len();
        let mut seen = vec![false; n];
        for &i in &self.0 {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// self ∘ other: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn sign(&self) -> i8 {
        let mut s = 1i8;
        for i in 0..self.0.len() {
            for j in i + 1..self.0.len() {
                if self.0[i] > self.0[j] {
                    s = -s;
                }
            }
        }
        s
    }

    /// Permutes a slice: output slot σ(i) holds input item i.
    pub fn apply_slice<T: Clone>(&self, items: &[T]) -> Vec<T> {
        let inv = self.inverse();
        (0..items.len()).map(|i| items[inv.0[i]].clone()).collect()
    }

    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        heap_permute(&mut cur, n, &mut out);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// (p,q)-shuffles of {0..p+q-1}: images ascending on the first p slots
    /// and on the last q slots.
    pub fn shuffles(p: usize, q: usize) -> Vec<Permutation> {
        let n = p + q;
        let mut out = Vec::new();
        let mut members = vec![false; n];
        pick_shuffle(0, p, n, &mut members, &mut out);
        out
    }
}

fn heap_permute(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
    if k <= 1 {
        out.push(Permutation(cur.clone()));
        return;
    }
    for i in 0..k {
        heap_permute(cur, k - 1, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

fn pick_shuffle(
    from: usize,
    remaining: usize,
    n: usize,
    members: &mut Vec<bool>,
    out: &mut Vec<Permutation>,
) {
    if remaining == 0 {
        // members marks which ORIGINAL positions go into the first block.
        let p = members.iter().filter(|&&m| m).count();
        let mut img = vec![0usize; n];
        let mut a = 0;
        let mut b = p;
        for (i, &m) in members.iter().enumerate() {
            if m {
                img[i] = a;
                a += 1;
            } else {
                img[i] = b;
                b += 1;
            }
        }
        out.push(Permutation(img));
        return;
    }
    if from + remaining > n {
        return;
    }
    for i in from..=(n - remaining) {
        members[i] = true;
        pick_shuffle(i + 1, remaining - 1, n, members, out);
        members[i] = false;
    }
}

/// Koszul sign of a permutation acting on a tuple of the given parities:
/// (-1)^{sum over i<j with sigma(i) > sigma(j) of |g_i||g_j|}.
pub fn permutation_sign(perm: &Permutation, degrees: &[i64]) -> Result<i8> {
    if perm.len() != degrees.len() {
        return Err(CoreError::LengthMismatch(perm.len(), degrees.len()));
    }
    if !perm.is_valid() {
        return Err(CoreError::Parse("not a permutation".into()));
    }
    let mut s = 1i8;
    for i in 0..degrees.len() {
        for j in i + 1..degrees.len() {
            if perm.0[i] > perm.0[j]
                && degrees[i].rem_euclid(2) == 1
                && degrees[j].rem_euclid(2) == 1
            {
                s = -s;
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_examples() {
        let swap = Permutation(vec![1, 0]);
        assert_eq!(permutation_sign(&swap, &[1, 1]).unwrap(), -1);
        assert_eq!(permutation_sign(&swap, &[0, 1]).unwrap(), 1);
        // 1->2, 2->3, 3->1 on three odd elements
        let cyc = Permutation(vec![1, 2, 0]);
        assert_eq!(permutation_sign(&cyc, &[1, 1, 1]).unwrap(), 1);
    }

    #[test]
    fn cocycle_rule_holds_exhaustively() {
        // eps(sigma tau, g) = eps(sigma, tau g) * eps(tau, g)
        for n in 1..=4usize {
            let degs: Vec<i64> = (0..n).map(|i| (i % 2) as i64).collect();
            for sigma in Permutation::all(n) {
                for tau in Permutation::all(n) {
                    let st = sigma.compose(&tau);
                    let lhs = permutation_sign(&st, &degs).unwrap();
                    let tg = tau.apply_slice(&degs);
                    let rhs = permutation_sign(&sigma, &tg).unwrap()
                        * permutation_sign(&tau, &degs).unwrap();
                    assert_eq!(lhs, rhs, "n={n} sigma={sigma:?} tau={tau:?}");
                }
            }
        }
    }

    #[test]
    fn shuffles_count() {
        assert_eq!(Permutation::shuffles(2, 1).len(), 3);
        assert_eq!(Permutation::shuffles(0, 3).len(), 1);
        assert_eq!(Permutation::shuffles(2, 2).len(), 6);
    }
}
