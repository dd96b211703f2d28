//! Admissible graphs: aerial vertices carrying ordered out-edge lists into
//! the other vertices, ground vertices carrying none. No tadpoles, no
//! repeated targets. Orderings of the same target set are distinct graphs;
//! one-per-edge-set sums use the ascending representative.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    /// Another aerial vertex, 0-based.
    Aerial(usize),
    /// A ground vertex, 0-based.
    Ground(usize),
}

impl Target {
    /// Order key: aerials before grounds, each ascending.
    fn key(&self, n: usize) -> usize {
        match *self {
            Target::Aerial(k) => k,
            Target::Ground(k) => n + k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KGraph {
    n: usize,
    m: usize,
    out: Vec<Vec<Target>>,
}

impl KGraph {
    pub fn new(n: usize, m: usize, out: Vec<Vec<Target>>) -> Option<Self> {
        if out.len() != n {
            return None;
        }
        for (i, list) in out.iter().enumerate() {
            for (k, t) in list.iter().enumerate() {
                match *t {
                    Target::Aerial(j) if j >= n || j == i => return None,
                    Target::Ground(j) if j >= m => return None,
                    _ => {}
                }
                if list[..k].contains(t) {
                    return None;
                }
            }
        }
        Some(KGraph { n, m, out })
    }

    pub fn n_aerial(&self) -> usize {
        self.n
    }

    pub fn n_ground(&self) -> usize {
        self.m
    }

    pub fn out_edges(&self) -> &[Vec<Target>] {
        &self.out
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.out.iter().map(|l| l.len()).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|l| l.len()).sum()
    }

    /// Edges in the fixed order: by source vertex, then list position.
    pub fn edges(&self) -> Vec<(usize, Target)> {
        let mut e = Vec::with_capacity(self.edge_count());
        for (i, list) in self.out.iter().enumerate() {
            for t in list {
                e.push((i, *t));
            }
        }
        e
    }

    /// True when every out-list is ascending; those representatives stand
    /// for the underlying edge sets.
    pub fn is_canonical(&self) -> bool {
        self.out
            .iter()
            .all(|l| l.windows(2).all(|w| w[0].key(self.n) < w[1].key(self.n)))
    }

    /// Reverses the ground labels; used as an empirical symmetry probe.
    pub fn mirror(&self) -> KGraph {
        let out = self
            .out
            .iter()
            .map(|l| {
                let mut nl: Vec<Target> = l
                    .iter()
                    .map(|t| match *t {
                        Target::Ground(k) => Target::Ground(self.m - 1 - k),
                        a => a,
                    })
                    .collect();
                nl.sort_by_key(|t| t.key(self.n));
                nl
            })
            .collect();
        KGraph {
            n: self.n,
            m: self.m,
            out,
        }
    }

    /// Stable text encoding, also the cache key for weights.
    pub fn encode(&self) -> String {
        let mut s = format!("{}:{}", self.n, self.m);
        for list in &self.out {
            s.push(';');
            for (k, t) in list.iter().enumerate() {
                if k > 0 {
                    s.push(',');
                }
                match t {
                    Target::Aerial(j) => s.push_str(&format!("{}", j + 1)),
                    Target::Ground(j) => s.push_str(&format!("g{}", j + 1)),
                }
            }
        }
        s
    }
}

impl fmt::Display for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, list) in self.out.iter().enumerate() {
            if i > 0 {
                write!(f, "  ")?;
            }
            write!(f, "v{}: ", i + 1)?;
            for (k, t) in list.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                match t {
                    Target::Aerial(j) => write!(f, "{}", j + 1)?,
                    Target::Ground(j) => write!(f, "g{}", j + 1)?,
                }
            }
        }
        Ok(())
    }
}

fn targets_for(n: usize, m: usize, source: usize) -> Vec<Target> {
    let mut t: Vec<Target> = (0..n).filter(|&j| j != source).map(Target::Aerial).collect();
    t.extend((0..m).map(Target::Ground));
    t
}

fn ordered_selections(pool: &[Target], k: usize) -> Vec<Vec<Target>> {
    let mut out = Vec::new();
    let mut cur: Vec<Target> = Vec::with_capacity(k);
    let mut used = vec![false; pool.len()];
    fn rec(
        pool: &[Target],
        used: &mut Vec<bool>,
        cur: &mut Vec<Target>,
        k: usize,
        out: &mut Vec<Vec<Target>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..pool.len() {
            if !used[i] {
                used[i] = true;
                cur.push(pool[i]);
                rec(pool, used, cur, k, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(pool, &mut used, &mut cur, k, &mut out);
    out
}

fn ascending_selections(pool: &[Target], k: usize) -> Vec<Vec<Target>> {
    let mut out = Vec::new();
    let mut cur: Vec<Target> = Vec::with_capacity(k);
    fn rec(
        pool: &[Target],
        from: usize,
        cur: &mut Vec<Target>,
        k: usize,
        out: &mut Vec<Vec<Target>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..pool.len() {
            cur.push(pool[i]);
            rec(pool, i + 1, cur, k, out);
            cur.pop();
        }
    }
    rec(pool, 0, &mut cur, k, &mut out);
    out
}

fn cartesian(per_vertex: Vec<Vec<Vec<Target>>>, n: usize, m: usize) -> Vec<KGraph> {
    let mut graphs = vec![Vec::<Vec<Target>>::new()];
    for options in per_vertex {
        let mut next = Vec::new();
        for g in &graphs {
            for o in &options {
                let mut gg = g.clone();
                gg.push(o.clone());
                next.push(gg);
            }
        }
        graphs = next;
    }
    graphs
        .into_iter()
        .filter_map(|out| KGraph::new(n, m, out))
        .collect()
}

/// Every graph with the given ordered out-degrees, in lexicographic order
/// of the concatenated target lists.
pub fn enumerate_graphs(n: usize, m: usize, out_degrees: &[usize]) -> Vec<KGraph> {
    if out_degrees.len() != n {
        return Vec::new();
    }
    let per_vertex: Vec<Vec<Vec<Target>>> = (0..n)
        .map(|i| ordered_selections(&targets_for(n, m, i), out_degrees[i]))
        .collect();
    let mut graphs = cartesian(per_vertex, n, m);
    graphs.sort_by_key(|g| {
        g.edges()
            .into_iter()
            .map(|(_, t)| t.key(n))
            .collect::<Vec<_>>()
    });
    graphs
}

/// One ascending representative per underlying edge set.
pub fn canonical_graphs(n: usize, m: usize, out_degrees: &[usize]) -> Vec<KGraph> {
    if out_degrees.len() != n {
        return Vec::new();
    }
    let per_vertex: Vec<Vec<Vec<Target>>> = (0..n)
        .map(|i| ascending_selections(&targets_for(n, m, i), out_degrees[i]))
        .collect();
    let mut graphs = cartesian(per_vertex, n, m);
    graphs.sort_by_key(|g| {
        g.edges()
            .into_iter()
            .map(|(_, t)| t.key(n))
            .collect::<Vec<_>>()
    });
    graphs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_aerial_two_grounds() {
        let gs = enumerate_graphs(1, 2, &[2]);
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].to_string(), "v1: g1,g2");
        assert_eq!(gs[1].to_string(), "v1: g2,g1");
        assert_eq!(canonical_graphs(1, 2, &[2]).len(), 1);
    }

    #[test]
    fn two_aerial_wheel() {
        let gs = enumerate_graphs(2, 0, &[1, 1]);
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].to_string(), "v1: 2  v2: 1");
    }

    #[test]
    fn single_edge_to_ground() {
        let gs = enumerate_graphs(1, 1, &[1]);
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].to_string(), "v1: g1");
    }

    #[test]
    fn no_tadpoles_or_repeats() {
        assert!(KGraph::new(1, 1, vec![vec![Target::Aerial(0)]]).is_none());
        assert!(KGraph::new(
            1,
            2,
            vec![vec![Target::Ground(0), Target::Ground(0)]]
        )
        .is_none());
    }

    #[test]
    fn moyal_square_counts() {
        // p = (2,2), m = 2: each vertex picks an ordered pair from three
        // candidates, 6 ways each; canonical keeps 3 each.
        assert_eq!(enumerate_graphs(2, 2, &[2, 2]).len(), 36);
        assert_eq!(canonical_graphs(2, 2, &[2, 2]).len(), 9);
    }
}
