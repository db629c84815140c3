//! Simple temporal networks: systems of difference constraints solved with
//! Bellman-Ford.

const INF: i64 = i64::MAX / 4;

/// Variables `1..=n` plus the reference node `0` fixed at time zero.
#[derive(Debug, Clone)]
pub struct Stn {
    nodes: usize,
    /// `(from, to, w)` encodes `x_to - x_from <= w`.
    edges: Vec<(usize, usize, i64)>,
}

impl Stn {
    pub fn new(vars: usize) -> Self {
        Self { nodes: vars + 1, edges: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.nodes - 1
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Drops constraints added after the first `len`.
    pub fn truncate(&mut self, len: usize) {
        self.edges.truncate(len);
    }

    /// `x_to - x_from <= w`.
    pub fn le(&mut self, from: usize, to: usize, w: i64) {
        self.edges.push((from, to, w));
    }

    /// `lo <= x_i <= hi`.
    pub fn window(&mut self, i: usize, lo: i64, hi: i64) {
        self.le(0, i, hi);
        self.le(i, 0, -lo);
    }

    /// `lo <= x_j - x_i <= hi`.
    pub fn diff(&mut self, i: usize, j: usize, lo: i64, hi: i64) {
        self.le(i, j, hi);
        self.le(j, i, -lo);
    }

    pub fn fix(&mut self, i: usize, value: i64) {
        self.window(i, value, value);
    }

    fn shortest(&self, reversed: bool) -> Option<Vec<i64>> {
        let mut dist = vec![INF; self.nodes];
        dist[0] = 0;
        for round in 0..self.nodes {
            let mut changed = false;
            for &(from, to, w) in &self.edges {
                let (a, b) = if reversed { (to, from) } else { (from, to) };
                if dist[a] < INF && dist[a] + w < dist[b] {
                    dist[b] = dist[a] + w;
                    changed = true;
                }
            }
            if !changed {
                return Some(dist);
            }
            if round + 1 == self.nodes {
                return None;
            }
        }
        Some(dist)
    }

    /// Componentwise least solution, or `None` if inconsistent. Variables not
    /// bounded from below get `i64::MIN / 4`.
    pub fn earliest(&self) -> Option<Vec<i64>> {
        self.shortest(true).map(|d| d.into_iter().map(|x| if x >= INF { -INF } else { -x }).collect())
    }

    /// Componentwise greatest solution, or `None` if inconsistent.
    pub fn latest(&self) -> Option<Vec<i64>> {
        self.shortest(false).map(|d| d.into_iter().map(|x| x.min(INF)).collect())
    }

    pub fn is_consistent(&self) -> bool {
        self.shortest(false).is_some() && self.shortest(true).is_some()
    }
}
