//! Envelope (skyline) Cholesky for the symmetric positive definite systems of
//! the Newton iterations. Grids in construction order and paths have narrow
//! profiles, so a dense-within-envelope factorization is both exact and fast.
//! A reverse Cuthill-McKee ordering is applied when it shrinks the envelope.

#![allow(clippy::needless_range_loop)]

use std::collections::VecDeque;

/// Symmetric matrix with fixed sparsity, stored by its lower envelope.
#[derive(Debug, Clone)]
pub(crate) struct Skyline {
    n: usize,
    /// `perm[old] = new` position.
    perm: Vec<usize>,
    /// First column present in each (permuted) row.
    first: Vec<usize>,
    /// Offset of `(row, first[row])` in `values`.
    start: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NotPositiveDefinite;

impl Skyline {
    /// `pairs` lists the off-diagonal couplings `(a, b)` in original indices.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Self {
        let identity: Vec<usize> = (0..n).collect();
        let natural = profile(n, pairs, &identity);
        let rcm = reverse_cuthill_mckee(n, pairs);
        let perm = if profile(n, pairs, &rcm) < natural { rcm } else { identity };

        let mut first: Vec<usize> = (0..n).collect();
        for &(a, b) in pairs {
            let (pa, pb) = (perm[a], perm[b]);
            let (row, col) = if pa > pb { (pa, pb) } else { (pb, pa) };
            first[row] = first[row].min(col);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (row, &f) in first.iter().enumerate() {
            start.push(total);
            total += row - f + 1;
        }
        start.push(total);
        Self { n, perm, first, start, values: vec![0.0; total] }
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(col <= row && col >= self.first[row]);
        self.start[row] + col - self.first[row]
    }

    #[inline]
    pub fn add_diagonal(&mut self, a: usize, v: f64) {
        let pa = self.perm[a];
        let k = self.index(pa, pa);
        self.values[k] += v;
    }

    #[inline]
    pub fn add_coupling(&mut self, a: usize, b: usize, v: f64) {
        let (pa, pb) = (self.perm[a], self.perm[b]);
        let k = if pa > pb { self.index(pa, pb) } else { self.index(pb, pa) };
        self.values[k] += v;
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|r| self.values[self.index(r, r)]).fold(0.0, f64::max)
    }

    /// In-place `L L^T` factorization.
    pub fn factor(&mut self) -> Result<(), NotPositiveDefinite> {
        for i in 0..self.n {
            let fi = self.first[i];
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let (ri, rj) = (self.start[i] - fi, self.start[j] - fj);
                let mut s = self.values[ri + j];
                for k in k0..j {
                    s -= self.values[ri + k] * self.values[rj + k];
                }
                self.values[ri + j] = s / self.values[rj + j];
            }
            let ri = self.start[i] - fi;
            let mut d = self.values[ri + i];
            for k in fi..i {
                d -= self.values[ri + k] * self.values[ri + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(NotPositiveDefinite);
            }
            self.values[ri + i] = d.sqrt();
        }
        Ok(())
    }

    /// Solves with the factor computed by [`Skyline::factor`].
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (old, &new) in self.perm.iter().enumerate() {
            y[new] = rhs[old];
        }
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.start[i] - fi;
            let mut s = y[i];
            for k in fi..i {
                s -= self.values[ri + k] * y[k];
            }
            y[i] = s / self.values[ri + i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.start[i] - fi;
            y[i] /= self.values[ri + i];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.values[ri + k] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (old, &new) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn profile(n: usize, pairs: &[(usize, usize)], perm: &[usize]) -> usize {
    let mut first: Vec<usize> = (0..n).collect();
    for &(a, b) in pairs {
        let (pa, pb) = (perm[a], perm[b]);
        let (row, col) = if pa > pb { (pa, pb) } else { (pb, pa) };
        first[row] = first[row].min(col);
    }
    first.iter().enumerate().map(|(r, f)| r - f).sum()
}

/// Returns `perm[old] = new`.
fn reverse_cuthill_mckee(n: usize, pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    while order.len() < n {
        // start each component from a minimum-degree vertex
        let start = (0..n).filter(|&v| !seen[v]).min_by_key(|&v| (adj[v].len(), v)).unwrap();
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    let mut perm = vec![0; n];
    for (new, &old) in order.iter().rev().enumerate() {
        perm[old] = new;
    }
    perm
}
