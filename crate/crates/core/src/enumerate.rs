//! Partial action tables with coincidence processing.
//!
//! Shared by Todd–Coxeter enumeration and Stallings folding: both build a
//! partial injection per column and identify points whenever two edges with
//! the same label leave (or enter) the same point.

pub(crate) const UNDEF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) struct Enumerator {
    cols: usize,
    table: Vec<u32>,
    parent: Vec<u32>,
    live: usize,
    limit: usize,
}

impl Enumerator {
    /// A table with a single point 0. `limit` bounds the number of live points.
    pub(crate) fn new(cols: usize, limit: usize) -> Enumerator {
        Enumerator { cols, table: vec![UNDEF; cols], parent: vec![0], live: 1, limit }
    }

    pub(crate) fn allocated(&self) -> usize {
        self.parent.len()
    }

    #[inline]
    pub(crate) fn is_live(&self, c: usize) -> bool {
        self.parent[c] as usize == c
    }

    #[inline]
    pub(crate) fn get(&self, c: usize, col: usize) -> Option<usize> {
        let v = self.table[c * self.cols + col];
        (v != UNDEF).then_some(v as usize)
    }

    #[inline]
    fn set(&mut self, c: usize, col: usize, d: usize) {
        self.table[c * self.cols + col] = d as u32;
    }

    #[inline]
    fn unset(&mut self, c: usize, col: usize) {
        self.table[c * self.cols + col] = UNDEF;
    }

    pub(crate) fn add_point(&mut self) -> Result<usize, Overflow> {
        if self.live >= self.limit {
            return Err(Overflow);
        }
        let c = self.parent.len();
        self.parent.push(c as u32);
        self.table.extend(std::iter::repeat_n(UNDEF, self.cols));
        self.live += 1;
        Ok(c)
    }

    /// New point `d` with `c·col = d`.
    pub(crate) fn define(&mut self, c: usize, col: usize) -> Result<usize, Overflow> {
        let d = self.add_point()?;
        self.set(c, col, d);
        self.set(d, col ^ 1, c);
        Ok(d)
    }

    pub(crate) fn rep(&mut self, c: usize) -> usize {
        let mut root = c;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = c;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.parent[hi] = lo as u32;
            self.live -= 1;
            queue.push(hi);
        }
    }

    /// Identifies `a` and `b` and every pair forced by that identification.
    pub(crate) fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let dead = queue[i];
            i += 1;
            for col in 0..self.cols {
                let Some(d) = self.get(dead, col) else { continue };
                self.unset(d, col ^ 1);
                let mu = self.rep(dead);
                let nu = self.rep(d);
                if let Some(e) = self.get(mu, col) {
                    self.merge(nu, e, &mut queue);
                } else if let Some(e) = self.get(nu, col ^ 1) {
                    self.merge(mu, e, &mut queue);
                } else {
                    self.set(mu, col, nu);
                    self.set(nu, col ^ 1, mu);
                }
            }
        }
    }

    /// Adds the edge `c -col-> d`, folding if `c` already has a `col` edge or
    /// `d` already has an incoming one.
    pub(crate) fn join(&mut self, c: usize, col: usize, d: usize) {
        let (c, d) = (self.rep(c), self.rep(d));
        if let Some(e) = self.get(c, col) {
            if self.rep(e) != d {
                self.coincidence(e, d);
            }
        } else if let Some(e) = self.get(d, col ^ 1) {
            if self.rep(e) != c {
                self.coincidence(e, c);
            }
        } else {
            self.set(c, col, d);
            self.set(d, col ^ 1, c);
        }
    }

    /// HLT scan of `word` (as columns) around `c`: traces from both ends,
    /// deduces a single missing entry, defines new points for longer gaps
    /// and processes a coincidence if the two ends disagree.
    pub(crate) fn scan_and_fill(&mut self, c: usize, word: &[usize]) -> Result<(), Overflow> {
        if word.is_empty() {
            return Ok(());
        }
        let mut f = c;
        let mut b = c;
        let mut i = 0usize;
        let mut j = word.len() as isize - 1;
        loop {
            while (i as isize) <= j {
                match self.get(f, word[i]) {
                    Some(next) => {
                        f = next;
                        i += 1;
                    }
                    None => break,
                }
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize {
                match self.get(b, word[j as usize] ^ 1) {
                    Some(prev) => {
                        b = prev;
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i as isize {
                self.set(f, word[i], b);
                self.set(b, word[i] ^ 1, f);
                return Ok(());
            }
            self.define(f, word[i])?;
        }
    }

    /// Live points in increasing order with their rows, targets mapped to
    /// representatives. Returns `(old index per new index, rows)`.
    pub(crate) fn live_rows(&mut self) -> (Vec<usize>, Vec<Vec<Option<usize>>>) {
        let live: Vec<usize> = (0..self.allocated()).filter(|&c| self.is_live(c)).collect();
        let mut position = vec![usize::MAX; self.allocated()];
        for (i, &c) in live.iter().enumerate() {
            position[c] = i;
        }
        let mut rows = Vec::with_capacity(live.len());
        for &c in &live {
            let mut row = Vec::with_capacity(self.cols);
            for col in 0..self.cols {
                let entry = self.get(c, col).map(|d| position[self.rep(d)]);
                row.push(entry);
            }
            rows.push(row);
        }
        (live, rows)
    }
}

/// Breadth-first renumbering of a (partial) table from `base`, visiting
/// columns in order. Returns the new flat table of reachable points.
pub(crate) fn bfs_canonical(cols: usize, table: &[u32], base: usize) -> Vec<u32> {
    let n = table.len() / cols;
    let mut order = Vec::with_capacity(n);
    let mut label = vec![UNDEF; n];
    label[base] = 0;
    order.push(base);
    let mut head = 0;
    while head < order.len() {
        let c = order[head];
        head += 1;
        for col in 0..cols {
            let d = table[c * cols + col];
            if d != UNDEF && label[d as usize] == UNDEF {
                label[d as usize] = order.len() as u32;
                order.push(d as usize);
            }
        }
    }
    let mut out = Vec::with_capacity(order.len() * cols);
    for &c in &order {
        for col in 0..cols {
            let d = table[c * cols + col];
            out.push(if d == UNDEF { UNDEF } else { label[d as usize] });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfs_renumbers_cycle() {
        // 3-cycle on points 0 -> 2 -> 1 -> 0 with one generator.
        let table = vec![2, 1, 0, 2, 1, 0];
        assert_eq!(bfs_canonical(2, &table, 0), vec![1, 2, 2, 0, 0, 1]);
    }

    #[test]
    fn coincidence_collapses_cycle() {
        let mut e = Enumerator::new(2, 10);
        let p1 = e.define(0, 0).unwrap();
        let p2 = e.define(p1, 0).unwrap();
        e.join(p2, 0, 0);
        e.coincidence(0, p1);
        let (live, rows) = e.live_rows();
        assert_eq!(live, vec![0]);
        assert_eq!(rows, vec![vec![Some(0), Some(0)]]);
    }
}
