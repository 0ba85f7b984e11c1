//! Finite-index subgroups as coset tables.
//!
//! A [`CosetTable`] stores the left action of `G` on `G/H`: row `c`,
//! column `x` holds `x·c`. A word `w = w_1 w_2 ... w_k` acts right to left,
//! `w·c = w_1·(w_2·(... w_k·c))`, so `w ∈ H` iff `w·0 = 0`. Points are
//! numbered by breadth-first discovery from the basepoint `0` visiting
//! columns in the order `g1, g1^-1, g2, g2^-1, ...`; two tables describe the
//! same pointed subgroup iff they are structurally equal.
//!
//! Enumeration runs the usual right-coset machinery on reversed words: a
//! right-coset table of `rev(H)` in `<S | rev(R)>` is exactly the left
//! action table of `H` in `<S | R>`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::enumerate::{bfs_canonical, Enumerator, Overflow, UNDEF};
use crate::words::{Letter, Presentation, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CosetError {
    #[error("coset enumeration exceeded {max_cosets} cosets")]
    Overflow { max_cosets: usize },
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("low-index search exceeded its budget of {limit} nodes")]
    ResourceBudgetExceeded { limit: u64 },
    #[error("invalid coset table: {0}")]
    InvalidTable(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetTable {
    presentation: Arc<Presentation>,
    cols: usize,
    data: Vec<u32>,
}

impl PartialOrd for CosetTable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Index first, then lexicographic row order.
impl Ord for CosetTable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index()
            .cmp(&other.index())
            .then_with(|| self.data.cmp(&other.data))
            .then_with(|| self.presentation.to_string().cmp(&other.presentation.to_string()))
    }
}

fn reversed_columns(w: &Word) -> Vec<usize> {
    w.letters().iter().rev().map(|l| l.column()).collect()
}

impl CosetTable {
    /// Builds a table from explicit rows (columns `g1, g1^-1, g2, ...`),
    /// validates every invariant and renumbers it canonically from row 0.
    pub fn from_rows(presentation: Arc<Presentation>, rows: &[Vec<usize>]) -> Result<CosetTable, CosetError> {
        let cols = presentation.alphabet().columns();
        let n = rows.len();
        if n == 0 {
            return Err(CosetError::InvalidTable("no rows".into()));
        }
        let mut data = Vec::with_capacity(n * cols);
        for (c, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(CosetError::InvalidTable(format!("row {c} has {} entries, expected {cols}", row.len())));
            }
            for &d in row {
                if d >= n {
                    return Err(CosetError::InvalidTable(format!("row {c} points to {d} outside 0..{n}")));
                }
                data.push(d as u32);
            }
        }
        let raw = CosetTable { presentation, cols, data };
        raw.check_action()?;
        if raw.orbit_size(0) != n {
            return Err(CosetError::InvalidTable("action is not transitive".into()));
        }
        Ok(raw.rebase(0))
    }

    /// Like [`CosetTable::from_rows`] but also rejects rows that are not
    /// already in canonical numbering.
    pub fn from_canonical_rows(presentation: Arc<Presentation>, rows: &[Vec<usize>]) -> Result<CosetTable, CosetError> {
        let t = CosetTable::from_rows(presentation, rows)?;
        if t.rows() != rows {
            return Err(CosetError::InvalidTable("rows are not in breadth-first canonical order".into()));
        }
        Ok(t)
    }

    pub(crate) fn from_canonical_data(presentation: Arc<Presentation>, data: Vec<u32>) -> CosetTable {
        let cols = presentation.alphabet().columns();
        debug_assert_eq!(data.len() % cols, 0);
        CosetTable { presentation, cols, data }
    }

    /// The one-point table of `G` itself.
    pub fn whole_group(presentation: Arc<Presentation>) -> CosetTable {
        let cols = presentation.alphabet().columns();
        CosetTable { presentation, cols, data: vec![0; cols] }
    }

    fn check_action(&self) -> Result<(), CosetError> {
        let n = self.index();
        for c in 0..n {
            for col in 0..self.cols {
                let d = self.data[c * self.cols + col] as usize;
                if self.data[d * self.cols + (col ^ 1)] as usize != c {
                    return Err(CosetError::InvalidTable(format!(
                        "columns {col} and {} are not mutually inverse at row {c}",
                        col ^ 1
                    )));
                }
            }
        }
        for r in self.presentation.relators() {
            for c in 0..n {
                if self.apply(r, c) != c {
                    return Err(CosetError::InvalidTable(format!(
                        "relator {} does not fix point {c}",
                        self.presentation.word_text(r)
                    )));
                }
            }
        }
        Ok(())
    }

    fn orbit_size(&self, base: usize) -> usize {
        let mut seen = vec![false; self.index()];
        let mut stack = vec![base];
        seen[base] = true;
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for col in 0..self.cols {
                let d = self.data[c * self.cols + col] as usize;
                if !seen[d] {
                    seen[d] = true;
                    count += 1;
                    stack.push(d);
                }
            }
        }
        count
    }

    /// Checks completeness, inverse columns, relators, transitivity and
    /// canonical numbering.
    pub fn validate(&self) -> Result<(), CosetError> {
        if self.data.len() != self.index() * self.cols || self.data.iter().any(|&d| d as usize >= self.index()) {
            return Err(CosetError::InvalidTable("incomplete table".into()));
        }
        self.check_action()?;
        if self.orbit_size(0) != self.index() {
            return Err(CosetError::InvalidTable("action is not transitive".into()));
        }
        if bfs_canonical(self.cols, &self.data, 0) != self.data {
            return Err(CosetError::InvalidTable("not in canonical numbering".into()));
        }
        Ok(())
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn presentation_arc(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    /// `[G:H]`.
    pub fn index(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn columns(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn image(&self, letter: Letter, point: usize) -> usize {
        self.data[point * self.cols + letter.column()] as usize
    }

    /// `w·point`, letters applied right to left.
    #[inline]
    pub fn apply(&self, w: &Word, point: usize) -> usize {
        let mut c = point;
        for l in w.letters().iter().rev() {
            c = self.data[c * self.cols + l.column()] as usize;
        }
        c
    }

    /// The coset `wH`, i.e. `w·0`. `w ∈ H` iff this is 0.
    pub fn coset_of(&self, w: &Word) -> Result<usize, CosetError> {
        self.presentation.check(w).map_err(|_| CosetError::AlphabetMismatch)?;
        Ok(self.apply(w, 0))
    }

    #[inline]
    pub fn contains(&self, w: &Word) -> bool {
        self.apply(w, 0) == 0
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.data.chunks(self.cols).map(|r| r.iter().map(|&d| d as usize).collect()).collect()
    }

    pub(crate) fn data(&self) -> &[u32] {
        &self.data
    }

    /// Image of every point under generator `g`.
    pub fn permutation(&self, g: usize) -> Vec<usize> {
        let col = Letter::new(g, false).column();
        (0..self.index()).map(|c| self.data[c * self.cols + col] as usize).collect()
    }

    /// The same action based at `point`: the table of the stabilizer of
    /// `point`, which is `uHu^-1` for any `u` with `u·0 = point`.
    pub fn rebase(&self, point: usize) -> CosetTable {
        CosetTable {
            presentation: self.presentation.clone(),
            cols: self.cols,
            data: bfs_canonical(self.cols, &self.data, point),
        }
    }

    /// Shortest words `u_c` with `u_c·0 = c`, from the breadth-first tree.
    pub fn transversal(&self) -> Vec<Word> {
        let n = self.index();
        let mut words: Vec<Option<Word>> = vec![None; n];
        words[0] = Some(Word::identity());
        for c in 0..n {
            let u = words[c].clone().expect("canonical numbering reaches points in order");
            for col in 0..self.cols {
                let d = self.data[c * self.cols + col] as usize;
                if words[d].is_none() {
                    words[d] = Some(Word::letter(Letter::from_column(col)).multiply(&u));
                }
            }
        }
        words.into_iter().map(Option::unwrap).collect()
    }

    /// Schreier generators of `H`: one word `u_d^-1 · x · u_c` per
    /// generator edge `c -x-> d` outside the breadth-first spanning tree.
    pub fn schreier_generators(&self) -> Vec<Word> {
        let n = self.index();
        let transversal = self.transversal();
        let mut tree = HashSet::new();
        let mut seen = vec![false; n];
        seen[0] = true;
        for c in 0..n {
            for col in 0..self.cols {
                let d = self.data[c * self.cols + col] as usize;
                if !seen[d] {
                    seen[d] = true;
                    // The undirected edge {c, d} labelled by the generator of `col`.
                    let (from, to, gen_col) = if col & 1 == 0 { (c, d, col) } else { (d, c, col ^ 1) };
                    tree.insert((from, gen_col, to));
                }
            }
        }
        let mut out = Vec::new();
        let mut emitted = HashSet::new();
        for c in 0..n {
            for g in 0..self.presentation.generator_count() {
                let col = 2 * g;
                let d = self.data[c * self.cols + col] as usize;
                if tree.contains(&(c, col, d)) {
                    continue;
                }
                let w = transversal[d].inverse().multiply(&Word::generator(g)).multiply(&transversal[c]);
                if !w.is_identity() && emitted.insert(w.clone()) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Number of points whose stabilizer is exactly `H`, i.e. `[N_G(H):H]`.
    pub fn normalizer_index(&self) -> usize {
        let gens = self.schreier_generators();
        (0..self.index()).filter(|&c| gens.iter().all(|s| self.apply(s, c) == c)).count()
    }

    pub fn is_normal(&self) -> bool {
        self.normalizer_index() == self.index()
    }

    /// `self ≤ other` as subgroups.
    pub fn is_subgroup_of(&self, other: &CosetTable) -> bool {
        other.index() <= self.index()
            && self.index().is_multiple_of(other.index())
            && self.schreier_generators().iter().all(|w| other.contains(w))
    }

    /// Canonical representative of the conjugacy class: the least rebasing.
    pub fn conjugacy_representative(&self) -> CosetTable {
        (0..self.index()).map(|c| self.rebase(c)).min().expect("tables are nonempty")
    }

    pub fn is_conjugate_to(&self, other: &CosetTable) -> bool {
        self.index() == other.index()
            && self.presentation == other.presentation
            && (0..self.index()).any(|c| &self.rebase(c) == other)
    }

    /// Every `K` with `H ≤ K ≤ G`, from the block systems of the action,
    /// sorted by index descending (so `H` first and `G` last).
    pub fn overgroups(&self) -> Vec<CosetTable> {
        let n = self.index();
        let identity: Vec<usize> = (0..n).collect();
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        found.insert(identity.clone());
        let mut frontier = vec![identity];
        while let Some(partition) = frontier.pop() {
            for p in 1..n {
                if partition[p] == partition[0] {
                    continue;
                }
                let coarser = self.block_closure(&partition, p);
                if found.insert(coarser.clone()) {
                    frontier.push(coarser);
                }
            }
        }
        let mut out: Vec<CosetTable> = found.iter().map(|blocks| self.block_action(blocks)).collect();
        out.sort_by(|a, b| b.index().cmp(&a.index()).then_with(|| a.cmp(b)));
        out
    }

    /// Finest block system coarser than `partition` with `0 ~ p`, labelled
    /// by the least point of each block.
    fn block_closure(&self, partition: &[usize], p: usize) -> Vec<usize> {
        let n = self.index();
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let union = |uf: &mut Vec<usize>, a: usize, b: usize| -> bool {
            let (ra, rb) = (find(uf, a), find(uf, b));
            if ra == rb {
                return false;
            }
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            uf[hi] = lo;
            true
        };
        for c in 0..n {
            union(&mut uf, c, partition[c]);
        }
        union(&mut uf, 0, p);
        loop {
            let mut changed = false;
            for c in 0..n {
                let r = find(&mut uf, c);
                if r == c {
                    continue;
                }
                for col in (0..self.cols).step_by(2) {
                    let (a, b) = (self.data[c * self.cols + col] as usize, self.data[r * self.cols + col] as usize);
                    changed |= union(&mut uf, a, b);
                }
            }
            if !changed {
                break;
            }
        }
        (0..n).map(|c| find(&mut uf, c)).collect()
    }

    /// Action on the blocks, based at the block of 0.
    fn block_action(&self, blocks: &[usize]) -> CosetTable {
        let labels: BTreeSet<usize> = blocks.iter().copied().collect();
        let position: BTreeMap<usize, usize> = labels.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let m = labels.len();
        let mut data = vec![UNDEF; m * self.cols];
        for c in 0..self.index() {
            let from = position[&blocks[c]];
            for col in 0..self.cols {
                let to = position[&blocks[self.data[c * self.cols + col] as usize]];
                data[from * self.cols + col] = to as u32;
            }
        }
        CosetTable {
            presentation: self.presentation.clone(),
            cols: self.cols,
            data: bfs_canonical(self.cols, &data, position[&blocks[0]]),
        }
    }

    /// JSON form `{"presentation": "...", "index": n, "table": [[...], ...]}`.
    pub fn to_json(&self) -> Value {
        json!({
            "presentation": self.presentation.to_string(),
            "index": self.index(),
            "table": self.rows(),
        })
    }

    pub fn from_json(value: &Value) -> Result<CosetTable, CosetError> {
        let bad = |what: &str| CosetError::InvalidTable(format!("JSON: {what}"));
        let text = value.get("presentation").and_then(Value::as_str).ok_or_else(|| bad("missing presentation"))?;
        let presentation: Presentation = text.parse()?;
        let rows: Vec<Vec<usize>> = value
            .get("table")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing table"))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| bad("row is not an array"))?
                    .iter()
                    .map(|v| v.as_u64().map(|d| d as usize).ok_or_else(|| bad("entry is not an integer")))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        if let Some(index) = value.get("index").and_then(Value::as_u64) {
            if index as usize != rows.len() {
                return Err(bad("index disagrees with row count"));
            }
        }
        CosetTable::from_rows(Arc::new(presentation), &rows)
    }

    /// Schreier graph in DOT: one edge per point and generator, basepoint
    /// double circled.
    pub fn to_dot(&self) -> String {
        let alphabet = self.presentation.alphabet();
        let mut out = String::from("digraph schreier {\n  node [shape=circle];\n");
        for c in 0..self.index() {
            let shape = if c == 0 { " [shape=doublecircle]" } else { "" };
            let _ = writeln!(out, "  {c}{shape};");
        }
        for c in 0..self.index() {
            for g in 0..alphabet.len() {
                let d = self.image(Letter::new(g, false), c);
                let _ = writeln!(out, "  {c} -> {d} [label=\"{}\"];", alphabet.name(g));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Enumerates the cosets of `H = <subgens>` in `G`, giving up once more than
/// `max_cosets` cosets are live at the same time.
pub fn todd_coxeter(
    presentation: &Arc<Presentation>,
    subgens: &[Word],
    max_cosets: usize,
) -> Result<CosetTable, CosetError> {
    for w in subgens {
        presentation.check(w).map_err(|_| CosetError::AlphabetMismatch)?;
    }
    let cols = presentation.alphabet().columns();
    let overflow = |_: Overflow| CosetError::Overflow { max_cosets };
    let relators: Vec<Vec<usize>> = presentation.relators().iter().map(reversed_columns).collect();
    let mut e = Enumerator::new(cols, max_cosets.max(1));
    for h in subgens {
        e.scan_and_fill(0, &reversed_columns(h)).map_err(overflow)?;
    }
    let mut c = 0;
    while c < e.allocated() {
        if e.is_live(c) {
            for r in &relators {
                e.scan_and_fill(c, r).map_err(overflow)?;
                if !e.is_live(c) {
                    break;
                }
            }
            if e.is_live(c) {
                for col in 0..cols {
                    if e.get(c, col).is_none() {
                        e.define(c, col).map_err(overflow)?;
                    }
                }
            }
        }
        c += 1;
    }
    let (_, rows) = e.live_rows();
    let flat: Vec<u32> = rows.iter().flatten().map(|d| d.expect("enumeration completes every row") as u32).collect();
    Ok(CosetTable::from_canonical_data(presentation.clone(), bfs_canonical(cols, &flat, 0)))
}

/// Limits for [`low_index_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LowIndexOptions {
    /// Maximum number of search nodes before giving up.
    pub node_limit: u64,
}

impl Default for LowIndexOptions {
    fn default() -> Self {
        LowIndexOptions { node_limit: 200_000_000 }
    }
}

/// Every subgroup of index at most `max_index`, one table per subgroup (not
/// per conjugacy class), sorted by index and then row order.
pub fn low_index(presentation: &Arc<Presentation>, max_index: usize) -> Result<Vec<CosetTable>, CosetError> {
    low_index_with(presentation, max_index, LowIndexOptions::default())
}

pub fn low_index_with(
    presentation: &Arc<Presentation>,
    max_index: usize,
    options: LowIndexOptions,
) -> Result<Vec<CosetTable>, CosetError> {
    let cols = presentation.alphabet().columns();
    let mut search = LowIndexSearch {
        cols,
        max_index: max_index.max(1),
        relators: presentation.relators().iter().filter(|r| !r.is_identity()).map(reversed_columns).collect(),
        nodes: 0,
        limit: options.node_limit,
        found: Vec::new(),
    };
    let state = Partial { table: vec![UNDEF; search.max_index * cols], used: 1 };
    search.descend(state)?;
    let mut out: Vec<CosetTable> = search
        .found
        .into_iter()
        .map(|data| CosetTable::from_canonical_data(presentation.clone(), data))
        .collect();
    out.sort();
    Ok(out)
}

/// One representative per conjugacy class, keeping the first table of each
/// class in input order.
pub fn conjugacy_classes(tables: &[CosetTable]) -> Vec<CosetTable> {
    let mut seen = HashSet::new();
    tables.iter().filter(|t| seen.insert(t.conjugacy_representative())).cloned().collect()
}

#[derive(Clone)]
struct Partial {
    table: Vec<u32>,
    used: usize,
}

struct LowIndexSearch {
    cols: usize,
    max_index: usize,
    relators: Vec<Vec<usize>>,
    nodes: u64,
    limit: u64,
    found: Vec<Vec<u32>>,
}

impl LowIndexSearch {
    fn descend(&mut self, state: Partial) -> Result<(), CosetError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(CosetError::ResourceBudgetExceeded { limit: self.limit });
        }
        let cols = self.cols;
        let open = (0..state.used * cols).find(|&i| state.table[i] == UNDEF);
        let Some(slot) = open else {
            self.found.push(state.table[..state.used * cols].to_vec());
            return Ok(());
        };
        let (c, col) = (slot / cols, slot % cols);
        let limit = if state.used < self.max_index { state.used + 1 } else { state.used };
        for d in 0..limit {
            if d < state.used && state.table[d * cols + (col ^ 1)] != UNDEF {
                continue;
            }
            let mut next = state.clone();
            if d == next.used {
                next.used += 1;
            }
            next.table[c * cols + col] = d as u32;
            next.table[d * cols + (col ^ 1)] = c as u32;
            if self.propagate(&mut next) {
                self.descend(next)?;
            }
        }
        Ok(())
    }

    /// Scans every relator at every point until no more deductions appear.
    /// Returns false on a contradiction.
    fn propagate(&self, state: &mut Partial) -> bool {
        let cols = self.cols;
        loop {
            let mut changed = false;
            for r in &self.relators {
                for start in 0..state.used {
                    let t = &mut state.table;
                    let (mut f, mut i) = (start, 0usize);
                    while i < r.len() && t[f * cols + r[i]] != UNDEF {
                        f = t[f * cols + r[i]] as usize;
                        i += 1;
                    }
                    if i == r.len() {
                        if f != start {
                            return false;
                        }
                        continue;
                    }
                    let (mut b, mut j) = (start, r.len() - 1);
                    while j > i && t[b * cols + (r[j] ^ 1)] != UNDEF {
                        b = t[b * cols + (r[j] ^ 1)] as usize;
                        j -= 1;
                    }
                    if j == i {
                        let back = b * cols + (r[i] ^ 1);
                        if t[back] != UNDEF {
                            // b already has an incoming r[i]-edge from elsewhere.
                            if t[back] as usize != f {
                                return false;
                            }
                            continue;
                        }
                        t[f * cols + r[i]] = b as u32;
                        t[back] = f as u32;
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }
}
