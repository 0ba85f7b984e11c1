//! Finitely generated subgroups of free groups as Stallings core graphs.
//!
//! Edges are read left to right: `w ∈ H` iff reading `w` from the basepoint
//! (inverse letters against the edge direction) returns to the basepoint.
//! Column `x` of row `v` holds the endpoint of the `x`-edge leaving `v`, or
//! nothing.

use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::cosets::CosetTable;
use crate::enumerate::{bfs_canonical, Enumerator, UNDEF};
use crate::words::{Alphabet, Letter, Presentation, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StallingsError {
    #[error("the element already lies in the subgroup, so no finite-index overgroup can exclude it")]
    SeparationImpossible,
    #[error("core graphs need a presentation without relators")]
    NotFree,
    #[error("alphabet mismatch")]
    AlphabetMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoreIndex {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoreGraph {
    presentation: Arc<Presentation>,
    cols: usize,
    data: Vec<u32>,
}

impl PartialOrd for CoreGraph {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CoreGraph {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.vertex_count()
            .cmp(&other.vertex_count())
            .then_with(|| self.data.cmp(&other.data))
            .then_with(|| self.presentation.to_string().cmp(&other.presentation.to_string()))
    }
}

/// The folded core graph of `<gens>` in the free group on `alphabet`.
pub fn fold(alphabet: &Alphabet, gens: &[Word]) -> Result<CoreGraph, StallingsError> {
    let free = Presentation::new(alphabet.clone(), Vec::new()).map_err(|_| StallingsError::AlphabetMismatch)?;
    CoreGraph::fold(&Arc::new(free), gens)
}

impl CoreGraph {
    pub fn fold(presentation: &Arc<Presentation>, gens: &[Word]) -> Result<CoreGraph, StallingsError> {
        if !presentation.is_free() {
            return Err(StallingsError::NotFree);
        }
        for w in gens {
            presentation.check(w).map_err(|_| StallingsError::AlphabetMismatch)?;
        }
        let cols = presentation.alphabet().columns();
        let mut e = Enumerator::new(cols, usize::MAX);
        for w in gens {
            let letters = w.letters();
            let mut cur = 0;
            for (i, l) in letters.iter().enumerate() {
                let col = l.column();
                if i + 1 == letters.len() {
                    e.join(cur, col, 0);
                } else {
                    cur = e.rep(cur);
                    cur = match e.get(cur, col) {
                        Some(d) => d,
                        None => e.define(cur, col).expect("fold has no point limit"),
                    };
                }
            }
        }
        let (_, rows) = e.live_rows();
        let flat: Vec<u32> = rows.iter().flatten().map(|d| d.map_or(UNDEF, |d| d as u32)).collect();
        Ok(CoreGraph::from_folded(presentation.clone(), flat))
    }

    /// Prunes hanging trees off non-base vertices and renumbers canonically.
    fn from_folded(presentation: Arc<Presentation>, mut data: Vec<u32>) -> CoreGraph {
        let cols = presentation.alphabet().columns();
        let n = data.len() / cols;
        let degree = |data: &[u32], v: usize| data[v * cols..(v + 1) * cols].iter().filter(|&&d| d != UNDEF).count();
        let mut stack: Vec<usize> = (1..n).filter(|&v| degree(&data, v) <= 1).collect();
        while let Some(v) = stack.pop() {
            if degree(&data, v) != 1 {
                continue;
            }
            let col = (0..cols).find(|&c| data[v * cols + c] != UNDEF).expect("degree one");
            let u = data[v * cols + col] as usize;
            data[v * cols + col] = UNDEF;
            data[u * cols + (col ^ 1)] = UNDEF;
            if u != 0 && degree(&data, u) == 1 {
                stack.push(u);
            }
        }
        CoreGraph { cols, data: bfs_canonical(cols, &data, 0), presentation }
    }

    /// The core graph of a finite-index subgroup given by its coset table.
    pub fn from_table(table: &CosetTable) -> Result<CoreGraph, StallingsError> {
        if !table.presentation().is_free() {
            return Err(StallingsError::NotFree);
        }
        let cols = table.columns();
        let swapped: Vec<u32> = table.data().chunks(cols).flat_map(|row| (0..cols).map(move |c| row[c ^ 1])).collect();
        Ok(CoreGraph { presentation: table.presentation_arc().clone(), cols, data: bfs_canonical(cols, &swapped, 0) })
    }

    /// The coset table of a complete core graph.
    pub fn to_table(&self) -> Option<CosetTable> {
        if !self.is_complete() {
            return None;
        }
        let swapped: Vec<Vec<usize>> =
            self.data.chunks(self.cols).map(|row| (0..self.cols).map(|c| row[c ^ 1] as usize).collect()).collect();
        Some(CosetTable::from_rows(self.presentation.clone(), &swapped).expect("complete core graphs are valid actions"))
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn presentation_arc(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn vertex_count(&self) -> usize {
        self.data.len() / self.cols
    }

    /// Endpoint of the edge reading `letter` from `v`.
    #[inline]
    pub fn edge(&self, v: usize, letter: Letter) -> Option<usize> {
        let d = self.data[v * self.cols + letter.column()];
        (d != UNDEF).then_some(d as usize)
    }

    pub fn rows(&self) -> Vec<Vec<Option<usize>>> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().map(|&d| (d != UNDEF).then_some(d as usize)).collect())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.data.iter().all(|&d| d != UNDEF)
    }

    pub fn index(&self) -> CoreIndex {
        if self.is_complete() {
            CoreIndex::Finite(self.vertex_count())
        } else {
            CoreIndex::Infinite
        }
    }

    /// Reads `w` from the basepoint as far as the graph allows. Returns the
    /// vertex reached and how many letters were read.
    pub fn read(&self, w: &Word) -> (usize, usize) {
        let mut v = 0;
        for (i, l) in w.letters().iter().enumerate() {
            match self.edge(v, *l) {
                Some(d) => v = d,
                None => return (v, i),
            }
        }
        (v, w.len())
    }

    pub fn contains(&self, w: &Word) -> bool {
        let (v, read) = self.read(w);
        read == w.len() && v == 0
    }

    /// Free basis of the subgroup: `t_v · x · t_d^-1` for every edge
    /// `v -x-> d` outside the breadth-first spanning tree, where `t_v` is
    /// the tree path from the basepoint.
    pub fn generators(&self) -> Vec<Word> {
        let n = self.vertex_count();
        let mut paths: Vec<Option<Word>> = vec![None; n];
        paths[0] = Some(Word::identity());
        let mut tree = std::collections::HashSet::new();
        for v in 0..n {
            let t = paths[v].clone().expect("canonical numbering reaches vertices in order");
            for col in 0..self.cols {
                let d = self.data[v * self.cols + col];
                if d != UNDEF && paths[d as usize].is_none() {
                    paths[d as usize] = Some(t.multiply(&Word::letter(Letter::from_column(col))));
                    let edge = if col & 1 == 0 { (v, col, d as usize) } else { (d as usize, col ^ 1, v) };
                    tree.insert(edge);
                }
            }
        }
        let paths: Vec<Word> = paths.into_iter().map(Option::unwrap).collect();
        let mut out = Vec::new();
        for v in 0..n {
            for col in (0..self.cols).step_by(2) {
                let d = self.data[v * self.cols + col];
                if d == UNDEF || tree.contains(&(v, col, d as usize)) {
                    continue;
                }
                let x = Word::letter(Letter::from_column(col));
                out.push(paths[v].multiply(&x).multiply(&paths[d as usize].inverse()));
            }
        }
        out
    }

    /// The core graph of `g H g^-1`.
    pub fn conjugate(&self, g: &Word) -> Result<CoreGraph, StallingsError> {
        self.presentation.check(g).map_err(|_| StallingsError::AlphabetMismatch)?;
        let gens: Vec<Word> = self.generators().iter().map(|h| g.conjugate(h)).collect();
        CoreGraph::fold(&self.presentation, &gens)
    }

    /// A finite-index subgroup containing `H` but not `g`: attach the path
    /// of `g`, then complete every generator's partial bijection by pairing
    /// vertices lacking an outgoing edge with vertices lacking an incoming
    /// one, both in vertex order.
    pub fn hall_separate(&self, g: &Word) -> Result<CoreGraph, StallingsError> {
        self.presentation.check(g).map_err(|_| StallingsError::AlphabetMismatch)?;
        if self.contains(g) {
            return Err(StallingsError::SeparationImpossible);
        }
        let cols = self.cols;
        let mut data = self.data.clone();
        let mut v = 0;
        for l in g.letters() {
            let col = l.column();
            let d = data[v * cols + col];
            v = if d != UNDEF {
                d as usize
            } else {
                let fresh = data.len() / cols;
                data.extend(std::iter::repeat_n(UNDEF, cols));
                data[v * cols + col] = fresh as u32;
                data[fresh * cols + (col ^ 1)] = v as u32;
                fresh
            };
        }
        let n = data.len() / cols;
        for col in (0..cols).step_by(2) {
            let sources: Vec<usize> = (0..n).filter(|&u| data[u * cols + col] == UNDEF).collect();
            let targets: Vec<usize> = (0..n).filter(|&u| data[u * cols + (col ^ 1)] == UNDEF).collect();
            debug_assert_eq!(sources.len(), targets.len());
            for (&s, &t) in sources.iter().zip(&targets) {
                data[s * cols + col] = t as u32;
                data[t * cols + (col ^ 1)] = s as u32;
            }
        }
        Ok(CoreGraph { presentation: self.presentation.clone(), cols, data: bfs_canonical(cols, &data, 0) })
    }

    /// `{"presentation", "index", "vertices", "complete", "table"}` with
    /// `null` for missing edges and for the index of an incomplete graph.
    pub fn to_json(&self) -> Value {
        let index = match self.index() {
            CoreIndex::Finite(n) => json!(n),
            CoreIndex::Infinite => Value::Null,
        };
        json!({
            "presentation": self.presentation.to_string(),
            "index": index,
            "vertices": self.vertex_count(),
            "complete": self.is_complete(),
            "table": self.rows(),
        })
    }

    pub fn to_dot(&self) -> String {
        let alphabet = self.presentation.alphabet();
        let mut out = String::from("digraph core {\n  node [shape=circle];\n");
        for v in 0..self.vertex_count() {
            let shape = if v == 0 { " [shape=doublecircle]" } else { "" };
            let _ = writeln!(out, "  {v}{shape};");
        }
        for v in 0..self.vertex_count() {
            for g in 0..alphabet.len() {
                if let Some(d) = self.edge(v, Letter::new(g, false)) {
                    let _ = writeln!(out, "  {v} -> {d} [label=\"{}\"];", alphabet.name(g));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> Arc<Presentation> {
        Arc::new(Presentation::free(["a", "b"]).unwrap())
    }

    fn core(p: &Arc<Presentation>, gens: &str) -> CoreGraph {
        CoreGraph::fold(p, &p.parse_words(gens).unwrap()).unwrap()
    }

    fn w(p: &Presentation, s: &str) -> Word {
        p.parse_word(s).unwrap()
    }

    #[test]
    fn fold_examples() {
        let p = f2();
        let c = core(&p, "a");
        assert_eq!(c.vertex_count(), 1);
        assert_eq!(c.edge(0, Letter::new(0, false)), Some(0));

        let c = core(&p, "a^2, b");
        assert_eq!(c.vertex_count(), 2);
        assert_eq!(c.rows(), vec![vec![Some(1), Some(1), Some(0), Some(0)], vec![Some(0), Some(0), None, None]]);
        assert!(c.contains(&w(&p, "a^2")) && c.contains(&w(&p, "b")));
        assert!(!c.contains(&w(&p, "a")));

        assert_eq!(core(&p, "a, a b"), core(&p, "a, b"));
        assert!(core(&p, "a, a b").contains(&w(&p, "b")));
        assert_eq!(core(&p, "").vertex_count(), 1);
    }

    #[test]
    fn fold_rejects_relators() {
        let p = Arc::new("<a| a^2>".parse::<Presentation>().unwrap());
        assert_eq!(CoreGraph::fold(&p, &[]), Err(StallingsError::NotFree));
    }

    #[test]
    fn contains_examples() {
        let p = f2();
        let c = core(&p, "a^2, b");
        assert!(c.contains(&w(&p, "a^2 b")));
        assert!(!c.contains(&w(&p, "a")));
        assert!(c.contains(&Word::identity()));
    }

    #[test]
    fn index_examples() {
        let p = f2();
        assert_eq!(core(&p, "a, b").index(), CoreIndex::Finite(1));
        assert_eq!(core(&p, "a^2, b, a b a^-1").index(), CoreIndex::Finite(2));
        assert_eq!(core(&p, "a^2, b^2").index(), CoreIndex::Infinite);
    }

    #[test]
    fn hall_examples() {
        let p = f2();
        let h = core(&p, "a^2, b");
        let k = h.hall_separate(&w(&p, "a")).unwrap();
        assert_eq!(k.index(), CoreIndex::Finite(2));
        let t = k.to_table().unwrap();
        for s in ["a^2", "b"] {
            assert!(k.contains(&w(&p, s)));
            assert_eq!(t.coset_of(&w(&p, s)).unwrap(), 0);
        }
        assert!(!k.contains(&w(&p, "a")));
        assert_ne!(t.coset_of(&w(&p, "a")).unwrap(), 0);

        let k = core(&p, "a").hall_separate(&w(&p, "b")).unwrap();
        assert!(k.is_complete() && k.contains(&w(&p, "a")) && !k.contains(&w(&p, "b")));

        assert_eq!(core(&p, "a, b").hall_separate(&w(&p, "a")), Err(StallingsError::SeparationImpossible));
    }

    #[test]
    fn conjugate_examples() {
        let p = f2();
        let a = core(&p, "a");
        assert_eq!(a.conjugate(&w(&p, "a^5")).unwrap(), a);
        let bab = a.conjugate(&w(&p, "b")).unwrap();
        assert_eq!(bab, core(&p, "b a b^-1"));
        assert_eq!(bab.vertex_count(), 2);
        assert_eq!(a.conjugate(&Word::identity()).unwrap(), a);
    }

    #[test]
    fn table_round_trip() {
        let p = f2();
        let c = core(&p, "a^2, b, a b a^-1");
        let t = c.to_table().unwrap();
        t.validate().unwrap();
        assert_eq!(CoreGraph::from_table(&t).unwrap(), c);
        assert_eq!(core(&p, &t.schreier_generators().iter().map(|g| p.word_text(g)).collect::<Vec<_>>().join(",")), c);
    }

    #[test]
    fn dot_and_json() {
        let p = f2();
        let c = core(&p, "a^2, b");
        let dot = c.to_dot();
        assert_eq!(dot.matches("[label=\"a\"]").count(), 2);
        assert_eq!(dot.matches("[label=\"b\"]").count(), 1);
        assert_eq!(c.to_json()["complete"], false);
        assert_eq!(c.to_json()["index"], Value::Null);
    }

    fn word_strategy(len: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..4, 0..=len).prop_map(|cols| Word::reduce(&cols.into_iter().map(Letter::from_column).collect::<Vec<_>>()))
    }

    fn is_core(c: &CoreGraph) -> bool {
        let rows = c.rows();
        let folded = (0..rows.len()).all(|v| {
            (0..c.cols).all(|col| match rows[v][col] {
                Some(d) => rows[d][col ^ 1] == Some(v),
                None => true,
            })
        });
        let pruned = (1..rows.len()).all(|v| rows[v].iter().flatten().count() >= 2);
        folded && pruned && bfs_canonical(c.cols, &c.data, 0) == c.data
    }

    proptest! {
        #[test]
        fn fold_invariants(gens in prop::collection::vec(word_strategy(6), 0..4), u in word_strategy(6), v in word_strategy(6)) {
            let p = f2();
            let c = CoreGraph::fold(&p, &gens).unwrap();
            prop_assert!(is_core(&c));
            let mut rev = gens.clone();
            rev.reverse();
            prop_assert_eq!(&CoreGraph::fold(&p, &rev).unwrap(), &c);
            prop_assert_eq!(&CoreGraph::fold(&p, &c.generators()).unwrap(), &c);
            for g in &gens {
                prop_assert!(c.contains(g));
            }
            if c.contains(&u) && c.contains(&v) {
                prop_assert!(c.contains(&u.multiply(&v)));
                prop_assert!(c.contains(&u.inverse()));
            }
            let back = c.conjugate(&u).unwrap().conjugate(&u.inverse()).unwrap();
            prop_assert_eq!(&back, &c);
            if c.contains(&u) {
                prop_assert_eq!(&c.conjugate(&u).unwrap(), &c);
            }
        }

        #[test]
        fn hall_postconditions(gens in prop::collection::vec(word_strategy(8), 0..4), g in word_strategy(8)) {
            let p = f2();
            let c = CoreGraph::fold(&p, &gens).unwrap();
            prop_assume!(!c.contains(&g));
            let k = c.hall_separate(&g).unwrap();
            prop_assert!(k.is_complete());
            prop_assert!(k.vertex_count() <= c.vertex_count() + g.len() + 1);
            let t = k.to_table().unwrap();
            for s in c.generators() {
                prop_assert!(k.contains(&s));
                prop_assert_eq!(t.coset_of(&s).unwrap(), 0);
            }
            prop_assert!(!k.contains(&g));
            prop_assert_ne!(t.coset_of(&g).unwrap(), 0);
            prop_assert_eq!(&CoreGraph::from_table(&t).unwrap(), &k);
        }
    }
}
