//! Points of the subgroup space: handles with membership oracles, basic
//! neighbourhoods `W(H, Ω) = {K : K ∩ Ω = H ∩ Ω}` and isolation
//! certificates.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::cosets::{todd_coxeter, CosetError, CosetTable};
use crate::stallings::{CoreGraph, CoreIndex, StallingsError};
use crate::words::{Presentation, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChabautyError {
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("subgroup is not known to have finite index")]
    NotFiniteIndex,
    #[error("word `{0}` is both required and excluded")]
    ConstraintOverlap(String),
    #[error(transparent)]
    Cosets(#[from] CosetError),
    #[error(transparent)]
    Stallings(#[from] StallingsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    FiniteIndex(CosetTable),
    FreeCore(CoreGraph),
}

/// A subgroup of a finitely presented group. Core graphs of finite index
/// are stored as coset tables, so equality of handles is equality of
/// subgroups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupHandle {
    repr: Representation,
}

/// Identifies the left coset `uH` among all cosets of `H`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CosetKey {
    Point(usize),
    /// Vertex where reading `u^-1` leaves the core graph, with the unread
    /// remainder.
    Branch(usize, Word),
}

impl From<CosetTable> for SubgroupHandle {
    fn from(table: CosetTable) -> Self {
        SubgroupHandle { repr: Representation::FiniteIndex(table) }
    }
}

impl From<CoreGraph> for SubgroupHandle {
    fn from(core: CoreGraph) -> Self {
        match core.to_table() {
            Some(table) => SubgroupHandle { repr: Representation::FiniteIndex(table) },
            None => SubgroupHandle { repr: Representation::FreeCore(core) },
        }
    }
}

impl SubgroupHandle {
    /// `<gens>`: folded when the presentation is free, enumerated otherwise.
    pub fn from_generators(
        presentation: &Arc<Presentation>,
        gens: &[Word],
        max_cosets: usize,
    ) -> Result<SubgroupHandle, ChabautyError> {
        if presentation.is_free() {
            Ok(CoreGraph::fold(presentation, gens)?.into())
        } else {
            Ok(todd_coxeter(presentation, gens, max_cosets)?.into())
        }
    }

    pub fn whole_group(presentation: &Arc<Presentation>) -> SubgroupHandle {
        CosetTable::whole_group(presentation.clone()).into()
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn table(&self) -> Option<&CosetTable> {
        match &self.repr {
            Representation::FiniteIndex(t) => Some(t),
            Representation::FreeCore(_) => None,
        }
    }

    pub fn core(&self) -> Option<&CoreGraph> {
        match &self.repr {
            Representation::FiniteIndex(_) => None,
            Representation::FreeCore(c) => Some(c),
        }
    }

    pub fn presentation(&self) -> &Presentation {
        self.presentation_arc()
    }

    pub fn presentation_arc(&self) -> &Arc<Presentation> {
        match &self.repr {
            Representation::FiniteIndex(t) => t.presentation_arc(),
            Representation::FreeCore(c) => c.presentation_arc(),
        }
    }

    pub fn index(&self) -> CoreIndex {
        match &self.repr {
            Representation::FiniteIndex(t) => CoreIndex::Finite(t.index()),
            Representation::FreeCore(_) => CoreIndex::Infinite,
        }
    }

    fn check(&self, w: &Word) -> Result<(), ChabautyError> {
        self.presentation().check(w).map_err(|_| ChabautyError::AlphabetMismatch)
    }

    fn same_group(&self, other: &SubgroupHandle) -> Result<(), ChabautyError> {
        if self.presentation_arc() == other.presentation_arc() {
            Ok(())
        } else {
            Err(ChabautyError::AlphabetMismatch)
        }
    }

    /// `w ∈ H`. The word must be over the handle's alphabet.
    pub fn member(&self, w: &Word) -> bool {
        match &self.repr {
            Representation::FiniteIndex(t) => t.contains(w),
            Representation::FreeCore(c) => c.contains(w),
        }
    }

    pub fn checked_member(&self, w: &Word) -> Result<bool, ChabautyError> {
        self.check(w)?;
        Ok(self.member(w))
    }

    pub fn coset_key(&self, u: &Word) -> CosetKey {
        match &self.repr {
            Representation::FiniteIndex(t) => CosetKey::Point(t.apply(u, 0)),
            Representation::FreeCore(c) => {
                let inv = u.inverse();
                let (v, read) = c.read(&inv);
                CosetKey::Branch(v, inv.letters()[read..].iter().copied().collect())
            }
        }
    }

    /// Generators of `H`.
    pub fn generators(&self) -> Vec<Word> {
        match &self.repr {
            Representation::FiniteIndex(t) => t.schreier_generators(),
            Representation::FreeCore(c) => c.generators(),
        }
    }

    /// The handle of `g H g^-1`.
    pub fn conjugate(&self, g: &Word) -> Result<SubgroupHandle, ChabautyError> {
        self.check(g)?;
        Ok(match &self.repr {
            Representation::FiniteIndex(t) => t.rebase(t.apply(g, 0)).into(),
            Representation::FreeCore(c) => c.conjugate(g)?.into(),
        })
    }

    pub fn to_json(&self) -> Value {
        match &self.repr {
            Representation::FiniteIndex(t) => json!({"kind": "finite_index", "subgroup": t.to_json()}),
            Representation::FreeCore(c) => json!({"kind": "free_core", "subgroup": c.to_json()}),
        }
    }

    pub fn to_dot(&self) -> String {
        match &self.repr {
            Representation::FiniteIndex(t) => t.to_dot(),
            Representation::FreeCore(c) => c.to_dot(),
        }
    }
}

/// Required members `S1` and excluded elements `S2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MembershipConstraint {
    must_contain: Vec<Word>,
    must_exclude: Vec<Word>,
}

impl MembershipConstraint {
    pub fn new(must_contain: Vec<Word>, must_exclude: Vec<Word>) -> Result<MembershipConstraint, ChabautyError> {
        let contain: BTreeSet<Word> = must_contain.into_iter().collect();
        let exclude: BTreeSet<Word> = must_exclude.into_iter().collect();
        if let Some(w) = contain.intersection(&exclude).next() {
            return Err(ChabautyError::ConstraintOverlap(format!("{w:?}")));
        }
        Ok(MembershipConstraint { must_contain: contain.into_iter().collect(), must_exclude: exclude.into_iter().collect() })
    }

    pub fn must_contain(&self) -> &[Word] {
        &self.must_contain
    }

    pub fn must_exclude(&self) -> &[Word] {
        &self.must_exclude
    }

    pub fn satisfied_by(&self, k: &SubgroupHandle) -> bool {
        self.must_contain.iter().all(|w| k.member(w)) && !self.must_exclude.iter().any(|w| k.member(w))
    }

    pub fn to_json(&self, presentation: &Presentation) -> Value {
        let text = |ws: &[Word]| ws.iter().map(|w| presentation.word_text(w)).collect::<Vec<_>>();
        json!({"must_contain": text(&self.must_contain), "must_exclude": text(&self.must_exclude)})
    }

    pub fn from_json(value: &Value, presentation: &Presentation) -> Result<MembershipConstraint, ChabautyError> {
        let read = |key: &str| -> Result<Vec<Word>, ChabautyError> {
            let Some(items) = value.get(key).and_then(Value::as_array) else {
                return Ok(Vec::new());
            };
            items
                .iter()
                .map(|v| {
                    let text = v.as_str().ok_or(ChabautyError::AlphabetMismatch)?;
                    presentation.parse_word(text).map_err(|e| ChabautyError::Cosets(e.into()))
                })
                .collect()
        };
        MembershipConstraint::new(read("must_contain")?, read("must_exclude")?)
    }
}

/// `K ∈ W(H, Ω)`.
pub fn window_test(k: &SubgroupHandle, h: &SubgroupHandle, omega: &[Word]) -> Result<bool, ChabautyError> {
    k.same_group(h)?;
    for w in omega {
        h.check(w)?;
    }
    Ok(omega.iter().all(|w| k.member(w) == h.member(w)))
}

/// Splits `Ω` by membership in `H`.
pub fn constraint_of_window(h: &SubgroupHandle, omega: &[Word]) -> Result<MembershipConstraint, ChabautyError> {
    for w in omega {
        h.check(w)?;
    }
    let (inside, outside): (Vec<Word>, Vec<Word>) = omega.iter().cloned().partition(|w| h.member(w));
    MembershipConstraint::new(inside, outside)
}

/// A constraint satisfied by `H` and by no other subgroup: Schreier
/// generators of `H`, plus one element of each minimal strict overgroup
/// that lies outside `H`.
pub fn isolation_certificate(h: &SubgroupHandle) -> Result<MembershipConstraint, ChabautyError> {
    let table = h.table().ok_or(ChabautyError::NotFiniteIndex)?;
    let must_contain = table.schreier_generators();
    let strict: Vec<CosetTable> = table.overgroups().into_iter().skip(1).collect();
    let atoms = strict.iter().filter(|k| !strict.iter().any(|l| l != *k && l.index() > k.index() && l.is_subgroup_of(k)));
    let must_exclude = atoms
        .map(|k| {
            k.schreier_generators().into_iter().find(|w| !table.contains(w)).expect("a strict overgroup has a generator outside")
        })
        .collect();
    MembershipConstraint::new(must_contain, must_exclude)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffenceReason {
    /// A member different from the subject satisfies the constraint.
    Satisfies,
    /// A second copy of the subject.
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Offender {
    pub index: usize,
    pub reason: OffenceReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub subject_satisfies: bool,
    pub offenders: Vec<Offender>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.subject_satisfies && self.offenders.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let offenders: Vec<Value> = self
            .offenders
            .iter()
            .map(|o| {
                let reason = match o.reason {
                    OffenceReason::Satisfies => "satisfies",
                    OffenceReason::Collision => "collision",
                };
                json!({"index": o.index, "reason": reason})
            })
            .collect();
        json!({
            "status": if self.passed() { "pass" } else { "fail" },
            "subject_satisfies": self.subject_satisfies,
            "offenders": offenders,
        })
    }
}

/// Words as reversed column lists for tight table lookups.
fn compile(words: &[Word]) -> Vec<Vec<usize>> {
    words.iter().map(|w| w.letters().iter().rev().map(|l| l.column()).collect()).collect()
}

#[inline]
fn fixes_base<T: Copy + Into<u32>>(data: &[T], cols: usize, word: &[usize]) -> bool {
    let mut c = 0usize;
    for &col in word {
        c = data[c * cols + col].into() as usize;
    }
    c == 0
}

fn satisfies_packed<T: Copy + Into<u32>>(data: &[T], cols: usize, contain: &[Vec<usize>], exclude: &[Vec<usize>]) -> bool {
    contain.iter().all(|w| fixes_base(data, cols, w)) && !exclude.iter().any(|w| fixes_base(data, cols, w))
}

fn same_rows<T: Copy + Into<u32>>(data: &[T], subject: Option<&[u32]>) -> bool {
    subject.is_some_and(|s| s.len() == data.len() && s.iter().zip(data).all(|(&a, &b)| a == b.into()))
}

/// A list of subgroups laid out for repeated certificate checks: coset
/// tables are packed into one contiguous array.
#[derive(Debug, Clone)]
enum Packed {
    Bytes(Vec<u8>),
    Words(Vec<u32>),
}

#[derive(Debug, Clone)]
pub struct Universe {
    presentation: Option<Arc<Presentation>>,
    cols: usize,
    data: Packed,
    /// `(start, index)` into `data` for table members, `None` for cores.
    slots: Vec<Option<(usize, usize)>>,
    cores: Vec<(usize, SubgroupHandle)>,
}

impl Universe {
    pub fn new(members: &[SubgroupHandle]) -> Result<Universe, ChabautyError> {
        let presentation = members.first().map(|m| m.presentation_arc().clone());
        let cols = presentation.as_ref().map_or(0, |p| p.alphabet().columns());
        let small = members.iter().all(|m| m.table().is_none_or(|t| t.index() <= 256));
        let data = if small { Packed::Bytes(Vec::new()) } else { Packed::Words(Vec::new()) };
        let mut universe = Universe { presentation, cols, data, slots: Vec::new(), cores: Vec::new() };
        let mut len = 0;
        for (i, m) in members.iter().enumerate() {
            if Some(m.presentation_arc()) != universe.presentation.as_ref() {
                return Err(ChabautyError::AlphabetMismatch);
            }
            match &m.repr {
                Representation::FiniteIndex(t) => {
                    universe.slots.push(Some((len, t.index())));
                    len += t.data().len();
                    match &mut universe.data {
                        Packed::Bytes(d) => d.extend(t.data().iter().map(|&x| x as u8)),
                        Packed::Words(d) => d.extend_from_slice(t.data()),
                    }
                }
                Representation::FreeCore(_) => {
                    universe.slots.push(None);
                    universe.cores.push((i, m.clone()));
                }
            }
        }
        Ok(universe)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Checks that `h` satisfies `c` and that no other member of `universe`
/// does. A repeated copy of `h` counts as a collision.
pub fn verify_certificate(
    c: &MembershipConstraint,
    h: &SubgroupHandle,
    universe: &[SubgroupHandle],
) -> Result<CertificateReport, ChabautyError> {
    verify_certificate_in(c, h, &Universe::new(universe)?)
}

pub fn verify_certificate_in(
    c: &MembershipConstraint,
    h: &SubgroupHandle,
    universe: &Universe,
) -> Result<CertificateReport, ChabautyError> {
    for w in c.must_contain.iter().chain(&c.must_exclude) {
        h.check(w)?;
    }
    if universe.presentation.as_ref().is_some_and(|p| p != h.presentation_arc()) {
        return Err(ChabautyError::AlphabetMismatch);
    }
    let mut contain = compile(&c.must_contain);
    contain.sort_by_key(Vec::len);
    let exclude = compile(&c.must_exclude);
    let subject = h.table().map(|t| t.data());
    let cols = universe.cols;
    let mut offenders = Vec::new();
    let mut seen_subject = false;
    let mut cores = universe.cores.iter().peekable();
    for (index, slot) in universe.slots.iter().enumerate() {
        let (satisfies, is_subject) = match slot {
            Some((start, n)) => {
                let range = *start..*start + n * cols;
                match &universe.data {
                    Packed::Bytes(d) => {
                        let data = &d[range];
                        (satisfies_packed(data, cols, &contain, &exclude), same_rows(data, subject))
                    }
                    Packed::Words(d) => {
                        let data = &d[range];
                        (satisfies_packed(data, cols, &contain, &exclude), same_rows(data, subject))
                    }
                }
            }
            None => {
                let (_, k) = cores.next().expect("one core per empty slot");
                (c.satisfied_by(k), k == h)
            }
        };
        if is_subject {
            if seen_subject {
                offenders.push(Offender { index, reason: OffenceReason::Collision });
            }
            seen_subject = true;
        } else if satisfies {
            offenders.push(Offender { index, reason: OffenceReason::Satisfies });
        }
    }
    Ok(CertificateReport { subject_satisfies: c.satisfied_by(h), offenders })
}
