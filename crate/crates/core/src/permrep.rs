//! Finite truncations of permutation representations `G → Sym(X)`.
//!
//! A [`PermRep`] is a sorted list of transitive components with
//! multiplicities. Finite components are coset tables; infinite ones are
//! lazy orbits `G/H` materialised as the cosets `uH` with `|u| ≤ radius`,
//! found breadth-first. Points carry global labels, assigned component by
//! component and copy by copy.
//!
//! A [`WindowAction`] is an explicit partial action on `0..n`, used for
//! relabelled (conjugated) representations and free products.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use serde_json::{json, Value};
use thiserror::Error;

use crate::chabauty::{ChabautyError, CosetKey, SubgroupHandle};
use crate::cosets::{conjugacy_classes, low_index, CosetError, CosetTable};
use crate::enumerate::UNDEF;
use crate::words::{Letter, Presentation, Word};

pub const DEFAULT_COPIES: usize = 3;
pub const DEFAULT_RADIUS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermRepError {
    #[error("point {point} leaves the materialised window")]
    WindowExhausted { point: usize },
    #[error("point {point} is outside a window of {size} points")]
    PointOutOfRange { point: usize, size: usize },
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("not a bijection of the window: {0}")]
    NotABijection(String),
    #[error("windows of {left} and {right} points cannot be aligned")]
    WindowMismatch { left: usize, right: usize },
    #[error("handles {0} and {1} are conjugate")]
    ConjugateDuplicate(usize, usize),
    #[error("handle {0} has finite index, so it cannot be in the Sigma class")]
    InvalidClassification(usize),
    #[error("relator {0} is not satisfied")]
    RelatorViolated(String),
    #[error(transparent)]
    Chabauty(#[from] ChabautyError),
    #[error(transparent)]
    Cosets(#[from] CosetError),
}

/// A (partial) action of a finitely presented group on labelled points.
pub trait Action {
    fn presentation(&self) -> &Arc<Presentation>;

    /// Number of materialised points.
    fn size(&self) -> usize;

    /// `letter · x`.
    fn image(&self, letter: Letter, x: usize) -> Result<usize, PermRepError>;

    /// `w · x`, letters applied right to left.
    fn apply(&self, w: &Word, x: usize) -> Result<usize, PermRepError> {
        let mut y = x;
        for l in w.letters().iter().rev() {
            y = self.image(*l, y)?;
        }
        Ok(y)
    }

    /// `{x, w_k x, w_{k-1} w_k x, ..., w x}`.
    fn trace(&self, x: usize, w: &Word) -> Result<BTreeSet<usize>, PermRepError> {
        self.check_point(x)?;
        let mut out = BTreeSet::from([x]);
        let mut y = x;
        for l in w.letters().iter().rev() {
            y = self.image(*l, y)?;
            out.insert(y);
        }
        Ok(out)
    }

    fn check_point(&self, x: usize) -> Result<(), PermRepError> {
        if x < self.size() {
            Ok(())
        } else {
            Err(PermRepError::PointOutOfRange { point: x, size: self.size() })
        }
    }

    fn check_word(&self, w: &Word) -> Result<(), PermRepError> {
        self.presentation().check(w).map_err(|_| PermRepError::AlphabetMismatch)
    }

    /// Points reachable from `x` by generator steps inside the window, in
    /// breadth-first order, and whether that set is closed (no step leaves
    /// the window).
    fn orbit(&self, x: usize) -> Result<(Vec<usize>, bool), PermRepError> {
        self.check_point(x)?;
        let cols = self.presentation().alphabet().columns();
        let mut seen = BTreeSet::from([x]);
        let mut order = vec![x];
        let mut closed = true;
        let mut head = 0;
        while head < order.len() {
            let y = order[head];
            head += 1;
            for col in 0..cols {
                match self.image(Letter::from_column(col), y) {
                    Ok(z) => {
                        if seen.insert(z) {
                            order.push(z);
                        }
                    }
                    Err(PermRepError::WindowExhausted { .. }) => closed = false,
                    Err(e) => return Err(e),
                }
            }
        }
        Ok((order, closed))
    }
}

struct Expansion {
    reps: Vec<Word>,
    keys: HashMap<CosetKey, usize>,
}

/// The infinite orbit `G/H` truncated to coset representatives of length
/// at most `radius`.
pub struct LazyOrbit {
    handle: SubgroupHandle,
    radius: usize,
    expansion: Arc<OnceLock<Expansion>>,
}

impl Clone for LazyOrbit {
    fn clone(&self) -> Self {
        LazyOrbit { handle: self.handle.clone(), radius: self.radius, expansion: self.expansion.clone() }
    }
}

impl std::fmt::Debug for LazyOrbit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LazyOrbit").field("handle", &self.handle).field("radius", &self.radius).finish()
    }
}

impl PartialEq for LazyOrbit {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.handle == other.handle
    }
}

impl Eq for LazyOrbit {}

impl LazyOrbit {
    fn new(handle: SubgroupHandle, radius: usize) -> LazyOrbit {
        LazyOrbit { handle, radius, expansion: Arc::new(OnceLock::new()) }
    }

    pub fn handle(&self) -> &SubgroupHandle {
        &self.handle
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn expansion(&self) -> &Expansion {
        self.expansion.get_or_init(|| {
            let cols = self.handle.presentation().alphabet().columns();
            let mut reps = vec![Word::identity()];
            let mut keys = HashMap::from([(self.handle.coset_key(&Word::identity()), 0)]);
            let mut depth = vec![0usize];
            let mut head = 0;
            while head < reps.len() {
                if depth[head] < self.radius {
                    for col in 0..cols {
                        let next = Word::letter(Letter::from_column(col)).multiply(&reps[head]);
                        let key = self.handle.coset_key(&next);
                        if let std::collections::hash_map::Entry::Vacant(e) = keys.entry(key) {
                            e.insert(reps.len());
                            reps.push(next);
                            depth.push(depth[head] + 1);
                        }
                    }
                }
                head += 1;
            }
            Expansion { reps, keys }
        })
    }

    pub fn size(&self) -> usize {
        self.expansion().reps.len()
    }

    /// Representatives `u` of the window points `uH`, in label order.
    pub fn representatives(&self) -> &[Word] {
        &self.expansion().reps
    }

    /// Local label of `uH`, if it is in the window.
    pub fn locate(&self, u: &Word) -> Option<usize> {
        self.expansion().keys.get(&self.handle.coset_key(u)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Component {
    Finite(CosetTable),
    Lazy(LazyOrbit),
}

impl PartialOrd for Component {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Component {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Component::Finite(a), Component::Finite(b)) => a.cmp(b),
            (Component::Finite(_), Component::Lazy(_)) => Less,
            (Component::Lazy(_), Component::Finite(_)) => Greater,
            (Component::Lazy(a), Component::Lazy(b)) => a.handle.cmp(&b.handle).then(a.radius.cmp(&b.radius)),
        }
    }
}

impl Component {
    pub fn size(&self) -> usize {
        match self {
            Component::Finite(t) => t.index(),
            Component::Lazy(o) => o.size(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Component::Finite(_))
    }

    /// The subgroup fixing the component's basepoint.
    pub fn subgroup(&self) -> SubgroupHandle {
        match self {
            Component::Finite(t) => t.clone().into(),
            Component::Lazy(o) => o.handle.clone(),
        }
    }

    /// `w · p` for a local point `p`.
    fn apply_local(&self, w: &Word, p: usize) -> Option<usize> {
        match self {
            Component::Finite(t) => Some(t.apply(w, p)),
            Component::Lazy(o) => o.locate(&w.multiply(&o.representatives()[p])),
        }
    }

    /// A word `u` with `u · 0 = p`.
    fn representative(&self, p: usize) -> Word {
        match self {
            Component::Finite(t) => t.transversal()[p].clone(),
            Component::Lazy(o) => o.representatives()[p].clone(),
        }
    }
}

/// Where a global label lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointAddress {
    pub component: usize,
    pub copy: usize,
    pub local: usize,
}

#[derive(Debug, Clone)]
pub struct PermRep {
    presentation: Arc<Presentation>,
    components: Vec<(Component, usize)>,
    offsets: OnceLock<Vec<usize>>,
}

impl PartialEq for PermRep {
    fn eq(&self, other: &Self) -> bool {
        self.presentation == other.presentation && self.components == other.components
    }
}

impl Eq for PermRep {}

impl PermRep {
    /// Sorts components and merges equal ones.
    fn canonical(presentation: Arc<Presentation>, mut parts: Vec<(Component, usize)>) -> PermRep {
        parts.retain(|(_, m)| *m > 0);
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        let mut components: Vec<(Component, usize)> = Vec::with_capacity(parts.len());
        for (c, m) in parts {
            match components.last_mut() {
                Some((last, n)) if *last == c => *n += m,
                _ => components.push((c, m)),
            }
        }
        PermRep { presentation, components, offsets: OnceLock::new() }
    }

    /// The action with no points.
    pub fn empty(presentation: Arc<Presentation>) -> PermRep {
        PermRep { presentation, components: Vec::new(), offsets: OnceLock::new() }
    }

    /// `G ↷ G/H` with the default truncation radius for infinite index.
    pub fn quasiregular(h: &SubgroupHandle) -> PermRep {
        PermRep::quasiregular_with_radius(h, DEFAULT_RADIUS)
    }

    pub fn quasiregular_with_radius(h: &SubgroupHandle, radius: usize) -> PermRep {
        let component = match h.table() {
            Some(t) => Component::Finite(t.clone()),
            None => Component::Lazy(LazyOrbit::new(h.clone(), radius)),
        };
        PermRep { presentation: h.presentation_arc().clone(), components: vec![(component, 1)], offsets: OnceLock::new() }
    }

    pub fn components(&self) -> &[(Component, usize)] {
        &self.components
    }

    fn offsets(&self) -> &[usize] {
        self.offsets.get_or_init(|| {
            let mut out = Vec::with_capacity(self.components.len() + 1);
            let mut total = 0;
            out.push(0);
            for (c, m) in &self.components {
                total += c.size() * m;
                out.push(total);
            }
            out
        })
    }

    /// First label of component `i`.
    pub fn component_start(&self, i: usize) -> usize {
        self.offsets()[i]
    }

    pub fn address(&self, x: usize) -> Result<PointAddress, PermRepError> {
        self.check_point(x)?;
        let offsets = self.offsets();
        let component = offsets.partition_point(|&o| o <= x) - 1;
        let size = self.components[component].0.size();
        let rel = x - offsets[component];
        Ok(PointAddress { component, copy: rel / size, local: rel % size })
    }

    pub fn label(&self, address: PointAddress) -> usize {
        self.offsets()[address.component] + address.copy * self.components[address.component].0.size() + address.local
    }

    /// Label of the point `u · base` in the given copy of a component.
    pub fn locate(&self, component: usize, copy: usize, u: &Word) -> Result<usize, PermRepError> {
        let local = self.components[component].0.apply_local(u, 0).ok_or(PermRepError::WindowExhausted { point: 0 })?;
        Ok(self.label(PointAddress { component, copy, local }))
    }

    /// A word carrying the basepoint of `x`'s component to `x`.
    pub fn representative(&self, x: usize) -> Result<Word, PermRepError> {
        let a = self.address(x)?;
        Ok(self.components[a.component].0.representative(a.local))
    }

    /// Combines representations, multiplying multiplicities.
    pub fn disjoint_union(parts: &[(&PermRep, usize)]) -> Result<PermRep, PermRepError> {
        let Some((first, _)) = parts.first() else {
            return Err(PermRepError::AlphabetMismatch);
        };
        let presentation = first.presentation.clone();
        let mut all = Vec::new();
        for (r, m) in parts {
            if r.presentation != presentation {
                return Err(PermRepError::AlphabetMismatch);
            }
            all.extend(r.components.iter().map(|(c, n)| (c.clone(), n * m)));
        }
        Ok(PermRep::canonical(presentation, all))
    }

    /// `copies` copies of `G/H` for one `H` per conjugacy class of subgroups
    /// of index at most `max_index`.
    pub fn tau_star_lerf(presentation: &Arc<Presentation>, max_index: usize, copies: usize) -> Result<PermRep, PermRepError> {
        let classes = conjugacy_classes(&low_index(presentation, max_index)?);
        let parts = classes.into_iter().map(|t| (Component::Finite(t), copies)).collect();
        Ok(PermRep::canonical(presentation.clone(), parts))
    }

    /// `copies` orbits per Delta handle and one per Sigma handle.
    pub fn tau_star_solitary(
        classified: &[(SubgroupHandle, SubgroupClass)],
        copies: usize,
        radius: usize,
    ) -> Result<PermRep, PermRepError> {
        let Some((first, _)) = classified.first() else {
            return Err(PermRepError::AlphabetMismatch);
        };
        let presentation = first.presentation_arc().clone();
        for (i, (h, class)) in classified.iter().enumerate() {
            if h.presentation_arc() != &presentation {
                return Err(PermRepError::AlphabetMismatch);
            }
            if *class == SubgroupClass::Sigma && h.table().is_some() {
                return Err(PermRepError::InvalidClassification(i));
            }
        }
        for (i, (h, _)) in classified.iter().enumerate() {
            for (j, (k, _)) in classified.iter().enumerate().skip(i + 1) {
                if let (Some(a), Some(b)) = (h.table(), k.table()) {
                    if a.is_conjugate_to(b) {
                        return Err(PermRepError::ConjugateDuplicate(i, j));
                    }
                }
            }
        }
        let parts = classified
            .iter()
            .map(|(h, class)| {
                let m = match class {
                    SubgroupClass::Delta => copies,
                    SubgroupClass::Sigma => 1,
                };
                let c = PermRep::quasiregular_with_radius(h, radius).components.remove(0).0;
                (c, m)
            })
            .collect();
        Ok(PermRep::canonical(presentation, parts))
    }

    /// Stabilizer of `x`: the rebased table, or `u H u^-1` for the lazy
    /// point `uH`.
    pub fn stabilizer(&self, x: usize) -> Result<SubgroupHandle, PermRepError> {
        let a = self.address(x)?;
        Ok(match &self.components[a.component].0 {
            Component::Finite(t) => t.rebase(a.local).into(),
            Component::Lazy(o) => o.handle.conjugate(&o.representatives()[a.local])?,
        })
    }

    /// Appends `m` copies of `G/H`.
    pub fn add_orbits(&self, h: &SubgroupHandle, m: usize) -> Result<PermRep, PermRepError> {
        if h.presentation_arc() != &self.presentation {
            return Err(PermRepError::AlphabetMismatch);
        }
        let mut parts = self.components.clone();
        parts.extend(PermRep::quasiregular(h).components.into_iter().map(|(c, _)| (c, m)));
        Ok(PermRep::canonical(self.presentation.clone(), parts))
    }

    /// Appends `k` points fixed by everything.
    pub fn add_fixed_points(&self, k: usize) -> PermRep {
        let mut parts = self.components.clone();
        parts.push((Component::Finite(CosetTable::whole_group(self.presentation.clone())), k));
        PermRep::canonical(self.presentation.clone(), parts)
    }

    /// Where each label of `old` went in `self`, when `self` was obtained
    /// from `old` by adding components.
    pub fn embed_labels(&self, old: &PermRep) -> Result<Vec<usize>, PermRepError> {
        let mut out = Vec::with_capacity(old.size());
        for (i, (c, m)) in old.components.iter().enumerate() {
            let j = self
                .components
                .iter()
                .position(|(d, n)| d == c && n >= m)
                .ok_or(PermRepError::WindowMismatch { left: old.size(), right: self.size() })?;
            let base = old.offsets()[i];
            for x in base..base + c.size() * m {
                let a = old.address(x)?;
                out.push(self.label(PointAddress { component: j, ..a }));
            }
        }
        Ok(out)
    }

    /// `{length: count}` for the cycles of generator `g`; only for
    /// representations whose orbits are all finite.
    pub fn cycle_type(&self, g: usize) -> Result<BTreeMap<usize, usize>, PermRepError> {
        let mut out = BTreeMap::new();
        for (c, m) in &self.components {
            let Component::Finite(t) = c else {
                return Err(PermRepError::WindowExhausted { point: self.size() });
            };
            for (len, count) in cycle_type_of(&t.permutation(g).into_iter().map(Some).collect::<Vec<_>>())? {
                *out.entry(len).or_insert(0) += count * m;
            }
        }
        Ok(out)
    }

    /// The window as an explicit partial action.
    pub fn window(&self) -> WindowAction {
        let cols = self.presentation.alphabet().columns();
        let n = self.size();
        let mut data = vec![UNDEF; n * cols];
        for x in 0..n {
            for col in 0..cols {
                if let Ok(y) = self.image(Letter::from_column(col), x) {
                    data[x * cols + col] = y as u32;
                }
            }
        }
        WindowAction { presentation: self.presentation.clone(), cols, data }
    }

    /// `α ∘ φ ∘ α^-1` on the materialised window.
    pub fn conjugate_rep(&self, alpha: &[usize]) -> Result<WindowAction, PermRepError> {
        self.window().conjugate(alpha)
    }

    pub fn to_json(&self) -> Value {
        let components: Vec<Value> = self
            .components
            .iter()
            .map(|(c, m)| match c {
                Component::Finite(t) => json!({"kind": "finite", "multiplicity": m, "index": t.index(), "table": t.rows()}),
                Component::Lazy(o) => json!({
                    "kind": "lazy",
                    "multiplicity": m,
                    "radius": o.radius,
                    "window": o.size(),
                    "subgroup": o.handle.to_json(),
                }),
            })
            .collect();
        json!({
            "presentation": self.presentation.to_string(),
            "size": self.size(),
            "components": components,
            "window": self.window().to_json()["window"].clone(),
        })
    }

    pub fn to_dot(&self) -> String {
        self.window().to_dot()
    }
}

impl Action for PermRep {
    fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    fn size(&self) -> usize {
        *self.offsets().last().expect("offsets start with 0")
    }

    fn image(&self, letter: Letter, x: usize) -> Result<usize, PermRepError> {
        self.apply(&Word::letter(letter), x)
    }

    fn apply(&self, w: &Word, x: usize) -> Result<usize, PermRepError> {
        self.check_word(w)?;
        let a = self.address(x)?;
        let local = self.components[a.component].0.apply_local(w, a.local).ok_or(PermRepError::WindowExhausted { point: x })?;
        Ok(self.label(PointAddress { local, ..a }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubgroupClass {
    /// Finite index in its normalizer.
    Delta,
    /// Infinite index in its normalizer.
    Sigma,
}

/// `O(ρ, T, A)`: actions agreeing with `ρ` on `t · a` for `t ∈ T`, `a ∈ A`.
#[derive(Debug, Clone)]
pub struct BasicOpen<R: Action = PermRep> {
    pub base: R,
    pub t: Vec<Word>,
    pub a: Vec<usize>,
}

impl<R: Action> BasicOpen<R> {
    pub fn new(base: R, t: Vec<Word>, a: Vec<usize>) -> Result<BasicOpen<R>, PermRepError> {
        for w in &t {
            base.check_word(w)?;
        }
        for &x in &a {
            base.check_point(x)?;
        }
        Ok(BasicOpen { base, t, a })
    }
}

pub fn in_basic_open<C: Action, R: Action>(candidate: &C, o: &BasicOpen<R>) -> Result<bool, PermRepError> {
    if candidate.presentation() != o.base.presentation() {
        return Err(PermRepError::AlphabetMismatch);
    }
    for t in &o.t {
        for &a in &o.a {
            if candidate.apply(t, a)? != o.base.apply(t, a)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// An explicit partial action on `0..n`: one partial injection per column,
/// with `x·col = y` iff `y·(col^1) = x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowAction {
    presentation: Arc<Presentation>,
    cols: usize,
    data: Vec<u32>,
}

fn cycle_type_of(perm: &[Option<usize>]) -> Result<BTreeMap<usize, usize>, PermRepError> {
    let mut seen = vec![false; perm.len()];
    let mut out = BTreeMap::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            len += 1;
            x = perm[x].ok_or(PermRepError::WindowExhausted { point: x })?;
        }
        *out.entry(len).or_insert(0) += 1;
    }
    Ok(out)
}

impl WindowAction {
    /// A complete action from one permutation per generator; relators are
    /// checked at every point.
    pub fn from_permutations(presentation: Arc<Presentation>, perms: &[Vec<usize>]) -> Result<WindowAction, PermRepError> {
        let gens = presentation.generator_count();
        if perms.len() != gens {
            return Err(PermRepError::NotABijection(format!("{} permutations for {gens} generators", perms.len())));
        }
        let n = perms.first().map_or(0, Vec::len);
        let cols = 2 * gens;
        let mut data = vec![UNDEF; n * cols];
        for (g, perm) in perms.iter().enumerate() {
            if perm.len() != n {
                return Err(PermRepError::WindowMismatch { left: n, right: perm.len() });
            }
            for (x, &y) in perm.iter().enumerate() {
                if y >= n || data[y * cols + 2 * g + 1] != UNDEF {
                    return Err(PermRepError::NotABijection(format!("generator {g} at point {x}")));
                }
                data[x * cols + 2 * g] = y as u32;
                data[y * cols + 2 * g + 1] = x as u32;
            }
        }
        let w = WindowAction { presentation, cols, data };
        w.check_relators()?;
        Ok(w)
    }

    /// A partial action: `maps[g][x]` is the image of `x` under generator
    /// `g`, or `None` where the window is truncated.
    pub fn from_partial_permutations(
        presentation: Arc<Presentation>,
        maps: &[Vec<Option<usize>>],
    ) -> Result<WindowAction, PermRepError> {
        let gens = presentation.generator_count();
        if maps.len() != gens {
            return Err(PermRepError::NotABijection(format!("{} maps for {gens} generators", maps.len())));
        }
        let n = maps.first().map_or(0, Vec::len);
        let mut w = WindowAction { presentation, cols: 2 * gens, data: vec![UNDEF; n * 2 * gens] };
        for (g, map) in maps.iter().enumerate() {
            w = w.with_generator(g, map)?;
        }
        Ok(w)
    }

    fn check_relators(&self) -> Result<(), PermRepError> {
        for r in self.presentation.relators() {
            for x in 0..self.size() {
                if let Ok(y) = self.apply(r, x) {
                    if y != x {
                        return Err(PermRepError::RelatorViolated(self.presentation.word_text(r)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Image of every point under generator `g`, `None` outside the window.
    pub fn permutation(&self, g: usize) -> Vec<Option<usize>> {
        (0..self.size()).map(|x| self.get(x, 2 * g)).collect()
    }

    #[inline]
    fn get(&self, x: usize, col: usize) -> Option<usize> {
        let y = self.data[x * self.cols + col];
        (y != UNDEF).then_some(y as usize)
    }

    /// Replaces the images of generator `g` by `perm` (which must be a
    /// partial injection on the window).
    pub fn with_generator(&self, g: usize, perm: &[Option<usize>]) -> Result<WindowAction, PermRepError> {
        let n = self.size();
        if perm.len() != n {
            return Err(PermRepError::WindowMismatch { left: n, right: perm.len() });
        }
        let mut data = self.data.clone();
        for x in 0..n {
            data[x * self.cols + 2 * g] = UNDEF;
            data[x * self.cols + 2 * g + 1] = UNDEF;
        }
        for (x, y) in perm.iter().enumerate() {
            if let Some(y) = *y {
                if y >= n || data[y * self.cols + 2 * g + 1] != UNDEF {
                    return Err(PermRepError::NotABijection(format!("generator {g} at point {x}")));
                }
                data[x * self.cols + 2 * g] = y as u32;
                data[y * self.cols + 2 * g + 1] = x as u32;
            }
        }
        let w = WindowAction { presentation: self.presentation.clone(), cols: self.cols, data };
        w.check_relators()?;
        Ok(w)
    }

    pub fn is_complete(&self) -> bool {
        self.data.iter().all(|&d| d != UNDEF)
    }

    pub fn cycle_type(&self, g: usize) -> Result<BTreeMap<usize, usize>, PermRepError> {
        cycle_type_of(&self.permutation(g))
    }

    /// `α ∘ φ ∘ α^-1`.
    pub fn conjugate(&self, alpha: &[usize]) -> Result<WindowAction, PermRepError> {
        let n = self.size();
        if alpha.len() != n {
            return Err(PermRepError::NotABijection(format!("{} images for {n} points", alpha.len())));
        }
        let mut hit = vec![false; n];
        for &y in alpha {
            if y >= n || std::mem::replace(&mut hit[y], true) {
                return Err(PermRepError::NotABijection(format!("image {y} repeated or out of range")));
            }
        }
        let mut data = vec![UNDEF; n * self.cols];
        for x in 0..n {
            for col in 0..self.cols {
                if let Some(y) = self.get(x, col) {
                    data[alpha[x] * self.cols + col] = alpha[y] as u32;
                }
            }
        }
        Ok(WindowAction { presentation: self.presentation.clone(), cols: self.cols, data })
    }

    /// Stabilizer of `x`, read off its orbit, which must be closed.
    pub fn stabilizer(&self, x: usize) -> Result<SubgroupHandle, PermRepError> {
        let (orbit, closed) = self.orbit(x)?;
        if !closed {
            return Err(PermRepError::WindowExhausted { point: x });
        }
        let position: HashMap<usize, usize> = orbit.iter().enumerate().map(|(i, &y)| (y, i)).collect();
        let rows: Vec<Vec<usize>> =
            orbit.iter().map(|&y| (0..self.cols).map(|col| position[&self.get(y, col).expect("closed orbit")]).collect()).collect();
        Ok(CosetTable::from_rows(self.presentation.clone(), &rows)?.into())
    }

    pub fn to_json(&self) -> Value {
        let alphabet = self.presentation.alphabet();
        let window: serde_json::Map<String, Value> =
            (0..alphabet.len()).map(|g| (alphabet.name(g).to_string(), json!(self.permutation(g)))).collect();
        json!({"presentation": self.presentation.to_string(), "size": self.size(), "window": window})
    }

    pub fn to_dot(&self) -> String {
        let alphabet = self.presentation.alphabet();
        let mut out = String::from("digraph action {\n  node [shape=circle];\n");
        for x in 0..self.size() {
            let _ = writeln!(out, "  {x};");
        }
        for x in 0..self.size() {
            for g in 0..alphabet.len() {
                if let Some(y) = self.get(x, 2 * g) {
                    let _ = writeln!(out, "  {x} -> {y} [label=\"{}\"];", alphabet.name(g));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

impl Action for WindowAction {
    fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    fn size(&self) -> usize {
        self.data.len() / self.cols.max(1)
    }

    fn image(&self, letter: Letter, x: usize) -> Result<usize, PermRepError> {
        self.check_point(x)?;
        if letter.column() >= self.cols {
            return Err(PermRepError::AlphabetMismatch);
        }
        self.get(x, letter.column()).ok_or(PermRepError::WindowExhausted { point: x })
    }
}

/// The action of `G * K` in which `G`-letters act by `phi` and
/// `K`-letters by `psi`, with `psi`'s point `y` identified with
/// `phi`'s point `align[y]`.
pub fn free_product_rep<A: Action, B: Action>(phi: &A, psi: &B, align: &[usize]) -> Result<WindowAction, PermRepError> {
    let n = phi.size();
    if psi.size() != n || align.len() != n {
        return Err(PermRepError::WindowMismatch { left: n, right: psi.size() });
    }
    let mut hit = vec![false; n];
    for &y in align {
        if y >= n || std::mem::replace(&mut hit[y], true) {
            return Err(PermRepError::NotABijection(format!("alignment image {y}")));
        }
    }
    let (presentation, offset) = phi.presentation().free_product(psi.presentation());
    let (gcols, kcols) = (2 * offset, psi.presentation().alphabet().columns());
    let cols = gcols + kcols;
    let mut data = vec![UNDEF; n * cols];
    for x in 0..n {
        for col in 0..gcols {
            if let Ok(y) = phi.image(Letter::from_column(col), x) {
                data[x * cols + col] = y as u32;
            }
        }
    }
    for y in 0..n {
        for col in 0..kcols {
            if let Ok(z) = psi.image(Letter::from_column(col), y) {
                data[align[y] * cols + gcols + col] = align[z] as u32;
            }
        }
    }
    Ok(WindowAction { presentation: Arc::new(presentation), cols, data })
}
