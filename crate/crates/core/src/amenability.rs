//! Følner sets of actions, in exact rational arithmetic.
//!
//! `F` is an `(ε, Ω)`-Følner set when `|wF Δ F| / |F| < ε` for every
//! `w ∈ Ω`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde_json::{json, Value};
use thiserror::Error;

use crate::chabauty::SubgroupHandle;
use crate::cosets::{low_index_with, CosetError, CosetTable, LowIndexOptions};
use crate::permrep::{free_product_rep, Action, PermRep, PermRepError, WindowAction};
use crate::words::{Letter, Presentation, Word};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmenabilityError {
    #[error("the candidate set is empty")]
    EmptySet,
    #[error("point {point} leaves the materialised window")]
    WindowExhausted { point: usize },
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("`{0}` is not a rational of the form p/q")]
    InvalidRational(String),
    #[error("needed {needed} points fixed by the first action, found {available}")]
    InsufficientFixedPoints { needed: usize, available: usize },
    #[error("no Følner set of the required size in the chosen orbit")]
    NoFolnerInOrbit,
    #[error(transparent)]
    PermRep(PermRepError),
    #[error(transparent)]
    Cosets(#[from] CosetError),
}

impl From<PermRepError> for AmenabilityError {
    fn from(e: PermRepError) -> Self {
        match e {
            PermRepError::WindowExhausted { point } => AmenabilityError::WindowExhausted { point },
            other => AmenabilityError::PermRep(other),
        }
    }
}

/// `p/q`, always with the slash.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(text: &str) -> Result<Rational, AmenabilityError> {
    let bad = || AmenabilityError::InvalidRational(text.to_string());
    let (p, q) = text.trim().split_once('/').ok_or_else(bad)?;
    let p: i64 = p.trim().parse().map_err(|_| bad())?;
    let q: i64 = q.trim().parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerReport {
    pub f: Vec<usize>,
    pub omega: Vec<Word>,
    pub ratios: Vec<Rational>,
    pub max_ratio: Rational,
    pub epsilon: Rational,
    pub pass: bool,
}

impl FolnerReport {
    pub fn to_json(&self, presentation: &Presentation) -> Value {
        let ratios: serde_json::Map<String, Value> = self
            .omega
            .iter()
            .zip(&self.ratios)
            .map(|(w, r)| (presentation.word_text(w), json!(format_ratio(r))))
            .collect();
        json!({
            "F": self.f,
            "ratios": ratios,
            "max_ratio": format_ratio(&self.max_ratio),
            "epsilon": format_ratio(&self.epsilon),
            "pass": self.pass,
        })
    }
}

/// Exact ratios `|wF Δ F| / |F|` and the verdict `max < ε`.
pub fn folner_check<A: Action>(r: &A, f: &[usize], omega: &[Word], epsilon: Rational) -> Result<FolnerReport, AmenabilityError> {
    let set: BTreeSet<usize> = f.iter().copied().collect();
    if set.is_empty() {
        return Err(AmenabilityError::EmptySet);
    }
    for &x in &set {
        r.check_point(x)?;
    }
    let mut omega_set = BTreeSet::new();
    let omega: Vec<Word> = omega.iter().filter(|w| omega_set.insert((*w).clone())).cloned().collect();
    let mut ratios = Vec::with_capacity(omega.len());
    for w in &omega {
        r.check_word(w)?;
        let image: BTreeSet<usize> = set.iter().map(|&x| r.apply(w, x)).collect::<Result<_, _>>()?;
        let delta = image.symmetric_difference(&set).count();
        ratios.push(Rational::new(delta as i64, set.len() as i64));
    }
    let max_ratio = ratios.iter().copied().max().unwrap_or_else(|| Rational::from_integer(0));
    Ok(FolnerReport { f: set.into_iter().collect(), omega, ratios, max_ratio, epsilon, pass: max_ratio < epsilon })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolnerSearch {
    Found(FolnerReport),
    /// The strategy found nothing with at most this many points. Not a
    /// proof that no Følner set exists.
    NotFoundUpTo(usize),
}

impl FolnerSearch {
    pub fn to_json(&self, presentation: &Presentation) -> Value {
        match self {
            FolnerSearch::Found(report) => json!({"status": "found", "report": report.to_json(presentation)}),
            FolnerSearch::NotFoundUpTo(n) => json!({"status": "not_found_up_to", "max_size": n}),
        }
    }
}

/// Images of the `Ω` words, computed on demand.
struct ImageCache<'a, A: Action> {
    action: &'a A,
    omega: &'a [Word],
    images: HashMap<(usize, usize), Option<usize>>,
}

impl<A: Action> ImageCache<'_, A> {
    fn image(&mut self, w: usize, x: usize) -> Option<usize> {
        let (action, word) = (self.action, &self.omega[w]);
        *self.images.entry((w, x)).or_insert_with(|| action.apply(word, x).ok())
    }

    /// `(max ratio, sum of ratios)`, or `None` if some image leaves the
    /// window.
    fn score(&mut self, f: &BTreeSet<usize>) -> Option<(Rational, Rational)> {
        let mut max = Rational::from_integer(0);
        let mut sum = Rational::from_integer(0);
        for w in 0..self.omega.len() {
            let mut image = HashSet::with_capacity(f.len());
            for &x in f {
                image.insert(self.image(w, x)?);
            }
            let outside = image.iter().filter(|y| !f.contains(y)).count();
            let r = Rational::new(2 * outside as i64, f.len() as i64);
            max = max.max(r);
            sum += r;
        }
        Some((max, sum))
    }
}

/// Searches the orbit of `x` for an `(ε, Ω)`-Følner set of at most
/// `max_size` points. In order: the whole orbit if it is closed and small
/// enough, then breadth-first balls around `x` of every size, then
/// hill-climbing from the best ball by adding or removing single points.
pub fn folner_search<A: Action>(
    r: &A,
    x: usize,
    omega: &[Word],
    epsilon: Rational,
    max_size: usize,
) -> Result<FolnerSearch, AmenabilityError> {
    if epsilon <= Rational::from_integer(0) {
        return Err(AmenabilityError::InvalidEpsilon);
    }
    for w in omega {
        r.check_word(w)?;
    }
    let (orbit, closed) = r.orbit(x)?;
    if closed && orbit.len() <= max_size {
        return Ok(FolnerSearch::Found(folner_check(r, &orbit, omega, epsilon)?));
    }
    let mut cache = ImageCache { action: r, omega, images: HashMap::new() };
    let mut best: Option<(BTreeSet<usize>, (Rational, Rational))> = None;
    let mut ball = BTreeSet::new();
    for &y in orbit.iter().take(max_size) {
        ball.insert(y);
        let Some(score) = cache.score(&ball) else {
            if best.is_none() {
                return Err(AmenabilityError::WindowExhausted { point: y });
            }
            break;
        };
        if score.0 < epsilon {
            return Ok(FolnerSearch::Found(folner_check(r, &ball.iter().copied().collect::<Vec<_>>(), omega, epsilon)?));
        }
        if best.as_ref().is_none_or(|(_, s)| score < *s) {
            best = Some((ball.clone(), score));
        }
    }
    let Some((mut current, mut score)) = best else {
        return Ok(FolnerSearch::NotFoundUpTo(max_size));
    };
    let cols = r.presentation().alphabet().columns();
    for _ in 0..4 * max_size {
        let mut moves: Vec<BTreeSet<usize>> = Vec::new();
        if current.len() > 1 {
            for &y in &current {
                let mut smaller = current.clone();
                smaller.remove(&y);
                moves.push(smaller);
            }
        }
        if current.len() < max_size {
            let mut boundary = BTreeSet::new();
            for &y in &current {
                for col in 0..cols {
                    if let Ok(z) = r.image(Letter::from_column(col), y) {
                        if !current.contains(&z) {
                            boundary.insert(z);
                        }
                    }
                }
            }
            for z in boundary {
                let mut larger = current.clone();
                larger.insert(z);
                moves.push(larger);
            }
        }
        let mut step: Option<(BTreeSet<usize>, (Rational, Rational))> = None;
        for m in moves {
            if let Some(s) = cache.score(&m) {
                if s < score && step.as_ref().is_none_or(|(_, t)| s < *t) {
                    step = Some((m, s));
                }
            }
        }
        let Some((next, s)) = step else { break };
        current = next;
        score = s;
        if score.0 < epsilon {
            return Ok(FolnerSearch::Found(folner_check(r, &current.iter().copied().collect::<Vec<_>>(), omega, epsilon)?));
        }
    }
    Ok(FolnerSearch::NotFoundUpTo(max_size))
}

/// Følner search in `G/H` from the basepoint; finite index short-circuits
/// to the whole orbit.
pub fn coamenable_probe(
    h: &SubgroupHandle,
    omega: &[Word],
    epsilon: Rational,
    max_size: usize,
    radius: usize,
) -> Result<FolnerSearch, AmenabilityError> {
    if epsilon <= Rational::from_integer(0) {
        return Err(AmenabilityError::InvalidEpsilon);
    }
    let r = PermRep::quasiregular_with_radius(h, radius);
    if h.table().is_some() {
        let all: Vec<usize> = (0..r.size()).collect();
        return Ok(FolnerSearch::Found(folner_check(&r, &all, omega, epsilon)?));
    }
    folner_search(&r, 0, omega, epsilon, max_size)
}

/// `<s, t | t^-1 s t = s^n>`.
pub fn baumslag_solitar(n: u64) -> Arc<Presentation> {
    let text = format!("<s,t| t^-1 s t = s^{n}>");
    Arc::new(text.parse().expect("well-formed presentation"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsQuotient {
    pub index: usize,
    pub order_of_s: u64,
    pub quotient_order: u64,
    pub coprime: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsReport {
    pub n: u64,
    pub quotients: Vec<BsQuotient>,
    /// Some quotient maps `s` nontrivially.
    pub nonvacuous: bool,
}

impl BsReport {
    pub fn passed(&self) -> bool {
        self.quotients.iter().all(|q| q.coprime)
    }

    pub fn to_json(&self) -> Value {
        let quotients: Vec<Value> = self
            .quotients
            .iter()
            .map(|q| json!({"index": q.index, "order_of_s": q.order_of_s, "quotient_order": q.quotient_order, "coprime": q.coprime}))
            .collect();
        json!({
            "n": self.n,
            "status": if self.passed() { "pass" } else { "fail" },
            "nonvacuous": self.nonvacuous,
            "quotients": quotients,
        })
    }
}

fn permutation_order(perm: &[usize]) -> u64 {
    let mut seen = vec![false; perm.len()];
    let mut order = 1u64;
    for start in 0..perm.len() {
        let mut len = 0u64;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            len += 1;
            x = perm[x];
        }
        if len > 0 {
            order = order.lcm(&len);
        }
    }
    order
}

/// Order of the permutation group generated by `gens`, by closure.
fn group_order(gens: &[Vec<usize>]) -> u64 {
    let n = gens.first().map_or(0, Vec::len);
    let identity: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q: Vec<usize> = p.iter().map(|&i| g[i]).collect();
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen.len() as u64
}

/// Checks, in every finite quotient given by a coset action, that the image
/// of `s` has order prime to `n`.
pub fn bs_probe_tables(n: u64, tables: &[CosetTable]) -> BsReport {
    let quotients: Vec<BsQuotient> = tables
        .iter()
        .map(|t| {
            let s = t.permutation(0);
            let order_of_s = permutation_order(&s);
            let gens: Vec<Vec<usize>> = (0..t.presentation().generator_count()).map(|g| t.permutation(g)).collect();
            BsQuotient { index: t.index(), order_of_s, quotient_order: group_order(&gens), coprime: order_of_s.gcd(&n) == 1 }
        })
        .collect();
    let nonvacuous = quotients.iter().any(|q| q.order_of_s > 1);
    BsReport { n, quotients, nonvacuous }
}

pub fn bs_obstruction_probe(n: u64, max_index: usize, options: LowIndexOptions) -> Result<BsReport, AmenabilityError> {
    let tables = low_index_with(&baumslag_solitar(n), max_index, options)?;
    Ok(bs_probe_tables(n, &tables))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeProductCase {
    /// The combined orbit of `x` is finite and closed.
    FiniteOrbit,
    /// A Følner set was found in an infinite orbit of the second action.
    ConjugatedFirst,
    /// A Følner set was found in an infinite orbit of the first action.
    ConjugatedSecond,
}

#[derive(Debug, Clone)]
pub struct FreeProductFolner {
    pub case: FreeProductCase,
    /// The action of `G * K`.
    pub action: WindowAction,
    /// The modified first action `φ'`.
    pub phi: WindowAction,
    /// The modified second action `ψ'`.
    pub psi: WindowAction,
    pub f: Vec<usize>,
    /// `A` together with its images under the anchored words.
    pub b: Vec<usize>,
    /// Points on the path from `x` to the Følner set.
    pub trace: Vec<usize>,
    /// The pairing `ξ` as `(fixed point, Følner point)` swaps.
    pub swaps: Vec<(usize, usize)>,
    pub report: FolnerReport,
}

/// Breadth-first search over both actions from `x`; returns the visit order
/// and the parent of each visited point.
fn joint_bfs(a: &WindowAction, b: &WindowAction, x: usize) -> (Vec<usize>, HashMap<usize, usize>) {
    let mut order = vec![x];
    let mut parent = HashMap::from([(x, x)]);
    let mut head = 0;
    while head < order.len() {
        let p = order[head];
        head += 1;
        for act in [a, b] {
            for col in 0..act.presentation().alphabet().columns() {
                if let Ok(q) = act.image(Letter::from_column(col), p) {
                    if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(q) {
                        e.insert(p);
                        order.push(q);
                    }
                }
            }
        }
    }
    (order, parent)
}

fn is_closed(act: &WindowAction, points: &[usize]) -> bool {
    let cols = act.presentation().alphabet().columns();
    points.iter().all(|&p| (0..cols).all(|col| act.image(Letter::from_column(col), p).is_ok()))
}

/// Builds `φ' * ψ'` and a Følner set for `S ∪ T` in the orbit of `x`.
///
/// If the combined orbit of `x` is closed it is returned whole. Otherwise an
/// `(ε, T)`-Følner set `F` with `|F| > 2(|B| + 1)/ε` is found inside a
/// truncated `τ`-orbit, and `φ' = ξ σ ξ` where the involution `ξ` swaps
/// `F ∖ (B ∪ {y})` with points fixed by `σ`, so that `φ'` fixes nearly all
/// of `F` while agreeing with `σ` on the anchors. If every `τ`-orbit met is
/// closed, the roles of the two actions are exchanged.
#[allow(clippy::too_many_arguments)]
pub fn free_product_folner(
    sigma: &WindowAction,
    tau: &WindowAction,
    x: usize,
    anchors: &[usize],
    s: &[Word],
    t: &[Word],
    epsilon: Rational,
) -> Result<FreeProductFolner, AmenabilityError> {
    if epsilon <= Rational::from_integer(0) {
        return Err(AmenabilityError::InvalidEpsilon);
    }
    if sigma.size() != tau.size() {
        return Err(PermRepError::WindowMismatch { left: sigma.size(), right: tau.size() }.into());
    }
    sigma.check_point(x)?;
    for w in s {
        sigma.check_word(w)?;
    }
    for w in t {
        tau.check_word(w)?;
    }
    let identity: Vec<usize> = (0..sigma.size()).collect();
    let (orbit, _) = joint_bfs(sigma, tau, x);
    if is_closed(sigma, &orbit) && is_closed(tau, &orbit) {
        let action = free_product_rep(sigma, tau, &identity)?;
        let report = folner_check(&action, &orbit, &joint_omega(&action, s, t, sigma), epsilon)?;
        return Ok(FreeProductFolner {
            case: FreeProductCase::FiniteOrbit,
            action,
            phi: sigma.clone(),
            psi: tau.clone(),
            f: report.f.clone(),
            b: anchors.to_vec(),
            trace: vec![x],
            swaps: Vec::new(),
            report,
        });
    }
    let truncated = |act: &WindowAction| orbit.iter().any(|&p| act.orbit(p).map(|(_, closed)| !closed).unwrap_or(false));
    let (case, built) = if truncated(tau) {
        (FreeProductCase::ConjugatedFirst, conjugate_into_folner(sigma, tau, x, anchors, s, t, epsilon)?)
    } else {
        (FreeProductCase::ConjugatedSecond, conjugate_into_folner(tau, sigma, x, anchors, t, s, epsilon)?)
    };
    let (phi, psi) = match case {
        FreeProductCase::ConjugatedFirst => (built.modified, tau.clone()),
        _ => (sigma.clone(), built.modified),
    };
    let action = free_product_rep(&phi, &psi, &identity)?;
    let report = folner_check(&action, &built.f, &joint_omega(&action, s, t, sigma), epsilon)?;
    Ok(FreeProductFolner { case, action, phi, psi, f: built.f, b: built.b, trace: built.trace, swaps: built.swaps, report })
}

/// `S ∪ T` as words over the product alphabet.
fn joint_omega(action: &WindowAction, s: &[Word], t: &[Word], sigma: &WindowAction) -> Vec<Word> {
    let offset = sigma.presentation().generator_count();
    let mut out: Vec<Word> = s.to_vec();
    out.extend(t.iter().map(|w| w.shifted(offset)));
    debug_assert!(out.iter().all(|w| action.check_word(w).is_ok()));
    out
}

struct Conjugated {
    modified: WindowAction,
    f: Vec<usize>,
    b: Vec<usize>,
    trace: Vec<usize>,
    swaps: Vec<(usize, usize)>,
}

/// Conjugates `modify` so that it fixes most of a Følner set for `keep`.
fn conjugate_into_folner(
    modify: &WindowAction,
    keep: &WindowAction,
    x: usize,
    anchors: &[usize],
    anchored: &[Word],
    folner_words: &[Word],
    epsilon: Rational,
) -> Result<Conjugated, AmenabilityError> {
    let (order, parent) = joint_bfs(modify, keep, x);
    let y_orbit = order
        .iter()
        .find_map(|&p| match keep.orbit(p) {
            Ok((points, false)) => Some(points),
            _ => None,
        })
        .ok_or(AmenabilityError::NoFolnerInOrbit)?;

    let mut b: BTreeSet<usize> = BTreeSet::new();
    for &a in anchors {
        modify.check_point(a)?;
        b.insert(a);
        for w in anchored {
            b.insert(modify.apply(w, a)?);
        }
    }
    // |F| > 2(|B| + 1) / ε.
    let bound = Rational::from_integer(2 * (b.len() as i64 + 1)) / epsilon;
    let min_size = (bound.floor().to_integer() + 1) as usize;

    let mut f: Option<Vec<usize>> = None;
    let y_set: HashSet<usize> = y_orbit.iter().copied().collect();
    'centres: for &c in &y_orbit {
        let Ok((ball, _)) = keep.orbit(c) else { continue };
        let ball: Vec<usize> = ball.into_iter().filter(|p| y_set.contains(p)).collect();
        for size in min_size..=ball.len() {
            match folner_check(keep, &ball[..size], folner_words, epsilon) {
                Ok(report) if report.pass => {
                    f = Some(report.f);
                    break 'centres;
                }
                _ => {}
            }
        }
    }
    let f = f.ok_or(AmenabilityError::NoFolnerInOrbit)?;
    let f_set: BTreeSet<usize> = f.iter().copied().collect();

    let y = *order.iter().find(|p| f_set.contains(p)).expect("F lies in the orbit of x");
    let mut trace = vec![y];
    let mut p = y;
    while p != x {
        p = parent[&p];
        trace.push(p);
    }
    trace.reverse();

    let d: Vec<usize> = f.iter().copied().filter(|p| !b.contains(p) && *p != y).collect();
    let cols = modify.presentation().alphabet().columns();
    let excluded: HashSet<usize> = b.iter().chain(&f).chain(&trace).copied().collect();
    let fixed: Vec<usize> = (0..modify.size())
        .filter(|p| !excluded.contains(p))
        .filter(|&p| (0..cols).all(|col| modify.image(Letter::from_column(col), p) == Ok(p)))
        .collect();
    if fixed.len() < d.len() {
        return Err(AmenabilityError::InsufficientFixedPoints { needed: d.len(), available: fixed.len() });
    }
    let mut xi: Vec<usize> = (0..modify.size()).collect();
    let swaps: Vec<(usize, usize)> = fixed.iter().copied().zip(d.iter().copied()).collect();
    for &(c, dd) in &swaps {
        xi[c] = dd;
        xi[dd] = c;
    }
    Ok(Conjugated { modified: modify.conjugate(&xi)?, f, b: b.into_iter().collect(), trace, swaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cosets::todd_coxeter;

    fn pres(s: &str) -> Arc<Presentation> {
        Arc::new(s.parse().unwrap())
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    /// `Z` acting on itself, as a lazy orbit of the trivial subgroup.
    fn z_line(radius: usize) -> PermRep {
        let z = pres("<a|>");
        PermRep::quasiregular_with_radius(&SubgroupHandle::from_generators(&z, &[], 1).unwrap(), radius)
    }

    fn interval(line: &PermRep, from: i64, len: usize) -> Vec<usize> {
        (0..len as i64).map(|i| line.locate(0, 0, &Word::generator(0).pow(from + i)).unwrap()).collect()
    }

    #[test]
    fn ratio_text() {
        assert_eq!(format_ratio(&r(2, 10)), "1/5");
        assert_eq!(format_ratio(&r(0, 3)), "0/1");
        assert_eq!(parse_ratio("1/4").unwrap(), r(1, 4));
        assert!(parse_ratio("0.25").is_err());
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn check_examples() {
        let line = z_line(20);
        let f = interval(&line, -4, 10);
        let report = folner_check(&line, &f, &[Word::generator(0)], r(1, 4)).unwrap();
        assert_eq!(report.ratios, vec![r(2, 10)]);
        assert!(report.pass);

        let z = pres("<a|>");
        let five = PermRep::quasiregular(&todd_coxeter(&z, &[Word::generator(0).pow(5)], 10).unwrap().into());
        let report = folner_check(&five, &[0, 1, 2, 3, 4], &z.parse_words("a, a^2, a^-3").unwrap(), r(1, 100)).unwrap();
        assert!(report.ratios.iter().all(|x| *x == r(0, 1)));

        assert_eq!(folner_check(&line, &[], &[], r(1, 2)), Err(AmenabilityError::EmptySet));
        let edge = interval(&line, 20, 1);
        assert!(matches!(folner_check(&line, &edge, &[Word::generator(0)], r(1, 2)), Err(AmenabilityError::WindowExhausted { .. })));
    }

    #[test]
    fn free_group_ball() {
        let f2 = pres("<a,b|>");
        let rep = PermRep::quasiregular_with_radius(&SubgroupHandle::from_generators(&f2, &[], 1).unwrap(), 3);
        let ball: Vec<usize> = (0..17).collect();
        let report = folner_check(&rep, &ball, &[Word::generator(0)], r(1, 2)).unwrap();
        // Words of length <= 2 whose a-translate has length 3: those not starting with a^-1.
        let ball_words: HashSet<Word> = ball.iter().map(|&x| rep.representative(x).unwrap()).collect();
        let outside = ball_words.iter().filter(|w| !ball_words.contains(&Word::generator(0).multiply(w))).count();
        assert_eq!(report.ratios[0], r(2 * outside as i64, 17));
        assert!(!report.pass);
    }

    #[test]
    fn search_examples() {
        let line = z_line(20);
        let FolnerSearch::Found(report) = folner_search(&line, 0, &[Word::generator(0)], r(1, 2), 50).unwrap() else {
            panic!("expected a Følner interval");
        };
        assert_eq!(report.f.len(), 5);
        assert_eq!(report.max_ratio, r(2, 5));

        let z = pres("<a|>");
        let seven = PermRep::quasiregular(&todd_coxeter(&z, &[Word::generator(0).pow(7)], 10).unwrap().into());
        let FolnerSearch::Found(report) = folner_search(&seven, 3, &[Word::generator(0)], r(1, 1000), 10).unwrap() else {
            panic!("finite orbit");
        };
        assert_eq!(report.f, (0..7).collect::<Vec<_>>());

        let f2 = pres("<a,b|>");
        let tree = PermRep::quasiregular_with_radius(&SubgroupHandle::from_generators(&f2, &[], 1).unwrap(), 6);
        let omega = f2.parse_words("a, b").unwrap();
        assert_eq!(folner_search(&tree, 0, &omega, r(1, 10), 50).unwrap(), FolnerSearch::NotFoundUpTo(50));
        assert_eq!(folner_search(&tree, 0, &omega, r(0, 1), 50), Err(AmenabilityError::InvalidEpsilon));
    }

    #[test]
    fn coamenable_examples() {
        let z = pres("<a|>");
        for n in 1..5 {
            let h = SubgroupHandle::from_generators(&z, &[Word::generator(0).pow(n)], 10).unwrap();
            assert!(matches!(coamenable_probe(&h, &[Word::generator(0)], r(1, 10), 5, 6).unwrap(), FolnerSearch::Found(_)));
        }
        let f2 = pres("<a,b|>");
        let trivial = SubgroupHandle::from_generators(&f2, &[], 1).unwrap();
        let omega = f2.parse_words("a, b").unwrap();
        assert!(matches!(coamenable_probe(&trivial, &omega, r(1, 10), 30, 5).unwrap(), FolnerSearch::NotFoundUpTo(30)));
    }

    #[test]
    fn bs_examples() {
        let report = bs_obstruction_probe(2, 7, LowIndexOptions::default()).unwrap();
        assert!(report.passed());
        assert!(report.nonvacuous);
        assert!(report.quotients.iter().all(|q| q.order_of_s % 2 == 1));
        assert!(report.quotients.iter().any(|q| q.quotient_order == 6 && q.order_of_s == 3));

        let trivial = bs_obstruction_probe(2, 1, LowIndexOptions::default()).unwrap();
        assert!(trivial.passed());
        assert!(!trivial.nonvacuous);

        // s ↦ (0 1), t ↦ identity does not satisfy the relator; the probe
        // must notice the even order.
        let free = pres("<s,t|>");
        let corrupted = CosetTable::from_rows(free, &[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap();
        let report = bs_probe_tables(2, &[corrupted]);
        assert!(!report.passed());
        assert_eq!(report.to_json()["status"], "fail");
    }

    fn path_window(n: usize, name: &str) -> WindowAction {
        let p = pres(&format!("<{name}|>"));
        let map: Vec<Option<usize>> = (0..n).map(|i| (i + 1 < n).then_some(i + 1)).collect();
        WindowAction::from_partial_permutations(p, &[map]).unwrap()
    }

    /// `s` swaps `2i` and `2i + 1` below `moved`, fixes the rest.
    fn mostly_fixed(n: usize, moved: usize) -> WindowAction {
        let p = pres("<s|>");
        let perm: Vec<usize> = (0..n).map(|i| if i < moved { i ^ 1 } else { i }).collect();
        WindowAction::from_permutations(p, &[perm]).unwrap()
    }

    #[test]
    fn free_product_case_two() {
        let sigma = mostly_fixed(200, 10);
        let tau = path_window(200, "t");
        let s = vec![Word::generator(0)];
        let t = vec![Word::generator(0)];
        let out = free_product_folner(&sigma, &tau, 0, &[0, 3], &s, &t, r(1, 4)).unwrap();
        assert_eq!(out.case, FreeProductCase::ConjugatedFirst);
        assert!(out.report.pass);
        assert!(out.f.len() as i64 > 2 * (out.b.len() as i64 + 1) * 4);
        let (orbit, _) = out.action.orbit(0).unwrap();
        assert!(out.f.iter().all(|p| orbit.contains(p)));
        for &a in &[0, 3] {
            assert_eq!(out.phi.apply(&s[0], a).unwrap(), sigma.apply(&s[0], a).unwrap());
        }
    }

    #[test]
    fn free_product_case_one() {
        let sigma = WindowAction::from_permutations(pres("<s|>"), &[vec![1, 0, 2, 3]]).unwrap();
        let tau = WindowAction::from_permutations(pres("<t|>"), &[vec![0, 2, 1, 3]]).unwrap();
        let out = free_product_folner(&sigma, &tau, 0, &[0], &[Word::generator(0)], &[Word::generator(0)], r(1, 8)).unwrap();
        assert_eq!(out.case, FreeProductCase::FiniteOrbit);
        assert_eq!(out.f, vec![0, 1, 2]);
        assert_eq!(out.report.max_ratio, r(0, 1));
    }

    #[test]
    fn free_product_errors() {
        let sigma = mostly_fixed(40, 10);
        let tau = path_window(40, "t");
        let s = vec![Word::generator(0)];
        assert_eq!(
            free_product_folner(&sigma, &tau, 0, &[0, 3], &s, &s, r(1, 8)).unwrap_err(),
            AmenabilityError::NoFolnerInOrbit
        );
        let crowded = mostly_fixed(60, 54);
        let tau = path_window(60, "t");
        assert!(matches!(
            free_product_folner(&crowded, &tau, 0, &[0], &s, &s, r(1, 2)),
            Err(AmenabilityError::InsufficientFixedPoints { .. })
        ));
    }
}
