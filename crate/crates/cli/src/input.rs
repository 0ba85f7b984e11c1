//! Parsing of command-line values into library objects.

use std::path::Path;
use std::sync::Arc;

use clap::Args;
use serde_json::Value;
use subgroups::chabauty::SubgroupHandle;
use subgroups::permrep::{Action, PermRep, WindowAction};
use subgroups::{CosetTable, Presentation, Word};

use crate::config::RunConfig;
use crate::report::{DomainError, Failure};

pub fn group(text: &str) -> Result<Arc<Presentation>, Failure> {
    Ok(Arc::new(text.parse::<Presentation>().map_err(DomainError::from)?))
}

pub fn words(p: &Presentation, text: &str) -> Result<Vec<Word>, Failure> {
    Ok(p.parse_words(text).map_err(DomainError::from)?)
}

pub fn word(p: &Presentation, text: &str) -> Result<Word, Failure> {
    Ok(p.parse_word(text).map_err(DomainError::from)?)
}

pub fn points(text: &str) -> Result<Vec<usize>, Failure> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Usage(format!("`{s}` is not a point"))))
        .collect()
}

pub fn handle(p: &Arc<Presentation>, gens: &str, config: &RunConfig) -> Result<SubgroupHandle, Failure> {
    let gens = words(p, gens)?;
    Ok(SubgroupHandle::from_generators(p, &gens, config.max_cosets).map_err(DomainError::from)?)
}

/// `a=1 2 0; b=0 _ 1`: images of `0, 1, ...` per generator, `_` where
/// undefined. Every generator must be listed.
pub fn perms(p: &Arc<Presentation>, text: &str) -> Result<WindowAction, Failure> {
    let alphabet = p.alphabet();
    let mut maps: Vec<Option<Vec<Option<usize>>>> = vec![None; alphabet.len()];
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((name, images)) = part.split_once('=') else {
            return Err(Failure::Usage(format!("expected `generator=images` in `{part}`")));
        };
        let g = alphabet
            .index_of(name.trim())
            .ok_or_else(|| Failure::Usage(format!("unknown generator `{}` in --perms", name.trim())))?;
        let map = images
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "_" => Ok(None),
                _ => s.parse().map(Some).map_err(|_| Failure::Usage(format!("`{s}` is not a point"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        maps[g] = Some(map);
    }
    let maps: Vec<Vec<Option<usize>>> = maps
        .into_iter()
        .enumerate()
        .map(|(g, m)| m.ok_or_else(|| Failure::Usage(format!("--perms does not define `{}`", alphabet.name(g)))))
        .collect::<Result<_, _>>()?;
    Ok(WindowAction::from_partial_permutations(p.clone(), &maps).map_err(DomainError::from)?)
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn invalid(what: &str) -> Failure {
    Failure::Domain(DomainError::new("cosets", "InvalidTable", format!("JSON: {what}")))
}

/// A window in the JSON layout written by the `window`-bearing commands.
pub fn window_from_json(value: &Value) -> Result<WindowAction, Failure> {
    let p = group(value.get("presentation").and_then(Value::as_str).ok_or_else(|| invalid("missing presentation"))?)?;
    let window = value.get("window").and_then(Value::as_object).ok_or_else(|| invalid("missing window"))?;
    let alphabet = p.alphabet();
    let maps = (0..alphabet.len())
        .map(|g| {
            let images = window.get(alphabet.name(g)).and_then(Value::as_array).ok_or_else(|| invalid("missing generator"))?;
            images
                .iter()
                .map(|v| match v {
                    Value::Null => Ok(None),
                    _ => v.as_u64().map(|d| Some(d as usize)).ok_or_else(|| invalid("entry is not a point")),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WindowAction::from_partial_permutations(p, &maps).map_err(DomainError::from)?)
}

/// A coset table or a window, possibly wrapped as `{"subgroup": ...}`.
pub enum Loaded {
    Table(CosetTable),
    Window(WindowAction),
}

pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let mut value = read_json(path)?;
    if let Some(inner) = value.get("subgroup").cloned() {
        value = inner;
    }
    if value.get("window").is_some() {
        return Ok(Loaded::Window(window_from_json(&value)?));
    }
    if value.get("complete").is_some() {
        return Err(invalid("core graphs cannot be loaded; use `fold` to rebuild them"));
    }
    Ok(Loaded::Table(CosetTable::from_json(&value).map_err(DomainError::from)?))
}

/// Where an action comes from. Exactly one source must be given.
#[derive(Debug, Clone, Args)]
pub struct ActionArgs {
    /// Group presentation, e.g. "<a,b|>"
    #[arg(long)]
    pub group: Option<String>,
    /// Explicit generator images, e.g. "a=1 2 0; b=0 2 1" (`_` = undefined)
    #[arg(long, requires = "group", conflicts_with_all = ["action_file", "quasiregular", "tau_star"])]
    pub perms: Option<String>,
    /// JSON file holding a window (output of `quasiregular`, `tau-star`, ...)
    #[arg(long, conflicts_with_all = ["quasiregular", "tau_star"])]
    pub action_file: Option<std::path::PathBuf>,
    /// Quasiregular action on the cosets of the subgroup with these generators
    #[arg(long, requires = "group", conflicts_with = "tau_star")]
    pub quasiregular: Option<String>,
    /// The truncated tau-star representation (uses --max-index and --copies)
    #[arg(long, requires = "group")]
    pub tau_star: bool,
}

/// A concrete action: a structured representation or a bare window.
pub enum Source {
    Rep(PermRep),
    Window(WindowAction),
}

impl ActionArgs {
    pub fn resolve(&self, config: &RunConfig) -> Result<Source, Failure> {
        if let Some(path) = &self.action_file {
            let value = read_json(path)?;
            return Ok(Source::Window(window_from_json(&value)?));
        }
        let Some(text) = &self.group else {
            return Err(Failure::Usage("an action needs --group with --perms, --quasiregular or --tau-star, or --action-file".into()));
        };
        let p = group(text)?;
        if let Some(spec) = &self.perms {
            return Ok(Source::Window(perms(&p, spec)?));
        }
        if let Some(gens) = &self.quasiregular {
            let h = handle(&p, gens, config)?;
            return Ok(Source::Rep(PermRep::quasiregular_with_radius(&h, config.radius)));
        }
        if self.tau_star {
            let r = PermRep::tau_star_lerf(&p, config.max_index, config.copies).map_err(DomainError::from)?;
            return Ok(Source::Rep(r));
        }
        Err(Failure::Usage("an action needs one of --perms, --quasiregular, --tau-star or --action-file".into()))
    }
}

impl Source {
    pub fn presentation(&self) -> &Arc<Presentation> {
        match self {
            Source::Rep(r) => r.presentation(),
            Source::Window(w) => w.presentation(),
        }
    }

    pub fn window(&self) -> WindowAction {
        match self {
            Source::Rep(r) => r.window(),
            Source::Window(w) => w.clone(),
        }
    }

    pub fn stabilizer(&self, x: usize) -> Result<SubgroupHandle, Failure> {
        Ok(match self {
            Source::Rep(r) => r.stabilizer(x),
            Source::Window(w) => w.stabilizer(x),
        }
        .map_err(DomainError::from)?)
    }

    /// The point named by `--point`, or by `--coset u` (the coset `uH` of
    /// the first orbit) for structured representations.
    pub fn point(&self, point: Option<usize>, coset: Option<&str>) -> Result<usize, Failure> {
        match (point, coset, self) {
            (Some(_), Some(_), _) => Err(Failure::Usage("give --point or --coset, not both".into())),
            (_, Some(text), Source::Rep(r)) => {
                let u = word(r.presentation(), text)?;
                Ok(r.locate(0, 0, &u).map_err(DomainError::from)?)
            }
            (_, Some(_), Source::Window(_)) => Err(Failure::Usage("--coset needs --quasiregular or --tau-star".into())),
            (x, None, _) => {
                let x = x.unwrap_or(0);
                match self {
                    Source::Rep(r) => r.check_point(x),
                    Source::Window(w) => w.check_point(x),
                }
                .map_err(DomainError::from)?;
                Ok(x)
            }
        }
    }
}
