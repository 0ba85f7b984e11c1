//! `subgroups`: command line front end for the subgroups library.

mod config;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{CommandFactory, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use subgroups::amenability::{
    bs_obstruction_probe, folner_check, folner_search, format_ratio, free_product_folner, FolnerSearch, FreeProductCase,
};
use subgroups::chabauty::{
    constraint_of_window, isolation_certificate, verify_certificate, window_test, MembershipConstraint, SubgroupHandle,
};
use subgroups::cosets::{low_index, todd_coxeter, CosetError, LowIndexOptions};
use subgroups::permrep::{Action, PermRep, SubgroupClass, WindowAction};
use subgroups::stallings::{CoreGraph, CoreIndex};
use subgroups::{CosetTable, Letter, Presentation, Word};

use config::{ConfigArgs, Format, RunConfig};
use input::{ActionArgs, Loaded};
use report::{rows_csv, table_hash, DomainError, Failure, Output};

const GRAMMAR: &str = "\
Syntax:
  presentation  <a,b | r1, r2, lhs = rhs>     e.g. \"<s,t| t^-1 s t = s^2>\"
  word          letters, powers and brackets  e.g. \"a^2 b^-1\", \"(a b)^3\", \"1\"
  word list     comma separated words         e.g. \"a^2,b\"
  permutations  generator=images; ...         e.g. \"a=1 2 0; b=0 _ 1\" (`_` = undefined)
  rational      p/q                           e.g. 1/4

Configuration (lowest to highest precedence): built-in defaults, the
--config key=value file, SUBGROUPS_<OPTION> environment variables, flags.
Keys: max_cosets, max_index, copies, radius, epsilon, max_size, seed, format.

Exit status: 0 success, 1 domain error (printed as {\"error\": {module, kind, message}}),
2 usage error.";

#[derive(Debug, Parser)]
#[command(name = "subgroups", version, about = "Subgroups of finitely presented groups: cosets, cores, Chabauty windows, actions and Følner sets", after_help = GRAMMAR)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct GroupArg {
    /// Group presentation, e.g. "<a,b|>"
    #[arg(long)]
    group: String,
}

#[derive(Debug, Clone, clap::Args)]
struct SubgroupArgs {
    /// Group presentation, e.g. "<a,b|>"
    #[arg(long)]
    group: String,
    /// Comma separated subgroup generators (empty for the trivial subgroup)
    #[arg(long, default_value = "")]
    subgroup: String,
}

#[derive(Debug, Clone, clap::Args)]
struct PointArgs {
    /// Point label
    #[arg(long)]
    point: Option<usize>,
    /// The coset uH of the first orbit, for structured representations
    #[arg(long)]
    coset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and normalise a presentation, and optionally reduce words in it
    Parse {
        #[command(flatten)]
        g: GroupArg,
        /// Comma separated words to reduce
        #[arg(long)]
        words: Option<String>,
    },
    /// Coset table of a subgroup by Todd–Coxeter enumeration
    Cosets {
        #[command(flatten)]
        s: SubgroupArgs,
    },
    /// All subgroups of index at most --max-index
    LowIndex {
        #[command(flatten)]
        g: GroupArg,
    },
    /// Subgroups containing a finite-index subgroup
    Overgroups {
        #[command(flatten)]
        s: SubgroupArgs,
    },
    /// Stallings core graph of a subgroup of a free group
    Fold {
        #[command(flatten)]
        s: SubgroupArgs,
    },
    /// Membership of words in a subgroup
    Member {
        #[command(flatten)]
        s: SubgroupArgs,
        /// Comma separated words
        #[arg(long)]
        element: String,
    },
    /// Finite-index subgroup containing the subgroup but not the element
    Separate {
        #[command(flatten)]
        s: SubgroupArgs,
        #[arg(long)]
        element: String,
    },
    /// The conjugate gHg^-1
    Conjugate {
        #[command(flatten)]
        s: SubgroupArgs,
        #[arg(long)]
        element: String,
    },
    /// Whether two subgroups agree on a finite window of words
    Window {
        #[command(flatten)]
        s: SubgroupArgs,
        /// Generators of the second subgroup
        #[arg(long, default_value = "")]
        other: String,
        /// Comma separated window words
        #[arg(long, default_value = "")]
        omega: String,
    },
    /// Membership certificate isolating a finite-index subgroup
    Isolate {
        #[command(flatten)]
        s: SubgroupArgs,
    },
    /// Check a certificate against all subgroups of index at most --max-index
    VerifyCert {
        #[command(flatten)]
        s: SubgroupArgs,
        /// JSON file with must_contain and must_exclude word lists
        #[arg(long)]
        cert: PathBuf,
    },
    /// Action on the cosets of a subgroup
    Quasiregular {
        #[command(flatten)]
        s: SubgroupArgs,
    },
    /// Copies of every finite quotient action up to --max-index
    TauStar {
        #[command(flatten)]
        g: GroupArg,
    },
    /// Representation built from classified subgroups
    TauStarSolitary {
        #[command(flatten)]
        g: GroupArg,
        /// Generators of a subgroup of finite index in its normalizer (repeatable)
        #[arg(long)]
        delta: Vec<String>,
        /// Generators of a subgroup of infinite index in its normalizer (repeatable)
        #[arg(long)]
        sigma: Vec<String>,
    },
    /// Image of a point under a word
    Apply {
        #[command(flatten)]
        action: ActionArgs,
        #[command(flatten)]
        at: PointArgs,
        #[arg(long)]
        word: String,
    },
    /// Stabilizer of a point
    Stabilizer {
        #[command(flatten)]
        action: ActionArgs,
        #[command(flatten)]
        at: PointArgs,
    },
    /// Points visited while applying a word
    Trace {
        #[command(flatten)]
        action: ActionArgs,
        #[command(flatten)]
        at: PointArgs,
        #[arg(long)]
        word: String,
    },
    /// Exact Følner ratios of a finite set
    FolnerCheck {
        #[command(flatten)]
        action: ActionArgs,
        /// Comma separated points
        #[arg(long)]
        set: String,
        /// Comma separated words (default: the generators)
        #[arg(long)]
        omega: Option<String>,
    },
    /// Search the orbit of a point for a Følner set
    FolnerSearch {
        #[command(flatten)]
        action: ActionArgs,
        #[command(flatten)]
        at: PointArgs,
        /// Comma separated words (default: the generators)
        #[arg(long)]
        omega: Option<String>,
    },
    /// Orders of s in the finite quotients of <s,t | t^-1 s t = s^n>
    BsProbe {
        #[arg(long, default_value_t = 2)]
        n: u64,
    },
    /// Følner set for a free product of two window actions
    FreeProductFolner {
        #[arg(long, default_value = "<s|>")]
        first_group: String,
        /// Generator images of the first action
        #[arg(long, required_unless_present = "fixture")]
        first_perms: Option<String>,
        #[arg(long, default_value = "<t|>")]
        second_group: String,
        /// Generator images of the second action
        #[arg(long, required_unless_present = "fixture")]
        second_perms: Option<String>,
        /// Generate a random instance on this many points from --seed
        #[arg(long, conflicts_with_all = ["first_perms", "second_perms"])]
        fixture: Option<usize>,
        #[arg(long)]
        point: Option<usize>,
        /// Points where the first action must stay unchanged
        #[arg(long)]
        anchors: Option<String>,
        /// Words of the first factor (default: its generators)
        #[arg(long)]
        first_words: Option<String>,
        /// Words of the second factor (default: its generators)
        #[arg(long)]
        second_words: Option<String>,
    },
    /// Re-emit a coset table or window JSON file in another format
    Export {
        #[arg(long)]
        input: PathBuf,
    },
}

fn column_names(p: &Presentation) -> Vec<String> {
    (0..p.alphabet().columns()).map(|c| p.alphabet().letter_name(Letter::from_column(c))).collect()
}

fn texts(p: &Presentation, ws: &[Word]) -> Vec<String> {
    ws.iter().map(|w| p.word_text(w)).collect()
}

fn finite_table(h: &SubgroupHandle) -> Result<CosetTable, Failure> {
    h.table().cloned().ok_or_else(|| Failure::Domain(DomainError::new("chabauty", "NotFiniteIndex", "subgroup is not known to have finite index")))
}

fn generators_or(p: &Presentation, omega: &Option<String>) -> Result<Vec<Word>, Failure> {
    match omega {
        Some(text) => input::words(p, text),
        None => Ok((0..p.generator_count()).map(Word::generator).collect()),
    }
}

fn table_output(t: &CosetTable) -> Output {
    let p = t.presentation();
    let mut text = format!("index {}\n", t.index());
    for (i, row) in t.rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        text.push_str(&format!("{i}: {}\n", cells.join(" ")));
    }
    Output::json(t.to_json()).with_text(text).with_dot(t.to_dot()).with_csv(rows_csv(&column_names(p), &t.rows()))
}

fn window_output(json: Value, w: &WindowAction) -> Output {
    let p = w.presentation();
    let rows: Vec<Vec<String>> = (0..w.size())
        .map(|x| {
            (0..p.alphabet().columns())
                .map(|c| w.image(Letter::from_column(c), x).map(|y| y.to_string()).unwrap_or_default())
                .collect()
        })
        .collect();
    let mut text = format!("{} points\n", w.size());
    for g in 0..p.generator_count() {
        let images: Vec<String> = w.permutation(g).iter().map(|y| y.map_or("_".into(), |y| y.to_string())).collect();
        text.push_str(&format!("{}: {}\n", p.alphabet().name(g), images.join(" ")));
    }
    Output::json(json).with_text(text).with_dot(w.to_dot()).with_csv(rows_csv(&column_names(p), &rows))
}

fn subgroup_list(tables: &[CosetTable]) -> (Vec<Value>, String, String) {
    let mut csv = String::from("index,hash\n");
    let mut text = String::new();
    let json = tables
        .iter()
        .map(|t| {
            let hash = table_hash(&t.rows());
            csv.push_str(&format!("{},{hash}\n", t.index()));
            text.push_str(&format!("index {} hash {hash} normal {}\n", t.index(), t.is_normal()));
            json!({"index": t.index(), "hash": hash, "normal": t.is_normal(), "table": t.rows()})
        })
        .collect();
    (json, csv, text)
}

fn handle_text(h: &SubgroupHandle) -> String {
    let index = match h.index() {
        CoreIndex::Finite(n) => n.to_string(),
        CoreIndex::Infinite => "infinite".into(),
    };
    format!("index {index}\ngenerators {}\n", texts(h.presentation(), &h.generators()).join(", "))
}

fn handle_output(h: &SubgroupHandle) -> Output {
    let mut json = h.to_json();
    json["generators"] = json!(texts(h.presentation(), &h.generators()));
    Output::json(json).with_text(handle_text(h)).with_dot(h.to_dot())
}

/// A desk instance: a mostly trivial first action and a truncated
/// translation along a random line for the second.
fn fixture(n: usize, seed: u64, first: &Arc<Presentation>, second: &Arc<Presentation>) -> Result<(WindowAction, WindowAction, usize, Vec<usize>), Failure> {
    if n < 4 {
        return Err(Failure::Usage("--fixture needs at least 4 points".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let maps: Vec<Vec<usize>> = (0..first.generator_count())
        .map(|_| {
            let mut points: Vec<usize> = (0..n).collect();
            points.shuffle(&mut rng);
            let moved = &points[..rng.gen_range(2..=(n / 10).max(2))];
            let mut map: Vec<usize> = (0..n).collect();
            for (i, &from) in moved.iter().enumerate() {
                map[from] = moved[(i + 1) % moved.len()];
            }
            map
        })
        .collect();
    let sigma = WindowAction::from_permutations(first.clone(), &maps).map_err(DomainError::from)?;
    let maps: Vec<Vec<Option<usize>>> = (0..second.generator_count())
        .map(|_| {
            let mut line: Vec<usize> = (0..n).collect();
            line.shuffle(&mut rng);
            let mut map = vec![None; n];
            for pair in line.windows(2) {
                map[pair[0]] = Some(pair[1]);
            }
            map
        })
        .collect();
    let tau = WindowAction::from_partial_permutations(second.clone(), &maps).map_err(DomainError::from)?;
    let x = rng.gen_range(0..n);
    let anchors = (0..2).map(|_| rng.gen_range(0..n)).collect();
    Ok((sigma, tau, x, anchors))
}

fn run(command: Command, config: &RunConfig) -> Result<Output, Failure> {
    Ok(match command {
        Command::Parse { g, words } => {
            let p = input::group(&g.group)?;
            let reduced = match &words {
                Some(text) => texts(&p, &input::words(&p, text)?),
                None => Vec::new(),
            };
            let mut text = format!("{p}\n");
            for w in &reduced {
                text.push_str(&format!("{w}\n"));
            }
            Output::json(json!({
                "presentation": p.to_string(),
                "generators": p.alphabet().names(),
                "relators": texts(&p, p.relators()),
                "words": reduced,
            }))
            .with_text(text)
        }
        Command::Cosets { s } => {
            let p = input::group(&s.group)?;
            let gens = input::words(&p, &s.subgroup)?;
            match todd_coxeter(&p, &gens, config.max_cosets) {
                Ok(t) => {
                    let mut out = table_output(&t);
                    out.json["overflow"] = json!(false);
                    out.json["normal"] = json!(t.is_normal());
                    out
                }
                Err(CosetError::Overflow { max_cosets }) => Output::json(json!({"overflow": true, "max_cosets": max_cosets}))
                    .with_text(format!("overflow: more than {max_cosets} cosets\n")),
                Err(e) => return Err(e.into()),
            }
        }
        Command::LowIndex { g } => {
            let p = input::group(&g.group)?;
            let tables = low_index(&p, config.max_index)?;
            let (list, csv, text) = subgroup_list(&tables);
            Output::json(json!({
                "presentation": p.to_string(),
                "max_index": config.max_index,
                "count": tables.len(),
                "subgroups": list,
            }))
            .with_csv(csv)
            .with_text(text)
        }
        Command::Overgroups { s } => {
            let p = input::group(&s.group)?;
            let t = finite_table(&input::handle(&p, &s.subgroup, config)?)?;
            let overgroups = t.overgroups();
            let (list, csv, text) = subgroup_list(&overgroups);
            Output::json(json!({"subgroup": t.to_json(), "count": overgroups.len(), "overgroups": list}))
                .with_csv(csv)
                .with_text(text)
        }
        Command::Fold { s } => {
            let p = input::group(&s.group)?;
            let core = CoreGraph::fold(&p, &input::words(&p, &s.subgroup)?)?;
            let h: SubgroupHandle = core.clone().into();
            let mut json = core.to_json();
            json["generators"] = json!(texts(&p, &core.generators()));
            Output::json(json).with_text(format!("{} vertices\n{}", core.vertex_count(), handle_text(&h))).with_dot(core.to_dot())
        }
        Command::Member { s, element } => {
            let p = input::group(&s.group)?;
            let h = input::handle(&p, &s.subgroup, config)?;
            let mut text = String::new();
            let results = input::words(&p, &element)?
                .iter()
                .map(|w| {
                    let member = h.checked_member(w)?;
                    text.push_str(&format!("{}: {member}\n", p.word_text(w)));
                    Ok(json!({"word": p.word_text(w), "member": member}))
                })
                .collect::<Result<Vec<Value>, Failure>>()?;
            Output::json(json!({"results": results})).with_text(text)
        }
        Command::Separate { s, element } => {
            let p = input::group(&s.group)?;
            let gens = input::words(&p, &s.subgroup)?;
            let g = input::word(&p, &element)?;
            let core = CoreGraph::fold(&p, &gens)?;
            let k = core.hall_separate(&g)?;
            let k_gens = k.generators();
            let table = todd_coxeter(&p, &k_gens, config.max_cosets)?;
            let verified = json!({
                "finite_index": k.is_complete() && table.index() == k.vertex_count(),
                "contains_subgroup": gens.iter().all(|w| table.contains(w)),
                "excludes_element": !table.contains(&g),
            });
            let ok = verified.as_object().expect("object").values().all(|v| v == &json!(true));
            let mut json = k.to_json();
            json["generators"] = json!(texts(&p, &k_gens));
            Output::json(json!({"element": p.word_text(&g), "separating_subgroup": json, "verified": verified}))
                .with_text(format!(
                    "index {}\ngenerators {}\nverified {ok}\n",
                    k.vertex_count(),
                    texts(&p, &k_gens).join(", ")
                ))
                .with_dot(k.to_dot())
        }
        Command::Conjugate { s, element } => {
            let p = input::group(&s.group)?;
            let h = input::handle(&p, &s.subgroup, config)?;
            handle_output(&h.conjugate(&input::word(&p, &element)?)?)
        }
        Command::Window { s, other, omega } => {
            let p = input::group(&s.group)?;
            let h = input::handle(&p, &s.subgroup, config)?;
            let k = input::handle(&p, &other, config)?;
            let omega = input::words(&p, &omega)?;
            let agree = window_test(&k, &h, &omega)?;
            let constraint = constraint_of_window(&h, &omega)?;
            Output::json(json!({"agree": agree, "omega": texts(&p, &omega), "constraint": constraint.to_json(&p)}))
                .with_text(format!("{}\n", if agree { "agree" } else { "differ" }))
        }
        Command::Isolate { s } => {
            let p = input::group(&s.group)?;
            let h = input::handle(&p, &s.subgroup, config)?;
            let c = isolation_certificate(&h)?;
            Output::json(c.to_json(&p)).with_text(format!(
                "contain {}\nexclude {}\n",
                texts(&p, c.must_contain()).join(", "),
                texts(&p, c.must_exclude()).join(", ")
            ))
        }
        Command::VerifyCert { s, cert } => {
            let p = input::group(&s.group)?;
            let h = input::handle(&p, &s.subgroup, config)?;
            let text = std::fs::read_to_string(&cert).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", cert.display())))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", cert.display())))?;
            let c = MembershipConstraint::from_json(&value, &p)?;
            let tables = low_index(&p, config.max_index)?;
            let universe: Vec<SubgroupHandle> = tables.iter().cloned().map(Into::into).collect();
            let report = verify_certificate(&c, &h, &universe)?;
            let mut text = format!("{}\n", if report.passed() { "PASS" } else { "FAIL" });
            if !report.subject_satisfies {
                text.push_str("subject does not satisfy the certificate\n");
            }
            for o in &report.offenders {
                text.push_str(&format!("offender {} index {} hash {} ({:?})\n", o.index, tables[o.index].index(), table_hash(&tables[o.index].rows()), o.reason));
            }
            let mut json = report.to_json();
            json["universe"] = json!(universe.len());
            Output::json(json).with_text(text)
        }
        Command::Quasiregular { s } => {
            let p = input::group(&s.group)?;
            let r = PermRep::quasiregular_with_radius(&input::handle(&p, &s.subgroup, config)?, config.radius);
            window_output(r.to_json(), &r.window())
        }
        Command::TauStar { g } => {
            let p = input::group(&g.group)?;
            let r = PermRep::tau_star_lerf(&p, config.max_index, config.copies)?;
            let mut json = r.to_json();
            let cycles: serde_json::Map<String, Value> = (0..p.generator_count())
                .map(|g| {
                    let ct = r.cycle_type(g)?;
                    let ct: serde_json::Map<String, Value> = ct.iter().map(|(len, n)| (len.to_string(), json!(n))).collect();
                    Ok((p.alphabet().name(g).to_string(), Value::Object(ct)))
                })
                .collect::<Result<_, Failure>>()?;
            json["cycle_types"] = Value::Object(cycles);
            window_output(json, &r.window())
        }
        Command::TauStarSolitary { g, delta, sigma } => {
            let p = input::group(&g.group)?;
            let mut classified = Vec::new();
            for (list, class) in [(&delta, SubgroupClass::Delta), (&sigma, SubgroupClass::Sigma)] {
                for gens in list {
                    classified.push((input::handle(&p, gens, config)?, class));
                }
            }
            if classified.is_empty() {
                return Err(Failure::Usage("give at least one --delta or --sigma subgroup".into()));
            }
            let r = PermRep::tau_star_solitary(&classified, config.copies, config.radius)?;
            window_output(r.to_json(), &r.window())
        }
        Command::Apply { action, at, word } => {
            let src = action.resolve(config)?;
            let x = src.point(at.point, at.coset.as_deref())?;
            let w = input::word(src.presentation(), &word)?;
            let y = src.window().apply(&w, x).map_err(DomainError::from)?;
            Output::json(json!({"point": x, "word": src.presentation().word_text(&w), "image": y})).with_text(format!("{y}\n"))
        }
        Command::Stabilizer { action, at } => {
            let src = action.resolve(config)?;
            let x = src.point(at.point, at.coset.as_deref())?;
            handle_output(&src.stabilizer(x)?)
        }
        Command::Trace { action, at, word } => {
            let src = action.resolve(config)?;
            let x = src.point(at.point, at.coset.as_deref())?;
            let w = input::word(src.presentation(), &word)?;
            let trace = src.window().trace(x, &w).map_err(DomainError::from)?;
            let listed: Vec<String> = trace.iter().map(ToString::to_string).collect();
            Output::json(json!({"point": x, "word": src.presentation().word_text(&w), "trace": trace}))
                .with_text(format!("{}\n", listed.join(" ")))
        }
        Command::FolnerCheck { action, set, omega } => {
            let src = action.resolve(config)?;
            let p = src.presentation().clone();
            let omega = generators_or(&p, &omega)?;
            let report = folner_check(&src.window(), &input::points(&set)?, &omega, config.epsilon)?;
            let mut text = String::new();
            for (w, r) in report.omega.iter().zip(&report.ratios) {
                text.push_str(&format!("{}: {}\n", p.word_text(w), format_ratio(r)));
            }
            text.push_str(&format!("max {} < {}: {}\n", format_ratio(&report.max_ratio), format_ratio(&report.epsilon), report.pass));
            Output::json(report.to_json(&p)).with_text(text)
        }
        Command::FolnerSearch { action, at, omega } => {
            let src = action.resolve(config)?;
            let p = src.presentation().clone();
            let x = src.point(at.point, at.coset.as_deref())?;
            let omega = generators_or(&p, &omega)?;
            let found = folner_search(&src.window(), x, &omega, config.epsilon, config.max_size)?;
            let text = match &found {
                FolnerSearch::Found(r) => {
                    let listed: Vec<String> = r.f.iter().map(ToString::to_string).collect();
                    format!("found {} points, max ratio {}\n{}\n", r.f.len(), format_ratio(&r.max_ratio), listed.join(" "))
                }
                FolnerSearch::NotFoundUpTo(n) => format!("none found with at most {n} points\n"),
            };
            Output::json(found.to_json(&p)).with_text(text)
        }
        Command::BsProbe { n } => {
            let report = bs_obstruction_probe(n, config.max_index, LowIndexOptions::default())?;
            let mut csv = String::from("index,order_of_s,quotient_order,coprime\n");
            let mut text = format!("{}\n", if report.passed() { "PASS" } else { "FAIL" });
            for q in &report.quotients {
                csv.push_str(&format!("{},{},{},{}\n", q.index, q.order_of_s, q.quotient_order, q.coprime));
                text.push_str(&format!("index {} |Q| {} order(s) {}\n", q.index, q.quotient_order, q.order_of_s));
            }
            Output::json(report.to_json()).with_csv(csv).with_text(text)
        }
        Command::FreeProductFolner {
            first_group,
            first_perms,
            second_group,
            second_perms,
            fixture: size,
            point,
            anchors,
            first_words,
            second_words,
        } => {
            let first = input::group(&first_group)?;
            let second = input::group(&second_group)?;
            let (sigma, tau, fx, fanchors) = match size {
                Some(n) => fixture(n, config.seed, &first, &second)?,
                None => {
                    let sigma = input::perms(&first, first_perms.as_deref().unwrap_or_default())?;
                    let tau = input::perms(&second, second_perms.as_deref().unwrap_or_default())?;
                    (sigma, tau, 0, Vec::new())
                }
            };
            let x = point.unwrap_or(fx);
            let anchors = match &anchors {
                Some(text) => input::points(text)?,
                None => fanchors,
            };
            let s = generators_or(&first, &first_words)?;
            let t = generators_or(&second, &second_words)?;
            let out = free_product_folner(&sigma, &tau, x, &anchors, &s, &t, config.epsilon)?;
            let case = match out.case {
                FreeProductCase::FiniteOrbit => "finite_orbit",
                FreeProductCase::ConjugatedFirst => "conjugated_first",
                FreeProductCase::ConjugatedSecond => "conjugated_second",
            };
            let p = out.action.presentation().clone();
            let json = json!({
                "case": case,
                "point": x,
                "anchors": anchors,
                "F": out.f,
                "B": out.b,
                "trace": out.trace,
                "swaps": out.swaps,
                "report": out.report.to_json(&p),
                "first": sigma.to_json(),
                "second": tau.to_json(),
                "first_modified": out.phi.to_json(),
                "second_modified": out.psi.to_json(),
                "action": out.action.to_json(),
            });
            let text = format!(
                "case {case}\n|F| = {}, |B| = {}, max ratio {} < {}: {}\n",
                out.f.len(),
                out.b.len(),
                format_ratio(&out.report.max_ratio),
                format_ratio(&out.report.epsilon),
                out.report.pass
            );
            Output::json(json).with_text(text).with_dot(out.action.to_dot())
        }
        Command::Export { input: path } => match input::load(&path)? {
            Loaded::Table(t) => table_output(&t),
            Loaded::Window(w) => window_output(w.to_json(), &w),
        },
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut format = cli.config.format.unwrap_or(Format::Json);
    let result = RunConfig::resolve(&cli.config).and_then(|config| {
        format = config.format;
        let out = run(cli.command, &config)?;
        Ok(out.render(config.format)?)
    });
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(e)) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&e.to_json()).expect("values serialise")),
                _ => println!("error: {}::{}: {}", e.module, e.kind, e.message),
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            eprintln!("{}", Cli::command().render_help());
            ExitCode::from(2)
        }
    }
}
