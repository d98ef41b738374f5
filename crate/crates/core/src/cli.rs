//! The `qlattice` command line.
//!
//! Every command builds a JSON report (schema `report-v1`); text and CSV
//! output are renderings of that JSON. Exit codes: 0 success, 1 property
//! violated or conjecture violation found, 2 resource exhausted, 3 usage or
//! input error.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covering_lym::{
    antichain_decompose, audit_t_covering, build_covering, lym_check, maximize_profile, DEFAULT_COVERING_CAP,
};
use crate::error::{Error, Result};
use crate::extremal_search::{
    build_star, check_equality_characterization, explore_conjecture, ground, max_family, ConjecturePoint,
    ConjectureStatus, GroundElement, SearchLimits, SearchProblem,
};
use crate::family_properties::{check, rainbow_disjoint_transversal, Property, PropertySpec, Verdict};
use crate::finite_field::make_field;
use crate::qcombinatorics::{
    check_ordering_property, ordering_threshold, parse_rational, theorem_bound, threshold_n0, BoundParams,
    ThresholdKind, TheoremId,
};
use crate::subspace_lattice::{
    parse_family, write_family, Ambient, AnyFamily, Family, LatticeElement, SubsetHandle, SubspaceHandle,
    DEFAULT_ENUMERATION_CAP,
};

pub const SCHEMA: &str = "report-v1";
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Environment variable overriding the default enumeration cap.
pub const CAP_ENV: &str = "QLATTICE_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lattice {
    Sets,
    Subspaces,
}

#[derive(Debug, Parser)]
#[command(name = "qlattice", version, about = "Exact extremal combinatorics on Boolean and subspace lattices")]
pub struct Cli {
    /// Output format; text and csv are derived from the JSON report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Enumeration cap (default from QLATTICE_CAP, else 10^7).
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Search node cap.
    #[arg(long, global = true)]
    pub node_cap: Option<u64>,
    /// Maximum families kept per search.
    #[arg(long, global = true, default_value_t = crate::extremal_search::DEFAULT_WITNESS_CAP)]
    pub witness_cap: usize,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate a theorem or conjecture bound: `bound ekr-q q=2 n=5 k=2`.
    Bound { theorem: String, params: Vec<String> },
    /// Check a property of a family file.
    Check {
        file: PathBuf,
        #[arg(long)]
        property: String,
    },
    /// Exact maximum family: `search subspaces q=2 n=5 k=2 --property intersecting`.
    Search {
        #[arg(value_enum)]
        lattice: Lattice,
        /// `n=`, `q=`, and `k=` or `dims=a..b`.
        params: Vec<String>,
        #[arg(long)]
        property: String,
        /// Compare with a bound and classify the extremal families.
        #[arg(long)]
        compare: Option<String>,
        /// Extra `key=value` parameters for the compared bound.
        #[arg(long = "bound-param")]
        bound_params: Vec<String>,
        /// Fix the first member (full single levels only).
        #[arg(long)]
        symmetry: bool,
        /// Write the first maximum family to this file.
        #[arg(long)]
        witness_file: Option<PathBuf>,
    },
    /// Audit the basis covering family: `audit-covering q=2 n=3`.
    AuditCovering { params: Vec<String> },
    /// Threshold finder: `thresholds k=1 eps=1 q=2`.
    Thresholds { params: Vec<String> },
    /// Conjecture exploration over a grid: `conjecture 5.2 q=2 n=4..5 k=2 s=1..2`.
    Conjecture { id: String, params: Vec<String> },
    /// The profile maximizer: `profile n=5 k=2 q=2`.
    Profile { params: Vec<String> },
    /// Split a family file into antichains.
    Decompose { file: PathBuf },
    /// Pairwise disjoint representatives, one from each family file.
    Rainbow {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write a family file of full levels: `enumerate subspaces q=2 n=4 k=2`.
    Enumerate {
        #[arg(value_enum)]
        lattice: Lattice,
        params: Vec<String>,
    },
    /// Re-run the config echoed in a JSON report and compare results.
    Replay { report: PathBuf },
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// The config echo recorded in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub enumeration_cap: u64,
    pub node_cap: Option<u64>,
    pub witness_cap: usize,
    pub seed: u64,
}

struct Payload {
    result: Value,
    provenance: Vec<String>,
    code: i32,
}

impl Payload {
    fn ok(result: Value) -> Self {
        Payload {
            result,
            provenance: Vec::new(),
            code: 0,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } | Error::ResourceExhausted(_) => 2,
        Error::NotOptimal(_) | Error::HypothesisUnverified(_) | Error::PreconditionFailed(_) => 1,
        _ => 3,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// `key=value` assignments as a map, rejecting repeats.
fn assignments(params: &[String]) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected key=value, got `{p}`")))?;
        if out.iter().any(|(x, _)| x == k) {
            return Err(Error::Usage(format!("parameter `{k}` given twice")));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn get<'a>(a: &'a [(String, String)], key: &str) -> Option<&'a str> {
    a.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn int(a: &[(String, String)], key: &str) -> Result<Option<u64>> {
    get(a, key)
        .map(|v| v.parse::<u64>().map_err(|_| Error::Usage(format!("bad integer `{v}` for {key}"))))
        .transpose()
}

fn need(a: &[(String, String)], key: &str) -> Result<u64> {
    int(a, key)?.ok_or_else(|| Error::MissingParameter(key.into()))
}

fn only(a: &[(String, String)], allowed: &[&str]) -> Result<()> {
    match a.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(Error::Usage(format!("unknown parameter `{k}`; expected one of {}", allowed.join(" ")))),
        None => Ok(()),
    }
}

/// Integer values: `4`, `4..6` (inclusive) or `1,3,5`.
fn int_range(key: &str, v: &str) -> Result<Vec<u64>> {
    let bad = || Error::Usage(format!("bad value `{v}` for {key}"));
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    v.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn ranks(a: &[(String, String)]) -> Result<Vec<usize>> {
    match (get(a, "k"), get(a, "dims")) {
        (Some(k), None) => Ok(int_range("k", k)?.into_iter().map(|x| x as usize).collect()),
        (None, Some(d)) => Ok(int_range("dims", d)?.into_iter().map(|x| x as usize).collect()),
        (Some(_), Some(_)) => Err(Error::Usage("give either k= or dims=, not both".into())),
        (None, None) => Err(Error::MissingParameter("k or dims".into())),
    }
}

fn ambient_for(lattice: Lattice, a: &[(String, String)]) -> Result<Ambient> {
    let n = need(a, "n")? as usize;
    match lattice {
        Lattice::Sets => {
            if get(a, "q").is_some() {
                return Err(Error::Usage("set ground takes no q".into()));
            }
            if n > 64 {
                return Err(Error::RangeError(format!("n={n} exceeds 64")));
            }
            Ok(Ambient::sets(n))
        }
        Lattice::Subspaces => Ok(Ambient::subspaces(&make_field(need(a, "q")? as u32)?, n)),
    }
}

fn cmd_bound(theorem: &str, params: &[String]) -> Result<Payload> {
    let id = TheoremId::parse(theorem)?;
    let p = BoundParams::parse(params.iter().map(String::as_str))?;
    let b = theorem_bound(id, &p)?;
    let mut payload = Payload::ok(json!({
        "bound": to_value(&b),
        "warnings": b.warnings(),
    }));
    payload.provenance.push(format!("{id} {}", p.to_assignments().join(" ")));
    Ok(payload)
}

fn uses_lym(spec: &PropertySpec) -> Option<usize> {
    spec.conjuncts.iter().find_map(|p| match p {
        Property::Sperner => Some(1),
        Property::KSperner(k) | Property::IntersectingKSperner(k) => Some(*k),
        _ => None,
    })
}

fn check_family<E: LatticeElement>(fam: &Family<E>, spec: &PropertySpec) -> Result<Payload> {
    let rep = check(spec, fam)?;
    let (verdict, witness, reason) = match &rep.verdict {
        Verdict::Holds => ("holds", Value::Null, Value::Null),
        Verdict::Violated(v) => (
            "violated",
            to_value(&v.members.iter().map(|e| e.encode()).collect::<Vec<_>>()),
            Value::String(v.reason.clone()),
        ),
    };
    let lym = uses_lym(spec).map(|k| lym_check(fam, k)).transpose()?;
    let code = if rep.holds() { 0 } else { 1 };
    Ok(Payload {
        result: json!({
            "property": spec.to_string(),
            "family_size": fam.len(),
            "profile": fam.profile().counts,
            "verdict": verdict,
            "reason": reason,
            "witness": witness,
            "advisories": rep.advisories,
            "lym": lym.map(|l| to_value(&l)),
        }),
        provenance: Vec::new(),
        code,
    })
}

fn read_family(path: &PathBuf) -> Result<AnyFamily> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_family(&text)
}

fn cmd_check(file: &PathBuf, property: &str) -> Result<Payload> {
    let spec: PropertySpec = property.parse()?;
    match read_family(file)? {
        AnyFamily::Subsets(f) => check_family(&f, &spec),
        AnyFamily::Subspaces(f) => check_family(&f, &spec),
    }
}

fn cmd_decompose(file: &PathBuf) -> Result<Payload> {
    fn go<E: LatticeElement>(f: &Family<E>) -> Value {
        let parts = antichain_decompose(f);
        json!({
            "family_size": f.len(),
            "parts": parts.len(),
            "antichains": parts.iter().map(|p| p.encodings()).collect::<Vec<_>>(),
        })
    }
    Ok(Payload::ok(match read_family(file)? {
        AnyFamily::Subsets(f) => go(&f),
        AnyFamily::Subspaces(f) => go(&f),
    }))
}

fn cmd_rainbow(files: &[PathBuf]) -> Result<Payload> {
    fn go<E: LatticeElement>(fams: &[Family<E>]) -> Result<Payload> {
        let t = rainbow_disjoint_transversal(fams)?;
        Ok(Payload {
            result: json!({
                "family_sizes": fams.iter().map(Family::len).collect::<Vec<_>>(),
                "found": t.is_some(),
                "transversal": t.map(|t| t.iter().map(|e| e.encode()).collect::<Vec<_>>()),
            }),
            provenance: Vec::new(),
            code: 0,
        })
    }
    let mut sets = Vec::new();
    let mut spaces = Vec::new();
    for f in files {
        match read_family(f)? {
            AnyFamily::Subsets(x) => sets.push(x),
            AnyFamily::Subspaces(x) => spaces.push(x),
        }
    }
    match (sets.is_empty(), spaces.is_empty()) {
        (false, true) => go(&sets),
        (true, false) => go(&spaces),
        _ => Err(Error::AmbientMismatch("rainbow families mix sets and subspaces".into())),
    }
}

struct SearchArgs<'a> {
    lattice: Lattice,
    params: &'a [String],
    property: &'a str,
    compare: Option<&'a str>,
    bound_params: &'a [String],
    symmetry: bool,
    witness_file: Option<&'a PathBuf>,
}

/// Bound parameters implied by the ground and property, then overrides.
fn inferred_bound_params(
    a: &[(String, String)],
    spec: &PropertySpec,
    ranks: &[usize],
    overrides: &[String],
) -> Result<BoundParams> {
    let mut asg: Vec<String> = Vec::new();
    for key in ["n", "q"] {
        if let Some(v) = get(a, key) {
            asg.push(format!("{key}={v}"));
        }
    }
    let mut k = None;
    for p in &spec.conjuncts {
        match p {
            Property::KSperner(x) | Property::IntersectingKSperner(x) => k = Some(*x),
            Property::Sperner => k = Some(1),
            Property::MatchingAtMost(s) => asg.push(format!("s={s}")),
            Property::NoDSimplex(d)
            | Property::NoDCluster(d)
            | Property::NoDSimplexCluster(d)
            | Property::NoNontrivialIntersecting(d) => asg.push(format!("d={d}")),
            Property::LIntersecting(l) => {
                asg.push(format!("L={}", l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            }
            _ => {}
        }
    }
    if k.is_none() && ranks.len() == 1 {
        k = Some(ranks[0]);
    }
    if let Some(k) = k {
        asg.push(format!("k={k}"));
    }
    let mut merged: Vec<String> = Vec::new();
    for s in asg.iter().chain(overrides) {
        let key = s.split('=').next().unwrap_or_default().to_string();
        merged.retain(|m| m.split('=').next() != Some(key.as_str()));
        merged.push(s.clone());
    }
    BoundParams::parse(merged.iter().map(String::as_str))
}

fn search_in<E: GroundElement>(
    s: &SearchArgs<'_>,
    amb: Ambient,
    a: &[(String, String)],
    caps: &Caps,
) -> Result<Payload> {
    let spec: PropertySpec = s.property.parse()?;
    let rk = ranks(a)?;
    let g: Family<E> = ground(&amb, rk.iter().copied(), caps.enumeration)?;
    let ground_size = g.len();
    let problem = SearchProblem::new(g, spec.clone())
        .with_limits(SearchLimits {
            node_cap: caps.nodes,
            witness_cap: caps.witnesses,
        })
        .with_symmetry(s.symmetry);
    let res = max_family(&problem)?;
    if let Some(path) = s.witness_file {
        if let Some(w) = res.witnesses.first() {
            std::fs::write(path, write_family(w)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
    }
    let mut code = if res.proven_optimal { 0 } else { 2 };
    let mut provenance = Vec::new();
    let comparison = match s.compare {
        None => Value::Null,
        Some(c) => {
            let id = TheoremId::parse(c)?;
            let bp = inferred_bound_params(a, &spec, &rk, s.bound_params)?;
            let bound = theorem_bound(id, &bp)?;
            provenance.push(format!("{id} {}", bp.to_assignments().join(" ")));
            let limit = if bound.strict {
                let v = bound.value.to_rational();
                let c = v.ceil().to_integer();
                num_bigint::BigInt::from(c) - 1
            } else {
                num_bigint::BigInt::from(bound.value.floor())
            };
            let max = num_bigint::BigInt::from(res.max_size);
            let relation = if max > limit {
                "exceeds"
            } else if max == limit {
                "tight"
            } else {
                "below"
            };
            if relation == "exceeds" && res.proven_optimal && bound.side_conditions_hold() && !bound.conjecture {
                code = 1;
            }
            let equality = if relation == "tight" && res.proven_optimal && !bound.strict {
                Some(to_value(&check_equality_characterization(&res, &bound)?))
            } else {
                None
            };
            json!({
                "bound": to_value(&bound),
                "warnings": bound.warnings(),
                "relation": relation,
                "equality": equality,
            })
        }
    };
    Ok(Payload {
        result: json!({
            "lattice": amb.kind(),
            "q": amb.q(),
            "n": amb.n(),
            "ranks": rk,
            "property": spec.to_string(),
            "ground_size": ground_size,
            "search": to_value(&res),
            "witnesses_complete": res.witnesses_complete(),
            "comparison": comparison,
        }),
        provenance,
        code,
    })
}

fn cmd_search(s: &SearchArgs<'_>, caps: &Caps) -> Result<Payload> {
    let a = assignments(s.params)?;
    only(&a, &["n", "q", "k", "dims"])?;
    let amb = ambient_for(s.lattice, &a)?;
    match s.lattice {
        Lattice::Sets => search_in::<SubsetHandle>(s, amb, &a, caps),
        Lattice::Subspaces => search_in::<SubspaceHandle>(s, amb, &a, caps),
    }
}

fn cmd_audit(params: &[String], caps: &Caps) -> Result<Payload> {
    let a = assignments(params)?;
    only(&a, &["q", "n"])?;
    let field = make_field(need(&a, "q")? as u32)?;
    let n = need(&a, "n")? as usize;
    let cov = build_covering(&field, n, caps.enumeration.min(DEFAULT_COVERING_CAP.max(caps.enumeration)))?;
    let audit = audit_t_covering(&cov)?;
    let code = if audit.passes() { 0 } else { 1 };
    Ok(Payload {
        result: json!({"passes": audit.passes(), "audit": to_value(&audit)}),
        provenance: vec![format!("covering q={} n={n}", field.q())],
        code,
    })
}

fn cmd_thresholds(params: &[String], seed: u64) -> Result<Payload> {
    let a = assignments(params)?;
    only(&a, &["k", "eps", "q", "horizon", "trials"])?;
    let k = need(&a, "k")?;
    let eps = parse_rational(get(&a, "eps").ok_or_else(|| Error::MissingParameter("eps".into()))?)?;
    let q = int(&a, "q")?;
    let horizon = int(&a, "horizon")?.unwrap_or(100);
    let trials = int(&a, "trials")?.unwrap_or(200);
    let sets = threshold_n0(ThresholdKind::Sets, k, &eps, None, horizon)?;
    let subspaces = q.map(|q| threshold_n0(ThresholdKind::Subspaces, k, &eps, Some(q), horizon)).transpose()?;
    let ord_n = ordering_threshold(k, &eps, q);
    let ordering = check_ordering_property(k, &eps, q, ord_n, trials, seed);
    let ok = sets.sweep_ok() && subspaces.as_ref().is_none_or(|s| s.sweep_ok()) && ordering.violations.is_empty();
    Ok(Payload {
        result: json!({
            "sets": to_value(&sets),
            "subspaces": subspaces.map(|s| to_value(&s)),
            "ordering_threshold": ord_n,
            "ordering_audit": to_value(&ordering),
            "all_ok": ok,
        }),
        provenance: Vec::new(),
        code: if ok { 0 } else { 1 },
    })
}

fn conjecture_id(s: &str) -> Result<TheoremId> {
    let name = match s {
        "5.1" => "conj5.1",
        "5.2" => "conj5.2",
        "4.1" => "conj4.1",
        "1.15" => "conj1.15",
        other => other,
    };
    TheoremId::parse(name)
}

fn cmd_conjecture(id: &str, params: &[String], caps: &Caps) -> Result<Payload> {
    let id = conjecture_id(id)?;
    let a = assignments(params)?;
    only(&a, &["q", "n", "k", "s", "d"])?;
    let values = |key: &str| -> Result<Vec<Option<u64>>> {
        match get(&a, key) {
            None => Ok(vec![None]),
            Some(v) => Ok(int_range(key, v)?.into_iter().map(Some).collect()),
        }
    };
    let mut grid = Vec::new();
    for q in values("q")? {
        for n in values("n")? {
            for k in values("k")? {
                for s in values("s")? {
                    for d in values("d")? {
                        grid.push(ConjecturePoint {
                            n: n.ok_or_else(|| Error::MissingParameter("n".into()))?,
                            k: k.ok_or_else(|| Error::MissingParameter("k".into()))?,
                            q,
                            s,
                            d,
                        });
                    }
                }
            }
        }
    }
    let limits = SearchLimits {
        node_cap: caps.nodes,
        witness_cap: 1,
    };
    let rows = explore_conjecture(id, &grid, &limits, caps.enumeration.min(crate::extremal_search::DEFAULT_GROUND_CAP))?;
    let code = if rows.iter().any(|r| r.status == ConjectureStatus::Violation) {
        1
    } else if rows.iter().any(|r| r.status == ConjectureStatus::Unknown) {
        2
    } else {
        0
    };
    Ok(Payload {
        result: json!({"conjecture": id, "rows": to_value(&rows)}),
        provenance: vec![format!("{id} over {} grid points", grid.len())],
        code,
    })
}

fn cmd_profile(params: &[String]) -> Result<Payload> {
    let a = assignments(params)?;
    only(&a, &["n", "k", "q"])?;
    let (n, k, q) = (need(&a, "n")?, need(&a, "k")?, need(&a, "q")?);
    let p = maximize_profile(n, k, q)?;
    let bound = theorem_bound(
        TheoremId::IntersectingKSpernerQ,
        &BoundParams {
            n: Some(n),
            k: Some(k),
            q: Some(q),
            ..Default::default()
        },
    )?;
    let agrees = p.value == bound.value.to_string();
    Ok(Payload {
        result: json!({"optimum": to_value(&p), "certified": p.certified(), "theorem_bound": bound.value.to_string(), "agrees": agrees}),
        provenance: vec![format!("thm1.12 n={n} k={k} q={q}")],
        code: if agrees && p.certified() { 0 } else { 1 },
    })
}

fn cmd_enumerate(lattice: Lattice, params: &[String], caps: &Caps) -> Result<String> {
    let a = assignments(params)?;
    only(&a, &["n", "q", "k", "dims", "center"])?;
    let amb = ambient_for(lattice, &a)?;
    let rk = ranks(&a)?;
    fn go<E: GroundElement>(amb: &Ambient, rk: &[usize], center: Option<E>, cap: u64) -> Result<String> {
        let fam: Family<E> = match center {
            None => ground(amb, rk.iter().copied(), cap)?,
            Some(c) => {
                let mut els = Vec::new();
                for &k in rk {
                    els.extend(build_star(amb, k, &c)?.into_elements());
                }
                Family::new(amb.clone(), els)?
            }
        };
        Ok(write_family(&fam))
    }
    let center = get(&a, "center");
    match lattice {
        Lattice::Sets => {
            let c = center
                .map(|c| {
                    let els = int_range("center", c)?;
                    SubsetHandle::from_elements(amb.n(), &els.iter().map(|&x| x as usize).collect::<Vec<_>>())
                })
                .transpose()?;
            go::<SubsetHandle>(&amb, &rk, c, caps.enumeration)
        }
        Lattice::Subspaces => {
            let c = match center {
                None => None,
                Some(c) => {
                    let header = format!("{} kind=subspaces q={} n={}\n", crate::subspace_lattice::FAMILY_HEADER, amb.q().unwrap_or(0), amb.n());
                    match parse_family(&format!("{header}{}\n", c.replace('/', ";")))? {
                        AnyFamily::Subspaces(f) if f.len() == 1 => Some(f.elements()[0].clone()),
                        _ => return Err(Error::Usage("center must be one subspace".into())),
                    }
                }
            };
            go::<SubspaceHandle>(&amb, &rk, c, caps.enumeration)
        }
    }
}

fn cmd_replay(path: &PathBuf) -> Result<Payload> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let old: Value = serde_json::from_str(&text).map_err(|e| Error::ParseError {
        line: e.line(),
        message: e.to_string(),
    })?;
    if old["schema"] != SCHEMA {
        return Err(Error::Usage(format!("{} is not a {SCHEMA} report", path.display())));
    }
    let config: RunConfig = serde_json::from_value(old["config"].clone())
        .map_err(|e| Error::Usage(format!("unreadable config echo: {e}")))?;
    if matches!(config.command, Command::Replay { .. } | Command::Enumerate { .. }) {
        return Err(Error::Usage("only report-producing commands can be replayed".into()));
    }
    let cli = Cli {
        format: Format::Json,
        output: None,
        threads: None,
        seed: config.seed,
        cap: Some(config.enumeration_cap),
        node_cap: config.node_cap,
        witness_cap: config.witness_cap,
        timing: false,
        command: config.command,
    };
    let again = run_parsed(&cli);
    let new: Value = serde_json::from_str(&again.stdout).map_err(|_| Error::Usage(again.stderr.trim().to_string()))?;
    let same = ["result", "provenance", "exit_code"].iter().all(|k| old[k] == new[k]);
    Ok(Payload {
        result: json!({"replayed": path.display().to_string(), "reproduced": same, "exit_code": new["exit_code"]}),
        provenance: Vec::new(),
        code: if same { 0 } else { 1 },
    })
}

struct Caps {
    enumeration: u64,
    nodes: Option<u64>,
    witnesses: usize,
}

fn enumeration_cap(flag: Option<u64>) -> Result<u64> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{CAP_ENV}=`{v}` is not a positive integer"))),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

fn dispatch(cmd: &Command, caps: &Caps, seed: u64) -> Result<Payload> {
    match cmd {
        Command::Bound { theorem, params } => cmd_bound(theorem, params),
        Command::Check { file, property } => cmd_check(file, property),
        Command::Search {
            lattice,
            params,
            property,
            compare,
            bound_params,
            symmetry,
            witness_file,
        } => cmd_search(
            &SearchArgs {
                lattice: *lattice,
                params,
                property,
                compare: compare.as_deref(),
                bound_params,
                symmetry: *symmetry,
                witness_file: witness_file.as_ref(),
            },
            caps,
        ),
        Command::AuditCovering { params } => cmd_audit(params, caps),
        Command::Thresholds { params } => cmd_thresholds(params, seed),
        Command::Conjecture { id, params } => cmd_conjecture(id, params, caps),
        Command::Profile { params } => cmd_profile(params),
        Command::Decompose { file } => cmd_decompose(file),
        Command::Rainbow { files } => cmd_rainbow(files),
        Command::Replay { report } => cmd_replay(report),
        Command::Enumerate { .. } => unreachable!("handled before dispatch"),
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", scalar(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(x, indent + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(", "),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// The first array of objects in the result, as a table.
fn find_table(v: &Value) -> Option<&Vec<Value>> {
    match v {
        Value::Array(a) if !a.is_empty() && a.iter().all(Value::is_object) => Some(a),
        Value::Object(m) => m.values().find_map(find_table),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if !is_flat(v) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn render_csv(result: &Value) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    if let Some(rows) = find_table(result) {
        let flat: Vec<Vec<(String, String)>> = rows
            .iter()
            .map(|r| {
                let mut f = Vec::new();
                flatten("", r, &mut f);
                f
            })
            .collect();
        let header: Vec<String> = flat[0].iter().map(|(k, _)| k.clone()).collect();
        w.write_record(&header).map_err(csv_err)?;
        for r in &flat {
            let rec: Vec<String> = header
                .iter()
                .map(|h| r.iter().find(|(k, _)| k == h).map(|(_, v)| v.clone()).unwrap_or_default())
                .collect();
            w.write_record(&rec).map_err(csv_err)?;
        }
    } else {
        let mut f = Vec::new();
        flatten("", result, &mut f);
        w.write_record(["key", "value"]).map_err(csv_err)?;
        for (k, v) in f {
            w.write_record([k, v]).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8"))
}

fn finish(cli: &Cli, body: String, code: i32, stderr: String) -> Outcome {
    if let Some(path) = &cli.output {
        if let Err(e) = std::fs::write(path, &body) {
            return Outcome {
                code: 3,
                stdout: String::new(),
                stderr: format!("error: {}: {e}\n", path.display()),
            };
        }
        return Outcome {
            code,
            stdout: String::new(),
            stderr,
        };
    }
    Outcome {
        code,
        stdout: body,
        stderr,
    }
}

/// Runs one command and returns its exit code and output.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let pool = match cli.threads {
        Some(0) => {
            return Outcome {
                code: 3,
                stdout: String::new(),
                stderr: "error: --threads must be positive\n".into(),
            }
        }
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                code: 3,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    pool.install(|| run_parsed(&cli))
}

fn run_parsed(cli: &Cli) -> Outcome {
    let fail = |e: Error| Outcome {
        code: exit_code(&e),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    };
    let enumeration = match enumeration_cap(cli.cap) {
        Ok(c) if c > 0 => c,
        Ok(_) => return fail(Error::Usage("caps must be positive".into())),
        Err(e) => return fail(e),
    };
    if cli.node_cap == Some(0) {
        return fail(Error::Usage("caps must be positive".into()));
    }
    let caps = Caps {
        enumeration,
        nodes: cli.node_cap,
        witnesses: cli.witness_cap,
    };
    if let Command::Enumerate { lattice, params } = &cli.command {
        return match cmd_enumerate(*lattice, params, &caps) {
            Ok(text) => finish(cli, text, 0, String::new()),
            Err(e) => fail(e),
        };
    }
    let start = Instant::now();
    let payload = match dispatch(&cli.command, &caps, cli.seed) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let elapsed = start.elapsed();
    let config = RunConfig {
        command: cli.command.clone(),
        enumeration_cap: caps.enumeration,
        node_cap: caps.nodes,
        witness_cap: caps.witnesses,
        seed: cli.seed,
    };
    let mut report = json!({
        "schema": SCHEMA,
        "tool": "qlattice",
        "version": env!("CARGO_PKG_VERSION"),
        "config": to_value(&config),
        "result": payload.result,
        "provenance": payload.provenance,
        "exit_code": payload.code,
    });
    if cli.timing {
        report["timing_ms"] = json!(elapsed.as_secs_f64() * 1000.0);
    }
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("json") + "\n",
        Format::Text => {
            let mut s = String::new();
            render_text(&report, 0, &mut s);
            s
        }
        Format::Csv => match render_csv(&report["result"]) {
            Ok(s) => s,
            Err(e) => return fail(e),
        },
    };
    finish(cli, body, payload.code, String::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_json(args: &[&str]) -> (i32, Value) {
        let mut v = vec!["qlattice"];
        v.extend_from_slice(args);
        let out = run(v);
        assert!(out.stdout.len() > 0, "stderr: {}", out.stderr);
        (out.code, serde_json::from_str(&out.stdout).unwrap())
    }

    #[test]
    fn bound_examples() {
        for (args, want) in [
            (vec!["bound", "thm1.12", "q=2", "n=5", "k=2"], "16"),
            (vec!["bound", "ekr-q", "q=2", "n=5", "k=2"], "15"),
            (vec!["bound", "fw", "n=4", "s=1"], "5"),
        ] {
            let (code, v) = run_json(&args);
            assert_eq!(code, 0);
            assert_eq!(v["result"]["bound"]["value"], want);
            assert_eq!(v["schema"], SCHEMA);
        }
    }

    #[test]
    fn usage_errors_exit_3() {
        assert_eq!(run(["qlattice", "bound", "nope", "n=1"]).code, 3);
        assert_eq!(run(["qlattice", "frobnicate"]).code, 3);
        assert_eq!(run(["qlattice", "search", "sets", "n=4", "--property", "intersecting"]).code, 3);
        assert_eq!(run(["qlattice", "search", "sets", "n=4", "k=2", "k=3", "--property", "sperner"]).code, 3);
    }

    #[test]
    fn search_examples() {
        let (code, v) = run_json(&[
            "search", "subspaces", "q=2", "n=5", "k=2", "--property", "intersecting", "--compare", "ekr-q",
        ]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["search"]["max_size"], 15);
        assert_eq!(v["result"]["comparison"]["relation"], "tight");
        assert_eq!(v["result"]["comparison"]["equality"]["unexpected"], json!([]));

        let (_, v) = run_json(&["search", "sets", "n=6", "k=2", "--property", "matching<=2", "--compare", "emc"]);
        assert_eq!(v["result"]["search"]["max_size"], 10);
        assert_eq!(v["result"]["comparison"]["bound"]["value"], "10");

        let (_, v) = run_json(&[
            "search", "subspaces", "q=2", "n=4", "dims=1..2", "--property", "intersecting+k-sperner:2", "--compare",
            "thm1.12",
        ]);
        assert_eq!(v["result"]["search"]["max_size"], 8);
        assert_eq!(v["result"]["comparison"]["relation"], "tight");
    }

    #[test]
    fn node_cap_exits_2() {
        let out = run(["qlattice", "--node-cap", "2", "search", "sets", "n=6", "k=3", "--property", "intersecting"]);
        assert_eq!(out.code, 2);
    }

    #[test]
    fn audit_thresholds_conjecture() {
        let (code, v) = run_json(&["audit-covering", "q=2", "n=3"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["audit"]["alpha"], "28");
        assert_eq!(v["result"]["passes"], true);

        let (code, v) = run_json(&["thresholds", "k=1", "eps=1", "q=2"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["sets"]["n0"], 4);

        let (_, v) = run_json(&["conjecture", "5.2", "q=2", "n=4..5", "k=2", "s=1..2"]);
        let rows = v["result"]["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0]["search_max"], 7);
        assert_eq!(rows[0]["status"], "consistent-tight");
    }

    #[test]
    fn check_and_decompose_files() {
        let dir = tempfile::tempdir().unwrap();
        let star = dir.path().join("star.fam");
        let out = run([
            "qlattice", "--output", star.to_str().unwrap(), "enumerate", "subspaces", "q=2", "n=5", "dims=1..2",
            "center=10000",
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let text = std::fs::read_to_string(&star).unwrap();
        assert_eq!(parse_family(&text).unwrap().len(), 16);

        let (code, v) = run_json(&["check", star.to_str().unwrap(), "--property", "k-sperner:2"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["lym"]["sum"], "2");
        let (code, v) = run_json(&["check", star.to_str().unwrap(), "--property", "sperner"]);
        assert_eq!(code, 1);
        assert_eq!(v["result"]["witness"].as_array().unwrap().len(), 2);
        let (_, v) = run_json(&["decompose", star.to_str().unwrap()]);
        assert_eq!(v["result"]["parts"], 2);

        let bad = dir.path().join("bad.fam");
        std::fs::write(&bad, "qlattice-family v1 kind=subsets q=- n=3\n101\n11\n").unwrap();
        let out = run(["qlattice", "check", bad.to_str().unwrap(), "--property", "sperner"]);
        assert_eq!(out.code, 3);
        assert!(out.stderr.contains("line 3"), "{}", out.stderr);
    }

    #[test]
    fn replay_reproduces_reports() {
        let dir = tempfile::tempdir().unwrap();
        let rep = dir.path().join("r.json");
        for args in [
            vec!["search", "sets", "n=5", "k=2", "--property", "intersecting", "--compare", "ekr"],
            vec!["thresholds", "k=2", "eps=1/2", "q=3"],
        ] {
            let mut argv = vec!["qlattice", "--seed", "7", "--timing", "-o", rep.to_str().unwrap()];
            argv.extend(args);
            assert_eq!(run(argv).code, 0);
            let (code, v) = run_json(&["replay", rep.to_str().unwrap()]);
            assert_eq!(code, 0);
            assert_eq!(v["result"]["reproduced"], true);
        }
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
        v["result"]["all_ok"] = json!(false);
        std::fs::write(&rep, v.to_string()).unwrap();
        assert_eq!(run(["qlattice", "replay", rep.to_str().unwrap()]).code, 1);
    }

    #[test]
    fn formats_and_threads() {
        let args = ["search", "sets", "n=5", "k=2", "--property", "intersecting"];
        let one = run(["qlattice", "--threads", "1"].iter().chain(&args));
        let many = run(["qlattice", "--threads", "4"].iter().chain(&args));
        assert_eq!(one, many);
        let text = run(["qlattice", "--format", "text"].iter().chain(&args));
        assert!(text.stdout.contains("max_size: 4"));
        let csv = run(["qlattice", "--format", "csv", "conjecture", "1.15", "n=6", "k=2", "s=1..2"]);
        assert_eq!(csv.code, 0, "{}", csv.stderr);
        assert_eq!(csv.stdout.lines().count(), 3);
    }
}
