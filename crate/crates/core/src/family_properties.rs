//! Decision procedures for hereditary family properties, written once over
//! [`LatticeElement`] so they serve both lattices.
//!
//! A [`PropertySpec`] is a conjunction of [`Property`] terms with a canonical
//! string form:
//!
//! ```
//! use qlattice::family_properties::PropertySpec;
//! let spec: PropertySpec = "intersecting+k-sperner:2".parse().unwrap();
//! assert_eq!(spec.to_string(), "intersecting+k-sperner:2");
//! ```
//!
//! Witnesses are always listed in canonical element order, and among several
//! violations the one that comes first in canonical order is reported.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bitset::{first_clique_of_size, max_clique, BitSet};
use crate::error::{Error, Result};
use crate::subspace_lattice::{join_all, meet_all, Family, LatticeElement};

/// Largest family [`matching_number`] accepts.
pub const MATCHING_FAMILY_CAP: usize = 20_000;

/// One hereditary property.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    /// Every two members meet nontrivially.
    Intersecting,
    /// Every two members meet in rank at least `t`.
    TIntersecting(usize),
    /// Every pairwise meet rank lies in `L` (strictly increasing).
    LIntersecting(Vec<usize>),
    /// No member contains another.
    Sperner,
    /// No chain of `k + 1` members.
    KSperner(usize),
    IntersectingKSperner(usize),
    /// Matching number at most `s`.
    MatchingAtMost(usize),
    NoDSimplex(usize),
    NoDCluster(usize),
    NoDSimplexCluster(usize),
    /// No `d + 1` pairwise intersecting members with trivial common meet.
    NoNontrivialIntersecting(usize),
    /// Every member rank lies in the set.
    UniformDim(Vec<usize>),
}

fn list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Intersecting => write!(f, "intersecting"),
            Property::TIntersecting(t) => write!(f, "t-intersecting:{t}"),
            Property::LIntersecting(l) => write!(f, "l-intersecting:{}", list(l)),
            Property::Sperner => write!(f, "sperner"),
            Property::KSperner(k) => write!(f, "k-sperner:{k}"),
            Property::IntersectingKSperner(k) => write!(f, "intersecting-k-sperner:{k}"),
            Property::MatchingAtMost(s) => write!(f, "matching<={s}"),
            Property::NoDSimplex(d) => write!(f, "no-simplex:d={d}"),
            Property::NoDCluster(d) => write!(f, "no-cluster:d={d}"),
            Property::NoDSimplexCluster(d) => write!(f, "no-simplex-cluster:d={d}"),
            Property::NoNontrivialIntersecting(d) => write!(f, "no-nontrivial-intersecting:d={d}"),
            Property::UniformDim(k) => write!(f, "uniform:{}", list(k)),
        }
    }
}

fn parse_usize(s: &str, term: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("bad number `{s}` in property `{term}`")))
}

fn parse_usize_list(s: &str, term: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_usize(x, term)).collect()
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(term: &str) -> Result<Property> {
        let term = term.trim();
        if let Some(s) = term.strip_prefix("matching<=") {
            return Ok(Property::MatchingAtMost(parse_usize(s, term)?));
        }
        let (head, arg) = match term.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (term, None),
        };
        let need = || arg.ok_or_else(|| Error::Usage(format!("property `{head}` needs an argument")));
        let d_arg = || -> Result<usize> {
            let a = need()?;
            parse_usize(a.strip_prefix("d=").unwrap_or(a), term)
        };
        let p = match head {
            "intersecting" => Property::Intersecting,
            "sperner" => Property::Sperner,
            "t-intersecting" => Property::TIntersecting(parse_usize(need()?, term)?),
            "l-intersecting" => Property::LIntersecting(parse_usize_list(need()?, term)?),
            "k-sperner" => Property::KSperner(parse_usize(need()?, term)?),
            "intersecting-k-sperner" => Property::IntersectingKSperner(parse_usize(need()?, term)?),
            "no-simplex" => Property::NoDSimplex(d_arg()?),
            "no-cluster" => Property::NoDCluster(d_arg()?),
            "no-simplex-cluster" => Property::NoDSimplexCluster(d_arg()?),
            "no-nontrivial-intersecting" => Property::NoNontrivialIntersecting(d_arg()?),
            "uniform" => Property::UniformDim(parse_usize_list(need()?, term)?),
            _ => return Err(Error::Usage(format!("unknown property `{term}`"))),
        };
        if arg.is_some() && matches!(p, Property::Intersecting | Property::Sperner) {
            return Err(Error::Usage(format!("property `{head}` takes no argument")));
        }
        Ok(p)
    }
}

impl Property {
    /// Whether the property is decided by looking at pairs alone.
    pub fn is_pairwise(&self) -> bool {
        matches!(
            self,
            Property::Intersecting
                | Property::TIntersecting(_)
                | Property::LIntersecting(_)
                | Property::Sperner
                | Property::KSperner(1)
                | Property::IntersectingKSperner(1)
                | Property::MatchingAtMost(1)
                | Property::UniformDim(_)
        )
    }

    /// Checks parameter well-formedness.
    pub fn validate(&self) -> Result<()> {
        match self {
            Property::LIntersecting(l) if l.windows(2).any(|w| w[0] >= w[1]) => Err(Error::ParameterMismatch(
                format!("L must be strictly increasing, got {}", list(l)),
            )),
            Property::KSperner(0) | Property::IntersectingKSperner(0) => {
                Err(Error::ParameterMismatch("k-Sperner needs k >= 1".into()))
            }
            Property::NoDSimplex(0) | Property::NoDCluster(0) | Property::NoDSimplexCluster(0) => {
                Err(Error::ParameterMismatch("configurations need d >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A conjunction of properties.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PropertySpec {
    pub conjuncts: Vec<Property>,
}

impl PropertySpec {
    pub fn new(conjuncts: Vec<Property>) -> Self {
        PropertySpec { conjuncts }
    }

    pub fn single(p: Property) -> Self {
        PropertySpec { conjuncts: vec![p] }
    }

    pub fn and(mut self, p: Property) -> Self {
        self.conjuncts.push(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.conjuncts.iter().try_for_each(|c| c.validate())
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for PropertySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<PropertySpec> {
        let conjuncts = s
            .split('+')
            .filter(|t| !t.trim().is_empty())
            .map(Property::from_str)
            .collect::<Result<Vec<_>>>()?;
        if conjuncts.is_empty() {
            return Err(Error::Usage("empty property".into()));
        }
        let spec = PropertySpec { conjuncts };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for PropertySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The offending members of a failed check, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation<E> {
    pub property: String,
    pub reason: String,
    pub members: Vec<E>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<E> {
    Holds,
    Violated(Violation<E>),
}

impl<E> Verdict<E> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport<E> {
    pub verdict: Verdict<E>,
    /// Notes on degenerate parameters; never a failure by themselves.
    pub advisories: Vec<String>,
}

impl<E> CheckReport<E> {
    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

fn sorted<E: LatticeElement>(mut v: Vec<E>) -> Vec<E> {
    v.sort();
    v
}

fn violated<E: LatticeElement>(p: &Property, reason: String, members: Vec<E>) -> Verdict<E> {
    Verdict::Violated(Violation {
        property: p.to_string(),
        reason,
        members: sorted(members),
    })
}

/// First unordered pair `(i, j)`, `i < j`, failing `ok`.
fn first_bad_pair<E>(els: &[E], ok: impl Fn(&E, &E) -> bool) -> Option<(usize, usize)> {
    for i in 0..els.len() {
        for j in i + 1..els.len() {
            if !ok(&els[i], &els[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

fn pair_verdict<E: LatticeElement>(
    p: &Property,
    els: &[E],
    ok: impl Fn(&E, &E) -> bool,
    reason: impl Fn(&E, &E) -> String,
) -> Verdict<E> {
    match first_bad_pair(els, ok) {
        None => Verdict::Holds,
        Some((i, j)) => violated(p, reason(&els[i], &els[j]), vec![els[i].clone(), els[j].clone()]),
    }
}

fn uniform_rank<E: LatticeElement>(fam: &Family<E>) -> Result<Option<usize>> {
    if fam.is_empty() {
        return Ok(None);
    }
    fam.uniform_rank()
        .map(Some)
        .ok_or_else(|| Error::NotUniform(format!("profile {:?}", fam.profile().counts)))
}

/// A longest chain `c_1 < c_2 < ...` of members, ordered by containment.
/// Among longest chains the one found first in canonical order is returned.
pub fn longest_chain<E: LatticeElement>(els: &[E]) -> Vec<E> {
    let m = els.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| els[i].rank());
    let mut len = vec![1usize; m];
    let mut prev = vec![usize::MAX; m];
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[..a] {
            if els[j].rank() < els[i].rank() && len[j] + 1 > len[i] && els[i].contains(&els[j]) {
                len[i] = len[j] + 1;
                prev[i] = j;
            }
        }
    }
    let top = (0..m).max_by_key(|&i| (len[i], std::cmp::Reverse(i))).expect("nonempty");
    let mut chain = vec![els[top].clone()];
    let mut cur = top;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        chain.push(els[cur].clone());
    }
    chain.reverse();
    chain
}

fn disjointness_graph<E: LatticeElement>(els: &[E]) -> Vec<BitSet> {
    let m = els.len();
    let mut adj = vec![BitSet::new(m); m];
    for i in 0..m {
        for j in i + 1..m {
            if els[i].is_disjoint(&els[j]) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    adj
}

/// A maximum matching (pairwise disjoint members), in canonical order.
pub fn maximum_matching<E: LatticeElement>(fam: &Family<E>) -> Result<Vec<E>> {
    if fam.len() > MATCHING_FAMILY_CAP {
        return Err(Error::CapExceeded {
            count: fam.len().to_string(),
            cap: MATCHING_FAMILY_CAP as u64,
        });
    }
    let els = fam.elements();
    let res = max_clique(&disjointness_graph(els), None);
    Ok(res.clique.into_iter().map(|i| els[i].clone()).collect())
}

/// The matching number `ν`: the size of a largest matching.
pub fn matching_number<E: LatticeElement>(fam: &Family<E>) -> Result<usize> {
    Ok(maximum_matching(fam)?.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigKind {
    Simplex,
    Cluster,
    SimplexCluster,
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfigKind::Simplex => "simplex",
            ConfigKind::Cluster => "cluster",
            ConfigKind::SimplexCluster => "simplex-cluster",
        })
    }
}

impl ConfigKind {
    fn needs_simplex(self) -> bool {
        matches!(self, ConfigKind::Simplex | ConfigKind::SimplexCluster)
    }

    fn needs_cluster(self) -> bool {
        matches!(self, ConfigKind::Cluster | ConfigKind::SimplexCluster)
    }
}

/// Whether the members form a `(len-1)`-simplex: trivial common meet, but
/// every choice of all but one member meets nontrivially.
pub fn is_simplex<E: LatticeElement>(members: &[E]) -> bool {
    if members.len() < 2 {
        return false;
    }
    if meet_all(members).expect("nonempty").rank() != 0 {
        return false;
    }
    (0..members.len()).all(|skip| {
        let rest = members.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, e)| e);
        meet_all(rest).expect("nonempty").rank() > 0
    })
}

/// Whether the members form a cluster for uniform rank `k`: trivial common
/// meet and join of rank at most `2k`.
pub fn is_cluster<E: LatticeElement>(members: &[E], k: usize) -> bool {
    !members.is_empty()
        && meet_all(members).expect("nonempty").rank() == 0
        && join_all(members).expect("nonempty").rank() <= 2 * k
}

pub fn is_configuration<E: LatticeElement>(kind: ConfigKind, members: &[E], k: usize) -> bool {
    (!kind.needs_simplex() || is_simplex(members)) && (!kind.needs_cluster() || is_cluster(members, k))
}

/// Result of a configuration search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigSearch<E> {
    pub witness: Option<Vec<E>>,
    pub advisories: Vec<String>,
}

fn config_advisories(d: usize, k: Option<usize>, m: usize) -> Vec<String> {
    let mut adv = Vec::new();
    if d + 1 > m {
        adv.push(format!("family has {m} members, fewer than d+1 = {}", d + 1));
    }
    if d + 1 < 3 {
        adv.push(format!("d+1 = {} is below 3", d + 1));
    }
    if let Some(k) = k {
        if k < d + 1 {
            adv.push(format!("member rank k = {k} is below d+1 = {}", d + 1));
        }
    }
    adv
}

/// Searches `(d+1)`-tuples of members in canonical order for a
/// configuration of the given kind. Partial tuples are pruned as soon as
/// they cannot extend: for simplices any `m <= d` members must meet
/// nontrivially, for clusters the join rank must stay within `2k`.
pub fn find_simplex_configuration<E: LatticeElement>(
    kind: ConfigKind,
    d: usize,
    fam: &Family<E>,
) -> Result<ConfigSearch<E>> {
    if d == 0 {
        return Err(Error::ParameterMismatch("configurations need d >= 1".into()));
    }
    let k = uniform_rank(fam)?;
    let advisories = config_advisories(d, k, fam.len());
    let Some(k) = k else {
        return Ok(ConfigSearch {
            witness: None,
            advisories,
        });
    };
    let els = fam.elements();
    let size = d + 1;
    let mut idx: Vec<usize> = Vec::with_capacity(size);
    let mut meets: Vec<E> = Vec::with_capacity(size);
    let mut joins: Vec<E> = Vec::with_capacity(size);
    let witness = config_dfs(kind, k, els, size, 0, &mut idx, &mut meets, &mut joins);
    Ok(ConfigSearch {
        witness: witness.map(|ix| sorted(ix.into_iter().map(|i| els[i].clone()).collect())),
        advisories,
    })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn config_dfs<E: LatticeElement>(
    kind: ConfigKind,
    k: usize,
    els: &[E],
    size: usize,
    from: usize,
    idx: &mut Vec<usize>,
    meets: &mut Vec<E>,
    joins: &mut Vec<E>,
) -> Option<Vec<usize>> {
    if idx.len() == size {
        let members: Vec<E> = idx.iter().map(|&i| els[i].clone()).collect();
        return is_configuration(kind, &members, k).then(|| idx.clone());
    }
    for i in from..els.len() {
        if els.len() - i < size - idx.len() {
            break;
        }
        let meet = match meets.last() {
            Some(m) => m.meet(&els[i]),
            None => els[i].clone(),
        };
        let join = match joins.last() {
            Some(j) => j.join(&els[i]),
            None => els[i].clone(),
        };
        let depth = idx.len() + 1;
        if kind.needs_simplex() && depth < size && meet.rank() == 0 {
            continue;
        }
        if kind.needs_cluster() && join.rank() > 2 * k {
            continue;
        }
        if depth == size && meet.rank() != 0 {
            continue;
        }
        idx.push(i);
        meets.push(meet);
        joins.push(join);
        if let Some(w) = config_dfs(kind, k, els, size, i + 1, idx, meets, joins) {
            return Some(w);
        }
        idx.pop();
        meets.pop();
        joins.pop();
    }
    None
}

/// Whether `v` together with some `d` members of `pool` forms a
/// configuration; the incremental test used by the search.
pub(crate) fn completes_configuration<E: LatticeElement>(kind: ConfigKind, d: usize, k: usize, v: &E, pool: &[E]) -> bool {
    if pool.len() < d || (kind.needs_cluster() && v.rank() > 2 * k) {
        return false;
    }
    let mut els = Vec::with_capacity(pool.len() + 1);
    els.push(v.clone());
    els.extend(pool.iter().cloned());
    let mut idx = vec![0];
    let mut meets = vec![v.clone()];
    let mut joins = vec![v.clone()];
    config_dfs(kind, k, &els, d + 1, 1, &mut idx, &mut meets, &mut joins).is_some()
}

/// Whether `v` together with `size - 1` members of `pool` is pairwise
/// intersecting with trivial common meet.
pub(crate) fn completes_nontrivial<E: LatticeElement>(size: usize, v: &E, pool: &[E]) -> bool {
    let cands: Vec<&E> = pool.iter().filter(|e| !e.is_disjoint(v)).collect();
    fn rec<E: LatticeElement>(cands: &[&E], from: usize, chosen: &mut Vec<usize>, meet: &E, need: usize) -> bool {
        if chosen.len() == need {
            return meet.rank() == 0;
        }
        for i in from..cands.len() {
            if cands.len() - i < need - chosen.len() {
                break;
            }
            if chosen.iter().any(|&j| cands[j].is_disjoint(cands[i])) {
                continue;
            }
            chosen.push(i);
            if rec(cands, i + 1, chosen, &meet.meet(cands[i]), need) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    size >= 2 && rec(&cands, 0, &mut Vec::new(), v, size - 1)
}

/// Looks for `size` pairwise intersecting members whose common meet is
/// trivial.
pub fn has_nontrivial_intersecting_subfamily<E: LatticeElement>(
    fam: &Family<E>,
    size: usize,
) -> Result<ConfigSearch<E>> {
    let k = uniform_rank(fam)?;
    let mut advisories = Vec::new();
    if size > fam.len() {
        advisories.push(format!("family has {} members, fewer than {size}", fam.len()));
    }
    if size < 2 {
        advisories.push(format!("subfamily size {size} is below 2; no such subfamily can exist"));
    }
    if k.is_none() || size < 2 || size > fam.len() {
        return Ok(ConfigSearch {
            witness: None,
            advisories,
        });
    }
    let els = fam.elements();
    let m = els.len();
    let mut adj = vec![BitSet::new(m); m];
    for i in 0..m {
        for j in i + 1..m {
            if !els[i].is_disjoint(&els[j]) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    fn rec<E: LatticeElement>(
        els: &[E],
        adj: &[BitSet],
        cand: &BitSet,
        meet: Option<&E>,
        cur: &mut Vec<usize>,
        size: usize,
    ) -> bool {
        if cur.len() == size {
            return meet.is_some_and(|m| m.rank() == 0);
        }
        if cur.len() + cand.count() < size {
            return false;
        }
        for v in cand.iter() {
            let mut next = cand.and(&adj[v]);
            next.clear_below(v + 1);
            let nm = match meet {
                Some(m) => m.meet(&els[v]),
                None => els[v].clone(),
            };
            cur.push(v);
            if rec(els, adj, &next, Some(&nm), cur, size) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let mut cur = Vec::new();
    let found = rec(els, &adj, &BitSet::full(m), None, &mut cur, size);
    Ok(ConfigSearch {
        witness: found.then(|| sorted(cur.into_iter().map(|i| els[i].clone()).collect())),
        advisories,
    })
}

/// Pairwise disjoint representatives `(F_1, ..., F_m)`, `F_i` from
/// `fams[i]`, if they exist. Families are tried in ascending size order,
/// members in canonical order; the answer is listed in the input order.
pub fn rainbow_disjoint_transversal<E: LatticeElement>(fams: &[Family<E>]) -> Result<Option<Vec<E>>> {
    if let Some(first) = fams.first() {
        if fams.iter().any(|f| f.ambient() != first.ambient()) {
            return Err(Error::AmbientMismatch("rainbow families live in different ambients".into()));
        }
    }
    let mut order: Vec<usize> = (0..fams.len()).collect();
    order.sort_by_key(|&i| fams[i].len());
    fn rec<E: LatticeElement>(fams: &[Family<E>], order: &[usize], chosen: &mut Vec<E>) -> bool {
        let Some(&fi) = order.get(chosen.len()) else {
            return true;
        };
        for e in fams[fi].elements() {
            if chosen.iter().all(|c| c.is_disjoint(e)) {
                chosen.push(e.clone());
                if rec(fams, order, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if !rec(fams, &order, &mut chosen) {
        return Ok(None);
    }
    let mut out = vec![None; fams.len()];
    for (slot, e) in order.iter().zip(chosen) {
        out[*slot] = Some(e);
    }
    Ok(Some(out.into_iter().map(|e| e.expect("filled")).collect()))
}

fn check_one<E: LatticeElement>(p: &Property, fam: &Family<E>, advisories: &mut Vec<String>) -> Result<Verdict<E>> {
    p.validate()?;
    let els = fam.elements();
    let uniform = fam.uniform_rank();
    Ok(match p {
        Property::Intersecting => pair_verdict(p, els, |a, b| !a.is_disjoint(b), |_, _| "members meet trivially".into()),
        Property::TIntersecting(t) => {
            if *t == 0 {
                advisories.push("t = 0 holds for every family".into());
            }
            pair_verdict(
                p,
                els,
                |a, b| a.meet_rank(b) >= *t,
                |a, b| format!("meet rank {} < {t}", a.meet_rank(b)),
            )
        }
        Property::LIntersecting(l) => {
            if let Some(k) = uniform {
                let high: Vec<usize> = l.iter().copied().filter(|&x| x >= k).collect();
                if !high.is_empty() {
                    return Err(Error::ParameterMismatch(format!(
                        "L entries {} are not below the uniform rank {k}",
                        list(&high)
                    )));
                }
            }
            pair_verdict(
                p,
                els,
                |a, b| l.contains(&a.meet_rank(b)),
                |a, b| format!("meet rank {} not in L", a.meet_rank(b)),
            )
        }
        Property::Sperner | Property::KSperner(_) => {
            let k = if let Property::KSperner(k) = p { *k } else { 1 };
            let chain = longest_chain(els);
            if chain.len() > k {
                violated(p, format!("chain of {} members", k + 1), chain[..k + 1].to_vec())
            } else {
                Verdict::Holds
            }
        }
        Property::IntersectingKSperner(k) => {
            match check_one(&Property::Intersecting, fam, advisories)? {
                Verdict::Holds => {}
                Verdict::Violated(mut v) => {
                    v.property = p.to_string();
                    return Ok(Verdict::Violated(v));
                }
            }
            match check_one(&Property::KSperner(*k), fam, advisories)? {
                Verdict::Violated(mut v) => {
                    v.property = p.to_string();
                    Verdict::Violated(v)
                }
                Verdict::Holds => Verdict::Holds,
            }
        }
        Property::MatchingAtMost(s) => {
            if fam.len() > MATCHING_FAMILY_CAP {
                return Err(Error::CapExceeded {
                    count: fam.len().to_string(),
                    cap: MATCHING_FAMILY_CAP as u64,
                });
            }
            let adj = disjointness_graph(els);
            match first_clique_of_size(&adj, s + 1) {
                None => Verdict::Holds,
                Some(ix) => violated(
                    p,
                    format!("matching of size {}", s + 1),
                    ix.into_iter().map(|i| els[i].clone()).collect(),
                ),
            }
        }
        Property::NoDSimplex(d) | Property::NoDCluster(d) | Property::NoDSimplexCluster(d) => {
            let kind = match p {
                Property::NoDSimplex(_) => ConfigKind::Simplex,
                Property::NoDCluster(_) => ConfigKind::Cluster,
                _ => ConfigKind::SimplexCluster,
            };
            let res = find_simplex_configuration(kind, *d, fam)?;
            advisories.extend(res.advisories);
            match res.witness {
                None => Verdict::Holds,
                Some(w) => violated(p, format!("{d}-{kind}"), w),
            }
        }
        Property::NoNontrivialIntersecting(d) => {
            let res = has_nontrivial_intersecting_subfamily(fam, d + 1)?;
            advisories.extend(res.advisories);
            match res.witness {
                None => Verdict::Holds,
                Some(w) => violated(p, format!("non-trivial intersecting subfamily of size {}", d + 1), w),
            }
        }
        Property::UniformDim(ks) => match els.iter().find(|e| !ks.contains(&e.rank())) {
            None => Verdict::Holds,
            Some(e) => violated(p, format!("rank {} not allowed", e.rank()), vec![e.clone()]),
        },
    })
}

/// Checks every conjunct in order; the first failing one supplies the
/// witness.
pub fn check<E: LatticeElement>(spec: &PropertySpec, fam: &Family<E>) -> Result<CheckReport<E>> {
    spec.validate()?;
    let mut advisories = Vec::new();
    for p in &spec.conjuncts {
        let v = check_one(p, fam, &mut advisories)?;
        if !v.holds() {
            return Ok(CheckReport {
                verdict: v,
                advisories,
            });
        }
    }
    Ok(CheckReport {
        verdict: Verdict::Holds,
        advisories,
    })
}
