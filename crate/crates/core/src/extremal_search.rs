//! Exact maximum families under a hereditary [`PropertySpec`], extremal
//! constructions, and equality-case classification.
//!
//! The search is a canonical set-extension backtrack. Pairwise conjuncts
//! become a compatibility graph, so the core is a maximum-clique search with
//! a greedy-colouring bound. Conjuncts that are not pairwise (chains longer
//! than one, matchings of size two or more, configurations) are checked
//! incrementally: each candidate is tested against the chosen members, and
//! since the properties are hereditary a candidate that fails once is dropped
//! from the whole subtree. For chain conditions the LYM inequality gives an
//! extra bound.
//!
//! Determinism: the root branches run in fixed-size chunks. Every branch in
//! a chunk sees the best size known when the chunk started, so the explored
//! tree (and the node count) does not depend on the thread count.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::{colour_sort, first_clique_within, BitSet};
use crate::error::{Error, Result};
use crate::family_properties::{check, completes_configuration, completes_nontrivial, ConfigKind, Property, PropertySpec};
use crate::qcombinatorics::{middle_levels, theorem_bound, BoundParams, BoundResult, TheoremId};
use crate::subspace_lattice::{
    enumerate_subsets, enumerate_subspaces_capped, meet_all, Ambient, Family, LatticeElement, SubsetHandle,
    SubspaceHandle, DEFAULT_ENUMERATION_CAP,
};

/// Default number of maximum families kept per search.
pub const DEFAULT_WITNESS_CAP: usize = 100;
/// Largest ground set the search accepts.
pub const DEFAULT_GROUND_CAP: u64 = 20_000;
/// Root branches per deterministic parallel round.
const ROOT_CHUNK: usize = 32;

/// Lattice elements whose levels can be listed.
pub trait GroundElement: LatticeElement {
    /// All rank-`k` elements of `ambient`, in canonical order.
    fn level_elements(ambient: &Ambient, k: usize, cap: u64) -> Result<Vec<Self>>;
}

impl GroundElement for SubsetHandle {
    fn level_elements(ambient: &Ambient, k: usize, cap: u64) -> Result<Vec<Self>> {
        let Ambient::Sets { n } = ambient else {
            return Err(Error::AmbientMismatch("subsets need a set ambient".into()));
        };
        let size = ambient.level_size(k);
        if size > BigUint::from(cap) {
            return Err(Error::CapExceeded {
                count: size.to_string(),
                cap,
            });
        }
        let mut v: Vec<_> = enumerate_subsets(*n, k)?.collect();
        v.sort();
        Ok(v)
    }
}

impl GroundElement for SubspaceHandle {
    fn level_elements(ambient: &Ambient, k: usize, cap: u64) -> Result<Vec<Self>> {
        let Ambient::Subspaces { field, n } = ambient else {
            return Err(Error::AmbientMismatch("subspaces need a subspace ambient".into()));
        };
        if k > *n {
            return Err(Error::RangeError(format!("dimension {k} exceeds ambient {n}")));
        }
        let mut v: Vec<_> = enumerate_subspaces_capped(field, *n, k, cap)?.collect();
        v.sort();
        Ok(v)
    }
}

/// The union of the given full levels of `ambient`.
pub fn ground<E: GroundElement>(ambient: &Ambient, ranks: impl IntoIterator<Item = usize>, cap: u64) -> Result<Family<E>> {
    let ranks: BTreeSet<usize> = ranks.into_iter().collect();
    if let Some(&r) = ranks.iter().find(|&&r| r > ambient.n()) {
        return Err(Error::RangeError(format!("rank {r} exceeds n={}", ambient.n())));
    }
    let total: BigUint = ranks.iter().map(|&r| ambient.level_size(r)).sum();
    if total > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: total.to_string(),
            cap,
        });
    }
    let mut els = Vec::new();
    for r in ranks {
        els.extend(E::level_elements(ambient, r, cap)?);
    }
    Family::new(ambient.clone(), els)
}

/// The star `L_{n,k}[R]`: rank-`k` elements containing `center`.
pub fn build_star<E: GroundElement>(ambient: &Ambient, k: usize, center: &E) -> Result<Family<E>> {
    build_star_levels(ambient, [k], center)
}

/// The union of the stars of `center` at the given ranks.
pub fn build_star_levels<E: GroundElement>(
    ambient: &Ambient,
    ranks: impl IntoIterator<Item = usize>,
    center: &E,
) -> Result<Family<E>> {
    if center.ambient() != *ambient {
        return Err(Error::AmbientMismatch("center lies in another ambient".into()));
    }
    let mut els = Vec::new();
    for k in ranks {
        if center.rank() > k {
            return Err(Error::CenterTooBig {
                center: center.rank(),
                k,
            });
        }
        els.extend(
            E::level_elements(ambient, k, DEFAULT_ENUMERATION_CAP)?
                .into_iter()
                .filter(|e| e.contains(center)),
        );
    }
    Family::new(ambient.clone(), els)
}

/// Which of the two middle-level unions to take when `n + k` is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Lower,
    Upper,
}

/// The union of the `k` middle levels: `Σ*(n,k)` or `Σ*[n,k]`.
pub fn build_full_levels<E: GroundElement>(ambient: &Ambient, k: usize, side: Side) -> Result<Family<E>> {
    let n = ambient.n();
    if k == 0 || k > n {
        return Err(Error::RangeError(format!("need 1 <= k <= n, got n={n} k={k}")));
    }
    let levels = middle_levels(n as u64, k as u64, side == Side::Upper)?;
    ground(ambient, levels.into_iter().map(|l| l as usize), DEFAULT_ENUMERATION_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchLimits {
    /// Abort after this many search nodes.
    pub node_cap: Option<u64>,
    /// Maximum families kept.
    pub witness_cap: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            node_cap: None,
            witness_cap: DEFAULT_WITNESS_CAP,
        }
    }
}

/// A maximum-family problem over an explicit ground family.
#[derive(Clone, Debug)]
pub struct SearchProblem<E> {
    pub ground: Family<E>,
    pub spec: PropertySpec,
    pub limits: SearchLimits,
    /// A proven upper bound. Once a family of this size is found and the
    /// witness list is full, the search stops early.
    pub bound_hint: Option<u64>,
    /// Fix the first chosen member to the first ground element. Only valid
    /// when the ground is one full level, on which the ambient symmetry
    /// group acts transitively.
    pub symmetry: bool,
    /// Count every maximum family. When off, branches that cannot beat the
    /// best size so far are pruned, which is much faster but leaves
    /// `witness_count` as a lower bound.
    pub count_maxima: bool,
}

impl<E: LatticeElement> SearchProblem<E> {
    pub fn new(ground: Family<E>, spec: PropertySpec) -> Self {
        SearchProblem {
            ground,
            spec,
            limits: SearchLimits::default(),
            bound_hint: None,
            symmetry: false,
            count_maxima: true,
        }
    }

    pub fn with_limits(mut self, limits: SearchLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_witness_cap(mut self, cap: usize) -> Self {
        self.limits.witness_cap = cap;
        self
    }

    pub fn with_node_cap(mut self, cap: u64) -> Self {
        self.limits.node_cap = Some(cap);
        self
    }

    pub fn with_bound_hint(mut self, bound: u64) -> Self {
        self.bound_hint = Some(bound);
        self
    }

    pub fn with_symmetry(mut self, on: bool) -> Self {
        self.symmetry = on;
        self
    }

    pub fn with_count_maxima(mut self, on: bool) -> Self {
        self.count_maxima = on;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct SearchResult<E: LatticeElement> {
    /// Size of the largest family found; exact when `proven_optimal`.
    pub max_size: u64,
    /// Maximum families, canonically sorted, at most the witness cap.
    pub witnesses: Vec<Family<E>>,
    /// How many maximum families the search met, including those not kept.
    pub witness_count: u64,
    pub nodes_explored: u64,
    pub proven_optimal: bool,
    pub symmetry_reduced: bool,
    /// The search stopped at the bound hint before counting every witness.
    pub stopped_at_hint: bool,
    /// Ties were counted, so `witness_count` is exact when optimal.
    pub maxima_counted: bool,
}

impl<E: LatticeElement> SearchResult<E> {
    /// Whether `witnesses` lists every maximum family.
    pub fn witnesses_complete(&self) -> bool {
        self.proven_optimal
            && self.maxima_counted
            && !self.symmetry_reduced
            && !self.stopped_at_hint
            && self.witness_count as usize == self.witnesses.len()
    }

    /// Fails with `ResourceExhausted` unless the search finished.
    pub fn require_optimal(&self) -> Result<&Self> {
        if self.proven_optimal {
            Ok(self)
        } else {
            Err(Error::ResourceExhausted(format!(
                "node cap hit after {} nodes; best found {}",
                self.nodes_explored, self.max_size
            )))
        }
    }
}

/// A conjunct that is not decided by pairs.
#[derive(Clone, Debug)]
enum Higher {
    Chain(usize),
    Matching(usize),
    Config(ConfigKind, usize, usize),
    Nontrivial(usize),
}

/// LYM data: an element of rank `i` weighs `unit / N_i`, with `N_i` the
/// level size, and a `k`-Sperner family weighs at most `k · unit`.
#[derive(Clone, Debug)]
struct Lym {
    weight: Vec<u128>,
    capacity: u128,
    rank_masks: Vec<(usize, BitSet)>,
}

struct Engine<'a, E> {
    els: &'a [E],
    adj: Vec<BitSet>,
    higher: Vec<Higher>,
    disjoint: Vec<BitSet>,
    /// Complement of `disjoint`, for matching-number bounds.
    meets: Vec<BitSet>,
    matching: Option<usize>,
    pairwise: bool,
    comparable: Vec<BitSet>,
    lym: Option<Lym>,
    witness_cap: usize,
    /// Prune ties as well as losers.
    strict: bool,
}

struct Branch {
    best: usize,
    witnesses: BTreeSet<Vec<usize>>,
    count: u64,
    nodes: u64,
    budget: u64,
    complete: bool,
}

impl Branch {
    fn new(floor: usize, budget: u64) -> Self {
        Branch {
            best: floor,
            witnesses: BTreeSet::new(),
            count: 0,
            nodes: 0,
            budget,
            complete: true,
        }
    }

    fn record(&mut self, chosen: &[usize], cap: usize) {
        if chosen.len() > self.best {
            self.best = chosen.len();
            self.witnesses.clear();
            self.count = 0;
        }
        if chosen.len() == self.best {
            self.count += 1;
            let mut w = chosen.to_vec();
            w.sort_unstable();
            self.witnesses.insert(w);
            if self.witnesses.len() > cap {
                self.witnesses.pop_last();
            }
        }
    }
}

fn lcm(a: u128, b: u128) -> Option<u128> {
    let g = num_integer::gcd(a, b);
    (a / g).checked_mul(b)
}

impl<'a, E: LatticeElement> Engine<'a, E> {
    fn build(
        els: &'a [E],
        ambient: &Ambient,
        spec: &PropertySpec,
        alive: &BitSet,
        witness_cap: usize,
        strict: bool,
    ) -> Result<Self> {
        let m = els.len();
        let ranks: BTreeSet<usize> = alive.iter().map(|i| els[i].rank()).collect();
        let uniform = (ranks.len() == 1).then(|| *ranks.iter().next().expect("one rank"));
        let mut higher = Vec::new();
        let mut pair: Vec<Property> = Vec::new();
        for p in &spec.conjuncts {
            match p {
                Property::UniformDim(_) => {}
                Property::KSperner(k) | Property::IntersectingKSperner(k) => {
                    if matches!(p, Property::IntersectingKSperner(_)) {
                        pair.push(Property::Intersecting);
                    }
                    if *k == 1 {
                        pair.push(Property::Sperner);
                    } else if ranks.len() > *k {
                        higher.push(Higher::Chain(*k));
                    }
                }
                Property::MatchingAtMost(s) if *s >= 2 => higher.push(Higher::Matching(*s)),
                Property::MatchingAtMost(_) => pair.push(Property::Intersecting),
                Property::NoDSimplex(d) | Property::NoDCluster(d) | Property::NoDSimplexCluster(d) => {
                    let k = if alive.is_empty() {
                        0
                    } else {
                        uniform.ok_or_else(|| Error::NotUniform(format!("ground ranks {ranks:?}")))?
                    };
                    let kind = match p {
                        Property::NoDSimplex(_) => ConfigKind::Simplex,
                        Property::NoDCluster(_) => ConfigKind::Cluster,
                        _ => ConfigKind::SimplexCluster,
                    };
                    higher.push(Higher::Config(kind, *d, k));
                }
                Property::NoNontrivialIntersecting(d) => {
                    if !alive.is_empty() && uniform.is_none() {
                        return Err(Error::NotUniform(format!("ground ranks {ranks:?}")));
                    }
                    higher.push(Higher::Nontrivial(d + 1));
                }
                Property::LIntersecting(l) => {
                    if let Some(k) = uniform {
                        if l.iter().any(|&x| x >= k) {
                            return Err(Error::ParameterMismatch(format!(
                                "L entries must lie below the uniform rank {k}"
                            )));
                        }
                    }
                    pair.push(p.clone());
                }
                _ => pair.push(p.clone()),
            }
        }
        let need_disjoint = higher.iter().any(|h| matches!(h, Higher::Matching(_)));
        let need_comparable = higher.iter().any(|h| matches!(h, Higher::Chain(_)));
        let rows: Vec<(BitSet, BitSet, BitSet)> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut a = BitSet::new(m);
                let mut dis = BitSet::new(if need_disjoint { m } else { 0 });
                let mut cmp = BitSet::new(if need_comparable { m } else { 0 });
                if !alive.contains(i) {
                    return (a, dis, cmp);
                }
                let (x, rx) = (&els[i], els[i].rank());
                for j in alive.iter() {
                    if j == i {
                        continue;
                    }
                    let (y, ry) = (&els[j], els[j].rank());
                    let r = x.meet_rank(y);
                    if need_disjoint && r == 0 {
                        dis.insert(j);
                    }
                    if need_comparable && r == rx.min(ry) {
                        cmp.insert(j);
                    }
                    let ok = pair.iter().all(|p| match p {
                        Property::Intersecting => r > 0,
                        Property::TIntersecting(t) => r >= *t,
                        Property::LIntersecting(l) => l.contains(&r),
                        Property::Sperner => r < rx.min(ry),
                        _ => unreachable!("not a pairwise conjunct"),
                    });
                    if ok {
                        a.insert(j);
                    }
                }
                (a, dis, cmp)
            })
            .collect();
        let mut adj = Vec::with_capacity(m);
        let mut disjoint = Vec::new();
        let mut comparable = Vec::new();
        for (a, d, c) in rows {
            adj.push(a);
            if need_disjoint {
                disjoint.push(d);
            }
            if need_comparable {
                comparable.push(c);
            }
        }
        let chain_k = higher.iter().find_map(|h| match h {
            Higher::Chain(k) => Some(*k),
            _ => None,
        });
        let lym = chain_k.and_then(|k| Self::lym(els, ambient, &ranks, alive, k));
        let matching = higher.iter().find_map(|h| match h {
            Higher::Matching(s) => Some(*s),
            _ => None,
        });
        let meets = disjoint
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mut row = alive.clone();
                row.difference_with(d);
                row.remove(i);
                row
            })
            .collect();
        Ok(Engine {
            els,
            adj,
            higher,
            disjoint,
            meets,
            matching,
            pairwise: !pair.is_empty(),
            comparable,
            lym,
            witness_cap,
            strict,
        })
    }

    fn lym(els: &[E], ambient: &Ambient, ranks: &BTreeSet<usize>, alive: &BitSet, k: usize) -> Option<Lym> {
        let sizes: Vec<(usize, u128)> = ranks
            .iter()
            .map(|&r| ambient.level_size(r).to_u128().map(|s| (r, s)))
            .collect::<Option<_>>()?;
        let unit = sizes.iter().try_fold(1u128, |acc, &(_, s)| lcm(acc, s))?;
        let capacity = unit.checked_mul(k as u128)?;
        let mut weight = vec![0u128; ambient.n() + 1];
        let mut rank_masks = Vec::new();
        for &(r, s) in &sizes {
            weight[r] = unit / s;
            let mut mask = BitSet::new(els.len());
            for i in alive.iter().filter(|&i| els[i].rank() == r) {
                mask.insert(i);
            }
            rank_masks.push((r, mask));
        }
        rank_masks.sort_by_key(|(r, _)| weight[*r]);
        Some(Lym {
            weight,
            capacity,
            rank_masks,
        })
    }

    /// Upper bound on how many members of `cand` can join `chosen`.
    fn lym_bound(&self, lym: &Lym, chosen: &[usize], cand: &BitSet) -> usize {
        let used: u128 = chosen.iter().map(|&i| lym.weight[self.els[i].rank()]).sum();
        let mut budget = lym.capacity.saturating_sub(used);
        let mut total = 0usize;
        for (r, mask) in &lym.rank_masks {
            let w = lym.weight[*r];
            let avail = cand.and_count(mask) as u128;
            let take = avail.min(budget / w);
            total += take as usize;
            budget -= take * w;
            if take < avail {
                break;
            }
        }
        total
    }

    fn longest_chain_in(&self, set: &[usize]) -> usize {
        let mut order = set.to_vec();
        order.sort_by_key(|&i| self.els[i].rank());
        let mut len = vec![1usize; order.len()];
        for a in 0..order.len() {
            for b in 0..a {
                let (i, j) = (order[a], order[b]);
                if self.els[j].rank() < self.els[i].rank() && self.comparable[i].contains(j) {
                    len[a] = len[a].max(len[b] + 1);
                }
            }
        }
        len.into_iter().max().unwrap_or(0)
    }

    /// Whether `chosen ∪ {v}` still satisfies every non-pairwise conjunct,
    /// given that `chosen` does.
    fn can_add(&self, chosen: &[usize], chosen_set: &BitSet, v: usize) -> bool {
        let x = &self.els[v];
        self.higher.iter().all(|h| match h {
            Higher::Chain(k) => {
                let rv = x.rank();
                let (mut below, mut above) = (Vec::new(), Vec::new());
                for &c in chosen {
                    if self.comparable[v].contains(c) {
                        if self.els[c].rank() < rv {
                            below.push(c);
                        } else {
                            above.push(c);
                        }
                    }
                }
                self.longest_chain_in(&below) + 1 + self.longest_chain_in(&above) <= *k
            }
            Higher::Matching(s) => {
                let pool = chosen_set.and(&self.disjoint[v]);
                pool.count() < *s || first_clique_within(&self.disjoint, &pool, *s).is_none()
            }
            Higher::Config(kind, d, k) => {
                let pool: Vec<E> = chosen.iter().map(|&c| self.els[c].clone()).collect();
                !completes_configuration(*kind, *d, *k, x, &pool)
            }
            Higher::Nontrivial(size) => {
                let pool: Vec<E> = chosen.iter().map(|&c| self.els[c].clone()).collect();
                !completes_nontrivial(*size, x, &pool)
            }
        })
    }

    fn filter(&self, chosen: &[usize], cand: &mut BitSet) {
        if self.higher.is_empty() {
            return;
        }
        let mut chosen_set = BitSet::new(self.els.len());
        for &c in chosen {
            chosen_set.insert(c);
        }
        let drop: Vec<usize> = cand.iter().filter(|&u| !self.can_add(chosen, &chosen_set, u)).collect();
        for u in drop {
            cand.remove(u);
        }
    }

    fn hopeless(&self, bound: usize, best: usize) -> bool {
        if self.strict {
            bound <= best
        } else {
            bound < best
        }
    }

    /// Candidates in branching order, each with a bound on how many of it
    /// and the candidates before it can join a family.
    fn order(&self, cand: &BitSet) -> Vec<(usize, usize)> {
        let Some(s) = self.matching else {
            return colour_sort(cand, &self.adj);
        };
        // Classes of pairwise disjoint members; each holds at most s.
        let mut out = Vec::with_capacity(cand.count());
        let (mut done, mut in_class, mut cur) = (0, 0, 0);
        for (v, c) in colour_sort(cand, &self.meets) {
            if c != cur {
                done += in_class.min(s);
                in_class = 0;
                cur = c;
            }
            in_class += 1;
            out.push((v, done + in_class.min(s)));
        }
        out
    }

    fn expand(&self, st: &mut Branch, chosen: &mut Vec<usize>, cand: BitSet) {
        st.nodes += 1;
        if st.nodes > st.budget {
            st.complete = false;
            return;
        }
        if cand.is_empty() {
            st.record(chosen, self.witness_cap);
            return;
        }
        if let Some(lym) = &self.lym {
            if self.hopeless(chosen.len() + self.lym_bound(lym, chosen, &cand), st.best) {
                return;
            }
        }
        if self.matching.is_some() && self.pairwise {
            let colours = colour_sort(&cand, &self.adj).last().map_or(0, |&(_, c)| c);
            if self.hopeless(chosen.len() + colours, st.best) {
                return;
            }
        }
        let order = self.order(&cand);
        let mut cand = cand;
        for &(v, bound) in order.iter().rev() {
            if self.hopeless(chosen.len() + bound, st.best) {
                return;
            }
            let mut next = cand.and(&self.adj[v]);
            chosen.push(v);
            self.filter(chosen, &mut next);
            self.expand(st, chosen, next);
            chosen.pop();
            cand.remove(v);
            if !st.complete {
                return;
            }
        }
    }

    fn root(&self, v: usize, rest: BitSet, floor: usize, budget: u64) -> Branch {
        let mut st = Branch::new(floor, budget);
        let mut next = rest.and(&self.adj[v]);
        let mut chosen = vec![v];
        self.filter(&chosen, &mut next);
        self.expand(&mut st, &mut chosen, next);
        st
    }
}

fn unary_ok<E: LatticeElement>(spec: &PropertySpec, e: &E) -> bool {
    spec.conjuncts.iter().all(|p| match p {
        Property::UniformDim(ks) => ks.contains(&e.rank()),
        Property::MatchingAtMost(0) => false,
        _ => true,
    })
}

/// Finds the maximum size of a subfamily of the ground satisfying the property,
/// with up to `witness_cap` maximum families.
///
/// A node cap that is hit yields `proven_optimal = false` and the best
/// family found so far, which is a genuine lower bound.
///
/// ```
/// use qlattice::extremal_search::{ground, max_family, SearchProblem};
/// use qlattice::family_properties::{Property, PropertySpec};
/// use qlattice::subspace_lattice::{Ambient, SubsetHandle};
///
/// let edges = ground::<SubsetHandle>(&Ambient::sets(4), [2], 1000).unwrap();
/// let problem = SearchProblem::new(edges, PropertySpec::single(Property::Intersecting));
/// let r = max_family(&problem).unwrap();
/// assert_eq!(r.max_size, 3);
/// assert_eq!(r.witness_count, 8); // four stars and four triangles
/// ```
pub fn max_family<E: LatticeElement>(problem: &SearchProblem<E>) -> Result<SearchResult<E>> {
    problem.spec.validate()?;
    let ground = &problem.ground;
    let els = ground.elements();
    let m = els.len();
    if m as u64 > DEFAULT_GROUND_CAP {
        return Err(Error::CapExceeded {
            count: m.to_string(),
            cap: DEFAULT_GROUND_CAP,
        });
    }
    let mut alive = BitSet::new(m);
    for (i, e) in els.iter().enumerate() {
        if unary_ok(&problem.spec, e) {
            alive.insert(i);
        }
    }
    if problem.symmetry {
        let k = ground.uniform_rank();
        let full = k.is_some_and(|k| BigUint::from(m) == ground.ambient().level_size(k));
        if !full {
            return Err(Error::ParameterMismatch("symmetry reduction needs the ground to be one full level".into()));
        }
    }
    let engine = Engine::build(
        els,
        ground.ambient(),
        &problem.spec,
        &alive,
        problem.limits.witness_cap,
        !problem.count_maxima,
    )?;
    let cap = problem.limits.witness_cap;
    let node_cap = problem.limits.node_cap.unwrap_or(u64::MAX);

    let mut best = 0usize;
    let mut witnesses: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut count = 1u64;
    witnesses.insert(Vec::new());
    let mut nodes = 1u64;
    let mut complete = true;
    let mut stopped_at_hint = false;

    let roots: Vec<(usize, usize)> = if problem.symmetry {
        alive.first().map(|v| (v, usize::MAX)).into_iter().collect()
    } else {
        engine.order(&alive).into_iter().rev().collect()
    };
    let mut rest = alive.clone();
    let mut start = 0;
    'chunks: while start < roots.len() {
        let end = (start + ROOT_CHUNK).min(roots.len());
        let mut jobs = Vec::new();
        for &(v, bound) in &roots[start..end] {
            if engine.hopeless(bound, best) {
                break;
            }
            jobs.push((v, rest.clone()));
            rest.remove(v);
        }
        let pruned = jobs.len() < end - start;
        let floor = best;
        let budget = node_cap.saturating_sub(nodes);
        let outs: Vec<Branch> = jobs
            .into_par_iter()
            .map(|(v, rest)| engine.root(v, rest, floor, budget))
            .collect();
        for out in outs {
            nodes = nodes.saturating_add(out.nodes);
            complete &= out.complete;
            if out.count == 0 {
                continue;
            }
            if out.best > best {
                best = out.best;
                witnesses.clear();
                count = 0;
            }
            if out.best == best {
                count += out.count;
                witnesses.extend(out.witnesses);
                while witnesses.len() > cap {
                    witnesses.pop_last();
                }
            }
        }
        if !complete || nodes > node_cap {
            complete = false;
            break 'chunks;
        }
        if pruned {
            break;
        }
        if let Some(h) = problem.bound_hint {
            if best as u64 >= h && witnesses.len() >= cap && end < roots.len() {
                stopped_at_hint = true;
                break;
            }
        }
        start = end;
    }
    while witnesses.len() > cap {
        witnesses.pop_last();
    }
    let witnesses = witnesses
        .into_iter()
        .map(|ix| Family::new(ground.ambient().clone(), ix.into_iter().map(|i| els[i].clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchResult {
        max_size: best as u64,
        witnesses,
        witness_count: count,
        nodes_explored: nodes,
        proven_optimal: complete,
        symmetry_reduced: problem.symmetry,
        stopped_at_hint,
        maxima_counted: problem.count_maxima,
    })
}

/// Runs the problem with and without symmetry reduction and checks that the
/// maxima agree. Intended for small grounds.
pub fn cross_check_symmetry<E: LatticeElement>(problem: &SearchProblem<E>) -> Result<bool> {
    let with = max_family(&problem.clone().with_symmetry(true))?;
    let without = max_family(&problem.clone().with_symmetry(false))?;
    Ok(with.proven_optimal && without.proven_optimal && with.max_size == without.max_size)
}

/// Shape of an extremal family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum Classification {
    /// Every element of the given ranks containing a nontrivial center.
    Star { center: String, levels: Vec<usize> },
    /// Whole levels of the lattice.
    FullLevels { levels: Vec<usize> },
    /// A common nontrivial meet, but not every element above it.
    PartialStar { center: String },
    Unclassified,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Star { .. } => "star",
            Classification::FullLevels { .. } => "full-levels",
            Classification::PartialStar { .. } => "partial-star",
            Classification::Unclassified => "unclassified",
        }
    }
}

/// Classifies a family by counting: a star (or full level union) is
/// recognised when each present level has exactly as many members as the
/// corresponding star (or level).
pub fn classify<E: LatticeElement>(fam: &Family<E>) -> Classification {
    let amb = fam.ambient();
    let prof = fam.profile();
    let levels: Vec<usize> = (0..prof.counts.len()).filter(|&i| prof.counts[i] > 0).collect();
    let Some(center) = meet_all(fam.elements()) else {
        return Classification::Unclassified;
    };
    let r = center.rank();
    if r > 0 {
        let full = levels.iter().all(|&j| BigUint::from(prof.counts[j]) == amb.star_size(r, j));
        return if full {
            Classification::Star {
                center: center.encode(),
                levels,
            }
        } else {
            Classification::PartialStar {
                center: center.encode(),
            }
        };
    }
    if levels.iter().all(|&j| BigUint::from(prof.counts[j]) == amb.level_size(j)) {
        Classification::FullLevels { levels }
    } else {
        Classification::Unclassified
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EqualityReport {
    pub theorem: TheoremId,
    pub bound: String,
    /// The class the equality clause predicts, when it predicts one.
    pub expected: Option<&'static str>,
    pub classes: Vec<Classification>,
    /// Indices of witnesses outside the expected class. Nonempty means a
    /// potential counterexample to the characterization.
    pub unexpected: Vec<usize>,
    /// Whether the witness list covers every maximum family.
    pub witnesses_complete: bool,
}

impl EqualityReport {
    pub fn all_expected(&self) -> bool {
        self.unexpected.is_empty()
    }
}

fn expected_class(id: TheoremId) -> Option<&'static str> {
    use TheoremId::*;
    match id {
        EkrSet | EkrQ | IntersectingKSpernerQ => Some("star"),
        ErdosSperner | SpernerQ | SamotijQ => Some("full-levels"),
        _ => None,
    }
}

/// Classifies every maximum witness against the equality clause of the
/// theorem. Requires a finished search that meets the bound.
pub fn check_equality_characterization<E: LatticeElement>(
    result: &SearchResult<E>,
    bound: &BoundResult,
) -> Result<EqualityReport> {
    if !result.proven_optimal {
        return Err(Error::NotOptimal("search did not finish".into()));
    }
    if bound.strict || BigUint::from(result.max_size) != bound.value.floor() {
        return Err(Error::NotOptimal(format!(
            "maximum {} does not meet the bound {}",
            result.max_size, bound.value
        )));
    }
    let expected = expected_class(bound.theorem);
    let classes: Vec<Classification> = result.witnesses.iter().map(classify).collect();
    let unexpected = match expected {
        Some(name) => (0..classes.len()).filter(|&i| classes[i].name() != name).collect(),
        None => Vec::new(),
    };
    Ok(EqualityReport {
        theorem: bound.theorem,
        bound: bound.value.to_string(),
        expected,
        classes,
        unexpected,
        witnesses_complete: result.witnesses_complete(),
    })
}

/// One grid point of a conjecture exploration.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct ConjecturePoint {
    pub n: u64,
    pub k: u64,
    pub q: Option<u64>,
    pub s: Option<u64>,
    pub d: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureStatus {
    ConsistentTight,
    ConsistentSlack,
    #[serde(rename = "VIOLATION")]
    Violation,
    /// Above the conjectured value at a point where its hypotheses fail.
    ExceedsOutsideHypotheses,
    Unknown,
}

impl std::fmt::Display for ConjectureStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("unit enum");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjectureRow {
    pub point: ConjecturePoint,
    pub property: PropertySpec,
    pub ground_size: u64,
    pub search_max: u64,
    pub proven_optimal: bool,
    pub nodes_explored: u64,
    pub conjectured_bound: String,
    pub hypotheses_hold: bool,
    pub status: ConjectureStatus,
    /// A family beating the bound, re-verified by an independent check.
    pub witness: Option<Vec<String>>,
}

/// The search problem a conjecture describes at one point: ground level and
/// property.
pub fn conjecture_problem(id: TheoremId, p: &ConjecturePoint) -> Result<(PropertySpec, Option<u64>)> {
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| Error::MissingParameter(name.into()));
    match id {
        TheoremId::ErdosMatching => {
            Ok((PropertySpec::single(Property::MatchingAtMost(need(p.s, "s")? as usize)), None))
        }
        TheoremId::MatchingConjectureQ => Ok((
            PropertySpec::single(Property::MatchingAtMost(need(p.s, "s")? as usize)),
            Some(need(p.q, "q")?),
        )),
        TheoremId::SimplexConjectureSet => {
            Ok((PropertySpec::single(Property::NoDSimplex(need(p.d, "d")? as usize)), None))
        }
        TheoremId::SimplexConjectureQ => Ok((
            PropertySpec::single(Property::NoDSimplex(need(p.d, "d")? as usize)),
            Some(need(p.q, "q")?),
        )),
        _ => Err(Error::ParameterMismatch(format!("`{id}` is not an explorable conjecture"))),
    }
}

fn explore_point<E: GroundElement>(
    id: TheoremId,
    point: &ConjecturePoint,
    ambient: Ambient,
    spec: PropertySpec,
    limits: &SearchLimits,
    ground_cap: u64,
) -> Result<ConjectureRow> {
    let params = BoundParams {
        n: Some(point.n),
        k: Some(point.k),
        q: point.q,
        s: point.s,
        d: point.d,
        ..Default::default()
    };
    let bound = theorem_bound(id, &params)?;
    let bound_value = bound.value.floor();
    let hypotheses_hold = bound.side_conditions_hold();
    let g: Family<E> = ground(&ambient, [point.k as usize], ground_cap)?;
    let ground_size = g.len() as u64;
    let problem = SearchProblem::new(g, spec.clone())
        .with_limits(SearchLimits {
            node_cap: limits.node_cap,
            witness_cap: 1,
        })
        .with_count_maxima(false);
    let res = max_family(&problem)?;
    let max = BigUint::from(res.max_size);
    let beats = if bound.strict { max >= bound_value } else { max > bound_value };
    let (status, witness) = if beats {
        let w = res.witnesses.first().expect("a witness of the best size");
        if !check(&spec, w)?.holds() {
            return Err(Error::PreconditionFailed(format!("search witness for {id} failed the re-check")));
        }
        let status = if hypotheses_hold {
            ConjectureStatus::Violation
        } else {
            ConjectureStatus::ExceedsOutsideHypotheses
        };
        (status, Some(w.encodings()))
    } else if !res.proven_optimal {
        (ConjectureStatus::Unknown, None)
    } else if max == bound_value {
        (ConjectureStatus::ConsistentTight, None)
    } else {
        (ConjectureStatus::ConsistentSlack, None)
    };
    Ok(ConjectureRow {
        point: point.clone(),
        property: spec,
        ground_size,
        search_max: res.max_size,
        proven_optimal: res.proven_optimal,
        nodes_explored: res.nodes_explored,
        conjectured_bound: bound.value.to_string(),
        hypotheses_hold,
        status,
        witness,
    })
}

/// Compares exhaustive search with a conjectured bound at each grid point.
/// Points whose ground exceeds `ground_cap` get status `unknown`.
pub fn explore_conjecture(
    id: TheoremId,
    grid: &[ConjecturePoint],
    limits: &SearchLimits,
    ground_cap: u64,
) -> Result<Vec<ConjectureRow>> {
    grid.iter()
        .map(|p| {
            let (spec, q) = conjecture_problem(id, p)?;
            let row = match q {
                None => explore_point::<SubsetHandle>(id, p, Ambient::sets(p.n as usize), spec.clone(), limits, ground_cap),
                Some(q) => {
                    let field = crate::finite_field::make_field(q as u32)?;
                    explore_point::<SubspaceHandle>(
                        id,
                        p,
                        Ambient::subspaces(&field, p.n as usize),
                        spec.clone(),
                        limits,
                        ground_cap,
                    )
                }
            };
            match row {
                Err(Error::CapExceeded { .. }) => {
                    let params = BoundParams {
                        n: Some(p.n),
                        k: Some(p.k),
                        q: p.q,
                        s: p.s,
                        d: p.d,
                        ..Default::default()
                    };
                    let bound = theorem_bound(id, &params)?;
                    Ok(ConjectureRow {
                        point: p.clone(),
                        property: spec,
                        ground_size: 0,
                        search_max: 0,
                        proven_optimal: false,
                        nodes_explored: 0,
                        conjectured_bound: bound.value.to_string(),
                        hypotheses_hold: bound.side_conditions_hold(),
                        status: ConjectureStatus::Unknown,
                        witness: None,
                    })
                }
                other => other,
            }
        })
        .collect()
}
