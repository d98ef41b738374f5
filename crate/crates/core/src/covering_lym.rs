//! Covering families of Boolean sublattices, LYM sums, antichain
//! decomposition and the profile maximizer.
//!
//! A basis `B` of `F_q^n` generates the sublattice `G_B = {span(U) : U ⊆ B}`,
//! a copy of the Boolean lattice `2^[n]`. The collection `Γ` of all `G_B`
//! covers every `i`-dimensional subspace the same number `t_i` of times,
//! which lets bounds on set systems transfer to subspaces.

use std::collections::{HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremal_search::{classify, Classification};
use crate::family_properties::{check, longest_chain, Property, PropertySpec};
use crate::finite_field::FieldSpec;
use crate::qcombinatorics::{binomial, gaussian_binomial, level, q_pow};
use crate::subspace_lattice::{
    enumerate_subspaces, Ambient, Family, LatticeElement, SubsetHandle, SubspaceHandle,
};

/// Largest number of bases [`build_covering`] enumerates.
pub const DEFAULT_COVERING_CAP: u64 = 200_000;

fn rat(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// `α(q, n)`: the number of unordered bases of `F_q^n`.
pub fn alpha(q: u64, n: u64) -> BigUint {
    let qn = q_pow(q, n);
    let ordered: BigUint = (0..n).map(|i| &qn - q_pow(q, i)).product();
    ordered / factorial(n)
}

/// `t_i(q, n)`: the number of bases whose sublattice contains a fixed
/// `i`-dimensional subspace.
pub fn t_i(q: u64, n: u64, i: u64) -> BigUint {
    let qi = q_pow(q, i);
    let qn = q_pow(q, n);
    let inside: BigUint = (0..i).map(|j| &qi - q_pow(q, j)).product();
    let outside: BigUint = (i..n).map(|j| &qn - q_pow(q, j)).product();
    inside * outside / (factorial(i) * factorial(n - i))
}

/// The family `Γ`, one entry per unordered basis.
#[derive(Clone, Debug)]
pub struct CoveringFamily {
    pub field: FieldSpec,
    pub n: usize,
    /// Each basis as `n` vectors of element codes, sorted.
    pub bases: Vec<Vec<Vec<u8>>>,
    pub t: Vec<BigUint>,
    pub alpha: BigUint,
}

fn vector(field: &FieldSpec, n: usize, mut code: u64) -> Vec<u8> {
    let q = field.q() as u64;
    let mut v = vec![0u8; n];
    for x in v.iter_mut().rev() {
        *x = (code % q) as u8;
        code /= q;
    }
    v
}

fn span_of(field: &FieldSpec, n: usize, vs: &[&Vec<u8>]) -> SubspaceHandle {
    if vs.is_empty() {
        return SubspaceHandle::zero(field, n);
    }
    let entries: Vec<u8> = vs.iter().flat_map(|v| v.iter().copied()).collect();
    SubspaceHandle::from_generators(field, n, entries)
}

/// Enumerates every unordered basis of `F_q^n`.
pub fn build_covering(field: &FieldSpec, n: usize, cap: u64) -> Result<CoveringFamily> {
    let q = field.q() as u64;
    let a = alpha(q, n as u64);
    if a > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: a.to_string(),
            cap,
        });
    }
    let total = q.pow(n as u32);
    let vectors: Vec<Vec<u8>> = (1..total).map(|c| vector(field, n, c)).collect();
    let mut bases = Vec::new();
    fn rec(
        field: &FieldSpec,
        n: usize,
        vectors: &[Vec<u8>],
        from: usize,
        chosen: &mut Vec<usize>,
        span: &SubspaceHandle,
        out: &mut Vec<Vec<Vec<u8>>>,
    ) {
        if chosen.len() == n {
            let mut b: Vec<Vec<u8>> = chosen.iter().map(|&i| vectors[i].clone()).collect();
            b.sort();
            out.push(b);
            return;
        }
        for i in from..vectors.len() {
            if vectors.len() - i < n - chosen.len() {
                break;
            }
            let line = span_of(field, n, &[&vectors[i]]);
            let next = span.span(&line).expect("same ambient");
            if next.dim() == span.dim() + 1 {
                chosen.push(i);
                rec(field, n, vectors, i + 1, chosen, &next, out);
                chosen.pop();
            }
        }
    }
    rec(field, n, &vectors, 0, &mut Vec::new(), &SubspaceHandle::zero(field, n), &mut bases);
    bases.sort();
    let t = (0..=n as u64).map(|i| t_i(q, n as u64, i)).collect();
    Ok(CoveringFamily {
        field: field.clone(),
        n,
        bases,
        t,
        alpha: a,
    })
}

impl CoveringFamily {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// The sublattice `G_B` of basis `b`, indexed by subset mask of `B`.
    pub fn member(&self, b: usize) -> Vec<SubspaceHandle> {
        let basis = &self.bases[b];
        (0u32..1 << self.n)
            .map(|mask| {
                let vs: Vec<&Vec<u8>> = (0..self.n).filter(|i| mask >> i & 1 == 1).map(|i| &basis[i]).collect();
                span_of(&self.field, self.n, &vs)
            })
            .collect()
    }

    /// Whether `U ↦ span(U)` is a lattice isomorphism from `2^B` onto
    /// `G_B`: `dim(span U ∩ span W) = |U ∩ W|` for all `U, W`.
    pub fn is_boolean(&self, b: usize) -> bool {
        let mem = self.member(b);
        let m = mem.len();
        (0..m).all(|u| {
            (u..m).all(|w| mem[u].meet_rank(&mem[w]) == ((u & w) as u32).count_ones() as usize)
        })
    }
}

/// One row of the covering audit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelAudit {
    pub i: usize,
    pub level_size: String,
    pub t_i: String,
    pub observed_min: u64,
    pub observed_max: u64,
    /// `[n,i] · t_i`.
    pub pairs_by_subspace: String,
    /// `α · C(n,i)`.
    pub pairs_by_basis: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringAudit {
    pub q: u32,
    pub n: usize,
    pub alpha: String,
    pub bases_enumerated: u64,
    /// Number of distinct sublattices among the `G_B`.
    pub distinct_sublattices: u64,
    /// Every `G_B` has `C(n,i)` members of each dimension `i`.
    pub members_boolean: bool,
    pub levels: Vec<LevelAudit>,
}

impl CoveringAudit {
    pub fn passes(&self) -> bool {
        self.alpha == self.bases_enumerated.to_string() && self.members_boolean && self.levels.iter().all(|l| l.ok)
    }
}

/// Counts, for every subspace, how many `G_B` contain it, and checks the
/// count against `t_i` and the double-counting identity.
pub fn audit_t_covering(cov: &CoveringFamily) -> Result<CoveringAudit> {
    let n = cov.n;
    let q = cov.field.q() as u64;
    let per_basis: Vec<(Vec<SubspaceHandle>, bool)> = (0..cov.len())
        .into_par_iter()
        .map(|b| {
            let mem = cov.member(b);
            let mut per_level = vec![0u64; n + 1];
            for v in &mem {
                per_level[v.dim()] += 1;
            }
            let boolean = per_level
                .iter()
                .enumerate()
                .all(|(i, &c)| BigUint::from(c) == binomial(n as u64, i as u64));
            let distinct: HashSet<&SubspaceHandle> = mem.iter().collect();
            let ok = boolean && distinct.len() == mem.len();
            (mem, ok)
        })
        .collect();
    let members_boolean = per_basis.iter().all(|(_, ok)| *ok);
    let mut counts: HashMap<&SubspaceHandle, u64> = HashMap::new();
    let mut lattices: HashSet<Vec<&SubspaceHandle>> = HashSet::new();
    for (mem, _) in &per_basis {
        for v in mem {
            *counts.entry(v).or_insert(0) += 1;
        }
        let mut key: Vec<&SubspaceHandle> = mem.iter().collect();
        key.sort();
        lattices.insert(key);
    }
    let mut levels = Vec::new();
    for i in 0..=n {
        let mut lo = u64::MAX;
        let mut hi = 0;
        let mut seen = 0u64;
        for v in enumerate_subspaces(&cov.field, n, i)? {
            let c = counts.get(&v).copied().unwrap_or(0);
            lo = lo.min(c);
            hi = hi.max(c);
            seen += 1;
        }
        let size = gaussian_binomial(n as u64, i as u64, q);
        let t = &cov.t[i];
        let lhs = &size * t;
        let rhs = &cov.alpha * binomial(n as u64, i as u64);
        let ok = BigUint::from(seen) == size && BigUint::from(lo) == *t && BigUint::from(hi) == *t && lhs == rhs;
        levels.push(LevelAudit {
            i,
            level_size: size.to_string(),
            t_i: t.to_string(),
            observed_min: lo,
            observed_max: hi,
            pairs_by_subspace: lhs.to_string(),
            pairs_by_basis: rhs.to_string(),
            ok,
        });
    }
    Ok(CoveringAudit {
        q: cov.field.q(),
        n,
        alpha: cov.alpha.to_string(),
        bases_enumerated: cov.len() as u64,
        distinct_sublattices: lattices.len() as u64,
        members_boolean,
        levels,
    })
}

/// Level weights `(w_0, ..., w_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub w: Vec<BigRational>,
}

impl WeightVector {
    /// `w_i = t_i`, which makes `w/t` the constant vector of ones.
    pub fn covering_multiplicities(cov: &CoveringFamily) -> Self {
        WeightVector {
            w: cov.t.iter().cloned().map(rat).collect(),
        }
    }

    pub fn weight<E: LatticeElement>(&self, fam: &Family<E>) -> BigRational {
        fam.iter().map(|e| self.w[e.rank()].clone()).sum()
    }
}

/// How the per-sublattice hypothesis was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisMode {
    /// Exhaustive weighted search inside every `G_B`.
    Exhaustive,
    /// Taken on trust from the caller.
    Trusted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedBoundReport {
    pub alpha: String,
    pub x: String,
    /// `w̄(F)`.
    pub weight: String,
    /// `|Γ| x`.
    pub bound: String,
    pub holds: bool,
    pub hypothesis: HypothesisMode,
    /// Largest `(w/t)(G')` over subfamilies `G'` of one `G_B` with the
    /// property, when searched.
    pub hypothesis_max: Option<String>,
    pub family_has_property: bool,
}

/// Largest total weight of a subfamily of `2^[n]` with the property.
/// The map `U ↦ span(U)` preserves ranks, inclusion and meet ranks, so this
/// equals the maximum inside any Boolean `G_B`.
fn boolean_weighted_max(n: usize, spec: &PropertySpec, weight: &[BigRational]) -> Result<BigRational> {
    let amb = Ambient::sets(n);
    let els: Vec<SubsetHandle> = (0u64..1 << n).map(|b| SubsetHandle::new(n, b)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..els.len()).collect();
    order.sort_by(|&a, &b| weight[els[b].len()].cmp(&weight[els[a].len()]));
    let w: Vec<BigRational> = order.iter().map(|&i| weight[els[i].len()].clone()).collect();
    let mut suffix = vec![BigRational::zero(); w.len() + 1];
    for i in (0..w.len()).rev() {
        let pos = if w[i] > BigRational::zero() { w[i].clone() } else { BigRational::zero() };
        suffix[i] = &suffix[i + 1] + pos;
    }
    struct Ctx<'a> {
        amb: Ambient,
        els: Vec<SubsetHandle>,
        order: Vec<usize>,
        w: Vec<BigRational>,
        suffix: Vec<BigRational>,
        spec: &'a PropertySpec,
    }
    fn rec(c: &Ctx<'_>, i: usize, chosen: &mut Vec<SubsetHandle>, cur: BigRational, best: &mut BigRational) -> Result<()> {
        if cur > *best {
            *best = cur.clone();
        }
        if i == c.order.len() || &cur + &c.suffix[i] <= *best {
            return Ok(());
        }
        if c.w[i] > BigRational::zero() {
            chosen.push(c.els[c.order[i]]);
            let fam = Family::new(c.amb.clone(), chosen.iter().copied())?;
            if check(c.spec, &fam)?.holds() {
                rec(c, i + 1, chosen, &cur + &c.w[i], best)?;
            }
            chosen.pop();
        }
        rec(c, i + 1, chosen, cur, best)
    }
    let ctx = Ctx {
        amb,
        els,
        order,
        w,
        suffix,
        spec,
    };
    let mut best = BigRational::zero();
    rec(&ctx, 0, &mut Vec::new(), BigRational::zero(), &mut best)?;
    Ok(best)
}

/// Checks `w̄(F) ≤ |Γ| x` for a subspace family with the property, after
/// establishing that every subfamily of a `G_B` with the property has
/// `(w/t)`-weight at most `x`.
///
/// With `trusted = false` the hypothesis is verified: every `G_B` is checked
/// to be Boolean, then the weighted maximum over `2^[n]` is found
/// exhaustively (only for `n <= 4`).
pub fn weighted_bound_check(
    cov: &CoveringFamily,
    w: &WeightVector,
    spec: &PropertySpec,
    x: &BigRational,
    fam: &Family<SubspaceHandle>,
    trusted: bool,
) -> Result<WeightedBoundReport> {
    if w.w.len() != cov.n + 1 {
        return Err(Error::ParameterMismatch(format!(
            "weight vector has {} entries, expected {}",
            w.w.len(),
            cov.n + 1
        )));
    }
    if fam.ambient() != &Ambient::subspaces(&cov.field, cov.n) {
        return Err(Error::AmbientMismatch("family and covering differ".into()));
    }
    let (mode, hmax) = if trusted {
        (HypothesisMode::Trusted, None)
    } else {
        if cov.n > 4 {
            return Err(Error::HypothesisUnverified(format!(
                "exhaustive search inside G_B is limited to n <= 4, got n = {}",
                cov.n
            )));
        }
        if !(0..cov.len()).into_par_iter().all(|b| cov.is_boolean(b)) {
            return Err(Error::HypothesisUnverified("some G_B is not a Boolean lattice".into()));
        }
        let ratio: Vec<BigRational> = (0..=cov.n).map(|i| &w.w[i] / rat(cov.t[i].clone())).collect();
        let m = boolean_weighted_max(cov.n, spec, &ratio)?;
        if m > *x {
            return Err(Error::HypothesisUnverified(format!(
                "a subfamily of G_B with the property has weight {m} > x = {x}"
            )));
        }
        (HypothesisMode::Exhaustive, Some(m.to_string()))
    };
    let weight = w.weight(fam);
    let bound = rat(cov.alpha.clone()) * x;
    Ok(WeightedBoundReport {
        alpha: cov.alpha.to_string(),
        x: x.to_string(),
        holds: weight <= bound,
        weight: weight.to_string(),
        bound: bound.to_string(),
        hypothesis: mode,
        hypothesis_max: hmax,
        family_has_property: check(spec, fam)?.holds(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LymTerm {
    pub j: usize,
    pub count: u64,
    pub denominator: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LymReport {
    pub k: usize,
    pub terms: Vec<LymTerm>,
    /// `Σ_j |V_j| / level(n-1, j-1)`, exact.
    pub sum: String,
    pub within_bound: bool,
    pub equality: bool,
    /// Set when the family is not intersecting `k`-Sperner with ranks in
    /// `[1, ⌊n/2⌋]`; the sum is then reported but proves nothing.
    pub vacuous: Option<String>,
    /// At equality, the shape of the family.
    pub classification: Option<Classification>,
    /// At equality with `k = 1`: whether the family is a single full star
    /// level, as the equality clause demands.
    pub characterization_ok: Option<bool>,
}

impl LymReport {
    pub fn sum_value(&self) -> BigRational {
        crate::qcombinatorics::parse_rational(&self.sum).expect("own output")
    }

    pub fn require_precondition(&self) -> Result<&Self> {
        match &self.vacuous {
            None => Ok(self),
            Some(why) => Err(Error::PreconditionFailed(why.clone())),
        }
    }
}

/// The exact LYM sum of an intersecting `k`-Sperner family.
///
/// ```
/// use qlattice::covering_lym::lym_check;
/// use qlattice::extremal_search::build_star;
/// use qlattice::finite_field::make_field;
/// use qlattice::subspace_lattice::{Ambient, SubspaceHandle};
///
/// let f = make_field(2).unwrap();
/// let amb = Ambient::subspaces(&f, 5);
/// let r = SubspaceHandle::from_rows(&f, 5, &[[1u32, 0, 0, 0, 0]]).unwrap();
/// let rep = lym_check(&build_star(&amb, 2, &r).unwrap(), 1).unwrap();
/// assert_eq!(rep.sum, "1");
/// assert!(rep.equality);
/// ```
pub fn lym_check<E: LatticeElement>(fam: &Family<E>, k: usize) -> Result<LymReport> {
    if k == 0 {
        return Err(Error::RangeError("k must be at least 1".into()));
    }
    let amb = fam.ambient();
    let n = amb.n();
    let q = amb.q().map(u64::from);
    let prof = fam.profile();
    let mut vacuous = None;
    if let Some(bad) = fam.iter().find(|e| e.rank() < 1 || e.rank() > n / 2) {
        vacuous = Some(format!("member rank {} outside [1, {}]", bad.rank(), n / 2));
    } else if !check(&PropertySpec::single(Property::IntersectingKSperner(k)), fam)?.holds() {
        vacuous = Some(format!("family is not intersecting {k}-Sperner"));
    }
    let mut terms = Vec::new();
    let mut sum = BigRational::zero();
    for (j, &c) in prof.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let d = level(n as i64 - 1, j as i64 - 1, q);
        if d.is_zero() {
            vacuous.get_or_insert_with(|| format!("rank {j} has no LYM weight"));
            continue;
        }
        sum += BigRational::new(BigInt::from(c), BigInt::from(d.clone()));
        terms.push(LymTerm {
            j,
            count: c,
            denominator: d.to_string(),
        });
    }
    let kk = BigRational::from_integer(BigInt::from(k));
    let equality = sum == kk;
    let (classification, characterization_ok) = if equality {
        let cls = classify(fam);
        let ok = (k == 1).then(|| matches!(&cls, Classification::Star { levels, .. } if levels.len() == 1));
        (Some(cls), ok)
    } else {
        (None, None)
    };
    Ok(LymReport {
        k,
        terms,
        within_bound: sum <= kk,
        sum: sum.to_string(),
        equality,
        vacuous,
        classification,
        characterization_ok,
    })
}

/// Splits the family into antichains by repeatedly removing the minimal
/// members. The number of parts is the longest chain length.
pub fn antichain_decompose<E: LatticeElement>(fam: &Family<E>) -> Vec<Family<E>> {
    let mut rest: Vec<E> = fam.elements().to_vec();
    let mut parts = Vec::new();
    while !rest.is_empty() {
        let (minimal, others): (Vec<E>, Vec<E>) = rest
            .iter()
            .cloned()
            .partition(|e| !rest.iter().any(|o| o != e && e.contains(o)));
        parts.push(Family::new(fam.ambient().clone(), minimal).expect("same ambient"));
        rest = others;
    }
    debug_assert_eq!(parts.len(), longest_chain(fam.elements()).len());
    parts
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileOptimum {
    pub n: u64,
    pub k: u64,
    pub q: u64,
    /// Caps `[n-1, j-1]_q` for `j = 1..⌊n/2⌋`.
    pub caps: Vec<String>,
    /// The optimal profile `f_1..f_{⌊n/2⌋}`.
    pub profile: Vec<String>,
    pub value: String,
    /// Value of the dual certificate `y = c*`, `z_j = max(0, 1 - c*/c_j)`;
    /// equal to `value` exactly when the profile is optimal.
    pub dual_value: String,
    /// No unit can move from a saturated level to an empty one with a
    /// larger cap.
    pub exchange_ok: bool,
}

impl ProfileOptimum {
    pub fn certified(&self) -> bool {
        self.exchange_ok && self.dual_value == self.value
    }
}

/// Maximizes `Σ f_j` subject to `Σ f_j / c_j ≤ k` and `0 ≤ f_j ≤ c_j`,
/// `c_j = [n-1, j-1]_q`, over `j = 1..⌊n/2⌋`.
pub fn maximize_profile(n: u64, k: u64, q: u64) -> Result<ProfileOptimum> {
    let h = n / 2;
    if k < 1 || k > h {
        return Err(Error::RangeError(format!("need 1 <= k <= floor(n/2) = {h}, got k={k}")));
    }
    if q < 2 {
        return Err(Error::RangeError(format!("q must be at least 2, got {q}")));
    }
    let caps: Vec<BigUint> = (1..=h).map(|j| gaussian_binomial(n - 1, j - 1, q)).collect();
    // Saturate the k largest caps, larger j first on ties.
    let mut idx: Vec<usize> = (0..caps.len()).collect();
    idx.sort_by(|&a, &b| caps[b].cmp(&caps[a]).then(b.cmp(&a)));
    let chosen: HashSet<usize> = idx[..k as usize].iter().copied().collect();
    let profile: Vec<BigUint> = (0..caps.len())
        .map(|j| if chosen.contains(&j) { caps[j].clone() } else { BigUint::zero() })
        .collect();
    let value: BigUint = profile.iter().sum();
    let cstar = caps[idx[k as usize - 1]].clone();
    let mut dual = rat(&cstar * BigUint::from(k));
    for c in &caps {
        if *c > cstar {
            dual += rat(c - &cstar);
        }
    }
    let exchange_ok = (0..caps.len())
        .filter(|j| chosen.contains(j))
        .all(|i| (0..caps.len()).filter(|j| !chosen.contains(j)).all(|j| caps[i] >= caps[j]));
    let used: BigRational = profile
        .iter()
        .zip(&caps)
        .map(|(f, c)| BigRational::new(BigInt::from(f.clone()), BigInt::from(c.clone())))
        .sum();
    debug_assert!(used <= BigRational::from_integer(BigInt::from(k)));
    Ok(ProfileOptimum {
        n,
        k,
        q,
        caps: caps.iter().map(|c| c.to_string()).collect(),
        profile: profile.iter().map(|f| f.to_string()).collect(),
        value: value.to_string(),
        dual_value: dual.to_string(),
        exchange_ok,
    })
}
