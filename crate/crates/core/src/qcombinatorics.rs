//! Exact counting: binomial and Gaussian binomial coefficients, the named
//! extremal bounds built from them, identity audits, and explicit thresholds
//! for the asymptotic level-dominance inequalities.
//!
//! No floating point is used anywhere; rational quantities are
//! [`BigRational`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// `q^e` as a big integer.
pub fn q_pow(q: u64, e: u64) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// The Gaussian binomial `[n, k]_q`, the number of `k`-dimensional
/// subspaces of `F_q^n`. Zero when `k > n`.
///
/// Evaluated as a running product where each partial result is
/// `[n-k+j, j]_q`; every division is checked to be exact.
///
/// # Panics
/// If `q < 2`, or if a division leaves a remainder (which would mean an
/// arithmetic bug).
pub fn gaussian_binomial(n: u64, k: u64, q: u64) -> BigUint {
    assert!(q >= 2, "q-binomials need q >= 2");
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let qq = BigUint::from(q);
    let mut acc = BigUint::one();
    for j in 1..=k {
        acc *= qq.pow((n - k + j) as u32) - 1u32;
        let d = qq.pow(j as u32) - 1u32;
        assert!((&acc % &d).is_zero(), "non-integral q-binomial step");
        acc /= d;
    }
    acc
}

/// `[n, k]_q` over signed arguments, zero outside `0 <= k <= n`.
pub fn gaussian_binomial_i(n: i64, k: i64, q: u64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    gaussian_binomial(n as u64, k as u64, q)
}

pub fn binomial_i(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    binomial(n as u64, k as u64)
}

/// Level size in either lattice: `C(n, k)` when `q` is `None`.
pub fn level(n: i64, k: i64, q: Option<u64>) -> BigUint {
    match q {
        None => binomial_i(n, k),
        Some(q) => gaussian_binomial_i(n, k, q),
    }
}

/// The `k` levels making up `Σ(n, k)`.
///
/// When `n + k` is even there are two equally large choices; `upper`
/// picks the higher one.
pub fn middle_levels(n: u64, k: u64, upper: bool) -> Result<Vec<u64>> {
    if k == 0 || k > n + 1 {
        return Err(Error::RangeError(format!("need 1 <= k <= n+1, got n={n} k={k}")));
    }
    let base = (n as i64 - k as i64).div_euclid(2);
    let start = if (n + k) % 2 == 0 && !upper { base } else { base + 1 };
    Ok((0..k as i64).map(|i| (start + i) as u64).collect())
}

/// Sum of the `k` largest level sizes of order `n`: `Σ(n, k)` for sets,
/// `Σ[n, k]` for subspaces.
pub fn sum_largest(n: u64, k: u64, q: Option<u64>) -> Result<BigUint> {
    let levels = middle_levels(n, k, true)?;
    Ok(levels.iter().map(|&i| level(n as i64, i as i64, q)).sum())
}

/// One identity instance and whether it held.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub holds: bool,
    pub vacuous: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: u64,
    pub k: u64,
    pub q: u64,
    pub value: String,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn check(name: &'static str, holds: bool, detail: String) -> IdentityCheck {
    IdentityCheck {
        name,
        holds,
        vacuous: false,
        detail,
    }
}

fn vacuous(name: &'static str) -> IdentityCheck {
    IdentityCheck {
        name,
        holds: true,
        vacuous: true,
        detail: "out of range".into(),
    }
}

/// Audits the standard identities at `(n, k, q)`.
///
/// * `symmetry`: `[n,k] = [n,n-k]`
/// * `unimodality`: `[n,k] < [n,l]` for `k < l <= n/2`
/// * `pascal-left`: `[n,k] = q^k [n-1,k] + [n-1,k-1]`
/// * `pascal-right`: `[n,k] = [n-1,k] + q^(n-k) [n-1,k-1]`
/// * `star-ratio-q`: `(q^n - 1) [n-1,k-1] = (q^k - 1) [n,k]`
/// * `star-ratio-set`: `n C(n-1,k-1) = k C(n,k)`
/// * `integrality`: the product formula agrees with the Pascal recursion
pub fn check_identities(n: u64, k: u64, q: u64) -> IdentityReport {
    let (ni, ki) = (n as i64, k as i64);
    let g = |a: i64, b: i64| gaussian_binomial_i(a, b, q);
    let v = g(ni, ki);
    let mut checks = Vec::new();

    if k <= n {
        let w = g(ni, ni - ki);
        checks.push(check("symmetry", v == w, format!("[{n},{k}]={v} [{n},{}]={w}", n - k)));
    } else {
        checks.push(vacuous("symmetry"));
    }

    if k < n / 2 {
        let mut ok = true;
        let mut detail = String::new();
        for l in k + 1..=n / 2 {
            let w = g(ni, l as i64);
            if v >= w {
                ok = false;
                detail = format!("[{n},{k}]={v} >= [{n},{l}]={w}");
                break;
            }
        }
        if ok {
            detail = format!("[{n},{k}] below every [{n},l] with {k} < l <= {}", n / 2);
        }
        checks.push(check("unimodality", ok, detail));
    } else {
        checks.push(vacuous("unimodality"));
    }

    if n >= 1 {
        let left = q_pow(q, k) * g(ni - 1, ki) + g(ni - 1, ki - 1);
        checks.push(check("pascal-left", v == left, format!("{v} vs {left}")));
        let right = g(ni - 1, ki) + if k <= n { q_pow(q, n - k) * g(ni - 1, ki - 1) } else { BigUint::zero() };
        checks.push(check("pascal-right", v == right, format!("{v} vs {right}")));
    } else {
        checks.push(vacuous("pascal-left"));
        checks.push(vacuous("pascal-right"));
    }

    if n >= 1 && k >= 1 {
        let lhs = (q_pow(q, n) - 1u32) * g(ni - 1, ki - 1);
        let rhs = (q_pow(q, k) - 1u32) * &v;
        checks.push(check("star-ratio-q", lhs == rhs, format!("{lhs} vs {rhs}")));
        let lhs = BigUint::from(n) * binomial_i(ni - 1, ki - 1);
        let rhs = BigUint::from(k) * binomial(n, k);
        checks.push(check("star-ratio-set", lhs == rhs, format!("{lhs} vs {rhs}")));
    } else {
        checks.push(vacuous("star-ratio-q"));
        checks.push(vacuous("star-ratio-set"));
    }

    let rec = pascal_table(n, q)[n as usize].get(k as usize).cloned().unwrap_or_default();
    checks.push(check("integrality", rec == v, format!("product {v}, recursion {rec}")));

    IdentityReport {
        n,
        k,
        q,
        value: v.to_string(),
        checks,
    }
}

/// Rows `0..=n` of the q-Pascal triangle built from
/// `[m,j] = [m-1,j-1] + q^j [m-1,j]` alone, without any division.
pub fn pascal_table(n: u64, q: u64) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for m in 1..=n as usize {
        let prev = &rows[m - 1];
        let mut row = vec![BigUint::zero(); m + 1];
        for (j, cell) in row.iter_mut().enumerate() {
            let a = if j >= 1 { prev[j - 1].clone() } else { BigUint::zero() };
            let b = prev.get(j).map(|x| q_pow(q, j as u64) * x).unwrap_or_default();
            *cell = a + b;
        }
        rows.push(row);
    }
    rows
}

/// The named bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    EkrSet,
    RayChaudhuriWilson,
    FranklWilson,
    AbsSet,
    ErdosSperner,
    EkrQ,
    FranklGraham,
    Lefmann,
    AbsQ,
    SpernerQ,
    SamotijQ,
    IntersectingKSpernerQ,
    TransferF,
    TransferFq,
    TransferFStar,
    TransferFStarQ,
    SimplexClusterSet,
    SimplexClusterQ,
    NontrivialSet,
    NontrivialQ,
    MatchingSet,
    MatchingQ,
    ErdosMatching,
    RainbowSet,
    RainbowQ,
    SimplexConjectureSet,
    SimplexConjectureQ,
    MatchingConjectureQ,
}

/// `(id, primary CLI name, aliases)`.
const NAMES: &[(TheoremId, &str, &[&str])] = &[
    (TheoremId::EkrSet, "ekr", &["thm1.1"]),
    (TheoremId::RayChaudhuriWilson, "rw", &["thm1.2"]),
    (TheoremId::FranklWilson, "fw", &["thm1.3"]),
    (TheoremId::AbsSet, "abs", &["thm1.4"]),
    (TheoremId::ErdosSperner, "erdos-sperner", &["thm1.5"]),
    (TheoremId::EkrQ, "ekr-q", &["thm1.6"]),
    (TheoremId::FranklGraham, "frankl-graham", &["thm1.7"]),
    (TheoremId::Lefmann, "lefmann", &["thm1.8"]),
    (TheoremId::AbsQ, "abs-q", &["thm1.9"]),
    (TheoremId::SpernerQ, "sperner-q", &["thm1.10"]),
    (TheoremId::SamotijQ, "samotij-q", &["thm1.11"]),
    (TheoremId::IntersectingKSpernerQ, "thm1.12", &["intersecting-k-sperner-q"]),
    (TheoremId::TransferF, "transfer-f", &["thm1.13-set"]),
    (TheoremId::TransferFq, "transfer-fq", &["thm1.13"]),
    (TheoremId::TransferFStar, "transfer-fstar", &["thm1.14-set"]),
    (TheoremId::TransferFStarQ, "transfer-fstar-q", &["thm1.14"]),
    (TheoremId::SimplexClusterSet, "simplex", &["thm4.2"]),
    (TheoremId::SimplexClusterQ, "simplex-q", &["thm4.3"]),
    (TheoremId::NontrivialSet, "nontrivial", &["thm4.4"]),
    (TheoremId::NontrivialQ, "nontrivial-q", &["thm4.5"]),
    (TheoremId::MatchingSet, "matching", &["thm4.6"]),
    (TheoremId::MatchingQ, "matching-q", &["thm4.7"]),
    (TheoremId::ErdosMatching, "emc", &["conj1.15"]),
    (TheoremId::RainbowSet, "rainbow", &["thm4.10"]),
    (TheoremId::RainbowQ, "rainbow-q", &["thm4.11"]),
    (TheoremId::SimplexConjectureSet, "conj4.1", &[]),
    (TheoremId::SimplexConjectureQ, "conj5.1", &[]),
    (TheoremId::MatchingConjectureQ, "conj5.2", &[]),
];

impl TheoremId {
    pub fn all() -> impl Iterator<Item = TheoremId> {
        NAMES.iter().map(|(id, _, _)| *id)
    }

    pub fn cli_name(self) -> &'static str {
        NAMES.iter().find(|(id, _, _)| *id == self).map(|(_, n, _)| *n).expect("named")
    }

    pub fn parse(s: &str) -> Result<TheoremId> {
        let s = s.to_ascii_lowercase();
        NAMES
            .iter()
            .find(|(_, n, a)| *n == s || a.contains(&s.as_str()))
            .map(|(id, _, _)| *id)
            .ok_or_else(|| Error::Usage(format!("unknown theorem id `{s}`")))
    }

    /// Whether the bound lives on the subspace side.
    pub fn is_q(self) -> bool {
        use TheoremId::*;
        matches!(
            self,
            EkrQ | FranklGraham
                | Lefmann
                | AbsQ
                | SpernerQ
                | SamotijQ
                | IntersectingKSpernerQ
                | TransferFq
                | TransferFStarQ
                | SimplexClusterQ
                | NontrivialQ
                | MatchingQ
                | RainbowQ
                | SimplexConjectureQ
                | MatchingConjectureQ
        )
    }

    /// Whether the statement is conjectural rather than proved.
    pub fn is_conjecture(self) -> bool {
        matches!(
            self,
            TheoremId::ErdosMatching | TheoremId::SimplexConjectureSet | TheoremId::SimplexConjectureQ | TheoremId::MatchingConjectureQ
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl Serialize for TheoremId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.cli_name())
    }
}

/// Parameters for [`theorem_bound`]. Unused fields are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundParams {
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub q: Option<u64>,
    pub s: Option<u64>,
    pub d: Option<u64>,
    /// The intersection-size set `L`, strictly increasing.
    pub l: Option<Vec<u64>>,
    /// The allowed member sizes `K`.
    pub sizes: Option<Vec<u64>>,
    /// Coefficients `c_0..c_k` of the transfer bounds.
    pub c: Option<Vec<BigRational>>,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Usage(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<u64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Usage(format!("bad entry `{t}` in {key}"))))
        .collect()
}

impl BoundParams {
    /// From `key=value` assignments: `n k q s d` integers, `L` and `K`
    /// comma lists, `c` a comma list of rationals.
    pub fn parse<'a>(assignments: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut p = BoundParams::default();
        for a in assignments {
            let (key, v) = a
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("expected key=value, got `{a}`")))?;
            let int = || v.parse::<u64>().map_err(|_| Error::Usage(format!("bad integer `{v}` for {key}")));
            match key {
                "n" => p.n = Some(int()?),
                "k" => p.k = Some(int()?),
                "q" => p.q = Some(int()?),
                "s" => p.s = Some(int()?),
                "d" => p.d = Some(int()?),
                "L" => p.l = Some(parse_list(key, v)?),
                "K" => p.sizes = Some(parse_list(key, v)?),
                "c" => p.c = Some(v.split(',').map(parse_rational).collect::<Result<_>>()?),
                _ => return Err(Error::Usage(format!("unknown bound parameter `{key}`"))),
            }
        }
        Ok(p)
    }

    /// Canonical `key=value` strings, in a fixed order.
    pub fn to_assignments(&self) -> Vec<String> {
        let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut out = Vec::new();
        for (k, v) in [("n", self.n), ("k", self.k), ("q", self.q), ("s", self.s), ("d", self.d)] {
            if let Some(v) = v {
                out.push(format!("{k}={v}"));
            }
        }
        if let Some(l) = &self.l {
            out.push(format!("L={}", join(l)));
        }
        if let Some(ks) = &self.sizes {
            out.push(format!("K={}", join(ks)));
        }
        if let Some(c) = &self.c {
            out.push(format!("c={}", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")));
        }
        out
    }

    fn need(&self, v: Option<u64>, name: &str) -> Result<u64> {
        v.ok_or_else(|| Error::MissingParameter(name.into()))
    }

    fn n(&self) -> Result<u64> {
        self.need(self.n, "n")
    }

    fn k(&self) -> Result<u64> {
        self.need(self.k, "k")
    }

    fn s(&self) -> Result<u64> {
        self.need(self.s, "s")
    }

    fn d(&self) -> Result<u64> {
        self.need(self.d, "d")
    }

    fn q(&self) -> Result<u64> {
        let q = self.need(self.q, "q")?;
        crate::finite_field::prime_power(q as u32)?;
        Ok(q)
    }

    /// `s = |L|`, from `L` or an explicit `s`; both must agree.
    fn s_from_l(&self) -> Result<u64> {
        if let Some(l) = &self.l {
            if l.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::ParameterMismatch("L must be strictly increasing".into()));
            }
            let s = l.len() as u64;
            if let Some(e) = self.s {
                if e != s {
                    return Err(Error::ParameterMismatch(format!("s={e} but |L|={s}")));
                }
            }
            return Ok(s);
        }
        self.s()
    }

    fn sizes(&self) -> Result<Vec<u64>> {
        self.sizes.clone().ok_or_else(|| Error::MissingParameter("K".into()))
    }

    /// `c_0..c_k`, with `k` taken from the vector when absent.
    fn c(&self) -> Result<(u64, Vec<BigRational>)> {
        let c = self.c.clone().ok_or_else(|| Error::MissingParameter("c".into()))?;
        if c.is_empty() {
            return Err(Error::ParameterMismatch("c needs at least one entry".into()));
        }
        let k = (c.len() - 1) as u64;
        if let Some(e) = self.k {
            if e != k {
                return Err(Error::ParameterMismatch(format!("k={e} but c has {} entries", c.len())));
            }
        }
        Ok((k, c))
    }
}

/// Exact bound value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundValue {
    Integer(BigUint),
    Rational(BigRational),
}

impl BoundValue {
    pub fn as_integer(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Integer(v) => Some(v),
            BoundValue::Rational(_) => None,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        match self {
            BoundValue::Integer(v) => BigRational::from_integer(BigInt::from(v.clone())),
            BoundValue::Rational(r) => r.clone(),
        }
    }

    /// Largest integer not exceeding the value: the bound on a family size.
    pub fn floor(&self) -> BigUint {
        match self {
            BoundValue::Integer(v) => v.clone(),
            BoundValue::Rational(r) => r.floor().to_integer().to_biguint().unwrap_or_default(),
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Integer(v) => write!(f, "{v}"),
            BoundValue::Rational(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A hypothesis of the bound's statement, evaluated at the given parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SideCondition {
    pub condition: String,
    pub holds: bool,
}

/// An evaluated bound. Side conditions that fail are reported, and the value
/// is still computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundResult {
    pub theorem: TheoremId,
    pub parameters: BTreeMap<String, String>,
    pub value: BoundValue,
    pub formula: String,
    /// The statement gives `<` rather than `<=`.
    pub strict: bool,
    pub conjecture: bool,
    /// Holds only for `n` sufficiently large, with no explicit threshold.
    pub asymptotic: bool,
    pub side_conditions: Vec<SideCondition>,
}

impl BoundResult {
    pub fn side_conditions_hold(&self) -> bool {
        self.side_conditions.iter().all(|c| c.holds)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.side_conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| format!("side condition violated: {}", c.condition))
            .collect()
    }
}

fn cond(condition: impl Into<String>, holds: bool) -> SideCondition {
    SideCondition {
        condition: condition.into(),
        holds,
    }
}

fn rat(v: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn coefficient_conditions(c: &[BigRational], conds: &mut Vec<SideCondition>) {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let k = c.len() - 1;
    let lower_ok = c[..k].iter().all(|x| *x >= zero && *x <= one);
    conds.push(cond("0 <= c_i <= 1 for i < k", lower_ok));
    conds.push(cond("0 < c_k <= 1", c[k] > zero && c[k] <= one));
}

/// `Σ_i c_i · level(n, i)`.
pub fn weighted_level_sum(n: u64, c: &[BigRational], q: Option<u64>) -> BigRational {
    c.iter()
        .enumerate()
        .map(|(i, ci)| ci * rat(level(n as i64, i as i64, q)))
        .sum()
}

/// Evaluates a named bound exactly.
pub fn theorem_bound(id: TheoremId, p: &BoundParams) -> Result<BoundResult> {
    use TheoremId::*;
    let mut conds = Vec::new();
    let mut params = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        params.insert(k.to_string(), v);
    };
    let (mut strict, mut asymptotic) = (false, false);
    let qv = if id.is_q() { Some(p.q()?) } else { None };
    if let Some(q) = qv {
        put("q", q.to_string());
    }
    let g = |a: i64, b: i64| level(a, b, qv);

    let (value, formula) = match id {
        EkrSet | EkrQ => {
            let (n, k) = (p.n()?, p.k()?);
            put("n", n.to_string());
            put("k", k.to_string());
            if id == EkrSet {
                conds.push(cond("n >= 2k", n >= 2 * k));
            } else {
                conds.push(cond("n >= 2k+1", n > 2 * k));
            }
            conds.push(cond("k >= 1", k >= 1));
            (BoundValue::Integer(g(n as i64 - 1, k as i64 - 1)), "level(n-1,k-1)".to_string())
        }
        RayChaudhuriWilson | FranklGraham => {
            let (n, s) = (p.n()?, p.s_from_l()?);
            put("n", n.to_string());
            put("s", s.to_string());
            if let Some(k) = p.k {
                put("k", k.to_string());
                if let Some(l) = &p.l {
                    conds.push(cond("every l in L is below k", l.iter().all(|&x| x < k)));
                }
            }
            (BoundValue::Integer(g(n as i64, s as i64)), "level(n,s)".into())
        }
        FranklWilson | Lefmann => {
            let (n, s) = (p.n()?, p.s_from_l()?);
            put("n", n.to_string());
            put("s", s.to_string());
            let v = (0..=s as i64).map(|i| g(n as i64, i)).sum();
            (BoundValue::Integer(v), "sum_{i=0..s} level(n,i)".into())
        }
        AbsSet | AbsQ => {
            let (n, s) = (p.n()?, p.s_from_l()?);
            let ks = p.sizes()?;
            let r = ks.len() as u64;
            put("n", n.to_string());
            put("s", s.to_string());
            put("K", ks.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            conds.push(cond("k_i > s - r for every k_i in K", ks.iter().all(|&x| x as i64 > s as i64 - r as i64)));
            conds.push(cond("K nonempty", r >= 1));
            let lo = s as i64 - r as i64 + 1;
            let v = (lo..=s as i64).map(|i| g(n as i64, i)).sum();
            (BoundValue::Integer(v), "sum_{i=s-r+1..s} level(n,i)".into())
        }
        ErdosSperner | SamotijQ => {
            let (n, k) = (p.n()?, p.k()?);
            put("n", n.to_string());
            put("k", k.to_string());
            conds.push(cond("1 <= k <= n+1", k >= 1 && k <= n + 1));
            (BoundValue::Integer(sum_largest(n, k, qv)?), "sum of the k largest levels".into())
        }
        SpernerQ => {
            let n = p.n()?;
            put("n", n.to_string());
            (BoundValue::Integer(g(n as i64, n as i64 / 2)), "level(n,floor(n/2))".into())
        }
        IntersectingKSpernerQ => {
            let (n, k) = (p.n()?, p.k()?);
            put("n", n.to_string());
            put("k", k.to_string());
            let h = n / 2;
            conds.push(cond("1 <= k <= floor(n/2)", k >= 1 && k <= h));
            let lo = h as i64 - k as i64 + 1;
            let v = (lo.max(1)..=h as i64).map(|j| g(n as i64 - 1, j - 1)).sum();
            (BoundValue::Integer(v), "sum_{j=floor(n/2)-k+1..floor(n/2)} level(n-1,j-1)".into())
        }
        TransferF | TransferFq => {
            let n = p.n()?;
            let (k, c) = p.c()?;
            put("n", n.to_string());
            put("k", k.to_string());
            put("c", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            coefficient_conditions(&c, &mut conds);
            conds.push(cond("n >= 2k", n >= 2 * k));
            asymptotic = id == TransferFq;
            (
                BoundValue::Rational(weighted_level_sum(n, &c, qv)),
                "sum_{i=0..k} c_i level(n,i)".into(),
            )
        }
        TransferFStar | TransferFStarQ => {
            let (n, k) = (p.n()?, p.k()?);
            let c = match &p.c {
                Some(c) if c.len() == 1 => c[0].clone(),
                Some(_) => return Err(Error::ParameterMismatch("f* takes a single coefficient c".into())),
                None => return Err(Error::MissingParameter("c".into())),
            };
            put("n", n.to_string());
            put("k", k.to_string());
            put("c", c.to_string());
            conds.push(cond("0 < c <= 1", c > BigRational::zero() && c <= BigRational::one()));
            conds.push(cond("n >= 2k", n >= 2 * k));
            (BoundValue::Rational(c * rat(g(n as i64, k as i64))), "c level(n,k)".into())
        }
        SimplexClusterSet | NontrivialSet | SimplexConjectureSet => {
            let (n, k, d) = (p.n()?, p.k()?, p.d()?);
            put("n", n.to_string());
            put("k", k.to_string());
            put("d", d.to_string());
            match id {
                SimplexClusterSet => {
                    conds.push(cond("k >= d+1 >= 3", k > d && d >= 2));
                    conds.push(cond("n >= 2k-d+2", n as i64 >= 2 * k as i64 - d as i64 + 2));
                }
                NontrivialSet => {
                    conds.push(cond("d >= k >= 4", d >= k && k >= 4));
                    asymptotic = true;
                }
                _ => {
                    conds.push(cond("k >= d+1 >= 3", k > d && d >= 2));
                    conds.push(cond("n >= k(d+1)/d", n * d >= k * (d + 1)));
                }
            }
            (BoundValue::Integer(g(n as i64 - 1, k as i64 - 1)), "C(n-1,k-1)".into())
        }
        SimplexClusterQ | NontrivialQ | SimplexConjectureQ | MatchingQ | RainbowQ => {
            let (n, k) = (p.n()?, p.k()?);
            let q = qv.expect("q side");
            put("n", n.to_string());
            put("k", k.to_string());
            match id {
                SimplexClusterQ => {
                    let d = p.d()?;
                    put("d", d.to_string());
                    conds.push(cond("k >= d+1 >= 3", k > d && d >= 2));
                    strict = true;
                    asymptotic = true;
                }
                NontrivialQ => {
                    let d = p.d()?;
                    put("d", d.to_string());
                    conds.push(cond("d >= k >= 4", d >= k && k >= 4));
                    asymptotic = true;
                }
                SimplexConjectureQ => {
                    let d = p.d()?;
                    put("d", d.to_string());
                    conds.push(cond("k >= d+1 >= 3", k > d && d >= 2));
                    conds.push(cond("n >= k(d+1)/d", n * d >= k * (d + 1)));
                }
                MatchingQ | RainbowQ => {
                    if let Some(s) = p.s {
                        put("s", s.to_string());
                    }
                    asymptotic = true;
                }
                _ => unreachable!(),
            }
            let v = if k <= n && k >= 1 {
                q_pow(q, n - k) * g(n as i64 - 1, k as i64 - 1)
            } else {
                BigUint::zero()
            };
            (BoundValue::Integer(v), "q^(n-k) [n-1,k-1] = [n,k]-[n-1,k]".into())
        }
        MatchingSet => {
            let (n, k, s) = (p.n()?, p.k()?, p.s()?);
            put("n", n.to_string());
            put("k", k.to_string());
            put("s", s.to_string());
            conds.push(cond("n >= (2s+1)k - s", n as i64 >= ((2 * s + 1) * k) as i64 - s as i64));
            let v = binomial(n, k) - binomial_i(n as i64 - s as i64, k as i64);
            (BoundValue::Integer(v), "C(n,k) - C(n-s,k)".into())
        }
        ErdosMatching | RainbowSet => {
            let (n, k, s) = (p.n()?, p.k()?, p.s()?);
            put("n", n.to_string());
            put("k", k.to_string());
            put("s", s.to_string());
            if id == ErdosMatching {
                conds.push(cond("n >= (s+1)k", n >= (s + 1) * k));
            } else {
                asymptotic = true;
            }
            let a = binomial_i(((s + 1) * k) as i64 - 1, k as i64);
            let b = binomial(n, k) - binomial_i(n as i64 - s as i64, k as i64);
            (BoundValue::Integer(a.max(b)), "max{C((s+1)k-1,k), C(n,k)-C(n-s,k)}".into())
        }
        MatchingConjectureQ => {
            let (n, k, s) = (p.n()?, p.k()?, p.s()?);
            put("n", n.to_string());
            put("k", k.to_string());
            put("s", s.to_string());
            conds.push(cond("n >= (s+1)k", n >= (s + 1) * k));
            let a = g(n as i64, k as i64) - g(n as i64 - 1, k as i64);
            let b = BigUint::from(s) * g(n as i64 - 1, k as i64 - 1);
            (BoundValue::Integer(a.min(b)), "min{[n,k]-[n-1,k], s[n-1,k-1]}".into())
        }
    };
    Ok(BoundResult {
        theorem: id,
        parameters: params,
        value,
        formula,
        strict,
        conjecture: id.is_conjecture(),
        asymptotic,
        side_conditions: conds,
    })
}

/// Which of the two level-dominance inequalities to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    /// `Σ_{i<=k} C(n,i) < ε C(n,k+1)`
    Sets,
    /// `Σ_{i<=k} [n,i] < ε [n,k+1]`
    Subspaces,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub kind: ThresholdKind,
    pub k: u64,
    pub epsilon: String,
    pub q: Option<u64>,
    /// Least `n >= 2k+2` at which the strict inequality holds.
    pub n0: Option<u64>,
    pub horizon: u64,
    /// First `n` in `[n0, n0 + horizon]` where the inequality fails.
    pub first_violation: Option<u64>,
    /// `(k+1)^2/ε + k`; the set inequality holds for every larger `n`.
    pub set_sufficient_bound: String,
    /// Least `n >= 2k+2` with `q^(n-k) > (k+1)(q^(k+1)-1)/ε + 1`, after which
    /// the subspace inequality holds.
    pub q_sufficient_n: Option<u64>,
}

impl ThresholdReport {
    pub fn sweep_ok(&self) -> bool {
        self.n0.is_some() && self.first_violation.is_none()
    }

    pub fn set_bound(&self) -> BigRational {
        parse_rational(&self.set_sufficient_bound).expect("own output")
    }
}

/// Whether `Σ_{i<=k} level(n,i) < ε level(n,k+1)`.
pub fn dominance_holds(n: u64, k: u64, eps: &BigRational, q: Option<u64>) -> bool {
    let lhs: BigUint = (0..=k as i64).map(|i| level(n as i64, i, q)).sum();
    let rhs = rat(level(n as i64, k as i64 + 1, q)) * eps;
    rat(lhs) < rhs
}

const THRESHOLD_SEARCH_LIMIT: u64 = 1_000_000;

fn first_dominance(k: u64, eps: &BigRational, q: Option<u64>, from: u64) -> Option<u64> {
    (from..from + THRESHOLD_SEARCH_LIMIT).find(|&n| dominance_holds(n, k, eps, q))
}

/// Least `n0 >= 2k+2` where the dominance inequality holds, swept over
/// `[n0, n0 + horizon]`.
pub fn threshold_n0(kind: ThresholdKind, k: u64, eps: &BigRational, q: Option<u64>, horizon: u64) -> Result<ThresholdReport> {
    if k < 1 {
        return Err(Error::RangeError("k must be at least 1".into()));
    }
    if !eps.is_positive() {
        return Err(Error::RangeError("epsilon must be positive".into()));
    }
    let q = match kind {
        ThresholdKind::Sets => None,
        ThresholdKind::Subspaces => Some(q.filter(|&q| q >= 2).ok_or_else(|| Error::MissingParameter("q".into()))?),
    };
    let start = 2 * k + 2;
    let n0 = first_dominance(k, eps, q, start);
    let first_violation = n0.and_then(|n0| (n0..=n0 + horizon).find(|&n| !dominance_holds(n, k, eps, q)));
    let k1 = rat(BigUint::from(k + 1));
    let bound = &k1 * &k1 / eps + rat(BigUint::from(k));
    let q_sufficient_n = q.map(|q| {
        let target = BigRational::from_integer(BigInt::from(k + 1)) * rat(q_pow(q, k + 1) - 1u32) / eps + BigRational::one();
        (start..).find(|&n| rat(q_pow(q, n - k)) > target).expect("unbounded")
    });
    Ok(ThresholdReport {
        kind,
        k,
        epsilon: eps.to_string(),
        q,
        n0,
        horizon,
        first_violation,
        set_sufficient_bound: bound.to_string(),
        q_sufficient_n,
    })
}

/// Outcome of the randomized audit of the "top coefficient decides"
/// ordering of weighted level sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderingReport {
    pub k: u64,
    pub q: Option<u64>,
    pub epsilon: String,
    pub n: u64,
    pub trials: u64,
    pub comparisons_checked: u64,
    pub violations: Vec<String>,
}

fn random_unit_rational(rng: &mut ChaCha8Rng, den: i64) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(0..=den)), BigInt::from(den))
}

fn fmt_vec(v: &[BigRational]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Smallest `n` from which, for coefficient vectors in `[0,1]^(k+1)` whose
/// highest differing entries are at least `eps` apart, the larger top entry
/// always gives the larger weighted level sum: the max over `j0 = 1..k` of
/// the first `n >= 2k` with `Σ_{i<j0} level(n,i) < eps level(n,j0)`.
pub fn ordering_threshold(k: u64, eps: &BigRational, q: Option<u64>) -> u64 {
    (1..=k)
        .map(|j0| first_dominance(j0 - 1, eps, q, 2 * k).unwrap_or(u64::MAX))
        .max()
        .unwrap_or(2 * k)
        .max(2 * k)
}

/// Samples pairs `b, c` of rational vectors in `[0,1]^(k+1)` whose highest
/// differing coordinate differs by at least `eps`, and checks at `n` that
/// `f(n,b) > f(n,c)` forces `b` to win at that coordinate.
pub fn check_ordering_property(k: u64, eps: &BigRational, q: Option<u64>, n: u64, trials: u64, seed: u64) -> OrderingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den: i64 = 60;
    let mut checked = 0;
    let mut violations = Vec::new();
    let eps_num = (eps * BigRational::from_integer(BigInt::from(den))).ceil().to_integer().to_i64().unwrap_or(den + 1);
    for _ in 0..trials {
        let len = (k + 1) as usize;
        let b: Vec<BigRational> = (0..len).map(|_| random_unit_rational(&mut rng, den)).collect();
        let j0 = rng.gen_range(0..len);
        let bj = (&b[j0] * BigRational::from_integer(BigInt::from(den))).to_integer().to_i64().unwrap_or(0);
        let choices: Vec<i64> = (0..=den).filter(|&x| (x - bj).abs() >= eps_num.max(1)).collect();
        if choices.is_empty() {
            continue;
        }
        let mut c = b.clone();
        c[j0] = BigRational::new(BigInt::from(choices[rng.gen_range(0..choices.len())]), BigInt::from(den));
        for ci in c.iter_mut().take(j0) {
            *ci = random_unit_rational(&mut rng, den);
        }
        let fb = weighted_level_sum(n, &b, q);
        let fc = weighted_level_sum(n, &c, q);
        for (x, y, fx, fy) in [(&b, &c, &fb, &fc), (&c, &b, &fc, &fb)] {
            if fx > fy {
                checked += 1;
                if x[j0] <= y[j0] {
                    violations.push(format!("f({})={} > f({})={} at n={n}", fmt_vec(x), fx, fmt_vec(y), fy));
                }
            }
        }
    }
    OrderingReport {
        k,
        q,
        epsilon: eps.to_string(),
        n,
        trials,
        comparisons_checked: checked,
        violations,
    }
}
