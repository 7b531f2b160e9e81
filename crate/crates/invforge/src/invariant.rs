//! Invariant monomials: products `prod_a <O_a>^(r_a)` whose scaling
//! factors compensate, `prod_a lambda_a^(r_a) = 1`, so the product of
//! expectation values survives the channel unchanged.
//!
//! Invariants fall into three families. The first is a single operator
//! with `lambda = 1`. The second is a ratio of two operators sharing the
//! same `lambda != 1`. The third is any other exponent combination that
//! satisfies the compensation condition.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::basis::{basis_matrix, LabelKind, LabeledOperator, OperatorLabel};
use crate::channel::{ChannelFamily, DensityMatrix, FamilyName};
use crate::error::{Error, Result};
use crate::linalg::ONE;
use crate::spectral::{composite_operators, robust_eigenoperators};
use crate::transfer::random_density_from;

/// Default guard for denominators: a factor with a negative exponent whose
/// expectation is smaller than this makes the monomial undefined.
pub const EPS_DEN: f64 = 1e-6;
/// Acceptance tolerance for the compensation product during the search.
pub const SEARCH_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FamilyClass {
    First,
    Second,
    Third,
}

impl FamilyClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyClass::First => "first",
            FamilyClass::Second => "second",
            FamilyClass::Third => "third",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(FamilyClass::First),
            "second" => Ok(FamilyClass::Second),
            "third" => Ok(FamilyClass::Third),
            _ => Err(Error::BadArgument(format!("unknown family class `{s}`"))),
        }
    }
}

impl fmt::Display for FamilyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// One factor `<O>^exponent` of a monomial.
#[derive(Debug, Clone)]
pub struct Term {
    pub op: LabeledOperator,
    pub exponent: i32,
}

/// The encodable quantity `prod_a <O_a>^(r_a)`.
#[derive(Debug, Clone)]
pub struct InvariantMonomial {
    pub terms: Vec<Term>,
    pub class: FamilyClass,
}

/// Result of evaluating a monomial; a denominator below the guard makes
/// the value undefined rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvariantValue {
    Value(Complex64),
    Undefined,
}

impl InvariantValue {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            InvariantValue::Value(v) => Some(*v),
            InvariantValue::Undefined => None,
        }
    }
}

impl InvariantMonomial {
    /// Build a monomial from `(token, exponent)` pairs, resolving tokens
    /// to matrices (basis labels and the transposition-channel sums).
    pub fn from_tokens(n: usize, class: FamilyClass, terms: &[(&str, i32)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|(tok, e)| {
                if *e == 0 {
                    return Err(Error::BadArgument(format!("zero exponent on {tok}")));
                }
                if e.abs() > 2 {
                    return Err(Error::BadArgument(format!(
                        "exponent {e} on {tok} outside the search bound |r| <= 2"
                    )));
                }
                Ok(Term {
                    op: resolve_operator(tok, n)?,
                    exponent: *e,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if terms.is_empty() || terms.len() > 3 {
            return Err(Error::BadArgument(format!(
                "monomials carry 1..=3 terms, got {}",
                terms.len()
            )));
        }
        Ok(InvariantMonomial { terms, class })
    }

    /// `prod_a Tr(O_a rho)^(r_a)`.
    pub fn evaluate(&self, rho: &DensityMatrix, eps_den: f64) -> InvariantValue {
        let mut acc = ONE;
        for t in &self.terms {
            let e = rho.expectation(&t.op.matrix);
            if t.exponent < 0 && e.norm() < eps_den {
                return InvariantValue::Undefined;
            }
            acc *= e.powi(t.exponent);
        }
        InvariantValue::Value(acc)
    }

    /// Human-readable form such as `<S(1,0)>*<A(1,0)>/<d(1)>`.
    pub fn render(&self) -> String {
        let part = |positive: bool| -> Vec<String> {
            self.terms
                .iter()
                .filter(|t| (t.exponent > 0) == positive)
                .map(|t| {
                    let e = t.exponent.abs();
                    if e == 1 {
                        format!("<{}>", t.op.token())
                    } else {
                        format!("<{}>^{e}", t.op.token())
                    }
                })
                .collect()
        };
        let num = part(true);
        let den = part(false);
        let num_s = if num.is_empty() {
            "1".to_string()
        } else {
            num.join("*")
        };
        if den.is_empty() {
            num_s
        } else {
            format!("{num_s}/{}", den.join("*"))
        }
    }

    /// Canonical key: terms sorted by token, signs flipped so the first
    /// exponent is positive, exponent vector divided by its gcd.
    pub fn canonical_key(&self) -> Vec<(String, i32)> {
        let mut key: Vec<(String, i32)> = self
            .terms
            .iter()
            .map(|t| (t.op.token(), t.exponent))
            .collect();
        key.sort();
        if key.first().map(|(_, e)| *e < 0).unwrap_or(false) {
            for (_, e) in &mut key {
                *e = -*e;
            }
        }
        let g = key.iter().fold(0u32, |acc, (_, e)| gcd(acc, e.unsigned_abs()));
        if g > 1 {
            for (_, e) in &mut key {
                *e /= g as i32;
            }
        }
        key
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Equivalence up to reciprocal and positive integer powers.
pub fn equivalent(a: &InvariantMonomial, b: &InvariantMonomial) -> bool {
    a.canonical_key() == b.canonical_key()
}

/// Resolve a token to an operator: basis labels directly, plus the
/// transposition-channel sums `Osum`, `O2(k)`, `O3(k)`.
pub fn resolve_operator(token: &str, n: usize) -> Result<LabeledOperator> {
    let label = OperatorLabel::parse(token, n)?;
    match &label.kind {
        LabelKind::Custom(_) => composite_operators(n)?
            .into_iter()
            .find(|op| op.label == label)
            .ok_or_else(|| Error::TokenParse(token.to_string())),
        _ => basis_matrix(&label),
    }
}

/// Search bounds for [`find_invariants`].
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Number of parameter draws the compensation must hold at.
    pub draws: usize,
    /// Maximum number of distinct operators per monomial.
    pub max_terms: usize,
    /// Maximum |exponent|.
    pub max_exp: i32,
    /// Acceptance tolerance on `|prod lambda^r - 1|`.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            draws: 5,
            max_terms: 3,
            max_exp: 2,
            tol: SEARCH_TOL,
        }
    }
}

/// Exhaustively search bounded-exponent monomials over the family's
/// robust re-scaling operators. A monomial is accepted only if its
/// compensation product is 1 at every draw; the identity operator is
/// excluded (its expectation is constant and carries no information).
/// Output is deduplicated (no reciprocals, no monomial that is a positive
/// power of another accepted one) and classified.
pub fn find_invariants(
    family: &ChannelFamily,
    opts: &SearchOptions,
    seed: u64,
) -> Result<Vec<InvariantMonomial>> {
    let eigenops = robust_eigenoperators(family, opts.draws, seed)?;
    let n = family.dim;
    let mut entries: Vec<(String, LabeledOperator, Vec<Complex64>)> = Vec::new();
    for e in &eigenops {
        if e.label.is_identity() {
            continue;
        }
        let op = match &e.label.kind {
            LabelKind::Custom(_) => match resolve_operator(&e.label.token(), n) {
                Ok(named) => named,
                Err(_) => LabeledOperator {
                    label: e.label.clone(),
                    matrix: e.matrix.clone(),
                },
            },
            _ => basis_matrix(&e.label)?,
        };
        entries.push((e.label.token(), op, e.lambdas.clone()));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    let mut accepted: BTreeMap<Vec<(String, i32)>, Vec<usize>> = BTreeMap::new();
    let mut combo = Vec::new();
    let mut exponents = Vec::new();
    for size in 1..=opts.max_terms.min(entries.len()) {
        combo.clear();
        combinations(entries.len(), size, 0, &mut combo, &mut |subset| {
            exponents.clear();
            exponent_vectors(size, opts.max_exp, &mut exponents, &mut |exps| {
                let ok = (0..opts.draws).all(|d| {
                    let mut prod = ONE;
                    for (j, &idx) in subset.iter().enumerate() {
                        prod *= entries[idx].2[d].powi(exps[j]);
                    }
                    (prod - ONE).norm() <= opts.tol
                });
                if ok {
                    let key: Vec<(String, i32)> = subset
                        .iter()
                        .zip(exps)
                        .map(|(&idx, &e)| (entries[idx].0.clone(), e))
                        .collect();
                    accepted.entry(key).or_insert_with(|| subset.to_vec());
                }
            });
        });
    }

    // positive-power dedup: drop any key that is an integer multiple of
    // another accepted key
    let keys: Vec<Vec<(String, i32)>> = accepted.keys().cloned().collect();
    for key in keys {
        let g = key.iter().fold(0u32, |acc, (_, e)| gcd(acc, e.unsigned_abs()));
        if g > 1 {
            let primitive: Vec<(String, i32)> = key
                .iter()
                .map(|(t, e)| (t.clone(), e / g as i32))
                .collect();
            if accepted.contains_key(&primitive) {
                accepted.remove(&key);
            }
        }
    }

    let by_token: BTreeMap<String, &(String, LabeledOperator, Vec<Complex64>)> =
        entries.iter().map(|e| (e.0.clone(), e)).collect();
    let mut out = Vec::with_capacity(accepted.len());
    for key in accepted.keys() {
        let terms: Vec<Term> = key
            .iter()
            .map(|(tok, e)| Term {
                op: by_token[tok].1.clone(),
                exponent: *e,
            })
            .collect();
        let lambdas: Vec<&Vec<Complex64>> = key.iter().map(|(tok, _)| &by_token[tok].2).collect();
        let class = classify(key, &lambdas, opts.draws);
        out.push(InvariantMonomial { terms, class });
    }
    out.sort_by_key(|m| (m.class, m.canonical_key()));
    Ok(out)
}

fn combinations(
    n: usize,
    size: usize,
    start: usize,
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if current.len() == size {
        visit(current);
        return;
    }
    let remaining = size - current.len();
    for i in start..=n.saturating_sub(remaining) {
        current.push(i);
        combinations(n, size, i + 1, current, visit);
        current.pop();
    }
}

/// All nonzero exponent vectors with `|r| <= max_exp` and `r[0] > 0`.
fn exponent_vectors(
    size: usize,
    max_exp: i32,
    current: &mut Vec<i32>,
    visit: &mut impl FnMut(&[i32]),
) {
    if current.len() == size {
        visit(current);
        return;
    }
    let lo = if current.is_empty() { 1 } else { -max_exp };
    for e in lo..=max_exp {
        if e == 0 {
            continue;
        }
        current.push(e);
        exponent_vectors(size, max_exp, current, visit);
        current.pop();
    }
}

fn classify(key: &[(String, i32)], lambdas: &[&Vec<Complex64>], draws: usize) -> FamilyClass {
    if key.len() == 1 && key[0].1 == 1 {
        let unit = lambdas[0].iter().all(|l| (l - ONE).norm() <= 1e-8);
        if unit {
            return FamilyClass::First;
        }
    }
    if key.len() == 2 && key[0].1 == 1 && key[1].1 == -1 {
        let equal = (0..draws).all(|d| (lambdas[0][d] - lambdas[1][d]).norm() <= 1e-8);
        let nontrivial = lambdas[0].iter().any(|l| (l - ONE).norm() > 1e-6);
        if equal && nontrivial {
            return FamilyClass::Second;
        }
    }
    FamilyClass::Third
}

/// Verification report: worst relative deviation of the invariant across
/// random (state, parameter) trials, plus the rate of undefined draws.
#[derive(Debug, Clone, Copy)]
pub struct VerifyReport {
    pub max_rel_dev: f64,
    pub undefined_rate: f64,
    pub trials: usize,
}

/// Monte-Carlo invariance check: draw a random state and random channel
/// parameters, compare the monomial before and after the channel.
/// Undefined draws are resampled; if fewer than `trials` defined draws
/// are collected within a 10x budget, the invariant is systematically
/// undefined on this family and an error is returned.
pub fn verify_invariance(
    monomial: &InvariantMonomial,
    family: &ChannelFamily,
    trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::BadArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = trials * 10;
    let mut done = 0usize;
    let mut total = 0usize;
    let mut undefined = 0usize;
    let mut max_dev = 0.0f64;
    while done < trials {
        if total >= budget {
            return Err(Error::UndefinedBudget { undefined, total });
        }
        total += 1;
        let params = family.sample_params(&mut rng, false);
        let channel = family.instantiate(&params)?;
        let rho = random_density_from(&mut rng, family.dim, None)?;
        let before = monomial.evaluate(&rho, EPS_DEN);
        let after = monomial.evaluate(&channel.apply(&rho)?, EPS_DEN);
        match (before.value(), after.value()) {
            (Some(b), Some(a)) => {
                let dev = (a - b).norm() / b.norm().max(1e-12);
                max_dev = max_dev.max(dev);
                done += 1;
            }
            _ => undefined += 1,
        }
    }
    Ok(VerifyReport {
        max_rel_dev: max_dev,
        undefined_rate: undefined as f64 / total as f64,
        trials,
    })
}

/// Where a catalog entry comes from: the verified catalog proper, the
/// deliberately retained variant that verification is expected to reject,
/// or a fresh search result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogSource {
    Catalog,
    VariantNegativeControl,
    Discovered,
}

impl CatalogSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            CatalogSource::Catalog => "catalog",
            CatalogSource::VariantNegativeControl => "variant-negative-control",
            CatalogSource::Discovered => "discovered",
        }
    }
}

/// One cataloged invariant of a channel family.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub family: FamilyName,
    pub dim: usize,
    pub monomial: InvariantMonomial,
    pub source: CatalogSource,
}

/// Serialized form of a catalog entry (the catalog file format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntryRaw {
    pub family: String,
    pub dim: usize,
    pub terms: Vec<TermRaw>,
    pub family_class: String,
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermRaw {
    pub op: String,
    pub exp: i32,
}

impl CatalogEntry {
    pub fn to_raw(&self) -> CatalogEntryRaw {
        CatalogEntryRaw {
            family: self.family.as_str().to_string(),
            dim: self.dim,
            terms: self
                .monomial
                .terms
                .iter()
                .map(|t| TermRaw {
                    op: t.op.token(),
                    exp: t.exponent,
                })
                .collect(),
            family_class: self.monomial.class.as_str().to_string(),
            source: self.source.as_str().to_string(),
        }
    }

    pub fn from_raw(raw: &CatalogEntryRaw) -> Result<Self> {
        let family = FamilyName::parse(&raw.family)?;
        let class = FamilyClass::parse(&raw.family_class)?;
        let terms: Vec<(&str, i32)> = raw.terms.iter().map(|t| (t.op.as_str(), t.exp)).collect();
        let source = match raw.source.as_str() {
            "catalog" => CatalogSource::Catalog,
            "variant-negative-control" => CatalogSource::VariantNegativeControl,
            "discovered" => CatalogSource::Discovered,
            other => return Err(Error::BadArgument(format!("unknown source `{other}`"))),
        };
        Ok(CatalogEntry {
            family,
            dim: raw.dim,
            monomial: InvariantMonomial::from_tokens(raw.dim, class, &terms)?,
            source,
        })
    }
}

fn entry(
    family: FamilyName,
    n: usize,
    class: FamilyClass,
    source: CatalogSource,
    terms: &[(&str, i32)],
) -> Result<CatalogEntry> {
    Ok(CatalogEntry {
        family,
        dim: n,
        monomial: InvariantMonomial::from_tokens(n, class, terms)?,
        source,
    })
}

/// The known invariant sets for every channel family, transcribed in
/// basis tokens. Unitary operators enter through their shift/clock form:
/// `Z^m` is `XZ(0,m)`, `X^m Z^l` is `XZ(m,l)` up to a constant phase that
/// cancels in every ratio. Expectations of level projectors are diagonal
/// expectations, so `pi_k` enters as `d(k)`.
///
/// The generalized-amplitude-damping row additionally carries the
/// `<S>/<D>` variant flagged as a negative control: verification selects
/// the `<S>/<A>` form and is expected to reject the variant.
pub fn reference_catalog(family: FamilyName, n: usize) -> Result<Vec<CatalogEntry>> {
    use CatalogSource::{Catalog, VariantNegativeControl};
    use FamilyClass::{First, Second, Third};
    if family.qubit_only() && n != 2 {
        return Err(Error::QubitOnly {
            family: family.as_str().into(),
            dim: n,
        });
    }
    crate::basis::check_dim(n)?;
    let e = |class, terms: &[(&str, i32)]| entry(family, n, class, Catalog, terms);
    let mut out = Vec::new();
    match family {
        FamilyName::BitFlip => {
            out.push(e(First, &[("S(1,0)", 1)])?);
            out.push(e(Second, &[("A(1,0)", 1), ("D(1,0)", -1)])?);
        }
        FamilyName::PhaseFlip | FamilyName::DephasingQubit => {
            out.push(e(First, &[("D(1,0)", 1)])?);
            out.push(e(Second, &[("S(1,0)", 1), ("A(1,0)", -1)])?);
        }
        FamilyName::BitPhaseFlip => {
            out.push(e(First, &[("A(1,0)", 1)])?);
            out.push(e(Second, &[("S(1,0)", 1), ("D(1,0)", -1)])?);
        }
        FamilyName::EquiprobablePauli => {
            out.push(e(Second, &[("S(1,0)", 1), ("D(1,0)", -1)])?);
        }
        FamilyName::Adc => {
            out.push(e(Second, &[("S(1,0)", 1), ("A(1,0)", -1)])?);
            out.push(e(Third, &[("S(1,0)", 1), ("A(1,0)", 1), ("d(1)", -1)])?);
        }
        FamilyName::Gadc => {
            out.push(e(Second, &[("S(1,0)", 1), ("A(1,0)", -1)])?);
            out.push(entry(
                family,
                n,
                Second,
                VariantNegativeControl,
                &[("S(1,0)", 1), ("D(1,0)", -1)],
            )?);
        }
        FamilyName::Pauli | FamilyName::GenPauliChannel => {}
        FamilyName::GenFlip => {
            let t = |r: usize, s: usize| format!("XZ({r},{s})");
            for m in 1..n {
                out.push(e(First, &[(&t(m, 0), 1)])?);
            }
            for m in 1..n {
                out.push(e(Second, &[(&t(0, m), 1), (&t(m, m), -1)])?);
            }
            for m in 1..n {
                for l in 1..n {
                    if l != m {
                        // <Z^m> / <Z^m X^l>
                        out.push(e(Second, &[(&t(0, m), 1), (&t(l, m), -1)])?);
                    }
                }
            }
        }
        FamilyName::GenPhase => {
            let t = |r: usize, s: usize| format!("XZ({r},{s})");
            for m in 1..n {
                out.push(e(First, &[(&t(0, m), 1)])?);
            }
            for m in 1..n {
                out.push(e(Second, &[(&t(m, 0), 1), (&t(m, m), -1)])?);
            }
            for m in 1..n {
                for l in 1..n {
                    if l != m {
                        // <X^m> / <X^m Z^l>
                        out.push(e(Second, &[(&t(m, 0), 1), (&t(m, l), -1)])?);
                    }
                }
            }
        }
        FamilyName::GenFlipPhase => {
            let t = |r: usize, s: usize| format!("XZ({r},{s})");
            for m in 1..n {
                out.push(e(First, &[(&t(m, m), 1)])?);
            }
            for m in 1..n {
                // <X^m> / <Z^(N-m)>
                out.push(e(Second, &[(&t(m, 0), 1), (&t(0, n - m), -1)])?);
            }
            for m in 1..n {
                for l in (m + 1)..n {
                    // <X^m> / <X^l Z^(l-m)> and <Z^m> / <X^(l-m) Z^l>
                    out.push(e(Second, &[(&t(m, 0), 1), (&t(l, l - m), -1)])?);
                    out.push(e(Second, &[(&t(0, m), 1), (&t(l - m, l), -1)])?);
                }
            }
        }
        FamilyName::DephasingQunit => {
            for k in 0..n - 1 {
                // populations are untouched, so d(k+1) - d(k) is conserved
                out.push(e(First, &[(&format!("D({},{})", k + 1, k), 1)])?);
            }
            for k in 1..n {
                for l in 0..k {
                    out.push(e(
                        Second,
                        &[(&format!("S({k},{l})"), 1), (&format!("A({k},{l})"), -1)],
                    )?);
                }
            }
        }
        FamilyName::Depolarizing => {
            for k in 1..n {
                for l in 0..k {
                    let d = format!("D({k},{l})");
                    out.push(e(Second, &[(&format!("S({k},{l})"), 1), (&d, -1)])?);
                    out.push(e(Second, &[(&format!("A({k},{l})"), 1), (&d, -1)])?);
                }
            }
            for m in 1..n - 1 {
                out.push(e(
                    Second,
                    &[(&format!("D({m},0)"), 1), (&format!("D({},0)", n - 1), -1)],
                )?);
            }
        }
        FamilyName::TranspositionFlip => {
            if n < 3 {
                return Err(Error::BadArgument(
                    "transposition-channel catalog needs dimension >= 3".into(),
                ));
            }
            out.push(e(First, &[("Osum", 1)])?);
            for k in 0..n - 1 {
                out.push(e(
                    Second,
                    &[(&format!("O2({k})"), 1), (&format!("D({},{k})", n - 1), -1)],
                )?);
            }
            for k in 0..=(n - 2) / 2 {
                out.push(e(
                    Second,
                    &[(&format!("O3({k})"), 1), (&format!("D({},{k})", n - 1), -1)],
                )?);
            }
            for k in 1..n - 1 {
                out.push(e(
                    Second,
                    &[(&format!("D({k},0)"), 1), (&format!("D({},{k})", n - 1), -1)],
                )?);
            }
        }
        FamilyName::AdcQunit => {
            for k in 1..n {
                for l in 0..k {
                    out.push(e(
                        Second,
                        &[(&format!("S({k},{l})"), 1), (&format!("A({k},{l})"), -1)],
                    )?);
                }
            }
            let top = n - 1;
            out.push(e(
                Third,
                &[
                    (&format!("S({top},0)"), 1),
                    (&format!("A({top},0)"), 1),
                    (&format!("d({top})"), -1),
                ],
            )?);
        }
        FamilyName::GadcQunit => {
            for k in 1..n {
                for l in 0..k {
                    out.push(e(
                        Second,
                        &[(&format!("S({k},{l})"), 1), (&format!("A({k},{l})"), -1)],
                    )?);
                }
            }
        }
    }
    Ok(out)
}

/// One row of the invariant-count reproduction table.
#[derive(Debug, Clone, Copy)]
pub struct CountRow {
    pub family: FamilyName,
    pub dim: usize,
    pub first: usize,
    pub second_third: usize,
    pub total: usize,
    pub expected_total: usize,
    pub pass: bool,
}

/// Closed-form invariant totals per family.
pub fn expected_total(family: FamilyName, n: usize) -> Option<usize> {
    Some(match family {
        FamilyName::GenFlip | FamilyName::GenPhase | FamilyName::GenFlipPhase => n * (n - 1),
        FamilyName::DephasingQunit => (n - 1) * (n + 2) / 2,
        FamilyName::Depolarizing => n * n - 2,
        FamilyName::TranspositionFlip => 5 * n / 2 - 2,
        FamilyName::AdcQunit => n * (n - 1) / 2 + 1,
        FamilyName::GadcQunit => n * (n - 1) / 2,
        _ => return None,
    })
}

/// Enumerate the catalog for every quNit family at the given dimensions
/// and compare the totals against the closed forms.
pub fn reproduce_count_table(dims: &[usize]) -> Result<Vec<CountRow>> {
    const TABLE_FAMILIES: [FamilyName; 8] = [
        FamilyName::GenFlip,
        FamilyName::GenPhase,
        FamilyName::GenFlipPhase,
        FamilyName::DephasingQunit,
        FamilyName::Depolarizing,
        FamilyName::TranspositionFlip,
        FamilyName::AdcQunit,
        FamilyName::GadcQunit,
    ];
    let mut rows = Vec::new();
    for &n in dims {
        if n < 3 {
            return Err(Error::BadArgument(format!(
                "count table is defined for dimensions >= 3, got {n}"
            )));
        }
        for family in TABLE_FAMILIES {
            let entries = reference_catalog(family, n)?;
            let first = entries
                .iter()
                .filter(|e| e.monomial.class == FamilyClass::First)
                .count();
            let total = entries.len();
            let expected = expected_total(family, n).unwrap();
            rows.push(CountRow {
                family,
                dim: n,
                first,
                second_third: total - first,
                total,
                expected_total: expected,
                pass: total == expected,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::gen_pauli_power;
    use crate::linalg::{self, zeros};

    fn qubit_state(x: f64, y: f64, z: f64) -> DensityMatrix {
        // rho = (1 + x sx + y sy + z sz)/2
        let mut m = zeros(2);
        m[(0, 0)] = linalg::ONE * (0.5 * (1.0 + z));
        m[(1, 1)] = linalg::ONE * (0.5 * (1.0 - z));
        m[(0, 1)] = Complex64::new(x / 2.0, -y / 2.0);
        m[(1, 0)] = Complex64::new(x / 2.0, y / 2.0);
        DensityMatrix::new(m).unwrap()
    }

    fn fam(name: FamilyName, n: usize) -> ChannelFamily {
        ChannelFamily::new(name, n).unwrap()
    }

    #[test]
    fn evaluate_bloch_examples() {
        let m = InvariantMonomial::from_tokens(2, FamilyClass::First, &[("S(1,0)", 1)]).unwrap();
        let v = m.evaluate(&qubit_state(0.6, 0.0, 0.0), EPS_DEN);
        assert!((v.value().unwrap() - 0.6 * linalg::ONE).norm() < 1e-12);

        // sigma_y/sigma_z on (1 + 0.3 sy + 0.6 sz)/2 is 0.5. In basis
        // tokens A(1,0) = -sigma_y and D(1,0) = -sigma_z, so the A/D form
        // gives the same 0.5 with both signs cancelling.
        let sy = LabeledOperator {
            label: OperatorLabel::custom("sigma_y", 2).unwrap(),
            matrix: gen_pauli_power(1, 1, 2).unwrap().matrix.mapv(|z| z * linalg::I),
        };
        let sz = LabeledOperator {
            label: OperatorLabel::custom("sigma_z", 2).unwrap(),
            matrix: gen_pauli_power(0, 1, 2).unwrap().matrix,
        };
        let ratio = InvariantMonomial {
            terms: vec![
                Term { op: sy, exponent: 1 },
                Term { op: sz, exponent: -1 },
            ],
            class: FamilyClass::Second,
        };
        let rho = qubit_state(0.0, 0.3, 0.6);
        assert!((ratio.evaluate(&rho, EPS_DEN).value().unwrap() - 0.5 * linalg::ONE).norm() < 1e-12);

        let ad = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Second,
            &[("A(1,0)", 1), ("D(1,0)", -1)],
        )
        .unwrap();
        assert!((ad.evaluate(&rho, EPS_DEN).value().unwrap() - 0.5 * linalg::ONE).norm() < 1e-12);

        // zero denominator -> undefined
        let balanced = qubit_state(0.3, 0.3, 0.0);
        assert_eq!(ad.evaluate(&balanced, EPS_DEN), InvariantValue::Undefined);
    }

    #[test]
    fn render_and_keys() {
        let m = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Third,
            &[("S(1,0)", 1), ("A(1,0)", 1), ("d(1)", -1)],
        )
        .unwrap();
        assert_eq!(m.render(), "<S(1,0)>*<A(1,0)>/<d(1)>");
        let doubled = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Third,
            &[("S(1,0)", 2), ("A(1,0)", 2), ("d(1)", -2)],
        )
        .unwrap();
        assert!(equivalent(&m, &doubled));
        let reciprocal = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Third,
            &[("S(1,0)", -1), ("A(1,0)", -1), ("d(1)", 1)],
        )
        .unwrap();
        assert!(equivalent(&m, &reciprocal));
    }

    #[test]
    fn find_invariants_bit_flip() {
        let found = find_invariants(&fam(FamilyName::BitFlip, 2), &SearchOptions::default(), 9)
            .unwrap();
        let sx = InvariantMonomial::from_tokens(2, FamilyClass::First, &[("S(1,0)", 1)]).unwrap();
        let ratio = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Second,
            &[("A(1,0)", 1), ("D(1,0)", -1)],
        )
        .unwrap();
        assert!(found.iter().any(|m| equivalent(m, &sx) && m.class == FamilyClass::First));
        assert!(found.iter().any(|m| equivalent(m, &ratio) && m.class == FamilyClass::Second));
        // no two survivors are equivalent after dedup
        for (i, a) in found.iter().enumerate() {
            for b in &found[i + 1..] {
                assert!(!equivalent(a, b), "{} ~ {}", a.render(), b.render());
            }
        }
    }

    #[test]
    fn find_invariants_adc_third_family() {
        let found =
            find_invariants(&fam(FamilyName::Adc, 2), &SearchOptions::default(), 21).unwrap();
        let ratio = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Second,
            &[("S(1,0)", 1), ("A(1,0)", -1)],
        )
        .unwrap();
        let third = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Third,
            &[("S(1,0)", 1), ("A(1,0)", 1), ("d(1)", -1)],
        )
        .unwrap();
        assert!(found.iter().any(|m| equivalent(m, &ratio)));
        let t = found.iter().find(|m| equivalent(m, &third));
        assert!(t.is_some());
        assert_eq!(t.unwrap().class, FamilyClass::Third);
    }

    #[test]
    fn full_pauli_channel_admits_nothing() {
        let found =
            find_invariants(&fam(FamilyName::Pauli, 2), &SearchOptions::default(), 33).unwrap();
        assert!(found.is_empty(), "unexpected invariants: {:?}",
            found.iter().map(|m| m.render()).collect::<Vec<_>>());
    }

    #[test]
    fn verify_phase_flip_first_family() {
        let m = InvariantMonomial::from_tokens(2, FamilyClass::First, &[("D(1,0)", 1)]).unwrap();
        let report = verify_invariance(&m, &fam(FamilyName::PhaseFlip, 2), 100, 5).unwrap();
        assert!(report.max_rel_dev <= 1e-10, "dev {}", report.max_rel_dev);
    }

    #[test]
    fn gadc_variant_is_not_invariant() {
        let good = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Second,
            &[("S(1,0)", 1), ("A(1,0)", -1)],
        )
        .unwrap();
        let bad = InvariantMonomial::from_tokens(
            2,
            FamilyClass::Second,
            &[("S(1,0)", 1), ("D(1,0)", -1)],
        )
        .unwrap();
        let family = fam(FamilyName::Gadc, 2);
        let ok = verify_invariance(&good, &family, 100, 17).unwrap();
        assert!(ok.max_rel_dev <= 1e-10, "dev {}", ok.max_rel_dev);
        let fail = verify_invariance(&bad, &family, 100, 17).unwrap();
        assert!(fail.max_rel_dev > 1e-2, "dev {}", fail.max_rel_dev);
    }

    #[test]
    fn catalog_spot_checks() {
        let dephasing = reference_catalog(FamilyName::DephasingQunit, 4).unwrap();
        assert_eq!(dephasing.len(), 9); // (N-1)(N+2)/2
        assert_eq!(dephasing[0].monomial.render(), "<D(1,0)>");
        assert!(dephasing
            .iter()
            .any(|e| e.monomial.render() == "<S(2,1)>/<A(2,1)>"));

        let gfp = reference_catalog(FamilyName::GenFlipPhase, 4).unwrap();
        assert!(gfp.iter().any(|e| e.monomial.render() == "<XZ(1,0)>/<XZ(0,3)>"));

        let adc = reference_catalog(FamilyName::AdcQunit, 4).unwrap();
        assert!(adc
            .iter()
            .any(|e| e.monomial.render() == "<S(3,0)>*<A(3,0)>/<d(3)>"));

        assert!(reference_catalog(FamilyName::Pauli, 2).unwrap().is_empty());

        let gadc = reference_catalog(FamilyName::Gadc, 2).unwrap();
        assert_eq!(gadc.len(), 2);
        assert_eq!(gadc[1].source, CatalogSource::VariantNegativeControl);
    }

    #[test]
    fn count_table_examples() {
        let rows = reproduce_count_table(&[3, 4, 5]).unwrap();
        let row = |f: FamilyName, n: usize| {
            rows.iter()
                .find(|r| r.family == f && r.dim == n)
                .copied()
                .unwrap()
        };
        assert_eq!(row(FamilyName::GenFlip, 3).total, 6);
        assert_eq!(row(FamilyName::Depolarizing, 4).total, 14);
        assert_eq!(row(FamilyName::TranspositionFlip, 5).total, 10);
        assert!(rows.iter().all(|r| r.pass));
    }

    #[test]
    fn catalog_raw_round_trip() {
        let entries = reference_catalog(FamilyName::Adc, 2).unwrap();
        let raws: Vec<CatalogEntryRaw> = entries.iter().map(|e| e.to_raw()).collect();
        let json = serde_json::to_string(&raws).unwrap();
        let back: Vec<CatalogEntryRaw> = serde_json::from_str(&json).unwrap();
        for (raw, original) in back.iter().zip(&entries) {
            let entry = CatalogEntry::from_raw(raw).unwrap();
            assert!(equivalent(&entry.monomial, &original.monomial));
            assert_eq!(entry.monomial.class, original.monomial.class);
        }
    }
}
