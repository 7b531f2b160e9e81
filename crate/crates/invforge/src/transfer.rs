//! End-to-end error-immune transfer: encode symbols in invariant values,
//! push the carrier states through a noisy channel, estimate expectations
//! from finite-shot projector counts, and decode by nearest invariant
//! vector.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::basis::{check_dim, hermitian_basis, LabelKind, LabeledOperator, OperatorLabel, ProjectorKind};
use crate::channel::{ChannelFamily, DensityMatrix};
use crate::error::{Error, Result};
use crate::invariant::{reference_catalog, CatalogSource, InvariantMonomial, InvariantValue, EPS_DEN};
use crate::linalg::{self, hs_inner};

/// Ginibre-ensemble random density matrix: `G G' / Tr(G G')` with `G` an
/// `n x rank` matrix of independent standard complex Gaussian entries.
pub fn random_density(n: usize, rank: Option<usize>, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_from(&mut rng, n, rank)
}

pub fn random_density_from(
    rng: &mut impl Rng,
    n: usize,
    rank: Option<usize>,
) -> Result<DensityMatrix> {
    check_dim(n)?;
    let rank = rank.unwrap_or(n);
    if rank == 0 || rank > n {
        return Err(Error::BadArgument(format!(
            "rank {rank} outside 1..={n}"
        )));
    }
    let mut g = ndarray::Array2::from_elem((n, rank), linalg::ZERO);
    for i in 0..n {
        for j in 0..rank {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = Complex64::new(re, im);
        }
    }
    let gg = g.dot(&g.t().mapv(|z| z.conj()));
    let tr = linalg::trace(&gg);
    DensityMatrix::new(gg.mapv(|z| z / tr.re))
}

/// Measurement budget: a finite shot count or exact expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Finite(u64),
    Exact,
}

/// Counts observed for one projector.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub projector: OperatorLabel,
    pub shots: u64,
    pub successes: u64,
}

/// Estimate `Tr(O rho)` from simulated projector counts. The operator is
/// expanded over the S/A/d basis; each basis expectation is retrieved
/// from the count rates of its projectors,
/// `<S> = freq(+) - freq(-)`, `<A> = freq(+i) - freq(-i)`,
/// `<d(k)> = freq(k)`, with every projector measured on fresh copies.
pub fn estimate_expectation(
    rho: &DensityMatrix,
    op: &LabeledOperator,
    shots: Shots,
    seed: u64,
) -> Result<(Complex64, Vec<MeasurementRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    estimate_expectation_from(&mut rng, rho, op, shots)
}

pub fn estimate_expectation_from(
    rng: &mut impl Rng,
    rho: &DensityMatrix,
    op: &LabeledOperator,
    shots: Shots,
) -> Result<(Complex64, Vec<MeasurementRecord>)> {
    let n = rho.dim();
    if op.matrix.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: op.matrix.nrows(),
        });
    }
    let count = match shots {
        Shots::Exact => return Ok((rho.expectation(&op.matrix), Vec::new())),
        Shots::Finite(c) => {
            if c == 0 {
                return Err(Error::BadArgument("shots must be at least 1".into()));
            }
            c
        }
    };
    let mut estimate = linalg::ZERO;
    let mut records = Vec::new();
    let mut measure = |rng: &mut dyn rand::RngCore, kind: ProjectorKind| -> Result<f64> {
        let label = OperatorLabel::new(LabelKind::Projector(kind), n)?;
        let projector = crate::basis::basis_matrix(&label)?;
        let p = rho.expectation(&projector.matrix).re.clamp(0.0, 1.0);
        let successes = Binomial::new(count, p)
            .map_err(|e| Error::BadArgument(format!("binomial: {e}")))?
            .sample(rng);
        records.push(MeasurementRecord {
            projector: label,
            shots: count,
            successes,
        });
        Ok(successes as f64 / count as f64)
    };
    for basis_op in hermitian_basis(n)? {
        let norm_sq = hs_inner(&basis_op.matrix, &basis_op.matrix).re;
        let coeff = hs_inner(&basis_op.matrix, &op.matrix) / norm_sq;
        if coeff.norm() < 1e-12 {
            continue;
        }
        let value = match basis_op.label.kind {
            LabelKind::Sym(k, l) => {
                measure(rng, ProjectorKind::Plus(k, l))? - measure(rng, ProjectorKind::Minus(k, l))?
            }
            LabelKind::Antisym(k, l) => {
                measure(rng, ProjectorKind::PlusI(k, l))?
                    - measure(rng, ProjectorKind::MinusI(k, l))?
            }
            LabelKind::Diag(k) => measure(rng, ProjectorKind::Level(k))?,
            _ => unreachable!("hermitian basis contains only S/A/d labels"),
        };
        estimate += coeff * value;
    }
    Ok((estimate, records))
}

/// Construction gates for codebooks. Beyond the bare undefined-value
/// guard `eps_den`, symbol states must keep every denominator expectation
/// above `denominator_floor` and every coordinate inside `coord_cap`, so
/// that shot noise at the receiver cannot blow a coordinate across the
/// decision boundary.
#[derive(Debug, Clone, Copy)]
pub struct CodebookOptions {
    pub eps_den: f64,
    pub denominator_floor: f64,
    pub coord_cap: f64,
    pub budget: usize,
}

impl Default for CodebookOptions {
    fn default() -> Self {
        CodebookOptions {
            eps_den: EPS_DEN,
            denominator_floor: 0.3,
            coord_cap: 2.5,
            budget: 100_000,
        }
    }
}

/// One encodable symbol: a prepared state and its invariant coordinates
/// (real and imaginary parts interleaved).
#[derive(Debug, Clone)]
pub struct CodebookSymbol {
    pub id: usize,
    pub state: DensityMatrix,
    pub target: Vec<f64>,
}

/// A codebook over a channel family: the invariant monomials used as
/// coordinates and the symbol states, pairwise separated by at least
/// `delta` in the max-norm.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub family: ChannelFamily,
    pub invariants: Vec<InvariantMonomial>,
    pub symbols: Vec<CodebookSymbol>,
    pub delta: f64,
    pub eps_den: f64,
}

/// Rejection-sample `m` symbol states whose invariant vectors are
/// pairwise at least `delta` apart. Coordinates come from the family's
/// catalog invariants.
pub fn build_codebook(
    family: &ChannelFamily,
    m: usize,
    delta: f64,
    seed: u64,
) -> Result<Codebook> {
    build_codebook_with(family, m, delta, seed, CodebookOptions::default())
}

pub fn build_codebook_with(
    family: &ChannelFamily,
    m: usize,
    delta: f64,
    seed: u64,
    opts: CodebookOptions,
) -> Result<Codebook> {
    if m < 2 {
        return Err(Error::BadArgument("need at least 2 symbols".into()));
    }
    let invariants: Vec<InvariantMonomial> = reference_catalog(family.name, family.dim)?
        .into_iter()
        .filter(|e| e.source == CatalogSource::Catalog)
        .map(|e| e.monomial)
        .collect();
    if invariants.is_empty() {
        return Err(Error::NoInvariants);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols: Vec<CodebookSymbol> = Vec::with_capacity(m);
    for attempt in 0..opts.budget {
        if symbols.len() == m {
            break;
        }
        let _ = attempt;
        let state = random_density_from(&mut rng, family.dim, None)?;
        let Some(target) = coordinates(&invariants, &state, &opts) else {
            continue;
        };
        let far_enough = symbols
            .iter()
            .all(|s| max_norm_distance(&s.target, &target) >= delta);
        if far_enough {
            symbols.push(CodebookSymbol {
                id: symbols.len(),
                state,
                target,
            });
        }
    }
    if symbols.len() < m {
        return Err(Error::SamplingBudget {
            budget: opts.budget,
            kept: symbols.len(),
            wanted: m,
        });
    }
    Ok(Codebook {
        family: family.clone(),
        invariants,
        symbols,
        delta,
        eps_den: opts.eps_den,
    })
}

/// Invariant coordinates of a state under the construction gates; `None`
/// when a denominator is too small or a coordinate exceeds the cap.
fn coordinates(
    invariants: &[InvariantMonomial],
    state: &DensityMatrix,
    opts: &CodebookOptions,
) -> Option<Vec<f64>> {
    let floor = opts.denominator_floor.max(opts.eps_den);
    let mut coords = Vec::with_capacity(2 * invariants.len());
    for inv in invariants {
        for t in &inv.terms {
            if t.exponent < 0 && state.expectation(&t.op.matrix).norm() < floor {
                return None;
            }
        }
        match inv.evaluate(state, opts.eps_den) {
            InvariantValue::Value(v) => {
                if v.re.abs() > opts.coord_cap || v.im.abs() > opts.coord_cap {
                    return None;
                }
                coords.push(v.re);
                coords.push(v.im);
            }
            InvariantValue::Undefined => return None,
        }
    }
    Some(coords)
}

fn max_norm_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Per-symbol transmission transcript.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolTranscript {
    pub symbol: usize,
    pub sent_invariants: Vec<f64>,
    pub received_invariants: Vec<f64>,
    pub decoded: Option<usize>,
    pub erasure_flag: bool,
    pub shots: Option<u64>,
}

/// Result of a transmission run.
#[derive(Debug, Clone)]
pub struct TransmitOutcome {
    pub decoded: Vec<Option<usize>>,
    pub transcripts: Vec<SymbolTranscript>,
    pub correct: usize,
    pub erasures: usize,
    pub accuracy: f64,
}

/// Send a message through the channel at a fixed parameter point and
/// decode each symbol by the nearest codebook target in the max-norm.
/// A denominator that shot noise pushed below `eps_den` flags the symbol
/// as an erasure instead of forcing a decode.
pub fn transmit(
    codebook: &Codebook,
    message: &[usize],
    params: &BTreeMap<String, f64>,
    shots: Shots,
    seed: u64,
) -> Result<TransmitOutcome> {
    let channel = codebook.family.instantiate(params)?;
    let mut transcripts = Vec::with_capacity(message.len());
    let mut decoded_ids = Vec::with_capacity(message.len());
    let mut correct = 0usize;
    let mut erasures = 0usize;
    for (index, &symbol_id) in message.iter().enumerate() {
        let symbol = codebook
            .symbols
            .iter()
            .find(|s| s.id == symbol_id)
            .ok_or(Error::UnknownSymbol(symbol_id))?;
        let received_state = channel.apply(&symbol.state)?;
        // deterministic per-symbol stream
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index as u64);
        let estimates = estimate_operators(&mut rng, codebook, &received_state, shots)?;
        let (received, erased) = received_coordinates(codebook, &estimates);
        let decoded = if erased {
            None
        } else {
            Some(nearest_symbol(codebook, &received))
        };
        if decoded == Some(symbol_id) {
            correct += 1;
        }
        if erased {
            erasures += 1;
        }
        decoded_ids.push(decoded);
        transcripts.push(SymbolTranscript {
            symbol: symbol_id,
            sent_invariants: symbol.target.clone(),
            received_invariants: received,
            decoded,
            erasure_flag: erased,
            shots: match shots {
                Shots::Finite(c) => Some(c),
                Shots::Exact => None,
            },
        });
    }
    let accuracy = correct as f64 / message.len().max(1) as f64;
    Ok(TransmitOutcome {
        decoded: decoded_ids,
        transcripts,
        correct,
        erasures,
        accuracy,
    })
}

/// Estimate every operator appearing in the codebook coordinates, one
/// estimate per distinct operator token.
fn estimate_operators(
    rng: &mut impl Rng,
    codebook: &Codebook,
    state: &DensityMatrix,
    shots: Shots,
) -> Result<BTreeMap<String, Complex64>> {
    let mut ops: BTreeMap<String, &LabeledOperator> = BTreeMap::new();
    for inv in &codebook.invariants {
        for t in &inv.terms {
            ops.entry(t.op.token()).or_insert(&t.op);
        }
    }
    let mut out = BTreeMap::new();
    for (token, op) in ops {
        let (estimate, _) = estimate_expectation_from(rng, state, op, shots)?;
        out.insert(token, estimate);
    }
    Ok(out)
}

fn received_coordinates(
    codebook: &Codebook,
    estimates: &BTreeMap<String, Complex64>,
) -> (Vec<f64>, bool) {
    let mut coords = Vec::with_capacity(2 * codebook.invariants.len());
    let mut erased = false;
    for inv in &codebook.invariants {
        let mut acc = linalg::ONE;
        for t in &inv.terms {
            let e = estimates[&t.op.token()];
            if t.exponent < 0 && e.norm() < codebook.eps_den {
                erased = true;
            }
            acc *= e.powi(t.exponent);
        }
        if erased {
            coords.push(f64::NAN);
            coords.push(f64::NAN);
        } else {
            coords.push(acc.re);
            coords.push(acc.im);
        }
    }
    (coords, erased)
}

fn nearest_symbol(codebook: &Codebook, received: &[f64]) -> usize {
    let mut best = codebook.symbols[0].id;
    let mut best_dist = f64::INFINITY;
    for s in &codebook.symbols {
        let d = max_norm_distance(&s.target, received);
        if d < best_dist {
            best_dist = d;
            best = s.id;
        }
    }
    best
}
