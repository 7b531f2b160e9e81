//! Noisy channels as parameterized Kraus-operator families.
//!
//! Every family maps a named parameter point to a concrete Kraus set
//! `{E_k}` with `sum_k E_k' E_k = 1`. States are dense density matrices
//! and a channel acts as `rho -> sum_k E_k rho E_k'`.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;

use crate::basis::{check_dim, gen_pauli_power};
use crate::error::{Error, Result};
use crate::linalg::{self, dagger, identity, max_abs_diff, trace, zeros, CMat, ONE};

/// Completeness tolerance for `sum E'E = 1`.
pub const CPTP_TOL: f64 = 1e-10;
/// Hermiticity / trace tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Allowed negativity of the smallest eigenvalue of a state.
pub const PSD_TOL: f64 = 1e-10;

/// An N x N density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c {
            return Err(Error::InvalidState(format!("matrix is {r}x{c}")));
        }
        check_dim(r)?;
        if !linalg::is_hermitian(&matrix, STATE_TOL) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = trace(&matrix);
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace = {tr}")));
        }
        let eigs = linalg::hermitian_eigenvalues(&matrix)?;
        let min = eigs.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("smallest eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { dim: r, matrix })
    }

    /// |k><k|
    pub fn level(k: usize, n: usize) -> Result<Self> {
        check_dim(n)?;
        if k >= n {
            return Err(Error::InvalidState(format!("level {k} in dimension {n}")));
        }
        let mut m = zeros(n);
        m[(k, k)] = ONE;
        Ok(DensityMatrix { dim: n, matrix: m })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_dim(n)?;
        let m = identity(n).mapv(|z| z / n as f64);
        Ok(DensityMatrix { dim: n, matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Tr(O rho)
    pub fn expectation(&self, op: &CMat) -> Complex64 {
        trace(&op.dot(&self.matrix))
    }

    pub fn purity(&self) -> f64 {
        trace(&self.matrix.dot(&self.matrix)).re
    }
}

/// Validation report for the Kraus completeness relation.
#[derive(Debug, Clone)]
pub struct CptpReport {
    pub pass: bool,
    pub max_deviation: f64,
    pub kraus_norms: Vec<f64>,
}

/// A concrete Kraus-operator set, usually produced by
/// [`ChannelFamily::instantiate`].
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub name: String,
    pub dim: usize,
    pub kraus: Vec<CMat>,
    pub params: BTreeMap<String, f64>,
}

impl KrausChannel {
    pub fn identity(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(KrausChannel {
            name: "identity".into(),
            dim: n,
            kraus: vec![identity(n)],
            params: BTreeMap::new(),
        })
    }

    /// Check `sum E'E = 1` to within [`CPTP_TOL`].
    pub fn validate(&self) -> CptpReport {
        let mut sum = zeros(self.dim);
        let mut norms = Vec::with_capacity(self.kraus.len());
        for e in &self.kraus {
            sum = sum + dagger(e).dot(e);
            norms.push(linalg::hs_norm(e));
        }
        let dev = max_abs_diff(&sum, &identity(self.dim));
        CptpReport {
            pass: dev <= CPTP_TOL,
            max_deviation: dev,
            kraus_norms: norms,
        }
    }

    /// `rho -> sum_k E_k rho E_k'`
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let mut out = zeros(self.dim);
        for e in &self.kraus {
            out = out + e.dot(rho.matrix()).dot(&dagger(e));
        }
        DensityMatrix::new(out)
    }

    /// Parse a channel-spec document (JSON). The document names either a
    /// family with parameters or an explicit Kraus set:
    ///
    /// ```json
    /// {"name": "bit_flip", "dim": 2, "family_params": {"p": 0.25}}
    /// {"name": "custom", "dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}
    /// ```
    ///
    /// Kraus entries are `[re, im]` pairs, matrices are arrays of rows.
    pub fn from_spec_str(text: &str) -> Result<Self> {
        let spec: ChannelSpecFile = serde_json::from_str(text).map_err(|e| Error::SpecParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.into_channel()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSpecFile {
    name: String,
    dim: usize,
    #[serde(default)]
    family_params: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    kraus: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl ChannelSpecFile {
    fn into_channel(self) -> Result<KrausChannel> {
        check_dim(self.dim)?;
        match (self.family_params, self.kraus) {
            (Some(params), None) => {
                let family = ChannelFamily::new(FamilyName::parse(&self.name)?, self.dim)?;
                family.instantiate(&params)
            }
            (None, Some(kraus)) => {
                if kraus.is_empty() {
                    return Err(Error::SpecInvalid("empty Kraus list".into()));
                }
                let n = self.dim;
                let mut mats = Vec::with_capacity(kraus.len());
                for (k, rows) in kraus.iter().enumerate() {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::SpecInvalid(format!(
                            "Kraus operator {k} is not a {n}x{n} matrix"
                        )));
                    }
                    mats.push(Array2::from_shape_fn((n, n), |(i, j)| {
                        Complex64::new(rows[i][j][0], rows[i][j][1])
                    }));
                }
                let channel = KrausChannel {
                    name: self.name,
                    dim: n,
                    kraus: mats,
                    params: BTreeMap::new(),
                };
                let report = channel.validate();
                if !report.pass {
                    return Err(Error::CptpViolation {
                        deviation: report.max_deviation,
                    });
                }
                Ok(channel)
            }
            _ => Err(Error::SpecInvalid(
                "need exactly one of `family_params` or `kraus`".into(),
            )),
        }
    }
}

/// Every channel family in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyName {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    DephasingQubit,
    Depolarizing,
    Pauli,
    EquiprobablePauli,
    Adc,
    Gadc,
    GenPauliChannel,
    GenFlip,
    GenPhase,
    GenFlipPhase,
    TranspositionFlip,
    DephasingQunit,
    AdcQunit,
    GadcQunit,
}

pub const ALL_FAMILIES: [FamilyName; 17] = [
    FamilyName::BitFlip,
    FamilyName::PhaseFlip,
    FamilyName::BitPhaseFlip,
    FamilyName::DephasingQubit,
    FamilyName::Depolarizing,
    FamilyName::Pauli,
    FamilyName::EquiprobablePauli,
    FamilyName::Adc,
    FamilyName::Gadc,
    FamilyName::GenPauliChannel,
    FamilyName::GenFlip,
    FamilyName::GenPhase,
    FamilyName::GenFlipPhase,
    FamilyName::TranspositionFlip,
    FamilyName::DephasingQunit,
    FamilyName::AdcQunit,
    FamilyName::GadcQunit,
];

impl FamilyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyName::BitFlip => "bit_flip",
            FamilyName::PhaseFlip => "phase_flip",
            FamilyName::BitPhaseFlip => "bit_phase_flip",
            FamilyName::DephasingQubit => "dephasing_qubit",
            FamilyName::Depolarizing => "depolarizing",
            FamilyName::Pauli => "pauli",
            FamilyName::EquiprobablePauli => "equiprobable_pauli",
            FamilyName::Adc => "adc",
            FamilyName::Gadc => "gadc",
            FamilyName::GenPauliChannel => "gen_pauli_channel",
            FamilyName::GenFlip => "gen_flip",
            FamilyName::GenPhase => "gen_phase",
            FamilyName::GenFlipPhase => "gen_flip_phase",
            FamilyName::TranspositionFlip => "transposition_flip",
            FamilyName::DephasingQunit => "dephasing_qunit",
            FamilyName::AdcQunit => "adc_qunit",
            FamilyName::GadcQunit => "gadc_qunit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ALL_FAMILIES
            .iter()
            .find(|f| f.as_str() == s)
            .copied()
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }

    /// Families defined only for N = 2.
    pub fn qubit_only(&self) -> bool {
        matches!(
            self,
            FamilyName::BitFlip
                | FamilyName::PhaseFlip
                | FamilyName::BitPhaseFlip
                | FamilyName::DephasingQubit
                | FamilyName::Pauli
                | FamilyName::EquiprobablePauli
                | FamilyName::Adc
                | FamilyName::Gadc
        )
    }
}

impl fmt::Display for FamilyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// One named parameter of a family. Parameters sharing a `simplex_group`
/// obey `sum_i weight_i * p_i = 1`.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub simplex_group: Option<u8>,
    pub simplex_weight: f64,
}

impl ParamSpec {
    fn boxed(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        ParamSpec {
            name: name.into(),
            lo,
            hi,
            simplex_group: None,
            simplex_weight: 1.0,
        }
    }

    fn simplex(name: impl Into<String>, group: u8, weight: f64) -> Self {
        ParamSpec {
            name: name.into(),
            lo: 0.0,
            hi: 1.0,
            simplex_group: Some(group),
            simplex_weight: weight,
        }
    }
}

/// A parameterized family of Kraus channels.
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    pub name: FamilyName,
    pub dim: usize,
    pub params: Vec<ParamSpec>,
}

impl ChannelFamily {
    pub fn new(name: FamilyName, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if name.qubit_only() && dim != 2 {
            return Err(Error::QubitOnly {
                family: name.as_str().into(),
                dim,
            });
        }
        let n = dim;
        let params = match name {
            FamilyName::BitFlip | FamilyName::PhaseFlip | FamilyName::BitPhaseFlip => {
                vec![ParamSpec::boxed("p", 0.0, 1.0)]
            }
            FamilyName::DephasingQubit => vec![ParamSpec::boxed("lambda", 0.0, 1.0)],
            FamilyName::Depolarizing | FamilyName::TranspositionFlip => {
                vec![ParamSpec::boxed("p", 0.0, 1.0)]
            }
            FamilyName::Pauli => (0..4).map(|i| ParamSpec::simplex(format!("p{i}"), 0, 1.0)).collect(),
            FamilyName::EquiprobablePauli => vec![
                ParamSpec::simplex("p0", 0, 1.0),
                // p1 weights both the bit-flip and the phase-flip branch
                ParamSpec::simplex("p1", 0, 2.0),
                ParamSpec::simplex("p2", 0, 1.0),
            ],
            FamilyName::Adc => vec![ParamSpec::boxed("q", 0.0, 1.0)],
            FamilyName::Gadc => vec![
                ParamSpec::boxed("q", 0.0, 1.0),
                ParamSpec::simplex("p1", 0, 1.0),
                ParamSpec::simplex("p2", 0, 1.0),
            ],
            FamilyName::GenPauliChannel => (0..n)
                .flat_map(|r| (0..n).map(move |s| ParamSpec::simplex(format!("p{r}_{s}"), 0, 1.0)))
                .collect(),
            FamilyName::GenFlip | FamilyName::GenPhase | FamilyName::GenFlipPhase => {
                (0..n).map(|r| ParamSpec::simplex(format!("p{r}"), 0, 1.0)).collect()
            }
            FamilyName::DephasingQunit => {
                (0..=n).map(|j| ParamSpec::simplex(format!("p{j}"), 0, 1.0)).collect()
            }
            FamilyName::AdcQunit => {
                // gamma{n}_{m}: decay rate from level n down to level m < n.
                // The per-rate cap keeps every drain xi_n = sum_m gamma{n}_{m} <= 1.
                let cap = 1.0 / (n as f64 - 1.0);
                (1..n)
                    .flat_map(|from| {
                        (0..from).map(move |to| ParamSpec::boxed(format!("gamma{from}_{to}"), 0.0, cap))
                    })
                    .collect()
            }
            FamilyName::GadcQunit => {
                let cap = 1.0 / (n as f64 - 1.0);
                let mut v: Vec<ParamSpec> =
                    (0..n).map(|m| ParamSpec::simplex(format!("p{m}"), 0, 1.0)).collect();
                // gamma{to}_{from}: transfer rate from level `from` to level `to`.
                for to in 0..n {
                    for from in 0..n {
                        if to != from {
                            v.push(ParamSpec::boxed(format!("gamma{to}_{from}"), 0.0, cap));
                        }
                    }
                }
                v
            }
        };
        Ok(ChannelFamily { name, dim, params })
    }

    fn get(&self, params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
        params
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingParam(name.to_string()))
    }

    /// Validate bounds and simplex constraints, renormalizing groups whose
    /// weighted sum is within 1e-6 of 1. Returns the cleaned-up values.
    fn checked_params(&self, params: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for spec in &self.params {
            let v = self.get(params, &spec.name)?;
            if v < spec.lo - 1e-12 || v > spec.hi + 1e-12 {
                return Err(Error::ParamOutOfBounds {
                    name: spec.name.clone(),
                    value: v,
                    lo: spec.lo,
                    hi: spec.hi,
                });
            }
            out.insert(spec.name.clone(), v.clamp(spec.lo, spec.hi));
        }
        let mut groups: BTreeMap<u8, f64> = BTreeMap::new();
        for spec in &self.params {
            if let Some(g) = spec.simplex_group {
                *groups.entry(g).or_insert(0.0) += spec.simplex_weight * out[&spec.name];
            }
        }
        for (g, sum) in groups {
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::SimplexViolation { sum });
            }
            if (sum - 1.0).abs() > 1e-9 {
                for spec in &self.params {
                    if spec.simplex_group == Some(g) {
                        *out.get_mut(&spec.name).unwrap() /= sum;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Build the Kraus set at a parameter point.
    pub fn instantiate(&self, params: &BTreeMap<String, f64>) -> Result<KrausChannel> {
        let p = self.checked_params(params)?;
        let n = self.dim;
        let kraus = self.kraus_set(&p)?;
        let channel = KrausChannel {
            name: self.name.as_str().into(),
            dim: n,
            kraus,
            params: p,
        };
        let report = channel.validate();
        if !report.pass {
            return Err(Error::CptpViolation {
                deviation: report.max_deviation,
            });
        }
        Ok(channel)
    }

    fn kraus_set(&self, p: &BTreeMap<String, f64>) -> Result<Vec<CMat>> {
        let n = self.dim;
        let scaled = |m: &CMat, w: f64| m.mapv(|z| z * w.max(0.0).sqrt());
        let pauli = |r: usize, s: usize| gen_pauli_power(r, s, n).map(|o| o.matrix);
        Ok(match self.name {
            FamilyName::BitFlip | FamilyName::PhaseFlip | FamilyName::BitPhaseFlip => {
                let prob = self.get(p, "p")?;
                let op = match self.name {
                    FamilyName::BitFlip => pauli(1, 0)?,
                    FamilyName::PhaseFlip => pauli(0, 1)?,
                    _ => {
                        // sigma_y = i X Z
                        pauli(1, 1)?.mapv(|z| z * linalg::I)
                    }
                };
                vec![scaled(&identity(n), 1.0 - prob), scaled(&op, prob)]
            }
            FamilyName::DephasingQubit => {
                let lambda = self.get(p, "lambda")?;
                let alpha = 0.5 * (1.0 + (1.0 - lambda).sqrt());
                vec![
                    scaled(&identity(n), alpha),
                    scaled(&pauli(0, 1)?, 1.0 - alpha),
                ]
            }
            FamilyName::Depolarizing => {
                // (1-p) rho + (p/N) 1 written as a mixed-unitary set over the
                // full shift/clock family.
                let prob = self.get(p, "p")?;
                let n2 = (n * n) as f64;
                let mut ks = vec![scaled(&identity(n), 1.0 - prob + prob / n2)];
                for r in 0..n {
                    for s in 0..n {
                        if (r, s) != (0, 0) {
                            ks.push(scaled(&pauli(r, s)?, prob / n2));
                        }
                    }
                }
                ks
            }
            FamilyName::Pauli => {
                let y = pauli(1, 1)?.mapv(|z| z * linalg::I);
                vec![
                    scaled(&identity(n), self.get(p, "p0")?),
                    scaled(&pauli(1, 0)?, self.get(p, "p1")?),
                    scaled(&y, self.get(p, "p2")?),
                    scaled(&pauli(0, 1)?, self.get(p, "p3")?),
                ]
            }
            FamilyName::EquiprobablePauli => {
                let y = pauli(1, 1)?.mapv(|z| z * linalg::I);
                let p1 = self.get(p, "p1")?;
                vec![
                    scaled(&identity(n), self.get(p, "p0")?),
                    scaled(&pauli(1, 0)?, p1),
                    scaled(&pauli(0, 1)?, p1),
                    scaled(&y, self.get(p, "p2")?),
                ]
            }
            FamilyName::Adc => {
                let q = self.get(p, "q")?;
                let mut e0 = zeros(2);
                e0[(0, 0)] = ONE;
                e0[(1, 1)] = ONE * (1.0 - q).sqrt();
                let mut e1 = zeros(2);
                e1[(0, 1)] = ONE * q.sqrt();
                vec![e0, e1]
            }
            FamilyName::Gadc => {
                let q = self.get(p, "q")?;
                let (p1, p2) = (self.get(p, "p1")?, self.get(p, "p2")?);
                let mut e0 = zeros(2);
                e0[(0, 0)] = ONE;
                e0[(1, 1)] = ONE * (1.0 - q).sqrt();
                let mut e1 = zeros(2);
                e1[(0, 1)] = ONE * q.sqrt();
                let mut f0 = zeros(2);
                f0[(0, 0)] = ONE * (1.0 - q).sqrt();
                f0[(1, 1)] = ONE;
                let mut f1 = zeros(2);
                f1[(1, 0)] = ONE * q.sqrt();
                vec![
                    scaled(&e0, p1),
                    scaled(&e1, p1),
                    scaled(&f0, p2),
                    scaled(&f1, p2),
                ]
            }
            FamilyName::GenPauliChannel => {
                let mut ks = Vec::with_capacity(n * n);
                for r in 0..n {
                    for s in 0..n {
                        ks.push(scaled(&pauli(r, s)?, self.get(p, &format!("p{r}_{s}"))?));
                    }
                }
                ks
            }
            FamilyName::GenFlip => (0..n)
                .map(|r| Ok(scaled(&pauli(r, 0)?, self.get(p, &format!("p{r}"))?)))
                .collect::<Result<Vec<_>>>()?,
            FamilyName::GenPhase => (0..n)
                .map(|s| Ok(scaled(&pauli(0, s)?, self.get(p, &format!("p{s}"))?)))
                .collect::<Result<Vec<_>>>()?,
            FamilyName::GenFlipPhase => {
                let w = pauli(1, 1)?;
                let mut power = identity(n);
                let mut ks = Vec::with_capacity(n);
                for r in 0..n {
                    ks.push(scaled(&power, self.get(p, &format!("p{r}"))?));
                    power = power.dot(&w);
                }
                ks
            }
            FamilyName::TranspositionFlip => {
                // Weights (1-p) on the identity and p / C(N,2) on each
                // transposition, so the set is trace preserving. The
                // equal-weight-p variant is available as
                // [`transposition_flip_strict`] and fails validation.
                let prob = self.get(p, "p")?;
                let pairs = n * (n - 1) / 2;
                let mut ks = vec![scaled(&identity(n), 1.0 - prob)];
                for m in 0..n {
                    for l in 0..m {
                        ks.push(scaled(&transposition(m, l, n), prob / pairs as f64));
                    }
                }
                ks
            }
            FamilyName::DephasingQunit => {
                // E_j = 1 - 2|j><j| for j < N, plus the identity branch.
                let mut ks = Vec::with_capacity(n + 1);
                for j in 0..n {
                    let mut e = identity(n);
                    e[(j, j)] = -ONE;
                    ks.push(scaled(&e, self.get(p, &format!("p{j}"))?));
                }
                ks.push(scaled(&identity(n), self.get(p, &format!("p{n}"))?));
                ks
            }
            FamilyName::AdcQunit => {
                let mut drains = vec![0.0; n];
                let mut ks = Vec::new();
                for from in 1..n {
                    for to in 0..from {
                        let g = self.get(p, &format!("gamma{from}_{to}"))?;
                        drains[from] += g;
                        let mut e = zeros(n);
                        e[(to, from)] = ONE * g.sqrt();
                        ks.push(e);
                    }
                }
                let mut e0 = zeros(n);
                e0[(0, 0)] = ONE;
                for (level, &xi) in drains.iter().enumerate().skip(1) {
                    if xi > 1.0 + 1e-12 {
                        return Err(Error::RateOverflow { level, sum: xi });
                    }
                    e0[(level, level)] = ONE * (1.0 - xi).max(0.0).sqrt();
                }
                ks.insert(0, e0);
                ks
            }
            FamilyName::GadcQunit => {
                let mut ks = Vec::new();
                for m in 0..n {
                    let pm = self.get(p, &format!("p{m}"))?;
                    let mut xi = 0.0;
                    for to in 0..n {
                        if to != m {
                            xi += self.get(p, &format!("gamma{to}_{m}"))?;
                        }
                    }
                    if xi > 1.0 + 1e-12 {
                        return Err(Error::RateOverflow { level: m, sum: xi });
                    }
                    let mut em = identity(n);
                    em[(m, m)] = ONE * (1.0 - xi).max(0.0).sqrt();
                    ks.push(scaled(&em, pm));
                    for to in 0..n {
                        if to != m {
                            let g = self.get(p, &format!("gamma{to}_{m}"))?;
                            let mut e = zeros(n);
                            e[(to, m)] = ONE * (pm * g).sqrt();
                            ks.push(e);
                        }
                    }
                }
                ks
            }
        })
    }

    /// Draw a parameter point. Box parameters are uniform over their range;
    /// simplex groups use normalized draws. With `interior`, every value is
    /// kept in the middle [0.15, 0.85] stretch of its range to avoid the
    /// degeneracies that appear at boundary noise strengths.
    pub fn sample_params(&self, rng: &mut impl Rng, interior: bool) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut group_totals: BTreeMap<u8, f64> = BTreeMap::new();
        for spec in &self.params {
            let u: f64 = if interior {
                rng.random_range(0.15..0.85)
            } else {
                rng.random_range(0.0..1.0)
            };
            match spec.simplex_group {
                None => {
                    out.insert(spec.name.clone(), spec.lo + u * (spec.hi - spec.lo));
                }
                Some(g) => {
                    // raw positive draw; exponential when unconstrained
                    let raw = if interior { u } else { (-(1.0 - u).ln()).max(1e-12) };
                    out.insert(spec.name.clone(), raw);
                    *group_totals.entry(g).or_insert(0.0) += spec.simplex_weight * raw;
                }
            }
        }
        for spec in &self.params {
            if let Some(g) = spec.simplex_group {
                *out.get_mut(&spec.name).unwrap() /= group_totals[&g];
            }
        }
        out
    }
}

/// The unitary swapping basis states m and l (m > l), identity elsewhere.
pub fn transposition(m: usize, l: usize, n: usize) -> CMat {
    let mut u = identity(n);
    u[(m, m)] = linalg::ZERO;
    u[(l, l)] = linalg::ZERO;
    u[(m, l)] = ONE;
    u[(l, m)] = ONE;
    u
}

/// The transposition channel with the literal equal weights `p` on every
/// transposition branch. Not trace preserving for N >= 3: the completeness
/// sum is `(1 - p + p C(N,2)) 1`, so validation fails by `p (C(N,2) - 1)`.
pub fn transposition_flip_strict(n: usize, p: f64) -> Result<KrausChannel> {
    check_dim(n)?;
    let mut kraus = vec![identity(n).mapv(|z| z * (1.0 - p).max(0.0).sqrt())];
    for m in 0..n {
        for l in 0..m {
            kraus.push(transposition(m, l, n).mapv(|z| z * p.max(0.0).sqrt()));
        }
    }
    let mut params = BTreeMap::new();
    params.insert("p".to_string(), p);
    Ok(KrausChannel {
        name: "transposition_flip_strict".into(),
        dim: n,
        kraus,
        params,
    })
}
