//! Operator bases for an N-level system.
//!
//! Two bases are provided: the Hermitian symmetric/antisymmetric/diagonal
//! set
//!
//! ```text
//! S(k,l)[i,j] = d_ik d_jl + d_il d_jk          (k > l)
//! A(k,l)[i,j] = -i (d_ik d_jl - d_il d_jk)     (k > l)
//! d(k)[i,j]   = d_ik d_ij
//! D(k,l)      = d(k) - d(l)                    (k > l)
//! ```
//!
//! and the unitary shift/clock family `X^r Z^s` with `X|k> = |k+1 mod N>`,
//! `Z|k> = w^k |k>`, `w = exp(2 pi i / N)`. For a qubit, `S(1,0)` and
//! `A(1,0)` are the Pauli x and y matrices and `D(1,0)` is Pauli z.
//!
//! Projector labels cover the measurement states used to retrieve
//! expectation values from count data: level projectors `|k><k|` and the
//! rank-one projectors onto `(|k> +/- |l>)/sqrt(2)` and
//! `(|k> +/- i|l>)/sqrt(2)`.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;

pub fn check_dim(n: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Dimension(n))
    }
}

/// `w = exp(2 pi i / N)`.
pub fn omega(n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64)
}

fn omega_pow(n: usize, e: i64) -> Complex64 {
    let e = e.rem_euclid(n as i64);
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / n as f64)
}

/// Which rank-one measurement projector, for labels of kind `Projector`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjectorKind {
    /// |k><k|
    Level(usize),
    /// onto (|k> + |l>)/sqrt(2), k > l
    Plus(usize, usize),
    /// onto (|k> - |l>)/sqrt(2), k > l
    Minus(usize, usize),
    /// onto (|k> + i|l>)/sqrt(2), k > l
    PlusI(usize, usize),
    /// onto (|k> - i|l>)/sqrt(2), k > l
    MinusI(usize, usize),
}

/// Label variants. Off-diagonal labels are canonical: `k > l` always.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKind {
    Sym(usize, usize),
    Antisym(usize, usize),
    Diag(usize),
    DiffDiag(usize, usize),
    /// X^r Z^s, 0 <= r,s <= N-1. (0,0) is the identity.
    PauliPower(usize, usize),
    Projector(ProjectorKind),
    Custom(String),
}

/// A named operator on an N-level system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorLabel {
    pub kind: LabelKind,
    pub dim: usize,
}

impl OperatorLabel {
    pub fn new(kind: LabelKind, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let label = OperatorLabel { kind, dim };
        label.check_ranges()?;
        Ok(label)
    }

    pub fn sym(k: usize, l: usize, dim: usize) -> Result<Self> {
        Self::new(LabelKind::Sym(k, l), dim)
    }

    pub fn antisym(k: usize, l: usize, dim: usize) -> Result<Self> {
        Self::new(LabelKind::Antisym(k, l), dim)
    }

    pub fn diag(k: usize, dim: usize) -> Result<Self> {
        Self::new(LabelKind::Diag(k), dim)
    }

    pub fn diff_diag(k: usize, l: usize, dim: usize) -> Result<Self> {
        Self::new(LabelKind::DiffDiag(k, l), dim)
    }

    pub fn pauli_power(r: usize, s: usize, dim: usize) -> Result<Self> {
        Self::new(LabelKind::PauliPower(r, s), dim)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::pauli_power(0, 0, dim)
    }

    pub fn custom(name: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(LabelKind::Custom(name.into()), dim)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, LabelKind::PauliPower(0, 0))
    }

    fn check_ranges(&self) -> Result<()> {
        let n = self.dim;
        let bad = |what: &str| Err(Error::IndexOutOfRange {
            label: what.to_string(),
            dim: n,
        });
        match &self.kind {
            LabelKind::Sym(k, l) | LabelKind::Antisym(k, l) | LabelKind::DiffDiag(k, l) => {
                if *k >= n || *l >= *k {
                    return bad(&format!("{self}"));
                }
            }
            LabelKind::Diag(k) => {
                if *k >= n {
                    return bad(&format!("{self}"));
                }
            }
            LabelKind::PauliPower(r, s) => {
                if *r >= n || *s >= n {
                    return bad(&format!("{self}"));
                }
            }
            LabelKind::Projector(p) => match p {
                ProjectorKind::Level(k) => {
                    if *k >= n {
                        return bad(&format!("{self}"));
                    }
                }
                ProjectorKind::Plus(k, l)
                | ProjectorKind::Minus(k, l)
                | ProjectorKind::PlusI(k, l)
                | ProjectorKind::MinusI(k, l) => {
                    if *k >= n || *l >= *k {
                        return bad(&format!("{self}"));
                    }
                }
            },
            LabelKind::Custom(name) => {
                if name.is_empty() {
                    return Err(Error::InvalidLabel("empty custom name".into()));
                }
            }
        }
        Ok(())
    }

    /// Compact text token, e.g. `S(1,0)`, `d(2)`, `XZ(1,1)`, `proj(+i,2,0)`.
    /// The identity `XZ(0,0)` prints as `I`.
    pub fn token(&self) -> String {
        match &self.kind {
            LabelKind::Sym(k, l) => format!("S({k},{l})"),
            LabelKind::Antisym(k, l) => format!("A({k},{l})"),
            LabelKind::Diag(k) => format!("d({k})"),
            LabelKind::DiffDiag(k, l) => format!("D({k},{l})"),
            LabelKind::PauliPower(0, 0) => "I".to_string(),
            LabelKind::PauliPower(r, s) => format!("XZ({r},{s})"),
            LabelKind::Projector(p) => match p {
                ProjectorKind::Level(k) => format!("proj({k})"),
                ProjectorKind::Plus(k, l) => format!("proj(+,{k},{l})"),
                ProjectorKind::Minus(k, l) => format!("proj(-,{k},{l})"),
                ProjectorKind::PlusI(k, l) => format!("proj(+i,{k},{l})"),
                ProjectorKind::MinusI(k, l) => format!("proj(-i,{k},{l})"),
            },
            LabelKind::Custom(name) => name.clone(),
        }
    }

    /// Parse a token produced by [`OperatorLabel::token`].
    pub fn parse(token: &str, dim: usize) -> Result<Self> {
        let token = token.trim();
        let err = || Error::TokenParse(token.to_string());
        if token == "I" {
            return Self::identity(dim);
        }
        let (head, rest) = match token.find('(') {
            Some(p) if token.ends_with(')') => (&token[..p], &token[p + 1..token.len() - 1]),
            _ => return Self::custom(token, dim),
        };
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let idx = |s: &str| s.parse::<usize>().map_err(|_| err());
        match (head, parts.as_slice()) {
            ("S", [k, l]) => Self::sym(idx(k)?, idx(l)?, dim),
            ("A", [k, l]) => Self::antisym(idx(k)?, idx(l)?, dim),
            ("d", [k]) => Self::diag(idx(k)?, dim),
            ("D", [k, l]) => Self::diff_diag(idx(k)?, idx(l)?, dim),
            ("XZ", [r, s]) => Self::pauli_power(idx(r)?, idx(s)?, dim),
            ("proj", [k]) => Self::new(
                LabelKind::Projector(ProjectorKind::Level(idx(k)?)),
                dim,
            ),
            ("proj", [sign, k, l]) => {
                let (k, l) = (idx(k)?, idx(l)?);
                let kind = match *sign {
                    "+" => ProjectorKind::Plus(k, l),
                    "-" => ProjectorKind::Minus(k, l),
                    "+i" => ProjectorKind::PlusI(k, l),
                    "-i" => ProjectorKind::MinusI(k, l),
                    _ => return Err(err()),
                };
                Self::new(LabelKind::Projector(kind), dim)
            }
            _ => Self::custom(token, dim),
        }
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.token())
    }
}

/// A label together with its matrix.
#[derive(Debug, Clone)]
pub struct LabeledOperator {
    pub label: OperatorLabel,
    pub matrix: CMat,
}

impl LabeledOperator {
    pub fn token(&self) -> String {
        self.label.token()
    }
}

/// Construct the matrix of a basis label.
pub fn basis_matrix(label: &OperatorLabel) -> Result<LabeledOperator> {
    let n = label.dim;
    check_dim(n)?;
    label.check_ranges()?;
    let matrix = match &label.kind {
        LabelKind::Sym(k, l) => {
            let mut m = linalg::zeros(n);
            m[(*k, *l)] = ONE;
            m[(*l, *k)] = ONE;
            m
        }
        LabelKind::Antisym(k, l) => {
            let mut m = linalg::zeros(n);
            m[(*k, *l)] = -linalg::I;
            m[(*l, *k)] = linalg::I;
            m
        }
        LabelKind::Diag(k) => {
            let mut m = linalg::zeros(n);
            m[(*k, *k)] = ONE;
            m
        }
        LabelKind::DiffDiag(k, l) => {
            let mut m = linalg::zeros(n);
            m[(*k, *k)] = ONE;
            m[(*l, *l)] = -ONE;
            m
        }
        LabelKind::PauliPower(r, s) => return gen_pauli_power(*r, *s, n),
        LabelKind::Projector(p) => projector_matrix(p, n),
        LabelKind::Custom(name) => {
            return Err(Error::InvalidLabel(format!(
                "custom label `{name}` carries no predefined matrix"
            )))
        }
    };
    Ok(LabeledOperator {
        label: label.clone(),
        matrix,
    })
}

fn projector_matrix(p: &ProjectorKind, n: usize) -> CMat {
    let mut m = linalg::zeros(n);
    match *p {
        ProjectorKind::Level(k) => {
            m[(k, k)] = ONE;
        }
        // |psi><psi| for |psi> = (|k> + c|l>)/sqrt(2) with c = +-1, +-i
        ProjectorKind::Plus(k, l)
        | ProjectorKind::Minus(k, l)
        | ProjectorKind::PlusI(k, l)
        | ProjectorKind::MinusI(k, l) => {
            let c = match *p {
                ProjectorKind::Plus(..) => ONE,
                ProjectorKind::Minus(..) => -ONE,
                ProjectorKind::PlusI(..) => linalg::I,
                ProjectorKind::MinusI(..) => -linalg::I,
                ProjectorKind::Level(..) => unreachable!(),
            };
            m[(k, k)] = ONE * 0.5;
            m[(l, l)] = ONE * 0.5;
            m[(k, l)] = c.conj() * 0.5;
            m[(l, k)] = c * 0.5;
        }
    }
    m
}

/// `X^r Z^s` with index arithmetic modulo N: `(X^r Z^s)|k> = w^(sk) |k+r>`.
pub fn gen_pauli_power(r: usize, s: usize, n: usize) -> Result<LabeledOperator> {
    let label = OperatorLabel::pauli_power(r, s, n)?;
    let mut m = linalg::zeros(n);
    for k in 0..n {
        m[((k + r) % n, k)] = omega_pow(n, (s * k) as i64);
    }
    Ok(LabeledOperator { label, matrix: m })
}

/// Which unitary power to decompose over the Hermitian basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerKind {
    /// X^m
    XPow(usize),
    /// Z^m
    ZPow(usize),
    /// (XZ)^m as an operator product, i.e. w^(m(m-1)/2) X^m Z^m
    XZPow(usize),
    /// X^m Z^n
    XmZn(usize, usize),
}

/// Expand a unitary power exactly over the S/A/d basis:
///
/// ```text
/// Z^m      = sum_l w^(lm) d(l)
/// X^m Z^n  = sum_l w^(nl) |l+m><l|,   |k><l| = (S(k,l) + i A(k,l))/2
/// (XZ)^m   = w^(m(m-1)/2) X^m Z^m
/// ```
///
/// The returned combination re-sums to the unitary entrywise.
pub fn unitary_power_decomposition(
    kind: PowerKind,
    n: usize,
) -> Result<Vec<(OperatorLabel, Complex64)>> {
    check_dim(n)?;
    let in_range = |m: usize| -> Result<()> {
        if m == 0 {
            Err(Error::IdentityPower)
        } else if m >= n {
            Err(Error::IndexOutOfRange {
                label: format!("exponent {m}"),
                dim: n,
            })
        } else {
            Ok(())
        }
    };
    match kind {
        PowerKind::ZPow(m) => {
            in_range(m)?;
            (0..n)
                .map(|l| Ok((OperatorLabel::diag(l, n)?, omega_pow(n, (l * m) as i64))))
                .collect()
        }
        PowerKind::XPow(m) => {
            in_range(m)?;
            shift_decomposition(m, n, |_| ONE)
        }
        PowerKind::XmZn(m, s) => {
            in_range(m)?;
            if s >= n {
                return Err(Error::IndexOutOfRange {
                    label: format!("exponent {s}"),
                    dim: n,
                });
            }
            shift_decomposition(m, n, |l| omega_pow(n, (s * l) as i64))
        }
        PowerKind::XZPow(m) => {
            in_range(m)?;
            let global = omega_pow(n, (m * (m - 1) / 2) as i64);
            shift_decomposition(m, n, |l| global * omega_pow(n, (m * l) as i64))
        }
    }
}

/// Expand `sum_l c(l) |l+m><l|` over canonical S/A labels, merging
/// coefficients when the (l+m, l) and (l, l+m) positions both occur.
fn shift_decomposition(
    m: usize,
    n: usize,
    coeff: impl Fn(usize) -> Complex64,
) -> Result<Vec<(OperatorLabel, Complex64)>> {
    let mut acc: BTreeMap<OperatorLabel, Complex64> = BTreeMap::new();
    for l in 0..n {
        let k = (l + m) % n;
        let c = coeff(l);
        // |k><l| = (S(k,l) + i A(k,l))/2 for k > l, and the conjugate
        // combination when k < l.
        let (sym, anti, a_sign) = if k > l {
            (
                OperatorLabel::sym(k, l, n)?,
                OperatorLabel::antisym(k, l, n)?,
                linalg::I,
            )
        } else {
            (
                OperatorLabel::sym(l, k, n)?,
                OperatorLabel::antisym(l, k, n)?,
                -linalg::I,
            )
        };
        *acc.entry(sym).or_insert(ZERO) += c * 0.5;
        *acc.entry(anti).or_insert(ZERO) += c * a_sign * 0.5;
    }
    Ok(acc
        .into_iter()
        .filter(|(_, c)| c.norm() > 1e-15)
        .collect())
}

/// Re-sum a decomposition into a matrix (test and retrieval helper).
pub fn resum_decomposition(terms: &[(OperatorLabel, Complex64)], n: usize) -> Result<CMat> {
    let mut m = linalg::zeros(n);
    for (label, c) in terms {
        let op = basis_matrix(label)?;
        m = m + op.matrix.mapv(|z| z * *c);
    }
    Ok(m)
}

/// One projector count record.
#[derive(Debug, Clone, Copy)]
pub struct CountRecord {
    pub projector: ProjectorKind,
    pub shots: u64,
    pub successes: u64,
}

/// Recover basis-operator expectations from projector count rates:
///
/// ```text
/// <d(k)>   = freq(proj(k))
/// <S(k,l)> = freq(proj(+,k,l))  - freq(proj(-,k,l))
/// <A(k,l)> = freq(proj(+i,k,l)) - freq(proj(-i,k,l))
/// ```
///
/// A Sym or Antisym expectation is produced only when both projectors of
/// its pair are present; a lone half is an error.
pub fn expectations_from_counts(
    records: &[CountRecord],
    dim: usize,
) -> Result<BTreeMap<OperatorLabel, f64>> {
    check_dim(dim)?;
    let mut freq: BTreeMap<ProjectorKind, f64> = BTreeMap::new();
    for r in records {
        if r.shots == 0 {
            return Err(Error::InvalidLabel("record with zero shots".into()));
        }
        if r.successes > r.shots {
            return Err(Error::InvalidLabel(format!(
                "successes {} exceed shots {}",
                r.successes, r.shots
            )));
        }
        OperatorLabel::new(LabelKind::Projector(r.projector), dim)?;
        freq.insert(r.projector, r.successes as f64 / r.shots as f64);
    }
    let mut out = BTreeMap::new();
    let missing = |p: ProjectorKind| {
        Error::IncompleteCounts(
            OperatorLabel {
                kind: LabelKind::Projector(p),
                dim,
            }
            .token(),
        )
    };
    for (&p, &f) in &freq {
        match p {
            ProjectorKind::Level(k) => {
                out.insert(OperatorLabel::diag(k, dim)?, f);
            }
            ProjectorKind::Plus(k, l) => {
                let g = freq
                    .get(&ProjectorKind::Minus(k, l))
                    .ok_or_else(|| missing(ProjectorKind::Minus(k, l)))?;
                out.insert(OperatorLabel::sym(k, l, dim)?, f - g);
            }
            ProjectorKind::Minus(k, l) => {
                freq.get(&ProjectorKind::Plus(k, l))
                    .ok_or_else(|| missing(ProjectorKind::Plus(k, l)))?;
            }
            ProjectorKind::PlusI(k, l) => {
                let g = freq
                    .get(&ProjectorKind::MinusI(k, l))
                    .ok_or_else(|| missing(ProjectorKind::MinusI(k, l)))?;
                out.insert(OperatorLabel::antisym(k, l, dim)?, f - g);
            }
            ProjectorKind::MinusI(k, l) => {
                freq.get(&ProjectorKind::PlusI(k, l))
                    .ok_or_else(|| missing(ProjectorKind::PlusI(k, l)))?;
            }
        }
    }
    Ok(out)
}

/// The N^2 Hermitian basis operators {S, A, d} in a fixed order:
/// all S(k,l), then all A(k,l) (k > l, lexicographic), then d(0..N-1).
pub fn hermitian_basis(n: usize) -> Result<Vec<LabeledOperator>> {
    check_dim(n)?;
    let mut ops = Vec::with_capacity(n * n);
    for k in 1..n {
        for l in 0..k {
            ops.push(basis_matrix(&OperatorLabel::sym(k, l, n)?)?);
        }
    }
    for k in 1..n {
        for l in 0..k {
            ops.push(basis_matrix(&OperatorLabel::antisym(k, l, n)?)?);
        }
    }
    for k in 0..n {
        ops.push(basis_matrix(&OperatorLabel::diag(k, n)?)?);
    }
    Ok(ops)
}
