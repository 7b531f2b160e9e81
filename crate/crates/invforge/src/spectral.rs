//! Spectral analysis of the adjoint (Heisenberg-picture) channel map.
//!
//! For a channel with Kraus set `{E_k}`, the adjoint map sends an
//! observable to `O -> sum_k E_k' O E_k`. Operators satisfying
//! `sum_k E_k' O E_k = lambda O` have expectation values that re-scale by
//! `lambda` under the channel; they are the raw material for the invariant
//! search. This module builds the adjoint superoperator, extracts its
//! eigenspaces, and filters the operators that keep re-scaling across a
//! whole noise-parameter family.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::basis::{basis_matrix, LabeledOperator, OperatorLabel};
use crate::channel::{ChannelFamily, FamilyName, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    self, canonical_phase_matrix, dagger, eigendecompose, hs_inner, hs_norm, kron, max_abs,
    orthonormalize, unvec, vec_mat, CMat,
};

/// Default residual / grouping tolerance.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// `O -> sum_k E_k' O E_k`, applied directly.
pub fn apply_adjoint(channel: &KrausChannel, op: &CMat) -> CMat {
    let mut out = linalg::zeros(channel.dim);
    for e in &channel.kraus {
        out = out + dagger(e).dot(op).dot(e);
    }
    out
}

/// The N^2 x N^2 matrix M with `vec(sum_k E_k' O E_k) = M vec(O)` under
/// column-stacking vectorization: `M = sum_k E_k^T (x) E_k'`.
pub fn adjoint_superoperator(channel: &KrausChannel) -> CMat {
    let n = channel.dim;
    let mut m = linalg::zeros(n * n);
    for e in &channel.kraus {
        m = m + kron(&e.t().to_owned(), &dagger(e));
    }
    m
}

/// Least-squares scaling factor with a residual acceptance test:
/// `lambda = <O, Adj(O)> / <O, O>`, returned only when
/// `max |Adj(O) - lambda O|  <= tol`.
pub fn scaling_factor(channel: &KrausChannel, op: &CMat, tol: f64) -> Option<Complex64> {
    scaling_factor_full(channel, op, tol).map(|(l, _)| l)
}

fn scaling_factor_full(channel: &KrausChannel, op: &CMat, tol: f64) -> Option<(Complex64, f64)> {
    let norm_sq = hs_inner(op, op);
    if norm_sq.norm() < 1e-300 {
        return None;
    }
    let adj = apply_adjoint(channel, op);
    let lambda = hs_inner(op, &adj) / norm_sq;
    let residual = max_abs(&(adj - op.mapv(|z| z * lambda)));
    (residual <= tol).then_some((lambda, residual))
}

/// One eigenvalue of the adjoint superoperator with an orthonormal
/// (Hilbert-Schmidt) basis of its eigenspace. When the eigenvalue is real
/// and the space is closed under conjugate transpose, the basis consists
/// of Hermitian matrices.
#[derive(Debug, Clone)]
pub struct EigenSpace {
    pub lambda: Complex64,
    pub basis: Vec<CMat>,
    pub hermitian: bool,
}

/// Eigen-decompose the adjoint superoperator and group eigenvalues that
/// agree to within `tol`. Groups are sorted by descending real part, then
/// descending imaginary part.
pub fn eigenoperators(channel: &KrausChannel, tol: f64) -> Result<Vec<EigenSpace>> {
    if tol <= 0.0 {
        return Err(Error::BadArgument("tolerance must be positive".into()));
    }
    let n = channel.dim;
    let m = adjoint_superoperator(channel);
    let (values, vectors) = eigendecompose(&m)?;
    let groups = group_indices(&values, tol);
    let mut spaces = Vec::with_capacity(groups.len());
    for idx in groups {
        let lambda = mean_of(&values, &idx);
        let vecs: Vec<Vec<Complex64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        let ortho = orthonormalize(&vecs, 1e-8);
        if ortho.len() != idx.len() {
            return Err(Error::Eigensolver(format!(
                "eigenspace at lambda = {lambda} is defective (rank {} of {})",
                ortho.len(),
                idx.len()
            )));
        }
        let mats: Vec<CMat> = ortho.iter().map(|v| unvec(v, n)).collect();
        let (basis, hermitian) = hermitianize(&mats, lambda, tol);
        spaces.push(EigenSpace {
            lambda,
            basis,
            hermitian,
        });
    }
    Ok(spaces)
}

fn group_indices(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        (values[b].re, values[b].im)
            .partial_cmp(&(values[a].re, values[a].im))
            .unwrap()
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups
            .iter_mut()
            .find(|g| (values[g[0]] - values[i]).norm() <= tol)
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups.sort_by(|a, b| {
        (values[b[0]].re, values[b[0]].im)
            .partial_cmp(&(values[a[0]].re, values[a[0]].im))
            .unwrap()
    });
    groups
}

fn mean_of(values: &[Complex64], idx: &[usize]) -> Complex64 {
    idx.iter().map(|&i| values[i]).sum::<Complex64>() / idx.len() as f64
}

/// If `lambda` is real and the span is closed under dagger, rebuild the
/// basis out of Hermitian combinations `(B + B')/2` and `(B - B')/2i`,
/// sign-fixed so the first significant entry has positive real (or, if
/// purely imaginary, positive imaginary) part.
fn hermitianize(mats: &[CMat], lambda: Complex64, tol: f64) -> (Vec<CMat>, bool) {
    let canonical = |ms: &[CMat]| -> Vec<CMat> { ms.iter().map(canonical_phase_matrix).collect() };
    if lambda.im.abs() > tol {
        return (canonical(mats), false);
    }
    let vecs: Vec<Vec<Complex64>> = mats.iter().map(vec_mat).collect();
    for m in mats {
        let residual = project_residual(&vec_mat(&dagger(m)), &vecs);
        if residual > 1e-6 {
            return (canonical(mats), false);
        }
    }
    let mut herm_candidates = Vec::new();
    for m in mats {
        let md = dagger(m);
        herm_candidates.push(vec_mat(&(m + &md).mapv(|z| z * 0.5)));
        herm_candidates.push(vec_mat(
            &(m - &md).mapv(|z| z * Complex64::new(0.0, -0.5)),
        ));
    }
    let ortho = orthonormalize(&herm_candidates, 1e-8);
    if ortho.len() != mats.len() {
        return (canonical(mats), false);
    }
    let n = mats[0].nrows();
    let basis = ortho
        .iter()
        .map(|v| hermitian_sign(unvec(v, n)))
        .collect();
    (basis, true)
}

fn project_residual(v: &[Complex64], basis: &[Vec<Complex64>]) -> f64 {
    let mut w = v.to_vec();
    // basis vectors from eigendecompose are not orthonormal; orthonormalize
    let q = orthonormalize(basis, 1e-10);
    for b in &q {
        let proj: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
        for (wi, bi) in w.iter_mut().zip(b) {
            *wi -= proj * bi;
        }
    }
    let norm_v = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let norm_w = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm_v == 0.0 {
        0.0
    } else {
        norm_w / norm_v
    }
}

fn hermitian_sign(m: CMat) -> CMat {
    let peak = max_abs(&m);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > 1e-9 * peak {
                let s = if z.re.abs() > 1e-12 * peak {
                    z.re.signum()
                } else {
                    z.im.signum()
                };
                return m.mapv(|x| x * s);
            }
        }
    }
    m
}

/// An operator that re-scales under every sampled member of a family.
#[derive(Debug, Clone)]
pub struct Eigenoperator {
    pub label: OperatorLabel,
    /// Hilbert-Schmidt norm 1, first significant row-major entry rotated
    /// to the positive real axis.
    pub matrix: CMat,
    /// One scaling factor per parameter draw.
    pub lambdas: Vec<Complex64>,
    /// True when some phase multiple of the operator is Hermitian.
    pub hermitian: bool,
    /// Worst residual `max |Adj(O) - lambda O|` over the draws.
    pub residual: f64,
}

/// Draw `k` parameter points for a family: the first (reference) draw is
/// kept inside the middle of each parameter range, the rest are
/// unrestricted.
pub fn draw_parameter_sets(
    family: &ChannelFamily,
    k: usize,
    seed: u64,
) -> Vec<BTreeMap<String, f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|i| family.sample_params(&mut rng, i == 0))
        .collect()
}

/// The named operators worth testing against a channel family: identity,
/// the full S/A/d/D basis, every shift/clock power, and (for the
/// transposition channel) the summed operators its invariants are built
/// from. Operators proportional to an earlier entry are dropped, so for a
/// qubit the shift/clock powers collapse into the S/A/D names.
pub fn named_dictionary(name: FamilyName, n: usize) -> Result<Vec<LabeledOperator>> {
    let mut ops: Vec<LabeledOperator> = vec![basis_matrix(&OperatorLabel::identity(n)?)?];
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
    for k in 1..n {
        for l in 0..k {
            ops.push(basis_matrix(&OperatorLabel::diff_diag(k, l, n)?)?);
        }
    }
    for r in 0..n {
        for s in 0..n {
            if (r, s) != (0, 0) {
                ops.push(basis_matrix(&OperatorLabel::pauli_power(r, s, n)?)?);
            }
        }
    }
    if name == FamilyName::TranspositionFlip {
        for op in composite_operators(n)? {
            ops.push(op);
        }
    }
    // drop proportional duplicates, keeping the first occurrence
    let mut kept: Vec<LabeledOperator> = Vec::with_capacity(ops.len());
    for op in ops {
        let dup = kept.iter().any(|k| {
            let c = hs_inner(&k.matrix, &op.matrix).norm();
            c >= (1.0 - 1e-12) * hs_norm(&k.matrix) * hs_norm(&op.matrix)
        });
        if !dup {
            kept.push(op);
        }
    }
    Ok(kept)
}

/// The summed operators used by the transposition-channel invariants:
///
/// ```text
/// Osum  = sum_{k>l} S(k,l)
/// O2(k) = sum_{l != k} -i (|k><l| - |l><k|)
/// O3(k) = sum_{l != k, l != N-1-k} (S_{kl} - S_{N-1-k,l})
/// ```
pub fn composite_operators(n: usize) -> Result<Vec<LabeledOperator>> {
    let mut out = Vec::new();
    let mut osum = linalg::zeros(n);
    for k in 1..n {
        for l in 0..k {
            osum[(k, l)] = linalg::ONE;
            osum[(l, k)] = linalg::ONE;
        }
    }
    out.push(LabeledOperator {
        label: OperatorLabel::custom("Osum", n)?,
        matrix: osum,
    });
    for k in 0..n {
        let mut m = linalg::zeros(n);
        for l in 0..n {
            if l != k {
                m[(k, l)] += -linalg::I;
                m[(l, k)] += linalg::I;
            }
        }
        out.push(LabeledOperator {
            label: OperatorLabel::custom(format!("O2({k})"), n)?,
            matrix: m,
        });
    }
    for k in 0..n {
        let j = n - 1 - k;
        if j <= k {
            continue;
        }
        let mut m = linalg::zeros(n);
        for l in 0..n {
            if l == k || l == j {
                continue;
            }
            m[(k, l)] += linalg::ONE;
            m[(l, k)] += linalg::ONE;
            m[(j, l)] -= linalg::ONE;
            m[(l, j)] -= linalg::ONE;
        }
        // empty index set (N = 2) leaves nothing to sum
        if hs_norm(&m) < 1e-12 {
            continue;
        }
        out.push(LabeledOperator {
            label: OperatorLabel::custom(format!("O3({k})"), n)?,
            matrix: m,
        });
    }
    Ok(out)
}

/// Find the operators that re-scale under the channel at every one of `k`
/// parameter draws.
///
/// The eigenspaces of the adjoint superoperator at the reference draw
/// supply the candidates. Multi-dimensional eigenspaces are jointly
/// re-diagonalized against the second draw's superoperator to split
/// degeneracies that are accidental at the reference point. Named
/// dictionary operators lying inside an eigenspace are preferred as
/// representatives; whatever part of a space they do not cover is kept as
/// anonymous candidates. Every candidate must then pass the
/// [`scaling_factor`] residual test at all `k` draws.
pub fn robust_eigenoperators(
    family: &ChannelFamily,
    k: usize,
    seed: u64,
) -> Result<Vec<Eigenoperator>> {
    if k < 3 {
        return Err(Error::BadArgument(format!(
            "need at least 3 parameter draws, got {k}"
        )));
    }
    if family.params.is_empty() {
        return Err(Error::EmptyParamDomain);
    }
    let n = family.dim;
    let draws = draw_parameter_sets(family, k, seed);
    let channels: Vec<KrausChannel> = draws
        .iter()
        .map(|p| family.instantiate(p))
        .collect::<Result<_>>()?;

    let reference_spaces = eigenoperators(&channels[0], SPECTRAL_TOL)?;

    let mut survivors: Vec<Eigenoperator> = Vec::new();
    let mut survivor_vecs: Vec<Vec<Complex64>> = Vec::new();

    // Named candidates: dictionary operators lying inside some reference
    // eigenspace.
    for op in named_dictionary(family.name, n)? {
        let v = vec_mat(&op.matrix);
        let inside = reference_spaces.iter().any(|space| {
            let basis: Vec<Vec<Complex64>> = space.basis.iter().map(vec_mat).collect();
            project_residual(&v, &basis) <= 1e-6
        });
        if !inside {
            continue;
        }
        if let Some(eigenop) = test_candidate(&channels, op.label.clone(), &op.matrix) {
            survivor_vecs.push(vec_mat(&eigenop.matrix));
            survivors.push(eigenop);
        }
    }

    // Anonymous candidates: split each reference eigenspace against the
    // second draw, then keep directions not already covered by named
    // survivors.
    let m2 = adjoint_superoperator(&channels[1]);
    let named_span = orthonormalize(&survivor_vecs, 1e-10);
    let mut anon = 0usize;
    for space in &reference_spaces {
        for piece in split_against(space, &m2, n)? {
            let mut w = piece;
            for b in &named_span {
                let proj: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                continue;
            }
            for wi in &mut w {
                *wi /= norm;
            }
            let mat = unvec(&w, n);
            let label = OperatorLabel::custom(format!("ev{anon}"), n)?;
            if let Some(eigenop) = test_candidate(&channels, label, &mat) {
                survivors.push(eigenop);
                anon += 1;
            }
        }
    }
    // adjoints of trace-preserving maps have spectral radius 1; anything
    // outside that is numerical debris
    survivors.retain(|s| s.lambdas.iter().all(|l| l.norm() <= 1.0 + 1e-8));
    Ok(survivors)
}

fn test_candidate(
    channels: &[KrausChannel],
    label: OperatorLabel,
    matrix: &CMat,
) -> Option<Eigenoperator> {
    let mut lambdas = Vec::with_capacity(channels.len());
    let mut worst = 0.0f64;
    for ch in channels {
        let (lambda, residual) = scaling_factor_full(ch, matrix, SPECTRAL_TOL)?;
        lambdas.push(lambda);
        worst = worst.max(residual);
    }
    let md = dagger(matrix);
    let c = hs_inner(matrix, &md) / hs_inner(matrix, matrix);
    let hermitian = max_abs(&(md - matrix.mapv(|z| z * c))) <= 1e-8 && (c.norm() - 1.0).abs() < 1e-8;
    Some(Eigenoperator {
        label,
        matrix: canonical_phase_matrix(matrix),
        lambdas,
        hermitian,
        residual: worst,
    })
}

/// Compress the second draw's superoperator into `space` and split along
/// its eigenvectors. Returns candidate vectors in the full vec space.
fn split_against(space: &EigenSpace, m2: &CMat, n: usize) -> Result<Vec<Vec<Complex64>>> {
    let d = space.basis.len();
    let basis: Vec<Vec<Complex64>> = space.basis.iter().map(vec_mat).collect();
    if d == 1 {
        return Ok(basis);
    }
    let dim = n * n;
    // image of each basis vector under M2
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for b in &basis {
        let mut img = vec![linalg::ZERO; dim];
        for (r, img_r) in img.iter_mut().enumerate() {
            let mut acc = linalg::ZERO;
            for c in 0..dim {
                acc += m2[(r, c)] * b[c];
            }
            *img_r = acc;
        }
        images.push(img);
    }
    // compressed d x d matrix C[a, b] = <basis_a, M2 basis_b>
    let mut compressed = linalg::zeros(d);
    for a in 0..d {
        for b in 0..d {
            compressed[(a, b)] = basis[a]
                .iter()
                .zip(&images[b])
                .map(|(x, y)| x.conj() * y)
                .sum();
        }
    }
    let (_, vectors) = eigendecompose(&compressed)?;
    let mut out = Vec::with_capacity(d);
    for v in vectors {
        let mut full = vec![linalg::ZERO; dim];
        for (a, va) in v.iter().enumerate() {
            for (fi, bi) in full.iter_mut().zip(&basis[a]) {
                *fi += *va * bi;
            }
        }
        out.push(full);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::gen_pauli_power;
    use crate::channel::{ChannelFamily, FamilyName};
    use crate::linalg::{identity, max_abs_diff, ONE};
    use crate::transfer::random_density;

    fn family(name: FamilyName, dim: usize) -> ChannelFamily {
        ChannelFamily::new(name, dim).unwrap()
    }

    fn instantiate(name: FamilyName, dim: usize, pairs: &[(&str, f64)]) -> KrausChannel {
        let params = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        family(name, dim).instantiate(&params).unwrap()
    }

    fn pauli(which: char) -> CMat {
        match which {
            'x' => gen_pauli_power(1, 0, 2).unwrap().matrix,
            'z' => gen_pauli_power(0, 1, 2).unwrap().matrix,
            'y' => gen_pauli_power(1, 1, 2)
                .unwrap()
                .matrix
                .mapv(|z| z * linalg::I),
            _ => unreachable!(),
        }
    }

    #[test]
    fn identity_channel_superoperator_is_identity() {
        let ch = KrausChannel::identity(2).unwrap();
        let m = adjoint_superoperator(&ch);
        assert!(max_abs_diff(&m, &identity(4)) < 1e-15);
        let spaces = eigenoperators(&ch, 1e-8).unwrap();
        assert_eq!(spaces.len(), 1);
        assert!((spaces[0].lambda - ONE).norm() < 1e-12);
        assert_eq!(spaces[0].basis.len(), 4);
    }

    #[test]
    fn bit_flip_superoperator_scales_pauli_z() {
        let p = 0.3;
        let ch = instantiate(FamilyName::BitFlip, 2, &[("p", p)]);
        let m = adjoint_superoperator(&ch);
        let vz = vec_mat(&pauli('z'));
        let out: Vec<Complex64> = (0..4)
            .map(|r| (0..4).map(|c| m[(r, c)] * vz[c]).sum())
            .collect();
        for (o, v) in out.iter().zip(&vz) {
            assert!((o - v * (1.0 - 2.0 * p)).norm() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_superoperator_scales_pauli_x() {
        let p = 0.4;
        let ch = instantiate(FamilyName::Depolarizing, 2, &[("p", p)]);
        let adj = apply_adjoint(&ch, &pauli('x'));
        assert!(max_abs_diff(&adj, &pauli('x').mapv(|z| z * (1.0 - p))) < 1e-12);
    }

    #[test]
    fn duality_between_channel_and_adjoint() {
        let mut seed = 0;
        for name in [FamilyName::Adc, FamilyName::GenFlip, FamilyName::Depolarizing] {
            let dim = if name.qubit_only() { 2 } else { 3 };
            let fam = family(name, dim);
            for draw in draw_parameter_sets(&fam, 5, 77 + seed) {
                let ch = fam.instantiate(&draw).unwrap();
                let m = adjoint_superoperator(&ch);
                let rho = random_density(dim, None, 1000 + seed).unwrap();
                let o = crate::transfer::random_density(dim, None, 2000 + seed)
                    .unwrap()
                    .matrix()
                    .clone();
                let lhs = crate::linalg::trace(&o.dot(ch.apply(&rho).unwrap().matrix()));
                let vo = vec_mat(&o);
                let mv: Vec<Complex64> = (0..dim * dim)
                    .map(|r| (0..dim * dim).map(|c| m[(r, c)] * vo[c]).sum())
                    .collect();
                let rhs = crate::linalg::trace(&unvec(&mv, dim).dot(rho.matrix()));
                assert!((lhs - rhs).norm() < 1e-10);
                seed += 1;
            }
        }
    }

    #[test]
    fn phase_flip_eigenspaces() {
        let ch = instantiate(FamilyName::PhaseFlip, 2, &[("p", 0.3)]);
        let spaces = eigenoperators(&ch, 1e-8).unwrap();
        assert_eq!(spaces.len(), 2);
        assert!((spaces[0].lambda - ONE).norm() < 1e-10);
        assert_eq!(spaces[0].basis.len(), 2);
        assert!((spaces[1].lambda.re - 0.4).abs() < 1e-10);
        assert_eq!(spaces[1].basis.len(), 2);
        assert!(spaces[0].hermitian && spaces[1].hermitian);
        for space in &spaces {
            for b in &space.basis {
                assert!(linalg::is_hermitian(b, 1e-9));
                let adj = apply_adjoint(&ch, b);
                assert!(max_abs_diff(&adj, &b.mapv(|z| z * space.lambda)) < 1e-9);
            }
        }
        // lambda = 1 space is spanned by {1, sigma_z}: project sigma_z
        let vz = vec_mat(&pauli('z'));
        let basis: Vec<Vec<Complex64>> = spaces[0].basis.iter().map(vec_mat).collect();
        assert!(project_residual(&vz, &basis) < 1e-8);
        let vx = vec_mat(&pauli('x'));
        let basis1: Vec<Vec<Complex64>> = spaces[1].basis.iter().map(vec_mat).collect();
        assert!(project_residual(&vx, &basis1) < 1e-8);
    }

    #[test]
    fn scaling_factor_examples() {
        let ch = instantiate(FamilyName::BitFlip, 2, &[("p", 0.35)]);
        let lx = scaling_factor(&ch, &pauli('x'), 1e-8).unwrap();
        assert!((lx - ONE).norm() < 1e-12);

        let q = 0.4;
        let ch = instantiate(FamilyName::Adc, 2, &[("q", q)]);
        let lx = scaling_factor(&ch, &pauli('x'), 1e-8).unwrap();
        assert!((lx.re - (1.0 - q).sqrt()).abs() < 1e-12 && lx.im.abs() < 1e-14);

        let ch = instantiate(FamilyName::Depolarizing, 2, &[("p", 0.25)]);
        let mut not_eigen = pauli('x');
        not_eigen[(0, 0)] += ONE; // sigma_x + d(0): mixes two scaling sectors
        assert!(scaling_factor(&ch, &not_eigen, 1e-8).is_none());
    }

    #[test]
    fn gen_flip_clock_powers_scale_by_character_sums() {
        let n = 3;
        let fam = family(FamilyName::GenFlip, n);
        let params: BTreeMap<String, f64> = [("p0", 0.5), ("p1", 0.3), ("p2", 0.2)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let ch = fam.instantiate(&params).unwrap();
        let w = crate::basis::omega(n);
        for m in 1..n {
            let z_m = gen_pauli_power(0, m, n).unwrap().matrix;
            let lambda = scaling_factor(&ch, &z_m, 1e-8).unwrap();
            let expect: Complex64 = (0..n)
                .map(|r| w.powu((r * m) as u32) * params[&format!("p{r}")])
                .sum();
            assert!((lambda - expect).norm() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn robust_set_for_bit_flip_family() {
        let fam = family(FamilyName::BitFlip, 2);
        let ops = robust_eigenoperators(&fam, 5, 42).unwrap();
        let tokens: Vec<String> = ops.iter().map(|o| o.label.token()).collect();
        for expected in ["I", "S(1,0)", "A(1,0)", "D(1,0)"] {
            assert!(tokens.contains(&expected.to_string()), "missing {expected}");
        }
        for op in &ops {
            assert_eq!(op.lambdas.len(), 5);
            assert!(op.residual <= SPECTRAL_TOL);
            match op.label.token().as_str() {
                "I" | "S(1,0)" => {
                    assert!(op.lambdas.iter().all(|l| (l - ONE).norm() < 1e-10));
                }
                "A(1,0)" | "D(1,0)" => {
                    assert!(op.lambdas.iter().all(|l| l.im.abs() < 1e-12));
                }
                other => panic!("unexpected robust operator {other}"),
            }
        }
        // the flip sector scales by exactly 1 - 2p at each draw
        let draws = draw_parameter_sets(&fam, 5, 42);
        let a = ops.iter().find(|o| o.label.token() == "A(1,0)").unwrap();
        let d = ops.iter().find(|o| o.label.token() == "D(1,0)").unwrap();
        for (i, draw) in draws.iter().enumerate() {
            let expect = 1.0 - 2.0 * draw["p"];
            assert!((a.lambdas[i].re - expect).abs() < 1e-12);
            assert!((d.lambdas[i] - a.lambdas[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn robust_set_for_depolarizing_qutrit() {
        let fam = family(FamilyName::Depolarizing, 3);
        let ops = robust_eigenoperators(&fam, 4, 7).unwrap();
        // identity plus a full traceless sector scaling by 1 - p
        let traceless: Vec<&Eigenoperator> =
            ops.iter().filter(|o| !o.label.is_identity()).collect();
        let span = orthonormalize(
            &traceless.iter().map(|o| vec_mat(&o.matrix)).collect::<Vec<_>>(),
            1e-8,
        );
        assert_eq!(span.len(), 8);
        let id = ops.iter().find(|o| o.label.is_identity()).unwrap();
        assert!(id.lambdas.iter().all(|l| (l - ONE).norm() < 1e-10));
        let draws = draw_parameter_sets(&fam, 4, 7);
        for o in &traceless {
            for (i, l) in o.lambdas.iter().enumerate() {
                // whole traceless sector scales by exactly 1 - p_i
                assert!((l - ONE * (1.0 - draws[i]["p"])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_is_always_robust() {
        for name in [
            FamilyName::Pauli,
            FamilyName::GenPauliChannel,
            FamilyName::Gadc,
            FamilyName::TranspositionFlip,
        ] {
            let dim = if name.qubit_only() { 2 } else { 3 };
            let fam = family(name, dim);
            let ops = robust_eigenoperators(&fam, 3, 5).unwrap();
            let id = ops.iter().find(|o| o.label.is_identity());
            assert!(id.is_some(), "identity missing for {name}");
            assert!(id
                .unwrap()
                .lambdas
                .iter()
                .all(|l| (l - ONE).norm() < 1e-10));
        }
    }

    #[test]
    fn named_dictionary_collapses_duplicates_for_qubit() {
        let dict = named_dictionary(FamilyName::BitFlip, 2).unwrap();
        let tokens: Vec<String> = dict.iter().map(|o| o.token()).collect();
        assert_eq!(tokens, vec!["I", "S(1,0)", "A(1,0)", "d(0)", "d(1)", "D(1,0)"]);
    }
}
