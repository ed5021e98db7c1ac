//! Dense complex linear algebra. One numerically controlled path: every
//! square root, entropy, and trace norm goes through a Hermitian
//! eigendecomposition, with small negative eigenvalues clipped to zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result, TOL_STRUCTURAL};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Kronecker product, row-major convention: the first factor owns the most
/// significant index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Max-norm Hermiticity defect.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

/// Entrywise-symmetrized copy as a faer matrix, so tolerance-level
/// Hermiticity defects cannot leak asymmetry into the solver.
fn faer_hermitian(m: &CMat) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.nrows(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

/// Hermitian eigendecomposition. Returns eigenvalues (ascending) and the
/// matrix of eigenvectors as columns.
///
/// Delegated to faer's self-adjoint solver: the tensor powers of density
/// operators this crate grinds through have heavily degenerate spectra, which
/// nalgebra's iteration resolves into orthonormal vectors that are not
/// eigenvectors.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigh of non-square matrix".into()));
    }
    let d = m.nrows();
    if d == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let evd = faer_hermitian(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::InvalidState("eigendecomposition did not converge".into()))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..d).map(|i| s[i].re).collect();
    let u = evd.U();
    let vectors = CMat::from_fn(d, d, |i, j| u[(i, j)]);
    Ok((values, vectors))
}

/// Eigenvalues only (ascending); cheaper than `eigh` when vectors are unused.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "eigvalsh of non-square matrix".into(),
        ));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    faer_hermitian(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::InvalidState("eigendecomposition did not converge".into()))
}

/// Clip eigenvalues of a nominally PSD operator: values in (−1e-10, 0) are
/// rounded to 0, values at or below −1e-10 are a hard error.
pub fn clip_psd(values: &[f64], context: &str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        if v < -TOL_STRUCTURAL {
            return Err(Error::InvalidState(format!(
                "{context}: eigenvalue {v:.3e} below PSD tolerance"
            )));
        }
        out.push(v.max(0.0));
    }
    Ok(out)
}

/// Entropy in bits of a probability-like eigenvalue list (0·log 0 = 0).
/// Values are used as given; callers clip first.
pub fn entropy_bits(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum()
}

/// Entropy in bits of a Hermitian PSD matrix.
pub fn entropy_of(m: &CMat, context: &str) -> Result<f64> {
    let vals = clip_psd(&eigvalsh(m)?, context)?;
    Ok(entropy_bits(&vals))
}

/// Principal square root of a Hermitian PSD matrix.
pub fn sqrtm_psd(m: &CMat) -> Result<CMat> {
    let (values, vectors) = eigh(m)?;
    let values = clip_psd(&values, "sqrtm")?;
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let s = Complex64::new(v.sqrt(), 0.0);
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    Ok(&scaled * dagger(&vectors))
}

/// Trace norm ‖M‖₁ = Tr √(M†M) of an arbitrary matrix, via the eigenvalues
/// of the Hermitian Gram matrix.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    let gram = dagger(m) * m;
    let vals = clip_psd(&eigvalsh(&gram)?, "trace norm gram")?;
    Ok(vals.iter().map(|v| v.sqrt()).sum())
}

/// Trace norm of a Hermitian matrix: Σ |λ|. Used for trace distances.
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    Ok(eigvalsh(m)?.iter().map(|v| v.abs()).sum())
}

/// ‖√a √b‖₁ for Hermitian PSD `a`, `b`, computed as Tr √(√a b √a). The
/// square root is taken on the support of `a` only: restricting to the r
/// eigenvectors with nonnegligible eigenvalue gives an r×r problem whose
/// spectrum is exactly the nonzero spectrum of √a b √a. Without the
/// restriction, exact zero eigenvalues pick up O(ε) noise that the square
/// root inflates to O(√ε), which is visible at the tolerances used here.
pub fn fidelity_mats(a: &CMat, b: &CMat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let (vals, vecs) = eigh(a)?;
    let vals = clip_psd(&vals, "fidelity left operand")?;
    let top = vals.iter().cloned().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let threshold = top * 1e-14;
    let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > threshold).collect();
    let n = a.nrows();
    // W = U_r diag(√α): columns span supp(a), so W† b W has the nonzero
    // spectrum of √a b √a.
    let mut w = CMat::zeros(n, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        let s = Complex64::new(vals[k].sqrt(), 0.0);
        for i in 0..n {
            w[(i, c)] = vecs[(i, k)] * s;
        }
    }
    let inner = dagger(&w) * b * &w;
    let vals = clip_psd(&eigvalsh(&inner)?, "fidelity inner")?;
    let f: f64 = vals.iter().map(|v| v.sqrt()).sum();
    // Clamp the tiny numerical overshoot above 1 that clipping can produce.
    Ok(f.min(1.0).max(0.0))
}

/// Attempt a simultaneous eigenbasis for a family of commuting Hermitian PSD
/// matrices. Returns the common diagonals if every matrix is diagonal (within
/// `tol`, relative to its trace) in the eigenbasis of a generic positive
/// combination; `None` otherwise. This is the gateway to the fast classical
/// path in channel synthesis.
pub fn simultaneous_diagonals(mats: &[&CMat], tol: f64) -> Result<Option<Vec<Vec<f64>>>> {
    Ok(simultaneous_eigenbasis(mats, tol)?.map(|(_, diags)| diags))
}

/// Like [`simultaneous_diagonals`], but also hands back the unitary whose
/// columns are the shared eigenvectors, so callers can rotate functions of
/// the diagonals back into the computational basis.
pub fn simultaneous_eigenbasis(mats: &[&CMat], tol: f64) -> Result<Option<(CMat, Vec<Vec<f64>>)>> {
    if mats.is_empty() {
        return Ok(Some((CMat::identity(0, 0), Vec::new())));
    }
    let n = mats[0].nrows();
    // Generic weights break degeneracies that any single member would leave.
    let mut probe = CMat::zeros(n, n);
    for (k, m) in mats.iter().enumerate() {
        let w = Complex64::new(1.0 + 0.318_309 * (k as f64 + 1.0), 0.0);
        probe += m.scale(1.0) * w;
    }
    let (_, basis) = eigh(&probe)?;
    let basis_dag = dagger(&basis);
    let mut diags = Vec::with_capacity(mats.len());
    for m in mats {
        let rotated = &basis_dag * *m * &basis;
        let scale = rotated.trace().re.abs().max(1.0);
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && rotated[(i, j)].norm() > tol * scale {
                    return Ok(None);
                }
            }
            diag.push(rotated[(i, i)].re);
        }
        diags.push(diag);
    }
    Ok(Some((basis, diags)))
}

/// Frobenius distance, for test assertions.
pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn pauli_x() -> CMat {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    CMat::from_row_slice(2, 2, &[z, o, o, z])
}

pub fn pauli_z() -> CMat {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    CMat::from_row_slice(2, 2, &[o, z, z, -o])
}

pub fn hadamard() -> CMat {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMat::from_row_slice(2, 2, &[s, s, s, -s])
}
