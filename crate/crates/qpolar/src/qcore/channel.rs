//! Kraus channels, isometries, and Stinespring dilations.

use num_complex::Complex64;

use super::linalg::{self, CMat};
use crate::{Error, Result, RANK_TRUNCATION_TOL, TOL_KRAUS};

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    /// Validates shape consistency and the completeness relation
    /// Σ K†K = I within `TOL_KRAUS`.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero-dimensional Kraus".into()));
        }
        let mut acc = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus shapes disagree: {}x{} vs {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dim_out,
                    dim_in
                )));
            }
            acc += linalg::dagger(k) * k;
        }
        let defect = (&acc - CMat::identity(dim_in, dim_in)).norm();
        if defect > TOL_KRAUS {
            return Err(Error::InvalidChannel(format!(
                "completeness defect {defect:.3e} exceeds {TOL_KRAUS:.0e}"
            )));
        }
        Ok(KrausChannel {
            kraus,
            dim_in,
            dim_out,
        })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            kraus: vec![CMat::identity(dim, dim)],
            dim_in: dim,
            dim_out: dim,
        }
    }

    /// Apply to a density matrix: Σ K ρ K†.
    pub fn apply_matrix(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.dim_in || rho.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {} vs state dim {}",
                self.dim_in,
                rho.nrows()
            )));
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * linalg::dagger(k);
        }
        Ok(out)
    }

    /// State of the environment after the literal dilation of this Kraus
    /// list: R[(k,k')] = Tr[K_k ρ K_{k'}†], dimension = number of Kraus
    /// operators in the list as given.
    pub fn environment_output(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.dim_in || rho.ncols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {} vs state dim {}",
                self.dim_in,
                rho.nrows()
            )));
        }
        let ne = self.kraus.len();
        let mut out = CMat::zeros(ne, ne);
        let pushed: Vec<CMat> = self.kraus.iter().map(|k| k * rho).collect();
        for a in 0..ne {
            for b in 0..ne {
                // Tr[K_a ρ K_b†] = Σ_{ij} (K_a ρ)[i,j] conj(K_b[i,j])
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..self.dim_out {
                    for j in 0..self.dim_in {
                        acc += pushed[a][(i, j)] * self.kraus[b][(i, j)].conj();
                    }
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Choi matrix J = (id ⊗ N)(unnormalized maximally entangled), with the
    /// input index major: J[(i,a),(j,b)] = Σ_k K_k[a,i] conj(K_k[b,j]).
    pub fn choi(&self) -> CMat {
        let d = self.dim_in * self.dim_out;
        let mut j = CMat::zeros(d, d);
        for k in &self.kraus {
            for i in 0..self.dim_in {
                for a in 0..self.dim_out {
                    let left = k[(a, i)];
                    if left.norm_sqr() == 0.0 {
                        continue;
                    }
                    for jj in 0..self.dim_in {
                        for b in 0..self.dim_out {
                            j[(i * self.dim_out + a, jj * self.dim_out + b)] +=
                                left * k[(b, jj)].conj();
                        }
                    }
                }
            }
        }
        j
    }

    /// Canonical minimal Kraus decomposition via the Choi eigendecomposition;
    /// eigenvalues below `RANK_TRUNCATION_TOL` are treated as rank noise and
    /// dropped.
    pub fn minimal_kraus(&self) -> Result<KrausChannel> {
        let j = self.choi();
        let (vals, vecs) = linalg::eigh(&j)?;
        let mut kraus = Vec::new();
        for (idx, &mu) in vals.iter().enumerate() {
            if mu < RANK_TRUNCATION_TOL {
                continue;
            }
            let s = mu.sqrt();
            let col = vecs.column(idx);
            let mut k = CMat::zeros(self.dim_out, self.dim_in);
            for i in 0..self.dim_in {
                for a in 0..self.dim_out {
                    k[(a, i)] = col[i * self.dim_out + a] * Complex64::new(s, 0.0);
                }
            }
            kraus.push(k);
        }
        KrausChannel::new(kraus)
    }

    /// Stinespring isometry of the literal Kraus list: V = Σ_k K_k ⊗ |k⟩,
    /// mapping the input to (output ⊗ environment) with the output index
    /// major. Environment dimension equals the list length as given.
    pub fn stinespring_literal(&self) -> Result<Isometry> {
        let ne = self.kraus.len();
        let mut v = CMat::zeros(self.dim_out * ne, self.dim_in);
        for (k, op) in self.kraus.iter().enumerate() {
            for a in 0..self.dim_out {
                for i in 0..self.dim_in {
                    v[(a * ne + k, i)] = op[(a, i)];
                }
            }
        }
        Isometry::new(v)
    }

    /// Stinespring isometry with the smallest exact environment.
    pub fn stinespring_minimal(&self) -> Result<Isometry> {
        self.minimal_kraus()?.stinespring_literal()
    }

    /// Tensor product channel, first factor on the major index.
    pub fn tensor(&self, other: &KrausChannel) -> Result<KrausChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for ka in &self.kraus {
            for kb in &other.kraus {
                kraus.push(linalg::kron(ka, kb));
            }
        }
        KrausChannel::new(kraus)
    }

    /// Composition `after ∘ before` as pairwise Kraus products.
    pub fn compose(after: &KrausChannel, before: &KrausChannel) -> Result<KrausChannel> {
        if before.dim_out != after.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "composition dims: {} -> {} then {} -> {}",
                before.dim_in, before.dim_out, after.dim_in, after.dim_out
            )));
        }
        let mut kraus = Vec::with_capacity(after.kraus.len() * before.kraus.len());
        for ka in &after.kraus {
            for kb in &before.kraus {
                kraus.push(ka * kb);
            }
        }
        KrausChannel::new(kraus)
    }
}

/// A matrix V with V†V = I, typically a Stinespring dilation.
#[derive(Clone, Debug)]
pub struct Isometry {
    mat: CMat,
}

impl Isometry {
    pub fn new(mat: CMat) -> Result<Self> {
        let d = mat.ncols();
        if mat.nrows() < d {
            return Err(Error::InvalidChannel(format!(
                "isometry must not shrink: {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = (linalg::dagger(&mat) * &mat - CMat::identity(d, d)).norm();
        if defect > TOL_KRAUS {
            return Err(Error::InvalidChannel(format!(
                "isometry defect {defect:.3e} exceeds {TOL_KRAUS:.0e}"
            )));
        }
        Ok(Isometry { mat })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim_in(&self) -> usize {
        self.mat.ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.mat.nrows()
    }

    /// Conjugate a density matrix: V ρ V†.
    pub fn apply_matrix(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "isometry input dim {} vs state dim {}",
                self.dim_in(),
                rho.nrows()
            )));
        }
        Ok(&self.mat * rho * linalg::dagger(&self.mat))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::CVec;

    fn amplitude_damping(gamma: f64) -> KrausChannel {
        let k0 = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new((1.0 - gamma).sqrt(), 0.0),
            ],
        );
        let k1 = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(gamma.sqrt(), 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        KrausChannel::new(vec![k0, k1]).unwrap()
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let half = CMat::identity(2, 2) * Complex64::new(0.5, 0.0);
        assert!(KrausChannel::new(vec![half]).is_err());
    }

    #[test]
    fn choi_trace_equals_input_dim() {
        let ch = amplitude_damping(0.3);
        assert!((ch.choi().trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn minimal_kraus_prunes_redundancy() {
        // Same dephasing map written with three operators.
        let s = Complex64::new((0.35f64).sqrt(), 0.0);
        let z = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new((0.3f64).sqrt(), 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-((0.3f64).sqrt()), 0.0),
            ],
        );
        let redundant =
            KrausChannel::new(vec![CMat::identity(2, 2) * s, CMat::identity(2, 2) * s, z]).unwrap();
        let minimal = redundant.minimal_kraus().unwrap();
        assert_eq!(minimal.kraus().len(), 2);
        // Maps agree on a generic state.
        let rho = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.7, 0.0),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.2, -0.1),
                Complex64::new(0.3, 0.0),
            ],
        );
        let d = (redundant.apply_matrix(&rho).unwrap() - minimal.apply_matrix(&rho).unwrap())
            .norm();
        assert!(d < 1e-10);
    }

    #[test]
    fn stinespring_reduces_to_channel() {
        let ch = amplitude_damping(0.3);
        let v = ch.stinespring_minimal().unwrap();
        assert_eq!(v.dim_out(), 4);
        let psi = CVec::from_vec(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ]);
        let rho = &psi * psi.adjoint();
        let big = v.apply_matrix(&rho).unwrap();
        // Trace out the environment (minor index).
        let ne = v.dim_out() / ch.dim_out();
        let mut reduced = CMat::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for e in 0..ne {
                    reduced[(i, j)] += big[(i * ne + e, j * ne + e)];
                }
            }
        }
        let direct = ch.apply_matrix(&rho).unwrap();
        assert!((reduced - direct).norm() < 1e-10);
        // Environment state matches the closed form.
        let mut env = CMat::zeros(ne, ne);
        for a in 0..ne {
            for b in 0..ne {
                for o in 0..2 {
                    env[(a, b)] += big[(o * ne + a, o * ne + b)];
                }
            }
        }
        let env_direct = ch
            .minimal_kraus()
            .unwrap()
            .environment_output(&rho)
            .unwrap();
        assert!((env - env_direct).norm() < 1e-10);
    }

    #[test]
    fn literal_dilation_keeps_list_length() {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let dup = KrausChannel::new(vec![CMat::identity(2, 2) * s, CMat::identity(2, 2) * s])
            .unwrap();
        assert_eq!(dup.stinespring_literal().unwrap().dim_out(), 4);
        assert_eq!(dup.stinespring_minimal().unwrap().dim_out(), 2);
    }

    #[test]
    fn composition_multiplies_kraus() {
        let ch = amplitude_damping(0.3);
        let id = KrausChannel::identity(2);
        let c = KrausChannel::compose(&ch, &id).unwrap();
        let rho = CMat::identity(2, 2) * Complex64::new(0.5, 0.0);
        let d = (c.apply_matrix(&rho).unwrap() - ch.apply_matrix(&rho).unwrap()).norm();
        assert!(d < 1e-12);
    }

    #[test]
    fn tensor_acts_factorwise() {
        let ch = amplitude_damping(0.4);
        let joint = ch.tensor(&KrausChannel::identity(2)).unwrap();
        assert_eq!(joint.dim_in(), 4);
        let mut rho = CMat::zeros(2, 2);
        rho[(1, 1)] = Complex64::new(1.0, 0.0);
        let expected = linalg::kron(&ch.apply_matrix(&rho).unwrap(), &rho);
        let got = joint.apply_matrix(&linalg::kron(&rho, &rho)).unwrap();
        assert!((got - expected).norm() < 1e-12);
    }
}
