//! Seeded random states and channels for tests and randomized cross-checks.
//! Everything routes through ChaCha12 so runs are reproducible from a u64.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::channel::{Isometry, KrausChannel};
use super::dims::DimList;
use super::linalg::{CMat, CVec};
use super::state::{DensityOperator, PureState};
use crate::Result;

pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian via Box-Muller.
fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    // Scale so that E|z|^2 = 1.
    Complex64::new(r * theta.cos(), r * theta.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Columns of a Ginibre matrix orthonormalized by modified Gram-Schmidt with
/// one re-orthogonalization pass; Haar-distributed up to column phases,
/// which is all the tests need.
fn orthonormal_columns(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    assert!(cols <= rows);
    let mut m = ginibre(rows, cols, rng);
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..rows).map(|r| m[(r, k)].conj() * m[(r, j)]).sum();
                for r in 0..rows {
                    let sub = proj * m[(r, k)];
                    m[(r, j)] -= sub;
                }
            }
        }
        let norm: f64 = (0..rows).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..rows {
            m[(r, j)] /= Complex64::new(norm, 0.0);
        }
    }
    m
}

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    orthonormal_columns(dim, dim, rng)
}

pub fn random_isometry(dim_out: usize, dim_in: usize, rng: &mut impl Rng) -> Result<Isometry> {
    Isometry::new(orthonormal_columns(dim_out, dim_in, rng))
}

/// A random channel with the given environment dimension: slice a Haar
/// isometry into Kraus operators K_e[a, i] = V[(a, e), i].
pub fn random_kraus_channel(
    dim_in: usize,
    dim_out: usize,
    env: usize,
    rng: &mut impl Rng,
) -> Result<KrausChannel> {
    let v = orthonormal_columns(dim_out * env, dim_in, rng);
    let mut kraus = Vec::with_capacity(env);
    for e in 0..env {
        let mut k = CMat::zeros(dim_out, dim_in);
        for a in 0..dim_out {
            for i in 0..dim_in {
                k[(a, i)] = v[(a * env + e, i)];
            }
        }
        kraus.push(k);
    }
    KrausChannel::new(kraus)
}

pub fn random_pure(dims: DimList, rng: &mut impl Rng) -> PureState {
    let n = dims.total();
    let mut amps = CVec::from_fn(n, |_, _| gaussian(rng));
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps /= Complex64::new(norm, 0.0);
    PureState::new_unchecked(dims, amps)
}

/// A random mixed state of the given rank (purify over `rank` environment
/// dimensions, trace out).
pub fn random_density(dims: DimList, rank: usize, rng: &mut impl Rng) -> Result<DensityOperator> {
    let labels: Vec<String> = dims.labels().iter().map(|s| s.to_string()).collect();
    let ext = dims.concat(&DimList::new(&[("__purifier", rank.max(1))])?)?;
    let psi = random_pure(ext, rng);
    let keep: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
    psi.partial_trace(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_from_seed(11);
        let u = random_unitary(6, &mut rng);
        let defect = (crate::qcore::dagger(&u) * &u - CMat::identity(6, 6)).norm();
        assert!(defect < 1e-12, "defect {defect:.3e}");
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = random_unitary(4, &mut rng_from_seed(3));
        let b = random_unitary(4, &mut rng_from_seed(3));
        assert!((a - b).norm() == 0.0);
    }

    #[test]
    fn random_channel_passes_validation() {
        let mut rng = rng_from_seed(5);
        let ch = random_kraus_channel(2, 3, 2, &mut rng).unwrap();
        assert_eq!(ch.dim_in(), 2);
        assert_eq!(ch.dim_out(), 3);
    }

    #[test]
    fn random_density_validates() {
        let mut rng = rng_from_seed(9);
        let dims = DimList::new(&[("A", 3)]).unwrap();
        let rho = random_density(dims, 2, &mut rng).unwrap();
        rho.validate().unwrap();
        // Rank-2 state of a qutrit: smallest eigenvalue vanishes.
        let vals = crate::qcore::linalg::eigvalsh(rho.matrix()).unwrap();
        assert!(vals[0].abs() < 1e-12);
    }
}
