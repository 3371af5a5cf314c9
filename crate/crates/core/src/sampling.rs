//! Seeded random instances: Hermitian matrices, states, bases, lotteries.
//!
//! Every generator takes an explicit RNG so runs are reproducible from a
//! single `u64` seed via [`rng`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::desirability::JointStateMatrix;
use crate::error::Result;
use crate::hermitian::{BlockDiag, HermitianMatrix, OrthogonalDecomposition, Projector};
use crate::lottery::{validate_qh_lottery, PrizePmf, QHLottery};

/// The crate's reproducible generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian part of a matrix with standard complex Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    let data = (0..n * n).map(|_| complex_normal(rng)).collect();
    HermitianMatrix::hermitize(n, data)
}

/// Real symmetric random matrix.
pub fn random_real_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    let data = (0..n * n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect();
    HermitianMatrix::hermitize(n, data)
}

/// `W W†` for an `n × rank` Ginibre matrix `W` (unnormalised).
fn wishart<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> HermitianMatrix {
    let w: Vec<Complex64> = (0..n * rank).map(|_| complex_normal(rng)).collect();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..rank {
                s += w[i * rank + k] * w[j * rank + k].conj();
            }
            data[i * n + j] = s;
        }
    }
    HermitianMatrix::hermitize(n, data)
}

/// Density matrix from the Ginibre ensemble (full rank almost surely).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    random_density_of_rank(rng, n, n)
}

pub fn random_density_of_rank<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> HermitianMatrix {
    let w = wishart(rng, n, rank.max(1));
    let t = w.trace();
    w.scale(1.0 / t)
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Projector {
    Projector::normalized(random_unit_vector(rng, n)).expect("unit vector")
}

/// Haar-random orthonormal basis by Gram-Schmidt.
pub fn random_od<R: Rng + ?Sized>(rng: &mut R, n: usize) -> OrthogonalDecomposition {
    loop {
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut ok = true;
        for _ in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
            for _ in 0..2 {
                for b in &basis {
                    let c: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= c * bi;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
        if ok {
            let projectors = basis.into_iter().map(|v| Projector::new(v).expect("unit vector")).collect();
            if let Ok(od) = OrthogonalDecomposition::new(projectors) {
                return od;
            }
        }
    }
}

/// Uniform draw from the probability simplex.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PrizePmf {
    let w: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    PrizePmf::new(w.into_iter().map(|x| x / s).collect()).expect("simplex point")
}

/// Random POVM with `m` full-rank effects, obtained by whitening Wishart draws.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Result<QHLottery> {
    let raw: Vec<HermitianMatrix> = (0..m).map(|_| wishart(rng, n, n)).collect();
    let mut sum = HermitianMatrix::zeros(n);
    for a in &raw {
        sum = &sum + a;
    }
    let w = sum.inv_sqrt()?;
    let mut blocks: Vec<HermitianMatrix> = raw.iter().map(|a| a.sandwich(&w)).collect::<Result<_>>()?;
    let mut partial = HermitianMatrix::zeros(n);
    for b in &blocks[..m - 1] {
        partial = &partial + b;
    }
    let last = &HermitianMatrix::identity(n) - &partial;
    if last.eig()?.min() >= 0.0 {
        blocks[m - 1] = last;
    }
    validate_qh_lottery(blocks)
}

/// Random quantum horse lottery (a generic POVM).
pub fn random_lottery<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Result<QHLottery> {
    random_povm(rng, m, n)
}

/// Random simple lottery: a random basis with a random prize pmf per projector.
pub fn random_simple_lottery<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Result<QHLottery> {
    let od = random_od(rng, n);
    let pmfs: Vec<PrizePmf> = (0..n).map(|_| random_pmf(rng, m)).collect();
    crate::lottery::make_simple_lottery(&pmfs, &od)
}

/// Random gamble on `count` blocks of size `n`.
pub fn random_gamble<R: Rng + ?Sized>(rng: &mut R, count: usize, n: usize) -> BlockDiag {
    BlockDiag::new((0..count).map(|_| random_hermitian(rng, n)).collect()).expect("non-empty block list")
}

/// Full-rank joint state `Diag(R_1, ..., R_{m-1})` with generic block weights.
pub fn random_joint_state<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> JointStateMatrix {
    let blocks: Vec<HermitianMatrix> = (0..m - 1).map(|_| wishart(rng, n, n)).collect();
    let total: f64 = blocks.iter().map(|b| b.trace()).sum();
    let blocks = BlockDiag::new(blocks).expect("non-empty block list").scale(1.0 / total);
    JointStateMatrix::new(blocks).expect("Wishart blocks form a state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded_and_valid() {
        let a = random_density(&mut rng(3), 4);
        let b = random_density(&mut rng(3), 4);
        assert_eq!(a, b);
        assert!((a.trace() - 1.0).abs() < 1e-12);
        assert!(a.eig().unwrap().min() > 0.0);

        let mut r = rng(11);
        for m in 2..5 {
            for n in 1..5 {
                let q = random_povm(&mut r, m, n).unwrap();
                assert_eq!((q.m(), q.n()), (m, n));
                let s = random_joint_state(&mut r, m, n);
                assert!((s.blocks().trace() - 1.0).abs() < 1e-12);
                random_simple_lottery(&mut r, m, n).unwrap();
                let od = random_od(&mut r, n);
                assert_eq!(od.projectors().len(), n);
            }
        }
        let p = random_pmf(&mut r, 5);
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
