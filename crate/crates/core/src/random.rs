//! Seeded Gaussian instance generators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::tt::{left_orthogonalize, Core, Orthogonality, TTTensor};

/// Deterministic standard-normal stream.
pub struct Gaussian {
    rng: ChaCha8Rng,
}

/// Independent ChaCha streams per generator, so equal seeds passed to
/// different generators never produce correlated draws.
pub mod stream {
    pub const BASE: u64 = 1;
    pub const CONE: u64 = 2;
    pub const DENSE: u64 = 3;
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Gaussian {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Gaussian { rng }
    }

    pub fn sample(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample()).collect()
    }

    pub fn core(&mut self, left: usize, mode: usize, right: usize) -> Core {
        Core::new(left, mode, right, self.vec(left * mode * right)).expect("sizes match")
    }
}

fn check_ranks(dims: &[usize], ranks: &[usize]) -> Result<()> {
    if dims.len() < 2 || ranks.len() + 1 != dims.len() {
        return Err(Error::InvalidRanks {
            dims: dims.to_vec(),
            ranks: ranks.to_vec(),
            reason: "need d >= 2 dims and d - 1 ranks".into(),
        });
    }
    if dims.contains(&0) {
        return Err(Error::InvalidDims {
            dims: dims.to_vec(),
            reason: "every dimension must be positive".into(),
        });
    }
    Ok(())
}

/// Gaussian cores with the given bonds, no orthogonality.
pub fn random_tt(dims: &[usize], ranks: &[usize], g: &mut Gaussian) -> Result<TTTensor> {
    check_ranks(dims, ranks)?;
    let d = dims.len();
    let cores = (0..d)
        .map(|i| {
            let left = if i == 0 { 1 } else { ranks[i - 1] };
            let right = if i + 1 == d { 1 } else { ranks[i] };
            g.core(left, dims[i], right)
        })
        .collect();
    TTTensor::new(cores, Orthogonality::None)
}

/// Left-orthogonal base point of unit norm whose matricization ranks are
/// exactly `ranks` (generically).
///
/// Requires `1 <= k_i <= k_{i-1} n_i` and `k_i <= n_{i+1} k_{i+1}` with
/// `k_0 = k_d = 1`; otherwise the ranks cannot be attained.
pub fn random_base(dims: &[usize], ranks: &[usize], seed: u64) -> Result<TTTensor> {
    check_ranks(dims, ranks)?;
    let d = dims.len();
    let bond = |i: usize| if i == 0 || i == d { 1 } else { ranks[i - 1] };
    for i in 1..d {
        let k = bond(i);
        let reason = if k == 0 {
            Some("ranks must be positive")
        } else if k > bond(i - 1) * dims[i - 1] {
            Some("rank exceeds left bond times mode size")
        } else if k > dims[i] * bond(i + 1) {
            Some("rank exceeds right bond times mode size")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidRanks {
                dims: dims.to_vec(),
                ranks: ranks.to_vec(),
                reason: format!("{reason} at split {i}"),
            });
        }
    }
    let mut g = Gaussian::with_stream(seed, stream::BASE);
    let t = left_orthogonalize(&random_tt(dims, ranks, &mut g)?);
    let norm = t.core(d - 1).norm();
    let mut cores = t.into_cores();
    if norm > 0.0 {
        cores[d - 1].scale_mut(1.0 / norm);
    }
    TTTensor::new(cores, Orthogonality::Left)
}

pub fn random_dense(dims: &[usize], seed: u64) -> Result<DenseTensor> {
    let mut g = Gaussian::with_stream(seed, stream::DENSE);
    let n = dims.iter().product();
    DenseTensor::new(dims.to_vec(), g.vec(n))
}
