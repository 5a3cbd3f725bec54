//! Low-discrepancy uniform batches (randomized quasi-Monte Carlo) plus a
//! plain counter-based pseudo-random fallback.
//!
//! The Sobol mode produces the first `N` points of a d-dimensional Sobol
//! sequence with Owen-style digital scrambling. Direction numbers come from
//! the Joe–Kuo "new-joe-kuo-6" parameter table (embedded in the `sobol`
//! crate, which we use purely as a data source); the bit recursion and the
//! scrambling are implemented here so that the generator works in `f64`, can
//! expose the unscrambled base sequence for testing, and keys every batch by
//! `(seed, iteration index)`.
//!
//! Conventions:
//! - the all-zero point of the raw sequence is skipped, so the first emitted
//!   unscrambled point is `(0.5, …, 0.5)`;
//! - each coordinate of a batch is scrambled by a hash keyed by
//!   `(seed, index, dimension)`, so batches for different iteration indices
//!   are fresh randomizations;
//! - every entry is clamped to `[2⁻⁵³, 1 − 2⁻⁵³]`, keeping downstream
//!   inverse-CDF transforms finite.

use std::sync::OnceLock;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobol::params::JoeKuoD6;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Largest supported dimension (extent of the Joe–Kuo direction-number table).
pub const MAX_SOBOL_DIM: usize = 21_201;

const UNIT_LO: f64 = 1.110_223_024_625_156_5e-16; // 2^-53
const UNIT_HI: f64 = 1.0 - 1.110_223_024_625_156_5e-16;

/// Batch generation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QmcMode {
    /// Owen-scrambled Sobol points.
    Sobol,
    /// Counter-based pseudo-random uniforms (ChaCha keyed by seed and index).
    Pseudo,
}

/// An N × d block of uniforms in (0, 1) with its generation key.
#[derive(Debug, Clone)]
pub struct UniformBatch {
    /// N × d matrix, entries strictly inside (0, 1).
    pub points: Matrix,
    /// Seed the batch was keyed with.
    pub seed: u64,
    /// Iteration counter the batch was keyed with.
    pub index: u64,
    /// Generation mode.
    pub mode: QmcMode,
}

/// Generates an N × d batch of uniforms keyed by `(mode, seed, index)`.
///
/// Identical keys give byte-identical batches; distinct iteration indices give
/// fresh (independently randomized) batches.
pub fn generate(mode: QmcMode, n: usize, d: usize, seed: u64, index: u64) -> Result<UniformBatch> {
    if n == 0 {
        return Err(Error::Dimension("batch size must be at least 1".into()));
    }
    if d == 0 || d > MAX_SOBOL_DIM {
        return Err(Error::Dimension(format!(
            "dimension {d} outside supported range 1..={MAX_SOBOL_DIM}"
        )));
    }
    let points = match mode {
        QmcMode::Sobol => sobol_batch(n, d, seed, index),
        QmcMode::Pseudo => pseudo_batch(n, d, seed, index),
    };
    Ok(UniformBatch { points, seed, index, mode })
}

/// Unscrambled Sobol point at sequence position `i` (0-based, after the
/// first-point-skip), for oracle tests and discrepancy baselines.
pub fn sobol_raw(i: u32, d: usize) -> Vec<f64> {
    let dirs = direction_numbers(d);
    let g = gray(i as u64 + 1);
    (0..d).map(|j| to_unit(sobol_u32(g, &dirs[j]))).collect()
}

fn sobol_batch(n: usize, d: usize, seed: u64, index: u64) -> Matrix {
    let dirs = direction_numbers(d);
    let dim_keys: Vec<u32> =
        (0..d).map(|j| (mix3(seed, index, j as u64) >> 32) as u32).collect();
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        let g = gray(i as u64 + 1);
        let row = m.row_mut(i);
        for j in 0..d {
            let x = owen_scramble(sobol_u32(g, &dirs[j]), dim_keys[j]);
            row[j] = to_unit(x);
        }
    }
    m
}

fn pseudo_batch(n: usize, d: usize, seed: u64, index: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(mix3(seed, index, 0x9d70_53c7));
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let u = (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
            m.set(i, j, u.clamp(UNIT_LO, UNIT_HI));
        }
    }
    m
}

/// Gray code of the sequence position; bit k selects direction number k.
fn gray(n: u64) -> u64 {
    n ^ (n >> 1)
}

/// XOR of the direction numbers selected by the Gray code.
fn sobol_u32(gray: u64, dirs: &[u32; 32]) -> u32 {
    let mut x = 0u32;
    let mut g = gray;
    let mut k = 0;
    while g != 0 {
        if g & 1 == 1 {
            x ^= dirs[k];
        }
        g >>= 1;
        k += 1;
    }
    x
}

fn to_unit(x: u32) -> f64 {
    (x as f64 * 2f64.powi(-32)).clamp(UNIT_LO, UNIT_HI)
}

/// Owen-style scrambling: a keyed, bit-order-reversed avalanche hash
/// (Laine–Karras construction as refined by Burley). The map is a bijection
/// on u32 for every key, so marginal uniformity on the 2⁻³² grid is exact,
/// and flipping a high bit avalanches into all lower bits — the nested
/// uniform-permutation structure of Owen scrambling.
fn owen_scramble(x: u32, key: u32) -> u32 {
    let mut v = x.reverse_bits();
    v ^= v.wrapping_mul(0x3d20_adea);
    v = v.wrapping_add(key);
    v = v.wrapping_mul((key >> 16) | 1);
    v ^= v.wrapping_mul(0x0552_6c56);
    v ^= v.wrapping_mul(0x53a2_2864);
    v.reverse_bits()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes three keys into one 64-bit hash.
pub(crate) fn mix3(a: u64, b: u64, c: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(a) ^ b) ^ c)
}

/// Joe–Kuo parameters, parsed once per process.
fn joe_kuo_params() -> &'static JoeKuoD6 {
    static PARAMS: OnceLock<JoeKuoD6> = OnceLock::new();
    PARAMS.get_or_init(JoeKuoD6::extended)
}

/// Builds 32 direction numbers for each of the first `d` dimensions.
fn direction_numbers(d: usize) -> Vec<[u32; 32]> {
    let mut out = Vec::with_capacity(d);
    // Dimension 1 is the van der Corput sequence.
    let mut first = [0u32; 32];
    for (k, v) in first.iter_mut().enumerate() {
        *v = 1u32 << (31 - k);
    }
    out.push(first);
    let table = &joe_kuo_params().dim_params;
    for j in 2..=d {
        let p = &table[j - 2];
        debug_assert_eq!(p.d as usize, j, "Joe-Kuo table row mismatch");
        let s = p.m.len();
        let mut v = [0u32; 32];
        for k in 0..s.min(32) {
            v[k] = p.m[k] << (31 - k);
        }
        for k in s..32 {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for i in 1..s {
                if (p.a >> (s - 1 - i)) & 1 == 1 {
                    x ^= v[k - i];
                }
            }
            v[k] = x;
        }
        out.push(v);
    }
    out
}
