use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simgen::theory::{h_prime, h_prime_uniform};

/// Accuracy of the shape bisection, well inside the 0.05 nat contract.
const H_TOL: f64 = 1e-4;

/// `H'` of geometric weights `q^k`, `k = 0..k_max`, listed in rank order.
fn geometric_h_prime(q: f64, k_max: usize) -> f64 {
    let mut w = 1.0;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..k_max {
        num += w * ((k + 1) as f64).ln();
        den += w;
        w *= q;
    }
    num / den
}

/// Random resumption distribution over `n` positions with `H'(r)` close to
/// `target`.
///
/// The family: pick a support size `K` uniformly among sizes able to reach
/// the target, give its `k`-th member weight `q^k`, and scatter the support
/// over a random permutation of positions. `H'` grows monotonically with
/// `q` from 0 (point mass) to `ln(K!)/K` (uniform on the support), so `q`
/// is found by bisection.
pub fn sample_resumption_distribution(n: usize, target: f64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Range("need at least one position".into()));
    }
    let max = h_prime_uniform(n);
    if !(0.0..=max + 1e-12).contains(&target) {
        return Err(Error::Range(format!(
            "H' target {target} outside [0, {max:.4}] for {n} positions"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cumulative = 0.0;
    let mut k_min = n;
    for k in 1..=n {
        cumulative += (k as f64).ln();
        if cumulative / k as f64 >= target - H_TOL {
            k_min = k;
            break;
        }
    }
    let k = rng.gen_range(k_min..=n);

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let q = if target == 0.0 {
        0.0
    } else if geometric_h_prime(1.0, k) <= target {
        1.0
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if geometric_h_prime(mid, k) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    };

    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(&mut rng);
    let mut r = vec![0.0; n];
    let mut w = 1.0;
    for &p in &positions[..k] {
        r[p] = w;
        w *= q;
    }
    let total: f64 = r.iter().sum();
    r.iter_mut().for_each(|x| *x /= total);

    let achieved = h_prime(&r);
    if (achieved - target).abs() > 0.05 {
        return Err(Error::Range(format!(
            "could not reach H' {target} (got {achieved})"
        )));
    }
    Ok(r)
}
