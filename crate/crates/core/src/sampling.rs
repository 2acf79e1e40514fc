//! Random draws shared by the walk engine.

use rustc_hash::FxHashMap as HashMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};

/// Above this mean the binomial draw switches from inverse transform to BTPE.
const INVERSION_MEAN_LIMIT: f64 = 16.0;

/// Walk length `L` with `P(L = k) = ε(1−ε)^k`, `k ≥ 0`.
pub fn walk_length<R: Rng + ?Sized>(eps: f64, rng: &mut R) -> usize {
    Geometric::new(eps).expect("jump probability in (0, 1)").sample(rng) as usize
}

/// Draw from Binomial(`trials`, `p`).
///
/// Small means use sequential inverse transform, which is exact; larger ones
/// defer to `rand_distr`'s BTPE sampler.
pub fn binomial<R: Rng + ?Sized>(trials: u64, p: f64, rng: &mut R) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    if p > 0.5 {
        return trials - binomial(trials, 1.0 - p, rng);
    }
    if trials as f64 * p > INVERSION_MEAN_LIMIT {
        return Binomial::new(trials, p).expect("valid binomial").sample(rng);
    }
    let q = 1.0 - p;
    let odds = p / q;
    let mut pmf = q.powf(trials as f64);
    let mut cdf = pmf;
    let u: f64 = rng.random();
    let mut k = 0u64;
    while u > cdf && k < trials {
        pmf *= odds * (trials - k) as f64 / (k + 1) as f64;
        k += 1;
        cdf += pmf;
        if pmf == 0.0 && cdf < u {
            // round-off left a sliver of mass unassigned; stop at the tail
            break;
        }
    }
    k
}

/// `count` distinct values drawn uniformly from `0..range`, in draw order.
///
/// Partial Fisher–Yates over a virtual identity permutation; only the swapped
/// slots are materialized.
pub fn distinct_ranks<R: Rng + ?Sized>(range: usize, count: usize, rng: &mut R) -> Vec<usize> {
    assert!(count <= range, "cannot draw {count} distinct values from {range}");
    let mut swapped: HashMap<usize, usize> = HashMap::with_capacity_and_hasher(count * 2, Default::default());
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let j = rng.random_range(i..range);
        let at_j = swapped.get(&j).copied().unwrap_or(j);
        let at_i = swapped.get(&i).copied().unwrap_or(i);
        swapped.insert(j, at_i);
        out.push(at_j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn length_law_matches_geometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eps = 0.3;
        let draws = 200_000;
        let mut zeros = 0;
        let mut total = 0usize;
        for _ in 0..draws {
            let l = walk_length(eps, &mut rng);
            zeros += usize::from(l == 0);
            total += l + 1;
        }
        let p0 = zeros as f64 / draws as f64;
        let sd = (eps * (1.0 - eps) / draws as f64).sqrt();
        assert!((p0 - eps).abs() < 4.0 * sd, "P(L=0) = {p0}");
        let mean = total as f64 / draws as f64;
        assert!((mean - 1.0 / eps).abs() < 0.03, "E[L+1] = {mean}");
    }

    #[test]
    fn binomial_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(binomial(0, 0.4, &mut rng), 0);
        assert_eq!(binomial(10, 0.0, &mut rng), 0);
        assert_eq!(binomial(10, 1.0, &mut rng), 10);
        for _ in 0..1000 {
            assert!(binomial(5, 0.9, &mut rng) <= 5);
        }
    }

    #[test]
    fn binomial_moments_on_both_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, p) in [(1u64, 0.5), (7, 0.25), (40, 0.1), (5000, 0.2), (30, 0.8)] {
            let draws = 100_000;
            let xs: Vec<f64> = (0..draws).map(|_| binomial(n, p, &mut rng) as f64).collect();
            let mean = xs.iter().sum::<f64>() / draws as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws as f64;
            let mu = n as f64 * p;
            let sigma2 = mu * (1.0 - p);
            assert!((mean - mu).abs() < 5.0 * (sigma2 / draws as f64).sqrt(), "n={n} p={p} mean={mean}");
            assert!((var / sigma2 - 1.0).abs() < 0.05, "n={n} p={p} var={var}");
        }
    }

    #[test]
    fn ranks_are_distinct_and_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hits = [0u32; 10];
        for _ in 0..20_000 {
            let mut r = distinct_ranks(10, 3, &mut rng);
            r.sort_unstable();
            r.dedup();
            assert_eq!(r.len(), 3);
            for x in r {
                hits[x] += 1;
            }
        }
        // each slot chosen with probability 3/10
        for h in hits {
            assert!((f64::from(h) / 20_000.0 - 0.3).abs() < 0.02, "{hits:?}");
        }
        assert_eq!(distinct_ranks(4, 4, &mut rng).len(), 4);
        assert!(distinct_ranks(4, 0, &mut rng).is_empty());
    }
}
