//! Seeded sampling helpers shared by the ideal and noisy samplers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

pub type SimRng = ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a child seed from a parent seed and a path of identifiers (splitmix64 mixing).
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut x = seed ^ 0x9E37_79B9_7F4A_7C15;
    for &p in path {
        x = splitmix(x ^ splitmix(p.wrapping_add(0xD1B5_4A32_D192_ED03)));
    }
    x
}

/// FNV-1a hash of a label, for deriving per-device streams from names.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n == 1 {
        return (rng.random::<f64>() < p) as u64;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Index drawn with probability proportional to `probs`; `None` if all mass is zero.
pub fn categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> Option<usize> {
    let mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let last = probs.iter().rposition(|&p| p > 0.0)?;
    let mut u = rng.random::<f64>() * mass;
    for (k, &p) in probs[..last].iter().enumerate() {
        u -= p.max(0.0);
        if u < 0.0 {
            return Some(k);
        }
    }
    Some(last)
}

/// Multinomial draw of `n` trials over `probs` via conditional binomials.
/// `probs` need not be exactly normalized; it is renormalized on the fly.
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    if n == 1 {
        if let Some(k) = categorical(rng, probs) {
            out[k] = 1;
        }
        return out;
    }
    let mut remaining = n;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let last = probs.iter().rposition(|&p| p > 0.0);
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if Some(k) == last {
            out[k] = remaining;
            break;
        }
        let c = if mass > 0.0 { binomial(rng, remaining, (p / mass).min(1.0)) } else { 0 };
        out[k] = c;
        remaining -= c;
        mass -= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_conserves_trials() {
        let mut rng = rng_for(7, 0);
        let probs = [0.1, 0.0, 0.25, 0.65];
        for n in [0u64, 1, 17, 8192] {
            let c = multinomial(&mut rng, n, &probs);
            assert_eq!(c.iter().sum::<u64>(), n);
            assert_eq!(c[1], 0);
        }
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(3, &[5]), derive_seed(3, &[5]));
    }
}
