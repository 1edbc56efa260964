//! Seeded synthetic point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two uniform blobs `[0,1]²` and `[1.1,2.1]×[0,1]`. The first `n / 2`
/// points go to the left blob; the mask marks them.
pub fn planted_blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for k in 0..n {
        let is_left = k < n / 2;
        let x0 = if is_left { 0.0 } else { 1.1 };
        points.push(vec![x0 + rng.random::<f64>(), rng.random::<f64>()]);
        left.push(is_left);
    }
    (points, left)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_seeded_and_separated() {
        let (a, mask) = planted_blobs(40, 3);
        assert_eq!(a, planted_blobs(40, 3).0);
        assert_ne!(a, planted_blobs(40, 4).0);
        assert_eq!(mask.iter().filter(|&&m| m).count(), 20);
        for (pt, &m) in a.iter().zip(&mask) {
            let x0 = if m { 0.0 } else { 1.1 };
            assert!(pt[0] >= x0 && pt[0] < x0 + 1.0 && (0.0..1.0).contains(&pt[1]));
        }
    }
}
