use crate::error::{Error, Result};

/// Empirical CDF as a step function: distinct sorted values `x` paired with
/// the fraction of samples `≤ x`.
pub fn ecdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = p,
            _ => out.push((x, p)),
        }
    }
    Ok(out)
}

/// Largest gap `sup |F_n(x) − F(x)|` between an ECDF and a reference CDF,
/// checked on both sides of every step.
pub fn kolmogorov_distance(points: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut prev = 0.0;
    let mut worst = 0.0f64;
    for &(x, p) in points {
        let f = cdf(x);
        worst = worst.max((p - f).abs()).max((prev - f).abs());
        prev = p;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton() {
        assert_eq!(ecdf(&[5.0]).unwrap(), vec![(5.0, 1.0)]);
    }

    #[test]
    fn duplicates_collapse() {
        assert_eq!(
            ecdf(&[2.0, 4.0, 1.0, 2.0]).unwrap(),
            vec![(1.0, 0.25), (2.0, 0.75), (4.0, 1.0)]
        );
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(ecdf(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn uniform_samples_track_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let pts = ecdf(&xs).unwrap();
        let d = kolmogorov_distance(&pts, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.02, "{d}");
    }
}
