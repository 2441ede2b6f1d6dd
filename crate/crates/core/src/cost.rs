//! Normalized operation-count model for full inversion versus the
//! Woodbury/arSVD update. All big-O constants are 1, so the numbers are
//! dimensionless "cost units" comparable only with each other.

/// Pure formula container; see the free functions for the formulas.
#[derive(Debug, Clone, Copy, Default)]
pub struct CostModel;

impl CostModel {
    pub fn full(self, k: usize) -> f64 {
        cost_full(k)
    }

    pub fn wb_arsvd(self, k: usize, r: usize) -> f64 {
        cost_wb_arsvd(k, r)
    }

    pub fn sketch(self, k: usize, r: usize) -> f64 {
        cost_sketch(k, r)
    }

    pub fn ratio(self, k: usize, r: usize) -> f64 {
        cost_ratio(k, r)
    }
}

/// Full `K×K` inversion: `K³`.
pub fn cost_full(k: usize) -> f64 {
    let k = k as f64;
    k * k * k
}

/// Woodbury update fed by arSVD: `K² + K²r + r³ + r²K`.
pub fn cost_wb_arsvd(k: usize, r: usize) -> f64 {
    let (k, r) = (k as f64, r as f64);
    k * k + k * k * r + r * r * r + r * r * k
}

/// Rank-`r` arSVD sketch alone: `K²r + r²K`.
pub fn cost_sketch(k: usize, r: usize) -> f64 {
    let (k, r) = (k as f64, r as f64);
    k * k * r + r * r * k
}

pub fn cost_ratio(k: usize, r: usize) -> f64 {
    cost_wb_arsvd(k, r) / cost_full(k)
}

/// Smallest rank `r ∈ [0, K]` whose update cost exceeds a full inversion.
pub fn crossover_rank(k: usize) -> Option<usize> {
    (0..=k).find(|&r| cost_ratio(k, r) > 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_at_half_rank_for_k100() {
        // (1e4 + 5e5 + 1.25e5 + 2.5e5) / 1e6
        assert!((cost_ratio(100, 50) - 0.885).abs() < 1e-12);
    }

    #[test]
    fn ratio_at_full_rank_for_k100() {
        // (1e4 + 1e6 + 1e6 + 1e6) / 1e6
        assert!((cost_ratio(100, 100) - 3.01).abs() < 1e-12);
    }

    #[test]
    fn crossover_for_k100_is_55() {
        // r = 54: 1e4 + 540000 + 157464 + 291600 = 999064
        // r = 55: 1e4 + 550000 + 166375 + 302500 = 1028875
        assert!(cost_wb_arsvd(100, 54) < cost_full(100));
        assert!(cost_wb_arsvd(100, 55) > cost_full(100));
        assert_eq!(crossover_rank(100), Some(55));
    }

    #[test]
    fn rank_one_ratio_for_k100() {
        // (1e4 + 1e4 + 1 + 100) / 1e6
        assert!((cost_ratio(100, 1) - 0.020101).abs() < 1e-12);
    }

    #[test]
    fn costs_positive() {
        for k in 1..20 {
            assert!(cost_full(k) > 0.0);
            for r in 0..=k {
                assert!(cost_wb_arsvd(k, r) > 0.0);
            }
        }
    }

    #[test]
    fn sketch_is_part_of_update_cost() {
        for r in 0..=16 {
            let residual = cost_wb_arsvd(16, r) - cost_sketch(16, r);
            assert_eq!(residual, 256.0 + (r * r * r) as f64);
        }
    }
}
