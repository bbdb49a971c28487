//! Space-time points and the parabolic norm.

use serde::{Deserialize, Serialize};

/// A point `(x, t)` in `R^n x R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }

    pub fn origin(n: usize) -> Self {
        Self { x: vec![0.0; n], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `(|x|^2 + |t|)^{1/2}`.
    pub fn parabolic_norm(&self) -> f64 {
        parabolic_norm(&self.x, self.t)
    }

    /// Parabolic dilation `(x, t) -> (lambda x, lambda^2 t)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            x: self.x.iter().map(|v| v * lambda).collect(),
            t: self.t * lambda * lambda,
        }
    }

    /// Component-wise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            t: self.t - other.t,
        }
    }
}

/// Parabolic norm of a raw coordinate pair.
#[inline]
pub fn parabolic_norm(x: &[f64], t: f64) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() + t.abs()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norm_zero_only_at_origin() {
        assert_eq!(SpaceTimePoint::origin(3).parabolic_norm(), 0.0);
        assert!(SpaceTimePoint::new(vec![0.0, 0.0], -1e-300).parabolic_norm() > 0.0);
    }

    proptest! {
        #[test]
        fn norm_is_parabolically_homogeneous(
            x in prop::collection::vec(-2.0f64..2.0, 1..4),
            t in -2.0f64..2.0,
            lambda in 0.01f64..10.0,
        ) {
            let p = SpaceTimePoint::new(x, t);
            let lhs = p.dilate(lambda).parabolic_norm();
            let rhs = lambda * p.parabolic_norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn norm_is_subadditive(
            a in prop::collection::vec(-2.0f64..2.0, 2),
            b in prop::collection::vec(-2.0f64..2.0, 2),
            s in -2.0f64..2.0,
            t in -2.0f64..2.0,
        ) {
            let p = SpaceTimePoint::new(a.clone(), s);
            let q = SpaceTimePoint::new(b.clone(), t);
            let sum = SpaceTimePoint::new(vec![a[0] + b[0], a[1] + b[1]], s + t);
            prop_assert!(sum.parabolic_norm() <= p.parabolic_norm() + q.parabolic_norm() + 1e-12);
        }
    }
}
