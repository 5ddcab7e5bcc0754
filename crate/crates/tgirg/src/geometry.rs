//! Torus geometry, model parameters and the threshold connection rule.
//!
//! All distances are max-norm on the d-dimensional torus of volume `n`
//! (side length `n^(1/d)`). Two vertices are connected exactly when the
//! product of their weights reaches the volume of the max-norm ball spanned
//! by their distance, i.e. `w(u)·w(v) >= dist(u,v)^d` (inclusive).

use crate::error::{GirgError, Result};
use crate::scalar::Scalar;

/// All generation parameters of a threshold GIRG instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<F: Scalar> {
    /// Dimension of the torus (>= 1).
    pub d: usize,
    /// Intensity of the Poisson point process, vertices per unit volume.
    pub lambda: F,
    /// Power-law exponent of the weight distribution (> 2).
    pub tau: F,
    /// Torus volume; the side length is `n^(1/d)`.
    pub n: F,
    /// Upper bound for the lowest-level box side D0.
    pub d0_target: F,
    /// Bernoulli retention probability for qualifying edges (1 = keep all).
    pub edge_prob: F,
    /// RNG seed.
    pub seed: u64,
}

impl<F: Scalar> ModelParams<F> {
    pub fn new(d: usize, lambda: F, tau: F, n: F, seed: u64) -> Result<Self> {
        let p = ModelParams {
            d,
            lambda,
            tau,
            n,
            d0_target: F::from_f64_lossy(0.25),
            edge_prob: F::one(),
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let two = F::from_f64_lossy(2.0);
        let half = F::from_f64_lossy(0.5);
        if self.d == 0 {
            return Err(GirgError::InvalidInput("dimension must be >= 1".into()));
        }
        if !(self.tau > two) {
            return Err(GirgError::InvalidInput(format!("tau must be > 2, got {}", self.tau)));
        }
        if !(self.lambda > F::zero()) {
            return Err(GirgError::InvalidInput(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        if !(self.n >= F::one()) {
            return Err(GirgError::InvalidInput(format!("n must be >= 1, got {}", self.n)));
        }
        if !(self.d0_target > F::zero() && self.d0_target <= half) {
            return Err(GirgError::InvalidInput(format!(
                "d0_target must be in (0, 1/2], got {}",
                self.d0_target
            )));
        }
        if !(self.edge_prob > F::zero() && self.edge_prob <= F::one()) {
            return Err(GirgError::InvalidInput(format!(
                "edge_prob must be in (0, 1], got {}",
                self.edge_prob
            )));
        }
        Ok(())
    }

    /// Torus side length `n^(1/d)`.
    pub fn side(&self) -> F {
        if self.d == 1 {
            self.n
        } else {
            self.n.powf(F::one() / F::from_usize_lossy(self.d))
        }
    }
}

/// A point on the torus; `coords.len() == d`, each coordinate in `[0, side)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<F: Scalar> {
    pub coords: Vec<F>,
}

impl<F: Scalar> TorusPoint<F> {
    pub fn new(coords: Vec<F>) -> Self {
        TorusPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A sampled vertex: id, torus position and power-law weight (>= 1).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVertex<F: Scalar> {
    pub id: u32,
    pub pos: TorusPoint<F>,
    pub weight: F,
}

/// Max-norm distance between two points on a torus of the given side,
/// i.e. the max over coordinates of the shorter arc per axis.
pub fn torus_distance<F: Scalar>(a: &TorusPoint<F>, b: &TorusPoint<F>, side: F) -> Result<F> {
    if a.dim() != b.dim() {
        return Err(GirgError::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut best = F::zero();
    for (&x, &y) in a.coords.iter().zip(&b.coords) {
        let gap = (x - y).abs();
        let arc = gap.min(side - gap);
        if arc > best {
            best = arc;
        }
    }
    Ok(best)
}

/// The volume term of the connection rule: `torus_distance(u, v)^d`.
pub fn volume_between<F: Scalar>(
    u: &WeightedVertex<F>,
    v: &WeightedVertex<F>,
    params: &ModelParams<F>,
) -> F {
    let dist = torus_distance(&u.pos, &v.pos, params.side()).expect("vertices share a dimension");
    dist.powi(params.d as i32)
}

/// Threshold rule: an edge exists iff `w(u)·w(v) >= dist(u,v)^d` (inclusive).
pub fn threshold_connects<F: Scalar>(
    u: &WeightedVertex<F>,
    v: &WeightedVertex<F>,
    params: &ModelParams<F>,
) -> bool {
    u.weight * v.weight >= volume_between(u, v, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(coords: &[f64]) -> TorusPoint<f64> {
        TorusPoint::new(coords.to_vec())
    }

    fn vx(id: u32, coords: &[f64], w: f64) -> WeightedVertex<f64> {
        WeightedVertex { id, pos: pt(coords), weight: w }
    }

    fn params_1d(n: f64) -> ModelParams<f64> {
        ModelParams::new(1, 1.0, 3.0, n, 0).unwrap()
    }

    #[test]
    fn torus_distance_wraps() {
        let d = torus_distance(&pt(&[1.0, 15.0]), &pt(&[15.0, 1.0]), 16.0).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn torus_distance_identity() {
        let p = pt(&[3.25, 7.5]);
        assert_eq!(torus_distance(&p, &p, 16.0).unwrap(), 0.0);
    }

    #[test]
    fn torus_distance_no_wrap() {
        assert_eq!(torus_distance(&pt(&[0.0]), &pt(&[7.0]), 16.0).unwrap(), 7.0);
    }

    #[test]
    fn torus_distance_dimension_mismatch() {
        assert!(torus_distance(&pt(&[0.0]), &pt(&[0.0, 1.0]), 4.0).is_err());
    }

    #[test]
    fn volume_is_distance_power() {
        let p2 = ModelParams::new(2, 1.0, 3.0, 256.0, 0).unwrap();
        let u = vx(0, &[0.0, 0.0], 1.0);
        let v = vx(1, &[3.0, 0.0], 1.0);
        assert_eq!(volume_between(&u, &v, &p2), 9.0);

        let p1 = params_1d(16.0);
        assert_eq!(volume_between(&vx(0, &[0.0], 1.0), &vx(1, &[5.0], 1.0), &p1), 5.0);

        let p3 = ModelParams::new(3, 1.0, 3.0, 4096.0, 0).unwrap();
        let u3 = vx(0, &[0.0, 0.0, 0.0], 1.0);
        let v3 = vx(1, &[2.0, 1.0, 0.0], 1.0);
        assert_eq!(volume_between(&u3, &v3, &p3), 8.0);
    }

    #[test]
    fn threshold_direct_evaluation() {
        let p = params_1d(16.0);
        // dist 3, product 4: 3 <= 4 connects.
        assert!(threshold_connects(&vx(0, &[0.0], 2.0), &vx(1, &[3.0], 2.0), &p));
        // dist 5, product 4: no edge.
        assert!(!threshold_connects(&vx(0, &[0.0], 2.0), &vx(1, &[5.0], 2.0), &p));
        // Boundary case is inclusive: dist 1, product 1.
        assert!(threshold_connects(&vx(0, &[0.0], 1.0), &vx(1, &[1.0], 1.0), &p));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2, 1.0, 2.0, 16.0, 0).is_err()); // tau == 2
        assert!(ModelParams::new(2, 0.0, 3.0, 16.0, 0).is_err());
        assert!(ModelParams::new(2, 1.0, 3.0, 0.5, 0).is_err());
        assert!(ModelParams::new(0, 1.0, 3.0, 16.0, 0).is_err());
        let mut p = ModelParams::new(2, 1.0, 3.0, 16.0, 0).unwrap();
        p.edge_prob = 0.0;
        assert!(p.validate().is_err());
        p.edge_prob = 1.0;
        p.d0_target = 0.75;
        assert!(p.validate().is_err());
    }

    #[test]
    fn generic_scalar_f32_smoke() {
        let p = ModelParams::<f32>::new(2, 1.0, 3.0, 256.0, 0).unwrap();
        assert!((p.side() - 16.0).abs() < 1e-5);
        let a = TorusPoint::new(vec![1.0f32, 15.0]);
        let b = TorusPoint::new(vec![15.0f32, 1.0]);
        assert_eq!(torus_distance(&a, &b, 16.0).unwrap(), 2.0);
    }

    proptest! {
        // Triangle inequality on random triples, exact check.
        #[test]
        fn triangle_inequality(
            xs in proptest::collection::vec(0.0f64..16.0, 3),
            ys in proptest::collection::vec(0.0f64..16.0, 3),
        ) {
            let a = pt(&[xs[0], ys[0]]);
            let b = pt(&[xs[1], ys[1]]);
            let c = pt(&[xs[2], ys[2]]);
            let ab = torus_distance(&a, &b, 16.0).unwrap();
            let bc = torus_distance(&b, &c, 16.0).unwrap();
            let ac = torus_distance(&a, &c, 16.0).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!(ab <= 8.0 && ab >= 0.0);
        }

        // Symmetry plus monotonicity in weights for the connection rule.
        #[test]
        fn threshold_symmetric_and_monotone(
            x0 in 0.0f64..16.0, x1 in 0.0f64..16.0,
            w0 in 1.0f64..8.0, w1 in 1.0f64..8.0,
            c in 1.0f64..4.0,
        ) {
            let p = params_1d(16.0);
            let u = vx(0, &[x0], w0);
            let v = vx(1, &[x1], w1);
            prop_assert_eq!(threshold_connects(&u, &v, &p), threshold_connects(&v, &u, &p));
            if threshold_connects(&u, &v, &p) {
                let u2 = vx(0, &[x0], w0 * c);
                let v2 = vx(1, &[x1], w1 * c);
                prop_assert!(threshold_connects(&u2, &v2, &p));
            }
        }
    }

    // 10^4 random triples, exact triangle check on a seeded stream.
    #[test]
    fn triangle_inequality_bulk() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let side = 32.0;
        for _ in 0..10_000 {
            let mut p = || pt(&[rng.random_range(0.0..side), rng.random_range(0.0..side)]);
            let (a, b, c) = (p(), p(), p());
            let ab = torus_distance(&a, &b, side).unwrap();
            let bc = torus_distance(&b, &c, side).unwrap();
            let ac = torus_distance(&a, &c, side).unwrap();
            assert!(ac <= ab + bc + 1e-12);
        }
    }
}
