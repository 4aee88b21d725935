use rand_distr::{Distribution, StandardNormal};

use super::PoseSample;
use crate::rng::Rng;

/// Independent zero-mean Gaussian tracking noise on the six pose channels.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub sigma_xyz: f64,
    pub sigma_rpy: f64,
    rng: Rng,
}

impl NoiseModel {
    pub fn new(sigma_xyz: f64, sigma_rpy: f64, rng: Rng) -> Self {
        Self {
            sigma_xyz,
            sigma_rpy,
            rng,
        }
    }

    /// One draw of `N(0, 1)` scaled by `sigma`. A draw is consumed even when
    /// `sigma` is zero so noise sequences line up across configurations.
    fn draw(&mut self, sigma: f64) -> f64 {
        let n: f64 = StandardNormal.sample(&mut self.rng);
        if sigma == 0.0 {
            0.0
        } else {
            sigma * n
        }
    }

    /// Perturb position and orientation channels in place, x, y, z, roll,
    /// pitch, yaw order.
    pub fn perturb(&mut self, pose: &mut PoseSample) {
        for p in pose.position.iter_mut() {
            *p += self.draw(self.sigma_xyz);
        }
        for a in pose.rpy.iter_mut() {
            *a += self.draw(self.sigma_rpy);
        }
    }
}
