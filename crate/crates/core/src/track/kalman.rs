//! Constant-velocity Kalman filter over `(cx, cy, w, h)` and their velocities.
//!
//! Process and measurement noise scale with the box height, so that a tall
//! (near) player is allowed proportionally more pixel motion than a small one.

use nalgebra::{SMatrix, SVector};

use crate::geometry::BoundingBox;

pub type StateVec = SVector<f64, 8>;
pub type StateCov = SMatrix<f64, 8, 8>;
type Measurement = SVector<f64, 4>;
type ObsMatrix = SMatrix<f64, 4, 8>;

/// Noise weights relative to box height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanNoise {
    pub std_weight_position: f64,
    pub std_weight_velocity: f64,
}

impl Default for KalmanNoise {
    fn default() -> Self {
        Self {
            std_weight_position: 1.0 / 20.0,
            std_weight_velocity: 1.0 / 80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanBoxFilter {
    pub mean: StateVec,
    pub covariance: StateCov,
    noise: KalmanNoise,
}

fn transition() -> StateCov {
    let mut f = StateCov::identity();
    for i in 0..4 {
        f[(i, i + 4)] = 1.0;
    }
    f
}

fn observation() -> ObsMatrix {
    let mut h = ObsMatrix::zeros();
    for i in 0..4 {
        h[(i, i)] = 1.0;
    }
    h
}

fn measurement_of(b: &BoundingBox) -> Measurement {
    let c = b.center();
    Measurement::new(c.x, c.y, b.w, b.h)
}

impl KalmanBoxFilter {
    /// Start a track from a first observation, with zero velocity.
    pub fn initiate(b: &BoundingBox, noise: KalmanNoise) -> Self {
        let z = measurement_of(b);
        let mut mean = StateVec::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&z);
        let h = b.h.max(1.0);
        let p = 2.0 * noise.std_weight_position * h;
        let v = 10.0 * noise.std_weight_velocity * h;
        let std = [p, p, p, p, v, v, v, v];
        let covariance = StateCov::from_diagonal(&StateVec::from_iterator(std.iter().map(|s| s * s)));
        Self {
            mean,
            covariance,
            noise,
        }
    }

    fn height_scale(&self) -> f64 {
        self.mean[3].max(1.0)
    }

    /// Advance one frame under the constant-velocity model.
    pub fn predict(&mut self) {
        let h = self.height_scale();
        let p = self.noise.std_weight_position * h;
        let v = self.noise.std_weight_velocity * h;
        let q = StateCov::from_diagonal(&StateVec::from_iterator(
            [p, p, p, p, v, v, v, v].iter().map(|s| s * s),
        ));
        let f = transition();
        self.mean = f * self.mean;
        self.covariance = f * self.covariance * f.transpose() + q;
        self.symmetrize();
    }

    /// Standard measurement correction, in Joseph form.
    pub fn update(&mut self, b: &BoundingBox) {
        let z = measurement_of(b);
        let h = self.height_scale();
        let r_std = self.noise.std_weight_position * h;
        let r = SMatrix::<f64, 4, 4>::identity() * (r_std * r_std);
        let hm = observation();
        let s = hm * self.covariance * hm.transpose() + r;
        let Some(s_inv) = s.try_inverse() else {
            return;
        };
        let k = self.covariance * hm.transpose() * s_inv;
        let innovation = z - hm * self.mean;
        self.mean += k * innovation;
        let i_kh = StateCov::identity() - k * hm;
        self.covariance = i_kh * self.covariance * i_kh.transpose() + k * r * k.transpose();
        self.symmetrize();
    }

    fn symmetrize(&mut self) {
        self.covariance = (self.covariance + self.covariance.transpose()) * 0.5;
    }

    /// Current state as a box; width and height are clamped at zero.
    pub fn current_box(&self) -> BoundingBox {
        let w = self.mean[2].max(0.0);
        let h = self.mean[3].max(0.0);
        BoundingBox::from_center(self.mean[0], self.mean[1], w, h)
    }
}
