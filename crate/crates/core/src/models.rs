//! Standard test laws used by the CLI, the examples and the acceptance suite.

use std::f64::consts::PI;

use crate::measures::FiniteMeasure;
use crate::projective::Mat;

/// Half the log-ratio of the singular values of the hyperbolic generators.
pub const PAIR_STRETCH: f64 = 0.5;
/// Angle (radians) between the expanding axes of the two generators.
pub const PAIR_ANGLE: f64 = 1.0;
/// The generators carry scalar factors `e^{+1}` and `e^{−1}`.
pub const PAIR_SCALAR: f64 = 1.0;

pub fn rotation(theta: f64) -> Mat<2> {
    let (c, s) = (theta.cos(), theta.sin());
    Mat::<2>::new(c, -s, s, c)
}

/// Two non-commuting hyperbolic matrices, `e·A` and `e⁻¹·R A Rᵀ` with
/// `A = diag(e^{1/2}, e^{−1/2})` and R the rotation by one radian, each
/// multiplied by `e^{log_shift}`, with weights ½. Strongly irreducible and
/// proximal; the scalar factors spread the radial cocycle.
pub fn hyperbolic_pair(log_shift: f64) -> FiniteMeasure<Mat<2>> {
    let a = Mat::<2>::new(PAIR_STRETCH.exp(), 0.0, 0.0, (-PAIR_STRETCH).exp());
    let r = rotation(PAIR_ANGLE);
    let b = r * a * r.transpose();
    let s = log_shift.exp();
    FiniteMeasure::uniform(vec![a * (PAIR_SCALAR.exp() * s), b * ((-PAIR_SCALAR).exp() * s)]).expect("two atoms")
}

/// Uniform law on the rotations by `jπ/k`, `j = 0..k`.
pub fn rotations(k: usize) -> FiniteMeasure<Mat<2>> {
    FiniteMeasure::uniform((0..k).map(|j| rotation(j as f64 * PI / k as f64)).collect()).expect("nonempty")
}

/// Rotations by `jπ/k` composed with a dilation by 2 or ½, uniformly.
/// Its radial part is a fair ±log 2 walk; the direction is uniform after one step.
pub fn rotation_dilation(k: usize) -> FiniteMeasure<Mat<2>> {
    let atoms = (0..k)
        .flat_map(|j| {
            let r = rotation(j as f64 * PI / k as f64);
            [r * 2.0, r * 0.5]
        })
        .collect();
    FiniteMeasure::uniform(atoms).expect("nonempty")
}
