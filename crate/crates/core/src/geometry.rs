//! Angle conventions, positions, and uniform linear array (ULA) steering vectors.
//!
//! Both arrays lie along the +x axis. A ULA only sees `cos(angle)`, so every
//! angle is folded onto the resolvable half-plane `[0°, 180°]`; the grid and
//! error metrics never leave it.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// Direction angle measured from the array axis, stored in radians.
///
/// Construction folds any real input onto `[0°, 180°]` with `η ↦ 2π − η`,
/// which leaves `cos η` (the only quantity a ULA responds to) unchanged.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    pub fn from_radians(rad: f64) -> Self {
        let mut r = rad.rem_euclid(2.0 * PI);
        if r > PI {
            r = 2.0 * PI - r;
        }
        Angle(r)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    /// Absolute difference in degrees. No wrap-around: 0° and 180° are the
    /// two distinct endfire directions.
    pub fn abs_diff_deg(self, other: Angle) -> f64 {
        (self.degrees() - other.degrees()).abs()
    }
}

impl From<f64> for Angle {
    fn from(deg: f64) -> Self {
        Angle::from_degrees(deg)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.degrees()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}°", self.degrees())
    }
}

/// Element count and inter-element spacing (in wavelengths) of a ULA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    num_elements: usize,
    spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn new(num_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidGeometry("array needs at least one element".into()));
        }
        if !(spacing_wavelengths > 0.0 && spacing_wavelengths.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "spacing must be positive and finite, got {spacing_wavelengths}"
            )));
        }
        Ok(Self {
            num_elements,
            spacing_wavelengths,
        })
    }

    /// Half-wavelength ULA.
    pub fn half_wavelength(num_elements: usize) -> Result<Self> {
        Self::new(num_elements, 0.5)
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_wavelengths
    }
}

/// Response of `geom` to a plane wave from `angle`:
/// element `n` is `exp(-j·2π·n·(d/λ)·cos(angle))`.
pub fn steering_vector(geom: &ArrayGeometry, angle: Angle) -> CVector {
    let phase_step = -2.0 * PI * geom.spacing_wavelengths * angle.cos();
    CVector::from_iterator(
        geom.num_elements,
        (0..geom.num_elements).map(|n| Complex64::from_polar(1.0, phase_step * n as f64)),
    )
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Position2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Position2D> for [f64; 2] {
    fn from(p: Position2D) -> Self {
        [p.x, p.y]
    }
}

/// Angle between the array axis (+x) and the direction from the array to the source.
pub fn aoa_from_positions(array_pos: Position2D, source_pos: Position2D) -> Result<Angle> {
    let dx = source_pos.x - array_pos.x;
    let dy = source_pos.y - array_pos.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(Angle::from_radians(dy.atan2(dx)))
}

pub fn distance(a: Position2D, b: Position2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_cvec_eq(actual: &CVector, expected: &[Complex64]) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).norm() < 1e-12, "{a} != {e}");
        }
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let g = ArrayGeometry::new(4, 0.5).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert_cvec_eq(&steering_vector(&g, Angle::from_degrees(90.0)), &[one; 4]);
    }

    #[test]
    fn steering_endfire_alternates() {
        let g = ArrayGeometry::new(2, 0.5).unwrap();
        let v = steering_vector(&g, Angle::from_degrees(0.0));
        assert_cvec_eq(&v, &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    }

    #[test]
    fn steering_sixty_degrees() {
        let g = ArrayGeometry::new(3, 0.5).unwrap();
        let v = steering_vector(&g, Angle::from_degrees(60.0));
        assert_cvec_eq(
            &v,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
    }

    #[test]
    fn geometry_rejects_bad_inputs() {
        assert!(ArrayGeometry::new(0, 0.5).is_err());
        assert!(ArrayGeometry::new(4, 0.0).is_err());
        assert!(ArrayGeometry::new(4, f64::NAN).is_err());
    }

    #[test]
    fn aoa_examples() {
        let o = Position2D::new(0.0, 0.0);
        assert_abs_diff_eq!(aoa_from_positions(o, Position2D::new(1.0, 0.0)).unwrap().degrees(), 0.0);
        assert_abs_diff_eq!(
            aoa_from_positions(o, Position2D::new(0.0, 1.0)).unwrap().degrees(),
            90.0,
            epsilon = 1e-12
        );
        // direction (-30, 30): second quadrant diagonal
        let a = aoa_from_positions(Position2D::new(50.0, -50.0), Position2D::new(20.0, -20.0)).unwrap();
        assert_abs_diff_eq!(a.degrees(), 135.0, epsilon = 1e-12);
    }

    #[test]
    fn aoa_below_axis_folds_to_upper_half() {
        // BS at origin looking at IRS at (50,-50): -45° folds to 45°.
        let a = aoa_from_positions(Position2D::new(0.0, 0.0), Position2D::new(50.0, -50.0)).unwrap();
        assert_abs_diff_eq!(a.degrees(), 45.0, epsilon = 1e-12);
    }

    #[test]
    fn aoa_coincident_is_error() {
        let p = Position2D::new(3.0, 4.0);
        assert!(matches!(aoa_from_positions(p, p), Err(Error::DegenerateGeometry)));
    }

    #[test]
    fn distance_examples() {
        let o = Position2D::new(0.0, 0.0);
        assert_eq!(distance(o, o), 0.0);
        assert_eq!(distance(o, Position2D::new(3.0, 4.0)), 5.0);
        let d = distance(Position2D::new(50.0, -50.0), Position2D::new(20.0, -20.0));
        assert_abs_diff_eq!(d, 30.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d, 42.4264, epsilon = 1e-4);
    }

    #[test]
    fn angle_display_has_four_decimals() {
        assert_eq!(Angle::from_degrees(72.9078).to_string(), "72.9078°");
    }

    proptest! {
        #[test]
        fn angle_fold_preserves_cosine(deg in -1000.0f64..1000.0) {
            let a = Angle::from_degrees(deg);
            prop_assert!(a.degrees() >= 0.0 && a.degrees() <= 180.0);
            prop_assert!((a.cos() - deg.to_radians().cos()).abs() < 1e-12);
        }

        #[test]
        fn degree_round_trip(deg in 0.0f64..180.0) {
            prop_assert!((Angle::from_degrees(deg).degrees() - deg).abs() < 1e-12);
        }

        #[test]
        fn steering_unit_modulus_and_conjugate_symmetry(
            n in 1usize..64,
            spacing in 0.05f64..2.0,
            deg in 0.0f64..180.0,
        ) {
            let g = ArrayGeometry::new(n, spacing).unwrap();
            let v = steering_vector(&g, Angle::from_degrees(deg));
            prop_assert_eq!(v[0], Complex64::new(1.0, 0.0));
            for z in v.iter() {
                prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
            let mirrored = steering_vector(&g, Angle::from_degrees(180.0 - deg));
            for (a, b) in mirrored.iter().zip(v.iter()) {
                prop_assert!((a - b.conj()).norm() < 1e-12);
            }
        }

        #[test]
        fn aoa_is_scale_invariant(
            ax in -100.0f64..100.0, ay in -100.0f64..100.0,
            dx in -50.0f64..50.0, dy in -50.0f64..50.0,
            t in 0.01f64..100.0,
        ) {
            prop_assume!(dx.abs() + dy.abs() > 1e-3);
            let a = Position2D::new(ax, ay);
            let s = Position2D::new(ax + dx, ay + dy);
            let s2 = Position2D::new(ax + t * dx, ay + t * dy);
            let d = aoa_from_positions(a, s).unwrap().degrees() - aoa_from_positions(a, s2).unwrap().degrees();
            prop_assert!(d.abs() < 1e-9);
        }
    }
}
