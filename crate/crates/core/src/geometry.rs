//! Visual-angle geometry: the angular-expansion law, its inverse, and
//! binocular vergence/disparity.
//!
//! An object of fixed half-extent `x` seen at depth `z` subtends
//! `θ = 2·atan(x/z)`. Pulling it nearer by `Δz` while keeping `x` fixed gives
//! `θ̂ = 2·atan(x/(z − Δz))`, which in terms of the displacement ratio
//! `r = Δz/z` is
//!
//! ```text
//! θ̂ = 2·atan( tan(θ/2) / (1 − r) )
//! ```
//!
//! All angles are radians internally. Lengths are plain scalars; callers pick
//! the unit (meters everywhere except [`MoonConstants`], which uses km).

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Ratios in `[1 - POLE_GUARD, 1)` are rejected with the same error as `r >= 1`.
pub const POLE_GUARD: f64 = 1e-9;

/// Conventional adult interocular distance, meters.
pub const DEFAULT_BASELINE_M: f64 = 0.065;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("{quantity} out of domain: {value}")]
    Domain { quantity: &'static str, value: f64 },
    #[error("displacement ratio {0} is at or too close to the pole at 1")]
    Pole(f64),
    #[error("magnification {magnification} of a {theta_deg} deg angle reaches 180 deg")]
    UnreachableMagnification { theta_deg: f64, magnification: f64 },
    #[error("near distance {near} is farther than far distance {far}")]
    ArgumentOrder { near: f64, far: f64 },
    #[error("sample {index} ({value}): {reason}")]
    InvalidSample {
        index: usize,
        value: f64,
        reason: &'static str,
    },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

fn domain<S: Scalar>(quantity: &'static str, value: S) -> GeometryError {
    GeometryError::Domain {
        quantity,
        value: value.as_f64(),
    }
}

/// An angle, stored in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct AngularQuantity<S> {
    radians: S,
}

impl<S: Scalar> AngularQuantity<S> {
    pub fn from_radians(radians: S) -> Self {
        Self { radians }
    }

    pub fn from_degrees(degrees: S) -> Self {
        Self {
            radians: degrees.to_radians(),
        }
    }

    pub fn radians(self) -> S {
        self.radians
    }

    pub fn degrees(self) -> S {
        self.radians.to_degrees()
    }

    /// Whether the angle can be fed to the expansion law, i.e. lies in `(0, π)`.
    pub fn is_proper_size(self) -> bool {
        self.radians > S::zero() && self.radians < S::PI()
    }

    fn require_proper_size(self, quantity: &'static str) -> Result<Self> {
        if self.is_proper_size() {
            Ok(self)
        } else {
            Err(domain(quantity, self.radians))
        }
    }
}

impl<S: Scalar> fmt::Display for AngularQuantity<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

/// `Δz/z`, validated to `[0, 1 - POLE_GUARD)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct DisplacementRatio<S>(S);

impl<S: Scalar> DisplacementRatio<S> {
    pub fn new(value: S) -> Result<Self> {
        if value.is_nan() || value < S::zero() {
            return Err(domain("displacement ratio", value));
        }
        if value >= S::one() - S::lit(POLE_GUARD) {
            return Err(GeometryError::Pole(value.as_f64()));
        }
        Ok(Self(value))
    }

    pub fn zero() -> Self {
        Self(S::zero())
    }

    pub fn value(self) -> S {
        self.0
    }
}

/// Two-eye observer. Only the interocular baseline matters here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverGeometry<S> {
    baseline: S,
}

impl<S: Scalar> ObserverGeometry<S> {
    pub fn new(baseline_m: S) -> Result<Self> {
        if !(baseline_m > S::zero()) || !baseline_m.is_finite() {
            return Err(domain("baseline", baseline_m));
        }
        Ok(Self { baseline: baseline_m })
    }

    pub fn baseline(self) -> S {
        self.baseline
    }
}

impl<S: Scalar> Default for ObserverGeometry<S> {
    fn default() -> Self {
        Self {
            baseline: S::lit(DEFAULT_BASELINE_M),
        }
    }
}

/// Earth-moon reference values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoonConstants<S> {
    /// Mean distance, km.
    pub distance_km: S,
    pub angular_diameter: AngularQuantity<S>,
}

impl MoonConstants<f64> {
    pub const DISTANCE_KM: f64 = 384_400.0;
    pub const ANGULAR_DIAMETER_DEG: f64 = 0.5179;
    /// Mean physical diameter, km. Only used to cross-check the two constants above.
    pub const PHYSICAL_DIAMETER_KM: f64 = 3474.2;
}

impl<S: Scalar> MoonConstants<S> {
    pub fn standard() -> Self {
        Self {
            distance_km: S::lit(MoonConstants::DISTANCE_KM),
            angular_diameter: AngularQuantity::from_degrees(S::lit(MoonConstants::ANGULAR_DIAMETER_DEG)),
        }
    }
}

/// Angle subtended by an object of `diameter` at `distance` (same units).
pub fn angular_size_of<S: Scalar>(diameter: S, distance: S) -> Result<AngularQuantity<S>> {
    if !(diameter > S::zero()) || !diameter.is_finite() {
        return Err(domain("diameter", diameter));
    }
    if !(distance > S::zero()) {
        return Err(domain("distance", distance));
    }
    let two = S::lit(2.0);
    Ok(AngularQuantity::from_radians(
        two * (diameter / (two * distance)).atan(),
    ))
}

/// Expanded angular size `θ̂` of an object of true size `theta` pulled nearer
/// by the displacement ratio `ratio`.
pub fn angular_expansion<S: Scalar>(
    theta: AngularQuantity<S>,
    ratio: DisplacementRatio<S>,
) -> Result<AngularQuantity<S>> {
    theta.require_proper_size("angular size")?;
    let two = S::lit(2.0);
    let half_tan = (theta.radians() / two).tan();
    Ok(AngularQuantity::from_radians(
        two * (half_tan / (S::one() - ratio.value())).atan(),
    ))
}

/// `θ̂/θ` for the given ratio.
pub fn magnification<S: Scalar>(theta: AngularQuantity<S>, ratio: DisplacementRatio<S>) -> Result<S> {
    Ok(angular_expansion(theta, ratio)?.radians() / theta.radians())
}

/// Ratio `r` such that `angular_expansion(theta, r) = m·theta`.
pub fn displacement_for_magnification<S: Scalar>(
    theta: AngularQuantity<S>,
    magnification: S,
) -> Result<DisplacementRatio<S>> {
    theta.require_proper_size("angular size")?;
    if magnification.is_nan() || magnification < S::one() {
        return Err(domain("magnification", magnification));
    }
    let target = magnification * theta.radians();
    if !(target < S::PI()) {
        return Err(GeometryError::UnreachableMagnification {
            theta_deg: theta.degrees().as_f64(),
            magnification: magnification.as_f64(),
        });
    }
    let two = S::lit(2.0);
    let ratio = S::one() - (theta.radians() / two).tan() / (target / two).tan();
    // m = 1 can round to a hair below zero.
    DisplacementRatio::new(ratio.max(S::zero()))
}

/// Angle between the two lines of sight converging on a point at `distance`.
/// `distance` may be `+inf`.
pub fn vergence_angle<S: Scalar>(observer: ObserverGeometry<S>, distance: S) -> Result<AngularQuantity<S>> {
    if !(distance > S::zero()) {
        return Err(domain("distance", distance));
    }
    let two = S::lit(2.0);
    Ok(AngularQuantity::from_radians(
        two * (observer.baseline() / (two * distance)).atan(),
    ))
}

/// Disparity between a near and a far point: difference of their vergence angles.
pub fn relative_disparity<S: Scalar>(observer: ObserverGeometry<S>, z_near: S, z_far: S) -> Result<AngularQuantity<S>> {
    if z_near > z_far {
        return Err(GeometryError::ArgumentOrder {
            near: z_near.as_f64(),
            far: z_far.as_f64(),
        });
    }
    let near = vergence_angle(observer, z_near)?;
    let far = vergence_angle(observer, z_far)?;
    Ok(AngularQuantity::from_radians(near.radians() - far.radians()))
}

/// One sample of the expansion curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<S> {
    pub ratio: S,
    pub magnification: S,
    pub expanded: AngularQuantity<S>,
}

/// Magnification as a function of displacement ratio, sampled at `samples`
/// (strictly increasing, each in `[0, 1)`).
pub fn expansion_curve<S: Scalar>(theta: AngularQuantity<S>, samples: &[S]) -> Result<Vec<CurvePoint<S>>> {
    theta.require_proper_size("angular size")?;
    let mut out = Vec::with_capacity(samples.len());
    for (index, &value) in samples.iter().enumerate() {
        if index > 0 && !(value > samples[index - 1]) {
            return Err(GeometryError::InvalidSample {
                index,
                value: value.as_f64(),
                reason: "samples must be strictly increasing",
            });
        }
        let ratio = DisplacementRatio::new(value).map_err(|_| GeometryError::InvalidSample {
            index,
            value: value.as_f64(),
            reason: "ratio must lie in [0, 1)",
        })?;
        let expanded = angular_expansion(theta, ratio)?;
        out.push(CurvePoint {
            ratio: value,
            magnification: expanded.radians() / theta.radians(),
            expanded,
        });
    }
    Ok(out)
}

/// Write a curve as CSV with header `r,magnification,theta_hat_deg`,
/// 9 significant digits per field.
pub fn write_curve_csv<S: Scalar, W: std::io::Write>(points: &[CurvePoint<S>], mut out: W) -> std::io::Result<()> {
    use crate::numfmt::sig9;
    writeln!(out, "r,magnification,theta_hat_deg")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            sig9(p.ratio.as_f64()),
            sig9(p.magnification.as_f64()),
            sig9(p.expanded.degrees().as_f64())
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> AngularQuantity<f64> {
        AngularQuantity::from_degrees(x)
    }

    fn ratio(x: f64) -> DisplacementRatio<f64> {
        DisplacementRatio::new(x).unwrap()
    }

    fn moon() -> AngularQuantity<f64> {
        MoonConstants::<f64>::standard().angular_diameter
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    // Expected values below come from 50-digit mpmath evaluations.

    #[test]
    fn angular_size_examples() {
        let moon = angular_size_of(MoonConstants::PHYSICAL_DIAMETER_KM, MoonConstants::DISTANCE_KM).unwrap();
        close(moon.degrees(), 0.517834657132248, 1e-12);
        close(moon.degrees(), 0.5179, 1e-3);

        close(angular_size_of(7.0, 7.0).unwrap().degrees(), 53.13010235415598, 1e-10);
        close(
            angular_size_of(1.0, 1000.0).unwrap().degrees(),
            0.05729577473843474,
            1e-14,
        );
    }

    #[test]
    fn angular_size_rejects_non_positive() {
        assert!(matches!(angular_size_of(0.0, 1.0), Err(GeometryError::Domain { .. })));
        assert!(matches!(angular_size_of(1.0, -1.0), Err(GeometryError::Domain { .. })));
        assert!(angular_size_of(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn angular_size_decreases_with_distance() {
        let mut last = f64::INFINITY;
        for z in [0.5, 1.0, 2.0, 10.0, 1e3, 1e6] {
            let a = angular_size_of(1.0, z).unwrap().radians();
            assert!(a < last);
            last = a;
        }
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(
            angular_expansion(moon(), ratio(0.0)).unwrap().radians(),
            moon().radians()
        );

        let half = angular_expansion(moon(), ratio(0.5)).unwrap();
        close(half.degrees(), 1.035778843455727, 1e-12);
        close(half.radians() / moon().radians(), 2.0, 1e-3);

        let sixth = angular_expansion(moon(), ratio(1.0 / 6.0)).unwrap();
        close(sixth.degrees(), 0.6214781381656927, 1e-12);
        close(sixth.radians() / moon().radians(), 1.2, 1e-4);

        close(
            angular_expansion(deg(90.0), ratio(0.5)).unwrap().degrees(),
            126.86989764584402,
            1e-10,
        );
    }

    #[test]
    fn expansion_errors() {
        assert!(matches!(DisplacementRatio::new(1.0), Err(GeometryError::Pole(_))));
        assert!(matches!(DisplacementRatio::new(1.5), Err(GeometryError::Pole(_))));
        assert!(matches!(
            DisplacementRatio::new(1.0 - 1e-10),
            Err(GeometryError::Pole(_))
        ));
        assert!(DisplacementRatio::new(1.0 - 1e-8).is_ok());
        assert!(matches!(
            DisplacementRatio::new(-0.1),
            Err(GeometryError::Domain { .. })
        ));
        assert!(DisplacementRatio::new(f64::NAN).is_err());

        for bad in [0.0, -1.0, 180.0, 200.0] {
            assert!(matches!(
                angular_expansion(deg(bad), ratio(0.2)),
                Err(GeometryError::Domain { .. })
            ));
        }
    }

    #[test]
    fn expansion_approaches_pi_near_pole() {
        let near_pole = angular_expansion(deg(30.0), ratio(1.0 - 1e-8)).unwrap();
        assert!(near_pole.radians() < std::f64::consts::PI);
        assert!(std::f64::consts::PI - near_pole.radians() < 1e-6);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(displacement_for_magnification(moon(), 1.0).unwrap().value(), 0.0);
        close(
            displacement_for_magnification(moon(), 1.2).unwrap().value(),
            0.16666916322168658,
            1e-12,
        );
        close(
            displacement_for_magnification(moon(), 2.0).unwrap().value(),
            0.500010213215231,
            1e-12,
        );
    }

    #[test]
    fn inverse_errors() {
        assert!(matches!(
            displacement_for_magnification(deg(100.0), 2.0),
            Err(GeometryError::UnreachableMagnification { .. })
        ));
        assert!(matches!(
            displacement_for_magnification(deg(90.0), 2.0),
            Err(GeometryError::UnreachableMagnification { .. })
        ));
        assert!(matches!(
            displacement_for_magnification(moon(), 0.9),
            Err(GeometryError::Domain { .. })
        ));
    }

    #[test]
    fn vergence_examples() {
        let eyes = ObserverGeometry::default();
        assert!(vergence_angle(eyes, 1e12).unwrap().radians() < 1e-9);
        assert_eq!(vergence_angle(eyes, f64::INFINITY).unwrap().radians(), 0.0);
        close(
            vergence_angle(eyes, 10.0).unwrap().radians(),
            6.499977114728369e-3,
            1e-15,
        );
        close(
            vergence_angle(eyes, 3.844e8).unwrap().radians(),
            1.6909469302809573e-10,
            1e-20,
        );
        assert!(vergence_angle(eyes, 0.0).is_err());
        assert!(ObserverGeometry::new(0.0).is_err());
    }

    #[test]
    fn relative_disparity_examples() {
        let eyes = ObserverGeometry::default();
        assert_eq!(relative_disparity(eyes, 10.0, 10.0).unwrap().radians(), 0.0);
        assert_eq!(
            relative_disparity(eyes, 10.0, f64::INFINITY).unwrap(),
            vergence_angle(eyes, 10.0).unwrap()
        );
        close(
            relative_disparity(eyes, 100.0, 3.844e8).unwrap().radians(),
            6.499_998_080_198_918e-4,
            1e-15,
        );
        assert!(matches!(
            relative_disparity(eyes, 20.0, 10.0),
            Err(GeometryError::ArgumentOrder { .. })
        ));
    }

    #[test]
    fn curve_examples() {
        let single = expansion_curve(moon(), &[0.0]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].magnification, 1.0);

        let two = expansion_curve(moon(), &[1.0 / 6.0, 0.5]).unwrap();
        close(two[0].magnification, 1.2, 1e-3);
        close(two[1].magnification, 2.0, 1e-3);

        // Finite angular size keeps this below the small-angle 1/(1-r) = 10.
        let far = expansion_curve(moon(), &[0.9]).unwrap();
        close(far[0].magnification, 9.99326756389897, 1e-9);
    }

    #[test]
    fn curve_validation() {
        assert!(matches!(
            expansion_curve(moon(), &[0.2, 0.1]),
            Err(GeometryError::InvalidSample { index: 1, .. })
        ));
        assert!(matches!(
            expansion_curve(moon(), &[0.1, 0.1]),
            Err(GeometryError::InvalidSample { index: 1, .. })
        ));
        assert!(matches!(
            expansion_curve(moon(), &[0.5, 1.0]),
            Err(GeometryError::InvalidSample { index: 1, .. })
        ));
        assert!(expansion_curve(moon(), &[-0.1]).is_err());
        assert!(expansion_curve(moon(), &[]).unwrap().is_empty());
    }

    #[test]
    fn curve_csv_layout() {
        let points = expansion_curve(moon(), &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&points, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "r,magnification,theta_hat_deg\n0,1,0.5179\n0.5,1.99995915,1.03577884\n"
        );
    }

    #[test]
    fn degree_round_trip() {
        for x in [1e-6_f64, 0.5179, 1.0, 45.0, 90.0, 179.9, 1234.5] {
            let back = AngularQuantity::from_degrees(x).degrees();
            assert!((x - back).abs() <= 1e-12 * x, "{x} -> {back}");
        }
    }

    #[test]
    fn f32_instantiation() {
        let theta = AngularQuantity::<f32>::from_degrees(0.5179);
        let m = magnification(theta, DisplacementRatio::new(0.5f32).unwrap()).unwrap();
        assert!((m - 2.0).abs() < 1e-3);
        let r = displacement_for_magnification(theta, 1.2f32).unwrap();
        assert!((r.value() - 1.0 / 6.0).abs() < 1e-3);
    }
}
