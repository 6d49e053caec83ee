//! Competing predictors of perceived moon magnification.
//!
//! * [`ModelId::DisparityConflict`]: the sky's perceived distance sets a
//!   displacement ratio through a [`CueMapping`], and the angular-expansion
//!   law turns that ratio into a magnification.
//! * [`ModelId::ApparentDistance`]: a flattened elliptical sky dome plus
//!   Emmert's law; perceived size scales with perceived distance along the
//!   line of sight, relative to the zenith.
//! * [`ModelId::SizeContrast`]: perceived size scales inversely with the
//!   angular size of the surrounding referent, raised to `gamma`.
//!
//! Every predictor returns a magnification of 1 in its neutral
//! configuration (zenith, equal referents, no distance cues).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, AngularQuantity, DisplacementRatio, GeometryError, MoonConstants};
use crate::numfmt::round_sig9;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} out of domain: {value}")]
    Domain { quantity: &'static str, value: f64 },
    #[error("invalid cue mapping: {0}")]
    Configuration(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

fn domain<S: Scalar>(quantity: &'static str, value: S) -> ModelError {
    ModelError::Domain {
        quantity,
        value: value.as_f64(),
    }
}

/// Checks `elevation ∈ [0, π/2]`, snapping rounding overshoot at 90°.
fn checked_elevation<S: Scalar>(elevation: AngularQuantity<S>) -> Result<S> {
    let e = elevation.radians();
    let top = S::FRAC_PI_2();
    if e.is_nan() || e < S::zero() || e > top + S::lit(1e-12) {
        return Err(domain("elevation", e));
    }
    Ok(e.min(top))
}

/// Perceived sky as a half-ellipse: `horizon` is the horizontal semi-axis,
/// `zenith` the vertical one. Flattened means `horizon >= zenith`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkyDome<S> {
    horizon: S,
    zenith: S,
}

impl<S: Scalar> SkyDome<S> {
    pub fn new(horizon_distance: S, zenith_distance: S) -> Result<Self> {
        if !(horizon_distance > S::zero()) || !horizon_distance.is_finite() {
            return Err(domain("horizon distance", horizon_distance));
        }
        if !(zenith_distance > S::zero()) || !zenith_distance.is_finite() {
            return Err(domain("zenith distance", zenith_distance));
        }
        if horizon_distance < zenith_distance {
            return Err(domain("horizon distance below zenith distance", horizon_distance));
        }
        Ok(Self {
            horizon: horizon_distance,
            zenith: zenith_distance,
        })
    }

    pub fn hemisphere(radius: S) -> Result<Self> {
        Self::new(radius, radius)
    }

    pub fn horizon_distance(&self) -> S {
        self.horizon
    }

    pub fn zenith_distance(&self) -> S {
        self.zenith
    }
}

/// Viewing situation for one moon position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneContext<S> {
    pub elevation: AngularQuantity<S>,
    /// Dominant comparison object around the moon at this elevation.
    pub referent_angular_size: AngularQuantity<S>,
    /// Referent the size-contrast prediction is normalized against (the
    /// zenith surround).
    pub reference_referent_size: AngularQuantity<S>,
    /// Perceived distance to the sky from available cues; `None` when no
    /// cues are present.
    pub perceived_sky_distance: Option<S>,
    pub moon_angular_size: AngularQuantity<S>,
}

impl<S: Scalar> SceneContext<S> {
    /// Zenith, equal referents, no distance cues.
    pub fn neutral(referent: AngularQuantity<S>) -> Self {
        Self {
            elevation: AngularQuantity::from_radians(S::FRAC_PI_2()),
            referent_angular_size: referent,
            reference_referent_size: referent,
            perceived_sky_distance: None,
            moon_angular_size: MoonConstants::standard().angular_diameter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        checked_elevation(self.elevation)?;
        for (name, a) in [
            ("referent angular size", self.referent_angular_size),
            ("reference referent angular size", self.reference_referent_size),
        ] {
            if !(a.radians() > S::zero()) {
                return Err(domain(name, a.radians()));
            }
        }
        if !self.moon_angular_size.is_proper_size() {
            return Err(domain("moon angular size", self.moon_angular_size.radians()));
        }
        if let Some(d) = self.perceived_sky_distance {
            if !(d > S::zero()) {
                return Err(domain("perceived sky distance", d));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    DisparityConflict,
    ApparentDistance,
    SizeContrast,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPrediction<S> {
    pub model: ModelId,
    /// Perceived over true angular size.
    pub magnification: S,
}

/// Maps perceived sky distance to a displacement ratio. Implementations must
/// be nonincreasing in distance: the nearer the sky looks, the larger the ratio.
pub trait CueMapping<S: Scalar> {
    fn displacement(&self, perceived_sky_distance: Option<S>) -> Result<DisplacementRatio<S>>;
}

/// `r(d) = r_max / (1 + d/d0)`, with `r_floor` when no cues are present.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicCueMapping<S> {
    r_max: S,
    scale: S,
    r_floor: S,
}

impl<S: Scalar> HyperbolicCueMapping<S> {
    pub fn new(r_max: S, scale: S, r_floor: S) -> Result<Self> {
        if DisplacementRatio::new(r_max).is_err() {
            return Err(ModelError::Configuration(format!(
                "r_max must lie in [0, 1), got {r_max}"
            )));
        }
        if DisplacementRatio::new(r_floor).is_err() {
            return Err(ModelError::Configuration(format!(
                "r_floor must lie in [0, 1), got {r_floor}"
            )));
        }
        if !(scale > S::zero()) || !scale.is_finite() {
            return Err(ModelError::Configuration(format!(
                "distance scale must be positive, got {scale}"
            )));
        }
        Ok(Self { r_max, scale, r_floor })
    }

    /// Mapping with scale `scale` that produces `target_magnification` of a
    /// `theta`-sized object when the sky appears at `reference_distance`.
    pub fn calibrated(
        theta: AngularQuantity<S>,
        target_magnification: S,
        reference_distance: S,
        scale: S,
    ) -> Result<Self> {
        if !(reference_distance > S::zero()) {
            return Err(domain("reference distance", reference_distance));
        }
        let ratio = geometry::displacement_for_magnification(theta, target_magnification)?;
        let r_max = ratio.value() * (S::one() + reference_distance / scale);
        Self::new(r_max, scale, S::zero())
    }

    pub fn r_max(&self) -> S {
        self.r_max
    }

    pub fn scale(&self) -> S {
        self.scale
    }

    pub fn r_floor(&self) -> S {
        self.r_floor
    }
}

impl<S: Scalar> CueMapping<S> for HyperbolicCueMapping<S> {
    fn displacement(&self, perceived_sky_distance: Option<S>) -> Result<DisplacementRatio<S>> {
        let r = match perceived_sky_distance {
            None => self.r_floor,
            Some(d) if d > S::zero() => self.r_max / (S::one() + d / self.scale),
            Some(d) => return Err(domain("perceived sky distance", d)),
        };
        Ok(DisplacementRatio::new(r)?)
    }
}

/// Distance from the dome's center to its surface along a ray at `elevation`.
pub fn dome_distance<S: Scalar>(dome: &SkyDome<S>, elevation: AngularQuantity<S>) -> Result<S> {
    let e = checked_elevation(elevation)?;
    let (sin, cos) = e.sin_cos();
    let h = dome.horizon;
    let z = dome.zenith;
    Ok(S::one() / (cos * cos / (h * h) + sin * sin / (z * z)).sqrt())
}

/// Emmert's-law magnification relative to the zenith moon.
pub fn apparent_distance_prediction<S: Scalar>(
    dome: &SkyDome<S>,
    elevation: AngularQuantity<S>,
) -> Result<ModelPrediction<S>> {
    let here = dome_distance(dome, elevation)?;
    let zenith = dome_distance(dome, AngularQuantity::from_radians(S::FRAC_PI_2()))?;
    Ok(ModelPrediction {
        model: ModelId::ApparentDistance,
        magnification: here / zenith,
    })
}

/// `(referent_reference / referent_here)^gamma`: a smaller surround makes the
/// moon look larger.
pub fn size_contrast_prediction<S: Scalar>(
    referent_here: AngularQuantity<S>,
    referent_reference: AngularQuantity<S>,
    gamma: S,
) -> Result<ModelPrediction<S>> {
    if !(referent_here.radians() > S::zero()) {
        return Err(domain("referent angular size", referent_here.radians()));
    }
    if !(referent_reference.radians() > S::zero()) {
        return Err(domain("reference referent angular size", referent_reference.radians()));
    }
    if !(gamma > S::zero()) || !gamma.is_finite() {
        return Err(domain("gamma", gamma));
    }
    Ok(ModelPrediction {
        model: ModelId::SizeContrast,
        magnification: (referent_reference.radians() / referent_here.radians()).powf(gamma),
    })
}

/// Magnification from pulling the moon nearer by the ratio the cue mapping
/// assigns to the perceived sky distance.
pub fn disparity_conflict_prediction<S: Scalar, M: CueMapping<S> + ?Sized>(
    ctx: &SceneContext<S>,
    mapping: &M,
) -> Result<ModelPrediction<S>> {
    ctx.validate()?;
    let ratio = mapping.displacement(ctx.perceived_sky_distance)?;
    Ok(ModelPrediction {
        model: ModelId::DisparityConflict,
        magnification: geometry::magnification(ctx.moon_angular_size, ratio)?,
    })
}

/// All three predictions for one context, in `ModelId` declaration order.
pub fn compare_models<S: Scalar, M: CueMapping<S> + ?Sized>(
    ctx: &SceneContext<S>,
    dome: &SkyDome<S>,
    gamma: S,
    mapping: &M,
) -> Result<Vec<ModelPrediction<S>>> {
    Ok(vec![
        disparity_conflict_prediction(ctx, mapping)?,
        apparent_distance_prediction(dome, ctx.elevation)?,
        size_contrast_prediction(ctx.referent_angular_size, ctx.reference_referent_size, gamma)?,
    ])
}

/// JSON input for a model comparison. Angles in degrees, lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonInput {
    pub elevation_deg: f64,
    pub referent_deg: f64,
    #[serde(default)]
    pub reference_referent_deg: Option<f64>,
    #[serde(default)]
    pub sky_distance_m: Option<f64>,
    #[serde(default = "default_moon_deg")]
    pub moon_deg: f64,
    pub dome: DomeInput,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub mapping: MappingInput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomeInput {
    pub horizon_m: f64,
    pub zenith_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingInput {
    pub r_max: f64,
    pub scale_m: f64,
    #[serde(default)]
    pub r_floor: f64,
}

fn default_moon_deg() -> f64 {
    MoonConstants::ANGULAR_DIAMETER_DEG
}

fn default_gamma() -> f64 {
    1.0
}

/// Serialized comparison: `{elevation_deg, predictions: [{model, magnification}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub elevation_deg: f64,
    pub predictions: Vec<PredictionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub model: ModelId,
    pub magnification: f64,
}

impl ComparisonInput {
    pub fn context(&self) -> SceneContext<f64> {
        let referent = AngularQuantity::from_degrees(self.referent_deg);
        SceneContext {
            elevation: AngularQuantity::from_degrees(self.elevation_deg),
            referent_angular_size: referent,
            reference_referent_size: self
                .reference_referent_deg
                .map(AngularQuantity::from_degrees)
                .unwrap_or(referent),
            perceived_sky_distance: self.sky_distance_m,
            moon_angular_size: AngularQuantity::from_degrees(self.moon_deg),
        }
    }

    pub fn evaluate(&self) -> Result<ComparisonReport> {
        let ctx = self.context();
        let dome = SkyDome::new(self.dome.horizon_m, self.dome.zenith_m)?;
        let mapping = HyperbolicCueMapping::new(self.mapping.r_max, self.mapping.scale_m, self.mapping.r_floor)?;
        let predictions = compare_models(&ctx, &dome, self.gamma, &mapping)?;
        Ok(ComparisonReport {
            elevation_deg: round_sig9(self.elevation_deg),
            predictions: predictions
                .into_iter()
                .map(|p| PredictionRecord {
                    model: p.model,
                    magnification: round_sig9(p.magnification),
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> AngularQuantity<f64> {
        AngularQuantity::from_degrees(x)
    }

    fn dome(h: f64, z: f64) -> SkyDome<f64> {
        SkyDome::new(h, z).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn dome_examples() {
        close(dome_distance(&dome(4.0, 1.0), deg(0.0)).unwrap(), 4.0, 1e-12);
        close(dome_distance(&dome(4.0, 1.0), deg(90.0)).unwrap(), 1.0, 1e-12);
        // 1/sqrt(0.5/16 + 0.5), mpmath
        close(
            dome_distance(&dome(4.0, 1.0), deg(45.0)).unwrap(),
            1.3719886811400707,
            1e-12,
        );
    }

    #[test]
    fn dome_rejects_bad_input() {
        assert!(SkyDome::new(1.0, 2.0).is_err());
        assert!(SkyDome::new(0.0, 0.0).is_err());
        assert!(SkyDome::new(1.0, -1.0).is_err());
        assert!(dome_distance(&dome(4.0, 1.0), deg(-1.0)).is_err());
        assert!(dome_distance(&dome(4.0, 1.0), deg(91.0)).is_err());
    }

    #[test]
    fn dome_is_monotone_per_degree() {
        let d = dome(3.0, 1.2);
        let mut last = f64::INFINITY;
        for e in 0..=90 {
            let t = dome_distance(&d, deg(e as f64)).unwrap();
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn apparent_distance_examples() {
        assert_eq!(
            apparent_distance_prediction(&dome(4.0, 1.0), deg(90.0))
                .unwrap()
                .magnification,
            1.0
        );
        close(
            apparent_distance_prediction(&dome(4.0, 1.0), deg(0.0))
                .unwrap()
                .magnification,
            4.0,
            1e-12,
        );
        close(
            apparent_distance_prediction(&dome(1.2, 1.0), deg(0.0))
                .unwrap()
                .magnification,
            1.2,
            1e-12,
        );
        let sphere = SkyDome::hemisphere(2.0).unwrap();
        for e in [0.0, 10.0, 45.0, 89.0, 90.0] {
            close(
                apparent_distance_prediction(&sphere, deg(e)).unwrap().magnification,
                1.0,
                1e-12,
            );
        }
    }

    #[test]
    fn size_contrast_examples() {
        assert_eq!(
            size_contrast_prediction(deg(0.7), deg(0.7), 1.0).unwrap().magnification,
            1.0
        );
        close(
            size_contrast_prediction(deg(0.5), deg(0.55), 1.0)
                .unwrap()
                .magnification,
            1.1,
            1e-12,
        );
        close(
            size_contrast_prediction(deg(0.5), deg(0.55), 2.0)
                .unwrap()
                .magnification,
            1.21,
            1e-12,
        );
        assert!(size_contrast_prediction(deg(0.0), deg(0.5), 1.0).is_err());
        assert!(size_contrast_prediction(deg(0.5), deg(0.5), 0.0).is_err());
    }

    #[test]
    fn disparity_conflict_examples() {
        let moon = MoonConstants::<f64>::standard().angular_diameter;
        let mut ctx = SceneContext::neutral(deg(0.5));
        let mapping = HyperbolicCueMapping::new(0.4, 1000.0, 0.0).unwrap();
        assert_eq!(
            disparity_conflict_prediction(&ctx, &mapping).unwrap().magnification,
            1.0
        );

        // r = r_max/2 at d = d0; r_max = 1/3 gives r = 1/6.
        let sixth = HyperbolicCueMapping::new(1.0 / 3.0, 500.0, 0.0).unwrap();
        ctx.perceived_sky_distance = Some(500.0);
        close(
            disparity_conflict_prediction(&ctx, &sixth).unwrap().magnification,
            1.2,
            1e-3,
        );

        let horizon = HyperbolicCueMapping::calibrated(moon, 1.2, 500.0, 500.0).unwrap();
        close(
            disparity_conflict_prediction(&ctx, &horizon).unwrap().magnification,
            1.2,
            1e-12,
        );

        let city = HyperbolicCueMapping::new(0.9, 100.0, 0.0).unwrap();
        ctx.perceived_sky_distance = Some(80.0);
        close(
            disparity_conflict_prediction(&ctx, &city).unwrap().magnification,
            2.0,
            1e-3,
        );
    }

    #[test]
    fn mapping_validation() {
        assert!(matches!(
            HyperbolicCueMapping::new(1.0, 1.0, 0.0),
            Err(ModelError::Configuration(_))
        ));
        assert!(HyperbolicCueMapping::new(0.5, 0.0, 0.0).is_err());
        assert!(HyperbolicCueMapping::new(0.5, 1.0, -0.1).is_err());
        let moon = MoonConstants::<f64>::standard().angular_diameter;
        // r = 0.5 at d = d0 would need r_max = 1.
        assert!(HyperbolicCueMapping::calibrated(moon, 2.0, 1.0, 1.0).is_err());
        let m = HyperbolicCueMapping::new(0.5, 1.0, 0.0).unwrap();
        assert!(m.displacement(Some(0.0)).is_err());
    }

    #[test]
    fn compare_models_neutral_and_horizon() {
        let mapping = HyperbolicCueMapping::new(0.4, 1000.0, 0.0).unwrap();
        let all = compare_models(&SceneContext::neutral(deg(0.5)), &dome(3.0, 1.0), 1.0, &mapping).unwrap();
        assert_eq!(all.len(), 3);
        assert_eq!(
            all.iter().map(|p| p.model).collect::<Vec<_>>(),
            [
                ModelId::DisparityConflict,
                ModelId::ApparentDistance,
                ModelId::SizeContrast
            ]
        );
        for p in &all {
            close(p.magnification, 1.0, 1e-12);
        }

        let horizon = SceneContext {
            elevation: deg(0.0),
            referent_angular_size: deg(0.5),
            reference_referent_size: deg(0.55),
            perceived_sky_distance: Some(500.0),
            moon_angular_size: MoonConstants::standard().angular_diameter,
        };
        let d = dome(1.2, 1.0);
        let all = compare_models(&horizon, &d, 1.0, &mapping).unwrap();
        assert!(all.iter().all(|p| p.magnification.is_finite() && p.magnification > 0.0));
        assert!(all[0].magnification > 1.0);
        assert_eq!(all[0], disparity_conflict_prediction(&horizon, &mapping).unwrap());
        assert_eq!(all[1], apparent_distance_prediction(&d, horizon.elevation).unwrap());
        assert_eq!(all[2], size_contrast_prediction(deg(0.5), deg(0.55), 1.0).unwrap());
    }

    #[test]
    fn comparison_json_shape() {
        let input: ComparisonInput = serde_json::from_str(
            r#"{"elevation_deg": 90, "referent_deg": 0.5, "dome": {"horizon_m": 3, "zenith_m": 1},
                "mapping": {"r_max": 0.4, "scale_m": 1000}}"#,
        )
        .unwrap();
        let report = input.evaluate().unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["elevation_deg"], 90.0);
        assert_eq!(json["predictions"][0]["model"], "DisparityConflict");
        assert_eq!(json["predictions"].as_array().unwrap().len(), 3);
        assert!(serde_json::from_str::<ComparisonInput>(r#"{"elevation_deg": 1}"#).is_err());
    }
}
