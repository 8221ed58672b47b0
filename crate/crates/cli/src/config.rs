//! Declarative run configuration (TOML). Unknown keys are rejected.

use anyhow::{bail, Context, Result};
use mupolab_core::geometry::{HoleSpec, HoleWall, MushroomSpec, StemKind};
use mupolab_core::mupo::RhoSpec;
use mupolab_core::QuadraticSurd;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Hat radius.
    #[serde(default = "default_r")]
    pub r_hat: Option<f64>,
    /// Alias accepted for the hat radius.
    #[serde(rename = "R", default)]
    pub r_upper: Option<f64>,
    /// Stem half-width (absolute length).
    #[serde(default)]
    pub r: Option<f64>,
    /// Stem half-width over hat radius.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Exact `theta* = arccos(rho)/pi`, e.g. `"871/2500"` or
    /// `"(5+sqrt(2))/23"`. Takes precedence over `rho`.
    #[serde(default)]
    pub theta_star: Option<String>,
    /// Hat angular fraction; the collision map supports 1/2.
    #[serde(default)]
    pub alpha: Option<f64>,
    pub stem: StemConfig,
    #[serde(default)]
    pub hole: Option<HoleConfig>,
}

fn default_r() -> Option<f64> {
    None
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StemConfig {
    /// `"rectangular"` or `"triangular"`.
    pub kind: String,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    /// `"rect-stem-right-wall"` or `"triangular-stem-edge"`.
    pub wall: String,
    pub lo: f64,
    pub hi: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing config")?;
        cfg.resolved()?; // validate eagerly
        Ok(cfg)
    }

    pub fn hat_radius(&self) -> f64 {
        self.r_upper.or(self.r_hat).unwrap_or(1.0)
    }

    /// The exact or floating control parameter.
    pub fn rho_spec(&self) -> Result<RhoSpec> {
        if let Some(ts) = &self.theta_star {
            let surd = QuadraticSurd::parse(ts)
                .map_err(|e| anyhow::anyhow!("theta_star {ts:?}: {e}"))?;
            return Ok(RhoSpec::ThetaStar(surd));
        }
        let r_hat = self.hat_radius();
        match (self.rho, self.r) {
            (Some(rho), None) => Ok(RhoSpec::Plain(rho)),
            (None, Some(r)) => Ok(RhoSpec::Plain(r / r_hat)),
            (None, None) => bail!("config needs one of rho, r or theta_star"),
            (Some(_), Some(_)) => bail!("give rho or r, not both"),
        }
    }

    pub fn resolved(&self) -> Result<MushroomSpec> {
        let r_hat = self.hat_radius();
        let rho = self.rho_spec()?.rho();
        let stem = match self.stem.kind.as_str() {
            "rectangular" => StemKind::Rectangular {
                length: self.stem.length,
            },
            "triangular" => StemKind::Triangular {
                depth: self.stem.length,
            },
            other => bail!("unknown stem kind {other:?}"),
        };
        let hole = match &self.hole {
            None => None,
            Some(h) => Some(HoleSpec {
                wall: match h.wall.as_str() {
                    "rect-stem-right-wall" => HoleWall::RectStemRightWall,
                    "triangular-stem-edge" => HoleWall::TriangularStemEdge,
                    other => bail!("unknown hole wall {other:?}"),
                },
                lo: h.lo,
                hi: h.hi,
            }),
        };
        let spec = MushroomSpec {
            hat_radius: r_hat,
            stem_half_width: rho * r_hat,
            hat_fraction: self.alpha.unwrap_or(0.5),
            stem,
            hole,
        };
        spec.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::parse(
            r#"
rho = 0.5
[stem]
kind = "triangular"
L = 1.0
"#,
        )
        .unwrap();
        let spec = cfg.resolved().unwrap();
        assert_eq!(spec.stem_half_width, 0.5);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = RunConfig::parse(
            r#"
rho = 0.5
surprise = 1
[stem]
kind = "triangular"
L = 1.0
"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn exact_theta_star_roundtrip() {
        let cfg = RunConfig::parse(
            r#"
theta_star = "871/2500"
[stem]
kind = "triangular"
L = 1.0
[hole]
wall = "triangular-stem-edge"
lo = 0.5
hi = 0.548
"#,
        )
        .unwrap();
        let spec = cfg.resolved().unwrap();
        assert!((spec.rho() - (0.3484 * std::f64::consts::PI).cos()).abs() < 1e-12);
    }
}
