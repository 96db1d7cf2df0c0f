//! Tessellation models: a generator process, optional Laguerre marks and a
//! window. The six study models are available as presets at any scale.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{
    sample_binomial, sample_force_biased, sample_radii, sample_strauss_fixed_n, volume_fraction,
    GeneratorError, PackingParams, RadiusLaw, StraussParams, MAX_VOLUME_FRACTION,
};
use crate::geometry::{build_laguerre, GeometryError, MarkedPoint, Tessellation, Window};
use crate::seeds::mix;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Generator(#[from] GeneratorError),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Binomial {
        n_points: usize,
    },
    Strauss {
        n_points: usize,
        gamma: f64,
        r0: f64,
        #[serde(default = "default_sweeps")]
        n_sweeps: usize,
    },
    /// Sphere radii are drawn from `radii`; with `volume_fraction` set they
    /// are then scaled by a common factor to hit it exactly.
    ForceBiased {
        n_spheres: usize,
        radii: RadiusLaw,
        #[serde(default)]
        volume_fraction: Option<f64>,
        #[serde(default = "default_iterations")]
        max_iterations: usize,
        #[serde(default = "default_tolerance")]
        overlap_tolerance: f64,
    },
}

fn default_sweeps() -> usize {
    500
}

fn default_iterations() -> usize {
    200_000
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TessellationKind {
    Voronoi,
    Laguerre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub window: Window,
    pub generator: GeneratorSpec,
    pub tessellation: TessellationKind,
    /// Laguerre radius law for Binomial and Strauss generators. Force-biased
    /// Laguerre models use the sphere radii instead.
    #[serde(default)]
    pub radii: Option<RadiusLaw>,
}

impl ModelSpec {
    /// Checks parameter ranges; messages name the offending field.
    pub fn validate(&self) -> Result<(), String> {
        let field = |f: &str, e: GeneratorError| format!("model `{}`: {f}: {e}", self.name);
        self.window
            .validate()
            .map_err(|e| format!("model `{}`: window: {e}", self.name))?;
        if !self.window.periodic {
            // the generators and statistics assume a torus
            return Err(format!("model `{}`: window: must be periodic", self.name));
        }
        match &self.generator {
            GeneratorSpec::Binomial { n_points } => {
                if *n_points < 5 {
                    return Err(format!(
                        "model `{}`: generator.n_points: need at least 5, got {n_points}",
                        self.name
                    ));
                }
            }
            GeneratorSpec::Strauss {
                n_points,
                gamma,
                r0,
                n_sweeps,
            } => {
                StraussParams {
                    n_points: *n_points,
                    gamma: *gamma,
                    r0: *r0,
                    n_sweeps: *n_sweeps,
                    seed: 0,
                }
                .validate(&self.window)
                .map_err(|e| field("generator", e))?;
                if *n_points < 5 {
                    return Err(format!(
                        "model `{}`: generator.n_points: need at least 5, got {n_points}",
                        self.name
                    ));
                }
            }
            GeneratorSpec::ForceBiased {
                n_spheres,
                radii,
                volume_fraction: phi,
                max_iterations,
                overlap_tolerance,
            } => {
                radii.validate().map_err(|e| field("generator.radii", e))?;
                if *n_spheres < 5 {
                    return Err(format!(
                        "model `{}`: generator.n_spheres: need at least 5, got {n_spheres}",
                        self.name
                    ));
                }
                let expected = match phi {
                    Some(p) => *p,
                    None => *n_spheres as f64 * radii.mean_volume() / self.window.volume(3),
                };
                if !(expected > 0.0 && expected <= MAX_VOLUME_FRACTION) {
                    return Err(format!(
                        "model `{}`: generator.volume_fraction: {expected} outside (0, {MAX_VOLUME_FRACTION}]",
                        self.name
                    ));
                }
                if *max_iterations == 0 || !(*overlap_tolerance > 0.0) {
                    return Err(format!(
                        "model `{}`: generator: max_iterations and overlap_tolerance must be positive",
                        self.name
                    ));
                }
            }
        }
        match (&self.generator, self.tessellation, &self.radii) {
            (GeneratorSpec::ForceBiased { .. }, _, Some(_)) => Err(format!(
                "model `{}`: radii: force-biased models take their marks from the sphere radii",
                self.name
            )),
            (GeneratorSpec::ForceBiased { .. }, _, None) => Ok(()),
            (_, TessellationKind::Laguerre, None) => Err(format!(
                "model `{}`: radii: Laguerre models need a radius law",
                self.name
            )),
            (_, TessellationKind::Voronoi, Some(_)) => Err(format!(
                "model `{}`: radii: Voronoi models take no radius law",
                self.name
            )),
            (_, _, Some(law)) => law.validate().map_err(|e| field("radii", e)),
            _ => Ok(()),
        }
    }

    /// Marked generator points of one realization.
    pub fn sample_points(&self, seed: u64) -> Result<Vec<MarkedPoint>, ModelError> {
        let point_seed = mix(seed, &[1]);
        let radius_seed = mix(seed, &[2]);
        let (locations, sphere_radii) = match &self.generator {
            GeneratorSpec::Binomial { n_points } => {
                (sample_binomial(*n_points, &self.window, point_seed), None)
            }
            GeneratorSpec::Strauss {
                n_points,
                gamma,
                r0,
                n_sweeps,
            } => {
                let params = StraussParams {
                    n_points: *n_points,
                    gamma: *gamma,
                    r0: *r0,
                    n_sweeps: *n_sweeps,
                    seed: point_seed,
                };
                (sample_strauss_fixed_n(&params, &self.window)?.points, None)
            }
            GeneratorSpec::ForceBiased {
                n_spheres,
                radii,
                volume_fraction: phi,
                max_iterations,
                overlap_tolerance,
            } => {
                let mut r = sample_radii(radii, *n_spheres, radius_seed)?;
                if let Some(target) = phi {
                    let s = (target / volume_fraction(&r, &self.window)).cbrt();
                    r.iter_mut().for_each(|x| *x *= s);
                }
                let params = PackingParams {
                    radii: r,
                    max_iterations: *max_iterations,
                    overlap_tolerance: *overlap_tolerance,
                    seed: point_seed,
                };
                let balls = sample_force_biased(&params, &self.window)?;
                let locs = balls.iter().map(|b| b.location).collect();
                (locs, Some(params.radii))
            }
        };
        let marks = match (self.tessellation, sphere_radii, &self.radii) {
            (TessellationKind::Voronoi, _, _) => vec![0.0; locations.len()],
            (TessellationKind::Laguerre, Some(r), _) => r,
            (TessellationKind::Laguerre, None, Some(law)) => {
                sample_radii(law, locations.len(), radius_seed)?
            }
            (TessellationKind::Laguerre, None, None) => {
                return Err(GeneratorError::InvalidParams(format!(
                    "model `{}` needs a radius law",
                    self.name
                ))
                .into())
            }
        };
        Ok(locations
            .into_iter()
            .zip(marks)
            .map(|(p, r)| MarkedPoint::new(p, r))
            .collect())
    }

    /// One realization of the tessellation.
    pub fn sample(&self, seed: u64) -> Result<Tessellation, ModelError> {
        let pts = self.sample_points(seed)?;
        Ok(build_laguerre(&pts, self.window)?)
    }
}

/// Names of the six study models in table order.
pub const STUDY_MODELS: [&str; 6] = ["bin-vor", "st-vor", "fb-vor", "bin-lag", "st-lag", "fb-lag"];

/// Lognormal ball-volume law of the Laguerre models (coefficient of
/// variation 0.5, mean volume 0.002).
pub const LAGUERRE_RADII: RadiusLaw = RadiusLaw::LognormalVolume {
    mu: -6.3262,
    sigma: 0.47238,
};

/// The six study models with `n_cells` target cells. The unit-density
/// parameters (Strauss range, sphere sizes) are kept and the window edge is
/// `(n_cells / 300)^(1/3)`, so `n_cells = 300` gives the unit torus. The
/// Laguerre generator counts scale the 325 and 324 of the full-size models.
pub fn study_model(name: &str, n_cells: usize) -> Option<ModelSpec> {
    let scale = n_cells as f64 / 300.0;
    let window = Window::periodic(scale.cbrt());
    let scaled = |k: usize| ((k as f64 * scale).round() as usize).max(5);
    let strauss = |n_points| GeneratorSpec::Strauss {
        n_points,
        gamma: 0.01,
        r0: 0.14,
        n_sweeps: default_sweeps(),
    };
    let packing = |radii, volume_fraction| GeneratorSpec::ForceBiased {
        n_spheres: n_cells,
        radii,
        volume_fraction,
        max_iterations: default_iterations(),
        overlap_tolerance: default_tolerance(),
    };
    let (generator, tessellation, radii) = match name {
        "bin-vor" => (
            GeneratorSpec::Binomial { n_points: n_cells },
            TessellationKind::Voronoi,
            None,
        ),
        "st-vor" => (strauss(n_cells), TessellationKind::Voronoi, None),
        "fb-vor" => (
            packing(RadiusLaw::Constant { radius: 0.07816 }, None),
            TessellationKind::Voronoi,
            None,
        ),
        "bin-lag" => (
            GeneratorSpec::Binomial {
                n_points: scaled(325),
            },
            TessellationKind::Laguerre,
            Some(LAGUERRE_RADII),
        ),
        "st-lag" => (
            strauss(scaled(324)),
            TessellationKind::Laguerre,
            Some(LAGUERRE_RADII),
        ),
        "fb-lag" => (
            packing(LAGUERRE_RADII, Some(0.6)),
            TessellationKind::Laguerre,
            None,
        ),
        _ => return None,
    };
    Some(ModelSpec {
        name: name.to_string(),
        window,
        generator,
        tessellation,
        radii,
    })
}
