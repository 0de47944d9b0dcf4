//! Run configuration, read from and written to TOML.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use flagchart::geometry::{QuadraticSpace, Tolerances};
use flagchart::groups::{GeneratorSpec, SchottkyGroup};
use flagchart::pipeline::{axis_generators, randomize_translations, DESK_BALL_RADIUS, DESK_RAPIDITY};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    /// Drives every random draw: translations, lemma samples.
    pub seed: u64,
    /// Maximal word length `N`.
    pub depth: usize,
    /// Depth of the deeper sample used to re-check the domain point; `depth + 2` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_depth: Option<usize>,
    /// Cocycle scale `t`: the group actually used is `ρᵗ`.
    pub scale: f64,
    pub out: PathBuf,
    /// Audit radius as a fraction of the domain margin.
    pub radius_fraction: f64,
    pub lemma_samples: usize,
    /// Replaces the standard Gram matrix (rows); only meant for test fixtures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<f64>>>,
    pub group: GroupConfig,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroupConfig {
    /// Number of generators when `axes` is empty.
    pub generators: usize,
    pub rapidity: f64,
    pub ball_radius: f64,
    /// Missing translations are drawn uniformly from `[-translation_scale, translation_scale]`.
    pub translation_scale: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    /// Null vector of `R^{n-1,1}` (last coordinate is time).
    pub attracting: Vec<f64>,
    pub repelling: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rapidity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            seed: 42,
            depth: 8,
            refine_depth: None,
            scale: 1.0,
            out: PathBuf::from("out"),
            radius_fraction: 0.25,
            lemma_samples: 1000,
            gram: None,
            group: GroupConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl Default for GroupConfig {
    fn default() -> Self {
        Self {
            generators: 2,
            rapidity: DESK_RAPIDITY,
            ball_radius: DESK_BALL_RADIUS,
            translation_scale: 1.0,
            axes: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn refine_depth(&self) -> usize {
        self.refine_depth.unwrap_or(self.depth + 2)
    }

    /// SHA-256 of the configuration with the output directory blanked, so
    /// identical runs written to different places share a hash.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.out = PathBuf::new();
        Ok(hex::encode(Sha256::digest(c.to_toml()?.as_bytes())))
    }

    pub fn space(&self) -> Result<QuadraticSpace> {
        let space = match &self.gram {
            None => QuadraticSpace::new(self.n)?,
            Some(rows) => {
                let dim = rows.len();
                anyhow::ensure!(rows.iter().all(|r| r.len() == dim), "gram must be square");
                let g = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
                QuadraticSpace::from_gram_unchecked(self.n, g)
            }
        };
        Ok(space.with_tolerances(self.tolerances))
    }

    pub fn generator_specs(&self) -> Vec<GeneratorSpec> {
        let g = &self.group;
        let mut specs = if g.axes.is_empty() {
            axis_generators(self.n, g.generators, g.rapidity)
        } else {
            g.axes
                .iter()
                .map(|a| GeneratorSpec {
                    attracting: a.attracting.clone(),
                    repelling: a.repelling.clone(),
                    rapidity: a.rapidity.unwrap_or(g.rapidity),
                    translation: vec![0.0; self.n],
                })
                .collect()
        };
        randomize_translations(&mut specs, self.seed, g.translation_scale);
        for (spec, axis) in specs.iter_mut().zip(&g.axes) {
            if let Some(t) = &axis.translation {
                spec.translation = t.clone();
            }
        }
        specs
    }

    /// The certified group `ρᵗ` described by this configuration.
    pub fn group(&self) -> Result<SchottkyGroup> {
        let specs = self.generator_specs();
        let balls: Vec<_> = specs
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                let r = self
                    .group
                    .axes
                    .get(i)
                    .and_then(|a| a.ball_radius)
                    .unwrap_or(self.group.ball_radius);
                s.balls(r)
            })
            .collect();
        let group = SchottkyGroup::schottky(&specs, &balls)?;
        Ok(group.scale(self.scale)?)
    }
}
