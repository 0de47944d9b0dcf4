//! End-to-end run: limit sample, thickening, domain point, properness audit,
//! and re-evaluation of the domain point against a deeper sample.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chart::Frame;
use crate::domain::{
    domain_margin, find_domain_point, properness_audit, thickening_in_chart, AuditReport, DomainPoint,
    NullHyperplaneSet,
};
use crate::error::Result;
use crate::groups::GeneratorSpec;
use crate::groups::SchottkyGroup;
use crate::limitset::{containment_report, limit_sample, ContainmentReport, LimitSample};
use crate::sampling::rng;

pub const DESK_RAPIDITY: f64 = 3.0;
pub const DESK_BALL_RADIUS: f64 = 0.6;

/// `k` boosts whose axes run between `±x_i`, `x_i` spread over `S^{n−2}`,
/// with zero translations. Axis `i` lies along spatial coordinate `i` for
/// `i < n−1`; further axes are rotated in the first coordinate plane.
pub fn axis_generators(n: usize, k: usize, rapidity: f64) -> Vec<GeneratorSpec> {
    (0..k)
        .map(|i| {
            let mut x = vec![0.0; n - 1];
            if i < n - 1 && k < n {
                x[i] = 1.0;
            } else {
                let th = std::f64::consts::PI * i as f64 / k as f64;
                x[0] = th.cos();
                x[1] = th.sin();
            }
            let mut attracting: Vec<f64> = x.clone();
            attracting.push(1.0);
            let mut repelling: Vec<f64> = x.iter().map(|c| -c).collect();
            repelling.push(1.0);
            GeneratorSpec {
                attracting,
                repelling,
                rapidity,
                translation: vec![0.0; n],
            }
        })
        .collect()
}

/// Fills every generator translation with uniform draws from `[−scale, scale]`.
pub fn randomize_translations(specs: &mut [GeneratorSpec], seed: u64, scale: f64) {
    let mut r = rng(seed);
    for s in specs {
        for c in s.translation.iter_mut() {
            *c = scale * r.random_range(-1.0..=1.0);
        }
    }
}

/// Two generators, rapidity 3, caps of radius 0.6, random cocycle from `seed`.
pub fn desk_group(n: usize, seed: u64) -> Result<SchottkyGroup> {
    let mut specs = axis_generators(n, 2, DESK_RAPIDITY);
    randomize_translations(&mut specs, seed, 1.0);
    let balls: Vec<_> = specs.iter().flat_map(|s| s.balls(DESK_BALL_RADIUS)).collect();
    SchottkyGroup::schottky(&specs, &balls)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub depth: usize,
    /// Depth of the larger sample the domain point is re-checked against.
    pub refine_depth: usize,
    /// Audit radius as a fraction of the domain margin.
    pub radius_fraction: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            depth: 8,
            refine_depth: 10,
            radius_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub sample: LimitSample,
    pub containment: ContainmentReport,
    pub thickening: NullHyperplaneSet,
    pub domain: DomainPoint,
    pub audit: AuditReport,
    pub refined_margin: f64,
    pub refined_points: usize,
}

impl PipelineOutcome {
    /// Relative loss of margin against the deeper sample.
    pub fn margin_degradation(&self) -> f64 {
        (self.domain.margin - self.refined_margin).max(0.0) / self.domain.margin
    }
}

/// Fails with the underlying error when the sample is empty or the domain
/// search fails; audit non-stabilization is reported in the outcome.
pub fn run(frame: &Frame, group: &SchottkyGroup, opts: &PipelineOptions) -> Result<PipelineOutcome> {
    let sample = limit_sample(frame, group, opts.depth)?;
    let containment = containment_report(frame.space(), &sample.points, &frame.l())?;
    let thickening = thickening_in_chart(frame, &sample)?;
    let domain = find_domain_point(frame, &thickening)?;
    let center = DVector::from_column_slice(&domain.point);
    let audit = properness_audit(group, &center, domain.margin * opts.radius_fraction, opts.depth)?;
    let deeper = limit_sample(frame, group, opts.refine_depth)?;
    let deeper_hset = thickening_in_chart(frame, &deeper)?;
    let refined_margin = domain_margin(&deeper_hset, &center);
    Ok(PipelineOutcome {
        sample,
        containment,
        thickening,
        domain,
        audit,
        refined_margin,
        refined_points: deeper.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_group_is_certified() {
        let g = desk_group(3, 1).unwrap();
        assert!(g.is_certified());
        assert_eq!(g.rank(), 2);
        let g4 = desk_group(4, 1).unwrap();
        assert_eq!(g4.n(), 4);
    }

    #[test]
    fn translations_depend_on_seed_only() {
        let mut a = axis_generators(3, 2, 3.0);
        let mut b = a.clone();
        randomize_translations(&mut a, 5, 1.0);
        randomize_translations(&mut b, 5, 1.0);
        assert_eq!(a, b);
        assert!(a[0].translation.iter().all(|c| c.abs() <= 1.0));
    }
}
