//! Thickenings of limit samples and points of the domain of discontinuity.
//!
//! In chart coordinates the quadric `Q_λ` of a limit point `λ = span(αe + w)`
//! meets `L^opp` in the affine null hyperplane `{v' : B'(v', w) = −α}`, since
//! `B(h(v'), αe + w) = α + B'(v', w)`. A thickening is then a finite family of
//! such hyperplanes and membership is linear arithmetic.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{chart_rep, chart_to_flag, embed_affine, Frame};
use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, IsotropicLine};
use crate::groups::{AffineIsometry, SchottkyGroup};
use crate::limitset::LimitSample;
use crate::sampling::{radical_inverse, sphere_points};

/// `Q_λ ∩ L^opp = {v' : B'(v', w) + α = 0}` with `w` future null and Euclidean unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NullHyperplane {
    pub w: DVector<f64>,
    pub alpha: f64,
    pub word_len: usize,
    /// The limit point this hyperplane encodes.
    pub line: IsotropicLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullHyperplaneSet {
    pub items: Vec<NullHyperplane>,
    /// `G' w` per item, cached for margin evaluation.
    normals: Vec<DVector<f64>>,
    pub group_id: String,
}

impl NullHyperplaneSet {
    pub fn new(frame: &Frame, items: Vec<NullHyperplane>, group_id: String) -> Self {
        let normals = items.iter().map(|it| frame.gprime() * &it.w).collect();
        Self {
            items,
            normals,
            group_id,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `|B'(v', w) + α|` for item `i`.
    pub fn residual(&self, i: usize, v: &DVector<f64>) -> f64 {
        (self.normals[i].dot(v) + self.items[i].alpha).abs()
    }

    fn closest(&self, v: &DVector<f64>) -> Option<(usize, f64)> {
        (0..self.items.len())
            .map(|i| (i, self.residual(i, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Decomposes a limit point of `Q_L − {L}` as `span(αe + w)`.
pub fn hyperplane_of(frame: &Frame, line: &IsotropicLine, word_len: usize) -> Result<NullHyperplane> {
    let space = frame.space();
    let rep = line.rep();
    let f_coeff = space.bilinear(frame.e(), rep);
    if f_coeff.abs() > space.tol().incidence {
        return Err(Error::NotInQuadric(f_coeff.abs()));
    }
    let alpha = space.bilinear(frame.f(), rep);
    let y = frame.v_to_vprime(rep);
    let s = y.norm();
    if s < 1e-8 {
        return Err(Error::PointIsL);
    }
    let mut w = y / s;
    let mut alpha = alpha / s;
    if frame.b_prime(&w, &frame.time_ref()) > 0.0 {
        w.neg_mut();
        alpha = -alpha;
    }
    Ok(NullHyperplane {
        w,
        alpha,
        word_len,
        line: line.clone(),
    })
}

/// Chart form of `Th(sample) ∩ L^opp`.
pub fn thickening_in_chart(frame: &Frame, sample: &LimitSample) -> Result<NullHyperplaneSet> {
    let items = sample
        .points
        .iter()
        .zip(&sample.word_len)
        .map(|(p, &len)| hyperplane_of(frame, p, len))
        .collect::<Result<Vec<_>>>()?;
    Ok(NullHyperplaneSet::new(frame, items, sample.group_id.clone()))
}

/// `min_i |B'(v', w_i) + α_i| / (1 + ‖v'‖)`, `+∞` for an empty set.
pub fn domain_margin(hset: &NullHyperplaneSet, v: &DVector<f64>) -> f64 {
    let raw = hset.closest(v).map_or(f64::INFINITY, |(_, r)| r);
    raw / (1.0 + v.norm())
}

/// Ratio `quadric_margin(h(v'), λ) / |B'(v',w) + α|` for one item: the
/// normalization between the chart test and the incidence test in `F₁`.
pub fn quadric_scale(frame: &Frame, item: &NullHyperplane, v: &DVector<f64>) -> f64 {
    let h = chart_rep(frame, v);
    let l = frame.e() * item.alpha + frame.vprime_to_v(&item.w);
    1.0 / (h.norm() * l.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub point: Vec<f64>,
    pub margin: f64,
    /// Direction of the search ray the point was refined from.
    pub direction: Vec<f64>,
}

impl DomainPoint {
    pub fn vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.point)
    }
}

/// Unit timelike directions (both orientations) from a Halton-type sequence.
pub fn search_directions(frame: &Frame, count: usize) -> Vec<DVector<f64>> {
    let n = frame.n();
    let lorentz = frame.lorentz_basis();
    let spatial = sphere_points(n - 1, count);
    let mut out = Vec::with_capacity(2 * count);
    for (j, x) in spatial.iter().enumerate() {
        let tilt = 0.9 * radical_inverse(j as u64 + 1, 3);
        let mut u = DVector::zeros(n);
        u.rows_mut(0, n - 1).copy_from(&(x * tilt));
        u[n - 1] = 1.0;
        let u = lorentz * u;
        let u = &u / u.norm();
        out.push(u.clone());
        out.push(-u);
    }
    out
}

const MAX_DOUBLINGS: usize = 40;

fn ray_search(hset: &NullHyperplaneSet, u: &DVector<f64>) -> (f64, DVector<f64>) {
    let mut r = 1.0;
    let mut prev = domain_margin(hset, &(u * r));
    let mut best = (prev, u * r);
    for _ in 0..MAX_DOUBLINGS {
        r *= 2.0;
        let p = u * r;
        let m = domain_margin(hset, &p);
        if m > best.0 {
            best = (m, p);
        }
        if m > 0.0 && (m - prev).abs() <= 1e-3 * m {
            break;
        }
        prev = m;
    }
    best
}

fn pattern_search(hset: &NullHyperplaneSet, start: DVector<f64>, start_margin: f64) -> (f64, DVector<f64>) {
    let n = start.len();
    let scale = 1.0 + start.norm();
    // stay local: the normalized margin creeps up along any future ray
    let trust = 0.5 * scale;
    let mut x = start.clone();
    let mut best = start_margin;
    let mut step = 0.25 * scale;
    let floor = 1e-6 * scale;
    let mut iters = 0;
    while step > floor && iters < 400 {
        iters += 1;
        let mut improved = false;
        for k in 0..n {
            for s in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += s * step;
                if (&y - &start).norm() > trust {
                    continue;
                }
                let m = domain_margin(hset, &y);
                if m > best {
                    best = m;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, x)
}

/// Searches `L^opp` for a point off every thickening hyperplane: rays along
/// `64·n` timelike directions with doubling radius, then a compass search
/// around the best ray point.
pub fn find_domain_point(frame: &Frame, hset: &NullHyperplaneSet) -> Result<DomainPoint> {
    if hset.is_empty() {
        let zero = DVector::zeros(frame.n());
        return Ok(DomainPoint {
            point: zero.iter().copied().collect(),
            margin: f64::INFINITY,
            direction: zero.iter().copied().collect(),
        });
    }
    let dirs = search_directions(frame, 64 * frame.n());
    let rays: Vec<(f64, DVector<f64>)> = dirs.par_iter().map(|u| ray_search(hset, u)).collect();
    let (best_idx, (best_margin, best_point)) = rays
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, DVector<f64>))>, |acc, (i, r)| match acc {
            Some((_, b)) if b.0 >= r.0 => acc,
            _ => Some((i, r)),
        })
        .expect("at least one direction");
    let (margin, point) = pattern_search(hset, best_point.clone(), *best_margin);
    if !(margin > 0.0) {
        let densest = hset
            .closest(&point)
            .map(|(i, _)| hset.items[i].w.iter().copied().collect())
            .unwrap_or_default();
        return Err(Error::SearchFailed {
            best_margin: margin,
            best_point: point.iter().copied().collect(),
            densest_direction: densest,
        });
    }
    Ok(DomainPoint {
        point: point.iter().copied().collect(),
        margin,
        direction: dirs[best_idx].iter().copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub depth: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Returners among words of each exact length `0..=depth`.
    pub per_length: Vec<usize>,
    /// Returners among words of length `<= d`.
    pub cumulative: Vec<usize>,
    /// No new returners at the last depth.
    pub stabilized: bool,
}

/// Spectral norm, used to bound the image of a Euclidean ball.
fn operator_norm(a: &nalgebra::DMatrix<f64>) -> f64 {
    a.singular_values().max()
}

/// Conservative test: `(A, b)` may move `B(c, r)` onto itself.
pub fn may_return(g: &AffineIsometry, center: &DVector<f64>, radius: f64) -> bool {
    let moved = g.apply(center);
    (moved - center).norm() <= radius * (1.0 + operator_norm(&g.linear))
}

/// Audits an explicit list of `(word length, element)` pairs.
pub fn audit_elements(
    elements: &[(usize, AffineIsometry)],
    center: &DVector<f64>,
    radius: f64,
    depth: usize,
) -> AuditReport {
    let hits: Vec<usize> = elements
        .par_iter()
        .filter(|(len, g)| *len <= depth && may_return(g, center, radius))
        .map(|(len, _)| *len)
        .collect();
    let mut per_length = vec![0; depth + 1];
    for len in hits {
        per_length[len] += 1;
    }
    let cumulative: Vec<usize> = per_length
        .iter()
        .scan(0, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    let stabilized = depth >= 1 && cumulative[depth] == cumulative[depth - 1];
    AuditReport {
        depth,
        center: center.iter().copied().collect(),
        radius,
        per_length,
        cumulative,
        stabilized,
    }
}

/// Counts the words `|w| <= depth` whose affine image of `B(center, radius)`
/// may meet the ball.
pub fn properness_audit(
    group: &SchottkyGroup,
    center: &DVector<f64>,
    radius: f64,
    depth: usize,
) -> Result<AuditReport> {
    if center.len() != group.n() {
        return Err(Error::DimensionMismatch {
            expected: group.n(),
            got: center.len(),
        });
    }
    let elements: Vec<(usize, AffineIsometry)> = group.elements(depth).into_iter().map(|(w, g)| (w.len(), g)).collect();
    Ok(audit_elements(&elements, center, radius, depth))
}

/// Max over `g` and `v'` of the chordal distance between `h(A v' + b)` and
/// `embed(A, b)·h(v')`.
pub fn equivariance_error(frame: &Frame, elements: &[AffineIsometry], samples: &[DVector<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in elements {
        let big = embed_affine(frame, &g.linear, &g.translation)?;
        let errs = samples
            .par_iter()
            .map(|v| -> Result<f64> {
                let lhs = chart_to_flag(frame, &g.apply(v))?;
                let rhs = big.apply(&chart_to_flag(frame, v)?);
                Ok(chordal_distance(&lhs, &rhs))
            })
            .collect::<Result<Vec<f64>>>()?;
        worst = errs.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

pub fn equivariance_audit(frame: &Frame, group: &SchottkyGroup, samples: &[DVector<f64>]) -> Result<f64> {
    equivariance_error(frame, group.generators(), samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadraticSpace;

    fn frame() -> Frame {
        Frame::standard(&QuadraticSpace::new(3).unwrap())
    }

    fn single(frame: &Frame, w: &[f64], alpha: f64) -> NullHyperplaneSet {
        let w = DVector::from_column_slice(w);
        let w = &w / w.norm();
        let rep = frame.e() * alpha + frame.vprime_to_v(&w);
        let line = IsotropicLine::new(frame.space(), rep).unwrap();
        let item = hyperplane_of(frame, &line, 1).unwrap();
        NullHyperplaneSet::new(frame, vec![item], "test".into())
    }

    #[test]
    fn synthetic_l_is_rejected() {
        let fr = frame();
        assert_eq!(hyperplane_of(&fr, &fr.l(), 0), Err(Error::PointIsL));
        assert!(matches!(
            hyperplane_of(&fr, &fr.l_hat(), 0),
            Err(Error::NotInQuadric(_))
        ));
    }

    #[test]
    fn margin_at_origin_is_offset() {
        let fr = frame();
        let h = single(&fr, &[1.0, 0.0, 1.0], 0.7);
        let item = &h.items[0];
        assert!((item.alpha - 0.7).abs() < 1e-12);
        assert!(item.w[2] > 0.0);
        assert!((domain_margin(&h, &DVector::zeros(3)) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn past_representative_is_flipped_to_future() {
        let fr = frame();
        let h = single(&fr, &[-1.0, 0.0, -1.0], 0.5);
        assert!(h.items[0].w[2] > 0.0);
        assert!((h.items[0].alpha + 0.5).abs() < 1e-12);
    }

    #[test]
    fn point_on_hyperplane_has_zero_margin() {
        let fr = frame();
        let h = single(&fr, &[0.0, 1.0, 1.0], 0.3);
        let item = &h.items[0];
        // B'(v, w) = v_y w_y − v_t w_t; pick v on the hyperplane
        let v = DVector::from_column_slice(&[5.0, -0.3 / item.w[1], 0.0]);
        assert!(domain_margin(&h, &v) < 1e-15);
    }

    #[test]
    fn empty_set_conventions() {
        let fr = frame();
        let h = NullHyperplaneSet::new(&fr, vec![], "empty".into());
        assert_eq!(domain_margin(&h, &DVector::zeros(3)), f64::INFINITY);
    }

    #[test]
    fn single_hyperplane_search_succeeds() {
        let fr = frame();
        let h = single(&fr, &[0.6, 0.8, 1.0], -2.0);
        let p = find_domain_point(&fr, &h).unwrap();
        assert!(p.margin > 0.0);
        assert!(h.residual(0, &p.vector()) > 0.0);
    }

    #[test]
    fn identity_only_audit() {
        let elems = vec![(0, AffineIsometry::identity(3))];
        let r = audit_elements(&elems, &DVector::zeros(3), 0.1, 2);
        assert_eq!(r.cumulative, vec![1, 1, 1]);
        assert!(r.stabilized);
    }

    #[test]
    fn pure_translation_equivariance() {
        let fr = frame();
        let g = AffineIsometry::new(
            nalgebra::DMatrix::identity(3, 3),
            DVector::from_column_slice(&[0.4, -1.0, 0.2]),
        )
        .unwrap();
        let samples: Vec<DVector<f64>> = (0..20)
            .map(|i| DVector::from_fn(3, |j, _| ((i * 3 + j) as f64 * 0.37).sin() * 3.0))
            .collect();
        assert!(equivariance_error(&fr, &[g], &samples).unwrap() <= 1e-10);
        assert!(equivariance_error(&fr, &[AffineIsometry::identity(3)], &samples).unwrap() <= 1e-15);
    }
}
