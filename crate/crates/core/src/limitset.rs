//! Finite approximations of the limit set in `F₁`.
//!
//! The attracting line of a regular element is its dominant eigenline. A
//! sample `Λ_N` collects the attracting lines of all cyclically reduced words
//! of length at most `N`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{embed_affine, transvection, Frame, GroupElement};
use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, quadric_margin, IsotropicLine, QuadraticSpace};
use crate::groups::{Letter, SchottkyGroup, Word};

/// Dominant eigenline of `g`.
///
/// Eigenvalues come from the real Schur form. The eigenvector is the
/// smallest right singular vector of `g − λ₁ I`, polished by a few
/// multiplications by `g`.
pub fn attracting_line(space: &QuadraticSpace, g: &GroupElement) -> Result<IsotropicLine> {
    let scale = g.mat().amax();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NotRegular(f64::NAN));
    }
    let m = g.mat() / scale;
    let dim = m.nrows();
    let eig = m.clone().schur().complex_eigenvalues();
    let mut moduli: Vec<(f64, usize)> = eig.iter().enumerate().map(|(i, z)| (z.norm(), i)).collect();
    moduli.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (top, top_idx) = moduli[0];
    let second = moduli[1].0;
    let ratio = if second > 0.0 { top / second } else { f64::INFINITY };
    if !(ratio > 1.0 + space.tol().gap_min) {
        return Err(Error::NotRegular(ratio));
    }
    let lambda = eig[top_idx];
    if lambda.im.abs() > 1e-9 * top {
        return Err(Error::NotRegular(ratio));
    }
    let shifted = &m - DMatrix::identity(dim, dim) * lambda.re;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (min_idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let mut v: DVector<f64> = v_t.row(min_idx).transpose();
    for _ in 0..3 {
        let next = &m * &v;
        let norm = next.norm();
        if !(norm > 0.0) {
            break;
        }
        v = next / norm;
    }
    let qv = space.q(&v).abs();
    if qv > space.tol().null {
        return Err(Error::NotIsotropic(qv));
    }
    IsotropicLine::from_rep_unchecked(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSample {
    pub points: Vec<IsotropicLine>,
    /// Length of the word each point came from.
    pub word_len: Vec<usize>,
    pub words: Vec<String>,
    pub group_id: String,
    /// Cyclically reduced words skipped for lack of a spectral gap.
    pub irregular: usize,
}

impl LimitSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Indices to keep so that no two kept lines are closer than `radius`.
/// Earlier indices win.
pub fn dedup_indices(points: &[IsotropicLine], radius: f64) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    // |⟨u, r⟩| moves by at most min(‖u−v‖, ‖u+v‖) ≈ chordal distance
    let dim = points[0].dim();
    let probe = DVector::from_fn(dim, |i, _| 1.0 + 0.6180339887 * i as f64);
    let probe = &probe / probe.norm();
    let keys: Vec<f64> = points.iter().map(|p| p.rep().dot(&probe).abs()).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let sorted_keys: Vec<f64> = order.iter().map(|&i| keys[i]).collect();
    let window = 2.0 * radius + 1e-15;
    let mut kept = vec![false; points.len()];
    for i in 0..points.len() {
        let lo = sorted_keys.partition_point(|&k| k < keys[i] - window);
        let hi = sorted_keys.partition_point(|&k| k <= keys[i] + window);
        let dup = order[lo..hi]
            .iter()
            .any(|&j| j < i && kept[j] && chordal_distance(&points[i], &points[j]) < radius);
        kept[i] = !dup;
    }
    (0..points.len()).filter(|&i| kept[i]).collect()
}

/// Power passes that apply the letters of `word` one at a time, right to
/// left. Forming the full product loses the affine part of the fixed point
/// to cancellation for long words; the letters themselves are well
/// conditioned.
fn polish_along_word(letters: &[(Letter, DMatrix<f64>)], word: &Word, mut v: DVector<f64>) -> DVector<f64> {
    for _ in 0..16 {
        let prev = v.clone();
        for l in word.letters().iter().rev() {
            let m = &letters.iter().find(|(k, _)| k == l).expect("letter of the group").1;
            v = m * &v;
            v /= v.norm();
        }
        if v.dot(&prev) < 0.0 {
            v = -v;
        }
        if (&v - &prev).amax() <= 4.0 * f64::EPSILON {
            break;
        }
    }
    v
}

fn embedded_letters(frame: &Frame, group: &SchottkyGroup) -> Result<Vec<(Letter, DMatrix<f64>)>> {
    Letter::all(group.rank())
        .into_iter()
        .map(|l| {
            let g = group.letter(l);
            embed_affine(frame, &g.linear, &g.translation).map(|m| (l, m.mat().clone()))
        })
        .collect()
}

/// Attracting line of the embedded word `w`, refined letter by letter.
pub fn word_attracting_line(frame: &Frame, group: &SchottkyGroup, w: &Word) -> Result<IsotropicLine> {
    let letters = embedded_letters(frame, group)?;
    let g = group.evaluate(w);
    let line = attracting_line(frame.space(), &embed_affine(frame, &g.linear, &g.translation)?)?;
    IsotropicLine::from_rep_unchecked(polish_along_word(&letters, w, line.rep().clone()))
}

/// `Λ_N`: attracting lines of the embedded cyclically reduced words with
/// `1 <= |w| <= depth`.
pub fn limit_sample(frame: &Frame, group: &SchottkyGroup, depth: usize) -> Result<LimitSample> {
    if !group.is_certified() {
        return Err(Error::Uncertified);
    }
    if group.n() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            got: group.n(),
        });
    }
    let elements = group.elements(depth);
    let space = frame.space();
    let letters = embedded_letters(frame, group)?;
    let results: Vec<Option<Result<(IsotropicLine, usize, String)>>> = elements
        .par_iter()
        .filter(|(w, _)| !w.is_empty() && w.is_cyclically_reduced())
        .map(|(w, g)| {
            let embedded = match embed_affine(frame, &g.linear, &g.translation) {
                Ok(e) => e,
                Err(err) => return Some(Err(err)),
            };
            match attracting_line(space, &embedded) {
                Ok(line) => {
                    let v = polish_along_word(&letters, w, line.rep().clone());
                    Some(IsotropicLine::from_rep_unchecked(v).map(|line| (line, w.len(), w.to_string())))
                }
                Err(Error::NotRegular(_)) => None,
                Err(err) => Some(Err(err)),
            }
        })
        .collect();
    let mut irregular = 0;
    let mut raw = Vec::with_capacity(results.len());
    for r in results {
        match r {
            None => irregular += 1,
            Some(r) => raw.push(r?),
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptySample);
    }
    let lines: Vec<IsotropicLine> = raw.iter().map(|r| r.0.clone()).collect();
    let keep = dedup_indices(&lines, space.tol().dedup);
    let mut sample = LimitSample {
        points: Vec::with_capacity(keep.len()),
        word_len: Vec::with_capacity(keep.len()),
        words: Vec::with_capacity(keep.len()),
        group_id: group.fingerprint(),
        irregular,
    };
    for i in keep {
        let (line, len, word) = raw[i].clone();
        sample.points.push(line);
        sample.word_len.push(len);
        sample.words.push(word);
    }
    Ok(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// Largest `quadric_margin(p, L)`; the sample lies in `Q_L` when this is small.
    pub max_margin: f64,
    /// Smallest chordal distance from a sample point to `L`.
    pub min_dist_to_l: f64,
    pub points: usize,
}

pub fn containment_report(
    space: &QuadraticSpace,
    sample: &[IsotropicLine],
    l: &IsotropicLine,
) -> Result<ContainmentReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let max_margin = sample.iter().map(|p| quadric_margin(space, p, l)).fold(0.0, f64::max);
    let min_dist_to_l = sample
        .iter()
        .map(|p| chordal_distance(p, l))
        .fold(f64::INFINITY, f64::min);
    Ok(ContainmentReport {
        max_margin,
        min_dist_to_l,
        points: sample.len(),
    })
}

/// Hausdorff distance in the chordal metric.
pub fn hausdorff(a: &[IsotropicLine], b: &[IsotropicLine]) -> f64 {
    fn directed(from: &[IsotropicLine], to: &[IsotropicLine]) -> f64 {
        from.par_iter()
            .map(|p| to.iter().map(|q| chordal_distance(p, q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    }
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed(a, b).max(directed(b, a))
}

/// Hausdorff distance between `a_t·Λ_N(ρ)` and `Λ_N(ρᵗ)`.
pub fn scaling_check(frame: &Frame, group: &SchottkyGroup, t: f64, depth: usize) -> Result<f64> {
    let a_t = transvection(frame, t)?;
    let base = limit_sample(frame, group, depth)?;
    let moved: Vec<IsotropicLine> = base.points.iter().map(|p| a_t.apply(p)).collect();
    let scaled = limit_sample(frame, &group.scale(t)?, depth)?;
    Ok(hausdorff(&moved, &scaled.points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::shear;
    use crate::geometry::QuadraticSpace;
    use crate::groups::boost;

    #[test]
    fn identity_is_not_regular() {
        let space = QuadraticSpace::new(3).unwrap();
        let id = GroupElement::identity(&space);
        assert!(matches!(attracting_line(&space, &id), Err(Error::NotRegular(_))));
        let fr = Frame::standard(&space);
        let s = shear(&fr, &DVector::from_column_slice(&[1.0, 2.0, 0.5])).unwrap();
        assert!(matches!(attracting_line(&space, &s), Err(Error::NotRegular(_))));
    }

    #[test]
    fn transvection_attracts_to_l() {
        let space = QuadraticSpace::new(3).unwrap();
        let fr = Frame::standard(&space);
        let a = transvection(&fr, 2.0).unwrap();
        let line = attracting_line(&space, &a).unwrap();
        assert!(chordal_distance(&line, &fr.l()) < 1e-14);
    }

    #[test]
    fn boost_attracts_to_its_endpoint() {
        let space = QuadraticSpace::new(3).unwrap();
        let fr = Frame::standard(&space);
        let u = DVector::from_column_slice(&[1.0, 0.0, 1.0]);
        let w = DVector::from_column_slice(&[-1.0, 0.0, 1.0]);
        let a = boost(&u, &w, 3.0).unwrap();
        let g = embed_affine(&fr, &a, &DVector::zeros(3)).unwrap();
        let line = attracting_line(&space, &g).unwrap();
        let expect = IsotropicLine::new(&space, fr.vprime_to_v(&u)).unwrap();
        assert!(chordal_distance(&line, &expect) < 1e-12);
    }

    #[test]
    fn dedup_keeps_first_and_handles_sign() {
        let space = QuadraticSpace::new(3).unwrap();
        let base = DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.0, 1.0]);
        let near = DVector::from_column_slice(&[1e-10, 0.0, 1.0, 0.0, 1.0]);
        let far = DVector::from_column_slice(&[0.0, 0.0, 0.0, 1.0, 1.0]);
        let pts = vec![
            IsotropicLine::new(&space, base.clone()).unwrap(),
            IsotropicLine::from_rep_unchecked(-near).unwrap(),
            IsotropicLine::new(&space, far).unwrap(),
            IsotropicLine::new(&space, base).unwrap(),
        ];
        assert_eq!(dedup_indices(&pts, 1e-8), vec![0, 2]);
    }

    #[test]
    fn containment_of_l_itself() {
        let space = QuadraticSpace::new(3).unwrap();
        let fr = Frame::standard(&space);
        let r = containment_report(&space, &[fr.l()], &fr.l()).unwrap();
        assert_eq!(r.min_dist_to_l, 0.0);
        assert_eq!(r.max_margin, 0.0);
        assert_eq!(containment_report(&space, &[], &fr.l()), Err(Error::EmptySample));
    }

    #[test]
    fn hausdorff_basics() {
        let space = QuadraticSpace::new(3).unwrap();
        let fr = Frame::standard(&space);
        assert_eq!(hausdorff(&[fr.l()], &[fr.l()]), 0.0);
        assert_eq!(hausdorff(&[fr.l()], &[fr.l(), fr.l_hat()]), 1.0);
    }
}
