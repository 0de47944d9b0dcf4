//! Schottky subgroups of `O(n−1,1)` and their affine deformations.
//!
//! Everything here lives in `V' = R^{n−1,1}` with `q' = diag(1, .., 1, −1)`.
//! The boundary sphere `S^{n−2}` is the projectivized future null cone: a unit
//! vector `x` stands for the null ray through `(x, 1)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::minkowski_gram;

/// `v ↦ A v + b` with `A ∈ O(n−1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineIsometry {
    pub linear: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl AffineIsometry {
    pub fn new(linear: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let n = linear.nrows();
        if linear.ncols() != n || translation.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: translation.len(),
            });
        }
        let g = minkowski_gram(n);
        let defect = (linear.transpose() * &g * &linear - &g).amax();
        if defect > 1e-9 * linear.amax().powi(2).max(1.0) {
            return Err(Error::NotOrthogonal(defect));
        }
        Ok(Self { linear, translation })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            linear: DMatrix::identity(n, n),
            translation: DVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.translation.len()
    }

    /// `(A₁, b₁)·(A₂, b₂) = (A₁A₂, b₁ + A₁b₂)`.
    pub fn compose(&self, other: &AffineIsometry) -> AffineIsometry {
        AffineIsometry {
            linear: &self.linear * &other.linear,
            translation: &self.translation + &self.linear * &other.translation,
        }
    }

    /// `(A⁻¹, −A⁻¹b)` with `A⁻¹ = G'Aᵀ G'`.
    pub fn inverse(&self) -> AffineIsometry {
        let g = minkowski_gram(self.n());
        let inv = &g * self.linear.transpose() * &g;
        let translation = -(&inv * &self.translation);
        AffineIsometry {
            linear: inv,
            translation,
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.linear * v + &self.translation
    }

    pub fn scaled(&self, t: f64) -> AffineIsometry {
        AffineIsometry {
            linear: self.linear.clone(),
            translation: &self.translation * t,
        }
    }
}

/// Lorentz boost along the geodesic with null endpoints `attracting`
/// (eigenvalue `e^λ`) and `repelling` (eigenvalue `e^−λ`), identity on their
/// `q'`-orthogonal complement.
pub fn boost(attracting: &DVector<f64>, repelling: &DVector<f64>, rapidity: f64) -> Result<DMatrix<f64>> {
    let n = attracting.len();
    if repelling.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: repelling.len(),
        });
    }
    let g = minkowski_gram(n);
    let bp = |x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * &g * y)[(0, 0)];
    let (u, w) = (attracting, repelling);
    let (nu, nw) = (u.norm(), w.norm());
    if nu == 0.0 || nw == 0.0 || bp(u, u).abs() > 1e-9 * nu * nu || bp(w, w).abs() > 1e-9 * nw * nw {
        return Err(Error::BadAxis);
    }
    let uw = bp(u, w);
    if uw.abs() < 1e-9 * nu * nw {
        return Err(Error::BadAxis);
    }
    // A x = x + (e^λ − 1) B(x,w)/B(u,w) u + (e^−λ − 1) B(x,u)/B(w,u) w
    let a = DMatrix::identity(n, n)
        + u * (&g * w).transpose() * ((rapidity.exp() - 1.0) / uw)
        + w * (&g * u).transpose() * (((-rapidity).exp() - 1.0) / uw);
    Ok(a)
}

/// Null vector `(x, 1)` for a boundary point `x ∈ S^{n−2}`.
pub fn boundary_to_null(x: &DVector<f64>) -> DVector<f64> {
    let m = x.len();
    let mut w = DVector::zeros(m + 1);
    w.rows_mut(0, m).copy_from(x);
    w[m] = 1.0;
    w
}

/// Boundary point of a nonzero null vector (either time orientation).
pub fn null_to_boundary(w: &DVector<f64>) -> DVector<f64> {
    let m = w.len() - 1;
    let x = w.rows(0, m) / w[m];
    let norm = x.norm();
    x / norm
}

fn angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    // atan2 form is accurate for small and near-π angles
    let cross = (b - a * a.dot(b)).norm();
    cross.atan2(a.dot(b))
}

/// A closed round cap on `S^{n−2}` in the angular metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BoundaryBall {
    pub fn new(center: &DVector<f64>, radius: f64) -> Self {
        let c = center / center.norm();
        Self {
            center: c.iter().copied().collect(),
            radius,
        }
    }

    pub fn center_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.center)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        angle(&self.center_vec(), x) <= self.radius
    }

    pub fn distance_to_center(&self, x: &DVector<f64>) -> f64 {
        angle(&self.center_vec(), x)
    }

    /// The spacelike vector `ξ = (c, cos ρ)`; the cap is `{w null future : B'(w, ξ) >= 0}`.
    fn spacelike(&self) -> DVector<f64> {
        let mut xi = boundary_to_null(&self.center_vec());
        let m = self.center.len();
        xi[m] = self.radius.cos();
        xi
    }

    fn from_spacelike(xi: &DVector<f64>) -> Self {
        let m = xi.len() - 1;
        let c = xi.rows(0, m).into_owned();
        let norm = c.norm();
        let cos_r = (xi[m] / norm).clamp(-1.0, 1.0);
        Self {
            center: (c / norm).iter().copied().collect(),
            radius: cos_r.acos(),
        }
    }

    /// The closure of the complement.
    pub fn complement(&self) -> Self {
        Self {
            center: self.center.iter().map(|c| -c).collect(),
            radius: std::f64::consts::PI - self.radius,
        }
    }

    /// Exact image of the cap under a Lorentz transformation (caps map to caps).
    pub fn image(&self, a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut xi = a * self.spacelike();
        if a[(n - 1, n - 1)] < 0.0 {
            // A reverses time orientation; projectivizing flips the half-space
            xi.neg_mut();
        }
        Self::from_spacelike(&xi)
    }

    /// `ρ_outer − (d(c_inner, c_outer) + ρ_inner)`; nonnegative iff contained.
    pub fn containment_margin(&self, outer: &BoundaryBall) -> f64 {
        outer.radius - (angle(&self.center_vec(), &outer.center_vec()) + self.radius)
    }
}

/// Evidence that the linear parts play ping-pong on disjoint caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PingPongCertificate {
    /// Attracting cap of generator `i` at `2i`, repelling cap at `2i + 1`.
    pub balls: Vec<BoundaryBall>,
    /// Per generator: min of the forward and backward containment margins.
    pub generator_margins: Vec<f64>,
    pub disjointness_margin: f64,
    pub margin: f64,
}

impl PingPongCertificate {
    /// Verifies `A_i(S − D⁻_i) ⊂ D⁺_i`, `A_i⁻¹(S − D⁺_i) ⊂ D⁻_i` and pairwise disjointness.
    pub fn verify(linear: &[DMatrix<f64>], balls: &[BoundaryBall]) -> Result<Self> {
        let k = linear.len();
        if balls.len() != 2 * k {
            return Err(Error::BallCount {
                expected: 2 * k,
                got: balls.len(),
            });
        }
        let mut disjointness_margin = f64::INFINITY;
        let mut worst_pair = (0, 0);
        for i in 0..balls.len() {
            for j in (i + 1)..balls.len() {
                let gap = balls[i].distance_to_center(&balls[j].center_vec()) - balls[i].radius - balls[j].radius;
                if gap < disjointness_margin {
                    disjointness_margin = gap;
                    worst_pair = (i, j);
                }
            }
        }
        if !(disjointness_margin > 0.0) {
            return Err(Error::PingPong {
                generator: worst_pair.0 / 2,
                detail: format!("balls {} and {} overlap", worst_pair.0, worst_pair.1),
                margin: disjointness_margin,
            });
        }
        let g = minkowski_gram(linear.first().map_or(0, |a| a.nrows()));
        let mut generator_margins = Vec::with_capacity(k);
        for (i, a) in linear.iter().enumerate() {
            let (plus, minus) = (&balls[2 * i], &balls[2 * i + 1]);
            let forward = minus.complement().image(a).containment_margin(plus);
            let inv = &g * a.transpose() * &g;
            let backward = plus.complement().image(&inv).containment_margin(minus);
            let m = forward.min(backward);
            if !(m > 0.0) {
                let detail = if forward <= backward {
                    format!("image of complement of ball {} escapes ball {}", 2 * i + 1, 2 * i)
                } else {
                    format!(
                        "inverse image of complement of ball {} escapes ball {}",
                        2 * i,
                        2 * i + 1
                    )
                };
                return Err(Error::PingPong {
                    generator: i,
                    detail,
                    margin: m,
                });
            }
            generator_margins.push(m);
        }
        let margin = generator_margins.iter().copied().fold(disjointness_margin, f64::min);
        Ok(Self {
            balls: balls.to_vec(),
            generator_margins,
            disjointness_margin,
            margin,
        })
    }
}

/// One generator: boost axis as two null vectors of `V'`, rapidity, translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub attracting: Vec<f64>,
    pub repelling: Vec<f64>,
    pub rapidity: f64,
    pub translation: Vec<f64>,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<AffineIsometry> {
        let a = boost(
            &DVector::from_column_slice(&self.attracting),
            &DVector::from_column_slice(&self.repelling),
            self.rapidity,
        )?;
        AffineIsometry::new(a, DVector::from_column_slice(&self.translation))
    }

    /// Caps of angular radius `radius` around the attracting and repelling endpoints.
    pub fn balls(&self, radius: f64) -> [BoundaryBall; 2] {
        let a = null_to_boundary(&DVector::from_column_slice(&self.attracting));
        let r = null_to_boundary(&DVector::from_column_slice(&self.repelling));
        [BoundaryBall::new(&a, radius), BoundaryBall::new(&r, radius)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchottkyGroup {
    n: usize,
    gens: Vec<AffineIsometry>,
    certificate: Option<PingPongCertificate>,
}

impl SchottkyGroup {
    /// Builds the generators and verifies the ping-pong certificate.
    pub fn schottky(specs: &[GeneratorSpec], balls: &[BoundaryBall]) -> Result<Self> {
        if specs.len() < 2 {
            return Err(Error::TooFewGenerators(specs.len()));
        }
        let gens = specs.iter().map(GeneratorSpec::build).collect::<Result<Vec<_>>>()?;
        let n = gens[0].n();
        if let Some(bad) = gens.iter().find(|g| g.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.n(),
            });
        }
        let linear: Vec<DMatrix<f64>> = gens.iter().map(|g| g.linear.clone()).collect();
        let certificate = PingPongCertificate::verify(&linear, balls)?;
        Ok(Self {
            n,
            gens,
            certificate: Some(certificate),
        })
    }

    /// Accepts arbitrary generators without certification.
    pub fn uncertified(gens: Vec<AffineIsometry>) -> Result<Self> {
        let n = gens.first().map(AffineIsometry::n).ok_or(Error::TooFewGenerators(0))?;
        Ok(Self {
            n,
            gens,
            certificate: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[AffineIsometry] {
        &self.gens
    }

    pub fn certificate(&self) -> Option<&PingPongCertificate> {
        self.certificate.as_ref()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    /// The group `ρᵗ` with cocycle `t·c`. Linear parts, hence the certificate, are unchanged.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::NonPositive(t));
        }
        Ok(Self {
            n: self.n,
            gens: self.gens.iter().map(|g| g.scaled(t)).collect(),
            certificate: self.certificate.clone(),
        })
    }

    /// Same linear parts, zero cocycle.
    pub fn linear_group(&self) -> Self {
        Self {
            n: self.n,
            gens: self.gens.iter().map(|g| g.scaled(0.0)).collect(),
            certificate: self.certificate.clone(),
        }
    }

    pub fn letter(&self, l: Letter) -> AffineIsometry {
        let g = &self.gens[l.generator];
        if l.inverse {
            g.inverse()
        } else {
            g.clone()
        }
    }

    /// Left-to-right product of the letters of `w`.
    pub fn evaluate(&self, w: &Word) -> AffineIsometry {
        w.letters()
            .iter()
            .fold(AffineIsometry::identity(self.n), |acc, &l| acc.compose(&self.letter(l)))
    }

    /// Every reduced word of length `<= depth` with its value, in [`words`] order.
    /// Each level is extended in parallel from the previous one.
    pub fn elements(&self, depth: usize) -> Vec<(Word, AffineIsometry)> {
        let letters: Vec<(Letter, AffineIsometry)> = Letter::all(self.rank())
            .into_iter()
            .map(|l| (l, self.letter(l)))
            .collect();
        let mut out = vec![(Word::identity(), AffineIsometry::identity(self.n))];
        let mut level_start = 0;
        for _ in 0..depth {
            let level = &out[level_start..];
            let next: Vec<(Word, AffineIsometry)> = level
                .par_iter()
                .flat_map_iter(|(w, g)| {
                    let last = w.letters().last().copied();
                    letters
                        .iter()
                        .filter(move |(l, _)| last.is_none_or(|p| p != l.inverse()))
                        .map(move |(l, h)| (w.pushed(*l), g.compose(h)))
                })
                .collect();
            level_start = out.len();
            out.extend(next);
        }
        out
    }

    /// Stable hex digest of the generators.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for g in &self.gens {
            for x in g.linear.iter().chain(g.translation.iter()) {
                h.update(x.to_le_bytes());
            }
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}

/// A generator or its inverse. Ordered `a < A < b < B < ..`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn gen(generator: usize) -> Self {
        Self {
            generator,
            inverse: false,
        }
    }

    pub fn inv(generator: usize) -> Self {
        Self {
            generator,
            inverse: true,
        }
    }

    pub fn inverse(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    pub fn all(rank: usize) -> Vec<Letter> {
        (0..rank).flat_map(|i| [Letter::gen(i), Letter::inv(i)]).collect()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.generator < 26 {
            (b'a' + self.generator as u8) as char
        } else {
            return write!(f, "g{}{}", self.generator, if self.inverse { "'" } else { "" });
        };
        if self.inverse {
            write!(f, "{}", base.to_ascii_uppercase())
        } else {
            write!(f, "{base}")
        }
    }
}

/// A freely reduced word in the generators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    /// Freely reduces the letters.
    pub fn reduced(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[1] != p[0].inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(a), Some(b)) if self.0.len() > 1 => *b != a.inverse(),
                _ => true,
            }
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Self::reduced(self.0.iter().chain(other.0.iter()).copied())
    }

    fn pushed(&self, l: Letter) -> Self {
        let mut v = self.0.clone();
        v.push(l);
        Self(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// All reduced words of length `<= depth` over `rank` generators, in shortlex order.
pub fn words(rank: usize, depth: usize) -> Vec<Word> {
    let letters = Letter::all(rank);
    let mut out = vec![Word::identity()];
    let mut start = 0;
    for _ in 0..depth {
        let end = out.len();
        for i in start..end {
            let last = out[i].0.last().copied();
            for &l in &letters {
                if last.is_none_or(|p| p != l.inverse()) {
                    let w = out[i].pushed(l);
                    out.push(w);
                }
            }
        }
        start = end;
    }
    out
}

/// `1 + Σ_{m=1..depth} 2k(2k−1)^{m−1}`.
pub fn word_count(rank: usize, depth: usize) -> usize {
    let mut total = 1;
    let mut level = 2 * rank;
    for _ in 0..depth {
        total += level;
        level *= 2 * rank - 1;
    }
    total
}
