//! The quadratic space `V = R^{n,2}`, isotropic lines and their incidence.
//!
//! Coordinates are always taken in the block basis `(e, f, b_1, .., b_n)`:
//! `e`, `f` form a hyperbolic pair with `B(e,f) = 1`, and the `b_i` span
//! `V' = span(e,f)^⊥` with `q' = diag(1, .., 1, -1)`. The whole space then has
//! signature `(n, 2)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::chart::Frame;
use crate::error::{Error, Result};
use crate::sampling;

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// `|q(rep)|` allowed for a unit representative of an isotropic line.
    pub null: f64,
    /// `|B(l1, l2)|` below which two unit representatives are incident.
    pub incidence: f64,
    /// Chordal distance below which two lines are equal.
    pub parallel: f64,
    /// Max-entry defect allowed in `gᵀ G g = G`.
    pub orthogonality: f64,
    /// Incidence values in `(incidence, ambiguity_factor * incidence)` are
    /// refused instead of classified.
    pub ambiguity_factor: f64,
    /// Relative spectral gap `|λ1|/|λ2| - 1` required of regular elements.
    pub gap_min: f64,
    /// Chordal radius under which limit points are merged. Powers of one
    /// word agree to about 1e-15 while distinct words of length 6 can
    /// already be 1e-11 apart.
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            null: 1e-9,
            incidence: 1e-7,
            parallel: 1e-9,
            orthogonality: 1e-9,
            ambiguity_factor: 10.0,
            gap_min: 1e-3,
            dedup: 1e-12,
        }
    }
}

/// The ambient form `(V, q)` of signature `(n, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpace {
    n: usize,
    gram: DMatrix<f64>,
    tol: Tolerances,
}

/// Counts strictly positive and strictly negative eigenvalues of a symmetric matrix.
pub fn signature(gram: &DMatrix<f64>) -> (usize, usize) {
    let eig = SymmetricEigen::new(gram.clone());
    let scale = gram.amax().max(1.0);
    let plus = eig.eigenvalues.iter().filter(|&&l| l > 1e-10 * scale).count();
    let minus = eig.eigenvalues.iter().filter(|&&l| l < -1e-10 * scale).count();
    (plus, minus)
}

/// Gram matrix of `q' = diag(1, .., 1, -1)` on `V'` of dimension `n`.
pub fn minkowski_gram(n: usize) -> DMatrix<f64> {
    let mut g = DMatrix::identity(n, n);
    g[(n - 1, n - 1)] = -1.0;
    g
}

impl QuadraticSpace {
    /// The block model of `R^{n,2}` for Lorentz dimension `n >= 3`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall(n));
        }
        let dim = n + 2;
        let mut gram = DMatrix::zeros(dim, dim);
        gram[(0, 1)] = 1.0;
        gram[(1, 0)] = 1.0;
        gram.view_mut((2, 2), (n, n)).copy_from(&minkowski_gram(n));
        Self::from_gram(n, gram)
    }

    /// Validates symmetry and the `(n, 2)` signature.
    pub fn from_gram(n: usize, gram: DMatrix<f64>) -> Result<Self> {
        let space = Self::from_gram_unchecked(n, gram);
        space.validate()?;
        Ok(space)
    }

    /// Skips validation; [`QuadraticSpace::validate`] reports what is wrong.
    pub fn from_gram_unchecked(n: usize, gram: DMatrix<f64>) -> Self {
        Self {
            n,
            gram,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::DimensionTooSmall(self.n));
        }
        let dim = self.n + 2;
        if self.gram.nrows() != dim || self.gram.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.gram.nrows(),
            });
        }
        let asym = (&self.gram - self.gram.transpose()).amax();
        if asym > 0.0 {
            return Err(Error::NotSymmetric(asym));
        }
        let (plus, minus) = signature(&self.gram);
        if (plus, minus) != (self.n, 2) {
            return Err(Error::Signature {
                plus,
                minus,
                want_plus: self.n,
                want_minus: 2,
            });
        }
        Ok(())
    }

    /// Lorentz dimension `n` (so `V' ≅ R^{n-1,1}`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 2
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn bilinear(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.gram * v)[(0, 0)]
    }

    pub fn q(&self, v: &DVector<f64>) -> f64 {
        self.bilinear(v, v)
    }

    /// Standard basis vector `e` (spans `L`).
    pub fn e(&self) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| if i == 0 { 1.0 } else { 0.0 })
    }

    /// Standard basis vector `f` (spans `L̂`).
    pub fn f(&self) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| if i == 1 { 1.0 } else { 0.0 })
    }

    /// Embeds `V'`-coordinates into `V` for the standard block basis.
    pub fn from_vprime(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(2, self.n).copy_from(v);
        out
    }
}

/// A point of the flag manifold `F₁`: a line spanned by a null vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicLine {
    rep: DVector<f64>,
}

const SIGN_EPS: f64 = 1e-12;

fn canonicalize(mut v: DVector<f64>) -> Result<DVector<f64>> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    v /= norm;
    if let Some(first) = v.iter().find(|c| c.abs() > SIGN_EPS) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    Ok(v)
}

impl IsotropicLine {
    /// Normalizes `v` and checks `|q(rep)| <= tol.null`.
    pub fn new(space: &QuadraticSpace, v: DVector<f64>) -> Result<Self> {
        if v.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: v.len(),
            });
        }
        let rep = canonicalize(v)?;
        let qv = space.q(&rep);
        if qv.abs() > space.tol().null {
            return Err(Error::NotNull(qv.abs()));
        }
        Ok(Self { rep })
    }

    /// Normalizes without the null check. Used for synthetic inputs.
    pub fn from_rep_unchecked(v: DVector<f64>) -> Result<Self> {
        Ok(Self { rep: canonicalize(v)? })
    }

    /// Unit Euclidean representative with canonical sign.
    pub fn rep(&self) -> &DVector<f64> {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.rep.iter().copied().collect()
    }
}

/// Position of one isotropic line relative to another in the Schubert
/// decomposition `F₁ = {L} ⊔ (Q_L − {L}) ⊔ L^opp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairClass {
    Equal,
    Incident,
    Opposite,
}

fn check_same_dim(space: &QuadraticSpace, a: &IsotropicLine, b: &IsotropicLine) -> Result<()> {
    for l in [a, b] {
        if l.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: l.dim(),
            });
        }
    }
    Ok(())
}

pub fn classify_pair(space: &QuadraticSpace, l1: &IsotropicLine, l2: &IsotropicLine) -> Result<PairClass> {
    check_same_dim(space, l1, l2)?;
    if chordal_distance(l1, l2) <= space.tol().parallel {
        return Ok(PairClass::Equal);
    }
    let b = quadric_margin(space, l1, l2);
    let tol = space.tol();
    if b <= tol.incidence {
        Ok(PairClass::Incident)
    } else if b < tol.ambiguity_factor * tol.incidence {
        Err(Error::Ambiguous(b))
    } else {
        Ok(PairClass::Opposite)
    }
}

/// `|B(m, l)|` on unit representatives; `M ∈ Q_L` iff this is at most `tol.incidence`.
pub fn quadric_margin(space: &QuadraticSpace, m: &IsotropicLine, l: &IsotropicLine) -> f64 {
    space.bilinear(m.rep(), l.rep()).abs()
}

/// Sine of the Euclidean angle between the two lines.
pub fn chordal_distance(l1: &IsotropicLine, l2: &IsotropicLine) -> f64 {
    let u = l1.rep();
    let v = l2.rep();
    // ‖v − (u·v)u‖ stays accurate for nearly parallel lines.
    let c = u.dot(v);
    (v - u * c).norm()
}

/// `k` points of the ellipsoid `E = Q_L ∩ Q_L̂`, i.e. the projectivized null
/// cone of `V' = span(L, L̂)^⊥`. For `n = 3` the samples are equally spaced
/// around the circle.
pub fn ellipsoid_sample(
    space: &QuadraticSpace,
    l: &IsotropicLine,
    l_hat: &IsotropicLine,
    k: usize,
) -> Result<Vec<IsotropicLine>> {
    if classify_pair(space, l, l_hat)? != PairClass::Opposite {
        return Err(Error::NotOpposite(quadric_margin(space, l, l_hat)));
    }
    let frame = Frame::from_lines(space, l, l_hat)?;
    let n = space.n();
    sampling::sphere_points(n - 1, k)
        .into_iter()
        .map(|s| {
            let mut w = DVector::zeros(n);
            w.rows_mut(0, n - 1).copy_from(&s);
            w[n - 1] = 1.0;
            IsotropicLine::new(space, frame.vprime_to_v(&w))
        })
        .collect()
}
