//! Shears, the chart `h: V' → L^opp`, and the affine Lorentz group inside
//! the parabolic stabilizer of `L`.
//!
//! A [`Frame`] fixes `e ∈ L`, `f ∈ L̂` with `B(e,f) = 1` and a basis of
//! `V' = span(e,f)^⊥`. All `V'` vectors passed to this module are coordinates
//! in that basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{chordal_distance, signature, IsotropicLine, QuadraticSpace};

#[derive(Debug, Clone)]
pub struct Frame {
    space: QuadraticSpace,
    e: DVector<f64>,
    f: DVector<f64>,
    /// `dim × n`, columns are the `V'` basis vectors.
    basis: DMatrix<f64>,
    gprime: DMatrix<f64>,
    gprime_inv: DMatrix<f64>,
    /// `n × dim`, maps a vector of `V` to the `V'`-coordinates of its `V'` component.
    coords: DMatrix<f64>,
    /// Columns form a `q'`-orthonormal basis of `V'` (timelike last), in coordinates.
    lorentz: DMatrix<f64>,
    id: String,
}

impl Frame {
    /// The frame of the block basis: `e`, `f`, then the standard `V'` basis.
    pub fn standard(space: &QuadraticSpace) -> Self {
        let n = space.n();
        let basis = DMatrix::from_fn(space.dim(), n, |i, j| if i == j + 2 { 1.0 } else { 0.0 });
        Self::build(space, space.e(), space.f(), basis, format!("std-n{n}")).expect("block basis is a valid frame")
    }

    /// A frame from explicit vectors; checks every frame invariant.
    pub fn new(
        space: &QuadraticSpace,
        e: DVector<f64>,
        f: DVector<f64>,
        vprime_basis: &[DVector<f64>],
    ) -> Result<Self> {
        let n = space.n();
        let dim = space.dim();
        if vprime_basis.len() != n {
            return Err(Error::InvalidFrame(format!(
                "expected {n} V' basis vectors, got {}",
                vprime_basis.len()
            )));
        }
        for v in std::iter::once(&e).chain(std::iter::once(&f)).chain(vprime_basis) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let basis = DMatrix::from_columns(vprime_basis);
        let id = frame_hash(&e, &f, &basis);
        Self::build(space, e, f, basis, id)
    }

    /// A frame with `L = span(l)`, `L̂ = span(l_hat)` and a `q'`-orthonormal
    /// `V'` basis, so that `q' = diag(1, .., 1, -1)` in frame coordinates.
    pub fn from_lines(space: &QuadraticSpace, l: &IsotropicLine, l_hat: &IsotropicLine) -> Result<Self> {
        let n = space.n();
        let dim = space.dim();
        let e = l.rep().clone();
        let c = space.bilinear(l.rep(), l_hat.rep());
        if c.abs() < 1e-8 {
            return Err(Error::NotOpposite(c.abs()));
        }
        let f = l_hat.rep() / c;
        let g = space.gram();
        let ge = g * &e;
        let gf = g * &f;
        // span(e, f)^⊥ is the kernel of [Ge Gf]ᵀ; an orthonormal kernel basis
        // keeps the orthogonality exact even when l and l̂ are nearly incident
        let m = DMatrix::from_columns(&[&ge / ge.norm(), &gf / gf.norm()]);
        let sym = SymmetricEigen::new(&m * m.transpose());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
        let span = DMatrix::from_columns(
            &order[..n]
                .iter()
                .map(|&i| sym.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        let restricted = span.transpose() * g * &span;
        let eig = SymmetricEigen::new(restricted);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut cols = Vec::with_capacity(n);
        for &i in &idx {
            let lam = eig.eigenvalues[i];
            let mut col = &span * eig.eigenvectors.column(i) / lam.abs().sqrt();
            orient(&mut col);
            cols.push(col);
        }
        Self::new(space, e, f, &cols)
    }

    fn build(
        space: &QuadraticSpace,
        e: DVector<f64>,
        f: DVector<f64>,
        basis: DMatrix<f64>,
        id: String,
    ) -> Result<Self> {
        let n = space.n();
        let g = space.gram();
        let scale = |v: &DVector<f64>| v.norm_squared().max(1.0);
        let tol = 1e-9;
        if space.q(&e).abs() > tol * scale(&e) || space.q(&f).abs() > tol * scale(&f) {
            return Err(Error::InvalidFrame("e and f must be null".into()));
        }
        if (space.bilinear(&e, &f) - 1.0).abs() > tol * e.norm() * f.norm() {
            return Err(Error::InvalidFrame("B(e, f) must equal 1".into()));
        }
        for j in 0..n {
            let b = basis.column(j).into_owned();
            if space.bilinear(&e, &b).abs() > tol * e.norm() * b.norm()
                || space.bilinear(&f, &b).abs() > tol * f.norm() * b.norm()
            {
                return Err(Error::InvalidFrame(format!(
                    "V' basis vector {j} is not orthogonal to e, f"
                )));
            }
        }
        let gprime = basis.transpose() * g * &basis;
        let gprime = (&gprime + gprime.transpose()) * 0.5;
        if signature(&gprime) != (n - 1, 1) {
            return Err(Error::InvalidFrame(
                "restricted form on V' must have signature (n-1, 1)".into(),
            ));
        }
        let gprime_inv = gprime
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidFrame("degenerate V' basis".into()))?;
        let coords = &gprime_inv * basis.transpose() * g;
        let lorentz = lorentz_basis(&gprime);
        Ok(Self {
            space: space.clone(),
            e,
            f,
            basis,
            gprime,
            gprime_inv,
            coords,
            lorentz,
            id,
        })
    }

    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn e(&self) -> &DVector<f64> {
        &self.e
    }

    pub fn f(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn vprime_basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Gram matrix of `q'` in frame coordinates.
    pub fn gprime(&self) -> &DMatrix<f64> {
        &self.gprime
    }

    /// Columns form a `q'`-orthonormal basis of `V'` with the timelike vector last.
    pub fn lorentz_basis(&self) -> &DMatrix<f64> {
        &self.lorentz
    }

    /// Reference future-timelike vector of `V'` (coordinates).
    pub fn time_ref(&self) -> DVector<f64> {
        self.lorentz.column(self.n() - 1).into_owned()
    }

    pub fn l(&self) -> IsotropicLine {
        IsotropicLine::from_rep_unchecked(self.e.clone()).expect("e is nonzero")
    }

    pub fn l_hat(&self) -> IsotropicLine {
        IsotropicLine::from_rep_unchecked(self.f.clone()).expect("f is nonzero")
    }

    pub fn q_prime(&self, v: &DVector<f64>) -> f64 {
        self.b_prime(v, v)
    }

    pub fn b_prime(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.gprime * v)[(0, 0)]
    }

    pub fn vprime_to_v(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * v
    }

    /// `V'`-coordinates of the `V'` component of `x` in `V = span(e) ⊕ span(f) ⊕ V'`.
    pub fn v_to_vprime(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.coords * x
    }

    fn lift(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let g = self.space.gram();
        &self.e * (g * &self.f).transpose() + &self.f * (g * &self.e).transpose() + &self.basis * a * &self.coords
    }

    /// Checks `Aᵀ G' A = G'`. The defect is measured relative to `max(1, |A|²)`
    /// so that long products stay admissible.
    pub fn check_lorentz(&self, a: &DMatrix<f64>) -> Result<()> {
        let n = self.n();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.nrows(),
            });
        }
        let defect = (a.transpose() * &self.gprime * a - &self.gprime).amax();
        let scale = a.amax().powi(2).max(1.0);
        if defect > self.space.tol().orthogonality * scale {
            return Err(Error::NotOrthogonal(defect));
        }
        Ok(())
    }

    /// `q'`-adjoint inverse `G'⁻¹ Aᵀ G'` of an element of `O(q')`.
    pub fn lorentz_inverse(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.gprime_inv * a.transpose() * &self.gprime
    }
}

fn orient(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

fn lorentz_basis(gprime: &DMatrix<f64>) -> DMatrix<f64> {
    let n = gprime.nrows();
    let eig = SymmetricEigen::new(gprime.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<DVector<f64>> = idx
        .iter()
        .map(|&i| {
            let mut c = eig.eigenvectors.column(i) / eig.eigenvalues[i].abs().sqrt();
            orient(&mut c);
            c
        })
        .collect();
    DMatrix::from_columns(&cols)
}

fn frame_hash(e: &DVector<f64>, f: &DVector<f64>, basis: &DMatrix<f64>) -> String {
    let mut h = Sha256::new();
    for x in e.iter().chain(f.iter()).chain(basis.iter()) {
        h.update(x.to_le_bytes());
    }
    format!("frame-{}", &hex::encode(h.finalize())[..16])
}

/// An element of `O(q) = O(n, 2)` as a matrix in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mat: DMatrix<f64>,
}

impl GroupElement {
    /// Checks `‖gᵀ G g − G‖_max <= tol.orthogonality`.
    pub fn new(space: &QuadraticSpace, mat: DMatrix<f64>) -> Result<Self> {
        let g = Self { mat };
        let defect = g.orthogonality_defect(space);
        if !(defect <= space.tol().orthogonality) {
            return Err(Error::NotOrthogonal(defect));
        }
        Ok(g)
    }

    pub fn from_matrix_unchecked(mat: DMatrix<f64>) -> Self {
        Self { mat }
    }

    pub fn identity(space: &QuadraticSpace) -> Self {
        Self {
            mat: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn orthogonality_defect(&self, space: &QuadraticSpace) -> f64 {
        let g = space.gram();
        (self.mat.transpose() * g * &self.mat - g).amax()
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            mat: &self.mat * &other.mat,
        }
    }

    /// `G⁻¹ gᵀ G`, exact for elements of `O(q)`.
    pub fn inverse(&self, space: &QuadraticSpace) -> GroupElement {
        let g = space.gram();
        let ginv = g.clone().try_inverse().expect("nondegenerate form");
        GroupElement {
            mat: ginv * self.mat.transpose() * g,
        }
    }

    pub fn apply(&self, line: &IsotropicLine) -> IsotropicLine {
        IsotropicLine::from_rep_unchecked(&self.mat * line.rep()).expect("invertible map keeps lines nonzero")
    }

    pub fn record(&self, frame: &Frame) -> GroupElementRecord {
        GroupElementRecord {
            frame: frame.id().to_string(),
            rows: self.mat.nrows(),
            data: (0..self.mat.nrows())
                .flat_map(|i| (0..self.mat.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| self.mat[(i, j)])
                .collect(),
        }
    }
}

/// Row-major JSON form of a [`GroupElement`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElementRecord {
    pub frame: String,
    pub rows: usize,
    pub data: Vec<f64>,
}

impl GroupElementRecord {
    pub fn to_element(&self) -> GroupElement {
        GroupElement::from_matrix_unchecked(DMatrix::from_row_slice(self.rows, self.rows, &self.data))
    }
}

fn check_vprime(frame: &Frame, v: &DVector<f64>) -> Result<()> {
    if v.len() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            got: v.len(),
        });
    }
    Ok(())
}

/// The shear `s_{v'}`: `e ↦ e`, `f ↦ −½q'(v')e + f + v'`, `w ↦ w − B(v',w)e`.
pub fn shear(frame: &Frame, vprime: &DVector<f64>) -> Result<GroupElement> {
    check_vprime(frame, vprime)?;
    let g = frame.space().gram();
    let v = frame.vprime_to_v(vprime);
    let half_q = 0.5 * frame.q_prime(vprime);
    let e = frame.e();
    // s(x) = x + B(e,x)(v − ½q'(v)e) − B(v,x)e
    let mat = DMatrix::identity(e.len(), e.len()) + (&v - e * half_q) * (g * e).transpose() - e * (g * &v).transpose();
    Ok(GroupElement::from_matrix_unchecked(mat))
}

/// `‖s_{u+v} − s_u s_v‖_max`.
pub fn shear_compose_check(frame: &Frame, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let sum = shear(frame, &(u + v))?;
    let prod = shear(frame, u)?.compose(&shear(frame, v)?);
    Ok((sum.mat() - prod.mat()).amax())
}

/// Unnormalized representative `−½q'(v')e + f + v'` of `h(v')`.
pub fn chart_rep(frame: &Frame, vprime: &DVector<f64>) -> DVector<f64> {
    frame.e() * (-0.5 * frame.q_prime(vprime)) + frame.f() + frame.vprime_to_v(vprime)
}

/// The chart `h(v') = s_{v'}(L̂)`.
pub fn chart_to_flag(frame: &Frame, vprime: &DVector<f64>) -> Result<IsotropicLine> {
    check_vprime(frame, vprime)?;
    IsotropicLine::new(frame.space(), chart_rep(frame, vprime))
}

/// Inverse of the chart on `L^opp`.
pub fn flag_to_chart(frame: &Frame, m: &IsotropicLine) -> Result<DVector<f64>> {
    let rep = m.rep();
    let c = frame.space().bilinear(frame.e(), rep);
    if c.abs() < 1e-8 * rep.norm() {
        return Err(Error::NotOpposite(c.abs()));
    }
    Ok(frame.v_to_vprime(&(rep / c)))
}

/// `s_b · Â`, where `Â` fixes `e` and `f` and acts by `A` on `V'`.
pub fn embed_affine(frame: &Frame, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<GroupElement> {
    frame.check_lorentz(a)?;
    let s = shear(frame, b)?;
    Ok(GroupElement::from_matrix_unchecked(s.mat() * frame.lift(a)))
}

/// The central transvection `a_t`: `e ↦ t e`, `f ↦ f / t`, identity on `V'`.
pub fn transvection(frame: &Frame, t: f64) -> Result<GroupElement> {
    if !(t > 0.0) {
        return Err(Error::NonPositive(t));
    }
    let g = frame.space().gram();
    let e = frame.e();
    let f = frame.f();
    let dim = e.len();
    let mat =
        DMatrix::identity(dim, dim) + e * (g * f).transpose() * (t - 1.0) + f * (g * e).transpose() * (1.0 / t - 1.0);
    Ok(GroupElement::from_matrix_unchecked(mat))
}

/// The homomorphism `η: P_L → O(q')`, the action induced on `L^⊥ / L ≅ V'`.
pub fn linear_part(frame: &Frame, g: &GroupElement) -> Result<DMatrix<f64>> {
    let l = frame.l();
    let drift = chordal_distance(&g.apply(&l), &l);
    if drift > 1e-9 {
        return Err(Error::DoesNotFixL(drift));
    }
    Ok(frame.v_to_vprime_mat(g.mat()))
}

/// Chart coordinates of `g·L̂`, the translation part of `g ∈ G'_L`.
pub fn translation_part(frame: &Frame, g: &GroupElement) -> Result<DVector<f64>> {
    flag_to_chart(frame, &g.apply(&frame.l_hat()))
}

impl Frame {
    fn v_to_vprime_mat(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        &self.coords * m * &self.basis
    }
}
