//! Seeded randomized checks of the chart identities: shears, the chart and
//! its equivariance, the null-cone identity, transvections and ellipsoids.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{
    chart_to_flag, embed_affine, flag_to_chart, linear_part, shear, shear_compose_check, transvection, Frame,
};
use crate::geometry::{chordal_distance, ellipsoid_sample, quadric_margin, QuadraticSpace};
use crate::sampling::{gaussian_vector, random_orthogonal, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaResult {
    pub name: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    pub seed: u64,
    pub lemmas: Vec<LemmaResult>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

struct Suite {
    results: Vec<LemmaResult>,
}

impl Suite {
    fn record(&mut self, name: &str, samples: usize, tolerance: f64, mut check: impl FnMut(usize) -> f64) {
        let mut max_error: f64 = 0.0;
        for i in 0..samples {
            let err = check(i);
            // NaN must fail the lemma
            max_error = if err.is_nan() { f64::NAN } else { max_error.max(err) };
            if max_error.is_nan() {
                break;
            }
        }
        self.results.push(LemmaResult {
            name: name.to_string(),
            samples,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        });
    }
}

/// Runs every lemma on `samples` seeded random draws. Stops after the
/// signature check if the space is malformed.
pub fn run_lemma_suite(space: &QuadraticSpace, seed: u64, samples: usize) -> LemmaReport {
    let mut suite = Suite { results: Vec::new() };
    let n = space.n();
    let sig_ok = space.validate().is_ok();
    suite.record("signature", 1, 0.0, |_| if sig_ok { 0.0 } else { 1.0 });
    if sig_ok {
        run_chart_lemmas(&mut suite, space, seed, samples);
    }
    let first_failure = suite.results.iter().find(|r| !r.passed).map(|r| r.name.clone());
    LemmaReport {
        n,
        seed,
        passed: first_failure.is_none(),
        first_failure,
        lemmas: suite.results,
    }
}

fn run_chart_lemmas(suite: &mut Suite, space: &QuadraticSpace, seed: u64, samples: usize) {
    let n = space.n();
    let dim = space.dim();
    let frame = Frame::standard(space);
    let gp = frame.gprime().clone();
    let mut r = rng(seed);
    let vecs: Vec<(DVector<f64>, DVector<f64>)> = (0..samples)
        .map(|_| (gaussian_vector(&mut r, n), gaussian_vector(&mut r, n)))
        .collect();
    let lorentz: Vec<DMatrix<f64>> = (0..samples).map(|_| random_orthogonal(&mut r, &gp, 0.5)).collect();
    let scales: Vec<f64> = (0..samples).map(|_| 10f64.powf(r.random_range(-1.0..1.0))).collect();
    let ambient: Vec<(DVector<f64>, DVector<f64>)> = (0..samples)
        .map(|_| (gaussian_vector(&mut r, dim), gaussian_vector(&mut r, dim)))
        .collect();
    let id = DMatrix::<f64>::identity(dim, dim);
    let sh = |v: &DVector<f64>| shear(&frame, v).expect("dimension matches");

    suite.record("polarization", samples, 1e-12, |i| {
        let (u, v) = &ambient[i];
        let pol = 0.5 * (space.q(&(u + v)) - space.q(u) - space.q(v));
        (pol - space.bilinear(u, v)).abs()
    });
    suite.record("shear_orthogonality", samples, 1e-9, |i| {
        sh(&vecs[i].0).orthogonality_defect(space)
    });
    suite.record("shear_fixes_l", samples, 0.0, |i| {
        (sh(&vecs[i].0).mat() * frame.e() - frame.e()).amax()
    });
    suite.record("shear_unipotency", samples, 1e-10, |i| {
        let d = sh(&vecs[i].0).mat() - &id;
        (&d * &d * &d).amax()
    });
    suite.record("shear_square_rank_one", samples, 1e-10, |i| {
        let d = sh(&vecs[i].0).mat() - &id;
        let mut sv: Vec<f64> = (&d * &d).singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv[1]
    });
    suite.record("shear_homomorphism", samples, 1e-10, |i| {
        let (u, v) = &vecs[i];
        shear_compose_check(&frame, u, v).expect("dimension matches")
    });
    suite.record("shear_kernel_of_eta", samples, 1e-10, |i| {
        let eta = linear_part(&frame, &sh(&vecs[i].0)).expect("shears fix L");
        (eta - DMatrix::<f64>::identity(n, n)).amax()
    });
    suite.record("shear_equivariance", samples, 1e-9, |i| {
        let a = &lorentz[i];
        let v = &vecs[i].0;
        let lift = embed_affine(&frame, a, &DVector::zeros(n)).expect("A is Lorentz");
        let conj = lift.compose(&sh(v)).compose(&lift.inverse(space));
        (conj.mat() - sh(&(a * v)).mat()).amax()
    });
    suite.record("null_cone_identity", samples, 1e-12, |i| {
        let v = &vecs[i].0;
        let sf = sh(v).mat() * frame.f();
        (space.bilinear(frame.f(), &sf) + 0.5 * frame.q_prime(v)).abs()
    });
    suite.record("chart_round_trip", samples, 1e-10, |i| {
        let v = &vecs[i].0;
        let m = chart_to_flag(&frame, v).expect("chart points are null");
        (flag_to_chart(&frame, &m).expect("chart points are opposite to L") - v).amax()
    });
    suite.record("chart_conjugacy", samples, 1e-9, |i| {
        let (v, b) = &vecs[i];
        let a = &lorentz[i];
        let g = embed_affine(&frame, a, b).expect("A is Lorentz");
        let lhs = chart_to_flag(&frame, &(a * v + b)).expect("null");
        let rhs = g.apply(&chart_to_flag(&frame, v).expect("null"));
        chordal_distance(&lhs, &rhs)
    });
    suite.record("embed_orthogonality", samples, 1e-9, |i| {
        embed_affine(&frame, &lorentz[i], &vecs[i].1)
            .expect("A is Lorentz")
            .orthogonality_defect(space)
    });
    suite.record("eta_of_embedding", samples, 1e-9, |i| {
        let g = embed_affine(&frame, &lorentz[i], &vecs[i].1).expect("A is Lorentz");
        (linear_part(&frame, &g).expect("fixes L") - &lorentz[i]).amax()
    });
    suite.record("transvection_conjugation", samples, 1e-9, |i| {
        let t = scales[i];
        let v = &vecs[i].0;
        let a = transvection(&frame, t).expect("t > 0");
        let conj = a.compose(&sh(v)).compose(&a.inverse(space));
        (conj.mat() - sh(&(v * t)).mat()).amax()
    });
    let l = frame.l();
    let l_hat = frame.l_hat();
    let k = samples.clamp(1, 256);
    let ellipse = ellipsoid_sample(space, &l, &l_hat, k).expect("L and L̂ are opposite");
    suite.record("ellipsoid_incidence", ellipse.len(), space.tol().incidence, |i| {
        quadric_margin(space, &ellipse[i], &l).max(quadric_margin(space, &ellipse[i], &l_hat))
    });
}
