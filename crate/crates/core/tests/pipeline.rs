use flagchart::chart::{embed_affine, Frame};
use flagchart::domain::{
    domain_margin, equivariance_audit, find_domain_point, hyperplane_of, properness_audit, thickening_in_chart,
};
use flagchart::geometry::{quadric_margin, QuadraticSpace};
use flagchart::groups::Letter;
use flagchart::limitset::{attracting_line, limit_sample, scaling_check, LimitSample};
use flagchart::pipeline::{desk_group, run, PipelineOptions};
use flagchart::sampling::{gaussian_vector, rng};
use flagchart::Error;
use nalgebra::DVector;

fn desk() -> (QuadraticSpace, Frame) {
    let space = QuadraticSpace::new(3).unwrap();
    let frame = Frame::standard(&space);
    (space, frame)
}

#[test]
fn trivial_cocycle_lands_on_the_ellipsoid() {
    let (space, frame) = desk();
    let group = desk_group(3, 42).unwrap().linear_group();
    let sample = limit_sample(&frame, &group, 6).unwrap();
    for p in &sample.points {
        assert!(quadric_margin(&space, p, &frame.l()) < 1e-12);
        assert!(quadric_margin(&space, p, &frame.l_hat()) < 1e-12);
    }
    let hset = thickening_in_chart(&frame, &sample).unwrap();
    assert!(hset.items.iter().all(|it| it.alpha.abs() < 1e-12));
    // every hyperplane passes through the origin
    assert!(domain_margin(&hset, &DVector::zeros(3)) < 1e-12);
    let found = find_domain_point(&frame, &hset).unwrap();
    assert!(found.margin > 0.1);
}

#[test]
fn samples_containing_l_are_rejected() {
    let (_, frame) = desk();
    let sample = LimitSample {
        points: vec![frame.l()],
        word_len: vec![1],
        words: vec!["a".into()],
        group_id: String::new(),
        irregular: 0,
    };
    assert_eq!(thickening_in_chart(&frame, &sample).unwrap_err(), Error::PointIsL);
}

#[test]
fn center_on_a_thickening_hyperplane_keeps_returning() {
    let (space, frame) = desk();
    let group = desk_group(3, 42).unwrap();
    let g = group.letter(Letter::gen(0));
    let line = attracting_line(&space, &embed_affine(&frame, &g.linear, &g.translation).unwrap()).unwrap();
    let h = hyperplane_of(&frame, &line, 1).unwrap();
    let gw = frame.gprime() * &h.w;
    let center = &gw * (-h.alpha / gw.norm_squared());
    let report = properness_audit(&group, &center, 1.0, 8).unwrap();
    assert!(!report.stabilized, "{:?}", report.per_length);
    assert!(report.per_length.iter().skip(1).all(|&c| c > 0));
    assert!(report.cumulative.windows(2).all(|p| p[1] > p[0]));
}

#[test]
fn domain_point_scales_with_the_cocycle() {
    let (_, frame) = desk();
    let group = desk_group(3, 42).unwrap();
    let hset = thickening_in_chart(&frame, &limit_sample(&frame, &group, 8).unwrap()).unwrap();
    let found = find_domain_point(&frame, &hset).unwrap();
    let t = 0.5;
    let scaled = group.scale(t).unwrap();
    let hset_t = thickening_in_chart(&frame, &limit_sample(&frame, &scaled, 8).unwrap()).unwrap();
    // a_t acts on the chart as v' ↦ t v', scaling every residual by t
    let p = found.vector();
    let raw = found.margin * (1.0 + p.norm());
    let raw_t = domain_margin(&hset_t, &(&p * t)) * (1.0 + t * p.norm());
    assert!((raw_t - t * raw).abs() <= 1e-9 * raw, "{raw_t} vs {}", t * raw);
}

#[test]
fn scaling_identity_holds() {
    let (_, frame) = desk();
    let group = desk_group(3, 42).unwrap();
    for t in [0.1, 0.5, 2.0, 10.0] {
        let h = scaling_check(&frame, &group, t, 6).unwrap();
        assert!(h <= 1e-8, "t={t}: {h:e}");
    }
}

#[test]
fn pipeline_point_is_stable_under_refinement() {
    let (_, frame) = desk();
    let group = desk_group(3, 42).unwrap();
    let opts = PipelineOptions {
        depth: 6,
        refine_depth: 8,
        radius_fraction: 0.25,
    };
    let out = run(&frame, &group, &opts).unwrap();
    assert!(out.domain.margin > 0.0);
    assert!(out.audit.stabilized);
    assert!(out.margin_degradation() < 0.5);
    assert!(out.containment.max_margin < 1e-6);
    assert!(out.refined_points > out.sample.len());
}

#[test]
fn equivariance_over_generators() {
    let (_, frame) = desk();
    let group = desk_group(3, 42).unwrap();
    let mut r = rng(3);
    let samples: Vec<DVector<f64>> = (0..1000).map(|_| gaussian_vector(&mut r, 3) * 4.0).collect();
    assert!(equivariance_audit(&frame, &group, &samples).unwrap() <= 1e-9);
}

#[test]
fn audit_relaxes_further_along_a_domain_ray() {
    let (_, frame) = desk();
    let group = desk_group(3, 42).unwrap();
    let hset = thickening_in_chart(&frame, &limit_sample(&frame, &group, 6).unwrap()).unwrap();
    let found = find_domain_point(&frame, &hset).unwrap();
    let u = DVector::from_column_slice(&found.direction);
    let mut last = usize::MAX;
    let mut last_margin = 0.0;
    for k in 0..8 {
        let c = &u * 2f64.powi(k);
        let m = domain_margin(&hset, &c);
        if m < last_margin {
            continue;
        }
        let count = *properness_audit(&group, &c, 0.1, 6).unwrap().cumulative.last().unwrap();
        assert!(count <= last, "R=2^{k}: {count} > {last}");
        last = count;
        last_margin = m;
    }
    assert_eq!(last, 1);
}
