//! Independent oracles for the numerical core: plain power iteration,
//! dense boundary scans, closed-form ellipse gaps and brute-force margins.

use flagchart::chart::{chart_to_flag, embed_affine, Frame};
use flagchart::domain::{domain_margin, find_domain_point, thickening_in_chart};
use flagchart::geometry::{chordal_distance, ellipsoid_sample, IsotropicLine, QuadraticSpace};
use flagchart::groups::{boundary_to_null, null_to_boundary, words, SchottkyGroup};
use flagchart::limitset::{attracting_line, limit_sample};
use flagchart::pipeline::desk_group;
use flagchart::sampling::sphere_points;
use nalgebra::DVector;

fn power_iteration(m: &nalgebra::DMatrix<f64>, steps: usize) -> DVector<f64> {
    let mut v = DVector::from_element(m.nrows(), 1.0);
    v[1] = 0.3;
    for _ in 0..steps {
        v = m * &v;
        v /= v.norm();
    }
    v
}

#[test]
fn attracting_line_matches_power_iteration() {
    let space = QuadraticSpace::new(3).unwrap();
    let frame = Frame::standard(&space);
    let group = desk_group(3, 42).unwrap();
    let mut checked = 0;
    for w in words(2, 3) {
        if w.is_empty() || !w.is_cyclically_reduced() {
            continue;
        }
        let g = group.evaluate(&w);
        let m = embed_affine(&frame, &g.linear, &g.translation).unwrap();
        let line = attracting_line(&space, &m).unwrap();
        let oracle = IsotropicLine::from_rep_unchecked(power_iteration(m.mat(), 400)).unwrap();
        let d = chordal_distance(&line, &oracle);
        assert!(d < 1e-9, "{w}: {d:e}");
        checked += 1;
    }
    assert!(checked > 20);
}

fn ping_pong_scan(group: &SchottkyGroup, points: &[DVector<f64>]) {
    let cert = group.certificate().expect("certified");
    for (i, gen) in group.generators().iter().enumerate() {
        let (plus, minus) = (&cert.balls[2 * i], &cert.balls[2 * i + 1]);
        let inv = gen.inverse();
        let mut tested = 0;
        for x in points {
            if minus.distance_to_center(x) > minus.radius {
                let y = null_to_boundary(&(&gen.linear * boundary_to_null(x)));
                assert!(plus.contains(&y), "generator {i} maps {x:?} outside its attracting cap");
                tested += 1;
            }
            if plus.distance_to_center(x) > plus.radius {
                let y = null_to_boundary(&(&inv.linear * boundary_to_null(x)));
                assert!(
                    minus.contains(&y),
                    "inverse of generator {i} maps {x:?} outside its repelling cap"
                );
            }
        }
        assert!(tested > points.len() / 2);
    }
}

#[test]
fn ping_pong_certificate_is_sound_on_dense_scans() {
    let g3 = desk_group(3, 42).unwrap();
    ping_pong_scan(&g3, &sphere_points(2, 20_000));
    let g4 = desk_group(4, 42).unwrap();
    ping_pong_scan(&g4, &sphere_points(3, 20_000));
}

#[test]
fn ellipse_gaps_match_closed_form() {
    // E for n = 3 is the circle of null lines span(cos θ, sin θ, 1) in V'
    let space = QuadraticSpace::new(3).unwrap();
    let frame = Frame::standard(&space);
    let k = 360;
    let pts = ellipsoid_sample(&space, &frame.l(), &frame.l_hat(), k).unwrap();
    let delta = std::f64::consts::TAU / k as f64;
    let cos_angle = (1.0 + delta.cos()) / 2.0;
    let expect = (1.0 - cos_angle * cos_angle).sqrt();
    let mut min_gap = f64::INFINITY;
    for i in 0..k {
        let nearest = (0..k)
            .filter(|&j| j != i)
            .map(|j| chordal_distance(&pts[i], &pts[j]))
            .fold(f64::INFINITY, f64::min);
        assert!((nearest - expect).abs() < 1e-12, "point {i}: {nearest} vs {expect}");
        min_gap = min_gap.min(nearest);
    }
    assert!(min_gap > 0.0);
}

#[test]
fn domain_margin_matches_brute_force_and_dense_scan() {
    let space = QuadraticSpace::new(3).unwrap();
    let frame = Frame::standard(&space);
    let group = desk_group(3, 42).unwrap();
    let sample = limit_sample(&frame, &group, 6).unwrap();
    let hset = thickening_in_chart(&frame, &sample).unwrap();
    let u = DVector::from_column_slice(&[0.2, -0.1, 1.0]);
    let v = &u * (100.0 / u.norm());
    // brute force through the incidence form B(h(v'), λ)
    let h = flagchart::chart::chart_rep(&frame, &v);
    let brute = sample
        .points
        .iter()
        .map(|p| (space.bilinear(&h, p.rep()) / frame.v_to_vprime(p.rep()).norm()).abs())
        .fold(f64::INFINITY, f64::min)
        / (1.0 + v.norm());
    let m = domain_margin(&hset, &v);
    assert!((m - brute).abs() < 1e-9 * brute.max(1.0), "{m} vs {brute}");
    assert!(m > 0.1, "future timelike ray should stay off the thickening: {m}");

    // the search must do at least as well as a coarse grid scan
    let found = find_domain_point(&frame, &hset).unwrap();
    let mut scan_best: f64 = 0.0;
    for i in -10..=10 {
        for j in -10..=10 {
            for k in -10..=10 {
                let p = DVector::from_column_slice(&[i as f64, j as f64, k as f64 * 10.0]);
                scan_best = scan_best.max(domain_margin(&hset, &p));
            }
        }
    }
    assert!(found.margin >= scan_best, "{} < {}", found.margin, scan_best);
    let found_line = chart_to_flag(&frame, &found.vector()).unwrap();
    assert!(sample.points.iter().all(|p| chordal_distance(p, &found_line) > 0.0));
}
