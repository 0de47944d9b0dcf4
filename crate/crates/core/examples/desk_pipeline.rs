//! Runs the full pipeline on the default two-generator instance in R^{2,1}.

use std::time::Instant;

use flagchart::chart::Frame;
use flagchart::geometry::QuadraticSpace;
use flagchart::limitset::{containment_report, limit_sample, scaling_check};
use flagchart::pipeline::{desk_group, run, PipelineOptions};

fn main() -> flagchart::Result<()> {
    let space = QuadraticSpace::new(3)?;
    let frame = Frame::standard(&space);
    let group = desk_group(3, 42)?;
    for depth in [6, 8, 10] {
        let t0 = Instant::now();
        let s = limit_sample(&frame, &group, depth)?;
        let c = containment_report(&space, &s.points, &frame.l())?;
        println!(
            "N={depth}: {} points ({} irregular), max margin {:.3e}, min dist to L {:.6} [{:.2?}]",
            s.len(),
            s.irregular,
            c.max_margin,
            c.min_dist_to_l,
            t0.elapsed()
        );
    }
    for t in [0.1, 0.5, 2.0, 10.0] {
        println!("scaling t={t}: {:.3e}", scaling_check(&frame, &group, t, 6)?);
    }
    let t0 = Instant::now();
    let out = run(&frame, &group, &PipelineOptions::default())?;
    println!("domain point {:?} margin {:.4}", out.domain.point, out.domain.margin);
    println!("audit {:?} stabilized {}", out.audit.cumulative, out.audit.stabilized);
    println!(
        "refined margin {:.4} ({} points), degradation {:.2}% [{:.2?}]",
        out.refined_margin,
        out.refined_points,
        100.0 * out.margin_degradation(),
        t0.elapsed()
    );
    Ok(())
}
