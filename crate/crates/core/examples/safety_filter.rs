//! Closed-form heading filter against the brute-force oracle for a few
//! desired headings toward an airplane 3 units ahead.

use blockfree::safety::{half_width_delta, qp_oracle_filter, safety_filter};
use blockfree::{AngleRad, SafetyParams, Side, Vec2};

fn main() -> blockfree::Result<()> {
    let params = SafetyParams::default();
    let (me, other) = (Vec2::ZERO, Vec2::new(3.0, 0.0));
    println!("cone half-width {:.4} rad", half_width_delta(me, other, &params));
    println!("{:>8} {:>10} {:>10} {:>10}", "theta*", "branch", "filtered", "oracle");
    for deg in [-60.0, -20.0, -5.0, 0.0, 5.0, 20.0, 60.0f64] {
        let theta = AngleRad::wrap(deg.to_radians());
        let out = safety_filter(theta, me, other, &params, Side::Plus)?;
        let oracle = qp_oracle_filter(theta, me, other, &params)?;
        let best: Vec<String> = oracle.minimizers.iter().map(|m| format!("{:.4}", m.value())).collect();
        println!("{:>8.1} {:>10} {:>10.4} {:>10}", deg, out.branch.token(), out.safe_heading.value(), best.join("|"));
    }
    Ok(())
}
