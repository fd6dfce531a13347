//! Classify a few isometries and show their angle pairs.

use su21::hermitian::ProjectivePoint;
use su21::isometry::{angle_pair, special_elliptic, Parameter};

fn main() -> su21::Result<()> {
    let alpha = Parameter::from_pi_fraction(1, 7)?;
    let p = ProjectivePoint::from_reals([0.0, 0.0, 1.0])?;
    let q = ProjectivePoint::from_reals([0.3, 0.1, 1.0])?;
    let r1 = special_elliptic(&alpha, &p)?;
    let r2 = special_elliptic(&alpha, &q)?;
    for (name, f) in [("R_p", r1.clone()), ("R_q R_p", r2.compose(&r1))] {
        let key = f.classify()?;
        println!("{name}: {} trace={:.6}", key.kind.name(), f.trace());
        if let Ok((a, b)) = angle_pair(&f) {
            println!("  angle pair ({a:.6}, {b:.6})");
        }
    }
    Ok(())
}
