//! Factor an isometry into special elliptic isometries and report its length.

use su21::decomposer::{alpha_length, decompose3};
use su21::hermitian::ProjectivePoint;
use su21::isometry::{special_elliptic, Parameter};

fn main() -> su21::Result<()> {
    let beta = Parameter::from_pi_fraction(2, 5)?;
    let pts = [[0.0, 0.0, 1.0], [0.4, 0.0, 1.0], [0.0, 0.5, 1.0], [0.2, -0.3, 1.0]];
    let mut f = su21::isometry::Isometry::identity();
    for x in pts {
        f = special_elliptic(&beta, &ProjectivePoint::from_reals(x)?)?.compose(&f);
    }
    let alpha = Parameter::from_pi_fraction(1, 7)?;
    let d = decompose3(&f, &alpha)?;
    println!("{} factors, residual {:.2e}, delta = w^{}", d.len(), d.residual, d.delta);
    for c in &d.centers {
        let z: Vec<String> = c.normalized().iter().map(|x| format!("{x:.6}")).collect();
        println!("  center [{}]", z.join(", "));
    }
    let l = alpha_length(&f, &alpha)?;
    println!("length {:?}", l.length);
    Ok(())
}
