//! Solve for three centers whose special elliptic product has a given trace.

use su21::decomposer::{product, surface_solve, SurfaceInstance};
use su21::hermitian::Sign;
use su21::isometry::Parameter;
use su21::{omega_powers, C64};

fn main() -> su21::Result<()> {
    let alpha = Parameter::from_pi_fraction(1, 5)?;
    let tau = C64::new(2.5, 0.7);
    let signs = [Sign::Pos, Sign::Neg];
    for (k, w) in omega_powers().iter().enumerate() {
        for s1 in signs {
            for s2 in signs {
                for s3 in signs {
                    let sigma = [s1, s2, s3];
                    let inst = SurfaceInstance::new(&alpha, w * tau, sigma);
                    let Ok(sol) = surface_solve(&inst, true) else { continue };
                    let pts = inst.points(sol)?;
                    let got = product(&[alpha, alpha, alpha], &pts)?.trace();
                    println!("lift w^{k} signs {sigma:?}: tances {sol:.6?} trace {got:.9}");
                }
            }
        }
    }
    Ok(())
}
