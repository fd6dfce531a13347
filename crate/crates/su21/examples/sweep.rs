//! Sweep the parameter and print where empty chambers appear.

use su21::atlas::sweep;
use su21::unfolded::q;

fn main() -> su21::Result<()> {
    let s = sweep(q(1, 216), q(143, 216), 143)?;
    for p in &s.points {
        match p.summary {
            Some(sm) => println!("{:>8} full={} empty={}", p.a, sm.full, sm.empty),
            None => println!("{:>8} transition", p.a),
        }
    }
    for t in &s.transitions {
        println!("transition near {} ({} steps away)", t.nearest, t.steps_away);
    }
    Ok(())
}
