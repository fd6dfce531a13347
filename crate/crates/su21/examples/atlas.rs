//! Wall segments and chamber statuses for a parameter given as a multiple of pi.
//! Usage: cargo run --example atlas -- 1 3

use su21::atlas::chambers;
use su21::isometry::Parameter;

fn main() -> su21::Result<()> {
    let args: Vec<i64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (n, d) = match args[..] {
        [n, d] => (n, d),
        _ => (1, 9),
    };
    let atlas = chambers(&Parameter::from_pi_fraction(n, d)?)?;
    for w in &atlas.walls {
        println!("wall {}: ({}, {}) -> ({}, {})", w.label, w.p.x, w.p.y, w.q.x, w.q.y);
    }
    for (i, c) in atlas.chambers.iter().enumerate() {
        let verts: Vec<String> = c.polygon.iter().map(|v| format!("({}, {})", v.x, v.y)).collect();
        println!("chamber {i}: {:?} {}", c.status, verts.join(" "));
    }
    println!("{:?}", atlas.summary());
    Ok(())
}
