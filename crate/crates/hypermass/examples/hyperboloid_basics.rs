//! Lorentz algebra on R^{n,1} and the hyperboloid model: position vectors,
//! causal classification, and the null-direction weight.
//!
//! Run: cargo run -p hypermass --example hyperboloid_basics

use hypermass::minkowski::{
    classify_causal, hyperboloid_point, lorentz_inner, spinor_weight, AmbientSpace, LorentzVector,
};

fn main() {
    let amb = AmbientSpace::new(3, 1.0).unwrap();
    println!("=== Hyperboloid model of H^3 with k = 1 ===\n");

    // Points at a few geodesic radii along different directions.
    let dirs = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6, 0.0, 0.8]];
    println!("position vectors X = (sinh(kr)/k dir ; cosh(kr)/k):");
    for r in [0.0, 1.0, 3.0] {
        for dir in &dirs[..if r == 0.0 { 1 } else { 3 }] {
            let x = hyperboloid_point(&amb, dir, r).unwrap();
            let q = lorentz_inner(&x, &x).unwrap();
            println!(
                "  r = {r:3.1}, dir = [{:+.1} {:+.1} {:+.1}]  X = [{:+.4} {:+.4} {:+.4}; {:.4}]  <X,X> = {q:+.12}",
                dir[0], dir[1], dir[2], x.spatial[0], x.spatial[1], x.spatial[2], x.time
            );
        }
    }

    println!("\ncausal classification (relative tolerance 1e-12):");
    let samples = [
        (LorentzVector::new(vec![0.0, 0.0, 0.0], 2.0), "pure time"),
        (LorentzVector::new(vec![0.0, 0.0, 1.0], 1.0), "null ray"),
        (LorentzVector::new(vec![1.0, 0.0, 0.0], 0.0), "pure space"),
        (LorentzVector::new(vec![0.3, 0.1, 0.2], -1.0), "past cone"),
        (LorentzVector::zero(3), "origin"),
    ];
    for (v, label) in &samples {
        println!("  {label:10} -> {}", classify_causal(v, 1e-12).kind);
    }

    println!("\nnull-direction weight -2k X.zeta (positive on the whole hyperboloid):");
    let zeta = LorentzVector::new(vec![0.0, 0.0, 1.0], 1.0);
    for r in [0.0, 0.5, 1.0, 2.0] {
        for dir in &dirs {
            let x = hyperboloid_point(&amb, dir, r).unwrap();
            let w = spinor_weight(&amb, &x, &zeta).unwrap();
            print!(
                "  w(r={r:.1}, dir{})={w:.5}",
                dirs.iter().position(|d| d == dir).unwrap()
            );
        }
        println!();
    }
    println!(
        "\n(2 cosh(1) = {:.9} appears for the orthogonal direction at r = 1)",
        2.0 * 1.0f64.cosh()
    );
}
