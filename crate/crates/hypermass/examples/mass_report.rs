//! The full construction end to end: collar, lapse, exterior extension,
//! weight transport, monotone mass series, and the classified mass vector.
//!
//! Run: cargo run -p hypermass --example mass_report

use hypermass::pipeline::run_pipeline;
use hypermass::scenario::Scenario;

fn main() {
    let scenario = Scenario::from_toml_str(
        r#"
[surface]
kind = "perturbed_sphere"
r0 = 1.0
amp = 0.05
mode = 2
cells = 96

[boundary]
mode = "scale"
alpha = 0.8

[flow]
t_end = 1.0
dt = 1e-3
delta_convex = 0.5

[exterior]
rho_max = 8.0
levels = 640
"#,
    )
    .unwrap();

    println!("=== Full pipeline: perturbed sphere, boundary H = 0.8 H_0 ===\n");
    let out = run_pipeline(&scenario).unwrap();

    let s = &out.series[4]; // zeta = (e_z; 1)
    println!("monotone series for zeta = (0, 0, 1; 1):");
    println!("  interior m(t):");
    for &frac in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let i = ((out.collar.n_slices() - 1) as f64 * frac) as usize;
        println!(
            "    t = {:<6.3}  m = {:.10}",
            s.interior[i].0, s.interior[i].1
        );
    }
    println!("  exterior m(rho):");
    for &frac in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let l = ((out.exterior.fol.n_levels() - 1) as f64 * frac) as usize;
        println!(
            "    rho = {:<6.3} m = {:.10}",
            s.exterior[l].0, s.exterior[l].1
        );
    }
    println!(
        "  limit integrand at rho_max: {:.6e} (nonpositive expected)",
        s.limit.last().unwrap().1
    );

    let r = &out.report;
    println!(
        "\nper-direction verdicts ({} test directions):",
        r.zetas.len()
    );
    let monotone = r
        .zetas
        .iter()
        .filter(|z| z.interior_monotone && z.exterior_monotone)
        .count();
    println!(
        "  monotone interior & exterior: {monotone}/{}",
        r.zetas.len()
    );
    println!(
        "  m(0) range over directions: [{:.6}, {:.6}]",
        r.zetas.iter().map(|z| z.m0).fold(f64::INFINITY, f64::min),
        r.zetas
            .iter()
            .map(|z| z.m0)
            .fold(f64::NEG_INFINITY, f64::max)
    );

    println!("\nmass vector (x, y, z; t): {:?}", r.mass_vector);
    println!("causal class: {}", r.causal_class);
    println!("all checks passed: {}", r.passed);
    for note in &r.notes {
        println!("  note: {note}");
    }
}
