use std::time::Instant;

use rcmc::{build_canonical, run, synthesize, RunOptions, SynthParams, TimeMethod, Tolerances, Variant};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let density: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.001);
    let net = synthesize(&SynthParams {
        n,
        edge_density: density,
        energy_spread_kjmol: 100.0,
        barrier_spread_kjmol: 150.0,
        temperature: 300.0,
        seed: 7,
    })
    .unwrap();
    let sys = build_canonical(&net, &Tolerances::default()).unwrap();
    let k = &sys.rates;
    println!("n = {}, nnz = {}", k.n(), k.k().nnz());
    let mut p = vec![0.0; k.n()];
    p[0] = 1.0;
    for (variant, method) in [
        (Variant::TypeA, TimeMethod::Diag),
        (Variant::TypeA, TimeMethod::Gershgorin),
        (Variant::TypeB, TimeMethod::Diag),
        (Variant::TypeA, TimeMethod::Eigen),
    ] {
        let opts = RunOptions { variant, time_method: method, t_max: f64::INFINITY, ..Default::default() };
        let t0 = Instant::now();
        let tr = run(k, &p, &opts).unwrap();
        println!("{variant} {method}: {} entries, {:.2?}", tr.entries.len(), t0.elapsed());
    }
}
