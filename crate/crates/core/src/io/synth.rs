use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rate::{Edge, KineticNetwork};

/// Parameters of a random kinetic network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n: usize,
    /// Probability of an extra edge for each unconnected pair.
    pub edge_density: f64,
    /// State energies are uniform on `[0, energy_spread]` kJ/mol.
    pub energy_spread_kjmol: f64,
    /// Barriers sit uniformly up to this many kJ/mol above the higher endpoint.
    pub barrier_spread_kjmol: f64,
    pub temperature: f64,
    pub seed: u64,
}

/// Random connected network: a random recursive tree plus independent extra
/// edges. The same parameters always give the same network.
pub fn synthesize(p: &SynthParams) -> Result<KineticNetwork> {
    if p.n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p.edge_density) {
        return Err(Error::InvalidInput(format!("edge density {} is not in [0, 1]", p.edge_density)));
    }
    if !(p.energy_spread_kjmol >= 0.0) || !(p.barrier_spread_kjmol >= 0.0) {
        return Err(Error::InvalidInput("spreads must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let energies: Vec<f64> = (0..p.n).map(|_| rng.gen::<f64>() * p.energy_spread_kjmol * 1e3).collect();
    let mut pairs = Vec::new();
    let mut linked = std::collections::HashSet::new();
    for i in 1..p.n {
        let j = rng.gen_range(0..i);
        pairs.push((j, i));
        linked.insert((j, i));
    }
    if p.edge_density > 0.0 {
        for j in 1..p.n {
            for i in 0..j {
                if !linked.contains(&(i, j)) && rng.gen::<f64>() < p.edge_density {
                    pairs.push((i, j));
                }
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(i, j)| Edge {
            i,
            j,
            barrier: energies[i].max(energies[j]) + rng.gen::<f64>() * p.barrier_spread_kjmol * 1e3,
        })
        .collect();
    let ids = (0..p.n).map(|i| format!("S{i}")).collect();
    KineticNetwork::new(ids, energies, edges, p.temperature, 1.0)
}
