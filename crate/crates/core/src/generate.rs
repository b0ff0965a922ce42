//! Seeded random instances: cliques with costs drawn uniformly in `1..=100`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CostVector, Edge, Instance};

pub const COST_MIN: i64 = 1;
pub const COST_MAX: i64 = 100;

/// Edge density of generated graphs. Only cliques exist today.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Density {
    #[default]
    Clique,
}

impl std::str::FromStr for Density {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clique" | "complete" => Ok(Density::Clique),
            other => Err(Error::input(format!("unsupported density '{other}'"))),
        }
    }
}

/// Clique on `n` vertices with `p` costs per edge; same seed, same instance.
pub fn generate(n: usize, p: usize, seed: u64, density: Density) -> Result<Instance> {
    if n < 2 {
        return Err(Error::input(format!("need n >= 2, got {n}")));
    }
    if p < 2 {
        return Err(Error::input(format!("need p >= 2, got {p}")));
    }
    let Density::Clique = density;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = clique_with(n, p, |_, _| rng.gen_range(COST_MIN..=COST_MAX));
    Ok(inst)
}

/// Clique whose cost components come from `cost(edge_id, objective)`;
/// edges are listed as `[1,2], [1,3], .., [1,n], [2,3], ..`.
pub fn clique_with(n: usize, p: usize, mut cost: impl FnMut(usize, usize) -> i64) -> Instance {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 1..=n {
        for v in u + 1..=n {
            let id = edges.len();
            edges.push(Edge {
                u,
                v,
                cost: CostVector::new((0..p).map(|i| cost(id, i)).collect()),
            });
        }
    }
    Instance::new(n, p, edges).expect("cliques are connected")
}
