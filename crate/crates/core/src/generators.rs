//! Random and deterministic social-network generators.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::io::square_matrix;
use crate::graphs::SocialNetwork;

/// Connected-sample attempts for Erdős–Rényi graphs.
pub const ER_MAX_ATTEMPTS: usize = 100;
/// Simple-and-connected attempts for configuration-model graphs.
pub const POWER_LAW_MAX_ATTEMPTS: usize = 1000;
/// Smallest degree drawn for power-law graphs.
pub const DEFAULT_MIN_DEGREE: usize = 3;

pub fn complete(n: usize) -> Result<SocialNetwork> {
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    SocialNetwork::from_edges(n, &edges)
}

/// Node 0 is the centre.
pub fn star(n: usize) -> Result<SocialNetwork> {
    let edges: Vec<_> = (1..n).map(|j| (0, j)).collect();
    SocialNetwork::from_edges(n, &edges)
}

pub fn path(n: usize) -> Result<SocialNetwork> {
    let edges: Vec<_> = (1..n).map(|j| (j - 1, j)).collect();
    SocialNetwork::from_edges(n, &edges)
}

/// `G(n, p)`, resampled until connected.
pub fn erdos_renyi<G: Rng + ?Sized>(n: usize, p: f64, rng: &mut G) -> Result<SocialNetwork> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidGraphSpec(format!("edge probability {p} not in (0, 1]")));
    }
    check_size(n)?;
    for _ in 0..ER_MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        match SocialNetwork::from_edges(n, &edges) {
            Ok(net) => return Ok(net),
            Err(Error::Disconnected { .. } | Error::IsolatedNode { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed {
        attempts: ER_MAX_ATTEMPTS,
    })
}

/// Configuration model on a degree sequence drawn from `p(k) ∝ k^(−exponent)`,
/// `min_degree ≤ k ≤ n − 1`. Self loops and repeated edges of the random
/// pairing are removed by degree-preserving double-edge swaps; samples that
/// cannot be repaired or are disconnected are rejected.
pub fn power_law<G: Rng + ?Sized>(
    n: usize,
    exponent: f64,
    min_degree: usize,
    rng: &mut G,
) -> Result<SocialNetwork> {
    check_size(n)?;
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(Error::InvalidGraphSpec(format!("exponent {exponent} must be positive")));
    }
    if min_degree == 0 || min_degree >= n {
        return Err(Error::InvalidGraphSpec(format!(
            "minimum degree {min_degree} must lie in [1, {}]",
            n - 1
        )));
    }
    let weights: Vec<f64> = (min_degree..n).map(|k| (k as f64).powf(-exponent)).collect();
    let dist = rand::distr::weighted::WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidGraphSpec(e.to_string()))?;
    for _ in 0..POWER_LAW_MAX_ATTEMPTS {
        let degrees: Vec<usize> = (0..n).map(|_| min_degree + rng.sample(&dist)).collect();
        if degrees.iter().sum::<usize>() % 2 == 1 {
            continue;
        }
        let mut stubs: Vec<usize> = degrees
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| std::iter::repeat_n(i, d))
            .collect();
        stubs.shuffle(rng);
        let mut edges: Vec<(usize, usize)> = stubs
            .chunks_exact(2)
            .map(|pair| (pair[0].min(pair[1]), pair[0].max(pair[1])))
            .collect();
        if !remove_defects(&mut edges, rng) {
            continue;
        }
        match SocialNetwork::from_edges(n, &edges) {
            Ok(net) => return Ok(net),
            Err(Error::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed {
        attempts: POWER_LAW_MAX_ATTEMPTS,
    })
}

/// Double-edge swaps `(a,b),(c,d) → (a,c),(b,d)` applied to defective edges
/// until the multigraph is simple. Returns false when the swap budget runs out.
fn remove_defects<G: Rng + ?Sized>(edges: &mut [(usize, usize)], rng: &mut G) -> bool {
    let m = edges.len();
    if m < 2 {
        return edges.iter().all(|&(a, b)| a != b);
    }
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for &e in edges.iter() {
        *count.entry(e).or_default() += 1;
    }
    let ordered = |x: usize, y: usize| (x.min(y), x.max(y));
    for _ in 0..100 * m {
        let bad: Vec<usize> = (0..m)
            .filter(|&i| {
                let e = edges[i];
                e.0 == e.1 || count[&e] > 1
            })
            .collect();
        if bad.is_empty() {
            return true;
        }
        let i = bad[rng.random_range(0..bad.len())];
        let j = rng.random_range(0..m);
        if i == j {
            continue;
        }
        let ((a, b), (mut c, mut d)) = (edges[i], edges[j]);
        if rng.random_bool(0.5) {
            std::mem::swap(&mut c, &mut d);
        }
        let (e1, e2) = (ordered(a, c), ordered(b, d));
        if e1.0 == e1.1 || e2.0 == e2.1 || e1 == e2 {
            continue;
        }
        if count.get(&e1).copied().unwrap_or(0) > 0 || count.get(&e2).copied().unwrap_or(0) > 0 {
            continue;
        }
        for old in [edges[i], edges[j]] {
            *count.get_mut(&old).expect("edge present") -= 1;
        }
        *count.entry(e1).or_default() += 1;
        *count.entry(e2).or_default() += 1;
        edges[i] = e1;
        edges[j] = e2;
    }
    false
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidGraphSpec(format!(
            "a connected network without self loops needs at least 2 nodes, got {n}"
        )));
    }
    Ok(())
}

/// Serializable description of a social network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete {
        n: usize,
    },
    Star {
        n: usize,
    },
    Path {
        n: usize,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    PowerLaw {
        n: usize,
        exponent: f64,
        #[serde(default)]
        min_degree: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Explicit {
        adjacency: Vec<Vec<f64>>,
    },
}

impl GraphSpec {
    /// Builds the network. A seed stored in the spec takes precedence over
    /// `seed`.
    pub fn generate(&self, seed: u64) -> Result<SocialNetwork> {
        match self {
            GraphSpec::Complete { n } => complete(*n),
            GraphSpec::Star { n } => star(*n),
            GraphSpec::Path { n } => path(*n),
            GraphSpec::ErdosRenyi { n, p, seed: s } => {
                erdos_renyi(*n, *p, &mut ChaCha8Rng::seed_from_u64(s.unwrap_or(seed)))
            }
            GraphSpec::PowerLaw {
                n,
                exponent,
                min_degree,
                seed: s,
            } => power_law(
                *n,
                *exponent,
                min_degree.unwrap_or(DEFAULT_MIN_DEGREE),
                &mut ChaCha8Rng::seed_from_u64(s.unwrap_or(seed)),
            ),
            GraphSpec::Explicit { adjacency } => {
                SocialNetwork::from_adjacency(square_matrix(adjacency)?)
            }
        }
    }

    /// Seed actually used by [`GraphSpec::generate`], if randomness is involved.
    pub fn effective_seed(&self, seed: u64) -> Option<u64> {
        match self {
            GraphSpec::ErdosRenyi { seed: s, .. } | GraphSpec::PowerLaw { seed: s, .. } => {
                Some(s.unwrap_or(seed))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_and_star() {
        let k5 = complete(5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(k5.adjacency()[(i, j)], if i == j { 0.0 } else { 1.0 });
            }
        }
        let s = star(10).unwrap();
        assert_eq!(s.degrees(), vec![9, 1, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert!(complete(1).is_err());
    }

    #[test]
    fn erdos_renyi_is_reproducible_and_connected() {
        let spec = GraphSpec::ErdosRenyi {
            n: 50,
            p: 0.1,
            seed: Some(7),
        };
        let a = spec.generate(0).unwrap();
        let b = spec.generate(99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 50);
    }

    #[test]
    fn erdos_renyi_gives_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            erdos_renyi(200, 1e-6, &mut rng),
            Err(Error::GenerationFailed { attempts: 100 })
        ));
    }

    #[test]
    fn power_law_degrees() {
        for seed in 0..5 {
            let net = GraphSpec::PowerLaw {
                n: 100,
                exponent: 2.87,
                min_degree: None,
                seed: Some(seed),
            }
            .generate(0)
            .unwrap();
            let degrees = net.degrees();
            assert!(degrees.iter().all(|&d| d >= DEFAULT_MIN_DEGREE));
            let small = degrees.iter().filter(|&&d| d <= 4).count();
            assert!(small > 50, "heavy mass at small degree, got {small}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec: GraphSpec =
            serde_json::from_str(r#"{"kind":"power_law","n":100,"exponent":2.87,"seed":3}"#).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GraphSpec>(&text).unwrap(), spec);
        assert!(serde_json::from_str::<GraphSpec>(r#"{"kind":"ring","n":4}"#).is_err());
    }
}
