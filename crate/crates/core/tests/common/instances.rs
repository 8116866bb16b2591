//! Seeded random instances for certificate and round-trip checks.

use lsbandit::env::{Environment, Marginal, ProductEnvironment};
use lsbandit::problems::kmedian::KMedianProblem;
use lsbandit::problems::matroid::{GraphicMatroid, MatroidKind, MatroidProblem};
use lsbandit::problems::scheduling::SchedulingProblem;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rounded to a grid so ties between solutions actually occur.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random_range(0..=20) as f64) / 20.0
}

fn two_point(rng: &mut ChaCha8Rng) -> Marginal<f64> {
    let a = unit(rng);
    let b = unit(rng);
    let (low, high) = if a <= b { (a, b) } else { (b, a) };
    Marginal::two_point(low, high, rng.random_range(0..=4) as f64 / 4.0).unwrap()
}

fn product_env(rng: &mut ChaCha8Rng, dim: usize) -> Environment<f64> {
    let marginals = (0..dim).map(|_| two_point(rng)).collect();
    Environment::Product(ProductEnvironment::new(marginals).unwrap())
}

pub fn scheduling(rng: &mut ChaCha8Rng, n: usize) -> (SchedulingProblem, Environment<f64>) {
    (SchedulingProblem::new(n), product_env(rng, n))
}

/// A random spanning tree on `nodes` nodes plus each remaining pair with probability 1/2.
pub fn connected_graph(rng: &mut ChaCha8Rng, nodes: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..nodes).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (1..nodes)
        .map(|i| {
            let j = rng.random_range(0..i);
            (order[j].min(order[i]), order[j].max(order[i]))
        })
        .collect();
    for u in 0..nodes {
        for v in u + 1..nodes {
            if !edges.contains(&(u, v)) && rng.random_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    edges.shuffle(rng);
    edges
}

pub fn graphic(rng: &mut ChaCha8Rng, nodes: usize) -> (MatroidProblem, Environment<f64>) {
    let edges = connected_graph(rng, nodes);
    let m = GraphicMatroid::new(nodes, edges).unwrap();
    assert!(m.is_connected());
    let env = product_env(rng, m.edges().len());
    (MatroidProblem::new(MatroidKind::Graphic(m)).unwrap(), env)
}

/// Sites are random points in the unit square, scaled so every distance is at most 1.
pub fn kmedian(
    rng: &mut ChaCha8Rng,
    points: usize,
    candidates: usize,
    k: usize,
) -> (KMedianProblem, Environment<usize>) {
    let sites = candidates + rng.random_range(0..=2);
    let xy: Vec<(f64, f64)> = (0..sites).map(|_| (rng.random(), rng.random())).collect();
    let d: Vec<Vec<f64>> = xy
        .iter()
        .map(|a| {
            xy.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() / 2f64.sqrt())
                .collect()
        })
        .collect();
    let mut ids: Vec<usize> = (0..sites).collect();
    ids.shuffle(rng);
    let cands = ids[..candidates].to_vec();
    let marginals = (0..points)
        .map(|_| {
            let support = rng.random_range(1..=3.min(sites));
            let mut locs: Vec<usize> = (0..sites).collect();
            locs.shuffle(rng);
            locs.truncate(support);
            let w: Vec<f64> = (0..support).map(|_| rng.random_range(1..=4) as f64).collect();
            let total: f64 = w.iter().sum();
            Marginal::new(locs, w.iter().map(|x| x / total).collect()).unwrap()
        })
        .collect();
    let problem = KMedianProblem::new(d, cands, points, k).unwrap();
    (problem, Environment::Product(ProductEnvironment::new(marginals).unwrap()))
}
