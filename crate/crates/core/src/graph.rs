//! The growing tree and its one-step dynamics.

use rand::Rng;

use crate::choice::ChoiceVector;
use crate::error::Result;
use crate::model::{InitialLocations, ModelConfig};
use crate::weights::WeightIndex;

pub type VertexId = usize;

/// One draw of the `r`-sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub vertex: VertexId,
    pub location: f64,
    pub draw: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub vertex: VertexId,
    pub location: f64,
    pub target: VertexId,
}

#[derive(Debug, Clone)]
pub struct GraphState {
    alpha: f64,
    n0: usize,
    locations: Vec<f64>,
    degrees: Vec<u32>,
    edges: u64,
    steps: u64,
    index: WeightIndex,
    max_vertex: VertexId,
}

impl GraphState {
    /// Path on `config.n0` vertices. Random locations are drawn from `rng`.
    pub fn init<R: Rng>(config: &ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let locations = match &config.initial_locations {
            InitialLocations::Explicit(locs) => locs.clone(),
            InitialLocations::Random => {
                let mut locs: Vec<f64> = Vec::with_capacity(config.n0);
                while locs.len() < config.n0 {
                    let x: f64 = rng.random();
                    if x > 0.0 && !locs.contains(&x) {
                        locs.push(x);
                    }
                }
                locs
            }
        };
        let capacity = config.n0 + usize::try_from(config.steps).unwrap_or(usize::MAX / 2);
        Ok(Self::path(config.alpha, locations, capacity))
    }

    /// Path graph `0 - 1 - ... - (n-1)` with the given locations.
    ///
    /// Callers are responsible for `alpha > -1` and distinct locations.
    pub fn path(alpha: f64, locations: Vec<f64>, capacity: usize) -> Self {
        let n = locations.len();
        let degrees = (0..n)
            .map(|i| if i == 0 || i + 1 == n { 1 } else { 2 })
            .collect();
        Self::from_tree(alpha, locations, degrees, capacity)
    }

    /// A state from an arbitrary tree's degree sequence.
    pub fn from_tree(alpha: f64, locations: Vec<f64>, degrees: Vec<u32>, capacity: usize) -> Self {
        assert_eq!(locations.len(), degrees.len());
        assert!(degrees.len() >= 2 && degrees.iter().all(|&d| d >= 1));
        let degree_sum: u64 = degrees.iter().map(|&d| d as u64).sum();
        assert_eq!(degree_sum, 2 * (degrees.len() as u64 - 1), "not a tree degree sequence");
        let mut index = WeightIndex::with_capacity(capacity.max(degrees.len()));
        for &d in &degrees {
            index.push(d as f64 + alpha);
        }
        let max_vertex = (0..degrees.len())
            .fold(0, |best, v| if degrees[v] > degrees[best] { v } else { best });
        Self {
            alpha,
            n0: degrees.len(),
            edges: degrees.len() as u64 - 1,
            locations,
            degrees,
            steps: 0,
            index,
            max_vertex,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of growth steps taken.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub fn location(&self, v: VertexId) -> f64 {
        self.locations[v]
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degrees[v]
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn weight(&self, v: VertexId) -> f64 {
        self.degrees[v] as f64 + self.alpha
    }

    /// `sum(deg + alpha) = 2 E + alpha V`, from integer counts.
    pub fn total_weight(&self) -> f64 {
        (2 * self.edges) as f64 + self.alpha * self.vertex_count() as f64
    }

    /// Weight sum as maintained by the sampling index.
    pub fn indexed_weight(&self) -> f64 {
        self.index.total()
    }

    /// Current maximum-degree vertex (earliest to reach the maximum).
    pub fn max_degree_vertex(&self) -> VertexId {
        self.max_vertex
    }

    /// Weight share `(deg(v) + alpha) / total`.
    pub fn share(&self, v: VertexId) -> f64 {
        self.weight(v) / self.total_weight()
    }

    /// Draw a vertex with probability proportional to `deg + alpha`.
    pub fn sample_vertex<R: Rng>(&self, rng: &mut R) -> VertexId {
        self.index.sample(rng.random())
    }

    /// Normalised weight of vertices located at or below `x`.
    pub fn psi(&self, x: f64) -> f64 {
        let mut degree_sum = 0u64;
        let mut count = 0u64;
        for (loc, &deg) in self.locations.iter().zip(&self.degrees) {
            if *loc <= x {
                degree_sum += deg as u64;
                count += 1;
            }
        }
        (degree_sum as f64 + self.alpha * count as f64) / self.total_weight()
    }

    /// Draw the `r`-sample for the next step into `buf`.
    pub fn draw_samples<R: Rng>(&self, r: usize, rng: &mut R, buf: &mut Vec<Sample>) {
        buf.clear();
        for draw in 0..r {
            let vertex = self.sample_vertex(rng);
            buf.push(Sample {
                vertex,
                location: self.locations[vertex],
                draw,
            });
        }
    }

    /// One growth step: sample, choose by rank, attach a fresh vertex.
    pub fn step<R: Rng>(&mut self, xi: &ChoiceVector, rng: &mut R, buf: &mut Vec<Sample>) -> StepRecord {
        self.draw_samples(xi.r(), rng, buf);
        let target = select_rank(buf, xi, rng);
        let location: f64 = rng.random();
        let vertex = self.attach(target, location);
        StepRecord {
            vertex,
            location,
            target,
        }
    }

    /// Add a vertex at `location` joined to `target`.
    pub fn attach(&mut self, target: VertexId, location: f64) -> VertexId {
        let vertex = self.degrees.len();
        self.degrees.push(1);
        self.locations.push(location);
        self.index.push(1.0 + self.alpha);
        self.degrees[target] += 1;
        self.index.add(target, 1.0);
        if self.degrees[target] > self.degrees[self.max_vertex] {
            self.max_vertex = target;
        }
        self.edges += 1;
        self.steps += 1;
        vertex
    }
}

/// Order samples by location, ties by draw order, and pick rank `k` with
/// probability `xi_k`. A uniform is consumed only when `xi` is not a basis
/// vector.
pub fn select_rank<R: Rng>(samples: &mut [Sample], xi: &ChoiceVector, rng: &mut R) -> VertexId {
    assert_eq!(samples.len(), xi.r(), "need exactly r samples");
    let k = match xi.basis_rank() {
        Some(k) => k,
        None => xi.rank_for(rng.random()),
    };
    let (_, chosen, _) = samples.select_nth_unstable_by(k - 1, |a, b| {
        a.location
            .total_cmp(&b.location)
            .then(a.draw.cmp(&b.draw))
    });
    chosen.vertex
}
