use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hull::{convex_hull, Hull};
use crate::model::{normalize_model, Bounds, Dataset, MilpModel};

/// Draws initial hypotheses from the hull of the positive examples.
///
/// The hull is computed once; every [`sample`](Self::sample) picks `m` of
/// its facets (without replacement when there are enough) and a random unit
/// cost vector. When the positives do not span the full dimension, rows are
/// random unit half-spaces tangent to the positives' bounding sphere.
#[derive(Debug, Clone)]
pub struct CandidateSampler {
    hull: Hull,
    integer_mask: Vec<bool>,
    domain_box: Vec<Bounds>,
}

impl CandidateSampler {
    pub fn new(data: &Dataset) -> Result<Self> {
        let positives: Vec<Vec<f64>> = data.positives().map(|e| e.point.clone()).collect();
        if positives.is_empty() {
            return Err(Error::NoPositiveExamples);
        }
        Ok(Self {
            hull: convex_hull(&positives),
            integer_mask: data.integer_mask.clone(),
            domain_box: data.domain_box.clone(),
        })
    }

    pub fn hull(&self) -> &Hull {
        &self.hull
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<MilpModel> {
        if m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        let n = self.domain_box.len();
        let (a, b): (Vec<Vec<f64>>, Vec<f64>) = match &self.hull {
            Hull::Full(facets) if facets.len() >= m => rand::seq::index::sample(rng, facets.len(), m)
                .into_iter()
                .map(|i| (facets[i].normal.clone(), facets[i].offset))
                .unzip(),
            Hull::Full(facets) => (0..m)
                .map(|_| {
                    let f = &facets[rng.random_range(0..facets.len())];
                    (f.normal.clone(), f.offset)
                })
                .unzip(),
            Hull::Flat { center, radius } => (0..m)
                .map(|_| {
                    let dir = random_unit(n, rng);
                    let offset = crate::model::dot(&dir, center) + radius;
                    (dir, offset)
                })
                .unzip(),
        };
        let c = random_unit(n, rng);
        normalize_model(&MilpModel::new(
            a,
            b,
            c,
            self.integer_mask.clone(),
            self.domain_box.clone(),
        ))
    }
}

/// Hull-based initial hypothesis with `m` rows.
pub fn initial_candidate<R: Rng + ?Sized>(data: &Dataset, m: usize, rng: &mut R) -> Result<MilpModel> {
    CandidateSampler::new(data)?.sample(m, rng)
}

/// Uniform direction on the unit sphere in `R^n`.
pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = crate::model::l2_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
