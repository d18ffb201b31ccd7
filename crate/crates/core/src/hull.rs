//! Facet directions of the convex hull of a point set in any dimension.
//!
//! Incremental beneath-beyond construction on a slightly joggled copy of the
//! input, so lattice points (which are massively coplanar) are in general
//! position and every facet is a simplex. Facet offsets are then recomputed
//! against the original points, which makes every returned half-space
//! contain every input point exactly. Near-parallel duplicate facets produced
//! by triangulating a flat face are merged.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{dot, l2_norm};

/// Relative size of the joggle applied before construction.
const JOGGLE: f64 = 1e-7;
/// Relative distance below which a point set is considered flat.
const FLAT_TOL: f64 = 1e-6;
/// Facets whose unit normals differ by less than this angle are merged.
const MERGE_ANGLE: f64 = 1e-5;

/// A half-space `normal . x <= offset` with unit `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hull {
    /// The points span the full dimension; facets of their hull.
    Full(Vec<Facet>),
    /// The points lie in a lower-dimensional affine subspace; their
    /// bounding sphere.
    Flat { center: Vec<f64>, radius: f64 },
}

/// Computes the hull of `points` (all of equal dimension, at least one).
pub fn convex_hull(points: &[Vec<f64>]) -> Hull {
    assert!(!points.is_empty(), "convex hull of an empty point set");
    let d = points[0].len();
    let mut unique: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !unique.contains(p) {
            unique.push(p.clone());
        }
    }
    let scale = extent(&unique).max(1.0);

    if unique.len() < d + 1 || affine_basis(&unique, FLAT_TOL * scale).len() < d + 1 {
        return bounding_sphere(&unique);
    }

    // Fixed seed: the hull of a point set is a function of the points.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6875_6c6c);
    let jog: Vec<Vec<f64>> = unique
        .iter()
        .map(|p| {
            p.iter()
                .map(|v| v + JOGGLE * scale * (rng.random::<f64>() - 0.5))
                .collect()
        })
        .collect();
    let simplices = beneath_beyond(&jog, scale);

    let mut facets: Vec<Facet> = Vec::new();
    for normal in simplices {
        let merged = facets
            .iter()
            .any(|f| angle_between(&f.normal, &normal) < MERGE_ANGLE);
        if merged {
            continue;
        }
        let offset = unique
            .iter()
            .map(|p| dot(&normal, p))
            .fold(f64::NEG_INFINITY, f64::max);
        // Slivers along lower-dimensional faces of the original set touch
        // fewer than d affinely independent points; drop them.
        let tight: Vec<Vec<f64>> = unique
            .iter()
            .filter(|p| offset - dot(&normal, p) <= FLAT_TOL * scale)
            .cloned()
            .collect();
        if affine_basis(&tight, FLAT_TOL * scale).len() < d {
            continue;
        }
        facets.push(Facet { normal, offset });
    }
    Hull::Full(facets)
}

fn extent(points: &[Vec<f64>]) -> f64 {
    let d = points[0].len();
    (0..d)
        .map(|i| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[i]), hi.max(p[i]))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).clamp(-1.0, 1.0).acos()
}

fn bounding_sphere(points: &[Vec<f64>]) -> Hull {
    let d = points[0].len();
    let mut center = vec![0.0; d];
    for p in points {
        for (c, v) in center.iter_mut().zip(p) {
            *c += v / points.len() as f64;
        }
    }
    let radius = points
        .iter()
        .map(|p| l2_norm(&sub(p, &center)))
        .fold(0.0, f64::max);
    Hull::Flat { center, radius }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Greedily picks up to `d + 1` affinely independent points: each new point
/// is the one farthest from the affine span of those already chosen.
fn affine_basis(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let d = points[0].len();
    let first = (0..points.len())
        .min_by(|&i, &j| points[i].partial_cmp(&points[j]).expect("finite points"))
        .expect("non-empty");
    let mut chosen = vec![first];
    let mut directions: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < d + 1 {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (i, p) in points.iter().enumerate() {
            let mut r = sub(p, &points[first]);
            for q in &directions {
                let proj = dot(&r, q);
                r.iter_mut().zip(q).for_each(|(v, qv)| *v -= proj * qv);
            }
            let dist = l2_norm(&r);
            if best.as_ref().is_none_or(|(_, bd, _)| dist > *bd) {
                best = Some((i, dist, r));
            }
        }
        let (i, dist, r) = best.expect("non-empty");
        if dist <= tol {
            break;
        }
        directions.push(r.iter().map(|v| v / dist).collect());
        chosen.push(i);
    }
    chosen
}

struct Simplex {
    vertices: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
}

/// Returns the outward unit normals of the simplicial facets of the hull of
/// points in general position.
fn beneath_beyond(points: &[Vec<f64>], scale: f64) -> Vec<Vec<f64>> {
    let d = points[0].len();
    let basis = affine_basis(points, 0.0);
    debug_assert_eq!(basis.len(), d + 1);
    let mut interior = vec![0.0; d];
    for &i in &basis {
        for (c, v) in interior.iter_mut().zip(&points[i]) {
            *c += v / (d + 1) as f64;
        }
    }

    let make = |vertices: Vec<usize>| -> Option<Simplex> {
        let mut normal = hyperplane_normal(points, &vertices)?;
        let mut offset = dot(&normal, &points[vertices[0]]);
        if dot(&normal, &interior) > offset {
            normal.iter_mut().for_each(|v| *v = -*v);
            offset = -offset;
        }
        Some(Simplex {
            vertices,
            normal,
            offset,
        })
    };

    let mut facets: Vec<Simplex> = Vec::new();
    for skip in 0..=d {
        let mut verts: Vec<usize> = basis
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != skip)
            .map(|(_, &i)| i)
            .collect();
        verts.sort_unstable();
        facets.extend(make(verts));
    }

    let eps = 1e-12 * scale;
    for (p_idx, p) in points.iter().enumerate() {
        if basis.contains(&p_idx) {
            continue;
        }
        let visible: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| dot(&f.normal, p) - f.offset > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut ridge_order: Vec<Vec<usize>> = Vec::new();
        for &fi in &visible {
            let verts = &facets[fi].vertices;
            for skip in 0..verts.len() {
                let ridge: Vec<usize> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let count = ridge_count.entry(ridge.clone()).or_insert(0);
                if *count == 0 {
                    ridge_order.push(ridge);
                }
                *count += 1;
            }
        }
        let mut keep = vec![true; facets.len()];
        for &fi in &visible {
            keep[fi] = false;
        }
        let mut next: Vec<Simplex> = facets
            .into_iter()
            .zip(keep)
            .filter_map(|(f, k)| k.then_some(f))
            .collect();
        for ridge in ridge_order {
            if ridge_count[&ridge] != 1 {
                continue;
            }
            let mut verts = ridge;
            verts.push(p_idx);
            verts.sort_unstable();
            next.extend(make(verts));
        }
        facets = next;
    }
    facets.into_iter().map(|f| f.normal).collect()
}

/// Unit normal of the hyperplane through `d` points in `R^d`, computed as the
/// generalized cross product of the edge vectors.
fn hyperplane_normal(points: &[Vec<f64>], vertices: &[usize]) -> Option<Vec<f64>> {
    let d = points[0].len();
    let origin = &points[vertices[0]];
    let edges: Vec<Vec<f64>> = vertices[1..].iter().map(|&v| sub(&points[v], origin)).collect();
    let mut normal = vec![0.0; d];
    for (k, slot) in normal.iter_mut().enumerate() {
        let minor: Vec<Vec<f64>> = edges
            .iter()
            .map(|e| e.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect())
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * determinant(minor);
    }
    let norm = l2_norm(&normal);
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(normal.iter().map(|v| v / norm).collect())
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    det
}
