//! Seeded point generators shared by the numeric checks.
//!
//! All generators are driven by `ChaCha8Rng` so a `(seed, count)` pair always
//! produces the same points regardless of how evaluation is later spread
//! across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Uniform point on the unit sphere in `dim` dimensions (`{-1, 1}` for `dim = 1`).
pub fn unit_sphere_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `count` uniform points on the sphere of radius `radius` around `center`.
pub fn sphere_points(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| unit_sphere_point(&mut r, center.len()).iter().zip(center).map(|(u, c)| c + radius * u).collect()).collect()
}

/// Sample of the closed ball of radius `radius` about the origin: the
/// origin, the `2·dim` axis points on the boundary, and `count` uniform
/// interior points.
pub fn ball_points(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(count + 2 * dim + 1);
    pts.push(vec![0.0; dim]);
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s * radius;
            pts.push(e);
        }
    }
    let mut r = rng(seed);
    for _ in 0..count {
        let u = unit_sphere_point(&mut r, dim);
        let rad = radius * r.gen::<f64>().powf(1.0 / dim as f64);
        pts.push(u.into_iter().map(|x| x * rad).collect());
    }
    pts
}

/// Deterministic quasi-uniform mesh of the unit sphere `S^{dim-1}`.
///
/// Dimension 1 gives `{±1}`, dimension 2 equally spaced angles, dimension 3 a
/// Fibonacci spiral; higher dimensions fall back to a seeded random sample.
pub fn sphere_mesh(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![rho * a.cos(), rho * a.sin(), z]
                })
                .collect()
        }
        _ => sphere_points(&vec![0.0; dim], 1.0, count, 0x5eed_5f1e),
    }
}
