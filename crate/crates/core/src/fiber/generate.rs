use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{capsules_overlap, Fiber, FiberModel, ModelParams};
use crate::error::Result;
use crate::geometry::{self, Vec3};

/// Random sequential packing of cylinders into the cube `[0, box_edge]³`.
///
/// Every attempt draws one fiber: an axis uniform on the unit sphere and a length from
/// `N(mean_length, length_stddev)` (redrawn while it is non-positive or longer than
/// anything that fits in the box). The fiber is then dropped at up to
/// `placement_tries` centers uniform in the box; the first position where its capsule
/// stays inside the box and misses every accepted fiber is kept, otherwise the fiber
/// is discarded. Generation stops once the volume fraction reaches the target or the
/// attempts run out.
///
/// The PRNG is xoshiro256++ seeded from `params.seed`; the same params always yield the
/// same model.
pub fn generate_model(params: &ModelParams) -> Result<FiberModel> {
    params.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(params.seed);
    let lengths = Normal::new(params.mean_length, params.length_stddev)
        .expect("stddev validated non-negative");
    let max_len = params.max_fit_length();
    let box_volume = params.box_volume();

    let mut broad = BroadPhase::new(params);
    let mut fibers: Vec<Fiber> = Vec::new();
    let mut total_volume = 0.0;
    let mut attempts = 0u64;

    while attempts < params.max_attempts && total_volume / box_volume < params.target_fraction {
        attempts += 1;
        let direction = uniform_direction(&mut rng);
        let length = loop {
            let l = lengths.sample(&mut rng);
            if l > 0.0 && l <= max_len {
                break l;
            }
        };
        let half = geometry::scale(direction, 0.5 * length);
        for _ in 0..params.placement_tries {
            let center: Vec3 = [
                rng.random::<f64>() * params.box_edge,
                rng.random::<f64>() * params.box_edge,
                rng.random::<f64>() * params.box_edge,
            ];
            let candidate = Fiber {
                id: fibers.len() as u32 + 1,
                p0: geometry::sub(center, half),
                p1: geometry::add(center, half),
                radius: params.radius,
            };
            if !candidate.inside_box(params.box_edge) || broad.any_overlap(&candidate, &fibers) {
                continue;
            }
            broad.insert(&candidate, fibers.len() as u32);
            total_volume += candidate.volume();
            fibers.push(candidate);
            break;
        }
    }

    Ok(FiberModel {
        params: *params,
        fibers,
        attempts_used: attempts,
    })
}

/// Uniform direction on the unit sphere (Archimedes: z uniform in [-1, 1]).
fn uniform_direction(rng: &mut Xoshiro256PlusPlus) -> Vec3 {
    let z: f64 = rng.random::<f64>() * 2.0 - 1.0;
    let phi: f64 = rng.random::<f64>() * 2.0 * PI;
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Uniform cell grid over the box. A fiber is registered in every cell whose box may
/// intersect its capsule; two overlapping capsules always share such a cell (the
/// midpoint of their closest points lies in both).
struct BroadPhase {
    cell: f64,
    n: usize,
    buckets: Vec<Vec<u32>>,
    stamp: Vec<u32>,
    query: u32,
}

impl BroadPhase {
    fn new(params: &ModelParams) -> Self {
        let cell = (4.0 * params.radius)
            .max(params.mean_length / 16.0)
            .max(params.box_edge / 128.0);
        let n = ((params.box_edge / cell).ceil() as usize).max(1);
        Self {
            cell,
            n,
            buckets: vec![Vec::new(); n * n * n],
            stamp: Vec::new(),
            query: 0,
        }
    }

    fn for_each_cell(&self, f: &Fiber, mut visit: impl FnMut(usize)) {
        let half_diag = 0.5 * self.cell * 3f64.sqrt();
        let reach = f.radius + half_diag;
        let reach2 = reach * reach;
        let range = |a: f64, b: f64| {
            let lo = ((a.min(b) - f.radius) / self.cell).floor().max(0.0) as usize;
            let hi = ((a.max(b) + f.radius) / self.cell).floor().max(0.0) as usize;
            (lo.min(self.n - 1), hi.min(self.n - 1))
        };
        let (x0, x1) = range(f.p0[0], f.p1[0]);
        let (y0, y1) = range(f.p0[1], f.p1[1]);
        let (z0, z1) = range(f.p0[2], f.p1[2]);
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let c = [
                        (x as f64 + 0.5) * self.cell,
                        (y as f64 + 0.5) * self.cell,
                        (z as f64 + 0.5) * self.cell,
                    ];
                    if geometry::point_segment_dist2(c, f.p0, f.p1) <= reach2 {
                        visit(x + self.n * (y + self.n * z));
                    }
                }
            }
        }
    }

    fn insert(&mut self, f: &Fiber, slot: u32) {
        let mut cells = Vec::new();
        self.for_each_cell(f, |c| cells.push(c));
        for c in cells {
            self.buckets[c].push(slot);
        }
        self.stamp.push(0);
    }

    fn any_overlap(&mut self, candidate: &Fiber, fibers: &[Fiber]) -> bool {
        self.query += 1;
        let query = self.query;
        let mut cells = Vec::new();
        self.for_each_cell(candidate, |c| cells.push(c));
        for c in cells {
            for &slot in &self.buckets[c] {
                let s = slot as usize;
                if self.stamp[s] == query {
                    continue;
                }
                self.stamp[s] = query;
                if capsules_overlap(candidate, &fibers[s]) {
                    return true;
                }
            }
        }
        false
    }
}
