use serde::Serialize;

use super::{rng_for, scale, smooth_random_field, SolverConfig};
use crate::energy::{self, Problem};
use crate::error::{Error, Result};
use crate::linalg::Laplacian;
use crate::mesh::GridFunction;
use crate::model::log_space;

const RADIUS_MIN: f64 = 1e-3;
const RADIUS_MAX: f64 = 1e2;
const RADIUS_COUNT: usize = 26;

/// Mountain-pass geometry: `E ≥ ρ` on the sphere `‖u‖ = r` (on sample) and a
/// valley point `e = t*φ` with `E(e) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MPGeometry {
    pub r: f64,
    pub rho: f64,
    #[serde(skip)]
    pub e: GridFunction,
    pub t_star: f64,
    /// `(radius, sampled minimum of E on the sphere)` over the scanned grid.
    pub floors: Vec<(f64, f64)>,
}

/// Scans radii for a positive energy ridge and doubles `t` until `E(tφ) < 0`.
///
/// Sphere samples are `φ/‖φ‖` and `sphere_samples` smooth random fields, all
/// rescaled to the sampled radius. The returned `r` is the smallest scanned
/// radius whose floor is at least a tenth of the largest floor.
pub fn verify_mp_geometry(
    prob: &Problem,
    phi: &GridFunction,
    sphere_samples: usize,
    cfg: &SolverConfig,
) -> Result<MPGeometry> {
    let mesh = prob.mesh();
    mesh.check_nodal(phi.len())?;
    let phi_norm = prob.norm(phi)?;
    if phi_norm == 0.0 {
        return Err(Error::InvalidArgument("φ must be nonzero".into()));
    }

    let lap = Laplacian::new(mesh)?;
    let mut rng = rng_for(cfg.seed, 1);
    let mut dirs = vec![scale(phi.values(), 1.0 / phi_norm)];
    for _ in 0..sphere_samples {
        let w = smooth_random_field(&lap, &mut rng, mesh.node_count());
        let n = prob.norm(&GridFunction::from_vec(w.clone()))?;
        if n > 0.0 {
            dirs.push(scale(&w, 1.0 / n));
        }
    }

    let floors: Vec<(f64, f64)> = log_space(RADIUS_MIN, RADIUS_MAX, RADIUS_COUNT)
        .into_iter()
        .map(|r| {
            let floor = dirs
                .iter()
                .map(|d| energy::energy_unchecked(prob, &scale(d, r)).total)
                .fold(f64::INFINITY, f64::min);
            (r, floor)
        })
        .collect();
    let best = floors.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return Err(Error::NoMountainRidge);
    }
    let (r, rho) = *floors
        .iter()
        .find(|f| f.1 >= 0.1 * best)
        .expect("the best floor qualifies");

    let mut t = 1.0;
    loop {
        let e = energy::energy_unchecked(prob, &scale(phi.values(), t)).total;
        if e < 0.0 {
            break;
        }
        t *= 2.0;
        if t > cfg.t_max {
            return Err(Error::NoValley { t_max: cfg.t_max });
        }
    }
    Ok(MPGeometry {
        r,
        rho,
        e: phi.scaled(t),
        t_star: t,
        floors,
    })
}
