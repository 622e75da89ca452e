use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, Momentum3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericityResult {
    /// `lambda_1 >= lambda_2 >= lambda_3`, summing to one.
    pub eigenvalues: [f64; 3],
    pub sphericity: f64,
    /// Unit eigenvector of `lambda_1`, oriented to positive z (then y, x).
    pub axis: Momentum3,
    pub r: u32,
}

/// Generalised sphericity with momentum weights `|p|^(r-2)`, normalised to
/// unit trace. `r = 1` is the linearised (collinear-safe) tensor.
pub fn sphericity(event: &Event, r: u32) -> Result<SphericityResult> {
    if r != 1 && r != 2 {
        return Err(Error::InvalidConfig(format!("sphericity power r must be 1 or 2, got {r}")));
    }
    let mut tensor = Matrix3::<f64>::zeros();
    for p in event.momenta() {
        let norm = p.norm();
        if norm == 0.0 {
            continue;
        }
        let weight = norm.powi(r as i32 - 2);
        let v = Vector3::new(p.px, p.py, p.pz);
        tensor += v * v.transpose() * weight;
    }
    let trace = tensor.trace();
    if !(trace > 0.0) {
        return Err(Error::ZeroMomentum);
    }
    tensor /= trace;

    let eig = SymmetricEigen::new(tensor);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.map(|k| eig.eigenvalues[k].max(0.0));

    let vecs: Vec<Vector3<f64>> = order.iter().map(|&k| eig.eigenvectors.column(k).into()).collect();
    debug_assert!(
        vecs[0].dot(&vecs[1]).abs() < 1e-9
            && vecs[0].dot(&vecs[2]).abs() < 1e-9
            && vecs[1].dot(&vecs[2]).abs() < 1e-9,
        "eigenvectors not orthogonal"
    );

    let lead = vecs[0].normalize();
    let mut axis = Momentum3::new(lead.x, lead.y, lead.z);
    let flip = [axis.pz, axis.py, axis.px]
        .into_iter()
        .find(|c| *c != 0.0)
        .is_some_and(|c| c < 0.0);
    if flip {
        axis = -axis;
    }

    Ok(SphericityResult {
        eigenvalues,
        sphericity: 1.5 * (eigenvalues[1] + eigenvalues[2]),
        axis,
        r,
    })
}
