use alloc::vec;

use super::{IcaConfig, IcaResult};
use crate::numkit::{cum4_eigenmatrices, joint_diagonalize, Matrix};
use crate::Result;

/// JADE on whitened `z`.
///
/// Takes the `n` most significant eigen-matrices of the fourth-order
/// cumulant operator (weighted by their eigenvalues), jointly diagonalizes
/// them with an orthogonal `U` and returns `W = Uᵀ` in whitened coordinates.
/// There is no gradient step, so the only failure mode is hitting the sweep
/// limit, which is reported through the convergence flags.
pub fn jade(z: &Matrix, cfg: &IcaConfig) -> Result<IcaResult> {
    cfg.validate()?;
    let n = z.rows();
    let set = cum4_eigenmatrices(z, n)?;
    let jd = joint_diagonalize(&set)?;
    let unmixing = jd.rotation.transpose();
    let sources = &unmixing * z;
    let contrast_value = *jd.off_energy.last().expect("history starts non-empty");
    Ok(IcaResult {
        unmixing,
        sources,
        iterations: vec![jd.sweeps; n],
        converged: vec![jd.converged; n],
        contrast_value,
    })
}
