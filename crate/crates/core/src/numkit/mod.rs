//! Dense linear algebra and statistics kernels shared by every other module.

mod cumulant;
mod eig;
mod jointdiag;
mod matrix;
mod whiten;

pub use cumulant::{
    cross_cumulant_energy, cum4_eigenmatrices, kurtosis, quadricovariance, symmetric_pairs,
    CumulantSet,
};
pub(crate) use eig::check_symmetric;
pub use eig::{sym_eig, sym_eig_jacobi, SymmetricEigen, SYMMETRY_TOLERANCE};
pub use jointdiag::{joint_diagonalize, JointDiagonalization, MAX_SWEEPS, ROTATION_THRESHOLD};
pub use matrix::{dot, norm, Matrix, SignalMatrix};
pub(crate) use whiten::second_moments;
pub use whiten::{center, covariance, principal_basis, row_means, whiten, Whitening, EIGEN_FLOOR};
