//! Level-one cusp forms: exact q-expansions, Hecke matrices, eigenforms.

pub mod cache;
mod charpoly;
pub mod eigen;
pub mod hecke;
pub mod miller;
pub mod qexp;
mod roots;

pub use charpoly::charpoly_bounded;
pub use cache::{load_or_build, CacheStatus};
pub use eigen::{
    default_nterms, eigenforms, hecke_tolerance, lambda, verify_hecke, Eigenform, HeckeReport,
    DEFAULT_PRECISION_BITS,
};
pub use hecke::{hecke_matrix, HeckeMatrix};
pub use miller::miller_basis;
pub use qexp::{delta_qexp, dim_cusp_forms, eisenstein_qexp, QExpansion};
