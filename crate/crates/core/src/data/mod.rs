//! Dataset sources: seeded synthetic generators and LIBSVM text files.

pub mod libsvm;
pub mod synthetic;

pub use libsvm::{parse_libsvm, read_libsvm_file, write_libsvm};
pub use synthetic::{gen_gaussian_classification, gen_linear_regression, RegressionData, SyntheticSpec};
