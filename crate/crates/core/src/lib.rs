pub mod bump;
pub mod error;
pub mod experiments;
pub mod gallery;
pub mod germs;
pub mod jet;
pub mod operator;
pub mod sampling;
pub mod scale;

pub use error::{LabError, Result};
