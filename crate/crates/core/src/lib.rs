pub mod error;
pub mod flows;
pub mod fuchsian;
pub mod io;
pub mod monodromy;
pub mod linalg;
pub mod pairs;
pub mod poisson_so;
pub mod poly;
pub mod random;
pub mod reflection;
pub mod stokes_bracket;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use pairs::Pair;
pub use poisson_so::{DeformationPoint, SkewSystem};
pub use reflection::{ReflectionTuple, StokesMatrix};
