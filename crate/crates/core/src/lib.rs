//! Tension and bitension fields of the normal bundle of a surface in `E³`,
//! immersed in `E⁶ = C³` as a Lagrangian submanifold by `(x, t) ↦ (x, tN)`.

// Index-heavy tensor code reads better with explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod bitension;
pub mod classify;
pub mod error;
pub mod frame;
pub mod jet;
pub mod normal_bundle;
pub mod oracle;
pub mod report;
pub mod surface;
pub mod vector;

pub use error::{Error, Result};
pub use jet::{Jet, Jet2, JetError, Scalar, Var};
pub use surface::{Domain, FundamentalForms, SurfaceKind, SurfacePatch};
pub use frame::{principal_data, principal_data_at, PrincipalData};
pub use normal_bundle::{nb_frame, tension, NBFrame, NBPoint};
pub use bitension::{bitension_t0, e3_component, leading_term_check, tangential_conditions, TangentialResiduals};
pub use classify::{classify, SampleGrid, SurfaceClass, Verdict};
pub use oracle::{oracle_bitension, oracle_e3, oracle_tension, ChartGeometry};
pub use report::{run, Format, Mode, Report, RunConfig};
