//! Reference solutions, error norms and stability monitors.

pub mod cases;
pub mod manufactured;
pub mod monitor;
pub mod norms;
pub mod riemann;

pub use cases::{CaseKind, CaseSetup, ExactFn, SourceFn};
pub use manufactured::{manufactured_exact, manufactured_source, Manufactured};
pub use monitor::{monitor_step, MonitorRecord};
pub use norms::{error_norms, Component, ErrorReport};
pub use riemann::{exact_riemann, ExactRiemann, RiemannCase, RiemannLabel, Wave};
