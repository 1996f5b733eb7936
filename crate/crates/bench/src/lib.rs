//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use lpdg_core::verify::{CaseKind, CaseSetup};
use lpdg_core::{Basis, SolutionField};

/// Manufactured-solution setup, basis and initial field for degree `p` on `n` elements.
pub fn smooth_fixture(p: usize, n: usize) -> (CaseSetup, Arc<Basis>, SolutionField) {
    let setup = CaseSetup::new(CaseKind::Manufactured);
    let basis = Basis::shared(p).expect("supported degree");
    let field = setup.initial_field(&basis, n).expect("valid mesh");
    (setup, basis, field)
}
