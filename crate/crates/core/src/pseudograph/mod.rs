//! Pseudographs `c + u'_c` completed by their vertical jumps, and the
//! geometric checks run on them.

pub mod build;
pub mod checks;
pub mod hausdorff;

pub use build::{build_pseudograph, default_gap_tol, FullPseudograph, Jump, SubdifferentialInterval};
pub use checks::{
    coincidence_locus, covering_locate, inclusion_defect, is_c1, pullback_graph_check,
    semiconjugacy_check, vertical_order_check, C1Report, CoveringResult, OrderReport,
    PullbackReport, SemiconjugacyReport,
};
pub use hausdorff::hausdorff_distance;
