//! Combinatorial support: random index-set lists with verified
//! intersection regularity, projective planes, and the exhaustive
//! triangle-inequality counterexample.

pub mod index_list;
pub mod monitor;
pub mod plane;
pub mod triangle;

pub use index_list::{
    design_length, gen_index_list, verify_item1, verify_item1_seq, verify_item2_small,
    DesignCounterexample,
    DesignList, Xi,
};
pub use monitor::{runtime_item2_monitor, BlameEvent, MonitorFalsification, MonitorReport};
pub use plane::{
    line_label_bound, projective_plane, verify_plane_csv, verify_plane_properties, LabelBound,
    ProjectivePlane,
};
pub use triangle::{triangle_counterexample, TriangleCount};
