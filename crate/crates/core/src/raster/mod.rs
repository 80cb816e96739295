//! CPU splat renderer with per-pixel contribution records.

mod impact;
mod project;
mod render;
pub mod sh;

pub use impact::{analyze, compute_importance, mse_against, ImpactAnalysis};
pub use project::{project_splat, Projected2D, COV_DILATION, JACOBIAN_FOV_LIMIT, NEAR_CLIP};
pub use render::{
    render, render_all, render_with_records, Contribution, Frame, PixelRecord, ALPHA_MAX, ALPHA_MIN,
    T_RECORD_FLOOR, T_TERMINATE,
};
