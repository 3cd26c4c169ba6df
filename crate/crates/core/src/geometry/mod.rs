//! Polygon primitives, B-spline side fitting, and decomposition of text
//! contours into ordered quadrilateral component sequences.

mod bezier;
mod bspline;
mod component;
mod contour;
mod point;
mod polygon;
mod resample;

pub use bezier::{bezier_fit_side, CubicBezier};
pub use bspline::{bspline_basis, BSplineCurve};
pub use component::{assemble, decompose, decompose_with, ComponentQuad, ComponentSequence, Label};
pub use contour::{split_long_sides, FormatHint, TextContour};
pub use point::{BBox, Point2};
pub use polygon::Polygon;
pub use resample::{resample_side, resample_side_with, SideFit, ARC_SEGMENTS_PER_SPAN};
