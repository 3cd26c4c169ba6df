//! Algorithmic core of a component-sequence scene-text detector.
//!
//! Text instances are represented as ordered chains of quadrilateral
//! components. This crate builds those chains from annotated contours,
//! lays them out as frames, matches predicted chains to ground truth,
//! estimates polygon overlap by structured Monte-Carlo sampling, and
//! evaluates the position-supervised classification loss.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in `compseq-cli`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub(crate) mod math;

pub mod eval;
pub mod frames;
pub mod gradcheck;
pub mod geometry;
pub mod loss;
pub mod matching;
pub mod piou;
pub mod study;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    BBox, BSplineCurve, ComponentQuad, ComponentSequence, FormatHint, Label, Point2, Polygon,
    SideFit, TextContour,
};
