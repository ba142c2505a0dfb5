//! Elliptic curves over Q and over prime fields.

mod count;
mod curve;
pub mod field;

pub use count::{
    bsgs::BsgsCounter, naive::NaiveCounter, AutoCounter, CounterRegistry, PointCount,
    PointCounter, DEFAULT_NAIVE_CUTOFF,
};
pub use curve::{CurveOverQ, ReducedCurve};
