//! Rank-n non-abelian zeta invariants of elliptic curves over prime fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`ec`]: Weierstrass models over the rationals, reduction mod p and point
//!   counting (naive enumeration and baby-step giant-step behind a common
//!   [`ec::PointCounter`] trait).
//! * [`zeta`]: the exact beta recursion and everything derived from it: rank-n
//!   a-invariants, the zeta polynomial, Riemann-hypothesis and functional
//!   equation checks, and the float angle / big-Delta normalisations.
//! * [`primes`], [`family`], [`cache`]: prime enumeration, family ingestion
//!   from CSV exports and an append-only a_p cache.
//! * [`murmuration`] and [`satotate`]: the two statistics built on top.

pub mod cache;
pub mod ec;
pub mod error;
pub mod family;
pub mod fmt;
pub mod murmuration;
pub mod primes;
pub mod satotate;
pub mod svg;
pub mod zeta;

pub use error::{Error, Result};
