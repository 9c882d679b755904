//! The guide in `book/` is written for mdbook, which cannot build listings
//! that depend on workspace crates. Each chapter is pulled in here as a
//! module doc comment instead, so `cargo test` runs its listings as
//! doc-tests against the real library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/scheduling.md")]
pub mod scheduling {}

#[doc = include_str!("../../../book/src/imprecise.md")]
pub mod imprecise {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/checking.md")]
pub mod checking {}
