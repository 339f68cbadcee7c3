//! Keeps the book honest: every chapter under `book/src/` is embedded here
//! as module documentation, so `cargo test --doc` compiles and runs each
//! of its Rust code blocks against the current `slot-pricing` API. mdBook
//! alone cannot execute snippets that depend on the crate; this member
//! closes that gap with one module per chapter, which also points a failed
//! doc-test back at the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/exact-solver.md")]
pub mod exact_solver {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
