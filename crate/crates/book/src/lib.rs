//! The guide in `book/` cannot run its examples against this workspace, so
//! each chapter is included here as a module and `cargo test --doc` runs
//! its code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/groups.md")]
pub mod groups {}
#[doc = include_str!("../../../book/src/bbs.md")]
pub mod bbs {}
#[doc = include_str!("../../../book/src/registration.md")]
pub mod registration {}
#[doc = include_str!("../../../book/src/proofs.md")]
pub mod proofs {}
#[doc = include_str!("../../../book/src/tickets.md")]
pub mod tickets {}
#[doc = include_str!("../../../book/src/proxy.md")]
pub mod proxy {}
#[doc = include_str!("../../../book/src/tracing.md")]
pub mod tracing {}
#[doc = include_str!("../../../book/src/wire-format.md")]
pub mod wire_format {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
