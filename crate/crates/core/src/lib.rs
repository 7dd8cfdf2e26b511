#![doc = include_str!("../README.md")]

pub mod bbs;
pub mod codec;
pub mod error;
pub mod group;
pub mod registry;
pub mod ticketing;
pub mod zkp;

pub use error::{Error, Result};
