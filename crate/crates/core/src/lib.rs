#![cfg_attr(not(test), no_std)]
extern crate alloc;

pub mod boundary;
pub mod error;
pub mod linalg;
pub mod model;
pub mod state;
pub mod tree;

pub use error::{Error, Result};
