#![no_std]
extern crate alloc;

pub mod codec;
pub mod curve;
pub mod engel;
pub mod kem;
pub mod laurent;
pub mod padic;
pub mod params;
