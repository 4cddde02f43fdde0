//! End-to-end reproductions built on `catloop-core`.

pub mod fig1;
pub mod roundtrip;
pub mod table1;
