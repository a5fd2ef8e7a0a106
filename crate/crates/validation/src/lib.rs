//! Test-only package. The acceptance suite lives in `tests/acceptance.rs`
//! and runs after the core crate's own tests.
