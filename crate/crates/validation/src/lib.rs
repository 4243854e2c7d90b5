//! Acceptance checks for `gendermention` live in `tests/acceptance.rs`. The
//! crate sits apart from the library so that `cargo test --workspace` runs
//! every other test target before it.
