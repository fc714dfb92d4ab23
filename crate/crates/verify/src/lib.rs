//! Holds the `acceptance` test target. The package name sorts after the other
//! workspace members, so `cargo test --workspace` reaches it last and a red
//! criterion does not stop the remaining test binaries.
