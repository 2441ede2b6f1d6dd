//! Holds no code. The end-to-end acceptance run lives in
//! `tests/acceptance.rs` (`cargo test -p leowb-validation`).
