//! Holds the workspace acceptance report, `tests/acceptance.rs`. Run it with
//! `cargo test -p tessgof-validation --test acceptance`.
