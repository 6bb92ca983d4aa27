//! Acceptance checks for the solvers and the command-line driver.
//!
//! Run them with `cargo test -p msdiff-validation --test acceptance`; each
//! criterion prints one PASS or FAIL line.
