//! Acceptance criteria for `quapi`, kept in their own package so they run
//! after the core suites. See `tests/acceptance.rs`.
