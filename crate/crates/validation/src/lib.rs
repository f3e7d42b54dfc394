//! Acceptance checks for the `bliphasu` solver. See `tests/acceptance.rs`.
