//! Verification harness (under construction).
