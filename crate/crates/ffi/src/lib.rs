//! C ABI for dunklsb (placeholder).
