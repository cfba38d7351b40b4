//! Benchmark-only crate; see `benches/embeddings.rs`.
