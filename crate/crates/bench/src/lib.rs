//! Benchmarks only; see `benches/`. Run with `cargo bench -p wllab-bench`.
