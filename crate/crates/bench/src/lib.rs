//! Criterion benchmarks for condensation, assembly and the sparse solve live
//! in `benches/`. Run them with `cargo bench -p wg-elasticity-bench`.
