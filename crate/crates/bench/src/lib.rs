//! Criterion benchmarks for the DWDG assembly and optimal-control solves;
//! see `benches/`.
