//! Benchmark-only crate; see `benches/pipeline_primitives.rs`.

/// Synthetic German program text with `n` sentences.
pub fn synthetic_program(n: usize) -> String {
    (0..n)
        .map(|i| {
            format!(
                "Die Stadt braucht im Jahr {} rund {} neue Projekte für Radwege und Schulen.",
                2025 + (i % 10),
                10 + (i % 90)
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}
