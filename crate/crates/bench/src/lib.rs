//! Fixtures shared by the benchmarks.

use majorscore::dataset::join_samples;
use majorscore::embedding::SampleRecord;
use majorscore::synthgen::{generate, SynthConfig};
use majorscore::{EmbeddingFile, SynthOutput};

pub fn synth(n_samples: usize, dim: usize, divergence: f64) -> SynthOutput {
    generate(&SynthConfig {
        n_samples,
        dim,
        divergence,
        noise_scale: 0.2,
        seed: 1,
        shared_noise: false,
    })
    .expect("valid synth config")
}

pub fn samples(n_samples: usize, dim: usize) -> Vec<SampleRecord> {
    let out = synth(n_samples, dim, 0.0);
    join_samples(&[out.vision, out.text, out.audio])
        .expect("aligned files")
        .samples
}

pub fn text_file(n_samples: usize, dim: usize) -> EmbeddingFile {
    synth(n_samples, dim, 0.0).text
}
