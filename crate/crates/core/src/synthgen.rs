//! Synthetic trimodal embedding spaces with a tunable amount of disagreement
//! between the spaces vision and audio are encoded into.
//!
//! Every sample draws a concept `c` uniformly on the unit sphere. Text is `c`
//! itself. At divergence 0 vision and audio are also `c`, all in one unified
//! space. As divergence grows, each of them is carried along the great circle
//! from `c` towards its own random orthogonal image `Q_m c`: vision by half the
//! divergence, audio by the full divergence. Text and vision then live in
//! space `synth-a` and audio in `synth-b`. Finally each modality gets isotropic
//! Gaussian noise and is renormalized.
//!
//! The two orthogonal maps are drawn first from the seed, before any
//! concept, so runs that differ only in divergence share their concepts.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{EmbeddingFile, EmbeddingRecord};
use crate::embedding::{ModalityId, SpaceId};
use crate::error::{Error, Result};

pub const UNIFIED_SPACE: &str = "synth-unified";
pub const SPACE_A: &str = "synth-a";
pub const SPACE_B: &str = "synth-b";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_samples: usize,
    pub dim: usize,
    /// 0 = one unified space, 1 = fully divergent spaces.
    pub divergence: f64,
    /// Standard deviation of the per-coordinate noise added before renormalizing.
    pub noise_scale: f64,
    pub seed: u64,
    /// Use one noise draw for all modalities of a sample.
    pub shared_noise: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            dim: 64,
            divergence: 0.0,
            noise_scale: 0.2,
            seed: 0,
            shared_noise: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_samples must be >= 2, got {}",
                self.n_samples
            )));
        }
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "dim must be >= 2, got {}",
                self.dim
            )));
        }
        if !(0.0..=1.0).contains(&self.divergence) {
            return Err(Error::InvalidConfig(format!(
                "divergence must be in [0, 1], got {}",
                self.divergence
            )));
        }
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise_scale must be finite and non-negative, got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }

    /// The config as one JSON line, written next to generated files.
    pub fn to_json_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("config is always serializable");
        line.push('\n');
        line
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub vision: EmbeddingFile,
    pub text: EmbeddingFile,
    pub audio: EmbeddingFile,
}

impl SynthOutput {
    pub fn files(&self) -> [&EmbeddingFile; 3] {
        [&self.vision, &self.text, &self.audio]
    }
}

fn gaussian_vec(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of R's diagonal folded into Q.
fn random_orthogonal(rng: &mut impl Rng, dim: usize) -> DMatrix<f64> {
    let gaussian = DMatrix::from_row_slice(dim, dim, &gaussian_vec(rng, dim * dim));
    let qr = gaussian.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < crate::embedding::ZERO_NORM_THRESHOLD {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Moves the unit vector `from` a fraction `t` of the way along the great
/// circle towards the unit vector `to`.
fn slerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    let cos = from
        .iter()
        .zip(to)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .clamp(-1.0, 1.0);
    let omega = cos.acos();
    let sin = omega.sin();
    if sin < 1e-9 {
        // Coincident (or antipodal, a measure-zero case): fall back to a
        // straight blend, which is exact for coincident vectors.
        let blend: Vec<f64> = from
            .iter()
            .zip(to)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        return unit(&blend).unwrap_or_else(|_| from.to_vec());
    }
    let wa = ((1.0 - t) * omega).sin() / sin;
    let wb = (t * omega).sin() / sin;
    from.iter().zip(to).map(|(a, b)| wa * a + wb * b).collect()
}

fn drift(concept: &[f64], map: &DMatrix<f64>, fraction: f64) -> Vec<f64> {
    if fraction == 0.0 {
        return concept.to_vec();
    }
    let image = map * DVector::from_column_slice(concept);
    slerp(concept, image.as_slice(), fraction)
}

fn encode(base: &[f64], noise: &[f64], scale: f64) -> Result<Vec<f32>> {
    let noisy: Vec<f64> = base.iter().zip(noise).map(|(b, e)| b + scale * e).collect();
    Ok(unit(&noisy)?.into_iter().map(|v| v as f32).collect())
}

pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vision_map = random_orthogonal(&mut rng, dim);
    let audio_map = random_orthogonal(&mut rng, dim);

    let width = (config.n_samples - 1).to_string().len().max(6);
    let mut vision = Vec::with_capacity(config.n_samples);
    let mut text = Vec::with_capacity(config.n_samples);
    let mut audio = Vec::with_capacity(config.n_samples);
    for i in 0..config.n_samples {
        let id = format!("synth-{i:0width$}");
        let concept = unit(&gaussian_vec(&mut rng, dim))?;
        let (noise_v, noise_t, noise_a) = if config.shared_noise {
            let e = gaussian_vec(&mut rng, dim);
            (e.clone(), e.clone(), e)
        } else {
            (
                gaussian_vec(&mut rng, dim),
                gaussian_vec(&mut rng, dim),
                gaussian_vec(&mut rng, dim),
            )
        };
        let v = drift(&concept, &vision_map, config.divergence / 2.0);
        let a = drift(&concept, &audio_map, config.divergence);
        vision.push(EmbeddingRecord {
            id: id.clone(),
            values: encode(&v, &noise_v, config.noise_scale)?,
        });
        text.push(EmbeddingRecord {
            id: id.clone(),
            values: encode(&concept, &noise_t, config.noise_scale)?,
        });
        audio.push(EmbeddingRecord {
            id,
            values: encode(&a, &noise_a, config.noise_scale)?,
        });
    }

    let (space_vt, space_a) = if config.divergence == 0.0 {
        (UNIFIED_SPACE, UNIFIED_SPACE)
    } else {
        (SPACE_A, SPACE_B)
    };
    let file = |m, s: &str, records| EmbeddingFile::new(m, SpaceId::new(s)?, dim, records);
    Ok(SynthOutput {
        vision: file(ModalityId::vision(), space_vt, vision)?,
        text: file(ModalityId::text(), space_vt, text)?,
        audio: file(ModalityId::audio(), space_a, audio)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::encode_emb1;
    use crate::embedding::cosine;

    fn cfg(n: usize, dim: usize, divergence: f64, noise: f64, shared: bool) -> SynthConfig {
        SynthConfig {
            n_samples: n,
            dim,
            divergence,
            noise_scale: noise,
            seed: 11,
            shared_noise: shared,
        }
    }

    #[test]
    fn orthogonal_maps_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_orthogonal(&mut rng, 16);
        let eye = q.transpose() * &q;
        assert!((eye - DMatrix::identity(16, 16)).abs().max() < 1e-12);
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        assert!(slerp(&a, &b, 0.0)
            .iter()
            .zip(&a)
            .all(|(x, y)| (x - y).abs() < 1e-15));
        assert!(slerp(&a, &b, 1.0)
            .iter()
            .zip(&b)
            .all(|(x, y)| (x - y).abs() < 1e-15));
        let mid = slerp(&a, &b, 0.5);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((mid[0] - h).abs() < 1e-15 && (mid[1] - h).abs() < 1e-15);
        assert_eq!(slerp(&a, &a, 0.3), a.to_vec());
    }

    #[test]
    fn shared_noise_unified_gives_equal_pair_scores() {
        let out = generate(&cfg(50, 8, 0.0, 0.3, true)).unwrap();
        for i in 0..50 {
            let v = &out.vision.records()[i].values;
            let t = &out.text.records()[i].values;
            let a = &out.audio.records()[i].values;
            assert_eq!(
                cosine(v, t).unwrap().to_bits(),
                cosine(t, a).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn noiseless_unified_is_all_ones() {
        let out = generate(&cfg(20, 8, 0.0, 0.0, false)).unwrap();
        for i in 0..20 {
            let [v, t, a] = out.files().map(|f| &f.records()[i].values);
            for (x, y) in [(v, t), (t, a), (v, a)] {
                assert!((cosine(x, y).unwrap() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn vectors_are_unit_norm() {
        let out = generate(&cfg(100, 32, 0.6, 0.2, false)).unwrap();
        for f in out.files() {
            for r in f.records() {
                let n = crate::embedding::norm(&r.values);
                assert!((n - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn spaces_follow_divergence() {
        let unified = generate(&cfg(2, 4, 0.0, 0.2, false)).unwrap();
        assert!(unified
            .files()
            .iter()
            .all(|f| f.space().as_str() == UNIFIED_SPACE));
        let split = generate(&cfg(2, 4, 0.5, 0.2, false)).unwrap();
        assert_eq!(split.vision.space().as_str(), SPACE_A);
        assert_eq!(split.text.space().as_str(), SPACE_A);
        assert_eq!(split.audio.space().as_str(), SPACE_B);
    }

    #[test]
    fn output_is_deterministic() {
        let c = cfg(40, 16, 0.7, 0.2, false);
        let a = generate(&c).unwrap();
        let b = generate(&c).unwrap();
        for (x, y) in a.files().iter().zip(b.files()) {
            assert_eq!(encode_emb1(x).unwrap(), encode_emb1(y).unwrap());
        }
        let other = generate(&SynthConfig { seed: 12, ..c }).unwrap();
        assert_ne!(
            encode_emb1(&a.text).unwrap(),
            encode_emb1(&other.text).unwrap()
        );
    }

    #[test]
    fn concepts_are_shared_across_divergence() {
        let a = generate(&cfg(10, 8, 0.0, 0.2, false)).unwrap();
        let b = generate(&cfg(10, 8, 1.0, 0.2, false)).unwrap();
        assert_eq!(a.text.records(), b.text.records());
    }

    #[test]
    fn invalid_configs() {
        for bad in [
            cfg(1, 8, 0.0, 0.2, false),
            cfg(10, 1, 0.0, 0.2, false),
            cfg(10, 8, 1.5, 0.2, false),
            cfg(10, 8, f64::NAN, 0.2, false),
            cfg(10, 8, 0.5, -0.1, false),
        ] {
            assert!(matches!(generate(&bad), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn config_echo_is_one_json_line() {
        let line = cfg(10, 8, 0.25, 0.2, false).to_json_line();
        assert!(line.ends_with('\n') && line.matches('\n').count() == 1);
        let back: SynthConfig = serde_json::from_str(&line).unwrap();
        assert_eq!(back, cfg(10, 8, 0.25, 0.2, false));
    }
}
