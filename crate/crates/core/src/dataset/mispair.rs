use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{ConsistencyLabel, ModalityId, SampleRecord};
use crate::error::{Error, Result};

/// Uniform permutations are redrawn until one has no fixed point. About
/// `e` draws are needed on average; hitting this cap means something is broken.
pub const MAX_DERANGEMENT_ATTEMPTS: usize = 1000;

/// Which sample donated the replaced modality to which.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingPlan {
    pub seed: u64,
    pub modality: ModalityId,
    /// sample id -> id of the sample whose embedding it now carries
    pub replacement: BTreeMap<String, String>,
}

/// Draws a uniformly random derangement of `0..n` by rejection sampling.
pub fn random_derangement<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_DERANGEMENT_ATTEMPTS {
        perm.shuffle(rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            return Ok(perm);
        }
    }
    Err(Error::DerangementNotFound(MAX_DERANGEMENT_ATTEMPTS))
}

/// Builds modality-inconsistent negatives: the `modality` embeddings are
/// moved between samples by a seeded random derangement while every other
/// modality stays in place. Outputs keep input order and are labelled
/// [`ConsistencyLabel::Mispaired`].
pub fn mispair(
    samples: &[SampleRecord],
    modality: &ModalityId,
    seed: u64,
) -> Result<(Vec<SampleRecord>, PairingPlan)> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut ids = HashSet::with_capacity(samples.len());
    for s in samples {
        if !ids.insert(s.id()) {
            return Err(Error::DuplicateId(s.id().to_owned()));
        }
        if s.get(modality).is_none() {
            return Err(Error::MissingModality {
                sample: s.id().to_owned(),
                modality: modality.clone(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perm = random_derangement(samples.len(), &mut rng)?;

    let mut replacement = BTreeMap::new();
    let out = samples
        .iter()
        .zip(&perm)
        .map(|(sample, &donor)| {
            let donor = &samples[donor];
            let mut swapped = sample.clone().with_label(ConsistencyLabel::Mispaired);
            swapped.replace(donor.get(modality).expect("checked above").clone());
            replacement.insert(sample.id().to_owned(), donor.id().to_owned());
            swapped
        })
        .collect();
    Ok((
        out,
        PairingPlan {
            seed,
            modality: modality.clone(),
            replacement,
        },
    ))
}
