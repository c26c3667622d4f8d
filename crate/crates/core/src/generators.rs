//! Random electorates.
//!
//! All randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, and
//! permutations are drawn with `SliceRandom::shuffle` (Fisher-Yates), so a
//! `(model, m, voters, seed)` tuple always yields the same votes.
//!
//! The urn model with replacement parameter `b = m!` is simulated without
//! materialising tickets: after `k` draws the urn holds `m!` original tickets
//! and `k * m!` copies of earlier draws, so the next vote is a fresh uniform
//! permutation with probability `1 / (k + 1)` and otherwise a copy of one of
//! the `k` earlier votes chosen uniformly.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::election::Vote;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Uniform,
    Urn,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Uniform => "uniform",
            Model::Urn => "urn",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Model::Uniform),
            "urn" => Ok(Model::Urn),
            other => Err(Error::InvalidInstance(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenSpec {
    pub model: Model,
    pub m: usize,
    pub voters: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(model: Model, m: usize, voters: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInstance("need at least one candidate".into()));
        }
        Ok(GenSpec { model, m, voters, seed })
    }
}

fn uniform_vote(rng: &mut ChaCha8Rng, m: usize) -> Vote {
    let mut ranking: Vec<usize> = (1..=m).collect();
    ranking.shuffle(rng);
    Vote::from_ranking_unchecked(ranking)
}

/// Independent uniformly random rankings.
pub fn gen_uniform(spec: &GenSpec) -> Vec<Vote> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.voters).map(|_| uniform_vote(&mut rng, spec.m)).collect()
}

/// Where an urn vote came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UrnSource {
    Fresh,
    /// Copy of the earlier vote at this index.
    Copy(usize),
}

/// Polya-Eggenberger urn with `b = m!`.
pub fn gen_urn(spec: &GenSpec) -> Vec<Vote> {
    gen_urn_sourced(spec).into_iter().map(|(v, _)| v).collect()
}

/// Like [`gen_urn`], also reporting how each vote was drawn.
pub fn gen_urn_sourced(spec: &GenSpec) -> Vec<(Vote, UrnSource)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut votes: Vec<(Vote, UrnSource)> = Vec::with_capacity(spec.voters);
    for k in 0..spec.voters {
        let drawn = if rng.gen_range(0..=k) == 0 {
            (uniform_vote(&mut rng, spec.m), UrnSource::Fresh)
        } else {
            let j = rng.gen_range(0..k);
            (votes[j].0.clone(), UrnSource::Copy(j))
        };
        votes.push(drawn);
    }
    votes
}

pub fn generate(spec: &GenSpec) -> Vec<Vote> {
    match spec.model {
        Model::Uniform => gen_uniform(spec),
        Model::Urn => gen_urn(spec),
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one trial, folding each component into the master seed with
/// SplitMix64: `h = mix64(h ^ part)` for `part` in `parts`, starting from
/// `h = mix64(master)`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(master), |h, &p| mix64(h ^ p))
}
