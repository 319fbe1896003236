use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{train, Technique, TrainedClassifier};
use crate::dataset::{bootstrap, Dataset, FoldSplit};
use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::matrix::Matrix;
use crate::predictions::{accuracy, LabelMatrix, SplitTag};
use crate::rng::{derive_seed, stream};

/// Which learning techniques generate the candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierMode {
    /// Perceptrons only.
    P,
    /// Cycle through the eleven techniques of [`Technique::multi`].
    M,
}

/// Technique used for candidate `index`.
pub fn technique_for(mode: ClassifierMode, index: usize) -> Technique {
    match mode {
        ClassifierMode::P => Technique::perceptron(),
        ClassifierMode::M => {
            let all = Technique::multi();
            all[index % all.len()]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub mode: ClassifierMode,
    pub pool_size: usize,
    pub candidates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolMember {
    pub candidate_index: usize,
    pub val1_accuracy: f64,
    pub classifier: TrainedClassifier,
}

/// The retained base classifiers, best validation-1 accuracy first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPool {
    pub config: PoolConfig,
    pub members: Vec<PoolMember>,
    /// How many candidates each technique contributed, by technique name.
    pub trained_per_technique: Vec<(alloc::string::String, usize)>,
}

impl ClassifierPool {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The best `n` members; equal to building the pool with `pool_size = n`.
    pub fn truncated(&self, n: usize) -> Self {
        let mut p = self.clone();
        p.members.truncate(n);
        p.config.pool_size = p.members.len();
        p
    }

    pub fn val1_accuracies(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.val1_accuracy).collect()
    }
}

/// Trains `candidates` classifiers on fresh bootstrap samples of the
/// training split and keeps the `pool_size` most accurate on validation-1,
/// ties broken by lower candidate index.
pub fn build_pool<E: Executor>(ds: &Dataset, split: &FoldSplit, cfg: &PoolConfig, exec: &E) -> Result<ClassifierPool> {
    if cfg.pool_size == 0 || cfg.pool_size > cfg.candidates {
        return Err(invalid(format!(
            "pool size {} must be in 1..={} (the candidate count)",
            cfg.pool_size, cfg.candidates
        )));
    }
    let val1_x = ds.features().select_rows(&split.val1_idx);
    let val1_y = ds.labels_at(&split.val1_idx);
    const CHUNK: usize = 128;

    let mut kept: Vec<PoolMember> = Vec::with_capacity(cfg.pool_size + CHUNK);
    let mut trained_per_technique: Vec<(alloc::string::String, usize)> = Vec::new();
    let indices: Vec<usize> = (0..cfg.candidates).collect();
    for chunk in indices.chunks(CHUNK) {
        let trained: Vec<Result<PoolMember>> = exec.map(chunk, |&index| {
            let technique = technique_for(cfg.mode, index);
            let member_seed = derive_seed(&[cfg.seed, stream::POOL, index as u64]);
            let sample = bootstrap(&split.train_idx, member_seed)?;
            let x: Matrix = ds.features().select_rows(&sample.indices);
            let y = ds.labels_at(&sample.indices);
            let classifier = train(&technique, &x, &y, ds.class_count(), derive_seed(&[member_seed, stream::TRAIN]))?;
            let val1_accuracy = accuracy(&classifier.predict(&val1_x)?, &val1_y)?;
            Ok(PoolMember { candidate_index: index, val1_accuracy, classifier })
        });
        for member in trained {
            let member = member?;
            let name = member.classifier.technique.name();
            match trained_per_technique.iter_mut().find(|(n, _)| *n == name) {
                Some((_, c)) => *c += 1,
                None => trained_per_technique.push((name, 1)),
            }
            kept.push(member);
        }
        sort_members(&mut kept);
        kept.truncate(cfg.pool_size);
    }
    Ok(ClassifierPool { config: *cfg, members: kept, trained_per_technique })
}

fn sort_members(members: &mut [PoolMember]) {
    members.sort_by(|a, b| {
        b.val1_accuracy.total_cmp(&a.val1_accuracy).then(a.candidate_index.cmp(&b.candidate_index))
    });
}

/// Cached predictions of every pool member on the three held-out splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolPredictions {
    pub val1: LabelMatrix,
    pub val2: LabelMatrix,
    pub test: LabelMatrix,
}

impl PoolPredictions {
    pub fn compute<E: Executor>(pool: &ClassifierPool, ds: &Dataset, split: &FoldSplit, exec: &E) -> Result<Self> {
        let one = |tag: SplitTag, idx: &[usize]| -> Result<LabelMatrix> {
            let x = ds.features().select_rows(idx);
            let rows: Vec<Result<Vec<usize>>> = exec.map(&pool.members, |m| m.classifier.predict(&x));
            let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
            LabelMatrix::new(tag, ds.class_count(), ds.labels_at(idx), rows)
        };
        Ok(Self {
            val1: one(SplitTag::Val1, &split.val1_idx)?,
            val2: one(SplitTag::Val2, &split.val2_idx)?,
            test: one(SplitTag::Test, &split.test_idx)?,
        })
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self { val1: self.val1.truncated(n), val2: self.val2.truncated(n), test: self.test.truncated(n) }
    }

    pub fn get(&self, tag: SplitTag) -> &LabelMatrix {
        match tag {
            SplitTag::Val1 => &self.val1,
            SplitTag::Val2 => &self.val2,
            SplitTag::Test => &self.test,
        }
    }

    /// Combined digest of the three label matrices.
    pub fn checksum(&self) -> u64 {
        derive_seed(&[self.val1.checksum(), self.val2.checksum(), self.test.checksum()])
    }
}
