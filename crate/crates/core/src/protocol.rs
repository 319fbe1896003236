//! Protocol names of the form `[MP][AT][EDP]-(GA|UMDA)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::Algorithm;
use crate::fitness::FitnessKind;
use crate::init::InitMode;
use crate::learners::ClassifierMode;

/// One combination of pool type, initialization, fitness and optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub classifiers: ClassifierMode,
    pub init: InitMode,
    pub fitness: FitnessKind,
    pub algorithm: Algorithm,
}

pub const GRAMMAR: &str = "[MP][AT][EDP]-(GA|UMDA)";

impl ProtocolSpec {
    pub fn parse(name: &str) -> Result<Self> {
        let err = || Error::Protocol { name: String::from(name) };
        let upper = name.trim().to_ascii_uppercase();
        let (head, tail) = upper.split_once('-').ok_or_else(err)?;
        let head = head.as_bytes();
        if head.len() != 3 {
            return Err(err());
        }
        let classifiers = match head[0] {
            b'M' => ClassifierMode::M,
            b'P' => ClassifierMode::P,
            _ => return Err(err()),
        };
        let init = match head[1] {
            b'A' => InitMode::A,
            b'T' => InitMode::T,
            _ => return Err(err()),
        };
        let fitness = match head[2] {
            b'E' => FitnessKind::E,
            b'D' => FitnessKind::D,
            b'P' => FitnessKind::P,
            _ => return Err(err()),
        };
        let algorithm = match tail {
            "GA" => Algorithm::Ga,
            "UMDA" => Algorithm::Umda,
            _ => return Err(err()),
        };
        Ok(Self { classifiers, init, fitness, algorithm })
    }

    pub fn name(&self) -> String {
        alloc::format!("{self}")
    }

    /// All 24 combinations, in C, I, F, E nesting order.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(24);
        for classifiers in [ClassifierMode::M, ClassifierMode::P] {
            for init in [InitMode::A, InitMode::T] {
                for fitness in [FitnessKind::E, FitnessKind::D, FitnessKind::P] {
                    for algorithm in [Algorithm::Ga, Algorithm::Umda] {
                        out.push(Self { classifiers, init, fitness, algorithm });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.classifiers {
            ClassifierMode::M => 'M',
            ClassifierMode::P => 'P',
        };
        let i = match self.init {
            InitMode::A => 'A',
            InitMode::T => 'T',
        };
        let fit = match self.fitness {
            FitnessKind::E => 'E',
            FitnessKind::D => 'D',
            FitnessKind::P => 'P',
        };
        write!(f, "{c}{i}{fit}-{}", self.algorithm.name())
    }
}

impl FromStr for ProtocolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn parse_cases() {
        let s = ProtocolSpec::parse("MTD-UMDA").unwrap();
        assert_eq!(
            (s.classifiers, s.init, s.fitness, s.algorithm),
            (ClassifierMode::M, InitMode::T, FitnessKind::D, Algorithm::Umda)
        );
        let s = ProtocolSpec::parse("ptp-umda").unwrap();
        assert_eq!((s.classifiers, s.fitness), (ClassifierMode::P, FitnessKind::P));
        for bad in ["XTD-UMDA", "MTD", "MTDUMDA", "MTX-GA", "MTD-PSO", "MMTD-GA", ""] {
            assert!(ProtocolSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_has_24_distinct_round_tripping_names() {
        let all = ProtocolSpec::all();
        let names: BTreeSet<String> = all.iter().map(|s| s.name()).collect();
        assert_eq!(names.len(), 24);
        for s in all {
            assert_eq!(ProtocolSpec::parse(&s.name()).unwrap(), s);
        }
    }
}
