//! Observed samples over a ground set `[n]`.
//!
//! Files are 1-indexed (`{"ground_set_size":n,"samples":[[1,3],[2]]}`);
//! in memory every sample is a strictly increasing list of 0-based indices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n: usize,
    samples: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    ground_set_size: usize,
    samples: Vec<Vec<usize>>,
}

impl Dataset {
    /// Builds a dataset from 0-based samples.
    pub fn new(n: usize, samples: Vec<Vec<usize>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("dataset has no samples".into()));
        }
        for (t, s) in samples.iter().enumerate() {
            for w in s.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Validation(format!(
                        "sample {t} is not strictly increasing"
                    )));
                }
            }
            if let Some(&last) = s.last() {
                if last >= n {
                    return Err(Error::Validation(format!(
                        "sample {t} contains index {} outside ground set of size {n}",
                        last + 1
                    )));
                }
            }
        }
        Ok(Dataset { n, samples })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text).map_err(Error::from_json)?;
        let mut samples = Vec::with_capacity(file.samples.len());
        for (t, s) in file.samples.iter().enumerate() {
            if s.contains(&0) {
                return Err(Error::Validation(format!(
                    "sample {t} contains index 0; indices are 1-based"
                )));
            }
            samples.push(s.iter().map(|&i| i - 1).collect());
        }
        Dataset::new(file.ground_set_size, samples)
    }

    /// Canonical compact serialization (1-indexed).
    pub fn to_json_string(&self) -> String {
        let file = DatasetFile {
            ground_set_size: self.n,
            samples: self
                .samples
                .iter()
                .map(|s| s.iter().map(|&i| i + 1).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("dataset serialization cannot fail")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Vec<usize>] {
        &self.samples
    }

    pub fn has_empty_sample(&self) -> bool {
        self.samples.iter().any(|s| s.is_empty())
    }

    pub fn stats(&self) -> EmpiricalStats {
        let mut frequencies = vec![0usize; self.n];
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for s in &self.samples {
            for &i in s {
                frequencies[i] += 1;
            }
            *counts.entry(s.clone()).or_insert(0) += 1;
        }
        let m = self.m();
        let full_frequency = (0..self.n).filter(|&i| frequencies[i] == m).collect();
        EmpiricalStats {
            m,
            a_max: frequencies.iter().copied().max().unwrap_or(0),
            frequencies,
            distinct: counts.into_iter().collect(),
            full_frequency,
        }
    }

    /// Drops the listed elements from every sample and reindexes the rest.
    pub fn without_elements(&self, removed: &[usize]) -> Dataset {
        let mut keep = vec![true; self.n];
        for &i in removed {
            keep[i] = false;
        }
        let mut new_index = vec![usize::MAX; self.n];
        let mut next = 0;
        for i in 0..self.n {
            if keep[i] {
                new_index[i] = next;
                next += 1;
            }
        }
        let samples = self
            .samples
            .iter()
            .map(|s| {
                s.iter()
                    .filter(|&&i| keep[i])
                    .map(|&i| new_index[i])
                    .collect()
            })
            .collect();
        Dataset { n: next, samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub m: usize,
    /// `a_i`: number of samples containing element `i`.
    pub frequencies: Vec<usize>,
    pub a_max: usize,
    /// Distinct samples with their multiplicities, in lexicographic order.
    pub distinct: Vec<(Vec<usize>, usize)>,
    /// Elements present in every sample.
    pub full_frequency: Vec<usize>,
}

impl EmpiricalStats {
    /// Empirical probability `D(X)` of a sample.
    pub fn distribution(&self, x: &[usize]) -> f64 {
        self.distinct
            .iter()
            .find(|(s, _)| s.as_slice() == x)
            .map_or(0.0, |(_, c)| *c as f64 / self.m as f64)
    }

    pub fn has_full_frequency(&self) -> bool {
        !self.full_frequency.is_empty()
    }
}
