//! Parameter exchange and aggregation: named tensor sets, weighted averaging,
//! and the binary formats they travel in.

pub mod codec;
pub mod fdlc;

pub use codec::{decode, encode, read_frame, write_frame, CodecError, FedMessage, MessageKind,
                DEFAULT_FRAME_CAP};
pub use fdlc::{read_parameter_set, write_parameter_set, FdlcError};

use crate::parallel;
use crate::tensor::{Element, Tensor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FedError {
    #[error("duplicate parameter name '{0}'")]
    DuplicateName(String),
    #[error("parameter sets not aligned at '{name}': {reason}")]
    Misaligned { name: String, reason: String },
    #[error("fedavg needs at least one update")]
    NoUpdates,
}

/// How client updates are weighted during aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    SampleCount,
    Uniform,
}

/// Ordered, uniquely named collection of tensors: the unit the protocol
/// exchanges. Order is canonical (model-defined) and two sets are aligned iff
/// their name lists and shapes match exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet<E: Element = f32> {
    entries: Vec<(String, Tensor<E>)>,
}

impl<E: Element> ParameterSet<E> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn from_entries(entries: Vec<(String, Tensor<E>)>) -> Result<Self, FedError> {
        for (i, (name, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(n, _)| n == name) {
                return Err(FedError::DuplicateName(name.clone()));
            }
        }
        Ok(Self { entries })
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor<E>) -> Result<(), FedError> {
        let name = name.into();
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(FedError::DuplicateName(name));
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<E>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<E>)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn entries(&self) -> &[(String, Tensor<E>)] {
        &self.entries
    }

    /// Total element count across all tensors.
    pub fn element_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Error at the first name/shape disagreement, if any.
    pub fn check_aligned(&self, other: &Self) -> Result<(), FedError> {
        for (i, (name, tensor)) in self.entries.iter().enumerate() {
            match other.entries.get(i) {
                None => {
                    return Err(FedError::Misaligned {
                        name: name.clone(),
                        reason: "missing in other set".into(),
                    })
                }
                Some((oname, otensor)) => {
                    if oname != name {
                        return Err(FedError::Misaligned {
                            name: name.clone(),
                            reason: format!("other set has '{oname}' at this position"),
                        });
                    }
                    if otensor.shape() != tensor.shape() {
                        return Err(FedError::Misaligned {
                            name: name.clone(),
                            reason: format!(
                                "shape {:?} vs {:?}",
                                tensor.shape(),
                                otensor.shape()
                            ),
                        });
                    }
                }
            }
        }
        if other.entries.len() > self.entries.len() {
            return Err(FedError::Misaligned {
                name: other.entries[self.entries.len()].0.clone(),
                reason: "missing in this set".into(),
            });
        }
        Ok(())
    }

    /// Exact bit equality, useful for determinism assertions.
    pub fn bits_equal(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self.iter().zip(other.iter()).all(|((an, at), (bn, bt))| {
                an == bn
                    && at.shape() == bt.shape()
                    && at
                        .data()
                        .iter()
                        .zip(bt.data())
                        .all(|(a, b)| a.to_f64().to_bits() == b.to_f64().to_bits())
            })
    }
}

impl<E: Element> Default for ParameterSet<E> {
    fn default() -> Self {
        Self::new()
    }
}

/// Federated averaging: per-tensor weighted mean of aligned updates.
///
/// Weights are `sample_count / total` (or uniform). Accumulation runs in
/// `f64` in the caller-supplied update order, so callers wanting node-order
/// stability must sort by node id first.
pub fn fedavg<E: Element>(
    updates: &[(ParameterSet<E>, u64)],
    weighting: Weighting,
) -> Result<ParameterSet<E>, FedError> {
    let (first, _) = updates.first().ok_or(FedError::NoUpdates)?;
    for (other, _) in &updates[1..] {
        first.check_aligned(other)?;
    }
    let weights: Vec<f64> = match weighting {
        Weighting::Uniform => vec![1.0 / updates.len() as f64; updates.len()],
        Weighting::SampleCount => {
            let total: u64 = updates.iter().map(|(_, c)| c).sum();
            if total == 0 {
                vec![1.0 / updates.len() as f64; updates.len()]
            } else {
                updates
                    .iter()
                    .map(|(_, c)| *c as f64 / total as f64)
                    .collect()
            }
        }
    };

    let entries = parallel::map_indexed(first.len(), |i| {
        let (name, proto) = &first.entries[i];
        let mut acc = vec![0.0f64; proto.len()];
        for ((set, _), &w) in updates.iter().zip(&weights) {
            let src = set.entries[i].1.data();
            for (a, v) in acc.iter_mut().zip(src) {
                *a += w * v.to_f64();
            }
        }
        let data: Vec<E> = acc.into_iter().map(E::from_f64).collect();
        (
            name.clone(),
            Tensor::from_vec(proto.shape(), data).expect("aggregate keeps shape"),
        )
    });
    Ok(ParameterSet { entries })
}

/// L2 norm of the elementwise difference between two aligned sets.
pub fn diff_norm<E: Element>(a: &ParameterSet<E>, b: &ParameterSet<E>) -> Result<f64, FedError> {
    a.check_aligned(b)?;
    let mut sum = 0.0f64;
    for ((_, at), (_, bt)) in a.entries.iter().zip(&b.entries) {
        for (x, y) in at.data().iter().zip(bt.data()) {
            let d = x.to_f64() - y.to_f64();
            sum += d * d;
        }
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(values: &[(&str, Vec<f32>)]) -> ParameterSet<f32> {
        ParameterSet::from_entries(
            values
                .iter()
                .map(|(n, v)| {
                    (
                        n.to_string(),
                        Tensor::from_vec(&[v.len()], v.clone()).unwrap(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn equal_counts_give_arithmetic_mean() {
        let a = set(&[("w", vec![1.0, 2.0])]);
        let b = set(&[("w", vec![3.0, 4.0])]);
        let avg = fedavg(&[(a, 10), (b, 10)], Weighting::SampleCount).unwrap();
        assert_eq!(avg.get("w").unwrap().data(), &[2.0, 3.0]);
    }

    #[test]
    fn counts_weight_the_mean() {
        let a = set(&[("w", vec![0.0])]);
        let b = set(&[("w", vec![4.0])]);
        let avg = fedavg(&[(a, 1), (b, 3)], Weighting::SampleCount).unwrap();
        assert_eq!(avg.get("w").unwrap().data(), &[3.0]);
    }

    #[test]
    fn single_update_is_identity() {
        let a = set(&[("w", vec![0.25, -1.5, 3.0])]);
        let avg = fedavg(&[(a.clone(), 5)], Weighting::SampleCount).unwrap();
        assert!(avg.bits_equal(&a));
    }

    #[test]
    fn misaligned_sets_name_first_offender() {
        let a = set(&[("w", vec![1.0]), ("b", vec![0.0])]);
        let b = set(&[("w", vec![1.0]), ("c", vec![0.0])]);
        let err = fedavg(&[(a, 1), (b, 1)], Weighting::Uniform).unwrap_err();
        assert!(matches!(err, FedError::Misaligned { ref name, .. } if name == "b"));
    }

    #[test]
    fn empty_update_list_is_rejected() {
        let err = fedavg::<f32>(&[], Weighting::Uniform).unwrap_err();
        assert_eq!(err, FedError::NoUpdates);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut s = ParameterSet::<f32>::new();
        s.push("w", Tensor::zeros(&[1]).unwrap()).unwrap();
        assert!(matches!(
            s.push("w", Tensor::zeros(&[1]).unwrap()),
            Err(FedError::DuplicateName(_))
        ));
    }

    #[test]
    fn diff_norm_basics() {
        let a = set(&[("w", vec![3.0])]);
        let b = set(&[("w", vec![0.0])]);
        assert_eq!(diff_norm(&a, &a).unwrap(), 0.0);
        assert_eq!(diff_norm(&a, &b).unwrap(), 3.0);
        assert_eq!(diff_norm(&a, &b).unwrap(), diff_norm(&b, &a).unwrap());
    }
}
