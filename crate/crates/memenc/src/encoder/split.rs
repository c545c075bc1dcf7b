use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Client data partitioned into encoded members and nonmembers, plus the
/// hold-out test set.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub members: LabeledDataset,
    pub nonmembers: LabeledDataset,
    pub test: LabeledDataset,
    /// Row indices of the members within the original training set.
    pub member_indices: Vec<usize>,
}

impl SplitDataset {
    pub fn classes(&self) -> usize {
        self.members.classes()
    }

    pub fn dim(&self) -> usize {
        self.members.dim()
    }

    /// Size of the full client training set.
    pub fn train_len(&self) -> usize {
        self.members.len() + self.nonmembers.len()
    }
}

/// How the encoded subset is chosen.
pub enum Selection<'a> {
    /// `floor(fraction * len)` records without replacement, seeded.
    Random { fraction: f64, seed: u64 },
    /// All records matching the predicate (the sensitive-criteria path for
    /// privacy attacks). Receives (features, label).
    Predicate(&'a dyn Fn(&[f64], usize) -> bool),
}

/// Partition the training set into members and nonmembers.
pub fn select_members(
    train: &LabeledDataset,
    test: LabeledDataset,
    selection: Selection<'_>,
) -> Result<SplitDataset> {
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if !test.is_empty() && test.dim() != train.dim() {
        return Err(Error::Shape {
            expected: train.dim(),
            got: test.dim(),
        });
    }

    let member_indices: Vec<usize> = match selection {
        Selection::Random { fraction, seed } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::invalid("member fraction must be in (0, 1]"));
            }
            let count = (fraction * train.len() as f64).floor() as usize;
            if count == 0 {
                return Err(Error::Empty("member selection"));
            }
            Rng::new(seed).sample_indices(train.len(), count)
        }
        Selection::Predicate(pred) => {
            let picked: Vec<usize> = train
                .iter()
                .enumerate()
                .filter(|(_, (x, y))| pred(x, *y))
                .map(|(i, _)| i)
                .collect();
            if picked.is_empty() {
                return Err(Error::Empty("member selection"));
            }
            picked
        }
    };

    let is_member = {
        let mut flags = vec![false; train.len()];
        for &i in &member_indices {
            flags[i] = true;
        }
        flags
    };
    let nonmember_indices: Vec<usize> =
        (0..train.len()).filter(|&i| !is_member[i]).collect();

    if nonmember_indices.is_empty() {
        log::warn!(
            "every training record selected as member; no client nonmember anchor \
             (synthetic nonmembers still apply)"
        );
    }

    let nonmembers = if nonmember_indices.is_empty() {
        LabeledDataset::empty(train.classes())
    } else {
        train.subset(&nonmember_indices)
    };

    Ok(SplitDataset {
        members: train.subset(&member_indices),
        nonmembers,
        test,
        member_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_benchmark;

    fn toy(len: usize, classes: usize) -> LabeledDataset {
        LabeledDataset::new(
            (0..len).map(|i| vec![i as f64, 1.0]).collect(),
            (0..len).map(|i| i % classes).collect(),
            classes,
        )
        .unwrap()
    }

    #[test]
    fn fraction_is_floored_and_deterministic() {
        let train = toy(1000, 10);
        let a = select_members(
            &train,
            LabeledDataset::empty(10),
            Selection::Random { fraction: 0.2, seed: 5 },
        )
        .unwrap();
        let b = select_members(
            &train,
            LabeledDataset::empty(10),
            Selection::Random { fraction: 0.2, seed: 5 },
        )
        .unwrap();
        assert_eq!(a.members.len(), 200);
        assert_eq!(a.nonmembers.len(), 800);
        assert_eq!(a.member_indices, b.member_indices);
    }

    #[test]
    fn exact_partition() {
        let train = toy(137, 3);
        let split = select_members(
            &train,
            LabeledDataset::empty(3),
            Selection::Random { fraction: 0.3, seed: 9 },
        )
        .unwrap();
        let mut seen = vec![0u8; 137];
        for &i in &split.member_indices {
            seen[i] += 1;
        }
        assert_eq!(split.members.len() + split.nonmembers.len(), 137);
        assert!(split.member_indices.iter().all(|&i| seen[i] == 1));
    }

    #[test]
    fn full_fraction_leaves_no_nonmembers() {
        let train = toy(10, 2);
        let split = select_members(
            &train,
            LabeledDataset::empty(2),
            Selection::Random { fraction: 1.0, seed: 1 },
        )
        .unwrap();
        assert_eq!(split.members.len(), 10);
        assert!(split.nonmembers.is_empty());
    }

    #[test]
    fn label_predicate_on_balanced_set() {
        let train = toy(1000, 10);
        let split = select_members(
            &train,
            LabeledDataset::empty(10),
            Selection::Predicate(&|_, y| y == 3),
        )
        .unwrap();
        assert_eq!(split.members.len(), 100);
        assert!(split.members.labels().iter().all(|&y| y == 3));
    }

    #[test]
    fn empty_selection_is_an_error() {
        let train = toy(10, 2);
        let err = select_members(
            &train,
            LabeledDataset::empty(2),
            Selection::Predicate(&|_, _| false),
        );
        assert!(matches!(err, Err(Error::Empty(_))));
        let err = select_members(
            &train,
            LabeledDataset::empty(2),
            Selection::Random { fraction: 0.05, seed: 0 },
        );
        assert!(matches!(err, Err(Error::Empty(_))));
    }

    #[test]
    fn benchmark_split_roundtrips() {
        let (train, test) = gen_benchmark(2, 4, 60, 6, 6.0).unwrap();
        let split = select_members(
            &train,
            test,
            Selection::Random { fraction: 0.25, seed: 11 },
        )
        .unwrap();
        assert_eq!(split.members.len(), 50);
        assert_eq!(split.test.len(), 40);
        assert_eq!(split.dim(), 6);
    }
}
