//! Membership encoding: joint training of the classifier and a linear
//! membership discriminator over keyed synthetic anchors.

mod discriminator;
mod mapping;
mod split;
mod train;

pub use discriminator::{encoding_loss, Discriminator};
pub use mapping::{build_mapping, Mapping};
pub use split::{select_members, Selection, SplitDataset};
pub use train::{
    membership_encoding, membership_encoding_frozen, train_baseline, EncodingConfig,
    EncodingReport,
};
