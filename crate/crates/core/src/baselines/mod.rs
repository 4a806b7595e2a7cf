//! Comparison methods: unsupervised label propagation and a feature-only
//! supervised classifier.

mod feature_clf;
mod label_prop;

pub use feature_clf::{feature_classifier_predict, feature_classifier_train, FeatureClassifier};
pub use label_prop::{
    is_stable, label_propagation, label_propagation_with, CommunityAssignment, LpConfig,
    LpSchedule, SeededSchedule,
};
