use serde::{Deserialize, Serialize};
use uisuggest_core::{area_fraction, RegionMark};

/// When a marked region is turned into an edit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskPolicy {
    /// Mask only marks no larger than the configured area fraction.
    #[default]
    Auto,
    Always,
    Never,
}

pub fn decide_mask_use(policy: MaskPolicy, threshold: f64, mark: Option<&RegionMark>) -> bool {
    match (policy, mark) {
        (MaskPolicy::Never, _) | (_, None) => false,
        (MaskPolicy::Always, Some(_)) => true,
        // The fraction does not depend on screen size.
        (MaskPolicy::Auto, Some(m)) => area_fraction(m, (1, 1)) <= threshold,
    }
}
