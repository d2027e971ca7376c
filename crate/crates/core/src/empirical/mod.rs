//! Brute-force and constructive checks: band counts, Cantor covers, dimension
//! estimators, the Wang–Wu oracle and box counting.

pub mod bands;
pub mod boxcount;
pub mod cover;
pub mod wangwu;

pub use boxcount::{boxcount_sample, dyadic_scales, BoxCount, DigitSource};
pub use bands::{band_counts, band_of, verify_lemma_np, DyadicBandCount, LemmaMode, LemmaNpReport, LemmaOptions};
pub use cover::{
    build_cover, covering_estimate, falconer_estimate, fm_cover, fm_sibling_gaps, fm_stopping_cover, ConstructionParams, CoverLevel,
    CoverScheme, EstimateTrace,
};
pub use wangwu::{wang_wu_s_n, WangWuBracket, WangWuOptions};
