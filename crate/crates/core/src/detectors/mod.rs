//! Single-stream change detectors for a Gaussian mean shift with unit
//! variance and pre-change mean zero.
//!
//! [`Cusum`] needs the post-change mean. [`glr_stat_bruteforce`] and
//! [`FocusStream`] both compute the two-sided GLR statistic
//! `max_k (Σ_{i>k} x_i)² / (2(n−k))`; the former by enumeration in O(n), the
//! latter online with a pruned candidate set of amortized size O(log n).

mod cusum;
mod focus;
mod glr;

pub use cusum::{cusum_max_form, Cusum};
pub use focus::{Candidate, FocusStream};
pub use glr::glr_stat_bruteforce;
