//! File formats, parameter sweeps and the `tdck` command-line tool built on
//! [`tdck_core`].

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataio;
pub mod kv;
pub mod sweep;
