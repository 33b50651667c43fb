//! Construction and analysis of binary S-adic subshifts built from the
//! substitutions `τ_{m,n}: 0 ↦ 0^{m-1}1, 1 ↦ 0^{n-1}1`.

pub mod error;
pub mod fixtures;
pub mod language;
pub mod params_io;
pub mod recover;
pub mod sadic;
pub mod spectrum;
pub mod substitution;
pub mod suffix;
pub mod weakmix;
pub mod word;

pub use error::{Error, Result};
pub use language::LanguageTable;
pub use sadic::SadicParams;
pub use substitution::{Substitution, TauParams};
pub use word::Word;

/// Serializes big integers as decimal strings.
pub(crate) fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}
