pub mod clustering;
pub mod diagram;
pub mod error;
pub mod ingest;
pub mod layout;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod render;
pub mod seed;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/data.md")]
mod book_data {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/similarity.md")]
mod book_similarity {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/clustering.md")]
mod book_clustering {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/profiles.md")]
mod book_profiles {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/diagrams.md")]
mod book_diagrams {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/layout.md")]
mod book_layout {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/synthetic.md")]
mod book_synthetic {}
