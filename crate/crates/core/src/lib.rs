//! Genuine multipartite nonlocality of quantum networks built from
//! partially entangled sources.
//!
//! The pipeline: a [`network::Network`] is transformed to odd particle
//! parity ([`transform`]), measurement settings are derived per bipartition
//! ([`observables`]), correlators are evaluated exactly ([`engine`]) and fed
//! to the CH-sum functional ([`bell`]). Device-independent consequences live
//! in [`bounds`] and [`nslp`].

pub mod accept;
pub mod bell;
pub mod bounds;
pub mod cli;
pub mod engine;
pub mod error;
pub mod locc;
pub mod network;
pub mod nslp;
pub mod observables;
pub mod report;
pub mod sim;
pub mod simplex;
pub mod testkit;
pub mod transform;

pub use error::{Error, Result};
pub use network::{Network, Source, SourceKind};
