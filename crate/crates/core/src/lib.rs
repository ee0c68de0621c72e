pub mod acceptance;
pub mod apps;
pub mod bits;
pub mod error;
pub mod fatlinks;
pub mod flowcore;
pub mod model;
pub mod operators;
pub mod pipeline;
pub mod runner;
pub mod generic_comb;
pub mod simulator;
pub mod wheel;

pub use error::{Error, Result};

// The guide's code blocks run as doc-tests, one module per chapter so a
// failure points at its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/fatlinks.md")]
    mod fatlinks {}
    #[doc = include_str!("../../../book/src/wheels.md")]
    mod wheels {}
    #[doc = include_str!("../../../book/src/combining.md")]
    mod combining {}
    #[doc = include_str!("../../../book/src/apps.md")]
    mod apps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
