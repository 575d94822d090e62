// The guide lives in book/src as plain mdbook chapters. Each chapter is
// pulled in here as the doc comment of an empty module, so `cargo test`
// compiles and runs every Rust code block against the current ftn-core. A
// failing doctest names the module, which names the chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/pulses.md")]
pub mod pulses {}
#[doc = include_str!("../../../book/src/gramians.md")]
pub mod gramians {}
#[doc = include_str!("../../../book/src/precoding.md")]
pub mod precoding {}
#[doc = include_str!("../../../book/src/localization.md")]
pub mod localization {}
#[doc = include_str!("../../../book/src/capacity.md")]
pub mod capacity {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
