//! The guide in `book/` lives outside any crate, so its listings are pulled in
//! here and run by `cargo test --doc`. One module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/instances.md")]
pub mod instances {}
#[doc = include_str!("../../../book/src/lp.md")]
pub mod lp {}
#[doc = include_str!("../../../book/src/exact.md")]
pub mod exact {}
#[doc = include_str!("../../../book/src/rounding.md")]
pub mod rounding {}
#[doc = include_str!("../../../book/src/dp.md")]
pub mod dp {}
#[doc = include_str!("../../../book/src/greedy.md")]
pub mod greedy {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
