//! Code listings of the guide in `book/`, compiled and run as doctests.
//! Each chapter gets its own module so a failing listing is easy to place.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/strata.md")]
pub mod strata {}
#[doc = include_str!("../../../book/src/cut.md")]
pub mod cut {}
#[doc = include_str!("../../../book/src/retraction.md")]
pub mod retraction {}
#[doc = include_str!("../../../book/src/specialization.md")]
pub mod specialization {}
#[doc = include_str!("../../../book/src/complex.md")]
pub mod complex {}
#[doc = include_str!("../../../book/src/checking.md")]
pub mod checking {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/model-files.md")]
pub mod model_files {}
