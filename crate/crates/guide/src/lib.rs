//! The chapters of `book/` as doc comments, so their snippets run as
//! doctests. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/parameters.md")]
pub mod parameters {}
#[doc = include_str!("../../../book/src/encoding.md")]
pub mod encoding {}
#[doc = include_str!("../../../book/src/symbolic-states.md")]
pub mod symbolic_states {}
#[doc = include_str!("../../../book/src/recovery.md")]
pub mod recovery {}
#[doc = include_str!("../../../book/src/compilation.md")]
pub mod compilation {}
#[doc = include_str!("../../../book/src/dense-and-secrecy.md")]
pub mod dense_and_secrecy {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
