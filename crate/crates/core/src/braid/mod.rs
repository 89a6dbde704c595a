//! Exact braid-word algebra.

mod burau;
mod laurent;
mod link;
mod perm;
mod word;

pub use burau::{alexander_poly, braids_equal, burau_letter, burau_reduced, same_braid, Alexander, Equality, LaurentMatrix};
pub use laurent::LaurentPoly;
pub use link::{linking_numbers, LinkingData};
pub use perm::Perm;
pub use word::{BraidWord, Letter};
