//! Subgroups of finitely presented groups as points of a space: coset
//! tables and Stallings graphs, membership windows and isolation
//! certificates, truncated permutation representations and Følner sets.

pub mod amenability;
pub mod chabauty;
pub mod cosets;
mod enumerate;
pub mod permrep;
pub mod stallings;
pub mod words;

pub use amenability::{FolnerReport, FolnerSearch, Rational};
pub use chabauty::{MembershipConstraint, SubgroupHandle};
pub use cosets::CosetTable;
pub use permrep::{Action, PermRep, WindowAction};
pub use stallings::CoreGraph;
pub use words::{Alphabet, Letter, Presentation, Word};
