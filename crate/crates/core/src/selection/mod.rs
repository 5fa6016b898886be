//! Study selection: scales and policies, rating aggregation, reviewer
//! assignment, and the round-based voting workflows.

mod assign;
mod finalize;
mod io;
mod policy;
mod rating;
mod workflow;

pub use assign::{assign_overlapping_subsets, overlapping_subsets, Assignment};
pub use finalize::{finalize, Baseline};
pub use io::{
    assignment_to_csv, decisions_to_csv, format_rating, parse_decisions_csv, parse_votes_csv, votes_to_csv,
    DecisionInput,
};
pub use policy::{Aggregator, Scale, SelectionPolicy, Workflow};
pub use rating::{
    aggregate, aggregate_relative, classify, rating, relevance, weighted_3point_rating, Aggregate, Relevance,
    RelativeMethod, EQ_TOLERANCE,
};
pub use workflow::{
    DecidedBy, Decision, RoundSpec, SelectionEvent, SelectionSetup, SelectionState, Vote, VotingMatrix,
};
