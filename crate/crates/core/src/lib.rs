//! On-site tour planning.
//!
//! Scores candidate next spots by static preference, time-dependent context
//! (time features, congestion, weather) and the best achievable remainder of
//! the tour, and recommends the top routes using three greedy planners. An
//! exhaustive oracle solves small instances exactly for verification.

pub mod cli;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod report;
pub mod scenario;
pub mod scoring;
pub mod service;

pub use model::{Itinerary, PlannerState, Position, SpotId, TimeGrid, TimePoint, VisitEntry};
pub use planner::{Algorithm, PlanRequest, RankedRoute, RankedRoutes};
pub use scenario::{Scenario, ScenarioError, ScenarioFile};
