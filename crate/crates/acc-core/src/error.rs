use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The requested plateau speed is at or above the asymptote of the
    /// maximum-acceleration trajectory and can never be reached.
    #[error("plateau speed {plateau} m/s is unreachable (asymptote {asymptote} m/s)")]
    UnreachablePlateau { plateau: f64, asymptote: f64 },

    /// The excess gap at the saturation exit is non-positive: the follower
    /// can close it without exceeding the lead plateau speed.
    #[error("no overshoot: excess gap {excess} m is closable without exceeding the plateau")]
    NoOvershoot { excess: f64 },

    /// Fewer than two distinct speeds were supplied to the line fit.
    #[error("limit fit is underdetermined: {points} usable point(s), need at least 2 distinct speeds")]
    Underdetermined { points: usize },

    /// A scenario field violates its invariant. The message names the field.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
