//! Central numeric tolerances and step sizes.
//!
//! Every threshold that decides a branch or gates an error lives here so the
//! trade-offs stay visible in one place. Values are desk-scale: they assume
//! coordinates, speeds and curvatures of order one.

/// Speeds below this count as stagnation; frames and streamline operations
/// refuse to start.
pub const STAGNATION_SPEED: f64 = 1e-12;

/// Relative tolerance for the frame case dispatch (curl alignment, eigenvalue
/// constancy, axis degeneracy).
pub const CASE_TOL: f64 = 1e-8;

/// Central-difference step for derivatives of the frame fields n and b.
/// Balances O(h^2) truncation against roundoff in unit-vector components.
pub const FRAME_FD_STEP: f64 = 1e-5;

/// Half-width of the streamline tube used to differentiate Poisson vectors
/// and holonomy fields transversally.
pub const TUBE_HALF_WIDTH: f64 = 1e-4;

/// Default relative tolerance of the adaptive integrator.
pub const ODE_RTOL: f64 = 1e-10;

/// Default absolute tolerance of the adaptive integrator.
pub const ODE_ATOL: f64 = 1e-12;

/// Newton tolerance for projecting points back onto a potential surface.
pub const SURFACE_PROJECTION_TOL: f64 = 1e-10;

/// Maximum Newton iterations for the surface projection.
pub const SURFACE_PROJECTION_MAX_ITER: usize = 10;

/// Lateral miss below which a shot geodesic counts as having hit its target.
pub const SHOOTING_MISS_TOL: f64 = 1e-9;

/// Number of evenly spaced launch angles tried before secant refinement.
pub const SHOOTING_MULTISTARTS: usize = 16;

/// Step used when differentiating scalar functions on a surface (distance
/// gradients); larger than FRAME_FD_STEP because each evaluation carries
/// shooting noise of ~1e-8.
pub const SURFACE_FD_STEP: f64 = 1e-3;

/// Two Riccati tracks closer than this (projective angle, mod pi) have
/// collided and no longer span independent structures.
pub const RICCATI_COLLISION_TOL: f64 = 1e-10;
