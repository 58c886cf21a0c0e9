//! Exterior calculus on charts with a distinguished critical hypersurface.
//!
//! A chart carries a defining function `t` cutting out the hypersurface
//! `Z = {t = 0}` and an order `m >= 1`. Differential forms are expressed in
//! the coframe `(dt/t^m, dx_i)` and vector fields in the dual frame
//! `(t^m d/dt, d/dx_i)`, so that a pole of order `m` against the defining
//! function is part of the basis, never of the coefficients. On top of this
//! calculus the crate provides:
//!
//! * a small exact symbolic kernel ([`expr`]) closed under the operations
//!   every coefficient in this setting needs (rational constants, `sin`,
//!   `cos`, `log`, integer powers);
//! * the graded operations: wedge, exterior derivative, interior product,
//!   pullback, musical isomorphisms, Laurent decomposition and the dual
//!   bivector ([`bgeom`]);
//! * validators for singular symplectic and contact structures, Reeb field
//!   extraction, reflection doubling and period/fibration computations
//!   ([`structures`]);
//! * the desingularization machinery replacing `dt/t^m` by the differential
//!   of a smooth profile ([`desing`]);
//! * steady Euler and Beltrami operators: curl, divergence, Bernoulli
//!   stationarity, the Liouville two-form, and both directions of the
//!   Beltrami/contact correspondence ([`euler`]);
//! * numerical streamline integration, Poincare sections and orbit
//!   classification including singular periodic orbits ([`flowlab`]);
//! * a line-oriented manifest format binding all of the above to named
//!   objects for the command-line front end ([`manifest`]).

pub mod bgeom;
pub mod desing;
pub mod euler;
pub mod expr;
pub mod flowlab;
pub mod manifest;
pub mod numeric;
pub mod structures;

// re-exports are extended as modules land
pub use expr::{EvalError, Expr, ParseError};
