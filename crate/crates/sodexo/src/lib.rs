//! Defense-side modeling of social botnets with honeybots.
//!
//! A botmaster grows a botnet by spamming malicious links through a social
//! network; the defender infiltrates it with *honeybots* — decoy accounts that
//! accept recruitment, harvest command-and-control traffic, and report the
//! links they observe for blacklisting. This crate implements the models that
//! make that arms race quantitative, in four layers:
//!
//! * [`stackelberg`] — the microscopic game. A command-and-control bot
//!   allocates its channel capacity across subordinate bots to maximize
//!   trust-weighted log utility; a honeybot chooses its response rate as a
//!   Stackelberg leader anticipating that allocation.
//! * [`dynamics`] — the macroscopic mean-field layer. Coupled ODEs for the bot
//!   and infiltrated-honeybot populations, their extinction/endemic
//!   equilibria, stability classification, and a heterogeneous-degree
//!   extension.
//! * [`pas`] — the planning layer. Trust decay over macroscopic time, the
//!   couplings between the game and population layers, and the optimal
//!   honeybot reserve size, by closed form and by a combined
//!   exploitation-aware objective.
//! * [`abm`] — a seeded stochastic agent-based simulator on explicit random
//!   graphs, used to validate the mean-field equations and the
//!   degree-distribution effects they predict.
//!
//! [`model`] holds the shared parameter types and their validation. All types
//! are plain data and all operations are deterministic given their inputs
//! (simulations take an explicit 64-bit seed).

pub mod abm;
pub mod dynamics;
pub mod model;
pub mod pas;
pub mod stackelberg;
