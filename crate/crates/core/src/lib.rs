//! Exact arithmetic for truncated local shtukas, truncated displays, and
//! F-zips over small finite rings.
//!
//! The crate is organized in layers:
//!
//! - [`field`], [`series`], [`witt`]: coefficient arithmetic — finite fields
//!   `F_q`, truncated power series `F_q[[z]]/(z^N)`, and truncated p-typical
//!   Witt vectors `W_N(R)` with Frobenius, Verschiebung and the ideal `I_N`.
//! - [`dvr`], [`rees`]: valuation bookkeeping over `F_q[[z]]` and `W(F_q)`
//!   at finite precision, Smith normal form, Hecke types, lattice chains,
//!   and the vector-bundle criteria for graded Rees modules and filtered
//!   chains.
//! - [`loopgrp`], [`shtuka`]: truncated loop groups `GL_h(R_N)`, the display
//!   groups `E_N(GL_h, μ)` with their `τ`/`σ` homomorphisms, and orbit
//!   classification of truncated shtukas under the twisted action.
//! - [`display`], [`zip`]: pairs and displays of type `(h, d)` over
//!   `W_N(F_q)`, the Frobenius-twist functor on pair morphisms, F-zips and
//!   the comparison maps between 1-truncated shtukas and zips.
//! - [`rootdata`]: the root datum of `GL_h` and the explicit cutoff bounds.
//! - [`oracle`]: independent brute-force reference implementations used to
//!   pin fixtures; kept separate from the main code paths on purpose.
//!
//! All values are immutable after construction and all operations are pure;
//! everything is deterministic given its inputs.

pub mod dvr;
pub mod field;
pub mod linalg;
pub mod loopgrp;
pub mod oracle;
pub mod rees;
pub mod rootdata;
pub mod series;
pub mod shtuka;
pub mod witt;
pub mod zip;

pub mod display;
