//! Stabilization-free virtual elements (order 2) for finite-strain contact
//! through a third medium on polygonal meshes.
//!
//! The crate is organised bottom-up: [`mesh`] holds polygonal meshes and the
//! benchmark generators, [`basis`] and [`quadrature`] provide scaled monomials
//! and integration rules, [`projection`] builds the element projectors and the
//! B1/B2 operators, [`material`] evaluates energies with their derivatives,
//! [`assembly`] forms the global system, [`solver`] runs Newton with load
//! stepping and [`bench`] wires everything into reproducible benchmark runs.

pub mod mesh;
pub mod basis;
pub mod quadrature;
pub mod projection;
pub mod material;
pub mod assembly;
pub mod solver;
pub mod bench;
