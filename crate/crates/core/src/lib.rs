//! Decides game-theoretic security properties of extensive-form games whose
//! utilities are symbolic, by case splitting over arithmetic conditions.

pub mod analysis;
pub mod encode;
pub mod engine;
pub mod formula;
pub mod game;
pub mod oracle;
pub mod solver;
pub mod term;
