pub mod eval;
pub mod simulate;
pub mod synth;
pub mod track;
