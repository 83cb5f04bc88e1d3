pub mod gen_trace;
pub mod simulate;
pub mod sweep;
pub mod train;
