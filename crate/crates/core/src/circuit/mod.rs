//! Boolean NOR networks compiled into fixed-value markets.

mod compile;
mod network;

pub use compile::{
    build_clock, ceiling_weight, compile_ceiling_gadget, compile_floor_gadget, compile_network, compile_nor_gate,
    compile_reserve_gadget, default_gate_params, read_assignment, CircuitMode, CompiledCircuit, GateParams,
};
pub use network::BooleanNetwork;
