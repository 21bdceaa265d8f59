//! Quasisteady strip aerodynamics, fuselage drag, gravity and thrust.

mod coefficients;
mod loads;
mod stations;

pub use coefficients::{
    eval_coefficients, wrap_angle, CoefficientModel, CoefficientTable, Coefficients, FlatPlate,
    TABLE_HEADER,
};
pub use loads::{
    aero_loads, fuselage_drag, fuselage_wrench, gravity_loads, propulsion_loads, station_deflection,
    station_flow, station_flows_body, station_loads, station_loads_body, surface_wrench,
    total_external_loads, BodyWrench, FlowSample, GeneralizedLoads, StationLoads,
};
pub use stations::{build_drag_strips, build_stations, AeroStation, DragStrip};
