use std::collections::HashMap;
use std::path::Path;

use crate::aero::{
    build_drag_strips, build_stations, total_external_loads, AeroStation, CoefficientModel,
    CoefficientTable, DragStrip, FlatPlate,
};
use crate::airframe::{state_derivative_with_loads, AircraftState, AirframeConfig, StateVector, WingPoses};
use crate::controls::{ControlVector, MorphRates};
use crate::error::{Error, Result};

/// An airframe configuration compiled for evaluation: aerodynamic stations,
/// fuselage drag strips and resolved coefficient models.
#[derive(Debug, Clone)]
pub struct Aircraft {
    pub config: AirframeConfig,
    pub stations: Vec<AeroStation>,
    pub strips: Vec<DragStrip>,
    pub models: Vec<CoefficientModel>,
    /// Multiplies every aerodynamic coefficient (1 for the nominal model).
    pub coefficient_scale: f64,
}

impl Aircraft {
    /// Compile a configuration; table paths resolve against the working directory.
    pub fn new(config: AirframeConfig) -> Result<Self> {
        Self::with_base_dir(config, None)
    }

    pub fn case_study() -> Self {
        Self::new(AirframeConfig::case_study()).expect("shipped configuration is valid")
    }

    /// Load a config file; table paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let config = AirframeConfig::load(path)?;
        Self::with_base_dir(config, path.parent())
    }

    pub fn with_base_dir(config: AirframeConfig, base: Option<&Path>) -> Result<Self> {
        config.validate()?;
        let mut tables = HashMap::new();
        for t in &config.tables {
            let p = match base {
                Some(b) => b.join(&t.path),
                None => t.path.clone().into(),
            };
            let table = CoefficientTable::load(&p)
                .map_err(|e| Error::Table(format!("{}: {e}", p.display())))?;
            tables.insert(t.id.clone(), table);
        }
        Self::with_tables(config, tables)
    }

    /// Compile with tables supplied in memory, keyed by table id.
    pub fn with_tables(config: AirframeConfig, tables: HashMap<String, CoefficientTable>) -> Result<Self> {
        config.validate()?;
        let mut stations = build_stations(&config, None)?;
        let strips = build_drag_strips(&config)?;
        let mut models = vec![CoefficientModel::Builtin(FlatPlate::new(config.flat_plate.clone()))];
        let mut ids: Vec<String> = vec!["builtin".into()];
        for st in &mut stations {
            if let Some(i) = ids.iter().position(|id| *id == st.table_id) {
                st.table = i;
                continue;
            }
            let table = tables
                .get(&st.table_id)
                .ok_or_else(|| Error::Table(format!("unknown table id `{}`", st.table_id)))?;
            models.push(CoefficientModel::Table(table.clone()));
            ids.push(st.table_id.clone());
            st.table = ids.len() - 1;
        }
        Ok(Self {
            config,
            stations,
            strips,
            models,
            coefficient_scale: 1.0,
        })
    }

    /// Same aircraft with `factor` times as many stations on every surface.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let mut config = self.config.clone();
        for b in &mut config.bodies {
            if let Some(s) = &mut b.surface {
                s.stations *= factor;
            }
            if let Some(d) = &mut b.fuselage_drag {
                d.stations *= factor;
            }
        }
        let mut stations = build_stations(&config, None)?;
        let strips = build_drag_strips(&config)?;
        for st in &mut stations {
            let src = self
                .stations
                .iter()
                .find(|s| s.body == st.body)
                .expect("same surfaces");
            st.table = src.table;
        }
        Ok(Self {
            config,
            stations,
            strips,
            models: self.models.clone(),
            coefficient_scale: self.coefficient_scale,
        })
    }

    pub fn mass(&self) -> f64 {
        self.config.total_mass()
    }

    pub fn weight(&self) -> f64 {
        self.config.total_mass() * self.config.gravity
    }

    /// Index of the station whose label (`body_id:index`) matches.
    pub fn station_index(&self, label: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.label() == label)
    }

    /// Tip station of every lifting surface, in body order.
    pub fn tip_stations(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for (i, s) in self.stations.iter().enumerate() {
            match out.last() {
                Some(&j) if self.stations[j].body == s.body => *out.last_mut().unwrap() = i,
                _ => out.push(i),
            }
        }
        out
    }
}

/// Full state derivative `zdot` for the given controls and wing motion.
pub fn state_derivative(
    aircraft: &Aircraft,
    state: &AircraftState,
    controls: &ControlVector,
    rates: &MorphRates,
) -> Result<StateVector> {
    let wings = WingPoses::from_controls(controls, rates);
    let f = total_external_loads(aircraft, state, controls, &wings)?;
    state_derivative_with_loads(&aircraft.config, state, &wings, &f)
}
