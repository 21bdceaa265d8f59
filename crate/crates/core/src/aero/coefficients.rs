//! Section coefficient models: the builtin full-range flat plate and
//! tabulated data loaded from CSV.

use std::f64::consts::PI;
use std::path::Path;

use crate::airframe::FlatPlateParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub cl: f64,
    pub cd: f64,
    pub cm: f64,
}

impl Coefficients {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            cl: self.cl * k,
            cd: self.cd * k,
            cm: self.cm * k,
        }
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

fn smootherstep(x: f64) -> f64 {
    let t = x.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// Thin flat plate valid over the full angle range.
///
/// Attached flow follows the `2 pi` lift slope; beyond the stall angle the
/// lift blends smoothly into the separated-plate `C_L = k sin(2 phi)` branch.
/// The quarter-chord moment is `-C_L / 4` while attached and follows a
/// mid-chord center of pressure once separated.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatPlate {
    pub params: FlatPlateParams,
}

impl FlatPlate {
    pub fn new(params: FlatPlateParams) -> Self {
        Self { params }
    }

    /// Separated-flow weight in [0, 1].
    pub fn separation(&self, phi: f64) -> f64 {
        let p = &self.params;
        smootherstep((phi.abs() - p.stall_angle) / p.blend_width)
    }

    pub fn eval(&self, phi: f64) -> Coefficients {
        let p = &self.params;
        let (s, c) = phi.sin_cos();
        let w = self.separation(phi);
        let cl_attached = 2.0 * PI * s * c;
        let cl_separated = p.cl_plate * (2.0 * phi).sin();
        let cl = (1.0 - w) * cl_attached + w * cl_separated;
        let cd = p.cd_min + p.cd_plate * s * s;
        let cn = cl * c + cd * s;
        let cm = -0.25 * ((1.0 - w) * cl + w * 2.0 * cn);
        Coefficients { cl, cd, cm }
    }
}

/// Tabulated coefficients over `phi` in [-pi, pi] and optionally control
/// deflection, interpolated bilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    phi: Vec<f64>,
    delta: Vec<f64>,
    /// `values[d][p]`
    values: Vec<Vec<Coefficients>>,
}

pub const TABLE_HEADER: [&str; 5] = ["phi_rad", "delta_rad", "CL", "CD", "CM"];

impl CoefficientTable {
    /// Build from rows `(phi, delta, coefficients)` sorted by `(delta, phi)`.
    pub fn from_rows(rows: &[(f64, f64, Coefficients)]) -> Result<Self> {
        let err = |m: String| Err(Error::Table(m));
        if rows.is_empty() {
            return err("no rows".into());
        }
        let mut delta: Vec<f64> = Vec::new();
        let mut values: Vec<Vec<Coefficients>> = Vec::new();
        let mut phis: Vec<Vec<f64>> = Vec::new();
        for (i, &(p, d, c)) in rows.iter().enumerate() {
            if !(p.is_finite() && d.is_finite() && c.cl.is_finite() && c.cd.is_finite() && c.cm.is_finite()) {
                return err(format!("row {} has non-finite values", i + 1));
            }
            if c.cd < 0.0 {
                return err(format!("row {}: negative CD", i + 1));
            }
            match delta.last() {
                Some(&last) if last == d => {
                    let ps = phis.last_mut().unwrap();
                    if p <= *ps.last().unwrap() {
                        return err(format!("row {}: phi not strictly increasing", i + 1));
                    }
                    ps.push(p);
                    values.last_mut().unwrap().push(c);
                }
                Some(&last) if d < last => {
                    return err(format!("row {}: delta not sorted", i + 1));
                }
                _ => {
                    delta.push(d);
                    phis.push(vec![p]);
                    values.push(vec![c]);
                }
            }
        }
        let phi = phis[0].clone();
        if phis.iter().any(|ps| *ps != phi) {
            return err("every delta block must share the same phi grid".into());
        }
        if phi.len() < 2 {
            return err("need at least two phi samples".into());
        }
        let tol = 1e-9;
        if (phi[0] + PI).abs() > tol || (phi[phi.len() - 1] - PI).abs() > tol {
            return err("phi grid must span [-pi, pi]".into());
        }
        for block in &values {
            let (a, b) = (block[0], block[block.len() - 1]);
            if (a.cl - b.cl).abs() > 1e-9 || (a.cd - b.cd).abs() > 1e-9 || (a.cm - b.cm).abs() > 1e-9 {
                return err("values at -pi and pi differ".into());
            }
        }
        Ok(Self { phi, delta, values })
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Table("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != TABLE_HEADER {
            return Err(Error::Table(format!(
                "line 1: expected header `{}`",
                TABLE_HEADER.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            let vals: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::Table(format!("line {}: {e}", n + 1)))?;
            if vals.len() != 5 {
                return Err(Error::Table(format!("line {}: expected 5 columns", n + 1)));
            }
            rows.push((
                vals[0],
                vals[1],
                Coefficients {
                    cl: vals[2],
                    cd: vals[3],
                    cm: vals[4],
                },
            ));
        }
        Self::from_rows(&rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// Sample a flat plate on a uniform grid (useful as a template file).
    pub fn sample_flat_plate(plate: &FlatPlate, n_phi: usize) -> Self {
        let rows: Vec<_> = (0..n_phi)
            .map(|i| {
                let p = -PI + 2.0 * PI * i as f64 / (n_phi - 1) as f64;
                let mut c = plate.eval(p);
                if i == n_phi - 1 {
                    c = plate.eval(-PI);
                }
                (p, 0.0, c)
            })
            .collect();
        Self::from_rows(&rows).expect("sampled plate is a valid table")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = TABLE_HEADER.join(",");
        out.push('\n');
        for (d, block) in self.delta.iter().zip(&self.values) {
            for (p, c) in self.phi.iter().zip(block) {
                out.push_str(&format!("{p},{d},{},{},{}\n", c.cl, c.cd, c.cm));
            }
        }
        out
    }

    pub fn eval(&self, phi: f64, delta: f64) -> Coefficients {
        let (ip, tp) = bracket(&self.phi, phi);
        let interp_phi = |block: &Vec<Coefficients>| lerp(block[ip], block[ip + 1], tp);
        if self.delta.len() == 1 {
            return interp_phi(&self.values[0]);
        }
        let (id, td) = bracket(&self.delta, delta);
        lerp(
            interp_phi(&self.values[id]),
            interp_phi(&self.values[id + 1]),
            td,
        )
    }
}

fn lerp(a: Coefficients, b: Coefficients, t: f64) -> Coefficients {
    Coefficients {
        cl: a.cl + t * (b.cl - a.cl),
        cd: a.cd + t * (b.cd - a.cd),
        cm: a.cm + t * (b.cm - a.cm),
    }
}

/// Index `i` and fraction `t` with `grid[i] <= x <= grid[i+1]`, clamped at the ends.
fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[n - 1] {
        return (n - 2, 1.0);
    }
    let i = grid.partition_point(|&g| g <= x) - 1;
    let i = i.min(n - 2);
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

/// Either section model, addressable by table id.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientModel {
    Builtin(FlatPlate),
    Table(CoefficientTable),
}

/// Evaluate section coefficients at effective angle `phi` with control
/// deflection `delta`. The builtin model shifts the angle by
/// `effectiveness * delta`; tables interpolate in `delta` directly.
pub fn eval_coefficients(
    model: &CoefficientModel,
    phi: f64,
    delta: f64,
    effectiveness: f64,
) -> Result<Coefficients> {
    if !(phi > -PI && phi <= PI) {
        return Err(Error::AngleOutOfRange(phi));
    }
    Ok(eval_unchecked(model, phi, delta, effectiveness))
}

pub(crate) fn eval_unchecked(
    model: &CoefficientModel,
    phi: f64,
    delta: f64,
    effectiveness: f64,
) -> Coefficients {
    match model {
        CoefficientModel::Builtin(plate) => {
            if delta == 0.0 {
                plate.eval(phi)
            } else {
                plate.eval(wrap_angle(phi + effectiveness * delta))
            }
        }
        CoefficientModel::Table(t) => t.eval(phi, delta),
    }
}
