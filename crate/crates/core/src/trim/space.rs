use std::fmt::Write as _;

use super::{
    continue_to, solve_from_rest, ConstraintPolicy, MorphChannel, TrimDof, TrimPoint, TrimTarget,
};
use crate::controls::ControlId;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::Aircraft;

pub const TRIM_SPACE_HEADER: &str =
    "alpha,beta,converged,thrust,elevator,rudder,inc_L,inc_R,sweep_L,sweep_R,dih_L,dih_R,active_limits";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
    /// Lattice spacing in both angles.
    pub step: f64,
    pub airspeed: f64,
    pub dihedral_constraint: f64,
    pub policy: ConstraintPolicy,
    pub channel: MorphChannel,
    pub exec: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            alpha_range: (-10f64.to_radians(), 40f64.to_radians()),
            beta_range: (-30f64.to_radians(), 30f64.to_radians()),
            step: 2f64.to_radians(),
            airspeed: 25.0,
            dihedral_constraint: 0.0,
            policy: ConstraintPolicy::InboardFrozen,
            channel: MorphChannel::Dihedral,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridCell {
    Trimmed(TrimPoint),
    /// Continuation into the cell failed; holds the failing point if the
    /// solver produced one.
    Boundary(Option<TrimPoint>),
    Unreached,
}

impl GridCell {
    pub fn point(&self) -> Option<&TrimPoint> {
        match self {
            GridCell::Trimmed(p) => Some(p),
            GridCell::Boundary(p) => p.as_ref(),
            GridCell::Unreached => None,
        }
    }

    pub fn is_trimmed(&self) -> bool {
        matches!(self, GridCell::Trimmed(_))
    }

    pub fn active_limits(&self) -> &[ControlId] {
        self.point().map(|p| p.active_limits.as_slice()).unwrap_or(&[])
    }
}

/// Trim space on an (alpha, beta) lattice; cells are stored alpha-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimSpaceGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub cells: Vec<GridCell>,
    pub step: f64,
    pub airspeed: f64,
    pub dihedral_constraint: f64,
    pub policy: ConstraintPolicy,
    pub channel: MorphChannel,
}

impl TrimSpaceGrid {
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.betas.len() + j]
    }

    /// Lattice indices of the node closest to `(alpha, beta)`.
    pub fn index_of(&self, alpha: f64, beta: f64) -> (usize, usize) {
        let nearest = |xs: &[f64], x: f64| {
            (0..xs.len())
                .min_by(|&a, &b| (xs[a] - x).abs().total_cmp(&(xs[b] - x).abs()))
                .unwrap_or(0)
        };
        (nearest(&self.alphas, alpha), nearest(&self.betas, beta))
    }

    pub fn trimmed_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_trimmed()).count()
    }

    /// Area of the trimmed region in rad^2.
    pub fn area(&self) -> f64 {
        self.trimmed_count() as f64 * self.step * self.step
    }

    /// Whether every trimmed node of `other` is also trimmed here.
    /// Both grids must share the same lattice.
    pub fn contains(&self, other: &TrimSpaceGrid) -> bool {
        self.alphas == other.alphas
            && self.betas == other.betas
            && self
                .cells
                .iter()
                .zip(&other.cells)
                .all(|(a, b)| a.is_trimmed() || !b.is_trimmed())
    }

    /// Largest control mismatch between each trimmed node and the mirror of
    /// the node at opposite sideslip, together with the number of nodes whose
    /// mirror is not trimmed.
    pub fn mirror_defect(&self) -> (f64, usize) {
        let nb = self.betas.len();
        let mut worst: f64 = 0.0;
        let mut unmatched = 0;
        for i in 0..self.alphas.len() {
            for j in 0..nb {
                let (GridCell::Trimmed(a), k) = (self.cell(i, j), nb - 1 - j) else { continue };
                if (self.betas[k] + self.betas[j]).abs() > 1e-12 {
                    unmatched += 1;
                    continue;
                }
                match self.cell(i, k) {
                    GridCell::Trimmed(b) => {
                        let m = b.controls.mirrored();
                        for id in ControlId::ALL {
                            worst = worst.max((a.controls.get(id) - m.get(id)).abs());
                        }
                    }
                    _ => unmatched += 1,
                }
            }
        }
        (worst, unmatched)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(TRIM_SPACE_HEADER);
        out.push('\n');
        for (i, a) in self.alphas.iter().enumerate() {
            for (j, b) in self.betas.iter().enumerate() {
                let cell = self.cell(i, j);
                let _ = write!(out, "{a},{b},{}", cell.is_trimmed());
                match cell.point() {
                    Some(p) => {
                        let c = &p.controls;
                        for v in [
                            c.thrust,
                            c.elevator,
                            c.rudder,
                            c.left.incidence,
                            c.right.incidence,
                            c.left.sweep,
                            c.right.sweep,
                            c.left.dihedral,
                            c.right.dihedral,
                        ] {
                            let _ = write!(out, ",{v}");
                        }
                    }
                    None => out.push_str(",,,,,,,,,"),
                }
                let names: Vec<String> = cell.active_limits().iter().map(|c| c.name()).collect();
                let _ = writeln!(out, ",{}", names.join(";"));
            }
        }
        out
    }
}

fn lattice(range: (f64, f64), step: f64) -> Vec<f64> {
    let lo = (range.0 / step - 1e-9).ceil() as i64;
    let hi = (range.1 / step + 1e-9).floor() as i64;
    (lo..=hi).map(|k| k as f64 * step).collect()
}

struct Sweep<'a> {
    aircraft: &'a Aircraft,
    opts: &'a SweepOptions,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl Sweep<'_> {
    fn target(&self, i: usize, j: usize) -> TrimTarget {
        TrimTarget::general(
            self.alphas[i],
            self.betas[j],
            self.opts.airspeed,
            self.opts.dihedral_constraint,
            self.opts.policy,
            self.opts.channel,
        )
    }

    fn step(&self, from: &TrimPoint, i: usize, j: usize) -> GridCell {
        match continue_to(self.aircraft, from, &self.target(i, j)) {
            Ok(p) if p.converged => GridCell::Trimmed(p),
            Ok(p) => GridCell::Boundary(Some(p)),
            Err(_) => GridCell::Boundary(None),
        }
    }

    /// Walk from `start` through `path`, stopping at the first failure.
    fn ray(&self, start: &TrimPoint, path: impl Iterator<Item = (usize, usize)>) -> Vec<((usize, usize), GridCell)> {
        let mut out = Vec::new();
        let mut prev = start.clone();
        for (i, j) in path {
            let cell = self.step(&prev, i, j);
            let stop = !cell.is_trimmed();
            if let GridCell::Trimmed(p) = &cell {
                prev = p.clone();
            }
            out.push(((i, j), cell));
            if stop {
                break;
            }
        }
        out
    }

    fn seed(&self, i: usize, j: usize) -> Result<TrimPoint> {
        solve_from_rest(self.aircraft, &self.target(i, j))
    }
}

/// Trim space over an (alpha, beta) lattice by natural continuation from
/// the node nearest (0, 0).
///
/// The seed is continued along alpha at the seed sideslip, then each of
/// those nodes outward in both sideslip directions (rows run in parallel),
/// then remaining nodes adjacent to the trimmed region are filled in waves.
pub fn sweep_trim_space(aircraft: &Aircraft, opts: &SweepOptions) -> Result<TrimSpaceGrid> {
    if !(opts.step > 0.0) {
        return Err(Error::InvalidOptions("lattice step must be positive".into()));
    }
    let sweep = Sweep {
        aircraft,
        opts,
        alphas: lattice(opts.alpha_range, opts.step),
        betas: lattice(opts.beta_range, opts.step),
    };
    let (na, nb) = (sweep.alphas.len(), sweep.betas.len());
    if na == 0 || nb == 0 {
        return Err(Error::InvalidOptions("empty trim-space lattice".into()));
    }
    let mut grid = TrimSpaceGrid {
        alphas: sweep.alphas.clone(),
        betas: sweep.betas.clone(),
        cells: vec![GridCell::Unreached; na * nb],
        step: opts.step,
        airspeed: opts.airspeed,
        dihedral_constraint: opts.dihedral_constraint,
        policy: opts.policy,
        channel: opts.channel,
    };
    let (i0, j0) = grid.index_of(0.0, 0.0);
    let seed = sweep.seed(i0, j0).map_err(|e| Error::FirstPointFailure(Box::new(e)))?;

    let mut spine = vec![(i0, seed.clone())];
    for dir in [1i64, -1] {
        let path = (1..).map(move |k| i0 as i64 + dir * k).take_while(|&i| i >= 0 && (i as usize) < na);
        for ((i, j), cell) in sweep.ray(&seed, path.map(|i| (i as usize, j0))) {
            if let GridCell::Trimmed(p) = &cell {
                spine.push((i, p.clone()));
            }
            grid.cells[i * nb + j] = cell;
        }
    }
    grid.cells[i0 * nb + j0] = GridCell::Trimmed(seed);

    let rows = exec::map(opts.exec, &spine, |(i, start)| {
        let i = *i;
        let mut out = sweep.ray(start, (j0 + 1..nb).map(move |j| (i, j)));
        out.extend(sweep.ray(start, (0..j0).rev().map(move |j| (i, j))));
        out
    });
    for row in rows {
        for ((i, j), cell) in row {
            grid.cells[i * nb + j] = cell;
        }
    }

    loop {
        let mut frontier = Vec::new();
        for i in 0..na {
            for j in 0..nb {
                if grid.cells[i * nb + j] != GridCell::Unreached {
                    continue;
                }
                // prefer the neighbour nearer zero sideslip, then along alpha
                let toward = if j > j0 { j - 1 } else { j + 1 };
                let mut candidates = vec![];
                if toward < nb && toward != j {
                    candidates.push((i, toward));
                }
                if i > 0 {
                    candidates.push((i - 1, j));
                }
                if i + 1 < na {
                    candidates.push((i + 1, j));
                }
                if j > j0 && j + 1 < nb {
                    candidates.push((i, j + 1));
                } else if j < j0 && j > 0 {
                    candidates.push((i, j - 1));
                }
                if let Some(p) = candidates
                    .iter()
                    .find_map(|&(a, b)| match &grid.cells[a * nb + b] {
                        GridCell::Trimmed(p) => Some(p.clone()),
                        _ => None,
                    })
                {
                    frontier.push(((i, j), p));
                }
            }
        }
        if frontier.is_empty() {
            break;
        }
        let cells = exec::map(opts.exec, &frontier, |((i, j), p)| sweep.step(p, *i, *j));
        for (((i, j), _), cell) in frontier.iter().zip(cells) {
            grid.cells[i * nb + j] = cell;
        }
    }
    debug_assert!(grid.cells.iter().all(|c| match c {
        GridCell::Trimmed(p) => p.target.dof == TrimDof::General,
        _ => true,
    }));
    Ok(grid)
}
