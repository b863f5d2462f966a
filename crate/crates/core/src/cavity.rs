//! Molecular cavity: PQR input, the union of atomic balls, and the discrete
//! solvent-exposed surface.

use crate::par;
use crate::specfun::{lebedev_grid, LebedevGrid};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Default buried-point tolerance, Å.
pub const DEFAULT_DELTA: f64 = 1e-10;

/// An atomic ball carrying a point charge at its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Center, Å.
    pub center: [f64; 3],
    /// Van der Waals radius, Å.
    pub radius: f64,
    /// Partial charge, e.
    pub charge: f64,
}

impl Atom {
    pub fn new(center: [f64; 3], radius: f64, charge: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if center.iter().any(|c| !c.is_finite()) || !charge.is_finite() {
            return Err(Error::Domain("atom fields must be finite".into()));
        }
        Ok(Self {
            center,
            radius,
            charge,
        })
    }
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Reads ATOM/HETATM records; the last five tokens of a record are
/// `x y z charge radius`. Other records are ignored.
pub fn parse_pqr(text: &str) -> Result<Vec<Atom>> {
    let mut atoms = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first() {
            Some(&"ATOM") | Some(&"HETATM") => {}
            _ => continue,
        }
        if tokens.len() < 6 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected x y z charge radius, found {} fields", tokens.len() - 1),
            });
        }
        let mut fields = [0.0; 5];
        for (slot, tok) in fields.iter_mut().zip(&tokens[tokens.len() - 5..]) {
            *slot = tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("non-numeric field {tok:?}"),
            })?;
        }
        let [x, y, z, charge, radius] = fields;
        if !(radius > 0.0) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("radius must be positive, got {radius}"),
            });
        }
        let atom = Atom::new([x, y, z], radius, charge).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        atoms.push(atom);
    }
    if atoms.is_empty() {
        return Err(Error::NoAtoms);
    }
    Ok(atoms)
}

/// Writes atoms as PQR ATOM records with round-trip precision.
pub fn write_pqr(atoms: &[Atom]) -> String {
    let mut out = String::new();
    for (i, a) in atoms.iter().enumerate() {
        let _ = writeln!(
            out,
            "ATOM {:>6} X RES 1 {} {} {} {} {}",
            i + 1,
            a.center[0],
            a.center[1],
            a.center[2],
            a.charge,
            a.radius
        );
    }
    out.push_str("END\n");
    out
}

/// All pairs `(i, j)`, `i < j`, of overlapping balls.
pub fn neighbor_pairs(atoms: &[Atom]) -> Vec<(usize, usize)> {
    // sweep along x over intervals [c - R, c + R]
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = atoms[a].center[0] - atoms[a].radius;
        let kb = atoms[b].center[0] - atoms[b].radius;
        ka.total_cmp(&kb).then(a.cmp(&b))
    });
    let mut pairs = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let right = atoms[i].center[0] + atoms[i].radius;
        for &j in &order[pos + 1..] {
            if atoms[j].center[0] - atoms[j].radius >= right {
                break;
            }
            if dist(atoms[i].center, atoms[j].center) < atoms[i].radius + atoms[j].radius {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Lebedev points on every atomic sphere with their exposure classification.
///
/// Point `(j, n)` sits at `c_j + R_j s_n`. It is buried when it lies inside
/// another ball by more than `delta`; its container is the smallest such
/// ball index.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    atoms: Vec<Atom>,
    grid: LebedevGrid,
    directions: Vec<[f64; 3]>,
    points: Vec<[f64; 3]>,
    container: Vec<Option<usize>>,
    delta: f64,
}

impl SurfaceGrid {
    pub fn build(atoms: &[Atom], leb_order: usize, delta: f64) -> Result<Self> {
        const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Self::build_rotated(atoms, leb_order, delta, IDENTITY)
    }

    /// Same as [`SurfaceGrid::build`] with every grid direction replaced by
    /// `rotation · s_n`.
    pub fn build_rotated(
        atoms: &[Atom],
        leb_order: usize,
        delta: f64,
        rotation: [[f64; 3]; 3],
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::NoAtoms);
        }
        if !(delta >= 0.0) {
            return Err(Error::Domain(format!("delta must be non-negative, got {delta}")));
        }
        for (i, a) in atoms.iter().enumerate() {
            for (j, b) in atoms.iter().enumerate().skip(i + 1) {
                if dist(a.center, b.center) < 1e-12 && (a.radius - b.radius).abs() < 1e-12 {
                    return Err(Error::DegenerateBalls { first: i, second: j });
                }
            }
        }
        let grid = lebedev_grid(leb_order)?;
        let directions: Vec<[f64; 3]> = grid
            .points()
            .iter()
            .map(|s| {
                let mut r = [0.0; 3];
                for (row, out) in rotation.iter().zip(r.iter_mut()) {
                    *out = row[0] * s[0] + row[1] * s[1] + row[2] * s[2];
                }
                r
            })
            .collect();
        let n = directions.len();
        let points: Vec<[f64; 3]> = (0..atoms.len() * n)
            .map(|idx| {
                let a = &atoms[idx / n];
                let s = directions[idx % n];
                [
                    a.center[0] + a.radius * s[0],
                    a.center[1] + a.radius * s[1],
                    a.center[2] + a.radius * s[2],
                ]
            })
            .collect();
        let container = par::map_range(points.len(), |idx| {
            let owner = idx / n;
            atoms.iter().enumerate().position(|(i, a)| {
                i != owner && dist(points[idx], a.center) < a.radius - delta
            })
        });
        Ok(Self {
            atoms: atoms.to_vec(),
            grid,
            directions,
            points,
            container,
            delta,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn grid(&self) -> &LebedevGrid {
        &self.grid
    }

    /// Points per sphere.
    pub fn n_per_sphere(&self) -> usize {
        self.directions.len()
    }

    /// Total number of points, `n_atoms * n_per_sphere`. Point `(j, n)` has
    /// flat index `j * n_per_sphere + n`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Unit directions shared by every sphere.
    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        self.grid.weights()
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        self.points[flat]
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn is_exposed(&self, flat: usize) -> bool {
        self.container[flat].is_none()
    }

    /// Ball containing a buried point.
    pub fn container(&self, flat: usize) -> Option<usize> {
        self.container[flat]
    }

    /// Exposure flags in flat order.
    pub fn exposure(&self) -> Vec<bool> {
        self.container.iter().map(Option::is_none).collect()
    }

    pub fn n_exposed(&self) -> usize {
        self.container.iter().filter(|c| c.is_none()).count()
    }

    /// Flat indices of exposed points.
    pub fn exposed_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_exposed(i)).collect()
    }

    /// Quadrature area element of point `flat`: `4π R_j² w_n`.
    pub fn area_weight(&self, flat: usize) -> f64 {
        let n = self.n_per_sphere();
        let r = self.atoms[flat / n].radius;
        4.0 * std::f64::consts::PI * r * r * self.grid.weights()[flat % n]
    }

    /// `4π Σ_j R_j² Σ_n w_n e_jn`.
    pub fn exposed_area(&self) -> f64 {
        (0..self.len())
            .filter(|&i| self.is_exposed(i))
            .map(|i| self.area_weight(i))
            .sum()
    }
}

/// Builds the surface grid for `atoms` with `leb_order` points per sphere.
pub fn build_surface(atoms: &[Atom], leb_order: usize, delta: f64) -> Result<SurfaceGrid> {
    SurfaceGrid::build(atoms, leb_order, delta)
}
