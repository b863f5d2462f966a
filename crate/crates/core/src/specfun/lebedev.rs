//! Lebedev quadrature on the unit sphere.
//!
//! Convention: `∫_{S²} f = 4π Σ_n w_n f(s_n)` with `Σ_n w_n = 1`.

use super::lebedev_tables::RULES;
use crate::{Error, Result};

/// Point counts of the embedded rules.
pub const SUPPORTED_ORDERS: &[usize] = &[6, 14, 26, 38, 50, 74, 86, 110];

#[derive(Debug, Clone, Copy)]
pub(super) enum Orbit {
    /// Six vertices of the octahedron.
    A1,
    /// Twelve edge midpoints.
    A2,
    /// Eight face centers.
    A3,
    /// `(l, l, sqrt(1 - 2l²))` and its 24 images.
    B(f64),
    /// `(p, sqrt(1 - p²), 0)` and its 24 images.
    C(f64),
}

pub(super) struct Rule {
    pub points: usize,
    pub degree: usize,
    pub orbits: &'static [(Orbit, f64)],
}

/// A Lebedev grid: unit directions and normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LebedevGrid {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

impl LebedevGrid {
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes, `N_leb`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn precision(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `4π Σ w_n f(s_n)`.
    pub fn integrate<F: Fn([f64; 3]) -> f64>(&self, f: F) -> f64 {
        4.0 * std::f64::consts::PI
            * self
                .points
                .iter()
                .zip(&self.weights)
                .map(|(&s, &w)| w * f(s))
                .sum::<f64>()
    }
}

fn signed(base: [f64; 3]) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(8);
    let signs = |v: f64| if v == 0.0 { vec![0.0] } else { vec![v, -v] };
    for &x in &signs(base[0]) {
        for &y in &signs(base[1]) {
            for &z in &signs(base[2]) {
                out.push([x, y, z]);
            }
        }
    }
    out
}

fn expand(orbit: Orbit) -> Vec<[f64; 3]> {
    let bases: Vec<[f64; 3]> = match orbit {
        Orbit::A1 => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        Orbit::A2 => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            vec![[0.0, a, a], [a, 0.0, a], [a, a, 0.0]]
        }
        Orbit::A3 => {
            let a = 1.0 / 3.0_f64.sqrt();
            vec![[a, a, a]]
        }
        Orbit::B(l) => {
            let m = (1.0 - 2.0 * l * l).sqrt();
            vec![[l, l, m], [l, m, l], [m, l, l]]
        }
        Orbit::C(p) => {
            let q = (1.0 - p * p).sqrt();
            vec![
                [p, q, 0.0],
                [q, p, 0.0],
                [p, 0.0, q],
                [q, 0.0, p],
                [0.0, p, q],
                [0.0, q, p],
            ]
        }
    };
    bases.into_iter().flat_map(signed).collect()
}

/// Builds the Lebedev grid with `order` points.
pub fn lebedev_grid(order: usize) -> Result<LebedevGrid> {
    let rule = RULES
        .iter()
        .find(|r| r.points == order)
        .ok_or(Error::UnsupportedLebedevOrder {
            order,
            supported: SUPPORTED_ORDERS,
        })?;
    let mut points = Vec::with_capacity(rule.points);
    let mut weights = Vec::with_capacity(rule.points);
    for &(orbit, w) in rule.orbits {
        let pts = expand(orbit);
        weights.extend(std::iter::repeat_n(w, pts.len()));
        points.extend(pts);
    }
    debug_assert_eq!(points.len(), rule.points);
    Ok(LebedevGrid {
        points,
        weights,
        degree: rule.degree,
    })
}
