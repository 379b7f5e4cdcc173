//! Built-in analytic problem setups and material layouts for the harness.
//!
//! The trigonometric case uses `p = cos(pi x) cos(pi y)` with source
//! `phi = 2 pi^2 cos(pi x) cos(pi y)`. Its edge fluxes have a closed form,
//! and the per-cell source is taken as the boundary sum of those exact edge
//! fluxes, which makes source and boundary data consistent to rounding and
//! gives a per-face truth reference for convergence studies.

use dec_core::complex::{Cochain, CochainKind};
use dec_core::darcy::{self, DarcyError};
use dec_core::{DualMeasures, SimplicialComplex};

/// Named analytic cases selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticCase {
    /// Constant velocity, zero source, affine pressure.
    ConstantX,
    /// Product-of-cosines pressure with a matching source term.
    CosCos,
}

impl AnalyticCase {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "constant-x" => Some(AnalyticCase::ConstantX),
            "coscos" => Some(AnalyticCase::CosCos),
            _ => None,
        }
    }

    pub fn velocity(&self, p: &[f64]) -> [f64; 3] {
        match self {
            AnalyticCase::ConstantX => [1.0, 0.0, 0.0],
            AnalyticCase::CosCos => {
                let pi = std::f64::consts::PI;
                [
                    pi * (pi * p[0]).sin() * (pi * p[1]).cos(),
                    pi * (pi * p[0]).cos() * (pi * p[1]).sin(),
                    0.0,
                ]
            }
        }
    }

    /// Exact pressure up to the additive gauge.
    pub fn pressure(&self, p: &[f64]) -> f64 {
        match self {
            AnalyticCase::ConstantX => -p[0],
            AnalyticCase::CosCos => {
                let pi = std::f64::consts::PI;
                (pi * p[0]).cos() * (pi * p[1]).cos()
            }
        }
    }
}

/// Data for one analytic problem: source cochain, boundary flux values, and
/// the exact flux through every (n-1)-face for error measurement.
pub struct CaseData {
    pub source: Cochain,
    pub boundary_flux: Vec<f64>,
    pub exact_flux: Vec<f64>,
}

pub fn build_case_data(
    complex: &SimplicialComplex,
    measures: &DualMeasures,
    case: AnalyticCase,
) -> Result<CaseData, DarcyError> {
    let n = complex.dim();
    let faces: Vec<usize> = (0..complex.num_simplices(n - 1)).collect();
    match case {
        AnalyticCase::ConstantX => {
            let exact_flux = darcy::de_rham_flux(complex, &faces, |p| case.velocity(p))?;
            let boundary_flux = complex
                .boundary_faces()
                .iter()
                .map(|&f| exact_flux[f])
                .collect();
            Ok(CaseData {
                source: complex.zero_cochain(n, CochainKind::Primal),
                boundary_flux,
                exact_flux,
            })
        }
        AnalyticCase::CosCos => {
            if n != 2 {
                return Err(DarcyError::FlatEmbeddingRequired);
            }
            let _ = measures;
            let exact_flux: Vec<f64> = faces
                .iter()
                .map(|&f| {
                    let t = complex.simplex(1, f);
                    coscos_edge_flux(complex.vertex(t[0]), complex.vertex(t[1]))
                })
                .collect();
            // source per cell = boundary sum of the exact edge fluxes, which
            // is the exact integral of phi by the divergence theorem and is
            // consistent with the boundary data to rounding
            let d = complex
                .exterior_derivative_matrix(1)
                .expect("n = 2")
                .to_f64();
            let mut source = vec![0.0; complex.num_simplices(2)];
            d.matvec(&exact_flux, &mut source);
            let boundary_flux = complex
                .boundary_faces()
                .iter()
                .map(|&f| exact_flux[f])
                .collect();
            Ok(CaseData {
                source: Cochain::new(2, CochainKind::Primal, source),
                boundary_flux,
                exact_flux,
            })
        }
    }
}

/// Exact flux of the trigonometric velocity through one straight edge:
/// the integrand splits into two sinusoids via product-to-sum, each of which
/// integrates in closed form.
pub fn coscos_edge_flux(a: &[f64], b: &[f64]) -> f64 {
    let pi = std::f64::consts::PI;
    let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
    let sum0 = pi * (a[0] + a[1]);
    let dif0 = pi * (a[0] - a[1]);
    let qs = pi * (tx + ty);
    let qd = pi * (tx - ty);
    0.5 * pi * ((ty - tx) * mean_sin(sum0, qs) + (ty + tx) * mean_sin(dif0, qd))
}

/// Mean of sin(p + q t) over t in [0, 1], stable for small q.
fn mean_sin(p: f64, q: f64) -> f64 {
    if q == 0.0 {
        return p.sin();
    }
    let half = 0.5 * q;
    p.sin() * (q.sin() / q) + p.cos() * (2.0 * half.sin() * half.sin() / q)
}

/// Material layout: uniform, split along x, or horizontal layers.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaSpec {
    Uniform(f64),
    /// `left` for cells with barycenter x below `at`, `right` above.
    SplitX {
        at: f64,
        left: f64,
        right: f64,
    },
    /// Equal-height horizontal bands over the mesh's y-extent, bottom first.
    LayersY(Vec<f64>),
    /// Values looked up from per-element region attributes.
    ByRegion(Vec<(f64, f64)>),
}

impl KappaSpec {
    /// Per-cell permeability vector. Cells are classified by barycenter, so
    /// layouts must conform to the mesh for the result to be meaningful.
    pub fn kappa_for(
        &self,
        complex: &SimplicialComplex,
        region_attrs: Option<&[f64]>,
    ) -> Result<Vec<f64>, String> {
        let n = complex.dim();
        let n_cells = complex.num_simplices(n);
        match self {
            KappaSpec::Uniform(k) => Ok(vec![*k; n_cells]),
            KappaSpec::SplitX { at, left, right } => Ok((0..n_cells)
                .map(|cell| {
                    if barycenter(complex, cell)[0] < *at {
                        *left
                    } else {
                        *right
                    }
                })
                .collect()),
            KappaSpec::LayersY(values) => {
                if values.is_empty() {
                    return Err("at least one layer value required".into());
                }
                let mut ymin = f64::INFINITY;
                let mut ymax = f64::NEG_INFINITY;
                for v in 0..complex.num_vertices() {
                    ymin = ymin.min(complex.vertex(v)[1]);
                    ymax = ymax.max(complex.vertex(v)[1]);
                }
                let m = values.len();
                Ok((0..n_cells)
                    .map(|cell| {
                        let y = barycenter(complex, cell)[1];
                        let t = (y - ymin) / (ymax - ymin);
                        let idx = ((t * m as f64) as usize).min(m - 1);
                        values[idx]
                    })
                    .collect())
            }
            KappaSpec::ByRegion(map) => {
                let attrs = region_attrs.ok_or("mesh carries no region attributes")?;
                if attrs.len() != n_cells {
                    return Err("region attribute count does not match cells".into());
                }
                attrs
                    .iter()
                    .map(|a| {
                        map.iter()
                            .find(|(region, _)| region == a)
                            .map(|(_, k)| *k)
                            .ok_or_else(|| format!("no permeability for region {a}"))
                    })
                    .collect()
            }
        }
    }

    /// Layer index per cell for layered layouts (used to group assertions).
    pub fn layer_index(&self, complex: &SimplicialComplex, cell: usize) -> Option<usize> {
        match self {
            KappaSpec::LayersY(values) => {
                let mut ymin = f64::INFINITY;
                let mut ymax = f64::NEG_INFINITY;
                for v in 0..complex.num_vertices() {
                    ymin = ymin.min(complex.vertex(v)[1]);
                    ymax = ymax.max(complex.vertex(v)[1]);
                }
                let y = barycenter(complex, cell)[1];
                let t = (y - ymin) / (ymax - ymin);
                Some(((t * values.len() as f64) as usize).min(values.len() - 1))
            }
            _ => None,
        }
    }
}

pub fn barycenter(complex: &SimplicialComplex, cell: usize) -> [f64; 3] {
    let n = complex.dim();
    let nd = complex.embed_dim();
    let tuple = complex.simplex(n, cell);
    let mut c = [0.0; 3];
    for &v in tuple {
        for d in 0..nd {
            c[d] += complex.vertex(v)[d] / (n + 1) as f64;
        }
    }
    c
}

/// Boundary data for the layered setup: each boundary face carries the flux
/// of the constant per-cell field `v = (kappa_cell, 0)`, which together with
/// zero source makes `p = -mu x` the exact solution for any layer pattern.
pub fn layered_boundary_flux(
    complex: &SimplicialComplex,
    kappa: &[f64],
) -> Result<Vec<f64>, DarcyError> {
    let mut out = Vec::with_capacity(complex.boundary_faces().len());
    for &face in complex.boundary_faces() {
        let (coface, _) = complex.face_cofaces(face);
        let k = kappa[coface.cell];
        let vals = darcy::de_rham_flux(complex, &[face], |_p| [k, 0.0, 0.0])?;
        out.push(vals[0]);
    }
    Ok(out)
}

/// The interior faces across which the permeability jumps.
pub fn interface_faces(complex: &SimplicialComplex, kappa: &[f64]) -> Vec<usize> {
    let n = complex.dim();
    (0..complex.num_simplices(n - 1))
        .filter(|&face| {
            let (first, second) = complex.face_cofaces(face);
            match second {
                Some(second) => kappa[first.cell] != kappa[second.cell],
                None => false,
            }
        })
        .collect()
}
