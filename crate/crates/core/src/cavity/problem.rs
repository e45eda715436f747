use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::cavity::element::{ReferenceTables, NQ};
use crate::cavity::mesh::{CavityMesh, NodeKind};
use crate::error::{Error, Result};
use crate::krylov::{fgmres, GmresParams, PrecondOperator};
use crate::mlilu::{factorize, FactorParams};
use crate::nonlinear::NonlinearProblem;
use crate::sparse::CsrMatrix;

const NONE: usize = usize::MAX;

/// Horizontal velocity prescribed on the top wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LidProfile {
    /// `u = (1, 0)`, corners included.
    #[default]
    Standard,
    /// `u = (1 - x⁴, 0)`.
    Regularized,
    /// `u = 0`: the homogeneous problem.
    AtRest,
}

impl LidProfile {
    pub fn velocity(self, x: f64) -> f64 {
        match self {
            LidProfile::Standard => 1.0,
            LidProfile::Regularized => 1.0 - x.powi(4),
            LidProfile::AtRest => 0.0,
        }
    }
}

impl fmt::Display for LidProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LidProfile::Standard => "standard",
            LidProfile::Regularized => "regularized",
            LidProfile::AtRest => "rest",
        })
    }
}

impl FromStr for LidProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(LidProfile::Standard),
            "regularized" => Ok(LidProfile::Regularized),
            "rest" => Ok(LidProfile::AtRest),
            other => Err(Error::InvalidParameter(format!("unknown lid profile `{other}`"))),
        }
    }
}

/// Which bilinear forms an assembly pass includes.
#[derive(Debug, Clone, Copy, Default)]
struct Terms {
    viscous: bool,
    convection: bool,
    cross: bool,
    divergence: bool,
    pressure_mass: bool,
}

/// Steady incompressible Navier–Stokes in the lid-driven cavity `[-1, 1]²`,
/// viscosity `ν = 2/Re`, P2-P1 elements.
///
/// Unknowns are `[u_x interior; u_y interior; p]` with interior velocity nodes
/// in mesh order and pressure on every vertex. Dirichlet values are eliminated;
/// the boundary lift enters through [`CavityProblem::residual`].
///
/// Discrete forms: `K = ν∫∇φ_i·∇φ_j` per component, `C(w) = ∫φ_i (w·∇φ_j)`,
/// `W(w)_{(i,c),(j,d)} = ∫φ_i φ_j ∂_d w_c`, `E = -∫ψ_q ∇·φ`.
pub struct CavityProblem {
    mesh: CavityMesh,
    re: f64,
    nu: f64,
    lid: LidProfile,
    vel_index: Vec<usize>,
    interior: Vec<usize>,
    tri_pressure: Vec<[usize; 3]>,
    lift: Vec<[f64; 2]>,
    tables: ReferenceTables,
    pressure_weights: Vec<f64>,
    stokes: CsrMatrix,
}

impl CavityProblem {
    pub fn new(level: u32, re: f64, lid: LidProfile) -> Result<Self> {
        if !(re > 0.0 && re.is_finite()) {
            return Err(Error::InvalidParameter(format!("Reynolds number must be positive, got {re}")));
        }
        let mesh = CavityMesh::new(level)?;
        let mut vel_index = vec![NONE; mesh.num_nodes()];
        let mut interior = Vec::new();
        for (node, kind) in mesh.kinds().iter().enumerate() {
            if *kind == NodeKind::Interior {
                vel_index[node] = interior.len();
                interior.push(node);
            }
        }
        let lift = mesh
            .coords()
            .iter()
            .zip(mesh.kinds())
            .map(|(xy, kind)| match kind {
                NodeKind::Lid => [lid.velocity(xy[0]), 0.0],
                _ => [0.0, 0.0],
            })
            .collect();
        let tri_pressure = mesh
            .triangles()
            .iter()
            .map(|t| [mesh.pressure_index(t[0]), mesh.pressure_index(t[1]), mesh.pressure_index(t[2])])
            .collect();
        let mut prob = Self {
            mesh,
            re,
            nu: 2.0 / re,
            lid,
            vel_index,
            interior,
            tri_pressure,
            lift,
            tables: ReferenceTables::new(),
            pressure_weights: Vec::new(),
            stokes: CsrMatrix::zeros(0, 0),
        };
        let terms = Terms {
            viscous: true,
            divergence: true,
            ..Terms::default()
        };
        prob.stokes = prob.assemble(None, terms, true);
        let (_, _, mp) = prob.assemble_constant();
        prob.pressure_weights = (0..mp.nrows()).map(|i| mp.row(i).1.iter().sum()).collect();
        Ok(prob)
    }

    pub fn mesh(&self) -> &CavityMesh {
        &self.mesh
    }

    pub fn reynolds(&self) -> f64 {
        self.re
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lid(&self) -> LidProfile {
        self.lid
    }

    /// Velocity unknowns per component.
    pub fn n_velocity(&self) -> usize {
        self.interior.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.pressure_nodes().len()
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.n_velocity() + self.n_pressure()
    }

    /// Nodal velocity on every mesh node: boundary data plus the interior unknowns of `x`.
    pub fn full_velocity(&self, x: &[f64]) -> Vec<[f64; 2]> {
        assert_eq!(x.len(), self.n_unknowns(), "state length");
        let nv = self.n_velocity();
        let mut u = self.lift.clone();
        for (k, &node) in self.interior.iter().enumerate() {
            u[node] = [x[k], x[nv + k]];
        }
        u
    }

    pub fn pressure<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[2 * self.n_velocity()..]
    }

    /// Unit vector spanning the constant-pressure null space.
    pub fn null_vector(&self) -> Vec<f64> {
        let nv = self.n_velocity();
        let np = self.n_pressure();
        let mut q = vec![0.0; 2 * nv + np];
        let c = 1.0 / (np as f64).sqrt();
        q[2 * nv..].iter_mut().for_each(|v| *v = c);
        q
    }

    /// Stokes operator `[[K, Eᵀ], [E, 0]]` on the unknowns.
    pub fn stokes_operator(&self) -> &CsrMatrix {
        &self.stokes
    }

    /// Picard operator `[[K + C(u), Eᵀ], [E, 0]]`.
    pub fn oseen_operator(&self, x: &[f64]) -> CsrMatrix {
        let u = self.full_velocity(x);
        let terms = Terms {
            viscous: true,
            convection: true,
            divergence: true,
            ..Terms::default()
        };
        self.assemble(Some(&u), terms, true)
    }

    /// Jacobian `[[K + C(u) + W(u), Eᵀ], [E, 0]]`.
    pub fn newton_operator(&self, x: &[f64]) -> CsrMatrix {
        let u = self.full_velocity(x);
        let terms = Terms {
            viscous: true,
            convection: true,
            cross: true,
            divergence: true,
            ..Terms::default()
        };
        self.assemble(Some(&u), terms, true)
    }

    /// Boundary-free forms on all nodes: scalar `K` (per component), `E` with
    /// columns `[x-components; y-components]` of every node, and the pressure mass matrix.
    pub fn assemble_constant(&self) -> (CsrMatrix, CsrMatrix, CsrMatrix) {
        let nn = self.mesh.num_nodes();
        let np = self.n_pressure();
        let terms = Terms {
            viscous: true,
            divergence: true,
            pressure_mass: true,
            ..Terms::default()
        };
        let full = self.assemble(None, terms, false);
        let identity_cols = |lo: usize, len: usize| -> Vec<usize> {
            (0..2 * nn + np)
                .map(|j| if j >= lo && j < lo + len { j - lo } else { NONE })
                .collect()
        };
        let rows_v: Vec<usize> = (0..nn).collect();
        let rows_p: Vec<usize> = (2 * nn..2 * nn + np).collect();
        let k = full.select(&rows_v, &identity_cols(0, nn), nn);
        let e = full.select(&rows_p, &identity_cols(0, 2 * nn), 2 * nn);
        let mp = full.select(&rows_p, &identity_cols(2 * nn, np), np);
        (k, e, mp)
    }

    /// Convection forms for the full nodal field `u` without boundary
    /// elimination: scalar `C(u)` on all nodes and `W(u)` on `[x; y]` components.
    pub fn convection_full(&self, u: &[[f64; 2]]) -> (CsrMatrix, CsrMatrix) {
        let nn = self.mesh.num_nodes();
        let dim = 2 * nn + self.n_pressure();
        let c = self.assemble(Some(u), Terms { convection: true, ..Terms::default() }, false);
        let w = self.assemble(Some(u), Terms { cross: true, ..Terms::default() }, false);
        let cols = |len: usize| -> Vec<usize> { (0..dim).map(|j| if j < len { j } else { NONE }).collect() };
        let c = c.select(&(0..nn).collect::<Vec<_>>(), &cols(nn), nn);
        let w = w.select(&(0..2 * nn).collect::<Vec<_>>(), &cols(2 * nn), 2 * nn);
        (c, w)
    }

    /// `C(u)` and `W(u)` on the velocity unknowns (both `2n_v × 2n_v`).
    pub fn assemble_convection(&self, x: &[f64]) -> (CsrMatrix, CsrMatrix) {
        let nv2 = 2 * self.n_velocity();
        let u = self.full_velocity(x);
        let dim = self.n_unknowns();
        let cols: Vec<usize> = (0..dim).map(|j| if j < nv2 { j } else { NONE }).collect();
        let rows: Vec<usize> = (0..nv2).collect();
        let c = self.assemble(Some(&u), Terms { convection: true, ..Terms::default() }, true);
        let w = self.assemble(Some(&u), Terms { cross: true, ..Terms::default() }, true);
        (c.select(&rows, &cols, nv2), w.select(&rows, &cols, nv2))
    }

    fn assemble(&self, u: Option<&[[f64; 2]]>, terms: Terms, reduced: bool) -> CsrMatrix {
        let nn = self.mesh.num_nodes();
        let nv = self.n_velocity();
        let (vel_rows, dim) = if reduced {
            (2 * nv, self.n_unknowns())
        } else {
            (2 * nn, 2 * nn + self.n_pressure())
        };
        let vdof = |node: usize, c: usize| -> usize {
            if reduced {
                match self.vel_index[node] {
                    NONE => NONE,
                    k => c * nv + k,
                }
            } else {
                c * nn + node
            }
        };
        let nu = self.nu;
        let coords = self.mesh.coords();
        let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(self.mesh.triangles().len() * 200);

        for (tri, ptri) in self.mesh.triangles().iter().zip(&self.tri_pressure) {
            let b = self.tables.element([coords[tri[0]], coords[tri[1]], coords[tri[2]]]);
            let mut uq = [[0.0f64; 2]; NQ];
            let mut gq = [[[0.0f64; 2]; 2]; NQ];
            if let Some(u) = u {
                for q in 0..NQ {
                    for (i, &node) in tri.iter().enumerate() {
                        for c in 0..2 {
                            uq[q][c] += b.phi[q][i] * u[node][c];
                            for d in 0..2 {
                                gq[q][c][d] += b.dphi[q][i][d] * u[node][c];
                            }
                        }
                    }
                }
            }

            let mut a = [[0.0f64; 6]; 6];
            let mut w = [[[[0.0f64; 6]; 6]; 2]; 2];
            let mut e = [[[0.0f64; 6]; 2]; 3];
            let mut mp = [[0.0f64; 3]; 3];
            for q in 0..NQ {
                let wq = b.w[q];
                for i in 0..6 {
                    for j in 0..6 {
                        let mut v = 0.0;
                        if terms.viscous {
                            v += nu * (b.dphi[q][i][0] * b.dphi[q][j][0] + b.dphi[q][i][1] * b.dphi[q][j][1]);
                        }
                        if terms.convection {
                            v += b.phi[q][i] * (uq[q][0] * b.dphi[q][j][0] + uq[q][1] * b.dphi[q][j][1]);
                        }
                        a[i][j] += wq * v;
                        if terms.cross {
                            let pp = wq * b.phi[q][i] * b.phi[q][j];
                            for c in 0..2 {
                                for d in 0..2 {
                                    w[c][d][i][j] += pp * gq[q][c][d];
                                }
                            }
                        }
                    }
                }
                if terms.divergence {
                    for (r, er) in e.iter_mut().enumerate() {
                        for d in 0..2 {
                            for j in 0..6 {
                                er[d][j] -= wq * b.psi[q][r] * b.dphi[q][j][d];
                            }
                        }
                    }
                }
                if terms.pressure_mass {
                    for r in 0..3 {
                        for s in 0..3 {
                            mp[r][s] += wq * b.psi[q][r] * b.psi[q][s];
                        }
                    }
                }
            }

            let velocity_block = terms.viscous || terms.convection || terms.cross;
            for c in 0..2 {
                for i in 0..6 {
                    let row = vdof(tri[i], c);
                    if row == NONE {
                        continue;
                    }
                    for j in 0..6 {
                        if velocity_block {
                            let col = vdof(tri[j], c);
                            if col != NONE {
                                let mut v = a[i][j];
                                if terms.cross {
                                    v += w[c][c][i][j];
                                }
                                trip.push((row, col, v));
                            }
                        }
                        if terms.cross {
                            let d = 1 - c;
                            let col = vdof(tri[j], d);
                            if col != NONE {
                                trip.push((row, col, w[c][d][i][j]));
                            }
                        }
                    }
                }
            }
            if terms.divergence {
                for r in 0..3 {
                    let prow = vel_rows + ptri[r];
                    for d in 0..2 {
                        for j in 0..6 {
                            let col = vdof(tri[j], d);
                            if col != NONE {
                                trip.push((prow, col, e[r][d][j]));
                                trip.push((col, prow, e[r][d][j]));
                            }
                        }
                    }
                }
            }
            if terms.pressure_mass {
                for r in 0..3 {
                    for s in 0..3 {
                        trip.push((vel_rows + ptri[r], vel_rows + ptri[s], mp[r][s]));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(dim, dim, &trip).expect("assembly indices in range")
    }

    /// Nonlinear residual `[K u + C(u) u + Eᵀ p; E u]` with the boundary lift
    /// included in `u`, restricted to the unknowns.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.residual_terms(x, true)
    }

    /// Residual of the Stokes problem (no convection).
    pub fn stokes_residual(&self, x: &[f64]) -> Vec<f64> {
        self.residual_terms(x, false)
    }

    fn residual_terms(&self, x: &[f64], convection: bool) -> Vec<f64> {
        let u = self.full_velocity(x);
        let p = self.pressure(x);
        let nv = self.n_velocity();
        let mut f = vec![0.0; self.n_unknowns()];
        let coords = self.mesh.coords();
        for (tri, ptri) in self.mesh.triangles().iter().zip(&self.tri_pressure) {
            let b = self.tables.element([coords[tri[0]], coords[tri[1]], coords[tri[2]]]);
            let mut rm = [[0.0f64; 2]; 6];
            let mut rc = [0.0f64; 3];
            for q in 0..NQ {
                let mut uq = [0.0f64; 2];
                let mut g = [[0.0f64; 2]; 2];
                for (i, &node) in tri.iter().enumerate() {
                    for c in 0..2 {
                        uq[c] += b.phi[q][i] * u[node][c];
                        for d in 0..2 {
                            g[c][d] += b.dphi[q][i][d] * u[node][c];
                        }
                    }
                }
                let pq: f64 = (0..3).map(|r| b.psi[q][r] * p[ptri[r]]).sum();
                let wq = b.w[q];
                for i in 0..6 {
                    for c in 0..2 {
                        let mut v = self.nu * (b.dphi[q][i][0] * g[c][0] + b.dphi[q][i][1] * g[c][1])
                            - pq * b.dphi[q][i][c];
                        if convection {
                            v += b.phi[q][i] * (uq[0] * g[c][0] + uq[1] * g[c][1]);
                        }
                        rm[i][c] += wq * v;
                    }
                }
                let div = g[0][0] + g[1][1];
                for r in 0..3 {
                    rc[r] -= wq * b.psi[q][r] * div;
                }
            }
            for (i, &node) in tri.iter().enumerate() {
                let k = self.vel_index[node];
                if k != NONE {
                    f[k] += rm[i][0];
                    f[nv + k] += rm[i][1];
                }
            }
            for r in 0..3 {
                f[2 * nv + ptri[r]] += rc[r];
            }
        }
        f
    }

    /// `∫ p` divided by the domain area.
    pub fn pressure_mean(&self, x: &[f64]) -> f64 {
        let p = self.pressure(x);
        p.iter().zip(&self.pressure_weights).map(|(a, b)| a * b).sum::<f64>() / 4.0
    }

    /// Solution of the Stokes problem with the same lid, pressure shifted to zero mean.
    pub fn stokes_initial_guess(&self) -> Result<Vec<f64>> {
        let n = self.n_unknowns();
        let zero = vec![0.0; n];
        let rhs: Vec<f64> = self.stokes_residual(&zero).iter().map(|v| -v).collect();
        let m = factorize(&self.stokes, &FactorParams::with_thresholds(5.0, 1e-3))?;
        let q = self.null_vector();
        let pre = PrecondOperator::new(&m, &self.stokes, Some(&q), 1)?;
        let params = GmresParams {
            restart: 30,
            max_iters: 600,
            rtol: 1e-10,
        };
        let (mut x, rep) = fgmres(&self.stokes, &pre, &rhs, &params)?;
        if !rep.converged {
            return Err(Error::LinearSolveFailed {
                iterations: rep.iterations,
                relres: rep.final_relres,
            });
        }
        let mean = self.pressure_mean(&x);
        let nv2 = 2 * self.n_velocity();
        x[nv2..].iter_mut().for_each(|p| *p -= mean);
        Ok(x)
    }

    /// `u_x` along the vertical centreline `x = 0`, bottom to top, as `(y, u_x)`.
    pub fn centerline(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let u = self.full_velocity(x);
        let side = self.mesh.nodes_per_side();
        let i = side / 2;
        (0..side)
            .map(|j| {
                let node = j * side + i;
                (self.mesh.coords()[node][1], u[node][0])
            })
            .collect()
    }

    /// Nodal pressure on every quadratic node, interpolated linearly.
    pub fn nodal_pressure(&self, x: &[f64]) -> Vec<f64> {
        let p = self.pressure(x);
        let side = self.mesh.nodes_per_side();
        let at = |i: usize, j: usize| p[self.mesh.pressure_index(j * side + i)];
        (0..side * side)
            .map(|node| {
                let (i, j) = (node % side, node / side);
                match (i % 2, j % 2) {
                    (0, 0) => at(i, j),
                    (1, 0) => 0.5 * (at(i - 1, j) + at(i + 1, j)),
                    (0, 1) => 0.5 * (at(i, j - 1) + at(i, j + 1)),
                    _ => 0.5 * (at(i - 1, j - 1) + at(i + 1, j + 1)),
                }
            })
            .collect()
    }

    /// Writes `x,y,u,v,p` for every quadratic node.
    pub fn write_solution_csv(&self, x: &[f64], path: impl AsRef<Path>) -> Result<()> {
        let u = self.full_velocity(x);
        let p = self.nodal_pressure(x);
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,y,u,v,p")?;
        for (node, xy) in self.mesh.coords().iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                xy[0], xy[1], u[node][0], u[node][1], p[node]
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

impl NonlinearProblem for CavityProblem {
    fn dim(&self) -> usize {
        self.n_unknowns()
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        CavityProblem::residual(self, x)
    }

    fn operator(&self, x: &[f64], newton: bool) -> CsrMatrix {
        if newton {
            self.newton_operator(x)
        } else {
            self.oseen_operator(x)
        }
    }

    /// The Oseen operator in both phases.
    fn sparsifier(&self, x: &[f64], _newton: bool) -> CsrMatrix {
        self.oseen_operator(x)
    }

    fn null_basis(&self) -> Option<Vec<f64>> {
        Some(self.null_vector())
    }
}
