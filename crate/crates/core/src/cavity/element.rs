//! Quadratic/linear Lagrange basis on triangles and a degree-5 quadrature rule.

/// Number of quadrature points.
pub const NQ: usize = 7;

/// Barycentric points and weights (weights sum to 1).
pub struct Quadrature {
    pub points: [[f64; 3]; NQ],
    pub weights: [f64; NQ],
}

/// Seven-point rule exact for polynomials of degree 5.
pub fn quadrature() -> Quadrature {
    let s = 15f64.sqrt();
    let (b1, w1) = ((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
    let (b2, w2) = ((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
    let (a1, a2) = (1.0 - 2.0 * b1, 1.0 - 2.0 * b2);
    let third = 1.0 / 3.0;
    Quadrature {
        points: [
            [third, third, third],
            [a1, b1, b1],
            [b1, a1, b1],
            [b1, b1, a1],
            [a2, b2, b2],
            [b2, a2, b2],
            [b2, b2, a2],
        ],
        weights: [9.0 / 40.0, w1, w1, w1, w2, w2, w2],
    }
}

/// Quadratic basis values at barycentric point `l`.
pub fn p2_values(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Derivatives of the quadratic basis with respect to each barycentric coordinate.
pub fn p2_dlambda(l: &[f64; 3]) -> [[f64; 3]; 6] {
    [
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [4.0 * l[1], 4.0 * l[0], 0.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
    ]
}

/// Basis tabulated at the quadrature points of one element.
pub struct ElementBasis {
    /// Quadrature weights times element area.
    pub w: [f64; NQ],
    pub phi: [[f64; 6]; NQ],
    pub dphi: [[[f64; 2]; 6]; NQ],
    pub psi: [[f64; 3]; NQ],
}

/// Tabulation shared by all elements: values depend only on the reference point.
pub struct ReferenceTables {
    quad: Quadrature,
    phi: [[f64; 6]; NQ],
    dl: [[[f64; 3]; 6]; NQ],
}

impl Default for ReferenceTables {
    fn default() -> Self {
        Self::new()
    }
}

impl ReferenceTables {
    pub fn new() -> Self {
        let quad = quadrature();
        let mut phi = [[0.0; 6]; NQ];
        let mut dl = [[[0.0; 3]; 6]; NQ];
        for q in 0..NQ {
            phi[q] = p2_values(&quad.points[q]);
            dl[q] = p2_dlambda(&quad.points[q]);
        }
        Self { quad, phi, dl }
    }

    /// Physical tabulation for the triangle with vertices `v` (counter-clockwise).
    pub fn element(&self, v: [[f64; 2]; 3]) -> ElementBasis {
        let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        let area = 0.5 * det;
        let grad_l = [
            [(v[1][1] - v[2][1]) / det, (v[2][0] - v[1][0]) / det],
            [(v[2][1] - v[0][1]) / det, (v[0][0] - v[2][0]) / det],
            [(v[0][1] - v[1][1]) / det, (v[1][0] - v[0][0]) / det],
        ];
        let mut out = ElementBasis {
            w: [0.0; NQ],
            phi: self.phi,
            dphi: [[[0.0; 2]; 6]; NQ],
            psi: self.quad.points,
        };
        for q in 0..NQ {
            out.w[q] = self.quad.weights[q] * area;
            for i in 0..6 {
                let d = &self.dl[q][i];
                for c in 0..2 {
                    out.dphi[q][i][c] = d[0] * grad_l[0][c] + d[1] * grad_l[1][c] + d[2] * grad_l[2][c];
                }
            }
        }
        out
    }
}
