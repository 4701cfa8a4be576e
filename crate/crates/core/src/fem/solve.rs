use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::assemble::{barycentric_gradients, basis_gradients, CsrMatrix, DofMap, System};
use super::{ElementOrder, FemError};
use crate::mesh::Mesh;
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    Jacobi,
    /// Zero fill-in incomplete Cholesky, with a diagonal shift retry if a
    /// pivot breaks down.
    #[default]
    IncompleteCholesky,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub rel_tol: f64,
    /// Defaults to a multiple of √n.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rel_tol: 1e-12, max_iter: None, preconditioner: Preconditioner::default(), exec: Execution::default() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// ‖b − A x‖ / ‖b‖, recomputed from the final iterate.
    pub rel_residual: f64,
    /// Relative diagonal shift the factorization needed (0 if none).
    pub ic_shift: f64,
}

/// Lower factor of an incomplete Cholesky factorization, by rows with the
/// diagonal last.
struct IncompleteCholesky {
    l: CsrMatrix,
}

impl IncompleteCholesky {
    fn factor(a: &CsrMatrix, shift: f64) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j < i {
                    cols.push(j);
                    vals.push(x);
                } else if j == i {
                    cols.push(j);
                    vals.push(x * (1.0 + shift));
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        let mut l = CsrMatrix { n, row_ptr, cols, vals };
        // position of column j in the current row, or MAX
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (lo, hi) = (l.row_ptr[i], l.row_ptr[i + 1]);
            if hi == lo || l.cols[hi - 1] != i {
                return None;
            }
            for k in lo..hi {
                pos[l.cols[k]] = k;
            }
            for k in lo..hi - 1 {
                let j = l.cols[k];
                let (jlo, jhi) = (l.row_ptr[j], l.row_ptr[j + 1]);
                let mut s = l.vals[k];
                for m in jlo..jhi - 1 {
                    let p = pos[l.cols[m]];
                    if p != usize::MAX && p < k {
                        s -= l.vals[p] * l.vals[m];
                    }
                }
                l.vals[k] = s / l.vals[jhi - 1];
            }
            let mut d = l.vals[hi - 1];
            for k in lo..hi - 1 {
                d -= l.vals[k] * l.vals[k];
            }
            for k in lo..hi {
                pos[l.cols[k]] = usize::MAX;
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            l.vals[hi - 1] = d.sqrt();
        }
        Some(IncompleteCholesky { l })
    }

    /// z = (L Lᵀ)⁻¹ r
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let l = &self.l;
        for i in 0..l.n {
            let (lo, hi) = (l.row_ptr[i], l.row_ptr[i + 1]);
            let mut s = r[i];
            for k in lo..hi - 1 {
                s -= l.vals[k] * z[l.cols[k]];
            }
            z[i] = s / l.vals[hi - 1];
        }
        for i in (0..l.n).rev() {
            let (lo, hi) = (l.row_ptr[i], l.row_ptr[i + 1]);
            z[i] /= l.vals[hi - 1];
            let zi = z[i];
            for k in lo..hi - 1 {
                z[l.cols[k]] -= l.vals[k] * zi;
            }
        }
    }
}

enum Precond {
    Jacobi(Vec<f64>),
    Ic(IncompleteCholesky),
}

impl Precond {
    fn build(a: &CsrMatrix, kind: Preconditioner) -> Result<(Self, f64), FemError> {
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(FemError::Singular(format!("nonpositive diagonal in row {i}")));
        }
        match kind {
            Preconditioner::Jacobi => Ok((Precond::Jacobi(diag.iter().map(|d| 1.0 / d).collect()), 0.0)),
            Preconditioner::IncompleteCholesky => {
                let mut shift = 0.0;
                loop {
                    if let Some(ic) = IncompleteCholesky::factor(a, shift) {
                        return Ok((Precond::Ic(ic), shift));
                    }
                    shift = if shift == 0.0 { 1e-3 } else { 2.0 * shift };
                    if shift > 1.0 {
                        return Ok((Precond::Jacobi(diag.iter().map(|d| 1.0 / d).collect()), shift));
                    }
                }
            }
        }
    }

    fn apply(&self, exec: Execution, r: &[f64], z: &mut [f64]) {
        match self {
            Precond::Jacobi(inv) => par::fill_indexed(exec, z, |i| inv[i] * r[i]),
            Precond::Ic(ic) => ic.apply(r, z),
        }
    }
}

/// Preconditioned conjugate gradients for A x = b from x = 0.
pub(crate) fn pcg(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveStats), FemError> {
    let n = a.n;
    let exec = opts.exec;
    let mut x = vec![0.0; n];
    let bnorm = par::dot(exec, b, b).sqrt();
    if n == 0 || bnorm == 0.0 {
        return Ok((x, SolveStats::default()));
    }
    let (pre, ic_shift) = Precond::build(a, opts.preconditioner)?;
    let max_iter = opts.max_iter.unwrap_or(200 + 20 * (n as f64).sqrt() as usize);
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    pre.apply(exec, &r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = par::dot(exec, &r, &z);
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        a.matvec(exec, &p, &mut ap);
        let pap = par::dot(exec, &p, &ap);
        if !(pap > 0.0) {
            return Err(FemError::Singular(format!("direction with pᵀAp = {pap:e}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        rel = par::dot(exec, &r, &r).sqrt() / bnorm;
        if rel <= opts.rel_tol {
            // confirm against the true residual
            a.matvec(exec, &x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rel = par::dot(exec, &r, &r).sqrt() / bnorm;
            if rel <= opts.rel_tol {
                return Ok((x, SolveStats { iterations, rel_residual: rel, ic_shift }));
            }
        }
        pre.apply(exec, &r, &mut z);
        let rz_new = par::dot(exec, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(FemError::NotConverged { iterations, residual: rel })
}

/// Discrete potential: nodal values over the dof map of a mesh.
#[derive(Clone, Debug)]
pub struct PotentialField<'m> {
    pub mesh: &'m Mesh,
    pub dofs: Arc<DofMap>,
    pub values: Vec<f64>,
    pub stats: SolveStats,
}

impl PotentialField<'_> {
    pub fn order(&self) -> ElementOrder {
        self.dofs.order
    }

    /// Smallest and largest nodal value.
    pub fn range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

pub fn solve<'m>(mesh: &'m Mesh, system: &System, opts: &SolveOptions) -> Result<PotentialField<'m>, FemError> {
    let (x, stats) = pcg(&system.stiffness, &system.load, opts)?;
    let dofs = system.dofs.clone();
    let mut values: Vec<f64> = dofs.dirichlet.iter().map(|d| d.unwrap_or(0.0)).collect();
    for (k, &d) in system.free.iter().enumerate() {
        values[d] = x[k];
    }
    Ok(PotentialField { mesh, dofs, values, stats })
}

/// Six-point rule, exact for quartics.
const ENERGY_RULE: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const B: f64 = 0.091_576_213_509_771;
    const WA: f64 = 0.223_381_589_678_011;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
};

pub fn energy(field: &PotentialField) -> f64 {
    energy_with(field, Execution::default())
}

/// ∫ |∇u_h|² by elementwise quadrature.
pub fn energy_with(field: &PotentialField, exec: Execution) -> f64 {
    let order = field.order();
    let k = order.local_dofs();
    par::sum_indexed(exec, field.mesh.num_triangles(), |t| {
        let (g, area) = barycentric_gradients(field.mesh.triangle_points(t));
        let dofs = field.dofs.local(t);
        let mut e = 0.0;
        for (l, w) in ENERGY_RULE {
            let d = basis_gradients(order, &g, l);
            let mut grad = crate::geometry::Point::default();
            for i in 0..k {
                grad = grad + d[i] * field.values[dofs[i]];
            }
            e += w * grad.norm2();
        }
        e * area
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> (CsrMatrix, Vec<f64>) {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            if i > 0 {
                cols.push(i - 1);
                vals.push(-1.0);
            }
            cols.push(i);
            vals.push(2.0);
            if i + 1 < n {
                cols.push(i + 1);
                vals.push(-1.0);
            }
            row_ptr.push(cols.len());
        }
        let b = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        (CsrMatrix { n, row_ptr, cols, vals }, b)
    }

    #[test]
    fn one_dof_is_exact() {
        let a = CsrMatrix { n: 1, row_ptr: vec![0, 1], cols: vec![0], vals: vec![4.0] };
        let (x, s) = pcg(&a, &[2.0], &SolveOptions::default()).unwrap();
        assert_eq!(x, vec![0.5]);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn ic0_is_exact_on_tridiagonal() {
        // no fill-in, so the incomplete factor is the Cholesky factor
        let (a, b) = tridiag(50);
        let (x, s) = pcg(&a, &b, &SolveOptions::default()).unwrap();
        assert!(s.iterations <= 2, "{}", s.iterations);
        let mut ax = vec![0.0; 50];
        a.matvec(Execution::Sequential, &x, &mut ax);
        assert!(ax.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    #[test]
    fn jacobi_converges_and_runs_are_bitwise_equal() {
        let (a, b) = tridiag(200);
        let seq = SolveOptions { preconditioner: Preconditioner::Jacobi, exec: Execution::Sequential, ..Default::default() };
        let par = SolveOptions { exec: Execution::Parallel, ..seq };
        let (x1, s1) = pcg(&a, &b, &seq).unwrap();
        let (x2, _) = pcg(&a, &b, &par).unwrap();
        assert!(s1.rel_residual <= 1e-12);
        assert!(x1.iter().zip(&x2).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let (a, b) = tridiag(200);
        let o = SolveOptions { preconditioner: Preconditioner::Jacobi, max_iter: Some(3), ..Default::default() };
        assert!(matches!(pcg(&a, &b, &o), Err(FemError::NotConverged { iterations: 3, .. })));
    }

    #[test]
    fn constant_field_has_zero_energy() {
        use crate::geometry::Point;
        use crate::mesh::{Mesh, VertexTag};
        let mesh = Mesh {
            vertices: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            tags: vec![VertexTag::Interior; 3],
            triangles: vec![[0, 1, 2]],
            edges: vec![],
            curves: vec![],
            corners: vec![],
            level: 0,
        };
        for order in [ElementOrder::Linear, ElementOrder::Quadratic] {
            let dofs = Arc::new(DofMap::new(&mesh, order));
            let n = dofs.num_dofs();
            let f = PotentialField { mesh: &mesh, dofs, values: vec![0.7; n], stats: SolveStats::default() };
            assert!(energy(&f).abs() < 1e-15);
        }
    }
}
