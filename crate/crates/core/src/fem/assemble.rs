use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use super::{ElementOrder, FemError};
use crate::geometry::Point;
use crate::mesh::{EdgeTag, Mesh, VertexTag};
use crate::par::{self, Execution};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// y = A x
    pub fn matvec(&self, exec: Execution, x: &[f64], y: &mut [f64]) {
        par::fill_indexed(exec, y, |i| {
            let (c, v) = self.row(i);
            let mut s = 0.0;
            for (j, a) in c.iter().zip(v) {
                s += a * x[*j];
            }
            s
        });
    }

    /// xᵀ A x
    pub fn quadratic_form(&self, exec: Execution, x: &[f64]) -> f64 {
        par::sum_indexed(exec, self.n, |i| {
            let (c, v) = self.row(i);
            let mut s = 0.0;
            for (j, a) in c.iter().zip(v) {
                s += a * x[*j];
            }
            x[i] * s
        })
    }

    /// max |a_ij − a_ji| relative to max |a_ij|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                scale = scale.max(a.abs());
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }
}

/// Degrees of freedom of a mesh: vertices first, then edge midpoints for
/// order 2 in order of first appearance.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub order: ElementOrder,
    /// Per triangle; only the first `order.local_dofs()` entries are used.
    pub elements: Vec<[usize; 6]>,
    pub points: Vec<Point>,
    /// Prescribed value: 1 on the compact set, 0 on the outer boundary.
    pub dirichlet: Vec<Option<f64>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, order: ElementOrder) -> Self {
        let nv = mesh.num_vertices();
        let mut points = mesh.vertices.clone();
        let mut dirichlet: Vec<Option<f64>> = mesh
            .tags
            .iter()
            .map(|t| match t {
                VertexTag::Interior => None,
                VertexTag::Outer => Some(0.0),
                VertexTag::Compact => Some(1.0),
            })
            .collect();
        let mut elements = Vec::with_capacity(mesh.num_triangles());
        if order == ElementOrder::Linear {
            for &[a, b, c] in &mesh.triangles {
                elements.push([a, b, c, usize::MAX, usize::MAX, usize::MAX]);
            }
        } else {
            let constraint: HashMap<(usize, usize), EdgeTag> =
                mesh.edges.iter().map(|e| ((e.a.min(e.b), e.a.max(e.b)), e.tag)).collect();
            let mut edge_dof: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * mesh.num_triangles() / 2);
            for &[a, b, c] in &mesh.triangles {
                let mut mid = |x: usize, y: usize| -> usize {
                    let key = (x.min(y), x.max(y));
                    *edge_dof.entry(key).or_insert_with(|| {
                        points.push(mesh.vertices[x].midpoint(mesh.vertices[y]));
                        dirichlet.push(match constraint.get(&key) {
                            Some(EdgeTag::Compact) => Some(1.0),
                            Some(EdgeTag::Outer | EdgeTag::Wall) => Some(0.0),
                            None => None,
                        });
                        points.len() - 1
                    })
                };
                elements.push([a, b, c, mid(a, b), mid(b, c), mid(c, a)]);
            }
        }
        debug_assert!(points.len() >= nv);
        DofMap { order, elements, points, dirichlet }
    }

    pub fn num_dofs(&self) -> usize {
        self.points.len()
    }

    pub fn num_free(&self) -> usize {
        self.dirichlet.iter().filter(|d| d.is_none()).count()
    }

    pub fn local(&self, t: usize) -> &[usize] {
        &self.elements[t][..self.order.local_dofs()]
    }
}

/// Gradients of the barycentric coordinates and the triangle area.
pub(crate) fn barycentric_gradients([p0, p1, p2]: [Point; 3]) -> ([Point; 3], f64) {
    let det = (p1 - p0).cross(p2 - p0);
    let g = |a: Point, b: Point| Point::new(a.y - b.y, b.x - a.x) * (1.0 / det);
    ([g(p1, p2), g(p2, p0), g(p0, p1)], 0.5 * det)
}

/// Gradients of the local basis at barycentric point `l`.
pub(crate) fn basis_gradients(order: ElementOrder, g: &[Point; 3], l: [f64; 3]) -> [Point; 6] {
    match order {
        ElementOrder::Linear => [g[0], g[1], g[2], Point::default(), Point::default(), Point::default()],
        ElementOrder::Quadratic => {
            let edge = |a: usize, b: usize| (g[b] * l[a] + g[a] * l[b]) * 4.0;
            [
                g[0] * (4.0 * l[0] - 1.0),
                g[1] * (4.0 * l[1] - 1.0),
                g[2] * (4.0 * l[2] - 1.0),
                edge(0, 1),
                edge(1, 2),
                edge(2, 0),
            ]
        }
    }
}

/// Three interior points, exact for quadratics.
const STIFFNESS_RULE: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

/// Local stiffness matrix ∫ ∇φ_i · ∇φ_j, row major 6×6 (the leading 3×3
/// block for order 1).
pub fn element_stiffness(order: ElementOrder, pts: [Point; 3]) -> Result<[f64; 36], FemError> {
    let (g, area) = barycentric_gradients(pts);
    if !(area > 0.0) || !area.is_finite() {
        return Err(FemError::DegenerateElement(usize::MAX));
    }
    let k = order.local_dofs();
    let mut m = [0.0; 36];
    match order {
        ElementOrder::Linear => {
            for i in 0..3 {
                for j in 0..3 {
                    m[6 * i + j] = area * g[i].dot(g[j]);
                }
            }
        }
        ElementOrder::Quadratic => {
            for (l, w) in STIFFNESS_RULE {
                let d = basis_gradients(order, &g, l);
                for i in 0..k {
                    for j in 0..k {
                        m[6 * i + j] += w * area * d[i].dot(d[j]);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Discrete Laplace–Dirichlet system.
#[derive(Clone, Debug)]
pub struct System {
    pub dofs: Arc<DofMap>,
    /// Stiffness over all degrees of freedom, before elimination.
    pub full: CsrMatrix,
    /// Block over free degrees of freedom.
    pub stiffness: CsrMatrix,
    /// Right-hand side from the Dirichlet lift.
    pub load: Vec<f64>,
    /// Free index to dof.
    pub free: Vec<usize>,
    /// Dof to free index, `usize::MAX` for prescribed dofs.
    pub free_index: Vec<usize>,
}

pub fn assemble(mesh: &Mesh, order: ElementOrder) -> Result<System, FemError> {
    assemble_with(mesh, order, Execution::default())
}

/// Element matrices are computed in parallel; each matrix row then gathers
/// its contributions in element order, so the result does not depend on the
/// execution strategy.
pub fn assemble_with(mesh: &Mesh, order: ElementOrder, exec: Execution) -> Result<System, FemError> {
    let dofs = Arc::new(DofMap::new(mesh, order));
    let ne = mesh.num_triangles();
    let local: Vec<Result<[f64; 36], FemError>> = par::map_range(exec, ne, |t| {
        element_stiffness(order, mesh.triangle_points(t)).map_err(|_| FemError::DegenerateElement(t))
    });
    let local: Vec<[f64; 36]> = local.into_iter().collect::<Result<_, _>>()?;

    // incidence lists: dof -> (element, local index)
    let n = dofs.num_dofs();
    let mut count = vec![0usize; n + 1];
    for t in 0..ne {
        for &d in dofs.local(t) {
            count[d + 1] += 1;
        }
    }
    for i in 0..n {
        count[i + 1] += count[i];
    }
    let mut fill = count.clone();
    let mut incid = vec![(0u32, 0u8); count[n]];
    for t in 0..ne {
        for (li, &d) in dofs.local(t).iter().enumerate() {
            incid[fill[d]] = (t as u32, li as u8);
            fill[d] += 1;
        }
    }

    let rows: Vec<(Vec<usize>, Vec<f64>)> = par::map_range(exec, n, |r| {
        let inc = &incid[count[r]..count[r + 1]];
        let mut cols: Vec<usize> = inc.iter().flat_map(|&(t, _)| dofs.local(t as usize).iter().copied()).collect();
        cols.sort_unstable();
        cols.dedup();
        let mut vals = vec![0.0; cols.len()];
        for &(t, li) in inc {
            let m = &local[t as usize];
            for (lj, &c) in dofs.local(t as usize).iter().enumerate() {
                let pos = cols.binary_search(&c).expect("column in pattern");
                vals[pos] += m[6 * li as usize + lj];
            }
        }
        (cols, vals)
    });
    let full = concat_rows(n, rows.iter().map(|(c, v)| (c.as_slice(), v.as_slice())));

    let mut free = Vec::new();
    let mut free_index = vec![usize::MAX; n];
    for (d, p) in dofs.dirichlet.iter().enumerate() {
        if p.is_none() {
            free_index[d] = free.len();
            free.push(d);
        }
    }
    check_anchored(&full, &dofs)?;

    let blocks: Vec<(Vec<usize>, Vec<f64>, f64)> = par::map_slice(exec, &free, |&d| {
        let (c, v) = full.row(d);
        let mut cols = Vec::with_capacity(c.len());
        let mut vals = Vec::with_capacity(c.len());
        let mut rhs = 0.0;
        for (&j, &a) in c.iter().zip(v) {
            match dofs.dirichlet[j] {
                None => {
                    cols.push(free_index[j]);
                    vals.push(a);
                }
                Some(g) => rhs -= a * g,
            }
        }
        (cols, vals, rhs)
    });
    let load = blocks.iter().map(|b| b.2).collect();
    let stiffness = concat_rows(free.len(), blocks.iter().map(|(c, v, _)| (c.as_slice(), v.as_slice())));
    Ok(System { dofs, full, stiffness, load, free, free_index })
}

fn concat_rows<'a>(n: usize, rows: impl Iterator<Item = (&'a [usize], &'a [f64])>) -> CsrMatrix {
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for (c, v) in rows {
        cols.extend_from_slice(c);
        vals.extend_from_slice(v);
        row_ptr.push(cols.len());
    }
    CsrMatrix { n, row_ptr, cols, vals }
}

/// Every free dof must be connected to a prescribed one, otherwise the
/// free block is singular.
fn check_anchored(full: &CsrMatrix, dofs: &DofMap) -> Result<(), FemError> {
    let n = full.n;
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&d| dofs.dirichlet[d].is_some()).collect();
    if queue.is_empty() && n > 0 {
        return Err(FemError::Singular("no Dirichlet degrees of freedom".into()));
    }
    for &d in &queue {
        seen[d] = true;
    }
    while let Some(d) = queue.pop_front() {
        for &j in full.row(d).0 {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(d) => Err(FemError::Singular(format!("dof {d} is not connected to the boundary"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const REF: [Point; 3] = [Point { x: 0.0, y: 0.0 }, Point { x: 1.0, y: 0.0 }, Point { x: 0.0, y: 1.0 }];

    #[test]
    fn reference_triangle_linear() {
        let m = element_stiffness(ElementOrder::Linear, REF).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(m[6 * i + j], expect[i][j], epsilon = 1e-15);
            }
            assert!((0..3).map(|j| m[6 * i + j]).sum::<f64>().abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_rows_sum_to_zero_and_reproduce_linear_energy() {
        let pts = [Point::new(0.1, -0.2), Point::new(1.3, 0.4), Point::new(0.2, 0.9)];
        let m = element_stiffness(ElementOrder::Quadratic, pts).unwrap();
        for i in 0..6 {
            assert!((0..6).map(|j| m[6 * i + j]).sum::<f64>().abs() < 1e-13);
            for j in 0..6 {
                assert_relative_eq!(m[6 * i + j], m[6 * j + i], epsilon = 1e-14);
            }
        }
        // u = x interpolated exactly: energy = area
        let xs: Vec<f64> = pts.iter().map(|p| p.x).chain([0, 1, 2].map(|k| 0.5 * (pts[k].x + pts[(k + 1) % 3].x))).collect();
        let e: f64 = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| xs[i] * m[6 * i + j] * xs[j]).sum();
        let area = 0.5 * (pts[1] - pts[0]).cross(pts[2] - pts[0]);
        assert_relative_eq!(e, area, max_relative = 1e-13);
    }

    #[test]
    fn degenerate_element_rejected() {
        let pts = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(element_stiffness(ElementOrder::Linear, pts).is_err());
    }
}
