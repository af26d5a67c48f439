//! Dense Laplacian eigendecomposition with a reproducible basis inside degenerate eigenspaces.

use faer::linalg::matmul::matmul;
use faer::{Mat, MatRef, Parallelism, Side};
use serde::Serialize;

use super::{GraphKind, PermutationGraph};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Relative gap below which sorted eigenvalues are treated as equal.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Residual norm below which a projected basis vector is dropped.
pub const DROP_TOLERANCE: f64 = 1e-6;
/// Smallest magnitude counted as the "first nonzero" entry for the sign convention.
pub const SIGN_THRESHOLD: f64 = 1e-10;

const ORTHONORMALITY_LIMIT: f64 = 1e-8;
const RESIDUAL_LIMIT: f64 = 1e-7;
const BLOCK: usize = 64;

/// How a spectrum was produced and how well it verified.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub solver: String,
    pub cluster_tolerance: f64,
    pub drop_tolerance: f64,
    pub max_orthonormality_error: f64,
    pub max_residual: f64,
    pub trace_error: f64,
}

/// A run of equal eigenvalues `eigenvalues[start..start + multiplicity]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub start: usize,
    pub multiplicity: usize,
}

/// Eigenvalues in nondecreasing order and orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    n: usize,
    kind: GraphKind,
    eigenvalues: Vec<f64>,
    vectors: Mat<f64>,
    clusters: Vec<Cluster>,
    provenance: Provenance,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `u_i` (zero-based).
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        self.vectors.col_as_slice(i)
    }

    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    /// `λ₂`, or 0 for the single-vertex graph.
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("spectra are nonempty")
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn is_degenerate(&self) -> bool {
        self.clusters.iter().any(|c| c.multiplicity > 1)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

fn cluster_eigenvalues(values: &[f64]) -> Vec<Cluster> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - values[i - 1]).abs() <= CLUSTER_TOLERANCE * scale => c.multiplicity += 1,
            _ => clusters.push(Cluster {
                value: v,
                start: i,
                multiplicity: 1,
            }),
        }
    }
    for c in &mut clusters {
        c.value = compensated_sum(values[c.start..c.start + c.multiplicity].iter().copied()) / c.multiplicity as f64;
    }
    clusters
}

/// Replaces the solver's basis `v` (`N × m`) of one eigenspace by the Gram–Schmidt
/// orthonormalization of the projections of `e_0, e_1, …` onto it, dropping
/// projections whose residual falls below [`DROP_TOLERANCE`].
///
/// Works in the `m`-dimensional coefficient space (`P e_k = V Vᵀ e_k`, so the
/// coefficients of `e_k` are row `k` of `V`), in blocks of candidates with
/// classical Gram–Schmidt applied twice.
fn canonical_basis(v: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let (rows, m) = (v.nrows(), v.ncols());
    let mut q = Mat::<f64>::zeros(m, m);
    let mut accepted = 0;
    let mut k = 0;
    while accepted < m && k < rows {
        let width = BLOCK.min(rows - k);
        let mut c = v.subrows(k, width).transpose().to_owned();
        if accepted > 0 {
            for _ in 0..2 {
                let basis = q.as_ref().subcols(0, accepted);
                let mut coeff = Mat::<f64>::zeros(accepted, width);
                matmul(
                    coeff.as_mut(),
                    basis.transpose(),
                    c.as_ref(),
                    None,
                    1.0,
                    Parallelism::None,
                );
                matmul(c.as_mut(), basis, coeff.as_ref(), Some(1.0), -1.0, Parallelism::None);
            }
        }
        let block_start = accepted;
        for col in 0..width {
            if accepted == m {
                break;
            }
            let mut w: Vec<f64> = (0..m).map(|i| c.read(i, col)).collect();
            for _ in 0..2 {
                for t in block_start..accepted {
                    let qt = q.col_as_slice(t);
                    let d: f64 = qt.iter().zip(&w).map(|(a, b)| a * b).sum();
                    w.iter_mut().zip(qt).for_each(|(wi, qi)| *wi -= d * qi);
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > DROP_TOLERANCE {
                for (i, wi) in w.iter().enumerate() {
                    q.write(i, accepted, wi / norm);
                }
                accepted += 1;
            }
        }
        k += width;
    }
    if accepted < m {
        return Err(Error::Solver(format!(
            "projected standard basis spans only {accepted} of {m} dimensions"
        )));
    }
    let mut out = Mat::<f64>::zeros(rows, m);
    matmul(out.as_mut(), v, q.as_ref(), None, 1.0, Parallelism::None);
    Ok(out)
}

fn fix_sign(u: &mut Mat<f64>, col: usize) {
    let first = u.col_as_slice(col).iter().copied().find(|x| x.abs() > SIGN_THRESHOLD);
    if first.is_some_and(|x| x < 0.0) {
        for i in 0..u.nrows() {
            u.write(i, col, -u.read(i, col));
        }
    }
}

/// Full spectrum of the graph Laplacian, verified before it is returned.
///
/// Fails with [`Error::Solver`] when `λ₁ ≠ 0`, `UᵀU ≠ I`, `L·u ≠ λ·u` or the trace
/// identity is off by more than the documented tolerances.
pub fn decompose(g: &PermutationGraph) -> Result<Spectrum> {
    let size = g.vertex_count();
    if size == 1 {
        return Ok(Spectrum {
            n: g.n(),
            kind: g.kind(),
            eigenvalues: vec![0.0],
            vectors: Mat::from_fn(1, 1, |_, _| 1.0),
            clusters: vec![Cluster {
                value: 0.0,
                start: 0,
                multiplicity: 1,
            }],
            provenance: Provenance {
                solver: "trivial".into(),
                cluster_tolerance: CLUSTER_TOLERANCE,
                drop_tolerance: DROP_TOLERANCE,
                max_orthonormality_error: 0.0,
                max_residual: 0.0,
                trace_error: 0.0,
            },
        });
    }

    log::info!("dense eigendecomposition of a {size}x{size} Laplacian");
    let evd = g.laplacian().selfadjoint_eigendecomposition(Side::Lower);
    let raw = evd.s().column_vector();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| raw.read(a).total_cmp(&raw.read(b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw.read(i)).collect();
    let solver_u = evd.u();
    let sorted = Mat::from_fn(size, size, |i, j| solver_u.read(i, order[j]));
    drop(evd);

    let clusters = cluster_eigenvalues(&eigenvalues);
    let mut vectors = Mat::<f64>::zeros(size, size);
    for c in &clusters {
        let block = sorted.as_ref().subcols(c.start, c.multiplicity);
        if c.multiplicity == 1 {
            vectors.as_mut().subcols_mut(c.start, 1).copy_from(block);
        } else {
            let basis = canonical_basis(block)?;
            vectors
                .as_mut()
                .subcols_mut(c.start, c.multiplicity)
                .copy_from(basis.as_ref());
        }
    }
    drop(sorted);
    for col in 0..size {
        fix_sign(&mut vectors, col);
    }

    let provenance = verify(g, &eigenvalues, &vectors)?;
    Ok(Spectrum {
        n: g.n(),
        kind: g.kind(),
        eigenvalues,
        vectors,
        clusters,
        provenance,
    })
}

fn verify(g: &PermutationGraph, eigenvalues: &[f64], vectors: &Mat<f64>) -> Result<Provenance> {
    let size = eigenvalues.len();
    let scale = eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0);
    if eigenvalues[0].abs() > 1e-8 * scale {
        return Err(Error::Solver(format!(
            "smallest eigenvalue {} is not zero",
            eigenvalues[0]
        )));
    }

    let mut gram = Mat::<f64>::zeros(size, size);
    matmul(
        gram.as_mut(),
        vectors.transpose(),
        vectors.as_ref(),
        None,
        1.0,
        Parallelism::None,
    );
    let mut max_orthonormality_error = 0.0f64;
    for j in 0..size {
        for (i, &x) in gram.col_as_slice(j).iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            max_orthonormality_error = max_orthonormality_error.max((x - target).abs());
        }
    }
    drop(gram);
    if max_orthonormality_error > ORTHONORMALITY_LIMIT {
        return Err(Error::Solver(format!(
            "eigenvectors are not orthonormal: max |UᵀU − I| = {max_orthonormality_error:e}"
        )));
    }

    let mut max_residual = 0.0f64;
    let mut worst = 0;
    for (col, &lambda) in eigenvalues.iter().enumerate() {
        let u = vectors.col_as_slice(col);
        let lu = g.laplacian_apply(u)?;
        let r = lu
            .iter()
            .zip(u)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max);
        if r > max_residual {
            max_residual = r;
            worst = col;
        }
    }
    if max_residual > RESIDUAL_LIMIT {
        return Err(Error::Solver(format!(
            "eigenpair residual too large: max |Lu − λu| = {max_residual:e} at index {worst}"
        )));
    }

    let trace = g.degrees().iter().sum::<usize>() as f64;
    let trace_error = (compensated_sum(eigenvalues.iter().copied()) - trace).abs();
    if trace_error > 1e-8 * trace.max(1.0) {
        return Err(Error::Solver(format!(
            "eigenvalues sum to {trace_error:e} away from the trace"
        )));
    }
    Ok(Provenance {
        solver: "faer dense self-adjoint eigendecomposition".into(),
        cluster_tolerance: CLUSTER_TOLERANCE,
        drop_tolerance: DROP_TOLERANCE,
        max_orthonormality_error,
        max_residual,
        trace_error,
    })
}

/// Graph Fourier coherence `μ = max_i ‖u_i‖∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coherence {
    pub mu: f64,
    /// Set when some eigenvalue is repeated, so `μ` depends on the chosen basis.
    pub basis_dependent: bool,
    pub vector_inf_norms: Vec<f64>,
}

pub fn coherence(spectrum: &Spectrum) -> Coherence {
    let vector_inf_norms: Vec<f64> = (0..spectrum.len())
        .map(|i| spectrum.eigenvector(i).iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .collect();
    Coherence {
        mu: vector_inf_norms.iter().copied().fold(0.0, f64::max),
        basis_dependent: spectrum.is_degenerate(),
        vector_inf_norms,
    }
}

/// Serializable summary of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumExport {
    pub n: usize,
    pub kind: GraphKind,
    pub eigenvalues: Vec<f64>,
    pub coherence: f64,
    pub basis_dependent: bool,
    pub vector_inf_norms: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub provenance: Provenance,
}

impl SpectrumExport {
    pub fn new(spectrum: &Spectrum) -> Self {
        let c = coherence(spectrum);
        Self {
            n: spectrum.n(),
            kind: spectrum.kind(),
            eigenvalues: spectrum.eigenvalues().to_vec(),
            coherence: c.mu,
            basis_dependent: c.basis_dependent,
            vector_inf_norms: c.vector_inf_norms,
            clusters: spectrum.clusters().to_vec(),
            provenance: spectrum.provenance().clone(),
        }
    }

    /// Columns: `index,eigenvalue,inf_norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue,inf_norm\n");
        for (i, (l, m)) in self.eigenvalues.iter().zip(&self.vector_inf_norms).enumerate() {
            out.push_str(&format!("{i},{l:.17e},{m:.17e}\n"));
        }
        out
    }
}
