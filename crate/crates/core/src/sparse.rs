//! Compressed sparse rows, Jacobi-preconditioned CG and a banded LDLᵀ solve.

use alloc::vec;
use alloc::vec::Vec;

// Redundant whenever `std` is linked into the build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::descent::GradientForm;

/// Symmetric CSR matrix with a fixed pattern.
#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    pub(crate) val: Vec<f64>,
}

/// Sparsity of a cell-assembled operator plus, for every cell, the CSR slot
/// of each local `(a, b)` pair.
#[derive(Debug, Clone)]
pub(crate) struct Pattern {
    pub(crate) matrix: CsrMatrix,
    nodes_per_cell: usize,
    cell_slots: Vec<usize>,
}

impl Pattern {
    pub(crate) fn new<F: GradientForm + ?Sized>(form: &F) -> Self {
        let n = form.node_count();
        let k = if form.cell_count() == 0 { 0 } else { form.cell_nodes(0).len() };
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        pairs.reserve(form.cell_count() * k * k);
        for c in 0..form.cell_count() {
            let nodes = form.cell_nodes(c);
            debug_assert_eq!(nodes.len(), k);
            for &a in nodes {
                for &b in nodes {
                    pairs.push((a, b));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _) in &pairs {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col: Vec<usize> = pairs.iter().map(|&(_, j)| j).collect();

        let mut cell_slots = Vec::with_capacity(form.cell_count() * k * k);
        for c in 0..form.cell_count() {
            let nodes = form.cell_nodes(c);
            for &a in nodes {
                let row = &col[row_ptr[a]..row_ptr[a + 1]];
                for &b in nodes {
                    let offset = row.binary_search(&b).expect("pattern contains every cell pair");
                    cell_slots.push(row_ptr[a] + offset);
                }
            }
        }
        let nnz = col.len();
        Self {
            matrix: CsrMatrix { row_ptr, col, val: vec![0.0; nnz] },
            nodes_per_cell: k,
            cell_slots,
        }
    }

    /// Overwrites the matrix with `Σ_c weight_c · measure_c · ∇φ_a · ∇φ_b`.
    pub(crate) fn assemble_weighted<F: GradientForm + ?Sized>(&mut self, form: &F, weights: &[f64]) {
        self.matrix.val.iter_mut().for_each(|v| *v = 0.0);
        let k = self.nodes_per_cell;
        for c in 0..form.cell_count() {
            let grads = form.cell_gradients(c);
            let scale = weights[c] * form.cell_measure(c);
            let slots = &self.cell_slots[c * k * k..(c + 1) * k * k];
            for a in 0..k {
                for b in 0..k {
                    let dot = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    self.matrix.val[slots[a * k + b]] += scale * dot;
                }
            }
        }
    }
}

impl CsrMatrix {
    pub(crate) fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// `y = A x` restricted to free rows and columns.
    fn mul_free(&self, x: &[f64], free: &[bool], y: &mut [f64]) {
        for i in 0..self.n() {
            if !free[i] {
                y[i] = 0.0;
                continue;
            }
            let mut s = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[idx];
                if free[j] {
                    s += self.val[idx] * x[j];
                }
            }
            y[i] = s;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&idx| self.col[idx] == i)
                    .map_or(0.0, |idx| self.val[idx])
            })
            .collect()
    }

    /// Largest `|i - j|` over stored entries between free nodes.
    pub(crate) fn bandwidth(&self, free: &[bool]) -> usize {
        let mut bw = 0;
        for i in 0..self.n() {
            if !free[i] {
                continue;
            }
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[idx];
                if free[j] {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        bw
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of [`pcg`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CgSolve {
    /// Last iterate; it lowers the quadratic model `½xᵀAx − bᵀx` below zero
    /// whenever `iterations > 0`, converged or not.
    pub x: Vec<f64>,
    /// Iterations performed.
    pub iterations: usize,
    /// Relative residual `‖b − Ax‖ / ‖b‖` of `x`.
    pub residual: f64,
    /// `residual ≤ tol` was reached.
    pub converged: bool,
}

/// Solves `A x = b` on the free nodes with Jacobi-preconditioned CG from
/// `x = 0`; fixed entries of `x` are zero. Stops at `max_iter` iterations or
/// when a search direction has non-positive curvature.
pub(crate) fn pcg(a: &CsrMatrix, b: &[f64], free: &[bool], tol: f64, max_iter: usize) -> CgSolve {
    let n = a.n();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return CgSolve { x, iterations: 0, residual: 0.0, converged: true };
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .zip(free)
        .map(|(&d, &f)| if f && d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let mut r: Vec<f64> = b.iter().zip(free).map(|(&v, &f)| if f { v } else { 0.0 }).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut dir = z.clone();
    let mut ad = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    for it in 1..=max_iter {
        a.mul_free(&dir, free, &mut ad);
        let curvature = dot(&dir, &ad);
        if !(curvature > 0.0) {
            return CgSolve { x, iterations: it - 1, residual: res, converged: false };
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * dir[i];
            r[i] -= step * ad[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return CgSolve { x, iterations: it, residual: res, converged: true };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    CgSolve { x, iterations: max_iter, residual: res, converged: false }
}

/// Direct LDLᵀ solve for a symmetric matrix with half-bandwidth `bw`.
/// Fixed rows become identity rows. Returns `None` if a pivot is not positive.
pub(crate) fn banded_solve(a: &CsrMatrix, b: &[f64], free: &[bool], bw: usize) -> Option<Vec<f64>> {
    let n = a.n();
    let w = bw + 1;
    // band[i * w + (j + bw - i)] holds entry (i, j) for i - bw <= j <= i
    let mut band = vec![0.0; n * w];
    for i in 0..n {
        if !free[i] {
            band[i * w + bw] = 1.0;
            continue;
        }
        for idx in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col[idx];
            if j <= i && free[j] {
                band[i * w + (j + bw - i)] = a.val[idx];
            }
        }
    }
    let mut diag = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let mut s = band[i * w + (j + bw - i)];
            for k in lo.max(j.saturating_sub(bw))..j {
                s -= band[i * w + (k + bw - i)] * band[j * w + (k + bw - j)] * diag[k];
            }
            if j < i {
                band[i * w + (j + bw - i)] = s / diag[j];
            } else {
                if !(s > 0.0) {
                    return None;
                }
                diag[i] = s;
            }
        }
    }
    let mut x: Vec<f64> = b.iter().zip(free).map(|(&v, &f)| if f { v } else { 0.0 }).collect();
    for i in 0..n {
        for k in i.saturating_sub(bw)..i {
            x[i] -= band[i * w + (k + bw - i)] * x[k];
        }
    }
    for i in 0..n {
        x[i] /= diag[i];
    }
    for i in (0..n).rev() {
        for k in i + 1..(i + bw + 1).min(n) {
            x[i] -= band[k * w + (i + bw - k)] * x[k];
        }
    }
    Some(x)
}
