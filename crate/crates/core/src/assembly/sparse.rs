//! Compressed-column storage with a fixed element scatter map.

/// Marks a local dof that does not enter the system (constrained).
pub const EXCLUDED: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    /// sorted within each column
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let n = a.len();
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..n {
            for (i, row) in a.iter().enumerate() {
                if row[j] != 0.0 {
                    row_idx.push(i);
                    values.push(row[j]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] += self.values[p] * xj;
            }
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let rows = &self.row_idx[self.col_ptr[col]..self.col_ptr[col + 1]];
        rows.binary_search(&row)
            .map_or(0.0, |p| self.values[self.col_ptr[col] + p])
    }

    /// `max |a_ij − a_ji| / max |a_ij|`
    pub fn relative_asymmetry(&self) -> f64 {
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                scale = scale.max(self.values[p].abs());
                diff = diff.max((self.values[p] - self.get(j, i)).abs());
            }
        }
        if scale > 0.0 {
            diff / scale
        } else {
            0.0
        }
    }
}

/// Sparsity of an assembled system plus, for every element, the value slot
/// of each local entry (row-major, `k × k`).
#[derive(Clone, Debug)]
pub struct SparsePattern {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    k: usize,
    scatter: Vec<u32>,
}

impl SparsePattern {
    /// `element_dofs` holds `k` global indices per element, [`EXCLUDED`] for
    /// local dofs that are left out of the system.
    pub fn build(n: usize, k: usize, element_dofs: &[usize]) -> Self {
        assert_eq!(element_dofs.len() % k, 0);
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for el in element_dofs.chunks_exact(k) {
            for &c in el.iter().filter(|&&c| c != EXCLUDED) {
                cols[c].extend(el.iter().copied().filter(|&r| r != EXCLUDED));
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        for col in &mut cols {
            col.sort_unstable();
            col.dedup();
            row_idx.extend_from_slice(col);
            col_ptr.push(row_idx.len());
        }
        assert!(
            row_idx.len() < u32::MAX as usize,
            "pattern too large for 32-bit slots"
        );
        let mut scatter = Vec::with_capacity(element_dofs.len() * k);
        for el in element_dofs.chunks_exact(k) {
            for &r in el {
                for &c in el {
                    let slot = if r == EXCLUDED || c == EXCLUDED {
                        u32::MAX
                    } else {
                        let rows = &row_idx[col_ptr[c]..col_ptr[c + 1]];
                        (col_ptr[c] + rows.binary_search(&r).expect("entry in pattern")) as u32
                    };
                    scatter.push(slot);
                }
            }
        }
        SparsePattern {
            n,
            col_ptr,
            row_idx,
            k,
            scatter,
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn zero_matrix(&self) -> CscMatrix {
        CscMatrix {
            n: self.n,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: vec![0.0; self.nnz()],
        }
    }

    /// Adds a dense `k × k` element matrix into `values`.
    pub fn add_element<const K: usize>(
        &self,
        values: &mut [f64],
        element: usize,
        local: &[[f64; K]; K],
    ) {
        debug_assert_eq!(K, self.k);
        let slots = &self.scatter[element * K * K..(element + 1) * K * K];
        for (r, row) in local.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let s = slots[r * K + c];
                if s != u32::MAX {
                    values[s as usize] += v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_and_scatter() {
        // two 2-dof "elements" sharing dof 1, dof 3 excluded
        let p = SparsePattern::build(3, 2, &[0, 1, 1, 2, 2, EXCLUDED]);
        assert_eq!(p.col_ptr, vec![0, 2, 5, 7]);
        let mut m = p.zero_matrix();
        p.add_element(&mut m.values, 0, &[[1.0, 2.0], [3.0, 4.0]]);
        p.add_element(&mut m.values, 1, &[[1.0, 1.0], [1.0, 1.0]]);
        p.add_element(&mut m.values, 2, &[[5.0, 9.0], [9.0, 9.0]]);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 0), 3.0);
        assert_eq!(m.get(1, 1), 5.0);
        assert_eq!(m.get(2, 2), 6.0);
        assert_eq!(m.get(0, 2), 0.0);
        let mut y = vec![0.0; 3];
        m.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 9.0, 7.0]);
    }

    #[test]
    fn dense_roundtrip() {
        let a = vec![
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ];
        let m = CscMatrix::from_dense(&a);
        assert_eq!(m.nnz(), 7);
        assert_eq!(m.relative_asymmetry(), 0.0);
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(m.get(i, j), *v);
            }
        }
    }
}
