/// Compressed sparse row adjacency: `offsets[i]..offsets[i + 1]` indexes the
/// sorted, duplicate-free neighbor list of row `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Csr {
    pub offsets: Vec<u64>,
    pub targets: Vec<u32>,
}

impl Csr {
    /// Builds from `(row, target)` pairs. Pairs are sorted and deduplicated.
    pub fn from_pairs(rows: usize, pairs: &mut Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0u64; rows + 1];
        for &(r, _) in pairs.iter() {
            offsets[r as usize + 1] += 1;
        }
        for i in 1..=rows {
            offsets[i] += offsets[i - 1];
        }
        let targets = pairs.iter().map(|&(_, t)| t).collect();
        Csr { offsets, targets }
    }

    /// Transposes into a CSR over `cols` rows.
    pub fn transpose(&self, cols: usize) -> Self {
        let mut pairs: Vec<(u32, u32)> = self.pairs().map(|(r, t)| (t, r)).collect();
        Csr::from_pairs(cols, &mut pairs)
    }

    pub fn rows(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        if r + 1 >= self.offsets.len() {
            return &[];
        }
        &self.targets[self.offsets[r] as usize..self.offsets[r + 1] as usize]
    }

    pub fn degree(&self, r: usize) -> usize {
        self.row(r).len()
    }

    pub fn contains(&self, r: usize, t: u32) -> bool {
        self.row(r).binary_search(&t).is_ok()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.rows()).flat_map(move |r| self.row(r).iter().map(move |&t| (r as u32, t)))
    }

    /// Checks structural invariants against the destination cardinality.
    pub fn validate(&self, cols: usize) -> Result<(), String> {
        if self.offsets.is_empty() {
            return Err("empty offset array".into());
        }
        if self.offsets[0] != 0 {
            return Err("offsets must start at zero".into());
        }
        if *self.offsets.last().unwrap() as usize != self.targets.len() {
            return Err("last offset does not match target count".into());
        }
        for w in self.offsets.windows(2) {
            if w[0] > w[1] {
                return Err("offsets are not monotone".into());
            }
        }
        for r in 0..self.rows() {
            let row = self.row(r);
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("row {r} is not strictly ascending"));
                }
            }
            if let Some(&t) = row.last() {
                if t as usize >= cols {
                    return Err(format!("row {r} references target {t} out of range"));
                }
            }
        }
        Ok(())
    }
}
