//! Versioned little-endian binary format for a built graph.
//!
//! Layout:
//!
//! ```text
//! "ANPG" | u32 version | u64 count[author, paper, topic]
//! per type: per node: u32 byte length, UTF-8 external id
//! i32 year per paper
//! per relation (writes, deals_with, cites):
//!     forward CSR: u64 offsets[rows + 1], u64 edge count, u32 targets[..]
//!     reverse CSR: same
//! ```

use std::io::{Read, Write};

use super::{Csr, GraphError, HeteroTemporalGraph, NodeType, Relation};

pub const MAGIC: &[u8; 4] = b"ANPG";
pub const VERSION: u32 = 1;

pub fn write_graph<W: Write>(graph: &HeteroTemporalGraph, mut w: W) -> Result<(), GraphError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for ty in NodeType::ALL {
        w.write_all(&(graph.node_count(ty) as u64).to_le_bytes())?;
    }
    for ids in &graph.ids {
        for id in ids {
            w.write_all(&(id.len() as u32).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
        }
    }
    for y in &graph.paper_year {
        w.write_all(&y.to_le_bytes())?;
    }
    for rel in Relation::ALL {
        write_csr(&mut w, &graph.forward[rel.slot()])?;
        write_csr(&mut w, &graph.reverse[rel.slot()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_csr<W: Write>(w: &mut W, csr: &Csr) -> Result<(), GraphError> {
    for o in &csr.offsets {
        w.write_all(&o.to_le_bytes())?;
    }
    w.write_all(&(csr.targets.len() as u64).to_le_bytes())?;
    for t in &csr.targets {
        w.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

pub fn to_bytes(graph: &HeteroTemporalGraph) -> Vec<u8> {
    let mut buf = Vec::new();
    write_graph(graph, &mut buf).expect("writing to memory cannot fail");
    buf
}

fn bad(msg: impl Into<String>) -> GraphError {
    GraphError::Format(msg.into())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact<const N: usize>(&mut self) -> Result<[u8; N], GraphError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                bad("truncated file")
            } else {
                GraphError::Io(e)
            }
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, GraphError> {
        Ok(u32::from_le_bytes(self.exact()?))
    }

    fn i32(&mut self) -> Result<i32, GraphError> {
        Ok(i32::from_le_bytes(self.exact()?))
    }

    fn u64(&mut self) -> Result<u64, GraphError> {
        Ok(u64::from_le_bytes(self.exact()?))
    }

    fn len(&mut self, limit: u64) -> Result<usize, GraphError> {
        let n = self.u64()?;
        if n > limit {
            return Err(bad(format!("length {n} exceeds limit {limit}")));
        }
        Ok(n as usize)
    }

    fn csr(&mut self, rows: usize, cols: usize) -> Result<Csr, GraphError> {
        let mut offsets = Vec::with_capacity(rows + 1);
        for _ in 0..=rows {
            offsets.push(self.u64()?);
        }
        let m = self.len(u32::MAX as u64 * 64)?;
        let mut targets = Vec::with_capacity(m.min(1 << 24));
        for _ in 0..m {
            targets.push(self.u32()?);
        }
        let csr = Csr { offsets, targets };
        csr.validate(cols).map_err(bad)?;
        Ok(csr)
    }
}

/// Loads a graph and validates every structural invariant.
pub fn read_graph<R: Read>(r: R) -> Result<HeteroTemporalGraph, GraphError> {
    let mut r = Reader { inner: r };
    if &r.exact::<4>()? != MAGIC {
        return Err(bad("bad magic bytes"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let limit = u32::MAX as u64;
    let counts = [r.len(limit)?, r.len(limit)?, r.len(limit)?];
    let mut ids: [Vec<String>; 3] = Default::default();
    for (slot, &n) in counts.iter().enumerate() {
        let mut v = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            let len = r.u32()? as usize;
            let mut bytes = vec![0u8; len];
            r.inner.read_exact(&mut bytes).map_err(|_| bad("truncated id table"))?;
            v.push(String::from_utf8(bytes).map_err(|_| bad("id is not UTF-8"))?);
        }
        let mut sorted: Vec<&String> = v.iter().collect();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad(format!("duplicate external id for {}", NodeType::ALL[slot])));
        }
        ids[slot] = v;
    }
    let mut years = Vec::with_capacity(counts[1]);
    for _ in 0..counts[1] {
        years.push(r.i32()?);
    }
    let mut forward: [Csr; 3] = Default::default();
    let mut reverse: [Csr; 3] = Default::default();
    for rel in Relation::ALL {
        let t = rel.triple();
        let (s, d) = (counts[t.src.slot()], counts[t.dst.slot()]);
        forward[rel.slot()] = r.csr(s, d)?;
        reverse[rel.slot()] = r.csr(d, s)?;
        if forward[rel.slot()].transpose(d) != reverse[rel.slot()] {
            return Err(bad(format!("forward and reverse {rel} adjacency disagree")));
        }
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(bad("trailing bytes after graph"));
    }
    Ok(HeteroTemporalGraph::from_adjacency(ids, years, forward, reverse))
}

pub fn save(graph: &HeteroTemporalGraph, path: &std::path::Path) -> Result<(), GraphError> {
    let f = std::fs::File::create(path)?;
    write_graph(graph, std::io::BufWriter::new(f))
}

pub fn load(path: &std::path::Path) -> Result<HeteroTemporalGraph, GraphError> {
    let f = std::fs::File::open(path)?;
    read_graph(std::io::BufReader::new(f))
}
