//! Versioned binary checkpoints: configuration, node counts, parameters and
//! optimizer state, all little-endian.

use std::io::{Read, Write};

use ndarray::Array2;

use super::model::{Model, Params};
use super::train::{AdamState, TrainConfig};
use super::GnnError;

const MAGIC: &[u8; 4] = b"ANCK";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub counts: [usize; 3],
    pub model: Model,
    pub adam: AdamState,
}

fn put_tensors<W: Write>(w: &mut W, params: &Params) -> std::io::Result<()> {
    for t in params.tensors() {
        w.write_all(&(t.nrows() as u64).to_le_bytes())?;
        w.write_all(&(t.ncols() as u64).to_le_bytes())?;
        for &x in t.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn u64_of<R: Read>(r: &mut R) -> Result<u64, GnnError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn take_tensors<R: Read>(r: &mut R, into: &mut Params) -> Result<(), GnnError> {
    for (name, t) in Params::names().into_iter().zip(into.tensors_mut()) {
        let rows = u64_of(r)? as usize;
        let cols = u64_of(r)? as usize;
        if (rows, cols) != t.dim() {
            return Err(GnnError::Checkpoint(format!(
                "{name}: stored shape {rows}x{cols}, expected {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        let mut b = [0u8; 8];
        for _ in 0..rows * cols {
            r.read_exact(&mut b)?;
            data.push(f64::from_le_bytes(b));
        }
        *t = Array2::from_shape_vec((rows, cols), data).expect("checked shape");
    }
    Ok(())
}

impl Checkpoint {
    pub fn write<W: Write>(&self, mut w: W) -> Result<(), GnnError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let cfg = serde_json::to_vec(&self.config).map_err(|e| GnnError::Checkpoint(e.to_string()))?;
        w.write_all(&(cfg.len() as u64).to_le_bytes())?;
        w.write_all(&cfg)?;
        for c in self.counts {
            w.write_all(&(c as u64).to_le_bytes())?;
        }
        put_tensors(&mut w, &self.model.params)?;
        w.write_all(&self.adam.step.to_le_bytes())?;
        put_tensors(&mut w, &self.adam.m)?;
        put_tensors(&mut w, &self.adam.v)?;
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, GnnError> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)?;
        if &head[..4] != MAGIC {
            return Err(GnnError::Checkpoint("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(head[4..].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(GnnError::Checkpoint(format!("unsupported version {version}")));
        }
        let len = u64_of(&mut r)? as usize;
        if len > 1 << 20 {
            return Err(GnnError::Checkpoint("oversized configuration block".into()));
        }
        let mut cfg = vec![0u8; len];
        r.read_exact(&mut cfg)?;
        let config: TrainConfig = serde_json::from_slice(&cfg).map_err(|e| GnnError::Checkpoint(e.to_string()))?;
        let mut counts = [0usize; 3];
        for c in &mut counts {
            *c = u64_of(&mut r)? as usize;
        }
        let mut model = Model::new(counts, config.model(), 0);
        take_tensors(&mut r, &mut model.params)?;
        let mut adam = AdamState::new(&model.params);
        adam.step = u64_of(&mut r)?;
        take_tensors(&mut r, &mut adam.m)?;
        take_tensors(&mut r, &mut adam.v)?;
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(GnnError::Checkpoint("trailing bytes".into()));
        }
        Ok(Checkpoint {
            config,
            counts,
            model,
            adam,
        })
    }
}
