//! Versioned text checkpoints.
//!
//! Format (`casemark-checkpoint v1`): a header line, the generator state,
//! the network dimensions, then one block per parameter holding value, Adam
//! first-moment and second-moment tensors as hex-encoded f64 bit patterns
//! (one row per line, words space-separated). Hex bit patterns make the
//! round trip exact: load(save(x)) reproduces every tensor bitwise.

use std::fmt::Write as _;
use std::path::Path;

use crate::agents::AgentDims;
use crate::rng::RngState;
use crate::tensor::Tensor2;
use crate::{AgentParams, Error, Result};

const MAGIC: &str = "casemark-checkpoint v1";

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub params: AgentParams,
    pub rng: RngState,
}

pub fn save(path: &Path, params: &AgentParams, rng: RngState) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{}", MAGIC).unwrap();
    writeln!(
        out,
        "rng {:016x} {:016x} {:032x}",
        rng.seed, rng.stream, rng.word_pos
    )
    .unwrap();
    let d = params.dims();
    writeln!(
        out,
        "dims {} {} {} {} {} {}",
        d.n_entities, d.n_actions, d.meaning_dim, d.word_dim, d.hidden_dim, d.max_len
    )
    .unwrap();
    params.visit_params(&mut |name, _, p| {
        writeln!(
            out,
            "param {} {} {} {}",
            name,
            p.value().rows(),
            p.value().cols(),
            p.step_count()
        )
        .unwrap();
        for tensor in [p.value(), p.adam_m(), p.adam_v()] {
            for r in 0..tensor.rows() {
                let row: Vec<String> = tensor
                    .row(r)
                    .iter()
                    .map(|v| format!("{:016x}", v.to_bits()))
                    .collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
    });
    writeln!(out, "end").unwrap();
    crate::experiment::write_atomic(path, out.as_bytes())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let bad = |msg: &str| Error::Checkpoint {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();

    if lines.next() != Some(MAGIC) {
        return Err(bad("missing or unsupported header"));
    }

    let rng_line = lines.next().ok_or_else(|| bad("missing rng line"))?;
    let rng_fields: Vec<&str> = rng_line.split(' ').collect();
    if rng_fields.len() != 4 || rng_fields[0] != "rng" {
        return Err(bad("malformed rng line"));
    }
    let rng = RngState {
        seed: u64::from_str_radix(rng_fields[1], 16).map_err(|_| bad("bad rng seed"))?,
        stream: u64::from_str_radix(rng_fields[2], 16).map_err(|_| bad("bad rng stream"))?,
        word_pos: u128::from_str_radix(rng_fields[3], 16).map_err(|_| bad("bad rng position"))?,
    };

    let dims_line = lines.next().ok_or_else(|| bad("missing dims line"))?;
    let dims_fields: Vec<&str> = dims_line.split(' ').collect();
    if dims_fields.len() != 7 || dims_fields[0] != "dims" {
        return Err(bad("malformed dims line"));
    }
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|_| bad("bad dimension"));
    let dims = AgentDims {
        n_entities: parse_dim(dims_fields[1])?,
        n_actions: parse_dim(dims_fields[2])?,
        meaning_dim: parse_dim(dims_fields[3])?,
        word_dim: parse_dim(dims_fields[4])?,
        hidden_dim: parse_dim(dims_fields[5])?,
        max_len: parse_dim(dims_fields[6])?,
    };

    let mut params = AgentParams::new(dims);
    let mut restore_error: Option<Error> = None;
    let mut seen = 0usize;
    params.visit_params_mut(&mut |name, _, p| {
        if restore_error.is_some() {
            return;
        }
        let mut step = || -> Result<()> {
            let header = lines
                .next()
                .ok_or_else(|| bad(&format!("missing block for {}", name)))?;
            let f: Vec<&str> = header.split(' ').collect();
            if f.len() != 5 || f[0] != "param" {
                return Err(bad(&format!("malformed param header {:?}", header)));
            }
            if f[1] != name {
                return Err(bad(&format!("expected param {}, found {}", name, f[1])));
            }
            let rows: usize = f[2].parse().map_err(|_| bad("bad row count"))?;
            let cols: usize = f[3].parse().map_err(|_| bad("bad col count"))?;
            let steps: u64 = f[4].parse().map_err(|_| bad("bad step count"))?;
            if (rows, cols) != (p.value().rows(), p.value().cols()) {
                return Err(bad(&format!(
                    "shape mismatch for {}: file {}x{}, expected {}x{}",
                    name,
                    rows,
                    cols,
                    p.value().rows(),
                    p.value().cols()
                )));
            }
            let mut read_tensor = || -> Result<Tensor2<crate::Real>> {
                let mut t = Tensor2::zeros(rows, cols);
                for r in 0..rows {
                    let line = lines.next().ok_or_else(|| bad("truncated tensor"))?;
                    let words: Vec<&str> = line.split(' ').collect();
                    if words.len() != cols {
                        return Err(bad(&format!(
                            "row width {} does not match cols {}",
                            words.len(),
                            cols
                        )));
                    }
                    for (c, w) in words.iter().enumerate() {
                        let bits =
                            u64::from_str_radix(w, 16).map_err(|_| bad("bad hex word"))?;
                        t[(r, c)] = f64::from_bits(bits);
                    }
                }
                Ok(t)
            };
            let value = read_tensor()?;
            let m = read_tensor()?;
            let v = read_tensor()?;
            p.restore_state(value, m, v, steps);
            seen += 1;
            Ok(())
        };
        if let Err(e) = step() {
            restore_error = Some(e);
        }
    });
    if let Some(e) = restore_error {
        return Err(e);
    }
    if lines.next() != Some("end") {
        return Err(bad("missing end marker"));
    }
    log::debug!("loaded checkpoint with {} parameter blocks", seen);
    Ok(Checkpoint { params, rng })
}
