//! Plain-text model checkpoints.
//!
//! ```text
//! sgnn-checkpoint 1
//! seed 7
//! input_dim 64
//! hidden_dim 32
//! layers 2
//! tensor layer0.pos 32 128
//! <row-major values, space separated>
//! ...
//! tensor classifier 1 128
//! tensor bias 1 1
//! ```
//!
//! Values are written with the shortest decimal form that parses back to
//! the same `f64`, so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::model::SgnnModel;
use crate::error::{Error, Result};

const MAGIC: &str = "sgnn-checkpoint 1";

pub fn checkpoint_text(model: &SgnnModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "seed {}", model.seed);
    let _ = writeln!(s, "input_dim {}", model.input_dim());
    let _ = writeln!(s, "hidden_dim {}", model.hidden_dim());
    let _ = writeln!(s, "layers {}", model.layers.len());
    let mut shapes: Vec<(usize, usize)> = Vec::new();
    for l in &model.layers {
        shapes.push(l.pos.dim());
        shapes.push(l.neg.dim());
    }
    shapes.push((1, model.classifier.len()));
    shapes.push((1, 1));
    for ((name, values), (r, c)) in model.tensors().into_iter().zip(shapes) {
        let _ = writeln!(s, "tensor {name} {r} {c}");
        let body: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", body.join(" "));
    }
    s
}

pub fn save_checkpoint(model: &SgnnModel, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_text(model)).map_err(|e| Error::io(path, e))
}

pub fn parse_checkpoint(text: &str) -> Result<SgnnModel> {
    let bad = |m: String| Error::Checkpoint(m);
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("missing header".into()));
    }
    let mut header = |key: &str| -> Result<u64> {
        let line = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
        let value = line
            .strip_prefix(key)
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| bad(format!("expected `{key} <int>`, got {line:?}")))?;
        Ok(value)
    };
    let seed = header("seed")?;
    let input_dim = header("input_dim")? as usize;
    let hidden = header("hidden_dim")? as usize;
    let layers = header("layers")? as usize;

    let mut model = SgnnModel::new(input_dim, hidden, layers, seed)?;
    for (name, slot) in model.tensors_mut() {
        let head = lines.next().ok_or_else(|| bad(format!("missing tensor {name}")))?;
        let fields: Vec<&str> = head.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "tensor" || fields[1] != name {
            return Err(bad(format!("expected tensor {name}, got {head:?}")));
        }
        let rows: usize = fields[2].parse().map_err(|_| bad(format!("bad shape in {head:?}")))?;
        let cols: usize = fields[3].parse().map_err(|_| bad(format!("bad shape in {head:?}")))?;
        if rows * cols != slot.len() {
            return Err(bad(format!("tensor {name} has {rows}x{cols} values, expected {}", slot.len())));
        }
        let body = lines.next().ok_or_else(|| bad(format!("missing values for {name}")))?;
        let values: Vec<f64> = body
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| bad(format!("bad value {v:?} in {name}"))))
            .collect::<Result<_>>()?;
        if values.len() != slot.len() {
            return Err(bad(format!("tensor {name}: {} values, expected {}", values.len(), slot.len())));
        }
        slot.copy_from_slice(&values);
    }
    Ok(model)
}

pub fn load_checkpoint(path: &Path) -> Result<SgnnModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text)
}
