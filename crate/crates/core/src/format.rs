//! JSON interchange for kernels, measures and multiplier symbols.
//!
//! Classes are addressed by path literals (`s<level>.<vertex>:<e1>,<e2>,...`).
//! Kernel entries that are not listed are zero; symbol entries that are not
//! listed are undefined. Floats use shortest round-trip notation, so parsing
//! the emitted text restores every value bit for bit.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Kernel, Measure, C64};
use crate::error::{Error, Result};
use crate::groupoid::TruncatedGroupoid;
use crate::quantum_metric::Tabulated;

pub const KERNEL_FORMAT: &str = "afqms-kernel";
pub const MEASURE_FORMAT: &str = "afqms-measure";
pub const SYMBOL_FORMAT: &str = "afqms-symbol";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub mu: String,
    pub lambda: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub format: String,
    pub resolution: usize,
    pub level: usize,
    pub entries: Vec<KernelEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEntry {
    pub path: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub format: String,
    pub resolution: usize,
    pub weights: Vec<MeasureEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolEntry {
    pub mu: String,
    pub lambda: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFile {
    pub format: String,
    pub resolution: usize,
    pub entries: Vec<SymbolEntry>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("{what}: {e}")))
}

fn check_header(format: &str, expected: &str, resolution: usize, g: &TruncatedGroupoid) -> Result<()> {
    if format != expected {
        return Err(Error::Format(format!("expected format '{expected}', found '{format}'")));
    }
    if resolution != g.resolution() {
        return Err(Error::Resolution(format!(
            "file is at resolution {resolution}, groupoid at {}",
            g.resolution()
        )));
    }
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn is_positive_zero(z: C64) -> bool {
    z.re.to_bits() == 0 && z.im.to_bits() == 0
}

pub fn kernel_to_file(f: &Kernel) -> KernelFile {
    let g = f.groupoid();
    KernelFile {
        format: KERNEL_FORMAT.into(),
        resolution: g.resolution(),
        level: f.level(),
        entries: f
            .entries()
            .filter(|(_, _, v)| !is_positive_zero(*v))
            .map(|(a, b, v)| KernelEntry {
                mu: g.path(a).to_string(),
                lambda: g.path(b).to_string(),
                re: v.re,
                im: v.im,
            })
            .collect(),
    }
}

pub fn kernel_to_json(f: &Kernel) -> String {
    to_json(&kernel_to_file(f))
}

pub fn kernel_from_file(g: &Arc<TruncatedGroupoid>, file: &KernelFile) -> Result<Kernel> {
    check_header(&file.format, KERNEL_FORMAT, file.resolution, g)?;
    let mut f = Kernel::zeros(g, file.level)?;
    for e in &file.entries {
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Error::Format(format!("non-finite value at ({}|{})", e.mu, e.lambda)));
        }
        let (a, b) = (g.parse_path(&e.mu)?, g.parse_path(&e.lambda)?);
        g.class(a, b, file.level)?;
        f.set(a, b, C64::new(e.re, e.im))?;
    }
    Ok(f)
}

pub fn kernel_from_json(g: &Arc<TruncatedGroupoid>, text: &str) -> Result<Kernel> {
    kernel_from_file(g, &parse_json(text, "kernel")?)
}

pub fn measure_to_json(g: &TruncatedGroupoid, m: &Measure) -> String {
    to_json(&MeasureFile {
        format: MEASURE_FORMAT.into(),
        resolution: m.resolution(),
        weights: m
            .weights()
            .iter()
            .enumerate()
            .map(|(p, &w)| MeasureEntry {
                path: g.path(p).to_string(),
                weight: w,
            })
            .collect(),
    })
}

pub fn measure_from_json(g: &TruncatedGroupoid, text: &str) -> Result<Measure> {
    let file: MeasureFile = parse_json(text, "measure")?;
    check_header(&file.format, MEASURE_FORMAT, file.resolution, g)?;
    let mut w = vec![0.0; g.num_paths()];
    let mut seen = vec![false; g.num_paths()];
    for e in &file.weights {
        let p = g.parse_path(&e.path)?;
        if seen[p] {
            return Err(Error::Format(format!("duplicate weight for {}", e.path)));
        }
        seen[p] = true;
        w[p] = e.weight;
    }
    Measure::new(g, w)
}

pub fn symbol_to_json(g: &TruncatedGroupoid, s: &Tabulated) -> String {
    let mut keys: Vec<_> = s.values.keys().copied().collect();
    keys.sort_unstable();
    to_json(&SymbolFile {
        format: SYMBOL_FORMAT.into(),
        resolution: g.resolution(),
        entries: keys
            .into_iter()
            .map(|(a, b)| SymbolEntry {
                mu: g.path(a).to_string(),
                lambda: g.path(b).to_string(),
                value: s.values[&(a, b)],
            })
            .collect(),
    })
}

pub fn symbol_from_json(g: &TruncatedGroupoid, text: &str) -> Result<Tabulated> {
    let file: SymbolFile = parse_json(text, "symbol")?;
    check_header(&file.format, SYMBOL_FORMAT, file.resolution, g)?;
    let mut values = HashMap::new();
    for e in &file.entries {
        if !e.value.is_finite() {
            return Err(Error::Format(format!("non-finite symbol at ({}|{})", e.mu, e.lambda)));
        }
        let (a, b) = (g.parse_path(&e.mu)?, g.parse_path(&e.lambda)?);
        g.minimal_class(a, b)?;
        values.insert((a, b), e.value);
    }
    Ok(Tabulated { values })
}
