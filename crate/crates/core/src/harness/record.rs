//! Per-step run records and their CSV/JSON forms.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepper::StepReport;

pub const COLUMNS: [&str; 9] = [
    "n", "t_n", "tau_n", "E", "E_alpha", "volume", "l2_norm", "l2_margin", "fp_iters",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub n: usize,
    pub t_n: f64,
    pub tau_n: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "E_alpha")]
    pub e_alpha: f64,
    pub volume: f64,
    pub l2_norm: f64,
    pub l2_margin: f64,
    pub fp_iters: usize,
}

impl From<&StepReport> for RunRow {
    fn from(r: &StepReport) -> Self {
        Self {
            n: r.n,
            t_n: r.t,
            tau_n: r.tau,
            energy: r.energy,
            e_alpha: r.variational,
            volume: r.volume,
            l2_norm: r.l2_norm,
            l2_margin: r.l2_margin,
            fp_iters: r.fp_iters,
        }
    }
}

/// Run description. Keys in `extra` are emitted in sorted order and
/// `wall_time` always comes last.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub alpha: f64,
    pub eps2: f64,
    pub kappa: f64,
    pub scheme: String,
    pub mesh: String,
    pub seed: Option<u64>,
    pub extra: BTreeMap<String, String>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub metadata: RunMetadata,
    pub rows: Vec<RunRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

impl Format {
    /// `json` for a `.json` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn meta_pairs(m: &RunMetadata) -> Vec<(String, String)> {
    let mut pairs = vec![
        ("alpha".to_string(), m.alpha.to_string()),
        ("eps2".to_string(), m.eps2.to_string()),
        ("kappa".to_string(), m.kappa.to_string()),
        ("scheme".to_string(), m.scheme.clone()),
        ("mesh".to_string(), m.mesh.clone()),
        (
            "seed".to_string(),
            m.seed.map_or_else(|| "none".to_string(), |s| s.to_string()),
        ),
    ];
    pairs.extend(m.extra.iter().map(|(k, v)| (k.clone(), v.clone())));
    pairs.push(("wall_time".to_string(), m.wall_time.to_string()));
    pairs
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse {what} from {s:?}")))
}

impl RunRecord {
    pub fn new(metadata: RunMetadata) -> Self {
        Self {
            metadata,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, report: &StepReport) {
        self.rows.push(report.into());
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in meta_pairs(&self.metadata) {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "{}", COLUMNS.join(","))?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n, r.t_n, r.tau_n, r.energy, r.e_alpha, r.volume, r.l2_norm, r.l2_margin, r.fp_iters
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut meta = RunMetadata::default();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for line in input.lines() {
            let line = line?;
            if let Some(comment) = line.strip_prefix('#') {
                let (k, v) = comment
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("bad metadata line {line:?}")))?;
                match k {
                    "alpha" => meta.alpha = parse_num(v, k)?,
                    "eps2" => meta.eps2 = parse_num(v, k)?,
                    "kappa" => meta.kappa = parse_num(v, k)?,
                    "scheme" => meta.scheme = v.to_string(),
                    "mesh" => meta.mesh = v.to_string(),
                    "seed" => meta.seed = if v == "none" { None } else { Some(parse_num(v, k)?) },
                    "wall_time" => meta.wall_time = parse_num(v, k)?,
                    _ => {
                        meta.extra.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !seen_header {
                if line.trim() != COLUMNS.join(",") {
                    return Err(Error::InvalidArgument(format!("unexpected header {line:?}")));
                }
                seen_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != COLUMNS.len() {
                return Err(Error::LengthMismatch {
                    expected: COLUMNS.len(),
                    got: f.len(),
                });
            }
            rows.push(RunRow {
                n: parse_num(f[0], "n")?,
                t_n: parse_num(f[1], "t_n")?,
                tau_n: parse_num(f[2], "tau_n")?,
                energy: parse_num(f[3], "E")?,
                e_alpha: parse_num(f[4], "E_alpha")?,
                volume: parse_num(f[5], "volume")?,
                l2_norm: parse_num(f[6], "l2_norm")?,
                l2_margin: parse_num(f[7], "l2_margin")?,
                fp_iters: parse_num(f[8], "fp_iters")?,
            });
        }
        Ok(Self { metadata: meta, rows })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    pub fn emit(&self, format: Format, path: &Path) -> Result<()> {
        let out = BufWriter::new(File::create(path)?);
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn load(format: Format, path: &Path) -> Result<Self> {
        let input = BufReader::new(File::open(path)?);
        match format {
            Format::Csv => Self::read_csv(input),
            Format::Json => Self::read_json(input),
        }
    }
}
