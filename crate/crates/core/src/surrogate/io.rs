//! Plain-text model dumps.
//!
//! ```text
//! robarch-surrogate 1
//! kind rbf
//! centers <k> <dim>
//! width <w>
//! <k rows of dim values>
//! weights <k + 1>
//! <values>
//! ```
//!
//! MLP dumps use `kind mlp`, `shape <input> <hidden>` and `params <n>`
//! followed by the flat row-major buffer. Values use `{:e}`, which
//! round-trips `f64` exactly.

use std::io::{BufRead, Write};

use super::{MlpModel, RbfModel, Surrogate, SurrogateError};

const MAGIC: &str = "robarch-surrogate";
const VERSION: u32 = 1;

fn write_row<W: Write>(out: &mut W, values: &[f64]) -> std::io::Result<()> {
    let row: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
    writeln!(out, "{}", row.join(" "))
}

pub fn write_surrogate<W: Write>(model: &Surrogate, mut out: W) -> Result<(), SurrogateError> {
    writeln!(out, "{MAGIC} {VERSION}")?;
    match model {
        Surrogate::Rbf(m) => {
            let dim = m.centers.first().map_or(0, Vec::len);
            writeln!(out, "kind rbf")?;
            writeln!(out, "centers {} {dim}", m.centers.len())?;
            writeln!(out, "width {:e}", m.width)?;
            for c in &m.centers {
                write_row(&mut out, c)?;
            }
            writeln!(out, "weights {}", m.weights.len())?;
            write_row(&mut out, &m.weights)?;
        }
        Surrogate::Mlp(m) => {
            writeln!(out, "kind mlp")?;
            writeln!(out, "shape {} {}", m.input, m.hidden)?;
            writeln!(out, "params {}", m.params.len())?;
            write_row(&mut out, &m.params)?;
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String, SurrogateError> {
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(SurrogateError::Format("unexpected end of file".into())),
        }
    }

    /// Reads `<key> <n1> <n2> ...`.
    fn header(&mut self, key: &str) -> Result<Vec<String>, SurrogateError> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(SurrogateError::Format(format!("expected {key:?} line, got {line:?}")));
        }
        Ok(parts.map(str::to_owned).collect())
    }

    fn row(&mut self, expected: usize) -> Result<Vec<f64>, SurrogateError> {
        let line = self.next_line()?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| SurrogateError::Format(format!("bad number {t:?}"))))
            .collect::<Result<_, _>>()?;
        if values.len() != expected {
            return Err(SurrogateError::Format(format!("expected {expected} values, got {}", values.len())));
        }
        Ok(values)
    }
}

fn parse_usize(s: Option<&String>) -> Result<usize, SurrogateError> {
    s.and_then(|v| v.parse().ok()).ok_or_else(|| SurrogateError::Format("bad integer field".into()))
}

pub fn read_surrogate<R: BufRead>(input: R) -> Result<Surrogate, SurrogateError> {
    let mut lines = Lines { inner: input.lines() };
    let version = lines.header(MAGIC)?;
    if parse_usize(version.first())? != VERSION as usize {
        return Err(SurrogateError::Format(format!("unsupported version {version:?}")));
    }
    let kind = lines.header("kind")?;
    match kind.first().map(String::as_str) {
        Some("rbf") => {
            let shape = lines.header("centers")?;
            let (k, dim) = (parse_usize(shape.first())?, parse_usize(shape.get(1))?);
            let width: f64 = lines
                .header("width")?
                .first()
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| SurrogateError::Format("bad width".into()))?;
            let centers = (0..k).map(|_| lines.row(dim)).collect::<Result<Vec<_>, _>>()?;
            let n = parse_usize(lines.header("weights")?.first())?;
            let weights = lines.row(n)?;
            Ok(Surrogate::Rbf(RbfModel { centers, width, weights }))
        }
        Some("mlp") => {
            let shape = lines.header("shape")?;
            let (input, hidden) = (parse_usize(shape.first())?, parse_usize(shape.get(1))?);
            let n = parse_usize(lines.header("params")?.first())?;
            if n != MlpModel::parameter_count(input, hidden) {
                return Err(SurrogateError::Format("parameter count does not match shape".into()));
            }
            let params = lines.row(n)?;
            Ok(Surrogate::Mlp(MlpModel { input, hidden, params }))
        }
        other => Err(SurrogateError::Format(format!("unknown model kind {other:?}"))),
    }
}
