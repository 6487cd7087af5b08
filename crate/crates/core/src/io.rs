//! Text formats: dense CSV and svmlight datasets, sketch files, and the
//! number formatting shared by every writer.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::projector::{EntryDistribution, ProjectionSpec, Route, Scheme, Sketch};
use crate::vector::DataVector;

/// 17 significant digits in scientific notation; parses back to the same
/// `f64` and never depends on locale.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: `{tok}`"),
    })
}

fn parse_label(tok: &str, line: usize) -> Result<i64> {
    let t = tok.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(v as i64),
        _ => Err(Error::Parse {
            line,
            msg: format!("label must be an integer class id, got `{t}`"),
        }),
    }
}

/// Rows of a data file, with labels when the file carries them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<DataVector<f64>>,
    pub labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn dim(&self) -> Option<usize> {
        self.rows.first().map(|r| r.dim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    DenseCsv,
    /// Needs the dimension up front.
    Svmlight { dim: usize },
}

impl DataFormat {
    /// `.svm`, `.svmlight` and `.libsvm` files are svmlight; anything else is
    /// read as CSV. `dim` is required for svmlight.
    pub fn detect(path: &Path, dim: Option<usize>) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if matches!(ext, "svm" | "svmlight" | "libsvm") {
            let dim = dim.ok_or_else(|| Error::InvalidArgument("svmlight input needs an explicit dimension".into()))?;
            Ok(DataFormat::Svmlight { dim })
        } else {
            Ok(DataFormat::DenseCsv)
        }
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    match format {
        DataFormat::DenseCsv => read_dense_csv(file),
        DataFormat::Svmlight { dim } => read_svmlight(file, dim),
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Comma-separated reals, one vector per line. An optional header row is
/// recognized by a non-numeric field; if its first column is `label`, that
/// column holds integer class ids.
pub fn read_dense_csv<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels: Option<Vec<i64>> = None;
    let mut dim = None;
    let mut first = true;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if first {
            first = false;
            if fields.iter().any(|f| f.parse::<f64>().is_err()) {
                if fields[0] == "label" {
                    labels = Some(Vec::new());
                }
                continue;
            }
        }
        let values = match labels.as_mut() {
            Some(ls) => {
                ls.push(parse_label(fields[0], lineno)?);
                &fields[1..]
            }
            None => &fields[..],
        };
        let v = values.iter().map(|f| parse_real(f, lineno)).collect::<Result<Vec<_>>>()?;
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {d} values, found {}", v.len()),
                })
            }
            _ => {}
        }
        if v.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                msg: "row has no values".into(),
            });
        }
        rows.push(DataVector::dense(v).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?);
    }
    Ok(Dataset { rows, labels })
}

/// `label idx:val ...` with 1-based, strictly ascending indices; `#` starts a
/// comment. Indices map to 0-based coordinates below `dim`.
pub fn read_svmlight<R: BufRead>(reader: R, dim: usize) -> Result<Dataset> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let body = line.split('#').next().unwrap_or("");
        let mut toks = body.split_whitespace();
        let Some(label) = toks.next() else { continue };
        labels.push(parse_label(label, lineno)?);
        let mut pairs = Vec::new();
        let mut last: Option<usize> = None;
        for tok in toks {
            let err = |msg: String| Error::Parse { line: lineno, msg };
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:val, got `{tok}`")))?;
            let i: usize = i.parse().map_err(|_| err(format!("bad index `{i}`")))?;
            if i == 0 {
                return Err(err("indices are 1-based".into()));
            }
            if i > dim {
                return Err(err(format!("index {i} exceeds dimension {dim}")));
            }
            if last.is_some_and(|l| i <= l) {
                return Err(err(format!("index {i} is not ascending")));
            }
            last = Some(i);
            pairs.push((i - 1, parse_real(v, lineno)?));
        }
        rows.push(DataVector::from_pairs(dim, pairs)?);
    }
    Ok(Dataset {
        rows,
        labels: Some(labels),
    })
}

const MAGIC: &str = "lpsketch v1";

fn route_token(scheme: Scheme, r: Route) -> String {
    let natural = match scheme {
        Scheme::OneMatrix => 1,
        Scheme::ThreeMatrix => r.power,
    };
    if r.matrix == natural {
        r.power.to_string()
    } else {
        format!("{}@{}", r.power, r.matrix)
    }
}

fn parse_route(scheme: Scheme, tok: &str, line: usize) -> Result<Route> {
    let err = || Error::Parse {
        line,
        msg: format!("bad power token `{tok}`"),
    };
    match tok.split_once('@') {
        Some((p, m)) => Ok(Route::new(p.parse().map_err(|_| err())?, m.parse().map_err(|_| err())?)),
        None => {
            let p: u32 = tok.parse().map_err(|_| err())?;
            let m = match scheme {
                Scheme::OneMatrix => 1,
                Scheme::ThreeMatrix => p,
            };
            Ok(Route::new(p, m))
        }
    }
}

/// Writes sketches sharing one projection spec.
///
/// Under the three-matrix scheme the power-`r` projection through matrix
/// `r` is written as plain `r`; the extra routes needed by the cross terms
/// are written `power@matrix`.
pub fn write_sketches<W: Write>(sketches: &[Sketch<f64>], mut out: W) -> Result<()> {
    let Some(head) = sketches.first() else {
        return Err(Error::InvalidArgument("no sketches to write".into()));
    };
    let spec = head.spec();
    for s in sketches {
        head.check_combinable(s)?;
        if s.max_power() != head.max_power() {
            return Err(Error::InvalidArgument("sketches differ in max power".into()));
        }
        if s.id().is_empty() || s.id().chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("sketch id `{}` must be a nonempty word", s.id())));
        }
    }
    writeln!(
        out,
        "{MAGIC} seed={} k={} scheme={} dist={} D={} maxpower={}",
        spec.seed,
        spec.k,
        spec.scheme,
        spec.distribution,
        spec.dim,
        head.max_power()
    )?;
    for s in sketches {
        for (route, v) in s.projections() {
            write!(out, "{} {}", s.id(), route_token(spec.scheme, *route))?;
            for e in v {
                write!(out, " {}", format_real(*e))?;
            }
            writeln!(out)?;
        }
    }
    for s in sketches {
        write!(out, "{} margins", s.id())?;
        for (_, m) in s.margins() {
            write!(out, " {}", format_real(*m))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn header_field<'a>(fields: &[(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("header is missing `{key}`"),
        })
}

/// Reads a sketch file; sketches come back in order of first appearance.
pub fn read_sketches<R: BufRead>(reader: R) -> Result<Vec<Sketch<f64>>> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or(Error::Parse {
        line: 1,
        msg: "empty sketch file".into(),
    })?;
    let rest = header.strip_prefix(MAGIC).ok_or(Error::Parse {
        line: 1,
        msg: format!("expected `{MAGIC}` header"),
    })?;
    let fields: Vec<(&str, &str)> = rest.split_whitespace().filter_map(|t| t.split_once('=')).collect();
    let bad = |what: &str| Error::Parse {
        line: 1,
        msg: format!("bad header value for `{what}`"),
    };
    let seed: u64 = header_field(&fields, "seed")?.parse().map_err(|_| bad("seed"))?;
    let k: usize = header_field(&fields, "k")?.parse().map_err(|_| bad("k"))?;
    let scheme: Scheme = header_field(&fields, "scheme")?.parse().map_err(|_| bad("scheme"))?;
    let dist: EntryDistribution = header_field(&fields, "dist")?.parse().map_err(|_| bad("dist"))?;
    let dim: usize = header_field(&fields, "D")?.parse().map_err(|_| bad("D"))?;
    let max_power: u32 = header_field(&fields, "maxpower")?.parse().map_err(|_| bad("maxpower"))?;
    let spec = ProjectionSpec::new(seed, k, scheme, dist, dim).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    let orders = crate::projector::margin_orders(max_power);

    let mut order: Vec<String> = Vec::new();
    let mut projections: Vec<Vec<(Route, Vec<f64>)>> = Vec::new();
    let mut margins: Vec<Option<Vec<(u32, f64)>>> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let lineno = n + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let id = toks.next().expect("nonempty line");
        let kind = toks.next().ok_or(Error::Parse {
            line: lineno,
            msg: "missing power or `margins`".into(),
        })?;
        let values = toks.map(|t| parse_real(t, lineno)).collect::<Result<Vec<_>>>()?;
        let slot = match order.iter().position(|o| o == id) {
            Some(s) => s,
            None => {
                order.push(id.to_string());
                projections.push(Vec::new());
                margins.push(None);
                order.len() - 1
            }
        };
        if kind == "margins" {
            if values.len() != orders.len() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {} margins, found {}", orders.len(), values.len()),
                });
            }
            if margins[slot].is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("duplicate margins for `{id}`"),
                });
            }
            margins[slot] = Some(orders.iter().copied().zip(values).collect());
        } else {
            let route = parse_route(scheme, kind, lineno)?;
            if values.len() != k {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {k} values, found {}", values.len()),
                });
            }
            projections[slot].push((route, values));
        }
    }
    order
        .into_iter()
        .zip(projections)
        .zip(margins)
        .map(|((id, proj), marg)| {
            let marg = marg.ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("sketch `{id}` has no margins line"),
            })?;
            Sketch::from_parts(id, spec, max_power, proj, marg)
        })
        .collect()
}

pub fn save_sketches(path: &Path, sketches: &[Sketch<f64>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_sketches(sketches, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_sketches(path: &Path) -> Result<Vec<Sketch<f64>>> {
    read_sketches(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::sketch_vector;

    #[test]
    fn csv_row() {
        let d = read_dense_csv("1.0,0.0,2.5\n".as_bytes()).unwrap();
        assert_eq!(d.rows, vec![DataVector::dense(vec![1.0, 0.0, 2.5]).unwrap()]);
        assert_eq!(d.labels, None);
    }

    #[test]
    fn csv_with_label_header() {
        let d = read_dense_csv("label,a,b\n1,0.5,2\n# note\n\n0,1,1\n".as_bytes()).unwrap();
        assert_eq!(d.labels, Some(vec![1, 0]));
        assert_eq!(d.rows[0].to_dense_vec(), vec![0.5, 2.0]);
        let plain = read_dense_csv("a,b\n1,2\n".as_bytes()).unwrap();
        assert_eq!(plain.labels, None);
        assert_eq!(plain.rows.len(), 1);
    }

    #[test]
    fn csv_errors_carry_line() {
        let e = read_dense_csv("1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = read_dense_csv("1,2\n3,4,5\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn svmlight_row() {
        let d = read_svmlight("+1 2:3.5 7:1\n".as_bytes(), 10).unwrap();
        assert_eq!(d.labels, Some(vec![1]));
        assert_eq!(d.rows[0], DataVector::sparse(10, vec![1, 6], vec![3.5, 1.0]).unwrap());
    }

    #[test]
    fn svmlight_empty_features_and_comments() {
        let d = read_svmlight("# header\n-1\n2 1:1 # trailing\n".as_bytes(), 4).unwrap();
        assert_eq!(d.labels, Some(vec![-1, 2]));
        assert_eq!(d.rows[0], DataVector::zeros(4).unwrap());
        assert_eq!(d.rows[1].nnz(), 1);
    }

    #[test]
    fn svmlight_errors() {
        for (text, line) in [("1 1:1\n1 3:1 2:1\n", 2), ("1 0:1\n", 1), ("1 11:1\n", 1), ("1 2:1 2:3\n", 1), ("1 2=1\n", 1)] {
            match read_svmlight(text.as_bytes(), 10) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn sketch_roundtrip_is_exact() {
        for (scheme, maxp) in [(Scheme::OneMatrix, 5), (Scheme::ThreeMatrix, 3)] {
            let spec = ProjectionSpec::new(99, 5, scheme, EntryDistribution::SparseThreePoint(4.0), 6).unwrap();
            let a = sketch_vector("a", &DataVector::dense(vec![0.1, 2.0, 0.0, -1.0, 3.0, 1e-7]).unwrap(), &spec, maxp).unwrap();
            let b = sketch_vector("b", &DataVector::zeros(6).unwrap(), &spec, maxp).unwrap();
            let mut buf = Vec::new();
            write_sketches(&[a.clone(), b.clone()], &mut buf).unwrap();
            let back = read_sketches(buf.as_slice()).unwrap();
            assert_eq!(back, vec![a, b]);
        }
    }

    #[test]
    fn sketch_file_layout() {
        let spec = ProjectionSpec::normal(1, 2, Scheme::ThreeMatrix, 2).unwrap();
        let a = sketch_vector("x", &DataVector::dense(vec![1.0, 2.0]).unwrap(), &spec, 3).unwrap();
        let mut buf = Vec::new();
        write_sketches(&[a], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lpsketch v1 seed=1 k=2 scheme=3p dist=normal D=2 maxpower=3");
        let tokens: Vec<&str> = lines[1..6].iter().map(|l| l.split(' ').nth(1).unwrap()).collect();
        assert_eq!(tokens, ["1", "1@3", "2", "3@1", "3"]);
        assert!(lines[6].starts_with("x margins 5.0000000000000000e0 1.7000000000000000e1"));
    }

    #[test]
    fn bad_sketch_files() {
        assert!(read_sketches("nope\n".as_bytes()).is_err());
        let text = "lpsketch v1 seed=1 k=2 scheme=1p dist=normal D=2 maxpower=3\nx 1 1 2\n";
        assert!(read_sketches(text.as_bytes()).is_err());
    }

    #[test]
    fn reals_roundtrip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456789.123456789, 0.0] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
    }
}
