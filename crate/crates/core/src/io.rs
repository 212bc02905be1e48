//! Text and binary formats: key-value files, instance descriptions,
//! adjacency exports and dense matrix dumps.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::model::{ClusterSpec, ModelError, SbmInstance};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("missing key {0:?}")]
    MissingKey(String),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("key {key:?}: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    pub fn with_path(path: &Path, source: io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Ordered `key = value` map. Blank lines and `#` comments are skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(IoError::Syntax {
                line: idx + 1,
                reason: "expected 'key = value'".into(),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(IoError::Syntax {
                    line: idx + 1,
                    reason: "empty key".into(),
                });
            }
            if entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(IoError::DuplicateKey(k.to_string()));
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::with_path(path, e))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.insert(key.into(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn require(&self, key: &str) -> Result<&str, IoError> {
        self.get(key).ok_or_else(|| IoError::MissingKey(key.to_string()))
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, IoError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| IoError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
            }),
        }
    }

    pub fn parse_required<T: FromStr>(&self, key: &str) -> Result<T, IoError> {
        self.parse_value(key)?
            .ok_or_else(|| IoError::MissingKey(key.to_string()))
    }

    /// Comma-separated list.
    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, IoError> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        parse_list(v)
            .map(Some)
            .ok_or_else(|| IoError::BadValue {
                key: key.to_string(),
                value: v.to_string(),
            })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), IoError> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(IoError::UnknownKey(k.to_string())),
            None => Ok(()),
        }
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Parses `a,b,c` (whitespace tolerated); `None` on any bad item.
pub fn parse_list<T: FromStr>(s: &str) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

pub fn join_list<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Instance description: `sizes`, `p`, `q` and an optional `seed`.
pub fn instance_to_text(instance: &SbmInstance, seed: Option<u64>) -> String {
    let mut kv = KeyValues::default();
    kv.insert("sizes", join_list(instance.spec().sizes()));
    kv.insert("p", format!("{:?}", instance.p()));
    kv.insert("q", format!("{:?}", instance.q()));
    if let Some(s) = seed {
        kv.insert("seed", s);
    }
    kv.to_text()
}

pub fn instance_from_text(text: &str) -> Result<(SbmInstance, Option<u64>), IoError> {
    let kv = KeyValues::parse(text)?;
    kv.check_keys(&["sizes", "p", "q", "seed"])?;
    let sizes: Vec<usize> = kv
        .parse_list("sizes")?
        .ok_or_else(|| IoError::MissingKey("sizes".into()))?;
    let p: f64 = kv.parse_required("p")?;
    let q: f64 = kv.parse_required("q")?;
    let seed = kv.parse_value("seed")?;
    let instance = SbmInstance::new(ClusterSpec::new(sizes)?, p, q)?;
    Ok((instance, seed))
}

fn check_binary(a: &SymMatrix) -> Result<(), IoError> {
    if a.as_slice().iter().any(|&x| x != 0.0 && x != 1.0) {
        return Err(IoError::Format("adjacency entries must be 0 or 1".into()));
    }
    Ok(())
}

/// 8-byte LE `n`, then the upper triangle with diagonal in row-major order,
/// one bit per entry, least significant bit first.
pub fn write_adjacency_packed<W: Write>(a: &SymMatrix, mut w: W) -> Result<(), IoError> {
    check_binary(a)?;
    let n = a.n();
    w.write_all(&(n as u64).to_le_bytes())?;
    let bits = n * (n + 1) / 2;
    let mut bytes = vec![0u8; bits.div_ceil(8)];
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            if a.get(i, j) == 1.0 {
                bytes[idx / 8] |= 1 << (idx % 8);
            }
            idx += 1;
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_adjacency_packed<R: Read>(mut r: R) -> Result<SymMatrix, IoError> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let n = usize::try_from(u64::from_le_bytes(header))
        .map_err(|_| IoError::Format("n does not fit in memory".into()))?;
    let bits = n
        .checked_mul(n + 1)
        .map(|x| x / 2)
        .ok_or_else(|| IoError::Format("n too large".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != bits.div_ceil(8) {
        return Err(IoError::Format(format!(
            "expected {} payload bytes for n = {n}, found {}",
            bits.div_ceil(8),
            bytes.len()
        )));
    }
    let mut a = SymMatrix::zeros(n);
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            if bytes[idx / 8] >> (idx % 8) & 1 == 1 {
                a.set(i, j, 1.0);
            }
            idx += 1;
        }
    }
    Ok(a)
}

/// `n <n>` header line, then one `i j` line per edge with `i ≤ j`.
pub fn write_edge_list<W: Write>(a: &SymMatrix, mut w: W) -> Result<(), IoError> {
    check_binary(a)?;
    let n = a.n();
    writeln!(w, "n {n}")?;
    for i in 0..n {
        for j in i..n {
            if a.get(i, j) == 1.0 {
                writeln!(w, "{i} {j}")?;
            }
        }
    }
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<SymMatrix, IoError> {
    let mut a: Option<SymMatrix> = None;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| IoError::Syntax {
            line: idx + 1,
            reason: reason.to_string(),
        };
        let mut parts = line.split_whitespace();
        match (&mut a, parts.next(), parts.next(), parts.next()) {
            (None, Some("n"), Some(n), None) => {
                let n: usize = n.parse().map_err(|_| bad("bad node count"))?;
                a = Some(SymMatrix::zeros(n));
            }
            (None, _, _, _) => return Err(bad("expected 'n <count>' header")),
            (Some(m), Some(i), Some(j), None) => {
                let i: usize = i.parse().map_err(|_| bad("bad node id"))?;
                let j: usize = j.parse().map_err(|_| bad("bad node id"))?;
                if i >= m.n() || j >= m.n() {
                    return Err(bad("node id out of range"));
                }
                m.set(i, j, 1.0);
            }
            _ => return Err(bad("expected 'i j'")),
        }
    }
    a.ok_or_else(|| IoError::Format("empty edge list".into()))
}

/// One row per line, entries in `{:.16e}` (17 significant digits).
pub fn write_matrix_csv<W: Write>(m: &SymMatrix, mut w: W) -> Result<(), IoError> {
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: BufRead>(r: R) -> Result<SymMatrix, IoError> {
    let mut rows = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_list::<f64>(&line).ok_or(IoError::Syntax {
            line: idx + 1,
            reason: "bad number".into(),
        })?;
        rows.push(row);
    }
    SymMatrix::from_rows(&rows).map_err(|e| IoError::Format(e.to_string()))
}

/// 8-byte LE `n`, then `n²` LE f64 in row-major order.
pub fn write_matrix_binary<W: Write>(m: &SymMatrix, mut w: W) -> Result<(), IoError> {
    w.write_all(&(m.n() as u64).to_le_bytes())?;
    for x in m.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut r: R) -> Result<SymMatrix, IoError> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let n = u64::from_le_bytes(header) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if Some(bytes.len()) != n.checked_mul(n).and_then(|x| x.checked_mul(8)) {
        return Err(IoError::Format(format!(
            "expected {n}x{n} f64 payload, found {} bytes",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    SymMatrix::from_row_major(n, data).map_err(|e| IoError::Format(e.to_string()))
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| IoError::with_path(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| IoError::with_path(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_sbm;

    #[test]
    fn key_values() {
        let kv = KeyValues::parse("# header\na = 1\n\nb = x, y # trailing\n").unwrap();
        assert_eq!(kv.get("a"), Some("1"));
        assert_eq!(kv.get("b"), Some("x, y"));
        assert_eq!(kv.parse_required::<u32>("a").unwrap(), 1);
        assert!(kv.parse_required::<u32>("b").is_err());
        assert!(kv.check_keys(&["a"]).is_err());
        assert!(kv.check_keys(&["a", "b"]).is_ok());
        assert!(matches!(KeyValues::parse("a = 1\na = 2"), Err(IoError::DuplicateKey(_))));
        assert!(matches!(KeyValues::parse("novalue"), Err(IoError::Syntax { line: 1, .. })));
        assert_eq!(KeyValues::parse(&kv.to_text()).unwrap(), kv);
    }

    #[test]
    fn instance_round_trip() {
        let inst = SbmInstance::new(ClusterSpec::new(vec![5, 3]).unwrap(), 0.7, 0.3).unwrap();
        let text = instance_to_text(&inst, Some(12));
        let (back, seed) = instance_from_text(&text).unwrap();
        assert_eq!(back.spec().sizes(), &[5, 3]);
        assert_eq!((back.p(), back.q(), seed), (0.7, 0.3, Some(12)));
        assert!(instance_from_text("sizes = 5\np = 0.5\nq = 0.1\nextra = 1").is_err());
        assert!(instance_from_text("sizes = 5\np = 0.1\nq = 0.5").is_err());
    }

    #[test]
    fn packed_adjacency_layout() {
        // upper triangle of a 3x3: (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
        let a = SymMatrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_adjacency_packed(&a, &mut buf).unwrap();
        assert_eq!(&buf[..8], &3u64.to_le_bytes());
        assert_eq!(&buf[8..], &[0b0011_0101]);
        assert_eq!(read_adjacency_packed(&buf[..]).unwrap(), a);
        assert!(read_adjacency_packed(&buf[..8]).is_err());
    }

    #[test]
    fn sampled_adjacency_round_trips() {
        let inst = SbmInstance::new(ClusterSpec::new(vec![20, 13]).unwrap(), 0.6, 0.2).unwrap();
        let s = generate_sbm(&inst, 3);
        let mut packed = Vec::new();
        write_adjacency_packed(&s.a, &mut packed).unwrap();
        assert_eq!(read_adjacency_packed(&packed[..]).unwrap(), s.a);
        let mut edges = Vec::new();
        write_edge_list(&s.a, &mut edges).unwrap();
        assert_eq!(read_edge_list(&edges[..]).unwrap(), s.a);
        assert!(write_edge_list(&SymMatrix::filled(2, 0.5), Vec::new()).is_err());
    }

    #[test]
    fn matrix_dumps_are_exact() {
        let m = SymMatrix::from_fn(4, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0) + 1e-17);
        let mut csv = Vec::new();
        write_matrix_csv(&m, &mut csv).unwrap();
        assert_eq!(read_matrix_csv(&csv[..]).unwrap(), m);
        let mut bin = Vec::new();
        write_matrix_binary(&m, &mut bin).unwrap();
        assert_eq!(bin.len(), 8 + 16 * 8);
        assert_eq!(read_matrix_binary(&bin[..]).unwrap(), m);
    }
}
