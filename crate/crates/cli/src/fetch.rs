//! Downloads from the SuiteSparse Matrix Collection.
//!
//! Archives live at `{base}/MM/{group}/{name}.tar.gz` and contain
//! `{name}/{name}.mtx` plus optional auxiliary files, which are ignored.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use thiserror::Error;

pub const BASE_URL_ENV: &str = "SUITESPARSE_BASE_URL";
pub const DEFAULT_BASE_URL: &str = "https://sparse.tamu.edu";

/// Collection groups of the matrices used in the benchmarks.
pub const KNOWN_MATRICES: &[(&str, &str)] = &[
    ("HB", "1138_bus"),
    ("HB", "bcsstk13"),
    ("HB", "bcsstk14"),
    ("HB", "bcsstk18"),
    ("HB", "bcsstk26"),
    ("HB", "bcsstk27"),
    ("HB", "orsreg_1"),
    ("HB", "plat1919"),
    ("HB", "saylr4"),
    ("HB", "sherman3"),
    ("Hamm", "add32"),
    ("Bai", "bfwa782"),
    ("Bai", "bwm2000"),
    ("Bai", "cdde6"),
    ("Bai", "pde2961"),
    ("Bai", "rdb3200l"),
    ("Boeing", "msc01050"),
    ("Boeing", "msc04515"),
    ("TOKAMAK", "utm5940"),
];

pub fn known_group(name: &str) -> Option<&'static str> {
    KNOWN_MATRICES
        .iter()
        .find(|(_, n)| *n == name)
        .map(|(g, _)| *g)
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("{group}/{name} not found at {url}")]
    NotFound {
        group: String,
        name: String,
        url: String,
    },
    #[error("HTTP status {status} from {url}")]
    Http { status: u16, url: String },
    #[error("network error fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("archive from {url} has no member {member}")]
    MissingMember { url: String, member: String },
    #[error("corrupt archive from {url}: {source}")]
    Archive { url: String, source: io::Error },
    #[error("{path}: {message}")]
    Banner { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("unknown group for '{0}'; pass --group")]
    UnknownGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchStatus {
    Downloaded,
    AlreadyPresent,
}

pub fn base_url() -> String {
    std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string())
}

pub fn archive_url(base: &str, group: &str, name: &str) -> String {
    format!("{}/MM/{group}/{name}.tar.gz", base.trim_end_matches('/'))
}

/// Checks the `%%MatrixMarket` banner and returns the declared
/// `(nrows, ncols, nnz)` from the size line.
pub fn verify_matrix_file(path: &Path) -> Result<(usize, usize, usize), FetchError> {
    let io_err = |source| FetchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let bad = |message: String| FetchError::Banner {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = BufReader::new(File::open(path).map_err(io_err)?).lines();
    let banner = match lines.next() {
        Some(line) => line.map_err(io_err)?,
        None => return Err(bad("empty file".into())),
    };
    let words: Vec<String> = banner
        .split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect();
    if words.len() < 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(bad(format!("not a Matrix Market banner: {banner:?}")));
    }
    for line in lines {
        let line = line.map_err(io_err)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let sizes: Vec<usize> = trimmed
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("malformed size line: {trimmed:?}")))?;
        return match sizes[..] {
            [r, c, nnz] => Ok((r, c, nnz)),
            [r, c] => Ok((r, c, r * c)),
            _ => Err(bad(format!("malformed size line: {trimmed:?}"))),
        };
    }
    Err(bad("missing size line".into()))
}

/// Fetches `group/name` into `dest/name.mtx`. An existing file that passes
/// [`verify_matrix_file`] is kept without touching the network.
pub fn fetch_matrix(
    base: &str,
    group: &str,
    name: &str,
    dest: &Path,
) -> Result<(PathBuf, FetchStatus), FetchError> {
    let target = dest.join(format!("{name}.mtx"));
    if target.is_file() && verify_matrix_file(&target).is_ok() {
        return Ok((target, FetchStatus::AlreadyPresent));
    }
    fs::create_dir_all(dest).map_err(|source| FetchError::Io {
        path: dest.to_path_buf(),
        source,
    })?;

    let url = archive_url(base, group, name);
    let response = match ureq::get(&url).call() {
        Ok(r) => r,
        Err(ureq::Error::StatusCode(404)) => {
            return Err(FetchError::NotFound {
                group: group.into(),
                name: name.into(),
                url,
            })
        }
        Err(ureq::Error::StatusCode(status)) => return Err(FetchError::Http { status, url }),
        Err(e) => {
            return Err(FetchError::Network {
                url,
                message: e.to_string(),
            })
        }
    };

    let partial = dest.join(format!(".{name}.mtx.part"));
    let result = extract_member(response.into_body().into_reader(), name, &url, &partial)
        .and_then(|()| verify_matrix_file(&partial).map(|_| ()))
        .and_then(|()| {
            fs::rename(&partial, &target).map_err(|source| FetchError::Io {
                path: target.clone(),
                source,
            })
        });
    if result.is_err() {
        let _ = fs::remove_file(&partial);
    }
    result.map(|()| (target, FetchStatus::Downloaded))
}

fn extract_member(reader: impl Read, name: &str, url: &str, out: &Path) -> Result<(), FetchError> {
    let archive_err = |source| FetchError::Archive {
        url: url.to_string(),
        source,
    };
    let wanted = format!("{name}.mtx");
    let mut archive = tar::Archive::new(GzDecoder::new(reader));
    for entry in archive.entries().map_err(archive_err)? {
        let mut entry = entry.map_err(archive_err)?;
        let path = entry.path().map_err(archive_err)?;
        if path.file_name().and_then(|f| f.to_str()) != Some(wanted.as_str()) {
            continue;
        }
        let mut file = File::create(out).map_err(|source| FetchError::Io {
            path: out.to_path_buf(),
            source,
        })?;
        io::copy(&mut entry, &mut file).map_err(archive_err)?;
        return Ok(());
    }
    Err(FetchError::MissingMember {
        url: url.to_string(),
        member: wanted,
    })
}
