use std::env;
use std::path::PathBuf;

use wllab_core::{BernoulliTable, SharedBernoulli};

const CACHE_FILE: &str = "bernoulli.cache";

/// `WLLAB_CACHE_DIR`, else the XDG cache directory, else `~/.cache`.
fn cache_dir() -> Option<PathBuf> {
    let from_env = |key: &str| {
        env::var_os(key)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    };
    from_env("WLLAB_CACHE_DIR")
        .or_else(|| from_env("XDG_CACHE_HOME").map(|d| d.join("wllab")))
        .or_else(|| from_env("HOME").map(|d| d.join(".cache").join("wllab")))
}

/// On-disk Bernoulli table. Cache problems are reported and otherwise ignored;
/// the table can always be recomputed.
pub struct BernoulliCache {
    path: Option<PathBuf>,
    loaded_max: usize,
}

impl BernoulliCache {
    pub fn open() -> (Self, SharedBernoulli) {
        let path = cache_dir().map(|d| d.join(CACHE_FILE));
        let table = match &path {
            Some(p) if p.exists() => BernoulliTable::load(p).unwrap_or_else(|e| {
                eprintln!("warning: ignoring Bernoulli cache: {e}");
                BernoulliTable::new()
            }),
            _ => BernoulliTable::new(),
        };
        let loaded_max = table.max_index();
        (
            BernoulliCache { path, loaded_max },
            SharedBernoulli::new(table),
        )
    }

    pub fn store(&self, table: &SharedBernoulli) {
        let Some(path) = &self.path else { return };
        if table.max_index() <= self.loaded_max {
            return;
        }
        let written = path
            .parent()
            .map_or(Ok(()), std::fs::create_dir_all)
            .map_err(|e| e.to_string())
            .and_then(|()| table.snapshot().save(path).map_err(|e| e.to_string()));
        if let Err(e) = written {
            eprintln!(
                "warning: could not write Bernoulli cache {}: {e}",
                path.display()
            );
        }
    }
}
