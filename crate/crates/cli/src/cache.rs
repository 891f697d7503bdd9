//! Persistent checkpoint cache for the C_{2i} square-sum sweep.
//!
//! One tab-separated record per line: `kind \t checkpoint_i \t sum_decimal
//! \t digits`, checkpoints strictly increasing. The stored sums are the raw
//! inner sums from the sweep (twin-constant factor not yet applied), exactly
//! as handed to the checkpoint callback, so a resumed run continues the same
//! accumulation bit for bit.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use congamma_core::sieve::{c2i_raw_interval, C2I_SEGMENT};
use congamma_core::{BigReal, Error, Result};

pub const CACHE_KIND: &str = "c2i_square_sum";

/// Relative paths land in `CONGAMMA_CACHE_DIR` when that is set; absolute
/// paths are used verbatim. Without a `--cache` flag the file is named
/// `c2i.cache`.
pub fn resolve_cache_path(flag: Option<&str>) -> PathBuf {
    let name = Path::new(flag.unwrap_or("c2i.cache"));
    if name.is_absolute() {
        return name.to_path_buf();
    }
    match std::env::var_os("CONGAMMA_CACHE_DIR") {
        Some(dir) => PathBuf::from(dir).join(name),
        None => name.to_path_buf(),
    }
}

#[derive(Clone, Debug)]
pub struct CacheRecord {
    pub checkpoint_i: u64,
    pub sum_decimal: String,
    pub digits: u32,
}

impl CacheRecord {
    pub fn sum(&self) -> Result<BigReal> {
        BigReal::from_decimal_str(&self.sum_decimal, self.digits)
    }
}

#[derive(Debug)]
pub struct C2iCache {
    pub path: PathBuf,
    pub records: Vec<CacheRecord>,
}

impl C2iCache {
    /// A missing file is an empty cache; anything unreadable in an existing
    /// file is a corruption error naming the line.
    pub fn load(path: PathBuf) -> Result<Self> {
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let corrupt = |message: String| Error::CacheCorrupt { line, message };
            if raw.trim().is_empty() {
                return Err(corrupt("blank line".to_string()));
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 4 {
                return Err(corrupt(format!(
                    "expected 4 tab-separated fields, found {}",
                    fields.len()
                )));
            }
            if fields[0] != CACHE_KIND {
                return Err(corrupt(format!("unknown record kind {:?}", fields[0])));
            }
            let checkpoint_i: u64 = fields[1]
                .parse()
                .map_err(|e| corrupt(format!("bad checkpoint {:?}: {e}", fields[1])))?;
            let digits: u32 = fields[3]
                .parse()
                .map_err(|e| corrupt(format!("bad digits {:?}: {e}", fields[3])))?;
            let record = CacheRecord {
                checkpoint_i,
                sum_decimal: fields[2].to_string(),
                digits,
            };
            record
                .sum()
                .map_err(|e| corrupt(format!("bad sum_decimal: {e}")))?;
            if checkpoint_i % C2I_SEGMENT != 0 {
                return Err(corrupt(format!(
                    "checkpoint {checkpoint_i} is not a multiple of {C2I_SEGMENT}"
                )));
            }
            if let Some(prev) = records.last() {
                let prev: &CacheRecord = prev;
                if checkpoint_i <= prev.checkpoint_i {
                    return Err(corrupt(format!(
                        "checkpoint {checkpoint_i} does not increase past {}",
                        prev.checkpoint_i
                    )));
                }
            }
            records.push(record);
        }
        Ok(C2iCache { path, records })
    }

    /// Re-derive the last record from its predecessor by recomputing the
    /// covered i-interval. Catches edited sums without replaying the file.
    pub fn verify_tail(&self) -> Result<()> {
        let last = match self.records.last() {
            Some(r) => r,
            None => return Ok(()),
        };
        let line = self.records.len();
        let (prev_i, prev_sum) = match self.records.len().checked_sub(2) {
            Some(k) => {
                let p = &self.records[k];
                (p.checkpoint_i, p.sum()?)
            }
            None => (0, BigReal::zero(last.digits)),
        };
        let delta = last.sum()?.sub(&prev_sum);
        let recomputed = c2i_raw_interval(prev_i, last.checkpoint_i);
        // double-double accumulation drift is ~1e-30 absolute here; an edited
        // digit anywhere a human would bother with lands far above this
        let err = delta.sub(&recomputed).to_f64().abs();
        let scale = recomputed.to_f64().abs().max(1.0);
        if err > 1e-15 * scale {
            return Err(Error::CacheCorrupt {
                line,
                message: format!(
                    "sum_decimal fails segment recomputation over ({prev_i}, {}]",
                    last.checkpoint_i
                ),
            });
        }
        Ok(())
    }

    /// Largest persisted checkpoint at or below `limit`, as a resume point.
    pub fn resume_for(&self, limit: u64) -> Result<Option<(u64, BigReal)>> {
        for rec in self.records.iter().rev() {
            if rec.checkpoint_i <= limit {
                return Ok(Some((rec.checkpoint_i, rec.sum()?)));
            }
        }
        Ok(None)
    }

    pub fn appender(&self) -> Result<CacheAppender> {
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        Ok(CacheAppender {
            file,
            max_existing: self.records.last().map_or(0, |r| r.checkpoint_i),
        })
    }
}

/// Single writer for new checkpoints. Only segment-boundary checkpoints past
/// everything already on disk are persisted, keeping the file append-only
/// and strictly increasing.
pub struct CacheAppender {
    file: File,
    max_existing: u64,
}

impl CacheAppender {
    pub fn push(&mut self, checkpoint_i: u64, sum: &BigReal) -> Result<()> {
        if checkpoint_i <= self.max_existing || checkpoint_i % C2I_SEGMENT != 0 {
            return Ok(());
        }
        writeln!(
            self.file,
            "{CACHE_KIND}\t{checkpoint_i}\t{}\t{}",
            sum.to_decimal_string(),
            sum.precision_digits()
        )?;
        self.max_existing = checkpoint_i;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.file.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use congamma_core::sieve::C2I_CHECKPOINT_EVERY;
    use congamma_core::PrecisionPolicy;

    fn sweep_file(limit: u64) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c2i.cache");
        let cache = C2iCache::load(path.clone()).unwrap();
        let mut app = cache.appender().unwrap();
        let policy = PrecisionPolicy::default();
        congamma_core::sieve::c2i_square_sum_resumable(limit, &policy, 2, None, &mut |i, s| {
            app.push(i, s).unwrap();
        })
        .unwrap();
        app.finish().unwrap();
        (dir, path)
    }

    #[test]
    fn sweep_checkpoints_round_trip_and_verify() {
        let (_dir, path) = sweep_file(2 * C2I_CHECKPOINT_EVERY + 500_000);
        let cache = C2iCache::load(path).unwrap();
        assert_eq!(
            cache
                .records
                .iter()
                .map(|r| r.checkpoint_i)
                .collect::<Vec<_>>(),
            vec![C2I_CHECKPOINT_EVERY, 2 * C2I_CHECKPOINT_EVERY]
        );
        cache.verify_tail().unwrap();
        let (i, _) = cache.resume_for(u64::MAX).unwrap().unwrap();
        assert_eq!(i, 2 * C2I_CHECKPOINT_EVERY);
        assert!(cache.resume_for(C2I_CHECKPOINT_EVERY - 1).unwrap().is_none());
    }

    #[test]
    fn tampered_sum_is_detected() {
        let (_dir, path) = sweep_file(C2I_CHECKPOINT_EVERY);
        let text = std::fs::read_to_string(&path).unwrap();
        // bump one early significant digit of the stored sum
        let pos = text.find('.').unwrap() + 2;
        let mut bytes = text.into_bytes();
        bytes[pos] = if bytes[pos] == b'9' { b'1' } else { bytes[pos] + 1 };
        std::fs::write(&path, bytes).unwrap();

        let cache = C2iCache::load(path).unwrap();
        let err = cache.verify_tail().unwrap_err();
        assert!(matches!(err, Error::CacheCorrupt { line: 1, .. }), "{err}");
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cache");
        let good = format!("{CACHE_KIND}\t{}\t1.25\t40\n", C2I_SEGMENT);
        for (body, want_line) in [
            (format!("{good}not-a-record\n"), 2),
            (format!("{good}{CACHE_KIND}\t12345\t1.0\t40\n"), 2),
            (format!("{CACHE_KIND}\t{}\tx.y\t40\n", C2I_SEGMENT), 1),
            (format!("{good}{good}"), 2),
        ] {
            std::fs::write(&path, body).unwrap();
            let err = C2iCache::load(path.clone()).unwrap_err();
            match err {
                Error::CacheCorrupt { line, .. } => assert_eq!(line, want_line),
                other => panic!("expected corruption, got {other}"),
            }
        }
    }
}
