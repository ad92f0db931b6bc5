//! On-disk cache of spectral data keyed by a content hash of the assembly
//! inputs. Files live in `<out>/.cache/<sha256>.bin` and are written to a
//! temporary name first, then renamed.
//!
//! Layout (little endian): magic `SPLCACHE`, `u32` version, `u8` kind
//! (1 = eigenpairs, 2 = values only), `u64` active count and the active node
//! indices, `u64` value count and the values; eigenpairs then carry the
//! residuals and the weighted eigenvectors column by column, values-only
//! entries a `u8` incompleteness flag.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::SymmetricOperator;
use crate::spectral::SpectralData;

const MAGIC: &[u8; 8] = b"SPLCACHE";
const VERSION: u32 = 1;

/// Hex sha256 of the concatenated parts (each prefixed by its length).
pub fn content_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
enum Entry {
    Pairs { values: Vec<f64>, residuals: Vec<f64>, vectors: Vec<f64> },
    Values { values: Vec<f64>, partial: bool },
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Hits whose content was recomputed and compared (at most one per run).
    pub spot_checks: usize,
}

#[derive(Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    rng: ChaCha8Rng,
    stats: CacheStats,
}

fn encode(active: &[usize], e: &Entry) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    let f64s = |b: &mut Vec<u8>, xs: &[f64]| xs.iter().for_each(|x| b.extend_from_slice(&x.to_le_bytes()));
    match e {
        Entry::Pairs { .. } => b.push(1),
        Entry::Values { .. } => b.push(2),
    }
    b.extend_from_slice(&(active.len() as u64).to_le_bytes());
    active.iter().for_each(|&i| b.extend_from_slice(&(i as u64).to_le_bytes()));
    match e {
        Entry::Pairs { values, residuals, vectors } => {
            b.extend_from_slice(&(values.len() as u64).to_le_bytes());
            f64s(&mut b, values);
            f64s(&mut b, residuals);
            f64s(&mut b, vectors);
        }
        Entry::Values { values, partial } => {
            b.extend_from_slice(&(values.len() as u64).to_le_bytes());
            f64s(&mut b, values);
            b.push(*partial as u8);
        }
    }
    b
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        if self.0.len() < n {
            return None;
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Some(head)
    }
    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8)?)?;
        Some(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn decode(bytes: &[u8]) -> Option<(Vec<usize>, Entry)> {
    let mut r = Reader(bytes);
    if r.take(8)? != MAGIC || u32::from_le_bytes(r.take(4)?.try_into().ok()?) != VERSION {
        return None;
    }
    let kind = r.take(1)?[0];
    let n = r.u64()? as usize;
    let active: Vec<usize> = (0..n).map(|_| r.u64().map(|v| v as usize)).collect::<Option<_>>()?;
    let k = r.u64()? as usize;
    let values = r.f64s(k)?;
    let entry = match kind {
        1 => Entry::Pairs { values, residuals: r.f64s(k)?, vectors: r.f64s(n.checked_mul(k)?)? },
        2 => Entry::Values { values, partial: r.take(1)?[0] != 0 },
        _ => return None,
    };
    r.0.is_empty().then_some((active, entry))
}

fn close(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl Cache {
    /// `dir = None` disables caching.
    pub fn new(dir: Option<&Path>, seed: u64) -> Self {
        Cache { dir: dir.map(Path::to_path_buf), rng: ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee), stats: CacheStats::default() }
    }

    pub fn stats(&self) -> CacheStats {
        self.stats
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.bin")))
    }

    fn load(&self, key: &str, a: &SymmetricOperator) -> Option<Entry> {
        let bytes = std::fs::read(self.path(key)?).ok()?;
        let (active, entry) = decode(&bytes)?;
        (active == a.frame().active()).then_some(entry)
    }

    fn store(&self, key: &str, a: &SymmetricOperator, e: &Entry) -> Result<()> {
        let Some(path) = self.path(key) else { return Ok(()) };
        let io = |err: std::io::Error| Error::Invariant(format!("cache write {}: {err}", path.display()));
        std::fs::create_dir_all(path.parent().unwrap()).map_err(io)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::write(&tmp, encode(a.frame().active(), e)).map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)
    }

    /// Eigenpairs of `a`, from disk when `key` is present.
    ///
    /// The first hit of a run is spot-checked: the entry is recomputed and a
    /// seeded random pair must agree with the cached one within 1e-12
    /// (relative for the eigenvalue, up to sign for the vector); every
    /// eigenvalue is compared as well.
    pub fn eigenpairs(
        &mut self,
        key: &str,
        a: &SymmetricOperator,
        compute: impl FnOnce() -> Result<SpectralData>,
    ) -> Result<SpectralData> {
        if let Some(Entry::Pairs { values, residuals, vectors }) = self.load(key, a) {
            let n = a.dim();
            let k = values.len();
            let v = Mat::from_fn(n, k, |i, j| vectors[j * n + i]);
            let s = SpectralData::from_weighted(Arc::clone(a.frame()), values, v, residuals);
            self.stats.hits += 1;
            if self.stats.spot_checks == 0 && k > 0 {
                self.stats.spot_checks += 1;
                let fresh = compute()?;
                let j = self.rng.gen_range(0..k);
                let values_agree = fresh.len() == k
                    && fresh.eigenvalues().iter().zip(s.eigenvalues()).all(|(&p, &q)| close(p, q));
                let vectors_agree = values_agree && {
                    let (x, y) = (fresh.eigenvector(j), s.eigenvector(j));
                    let sign = if x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
                    x.iter().zip(&y).all(|(p, q)| (p - sign * q).abs() <= 1e-12 * q.abs().max(1.0))
                };
                if !vectors_agree {
                    return Err(Error::Invariant(format!(
                        "cache entry {key} disagrees with a fresh solve (checked pair {j})"
                    )));
                }
            }
            return Ok(s);
        }
        self.stats.misses += 1;
        let s = compute()?;
        let n = a.dim();
        let k = s.len();
        let m = s.eigenvectors();
        let vectors: Vec<f64> = (0..k).flat_map(|j| (0..n).map(move |i| m[(i, j)])).collect();
        let e = Entry::Pairs { values: s.eigenvalues().to_vec(), residuals: s.residuals().to_vec(), vectors };
        self.store(key, a, &e)?;
        Ok(s)
    }

    /// An eigenvalue list; the first hit of a run is recomputed and must agree
    /// entry by entry within 1e-12 (relative).
    pub fn values(
        &mut self,
        key: &str,
        a: &SymmetricOperator,
        compute: impl FnOnce() -> Result<(Vec<f64>, bool)>,
    ) -> Result<(Vec<f64>, bool)> {
        if let Some(Entry::Values { values, partial }) = self.load(key, a) {
            self.stats.hits += 1;
            if self.stats.spot_checks == 0 {
                self.stats.spot_checks += 1;
                let (fresh, fresh_partial) = compute()?;
                let agree = fresh.len() == values.len()
                    && fresh_partial == partial
                    && fresh.iter().zip(&values).all(|(&p, &q)| close(p, q));
                if !agree {
                    return Err(Error::Invariant(format!("cache entry {key} disagrees with a fresh solve")));
                }
            }
            return Ok((values, partial));
        }
        self.stats.misses += 1;
        let (values, partial) = compute()?;
        self.store(key, a, &Entry::Values { values: values.clone(), partial })?;
        Ok((values, partial))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble_dirichlet_laplacian, build_grid, GridSpec};
    use crate::spectral::dense_eigendecomposition;

    #[test]
    fn encoding_round_trips_and_rejects_truncation() {
        let e = Entry::Pairs { values: vec![1.0, 2.5], residuals: vec![1e-12, 0.0], vectors: vec![0.1, 0.2, 0.3, -0.4, 0.5, 0.6] };
        let b = encode(&[0, 2, 5], &e);
        assert_eq!(decode(&b), Some((vec![0, 2, 5], e)));
        assert_eq!(decode(&b[..b.len() - 1]), None);
        let v = Entry::Values { values: vec![f64::INFINITY], partial: true };
        assert_eq!(decode(&encode(&[1], &v)).unwrap().1, v);
    }

    #[test]
    fn second_lookup_hits_and_passes_spot_check() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_grid(&GridSpec::centered_box(1, 2.0, 0.1)).unwrap();
        let a = assemble_dirichlet_laplacian(&g);
        let key = content_hash(&["lap", "2.0", "0.1"]);
        let mut c = Cache::new(Some(dir.path()), 1);
        let s1 = c.eigenpairs(&key, &a, || dense_eigendecomposition(&a)).unwrap();
        let mut c2 = Cache::new(Some(dir.path()), 1);
        let s2 = c2.eigenpairs(&key, &a, || dense_eigendecomposition(&a)).unwrap();
        assert_eq!(c2.stats(), CacheStats { hits: 1, misses: 0, spot_checks: 1 });
        let s3 = c2.eigenpairs(&key, &a, || panic!("only the first hit is recomputed")).unwrap();
        assert_eq!(c2.stats().hits, 2);
        assert_eq!(s3.eigenvalues(), s2.eigenvalues());
        assert_eq!(s1.eigenvalues(), s2.eigenvalues());
        assert_eq!(s1.eigenvectors(), s2.eigenvectors());
    }

    #[test]
    fn corrupted_entry_fails_the_spot_check() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_grid(&GridSpec::centered_box(1, 2.0, 0.1)).unwrap();
        let a = assemble_dirichlet_laplacian(&g);
        let mut c = Cache::new(Some(dir.path()), 3);
        let s = dense_eigendecomposition(&a).unwrap();
        let n = a.dim();
        let mut values = s.eigenvalues().to_vec();
        values.iter_mut().for_each(|v| *v *= 1.01);
        let m = s.eigenvectors();
        let vectors = (0..n).flat_map(|j| (0..n).map(move |i| m[(i, j)])).collect();
        c.store("k", &a, &Entry::Pairs { values, residuals: s.residuals().to_vec(), vectors }).unwrap();
        assert!(matches!(c.eigenpairs("k", &a, || dense_eigendecomposition(&a)), Err(Error::Invariant(_))));
        let mut c = Cache::new(Some(dir.path()), 3);
        c.store("v", &a, &Entry::Values { values: vec![1.0], partial: false }).unwrap();
        assert!(c.values("v", &a, || Ok((vec![1.5], false))).is_err());
    }
}
