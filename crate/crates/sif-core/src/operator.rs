//! Discrete moving-average operators on the grid, in banded form.
//!
//! Both operators are longitude-translation invariant: the entry at
//! `((i,j),(p,q))` depends on `i, p` only through `t = (i - p) mod N`.
//! Assembly therefore computes one representative value per
//! `(t, s = j - q, j)` triple and stores it as `bands[(t, s)][j]`,
//! reducing storage from `O(N^2 * bandwidth)` to `O(N * bandwidth)`.
//!
//! * `Exact` (`B`): each entry is the double cell-pair integral
//!   `(1 / sigma(S_ij)) int_{S_ij} int_{S_pq} f_w(r) dsigma(r) dsigma(w)`,
//!   evaluated with a composite midpoint rule. `B` is stochastic up to
//!   quadrature error.
//! * `Approx` (`Op`): the first-order entry
//!   `sigma(S_pq) * f_{z_ij}(z_pq)`; exact and approximate entries differ
//!   by `O(h^3)`.
//!
//! The radius must stay below `pi/2` so the latitude bandwidth is below
//! `N/2` and antipodal wraparound cannot alias band indices.

use crate::error::{Result, SifError};
use crate::filter::{support_overlap_cells, FilterSpec};
use crate::grid::GridSpec;
use crate::par;
use crate::signal::SphericalSignal;
use ndarray::Array2;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Cell-pair quadrature of the double integral (`B`).
    Exact,
    /// Center-point evaluation weighted by the column cell area (`Op`).
    Approx,
}

/// One stored diagonal: the value of entry `((i, j), (i-t, j-s))` for every
/// `j`, any `i`. Entries whose column index `j - s` falls outside `1..=N`
/// are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    t: i32,
    s: i32,
    values: Vec<f64>,
}

impl Band {
    pub fn t(&self) -> i32 {
        self.t
    }

    pub fn s(&self) -> i32 {
        self.s
    }

    /// Values indexed by `j - 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A banded, longitude-invariant moving-average operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SiftOperator {
    grid: GridSpec,
    filter: FilterSpec,
    kind: OperatorKind,
    quad_level: Option<u32>,
    bands: Vec<Band>,
}

/// Memory guard for banded storage.
const MAX_BAND_BYTES: usize = 4 << 30;
/// Work guard for exact assembly (filter evaluations).
const MAX_QUAD_EVALS: f64 = 5e11;

/// Canonical signed representative of `t mod n`, in `(-n/2, n/2]`.
fn canonical_t(t: i64, n: i64) -> i64 {
    let r = t.rem_euclid(n);
    if 2 * r > n {
        r - n
    } else {
        r
    }
}

/// Arc distance between centers in rows `j` and `q` whose longitudes
/// differ by `t` cells (`2th` radians).
fn center_distance(grid: &GridSpec, j: usize, q: usize, t: i64) -> f64 {
    if j == q && t.rem_euclid(grid.n() as i64) == 0 {
        return 0.0;
    }
    let h = grid.h();
    let pj = -PI / 2.0 + (j as f64 - 0.5) * h;
    let pq = -PI / 2.0 + (q as f64 - 0.5) * h;
    let c = pj.sin() * pq.sin() + pj.cos() * pq.cos() * (2.0 * t as f64 * h).cos();
    c.clamp(-1.0, 1.0).acos()
}

fn require_bandable(grid: &GridSpec, filter: &FilterSpec) -> Result<()> {
    if filter.radius() >= PI / 2.0 {
        return Err(SifError::InvalidFilter(format!(
            "banded assembly needs radius < pi/2, got {}",
            filter.radius()
        )));
    }
    let _ = grid;
    Ok(())
}

fn band_budget(grid: &GridSpec, candidates: usize) -> Result<()> {
    let bytes = candidates
        .saturating_mul(grid.n())
        .saturating_mul(std::mem::size_of::<f64>());
    if bytes > MAX_BAND_BYTES {
        return Err(SifError::ResourceLimit(format!(
            "band storage would need {bytes} bytes for {candidates} candidate bands"
        )));
    }
    Ok(())
}

/// Builds the first-order operator `Op`:
/// `Op[(i,j),(p,q)] = sigma(S_pq) * f_{z_ij}(z_pq)`.
pub fn build_approx_op(grid: &GridSpec, filter: &FilterSpec) -> Result<SiftOperator> {
    require_bandable(grid, filter)?;
    let n = grid.n() as i64;
    let m = filter.cells_on(grid);
    // centers in rows j, j-s are at least |s| h apart, so |s| >= m is zero
    let s_max = ((m.ceil() as i64) - 1).clamp(0, n - 1);

    let candidates = candidate_offsets(grid, s_max);
    band_budget(grid, candidates.len())?;

    let filter = *filter;
    let grid_c = *grid;
    let bands = par::map_vec(candidates, move |(t, s)| {
        let mut values = vec![0.0; grid_c.n()];
        let mut any = false;
        for j in j_range(grid_c.n(), s) {
            let q = (j as i64 - s) as usize;
            if !support_overlap_cells(m, &grid_c, j, t, s) {
                continue;
            }
            let d = center_distance(&grid_c, j, q, t);
            let v = grid_c.cell_area_unchecked(q) * filter.value_at_distance(d);
            if v != 0.0 {
                values[j - 1] = v;
                any = true;
            }
        }
        any.then_some(Band {
            t: t as i32,
            s: s as i32,
            values,
        })
    });

    Ok(SiftOperator {
        grid: *grid,
        filter,
        kind: OperatorKind::Approx,
        quad_level: None,
        bands: sort_bands(bands.into_iter().flatten().collect()),
    })
}

/// Builds the exact operator `B` by composite midpoint quadrature with
/// `quad_level` subdivisions per angular axis of each cell.
///
/// When the filter spans fewer than two cells the subdivision count is
/// scaled up by `ceil(2 / m)` so the cone stays resolved; otherwise the
/// kink at `d = R` would dominate the error on coarse grids.
pub fn build_exact_b(grid: &GridSpec, filter: &FilterSpec, quad_level: u32) -> Result<SiftOperator> {
    require_bandable(grid, filter)?;
    if quad_level < 2 {
        return Err(SifError::InvalidFilter(format!(
            "quadrature level must be at least 2, got {quad_level}"
        )));
    }
    let n = grid.n() as i64;
    let m = filter.cells_on(grid);
    // cells in rows j, j-s are at least (|s|-1) h apart
    let s_max = (((m + 1.0).ceil() as i64) - 1).clamp(0, n - 1);
    // conservative pruning for cell pairs: inflate the radius by both
    // cell diameters before applying the center-distance bound
    let m_inflated = m + 2.0 * grid.max_cell_diameter() / grid.h();

    let refine = (2.0 / m).ceil().max(1.0) as u32;
    let n_sub = (quad_level * refine) as usize;

    let candidates = candidate_offsets(grid, s_max);
    band_budget(grid, candidates.len())?;
    let evals = candidates.len() as f64 * grid.n() as f64 * (n_sub * n_sub * 2 * n_sub) as f64;
    if evals > MAX_QUAD_EVALS {
        return Err(SifError::ResourceLimit(format!(
            "exact assembly would need ~{evals:.1e} filter evaluations"
        )));
    }

    let filter_c = *filter;
    let grid_c = *grid;
    let bands = par::map_vec(candidates, move |(t, s)| {
        let mut values = vec![0.0; grid_c.n()];
        let mut any = false;
        for j in j_range(grid_c.n(), s) {
            if !support_overlap_cells(m_inflated, &grid_c, j, t, s) {
                continue;
            }
            let v = exact_entry(&grid_c, &filter_c, n_sub, j, t, s);
            if v != 0.0 {
                values[j - 1] = v;
                any = true;
            }
        }
        any.then_some(Band {
            t: t as i32,
            s: s as i32,
            values,
        })
    });

    Ok(SiftOperator {
        grid: *grid,
        filter: *filter,
        kind: OperatorKind::Exact,
        quad_level: Some(quad_level),
        bands: sort_bands(bands.into_iter().flatten().collect()),
    })
}

/// Keeps band storage ordered by `(t, s)` so `entry` can binary-search.
fn sort_bands(mut bands: Vec<Band>) -> Vec<Band> {
    bands.sort_by_key(|b| (b.t, b.s));
    bands
}

/// All `(t, s)` offsets compatible with the latitude bound, in
/// deterministic order.
fn candidate_offsets(grid: &GridSpec, s_max: i64) -> Vec<(i64, i64)> {
    let n = grid.n() as i64;
    let t_lo = -(n - 1) / 2;
    let t_hi = n / 2;
    let mut out = Vec::new();
    for s in -s_max..=s_max {
        for t in t_lo..=t_hi {
            out.push((t, s));
        }
    }
    out
}

/// 1-based row indices for which the column `j - s` exists.
fn j_range(n: usize, s: i64) -> std::ops::RangeInclusive<usize> {
    let lo = 1.max(1 + s) as usize;
    let hi = n.min((n as i64 + s).max(0) as usize);
    lo..=hi
}

/// Midpoint quadrature of
/// `(1/sigma(S_1j)) int_{S_1j} int_{S_pq} f_w(r) dsigma(r) dsigma(w)`
/// with `p = 1 - t`, `q = j - s`, exploiting that the integrand depends on
/// longitudes only through `theta_w - theta_r`: the double theta sum
/// collapses onto the difference lattice with triangular weights.
fn exact_entry(grid: &GridSpec, filter: &FilterSpec, n_sub: usize, j: usize, t: i64, s: i64) -> f64 {
    let h = grid.h();
    let q = (j as i64 - s) as usize;
    let step_t = 2.0 * h / n_sub as f64;
    let step_p = h / n_sub as f64;
    let radius = filter.radius();
    let norm = filter.normalization();

    let phi0_w = -PI / 2.0 + (j - 1) as f64 * h;
    let phi0_r = -PI / 2.0 + (q - 1) as f64 * h;
    let mut sin_w = Vec::with_capacity(n_sub);
    let mut cos_w = Vec::with_capacity(n_sub);
    let mut sin_r = Vec::with_capacity(n_sub);
    let mut cos_r = Vec::with_capacity(n_sub);
    for k in 0..n_sub {
        let pw = phi0_w + (k as f64 + 0.5) * step_p;
        sin_w.push(pw.sin());
        cos_w.push(pw.cos());
        let pr = phi0_r + (k as f64 + 0.5) * step_p;
        sin_r.push(pr.sin());
        cos_r.push(pr.cos());
    }

    let mut acc = 0.0;
    let dtheta0 = 2.0 * t as f64 * h;
    for delta in -(n_sub as i64 - 1)..=(n_sub as i64 - 1) {
        let weight = (n_sub as i64 - delta.abs()) as f64;
        let cos_dt = (dtheta0 + delta as f64 * step_t).cos();
        let mut slab = 0.0;
        for k in 0..n_sub {
            let (sw, cw) = (sin_w[k], cos_w[k]);
            let mut inner = 0.0;
            for l in 0..n_sub {
                let c = (sw * sin_r[l] + cw * cos_r[l] * cos_dt).clamp(-1.0, 1.0);
                let d = c.acos();
                if d < radius {
                    inner += (radius - d) * cos_r[l];
                }
            }
            slab += inner * cw;
        }
        acc += weight * slab;
    }

    let sigma = grid.cell_area_unchecked(j);
    acc * step_t * step_t * step_p * step_p / ((4.0 * PI) * (4.0 * PI)) / (norm * sigma)
}

impl SiftOperator {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn filter(&self) -> &FilterSpec {
        &self.filter
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn quad_level(&self) -> Option<u32> {
        self.quad_level
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Dense entry `((i,j),(p,q))`, 1-based; zero off the stored bands.
    pub fn entry(&self, i: usize, j: usize, p: usize, q: usize) -> f64 {
        let n = self.grid.n() as i64;
        let t = canonical_t(i as i64 - p as i64, n) as i32;
        let s = (j as i64 - q as i64) as i32;
        match self.bands.binary_search_by_key(&(t, s), |b| (b.t, b.s)) {
            Ok(idx) => self.bands[idx].values[j - 1],
            Err(_) => 0.0,
        }
    }

    /// Row sums by latitude row `j` (rows with equal `j` share one sum).
    pub fn row_sums_by_latitude(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut sums = vec![0.0; n];
        for band in &self.bands {
            for (j0, v) in band.values.iter().enumerate() {
                sums[j0] += v;
            }
        }
        sums
    }

    /// Column sums by latitude row `q` of the column (columns with equal
    /// `q` share one sum). Unlike the row sums these are not close to 1:
    /// the cell areas vary across a filter support, so the operator is
    /// not doubly stochastic, and near the poles the column sums exceed 1
    /// by `O(1/m)`.
    pub fn column_sums_by_latitude(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut sums = vec![0.0; n];
        for band in &self.bands {
            let s = band.s as i64;
            for (q0, sum) in sums.iter_mut().enumerate() {
                let j0 = q0 as i64 + s;
                if (0..n as i64).contains(&j0) {
                    *sum += band.values[j0 as usize];
                }
            }
        }
        sums
    }

    /// Squared Frobenius norm; each stored `(t, s, j)` value occurs `N`
    /// times in the dense matrix.
    pub fn frobenius_sq(&self) -> f64 {
        let n = self.grid.n() as f64;
        let mut acc = 0.0;
        for band in &self.bands {
            for v in &band.values {
                acc += v * v;
            }
        }
        acc * n
    }

    /// Rescales every row to sum exactly 1. Off by default everywhere:
    /// the analysis concerns the raw quadrature operator.
    pub fn renormalize_rows(&mut self) {
        let sums = self.row_sums_by_latitude();
        for band in &mut self.bands {
            for (j0, v) in band.values.iter_mut().enumerate() {
                if sums[j0] != 0.0 {
                    *v /= sums[j0];
                }
            }
        }
    }

    fn check_signal(&self, g: &SphericalSignal) -> Result<()> {
        if g.grid().n() != self.grid.n() {
            return Err(SifError::GridMismatch {
                lhs: self.grid.n(),
                rhs: g.grid().n(),
            });
        }
        Ok(())
    }

    /// Moving average `B g`:
    /// `(Bg)[i,j] = sum_{t,s} band(t,s)[j] * g[(i-t) mod N, j-s]`.
    pub fn apply(&self, g: &SphericalSignal) -> Result<SphericalSignal> {
        self.check_signal(g)?;
        let n = self.grid.n();
        let gv = g.values().as_slice().expect("standard layout");
        let mut out = vec![0.0; n * n];
        par::for_each_chunk(&mut out, n, |i0, row| {
            for band in &self.bands {
                let p0 = (i0 as i64 - band.t as i64).rem_euclid(n as i64) as usize;
                let src = &gv[p0 * n..(p0 + 1) * n];
                let s = band.s as i64;
                let lo = 0.max(s) as usize;
                let hi = n.min((n as i64 + s) as usize);
                let vj = &band.values[lo..hi];
                let gq = &src[(lo as i64 - s) as usize..(hi as i64 - s) as usize];
                for ((o, v), x) in row[lo..hi].iter_mut().zip(vj).zip(gq) {
                    *o += v * x;
                }
            }
        });
        Ok(SphericalSignal::from_raw(
            self.grid,
            Array2::from_shape_vec((n, n), out).expect("shape"),
        ))
    }

    /// Transpose application `B^T g`, via band remapping:
    /// `(B^T g)[i,j] = sum_{t,s} band(t,s)[j+s] * g[(i+t) mod N, j+s]`.
    pub fn apply_transpose(&self, g: &SphericalSignal) -> Result<SphericalSignal> {
        self.check_signal(g)?;
        let n = self.grid.n();
        let gv = g.values().as_slice().expect("standard layout");
        let mut out = vec![0.0; n * n];
        par::for_each_chunk(&mut out, n, |i0, row| {
            for band in &self.bands {
                let p0 = (i0 as i64 + band.t as i64).rem_euclid(n as i64) as usize;
                let src = &gv[p0 * n..(p0 + 1) * n];
                let s = band.s as i64;
                // output j such that j + s lands in range
                let lo = 0.max(-s) as usize;
                let hi = n.min((n as i64 - s) as usize);
                let vj = &band.values[(lo as i64 + s) as usize..(hi as i64 + s) as usize];
                let gq = &src[(lo as i64 + s) as usize..(hi as i64 + s) as usize];
                for ((o, v), x) in row[lo..hi].iter_mut().zip(vj).zip(gq) {
                    *o += v * x;
                }
            }
        });
        Ok(SphericalSignal::from_raw(
            self.grid,
            Array2::from_shape_vec((n, n), out).expect("shape"),
        ))
    }

    /// One sifting step `(I - B) g`.
    pub fn sift(&self, g: &SphericalSignal) -> Result<SphericalSignal> {
        g.sub(&self.apply(g)?)
    }

    /// One stabilized sifting step `(I - B^T B) g`.
    pub fn sift_stabilized(&self, g: &SphericalSignal) -> Result<SphericalSignal> {
        g.sub(&self.apply_transpose(&self.apply(g)?)?)
    }

    /// Materializes the dense `N^2 x N^2` matrix, multi-index
    /// `(i-1)*N + (j-1)`. Only for small grids; `cap` bounds `N`.
    pub fn to_dense(&self, cap: usize) -> Result<Array2<f64>> {
        let n = self.grid.n();
        if n > cap {
            return Err(SifError::ResourceLimit(format!(
                "dense materialization capped at N={cap}, got N={n}"
            )));
        }
        let mut a = Array2::zeros((n * n, n * n));
        for band in &self.bands {
            let s = band.s as i64;
            for j in j_range(n, s) {
                let v = band.values[j - 1];
                if v == 0.0 {
                    continue;
                }
                let q = (j as i64 - s) as usize;
                for i in 1..=n {
                    let p = ((i as i64 - 1 - band.t as i64).rem_euclid(n as i64)) as usize + 1;
                    a[[(i - 1) * n + (j - 1), (p - 1) * n + (q - 1)]] = v;
                }
            }
        }
        Ok(a)
    }

    /// Writes the operator container: header, band records, checksum.
    pub fn serialize(&self, path: &Path) -> Result<()> {
        let mut payload = Vec::new();
        payload.extend_from_slice(MAGIC);
        payload.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        payload.extend_from_slice(&(self.grid.n() as u64).to_le_bytes());
        payload.extend_from_slice(&self.filter.radius().to_le_bytes());
        match self.filter.pinned_cells() {
            Some(m) => {
                payload.push(1);
                payload.extend_from_slice(&m.to_le_bytes());
            }
            None => {
                payload.push(0);
                payload.extend_from_slice(&0.0f64.to_le_bytes());
            }
        }
        payload.push(match self.kind {
            OperatorKind::Exact => 0,
            OperatorKind::Approx => 1,
        });
        payload.extend_from_slice(&self.quad_level.unwrap_or(0).to_le_bytes());
        payload.extend_from_slice(&(self.bands.len() as u64).to_le_bytes());
        for band in &self.bands {
            payload.extend_from_slice(&band.t.to_le_bytes());
            payload.extend_from_slice(&band.s.to_le_bytes());
            for v in &band.values {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        let sum = fnv1a(&payload);
        let mut file = std::fs::File::create(path)?;
        file.write_all(&payload)?;
        file.write_all(&sum.to_le_bytes())?;
        Ok(())
    }

    /// Reads an operator container, verifying magic, version and checksum.
    pub fn deserialize(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < MAGIC.len() + 4 {
            return Err(SifError::Truncated);
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(SifError::BadMagic);
        }
        let mut cur = Cursor::new(&bytes[MAGIC.len()..]);
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(SifError::UnsupportedVersion(version));
        }
        if bytes.len() < 8 {
            return Err(SifError::Truncated);
        }
        let (payload, tail) = bytes.split_at(bytes.len() - 8);
        let expected = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
        if fnv1a(payload) != expected {
            return Err(SifError::ChecksumMismatch);
        }

        let n = cur.u64()? as usize;
        let radius = cur.f64()?;
        let pinned = cur.u8()? == 1;
        let m = cur.f64()?;
        let kind = match cur.u8()? {
            0 => OperatorKind::Exact,
            1 => OperatorKind::Approx,
            k => return Err(SifError::Parse(format!("unknown operator kind {k}"))),
        };
        let quad = cur.u32()?;
        let band_count = cur.u64()? as usize;

        let grid = GridSpec::new(n)?;
        let filter = if pinned {
            FilterSpec::pinned(m, &grid)?
        } else {
            FilterSpec::from_radius(radius)?
        };
        let mut bands = Vec::with_capacity(band_count.min(1 << 20));
        for _ in 0..band_count {
            let t = cur.i32()?;
            let s = cur.i32()?;
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                values.push(cur.f64()?);
            }
            bands.push(Band { t, s, values });
        }
        // trailing 8 bytes are the checksum we already consumed
        if cur.remaining() != 8 {
            return Err(SifError::Truncated);
        }
        Ok(Self {
            grid,
            filter,
            kind,
            quad_level: (quad != 0).then_some(quad),
            bands,
        })
    }
}

const MAGIC: &[u8; 8] = b"SIFOPBND";
const FORMAT_VERSION: u32 = 1;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(SifError::Truncated);
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
