//! (R; eta)-regularity checking, slope estimation, shift-average statistics
//! over the tile grid, tile entrance-regularity events, and local-pattern
//! frequency estimation.

use crate::lattice::{BoundaryData, Ensemble, LatticeError, Rect};
use crate::weights::SlopePair;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("index {0} outside [1, {1}]")]
    IndexOutOfRange(u64, u64),
    #[error("pattern window around tile point ({0}, {1}) leaves the domain")]
    PatternWindowOutOfDomain(i64, i64),
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Parameters of the regularity definition: every subinterval of length at
/// most `r` must hold occupation within `eta * r` of `rho` times its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityParams {
    pub r: u64,
    pub eta: f64,
    pub rho: f64,
}

/// First interval violating a regularity scan: start coordinate and length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalWitness {
    pub start: i64,
    pub len: i64,
}

/// Exhaustive scan over all subintervals of `j = [lo, hi]` with length at
/// most `floor(r)`, via prefix sums. `occupied` holds the sorted coordinates
/// of occupied sites inside `j`.
pub fn regular_interval_scan(
    occupied: &[i64],
    j: (i64, i64),
    r: f64,
    eta: f64,
    rho: f64,
) -> Option<IntervalWitness> {
    let (lo, hi) = j;
    debug_assert!(lo <= hi);
    let n = (hi - lo + 1) as usize;
    let mut prefix = vec![0u32; n + 1];
    let mut it = occupied.iter().peekable();
    for idx in 1..=n {
        let x = lo + idx as i64 - 1;
        let mut count = prefix[idx - 1];
        while let Some(&&o) = it.peek() {
            if o == x {
                count += 1;
                it.next();
            } else if o < x {
                it.next(); // outside j; ignore
            } else {
                break;
            }
        }
        prefix[idx] = count;
    }
    let max_len = (r.floor() as i64).min(n as i64);
    let bound = eta * r;
    for len in 1..=max_len {
        for start in 0..=(n as i64 - len) {
            let c = prefix[(start + len) as usize] - prefix[start as usize];
            if (c as f64 - rho * len as f64).abs() > bound {
                return Some(IntervalWitness { start: lo + start, len });
            }
        }
    }
    None
}

/// `(R; eta)`-regularity with slope `rho` on the interval `j`.
pub fn is_regular_interval(
    occupied: &[i64],
    j: (i64, i64),
    p: &RegularityParams,
) -> (bool, Option<IntervalWitness>) {
    let w = regular_interval_scan(occupied, j, p.r as f64, p.eta, p.rho);
    (w.is_none(), w)
}

/// Which boundary of the rectangle a regularity witness was found on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    South,
    West,
    North,
    East,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectWitness {
    pub side: Side,
    pub interval: IntervalWitness,
}

/// Checks boundary data for `(R; eta)`-regularity with slope `(s, t)`:
/// slope `s` on the north and south boundaries, slope `t` on the west and
/// east boundaries.
pub fn is_regular_rect(
    bd: &BoundaryData,
    domain: Rect,
    r: f64,
    eta: f64,
    st: &SlopePair<f64>,
) -> (bool, Option<RectWitness>) {
    let collect = |pred: &dyn Fn(&(i64, i64)) -> Option<i64>, from: &[(i64, i64)]| {
        let mut v: Vec<i64> = from.iter().filter_map(pred).collect();
        v.sort_unstable();
        v
    };
    let south = collect(&|&(x, y)| (y == domain.y_min - 1).then_some(x), &bd.entrance);
    let west = collect(&|&(x, y)| (x == domain.x_min - 1).then_some(y), &bd.entrance);
    let north = collect(&|&(x, y)| (y == domain.y_max + 1).then_some(x), &bd.exit);
    let east = collect(&|&(x, y)| (x == domain.x_max + 1).then_some(y), &bd.exit);
    let xs = (domain.x_min, domain.x_max);
    let ys = (domain.y_min, domain.y_max);
    let checks = [
        (Side::South, south, xs, st.s),
        (Side::North, north, xs, st.s),
        (Side::West, west, ys, st.t),
        (Side::East, east, ys, st.t),
    ];
    for (side, occ, j, rho) in checks {
        if let Some(interval) = regular_interval_scan(&occ, j, r, eta, rho) {
            return (false, Some(RectWitness { side, interval }));
        }
    }
    (true, None)
}

/// Outcome of the covering bound implied by regularity: on intervals of
/// length at least `R`, the deviation stays below `2 eta |I|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoEtaOutcome {
    Holds,
    /// The data was not `(R; eta)`-regular to begin with; nothing to check.
    PreconditionFailed(IntervalWitness),
    /// Regular data violating the covering bound; must never occur.
    Counterexample(IntervalWitness),
}

pub fn two_eta_bound_check(occupied: &[i64], j: (i64, i64), p: &RegularityParams) -> TwoEtaOutcome {
    if let Some(w) = regular_interval_scan(occupied, j, p.r as f64, p.eta, p.rho) {
        return TwoEtaOutcome::PreconditionFailed(w);
    }
    let (lo, hi) = j;
    let n = hi - lo + 1;
    for len in (p.r as i64).max(1)..=n {
        for start in lo..=(hi - len + 1) {
            let c = occupied.iter().filter(|&&x| x >= start && x < start + len).count();
            if (c as f64 - p.rho * len as f64).abs() >= 2.0 * p.eta * len as f64 {
                return TwoEtaOutcome::Counterexample(IntervalWitness { start, len });
            }
        }
    }
    TwoEtaOutcome::Holds
}

/// Empirical slope: mean vertical and horizontal exit indicators over a
/// window of the ensemble.
pub fn slope_estimate(e: &Ensemble, window: Rect) -> Result<SlopePair<f64>, StatsError> {
    if !e.domain().contains_rect(&window) {
        return Err(StatsError::Lattice(LatticeError::OutOfDomain(window.x_min, window.y_min)));
    }
    let mut v = 0u64;
    let mut h = 0u64;
    for (x, y) in window.vertices() {
        let c = e.get(x, y);
        v += c.i2() as u64;
        h += c.j2() as u64;
    }
    let area = window.area() as f64;
    Ok(SlopePair { s: v as f64 / area, t: h as f64 / area })
}

/// The K x K tiling of `[1, KM]^2` into M x M tiles, with the marked point
/// `z_i = (rM + X, jM + Y)` in tile `i = jK + r + 1` and `X = ceil(M/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub k: u64,
    pub m: u64,
    pub y: i64,
    pub pattern_radius: u64,
}

impl GridSpec {
    pub fn new(k: u64, m: u64, y: i64, pattern_radius: u64) -> Result<Self, StatsError> {
        if k == 0 || m == 0 {
            return Err(StatsError::InvalidParameter("K and M must be positive"));
        }
        if y < 0 || y > m as i64 {
            return Err(StatsError::InvalidParameter("Y must lie in [0, M]"));
        }
        Ok(GridSpec { k, m, y, pattern_radius })
    }

    pub fn x(&self) -> i64 {
        (self.m as i64 + 1) / 2 // ceil(M / 2)
    }

    pub fn n(&self) -> i64 {
        (self.k * self.m) as i64
    }

    pub fn tiles(&self) -> u64 {
        self.k * self.k
    }

    /// Tile rectangle for index `i` in `[1, K^2]`.
    pub fn omega(&self, i: u64) -> Result<Rect, StatsError> {
        let (r, j) = self.tile_coords(i)?;
        let m = self.m as i64;
        Ok(Rect::new(r * m + 1, r * m + m, j * m + 1, j * m + m))
    }

    /// Marked point `z_i` of tile `i`.
    pub fn z(&self, i: u64) -> Result<(i64, i64), StatsError> {
        let (r, j) = self.tile_coords(i)?;
        let m = self.m as i64;
        Ok((r * m + self.x(), j * m + self.y))
    }

    fn tile_coords(&self, i: u64) -> Result<(i64, i64), StatsError> {
        if i < 1 || i > self.tiles() {
            return Err(StatsError::IndexOutOfRange(i, self.tiles()));
        }
        let zero = i - 1;
        Ok(((zero % self.k) as i64, (zero / self.k) as i64))
    }
}

/// Per-tile indicator that the pattern appears translated around `z_i`.
pub fn psi_values(e: &Ensemble, pattern: &Ensemble, g: &GridSpec) -> Result<Vec<bool>, StatsError> {
    let d = e.domain();
    if d != Rect::of_size(g.n(), g.n()) {
        return Err(StatsError::InvalidParameter("ensemble domain must be [1, KM]^2"));
    }
    let k = g.pattern_radius as i64;
    let pd = pattern.domain();
    if pd != Rect::new(-k, k, -k, k) {
        return Err(StatsError::InvalidParameter("pattern domain must be [-k, k]^2"));
    }
    let mut out = Vec::with_capacity(g.tiles() as usize);
    for i in 1..=g.tiles() {
        let (zx, zy) = g.z(i)?;
        if zx - k < 1 || zx + k > g.n() || zy - k < 1 || zy + k > g.n() {
            return Err(StatsError::PatternWindowOutOfDomain(zx, zy));
        }
        let mut hit = true;
        'window: for dy in -k..=k {
            for dx in -k..=k {
                if e.get(zx + dx, zy + dy) != pattern.get(dx, dy) {
                    hit = false;
                    break 'window;
                }
            }
        }
        out.push(hit);
    }
    Ok(out)
}

/// `(1/K^2) sum_i psi_i`: the shift-average of the pattern indicator.
pub fn shift_average(e: &Ensemble, pattern: &Ensemble, g: &GridSpec) -> Result<f64, StatsError> {
    let psis = psi_values(e, pattern, g)?;
    let hits = psis.iter().filter(|&&b| b).count();
    Ok(hits as f64 / psis.len() as f64)
}

/// Whether the entrance data on the south boundary of tile `i` is
/// `(eta M; eta)`-regular with slope `s`.
pub fn theta_event(
    e: &Ensemble,
    i: u64,
    g: &GridSpec,
    eta: f64,
    s: f64,
) -> Result<bool, StatsError> {
    let d = e.domain();
    if d != Rect::of_size(g.n(), g.n()) {
        return Err(StatsError::InvalidParameter("ensemble domain must be [1, KM]^2"));
    }
    let tile = g.omega(i)?;
    let occupied: Vec<i64> = (tile.x_min..=tile.x_max)
        .filter(|&x| e.get(x, tile.y_min).i1() == 1)
        .collect();
    let w = regular_interval_scan(&occupied, (tile.x_min, tile.x_max), eta * g.m as f64, eta, s);
    Ok(w.is_none())
}

/// Empirical frequency of a centered pattern at a fixed vertex over a sample
/// stream, with the binomial standard error.
pub fn local_pattern_probability<'a>(
    samples: impl IntoIterator<Item = &'a Ensemble>,
    pattern: &Ensemble,
    at: (i64, i64),
) -> Result<(f64, f64), StatsError> {
    let pd = pattern.domain();
    let mut n = 0usize;
    let mut hits = 0usize;
    for e in samples {
        let mut hit = true;
        'window: for dy in pd.y_min..=pd.y_max {
            for dx in pd.x_min..=pd.x_max {
                let (x, y) = (at.0 + dx, at.1 + dy);
                if !e.domain().contains(x, y) {
                    return Err(StatsError::Lattice(LatticeError::OutOfDomain(x, y)));
                }
                if e.get(x, y) != pattern.get(dx, dy) {
                    hit = false;
                    break 'window;
                }
            }
        }
        n += 1;
        hits += hit as usize;
    }
    if n < 2 {
        return Err(StatsError::InsufficientSamples(n));
    }
    let p = hits as f64 / n as f64;
    let stderr = (p * (1.0 - p) / n as f64).sqrt();
    Ok((p, stderr))
}
