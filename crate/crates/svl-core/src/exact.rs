//! Exhaustive enumeration and transfer-matrix computation of partition
//! functions and Gibbs conditionals on small rectangles; the brute-force
//! oracle for every probabilistic claim in the toolkit.

use crate::lattice::{ArrowConfig, BoundaryData, Ensemble, LatticeError, Rect};
use crate::scalar::Scalar;
use crate::weights::{StochasticParams, WeightSystem};
use num::bigint::BigUint;
use num::ToPrimitive;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("domain of {0} vertices exceeds the enumeration cap {1}")]
    DomainTooLarge(usize, usize),
    #[error("domain width {0} exceeds the transfer cap {1}")]
    WidthTooLarge(i64, i64),
    #[error("inconsistent boundary: {0}")]
    InconsistentBoundary(String),
    #[error("empty ensemble class (Z = 0)")]
    EmptyEnsembleClass,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Resource limits for the exact backends; values, not constants.
#[derive(Debug, Clone, Copy)]
pub struct Caps {
    pub max_enum_vertices: usize,
    pub max_transfer_width: i64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_enum_vertices: 36, max_transfer_width: 24 }
    }
}

/// Entrance data as sorted coordinate lists per side: x positions of south
/// entrances, y positions of west entrances.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Entrance {
    pub south: Vec<i64>,
    pub west: Vec<i64>,
}

/// Exit data as sorted coordinate lists per side. A missing exit altogether
/// (`Option<ExitData>` being `None`) means free exit, which is different from
/// an empty exit list (no path may leave).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExitData {
    pub north: Vec<i64>,
    pub east: Vec<i64>,
}

fn check_sorted_in(xs: &[i64], lo: i64, hi: i64, what: &str) -> Result<(), ExactError> {
    for w in xs.windows(2) {
        if w[0] >= w[1] {
            return Err(ExactError::InconsistentBoundary(format!(
                "{what} coordinates must be strictly increasing"
            )));
        }
    }
    if xs.iter().any(|&v| v < lo || v > hi) {
        return Err(ExactError::InconsistentBoundary(format!("{what} coordinate out of range")));
    }
    Ok(())
}

impl Entrance {
    pub fn validate(&self, domain: Rect) -> Result<(), ExactError> {
        check_sorted_in(&self.south, domain.x_min, domain.x_max, "south entrance")?;
        check_sorted_in(&self.west, domain.y_min, domain.y_max, "west entrance")
    }

    pub fn count(&self) -> usize {
        self.south.len() + self.west.len()
    }

    /// Boundary vertices `(x, y_min - 1)` and `(x_min - 1, y)`.
    pub fn vertices(&self, domain: Rect) -> Vec<(i64, i64)> {
        let mut v: Vec<(i64, i64)> =
            self.south.iter().map(|&x| (x, domain.y_min - 1)).collect();
        v.extend(self.west.iter().map(|&y| (domain.x_min - 1, y)));
        v
    }

    /// Path index of each entrance under the convention: south entrances get
    /// `-B..=0` (eastmost lowest, westmost zero), west entrances `1..=A`
    /// (bottom first).
    pub fn indexed(&self) -> Vec<(i64, EntranceSite)> {
        let mut out = Vec::with_capacity(self.count());
        for (k, &x) in self.south.iter().enumerate() {
            out.push((-(k as i64), EntranceSite::South(x)));
        }
        for (k, &y) in self.west.iter().enumerate() {
            out.push((k as i64 + 1, EntranceSite::West(y)));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntranceSite {
    South(i64),
    West(i64),
}

impl ExitData {
    pub fn validate(&self, domain: Rect) -> Result<(), ExactError> {
        check_sorted_in(&self.north, domain.x_min, domain.x_max, "north exit")?;
        check_sorted_in(&self.east, domain.y_min, domain.y_max, "east exit")
    }

    pub fn count(&self) -> usize {
        self.north.len() + self.east.len()
    }

    pub fn vertices(&self, domain: Rect) -> Vec<(i64, i64)> {
        let mut v: Vec<(i64, i64)> =
            self.north.iter().map(|&x| (x, domain.y_max + 1)).collect();
        v.extend(self.east.iter().map(|&y| (domain.x_max + 1, y)));
        v
    }
}

/// Splits full boundary data into per-side coordinate lists.
pub fn split_boundary(domain: Rect, bd: &BoundaryData) -> Result<(Entrance, ExitData), ExactError> {
    let mut entrance = Entrance::default();
    let mut exit = ExitData::default();
    for &(x, y) in &bd.entrance {
        if y == domain.y_min - 1 {
            entrance.south.push(x);
        } else if x == domain.x_min - 1 {
            entrance.west.push(y);
        } else {
            return Err(ExactError::InconsistentBoundary(format!(
                "entrance ({x}, {y}) not on the south or west boundary"
            )));
        }
    }
    for &(x, y) in &bd.exit {
        if y == domain.y_max + 1 {
            exit.north.push(x);
        } else if x == domain.x_max + 1 {
            exit.east.push(y);
        } else {
            return Err(ExactError::InconsistentBoundary(format!(
                "exit ({x}, {y}) not on the north or east boundary"
            )));
        }
    }
    entrance.south.sort_unstable();
    entrance.west.sort_unstable();
    exit.north.sort_unstable();
    exit.east.sort_unstable();
    entrance.validate(domain)?;
    exit.validate(domain)?;
    Ok((entrance, exit))
}

/// Exact weight of an ensemble as a product over configuration types.
pub fn ensemble_weight<T: Scalar>(e: &Ensemble, w: &WeightSystem<T>) -> Result<T, ExactError> {
    let counts = e.type_counts()?;
    let mut acc = T::one();
    for (code, &n) in counts.iter().enumerate() {
        if n > 0 {
            acc = acc * num::pow::pow(w.by_code(code as u8), n as usize);
        }
    }
    Ok(acc)
}

struct Dfs<'a, T, F> {
    order: &'a [(i64, i64)],
    domain: Rect,
    w: &'a WeightSystem<T>,
    south: &'a [i64],
    west: &'a [i64],
    exit: Option<&'a ExitData>,
    visit: F,
}

impl<T: Scalar, F: FnMut(&Ensemble, &T)> Dfs<'_, T, F> {
    fn run(&mut self, e: &mut Ensemble, pos: usize, acc: T) {
        if pos == self.order.len() {
            (self.visit)(e, &acc);
            return;
        }
        let (x, y) = self.order[pos];
        let d = self.domain;
        let i1 = if y == d.y_min {
            self.south.binary_search(&x).is_ok()
        } else {
            e.get(x, y - 1).i2() == 1
        };
        let j1 = if x == d.x_min {
            self.west.binary_search(&y).is_ok()
        } else {
            e.get(x - 1, y).j2() == 1
        };
        let completions: &[(bool, bool)] = match (i1, j1) {
            (false, false) => &[(false, false)],
            (true, true) => &[(true, true)],
            (true, false) => &[(true, false), (false, true)],
            (false, true) => &[(false, true), (true, false)],
        };
        for &(i2, j2) in completions {
            if let Some(exit) = self.exit {
                if y == d.y_max && exit.north.binary_search(&x).is_ok() != i2 {
                    continue;
                }
                if x == d.x_max && exit.east.binary_search(&y).is_ok() != j2 {
                    continue;
                }
            }
            let cfg = ArrowConfig::from_bits(i1, j1, i2, j2);
            e.set(x, y, cfg);
            let step = acc.clone() * self.w.by_code(cfg.code().unwrap());
            self.run(e, pos + 1, step);
        }
    }
}

/// Depth-first completion of half-configurations in diagonal order, visiting
/// every ensemble in the boundary class together with its weight.
pub fn for_each_weighted<T: Scalar>(
    domain: Rect,
    w: &WeightSystem<T>,
    entrance: &Entrance,
    exit: Option<&ExitData>,
    caps: &Caps,
    visit: impl FnMut(&Ensemble, &T),
) -> Result<(), ExactError> {
    if domain.area() > caps.max_enum_vertices {
        return Err(ExactError::DomainTooLarge(domain.area(), caps.max_enum_vertices));
    }
    entrance.validate(domain)?;
    if let Some(x) = exit {
        x.validate(domain)?;
        if x.count() != entrance.count() {
            return Err(ExactError::InconsistentBoundary(format!(
                "{} entrances but {} exits",
                entrance.count(),
                x.count()
            )));
        }
    }
    let mut order: Vec<(i64, i64)> = domain.vertices().collect();
    order.sort_by_key(|&(x, y)| (x + y, x));
    let mut grid = Ensemble::empty(domain);
    let mut dfs = Dfs { order: &order, domain, w, south: &entrance.south, west: &entrance.west, exit, visit };
    dfs.run(&mut grid, 0, T::one());
    Ok(())
}

/// Collects the ensemble class `E_u(domain)` or `E_{u,v}(domain)`.
pub fn enumerate(
    domain: Rect,
    entrance: &Entrance,
    exit: Option<&ExitData>,
    caps: &Caps,
) -> Result<Vec<Ensemble>, ExactError> {
    let ones = WeightSystem::<f64>::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let mut out = Vec::new();
    for_each_weighted(domain, &ones, entrance, exit, caps, |e, _| out.push(e.clone()))?;
    Ok(out)
}

/// Partition function by full enumeration: `(Z, class size)`.
pub fn z_enumerate<T: Scalar>(
    domain: Rect,
    w: &WeightSystem<T>,
    entrance: &Entrance,
    exit: Option<&ExitData>,
    caps: &Caps,
) -> Result<(T, u128), ExactError> {
    let mut z = T::zero();
    let mut count = 0u128;
    for_each_weighted(domain, w, entrance, exit, caps, |_, acc| {
        z = z.clone() + acc.clone();
        count += 1;
    })?;
    Ok((z, count))
}

/// Partition function by sparse row-to-row transfer: states are vertical edge
/// occupancies between rows, with west/east horizontal boundary edges fixed
/// per row. Bit-identical ensemble class to `z_enumerate`.
pub fn z_transfer<T: Scalar>(
    domain: Rect,
    w: &WeightSystem<T>,
    entrance: &Entrance,
    exit: Option<&ExitData>,
    caps: &Caps,
) -> Result<(T, u128), ExactError> {
    if domain.width() > caps.max_transfer_width {
        return Err(ExactError::WidthTooLarge(domain.width(), caps.max_transfer_width));
    }
    entrance.validate(domain)?;
    if let Some(x) = exit {
        x.validate(domain)?;
        if x.count() != entrance.count() {
            return Err(ExactError::InconsistentBoundary(format!(
                "{} entrances but {} exits",
                entrance.count(),
                x.count()
            )));
        }
    }
    let width = domain.width() as usize;
    let bit = |x: i64| 1u32 << (x - domain.x_min) as u32;

    let mut start = 0u32;
    for &x in &entrance.south {
        start |= bit(x);
    }
    let mut amps: HashMap<u32, (T, BigUint)> = HashMap::new();
    amps.insert(start, (T::one(), BigUint::from(1u8)));

    for y in domain.y_min..=domain.y_max {
        let west_in = entrance.west.binary_search(&y).is_ok();
        let east_out = exit.map(|e| e.east.binary_search(&y).is_ok());
        let mut next: HashMap<u32, (T, BigUint)> = HashMap::new();
        for (state, (amp, cnt)) in &amps {
            // stack of (column index, partial out-state, horizontal carry, weight)
            let mut stack = vec![(0usize, 0u32, west_in, T::one())];
            while let Some((col, out_state, j1, wacc)) = stack.pop() {
                if col == width {
                    if east_out.map_or(true, |req| req == j1) {
                        let entry = next
                            .entry(out_state)
                            .or_insert_with(|| (T::zero(), BigUint::from(0u8)));
                        entry.0 = entry.0.clone() + amp.clone() * wacc;
                        entry.1 += cnt;
                    }
                    continue;
                }
                let i1 = state >> col & 1 == 1;
                let completions: &[(bool, bool)] = match (i1, j1) {
                    (false, false) => &[(false, false)],
                    (true, true) => &[(true, true)],
                    (true, false) => &[(true, false), (false, true)],
                    (false, true) => &[(false, true), (true, false)],
                };
                for &(i2, j2) in completions {
                    let code = ArrowConfig::from_bits(i1, j1, i2, j2).code().unwrap();
                    let mut s = out_state;
                    if i2 {
                        s |= 1 << col;
                    }
                    stack.push((col + 1, s, j2, wacc.clone() * w.by_code(code)));
                }
            }
        }
        amps = next;
    }

    let mut z = T::zero();
    let mut count = BigUint::from(0u8);
    if let Some(exit) = exit {
        let mut target = 0u32;
        for &x in &exit.north {
            target |= bit(x);
        }
        if let Some((amp, cnt)) = amps.get(&target) {
            z = amp.clone();
            count = cnt.clone();
        }
    } else {
        for (amp, cnt) in amps.values() {
            z = z + amp.clone();
            count += cnt;
        }
    }
    Ok((z, count.to_u128().unwrap_or(u128::MAX)))
}

/// A finite distribution over an ensemble class.
#[derive(Debug, Clone)]
pub struct Distribution<T> {
    pub items: Vec<(Ensemble, T)>,
    pub z: T,
}

impl<T: Scalar> Distribution<T> {
    pub fn probability_of(&self, e: &Ensemble) -> T {
        self.items
            .iter()
            .find(|(f, _)| f == e)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(T::zero)
    }
}

impl Distribution<f64> {
    /// Total-variation distance to another distribution over the same class.
    pub fn tv_distance(&self, other: &Distribution<f64>) -> f64 {
        let mut lookup: HashMap<String, f64> = HashMap::new();
        for (e, p) in &other.items {
            lookup.insert(e.to_text().unwrap(), *p);
        }
        let mut tv = 0.0;
        let mut seen = 0usize;
        for (e, p) in &self.items {
            let q = lookup.get(&e.to_text().unwrap()).copied().unwrap_or(0.0);
            if lookup.contains_key(&e.to_text().unwrap()) {
                seen += 1;
            }
            tv += (p - q).abs();
        }
        // mass present only in `other`
        if seen < other.items.len() {
            for (e, q) in &other.items {
                if !self.items.iter().any(|(f, _)| f == e) {
                    tv += q;
                }
            }
        }
        tv / 2.0
    }
}

/// The Gibbs conditional on a fully specified boundary class: each ensemble
/// has probability `w(E) / Z`.
pub fn gibbs_conditional<T: Scalar>(
    domain: Rect,
    w: &WeightSystem<T>,
    boundary: &BoundaryData,
    caps: &Caps,
) -> Result<Distribution<T>, ExactError> {
    let (entrance, exit) = split_boundary(domain, boundary)?;
    let mut items: Vec<(Ensemble, T)> = Vec::new();
    let mut z = T::zero();
    for_each_weighted(domain, w, &entrance, Some(&exit), caps, |e, acc| {
        z = z.clone() + acc.clone();
        items.push((e.clone(), acc.clone()));
    })?;
    if items.is_empty() || z == T::zero() {
        return Err(ExactError::EmptyEnsembleClass);
    }
    for (_, p) in &mut items {
        *p = p.clone() / z.clone();
    }
    Ok(Distribution { items, z })
}

/// Probability of a predicate under the free-exit stochastic model, by exact
/// enumeration: the sum of stochastic weights of satisfying ensembles.
pub fn exact_event_probability<T: Scalar>(
    domain: Rect,
    params: &StochasticParams<T>,
    entrance: &Entrance,
    caps: &Caps,
    mut event: impl FnMut(&Ensemble) -> bool,
) -> Result<T, ExactError> {
    let w = WeightSystem::stochastic(params);
    let mut p = T::zero();
    for_each_weighted(domain, &w, entrance, None, caps, |e, acc| {
        if event(e) {
            p = p.clone() + acc.clone();
        }
    })?;
    Ok(p)
}

/// Exact law of the free-exit stochastic model with the given entrance data.
pub fn free_exit_distribution<T: Scalar>(
    domain: Rect,
    params: &StochasticParams<T>,
    entrance: &Entrance,
    caps: &Caps,
) -> Result<Distribution<T>, ExactError> {
    let w = WeightSystem::stochastic(params);
    let mut items = Vec::new();
    let mut z = T::zero();
    for_each_weighted(domain, &w, entrance, None, caps, |e, acc| {
        z = z.clone() + acc.clone();
        items.push((e.clone(), acc.clone()));
    })?;
    for (_, p) in &mut items {
        *p = p.clone() / z.clone();
    }
    Ok(Distribution { items, z })
}

/// `E_{u,v}` is nonempty on a rectangle iff `v_i >= u_i` componentwise for
/// every matched index; the existence criterion for monotone fillings.
pub fn monotone_criterion(bd: &BoundaryData) -> bool {
    bd.indices().all(|i| {
        let (ux, uy) = bd.entrance_at(i);
        let (vx, vy) = bd.exit_at(i);
        vx >= ux && vy >= uy
    })
}
