//! Arrow-configuration ensembles on rectangular domains, their non-crossing
//! path representation, boundary data extraction, symmetry maps, weight
//! evaluation and the `6VE v1` text format.

use crate::scalar::Real;
use crate::weights::WeightSystem;
use std::collections::HashSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("vertex ({0}, {1}) outside the domain")]
    OutOfDomain(i64, i64),
    #[error("ensemble is inconsistent: {0} violation(s), first at ({1}, {2})")]
    InconsistentEnsemble(usize, i64, i64),
    #[error("paths cross or share an edge near ({0}, {1})")]
    CrossingPaths(i64, i64),
    #[error("path step from ({0}, {1}) to ({2}, {3}) is not an up or right unit step")]
    BadPathStep(i64, i64, i64, i64),
    #[error("malformed ensemble file: {0}")]
    BadFormat(String),
    #[error("ensemble contains a non-serializable configuration at ({0}, {1})")]
    BadConfig(i64, i64),
}

/// Inclusive rectangle of lattice vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Rect {
    pub fn new(x_min: i64, x_max: i64, y_min: i64, y_max: i64) -> Self {
        assert!(x_min <= x_max && y_min <= y_max, "empty rectangle");
        Rect { x_min, x_max, y_min, y_max }
    }

    /// `[1, w] x [1, h]`.
    pub fn of_size(w: i64, h: i64) -> Self {
        Rect::new(1, w, 1, h)
    }

    pub fn width(&self) -> i64 {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> i64 {
        self.y_max - self.y_min + 1
    }

    pub fn area(&self) -> usize {
        (self.width() * self.height()) as usize
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        o.x_min >= self.x_min && o.x_max <= self.x_max && o.y_min >= self.y_min && o.y_max <= self.y_max
    }

    fn index(&self, x: i64, y: i64) -> usize {
        debug_assert!(self.contains(x, y));
        ((y - self.y_min) * self.width() + (x - self.x_min)) as usize
    }

    pub fn vertices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let r = *self;
        (r.y_min..=r.y_max).flat_map(move |y| (r.x_min..=r.x_max).map(move |x| (x, y)))
    }
}

/// One vertex's arrow quadruple `(i1, j1; i2, j2)` packed into the low nibble.
///
/// Any of the 16 bit patterns is representable so that `validate` can report
/// conservation violations; only the six conserving patterns are weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ArrowConfig(pub u8);

impl ArrowConfig {
    pub fn from_bits(i1: bool, j1: bool, i2: bool, j2: bool) -> Self {
        ArrowConfig(i1 as u8 | (j1 as u8) << 1 | (i2 as u8) << 2 | (j2 as u8) << 3)
    }

    pub fn i1(self) -> u8 {
        self.0 & 1
    }
    pub fn j1(self) -> u8 {
        (self.0 >> 1) & 1
    }
    pub fn i2(self) -> u8 {
        (self.0 >> 2) & 1
    }
    pub fn j2(self) -> u8 {
        (self.0 >> 3) & 1
    }

    pub fn conserves(self) -> bool {
        self.i1() + self.j1() == self.i2() + self.j2()
    }

    /// Code 0..5 for the a1, a2, b1, b2, c1, c2 configuration types.
    pub fn code(self) -> Option<u8> {
        match (self.i1(), self.j1(), self.i2(), self.j2()) {
            (0, 0, 0, 0) => Some(0),
            (1, 1, 1, 1) => Some(1),
            (1, 0, 1, 0) => Some(2),
            (0, 1, 0, 1) => Some(3),
            (1, 0, 0, 1) => Some(4),
            (0, 1, 1, 0) => Some(5),
            _ => None,
        }
    }

    pub fn from_code(code: u8) -> Self {
        match code {
            0 => ArrowConfig::from_bits(false, false, false, false),
            1 => ArrowConfig::from_bits(true, true, true, true),
            2 => ArrowConfig::from_bits(true, false, true, false),
            3 => ArrowConfig::from_bits(false, true, false, true),
            4 => ArrowConfig::from_bits(true, false, false, true),
            5 => ArrowConfig::from_bits(false, true, true, false),
            _ => panic!("configuration code out of range: {code}"),
        }
    }
}

/// A six-vertex ensemble: a dense grid of arrow configurations on a rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    domain: Rect,
    cfg: Vec<ArrowConfig>,
}

/// A single violation found by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `i1 + j1 != i2 + j2` at the vertex.
    Conservation { x: i64, y: i64 },
    /// Outgoing arrow toward the neighbor disagrees with the neighbor's
    /// incoming arrow; `vertical` refers to the edge direction.
    EdgeMismatch { x: i64, y: i64, vertical: bool },
}

impl Ensemble {
    /// The all-empty ensemble (every vertex `(0, 0; 0, 0)`).
    pub fn empty(domain: Rect) -> Self {
        Ensemble { domain, cfg: vec![ArrowConfig::default(); domain.area()] }
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn get(&self, x: i64, y: i64) -> ArrowConfig {
        self.cfg[self.domain.index(x, y)]
    }

    pub fn set(&mut self, x: i64, y: i64, c: ArrowConfig) {
        let i = self.domain.index(x, y);
        self.cfg[i] = c;
    }

    /// Indicator that an arrow vertically exits `(x, y)`.
    pub fn chi_v(&self, x: i64, y: i64) -> Result<u8, LatticeError> {
        if !self.domain.contains(x, y) {
            return Err(LatticeError::OutOfDomain(x, y));
        }
        Ok(self.get(x, y).i2())
    }

    /// Indicator that an arrow horizontally exits `(x, y)`.
    pub fn chi_h(&self, x: i64, y: i64) -> Result<u8, LatticeError> {
        if !self.domain.contains(x, y) {
            return Err(LatticeError::OutOfDomain(x, y));
        }
        Ok(self.get(x, y).j2())
    }

    /// All conservation and interior edge-consistency violations.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let d = self.domain;
        for (x, y) in d.vertices() {
            let c = self.get(x, y);
            if !c.conserves() {
                out.push(Violation::Conservation { x, y });
            }
            if x < d.x_max && c.j2() != self.get(x + 1, y).j1() {
                out.push(Violation::EdgeMismatch { x, y, vertical: false });
            }
            if y < d.y_max && c.i2() != self.get(x, y + 1).i1() {
                out.push(Violation::EdgeMismatch { x, y, vertical: true });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), LatticeError> {
        let v = self.validate();
        match v.first() {
            None => Ok(()),
            Some(Violation::Conservation { x, y }) | Some(Violation::EdgeMismatch { x, y, .. }) => {
                Err(LatticeError::InconsistentEnsemble(v.len(), *x, *y))
            }
        }
    }

    /// Restriction to a subrectangle.
    pub fn restrict_to(&self, sub: Rect) -> Result<Ensemble, LatticeError> {
        if !self.domain.contains_rect(&sub) {
            return Err(LatticeError::OutOfDomain(sub.x_min, sub.y_min));
        }
        let mut out = Ensemble::empty(sub);
        for (x, y) in sub.vertices() {
            out.set(x, y, self.get(x, y));
        }
        Ok(out)
    }

    /// Counts of the six configuration types, indexed by code.
    pub fn type_counts(&self) -> Result<[u64; 6], LatticeError> {
        let mut n = [0u64; 6];
        for (x, y) in self.domain.vertices() {
            match self.get(x, y).code() {
                Some(c) => n[c as usize] += 1,
                None => return Err(LatticeError::BadConfig(x, y)),
            }
        }
        Ok(n)
    }

    /// Log of the ensemble weight under `w`, accumulated per configuration
    /// type so large domains neither underflow nor lose accuracy.
    pub fn log_weight<T: Real>(&self, w: &WeightSystem<T>) -> Result<T, LatticeError> {
        let n = self.type_counts()?;
        let mut acc = T::zero();
        for (code, count) in n.iter().enumerate() {
            if *count > 0 {
                let c: T = num_traits::NumCast::from(*count).unwrap();
                acc = acc + c * w.by_code(code as u8).ln();
            }
        }
        Ok(acc)
    }

    /// Complements vertical edges and reflects across the horizontal axis,
    /// realized on the same rectangle by flipping the y-index range. An
    /// involution; exchanges the roles of the a- and b-weights.
    pub fn complement_vertical(&self) -> Ensemble {
        let d = self.domain;
        let mut out = Ensemble::empty(d);
        for (x, y) in d.vertices() {
            let src = self.get(x, d.y_min + d.y_max - y);
            out.set(
                x,
                y,
                ArrowConfig::from_bits(
                    src.i2() == 0,
                    src.j1() == 1,
                    src.i1() == 0,
                    src.j2() == 1,
                ),
            );
        }
        out
    }

    /// Transposes the grid across the diagonal, swapping vertical and
    /// horizontal arrow roles. An involution.
    pub fn reflect_diag(&self) -> Ensemble {
        let d = self.domain;
        let t = Rect::new(d.y_min, d.y_max, d.x_min, d.x_max);
        let mut out = Ensemble::empty(t);
        for (x, y) in t.vertices() {
            let src = self.get(y, x);
            out.set(
                x,
                y,
                ArrowConfig::from_bits(src.j1() == 1, src.i1() == 1, src.j2() == 1, src.i2() == 1),
            );
        }
        out
    }

    /// Serializes to the `6VE v1` text format (top row first).
    pub fn to_text(&self) -> Result<String, LatticeError> {
        let d = self.domain;
        let mut s = String::new();
        writeln!(s, "6VE v1 {} {} {} {}", d.x_min, d.x_max, d.y_min, d.y_max).unwrap();
        for y in (d.y_min..=d.y_max).rev() {
            for x in d.x_min..=d.x_max {
                match self.get(x, y).code() {
                    Some(c) => s.push(char::from(b'0' + c)),
                    None => return Err(LatticeError::BadConfig(x, y)),
                }
            }
            s.push('\n');
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Ensemble, LatticeError> {
        let bad = |m: &str| LatticeError::BadFormat(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "6VE" || parts[1] != "v1" {
            return Err(bad("header must be `6VE v1 <x_min> <x_max> <y_min> <y_max>`"));
        }
        let nums: Vec<i64> = parts[2..]
            .iter()
            .map(|p| p.parse().map_err(|_| bad("non-integer bound in header")))
            .collect::<Result<_, _>>()?;
        if nums[0] > nums[1] || nums[2] > nums[3] {
            return Err(bad("empty domain in header"));
        }
        let d = Rect::new(nums[0], nums[1], nums[2], nums[3]);
        let mut e = Ensemble::empty(d);
        for (row, y) in (d.y_min..=d.y_max).rev().enumerate() {
            let line = lines
                .next()
                .ok_or_else(|| bad(&format!("expected {} rows", d.height())))?;
            let bytes = line.trim_end().as_bytes();
            if bytes.len() != d.width() as usize {
                return Err(bad(&format!("row {} has wrong length", row + 1)));
            }
            for (col, b) in bytes.iter().enumerate() {
                if !(b'0'..=b'5').contains(b) {
                    return Err(bad(&format!("invalid digit `{}`", *b as char)));
                }
                e.set(d.x_min + col as i64, y, ArrowConfig::from_code(b - b'0'));
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(bad("trailing content after grid"));
        }
        Ok(e)
    }
}

/// Indexed entrance/exit vertex lists on a rectangle's boundary.
///
/// Index `i` runs over `[-B, A]`: paths `-B..=0` enter through the south
/// boundary (eastmost first), paths `1..=A` through the west boundary
/// (bottom first). `B == -1` encodes the absence of south-entering paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryData {
    pub entrance: Vec<(i64, i64)>,
    pub exit: Vec<(i64, i64)>,
    pub a: i64,
    pub b: i64,
}

impl BoundaryData {
    pub fn len(&self) -> usize {
        self.entrance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entrance.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        -self.b..=self.a
    }

    pub fn entrance_at(&self, i: i64) -> (i64, i64) {
        self.entrance[(i + self.b) as usize]
    }

    pub fn exit_at(&self, i: i64) -> (i64, i64) {
        self.exit[(i + self.b) as usize]
    }

    /// Builds boundary data from unordered entrance/exit vertex sets for a
    /// domain, assigning indices by the boundary convention. Entrances are
    /// matched to exits in order.
    pub fn from_sets(
        domain: Rect,
        entrances: &[(i64, i64)],
        exits: &[(i64, i64)],
    ) -> Result<BoundaryData, LatticeError> {
        let entrance = sort_entrances(domain, entrances)?;
        let exit = sort_exits(domain, exits)?;
        if entrance.len() != exit.len() {
            return Err(LatticeError::BadFormat(format!(
                "{} entrances vs {} exits",
                entrance.len(),
                exit.len()
            )));
        }
        let b = entrance.iter().filter(|(_, y)| *y < domain.y_min).count() as i64 - 1;
        let a = entrance.len() as i64 - b - 1;
        Ok(BoundaryData { entrance, exit, a, b })
    }
}

/// Orders entrance vertices per the path-index convention: south boundary by
/// descending x, then west boundary by ascending y.
fn sort_entrances(domain: Rect, v: &[(i64, i64)]) -> Result<Vec<(i64, i64)>, LatticeError> {
    let mut south = Vec::new();
    let mut west = Vec::new();
    for &(x, y) in v {
        if y == domain.y_min - 1 && x >= domain.x_min && x <= domain.x_max {
            south.push((x, y));
        } else if x == domain.x_min - 1 && y >= domain.y_min && y <= domain.y_max {
            west.push((x, y));
        } else {
            return Err(LatticeError::OutOfDomain(x, y));
        }
    }
    south.sort_by_key(|&(x, _)| std::cmp::Reverse(x));
    west.sort_by_key(|&(_, y)| y);
    south.extend(west);
    Ok(south)
}

/// Orders exit vertices per the convention: east boundary by ascending y,
/// then north boundary by descending x.
fn sort_exits(domain: Rect, v: &[(i64, i64)]) -> Result<Vec<(i64, i64)>, LatticeError> {
    let mut north = Vec::new();
    let mut east = Vec::new();
    for &(x, y) in v {
        if y == domain.y_max + 1 && x >= domain.x_min && x <= domain.x_max {
            north.push((x, y));
        } else if x == domain.x_max + 1 && y >= domain.y_min && y <= domain.y_max {
            east.push((x, y));
        } else {
            return Err(LatticeError::OutOfDomain(x, y));
        }
    }
    east.sort_by_key(|&(_, y)| y);
    north.sort_by_key(|&(x, _)| std::cmp::Reverse(x));
    east.extend(north);
    Ok(east)
}

/// The non-crossing up-right path representation of an ensemble. Paths are
/// stored in index order `-B..=A`, each as its full vertex sequence from
/// entrance to exit (both in the boundary).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEnsemble {
    pub paths: Vec<Vec<(i64, i64)>>,
    pub b: i64,
}

impl PathEnsemble {
    pub fn index_of(&self, pos: usize) -> i64 {
        pos as i64 - self.b
    }

    pub fn a(&self) -> i64 {
        self.paths.len() as i64 - self.b - 1
    }
}

/// Converts an ensemble into its non-crossing path representation.
///
/// At `(1, 1; 1, 1)` vertices the south-entering path exits east and the
/// west-entering path exits north; this is the unique corner-avoiding
/// resolution under which the path family is non-crossing.
pub fn to_paths(e: &Ensemble) -> Result<PathEnsemble, LatticeError> {
    e.ensure_valid()?;
    let d = e.domain();
    let mut south: Vec<(i64, i64)> = (d.x_min..=d.x_max)
        .filter(|&x| e.get(x, d.y_min).i1() == 1)
        .map(|x| (x, d.y_min - 1))
        .collect();
    south.sort_by_key(|&(x, _)| std::cmp::Reverse(x));
    let west: Vec<(i64, i64)> = (d.y_min..=d.y_max)
        .filter(|&y| e.get(d.x_min, y).j1() == 1)
        .map(|y| (d.x_min - 1, y))
        .collect();
    let b = south.len() as i64 - 1;
    let mut paths = Vec::with_capacity(south.len() + west.len());
    for start in south.into_iter().chain(west) {
        paths.push(trace_path(e, start));
    }
    Ok(PathEnsemble { paths, b })
}

fn trace_path(e: &Ensemble, start: (i64, i64)) -> Vec<(i64, i64)> {
    let d = e.domain();
    let mut path = vec![start];
    // First step is forced into the domain.
    let (mut x, mut y) = start;
    let mut from_south = y < d.y_min;
    if from_south {
        y += 1;
    } else {
        x += 1;
    }
    loop {
        path.push((x, y));
        if !d.contains(x, y) {
            break; // stepped onto the north or east boundary: done
        }
        let c = e.get(x, y);
        let go_north = match (c.i2() == 1, c.j2() == 1) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => !from_south, // corner-avoiding crossing
            (false, false) => unreachable!("validated ensemble lost an arrow"),
        };
        if go_north {
            y += 1;
            from_south = true;
        } else {
            x += 1;
            from_south = false;
        }
    }
    path
}

/// Rebuilds an ensemble from paths on the given domain. Fails if any path
/// steps outside the closure, repeats an edge, or breaks arrow conservation.
pub fn from_paths(p: &PathEnsemble, domain: Rect) -> Result<Ensemble, LatticeError> {
    let mut h_edges: HashSet<(i64, i64)> = HashSet::new(); // east edge out of (x, y)
    let mut v_edges: HashSet<(i64, i64)> = HashSet::new(); // north edge out of (x, y)
    for path in &p.paths {
        for pair in path.windows(2) {
            let (x0, y0) = pair[0];
            let (x1, y1) = pair[1];
            let fresh = match (x1 - x0, y1 - y0) {
                (1, 0) => h_edges.insert((x0, y0)),
                (0, 1) => v_edges.insert((x0, y0)),
                _ => return Err(LatticeError::BadPathStep(x0, y0, x1, y1)),
            };
            if !fresh {
                return Err(LatticeError::CrossingPaths(x0, y0));
            }
        }
    }
    let mut e = Ensemble::empty(domain);
    for (x, y) in domain.vertices() {
        let c = ArrowConfig::from_bits(
            v_edges.contains(&(x, y - 1)),
            h_edges.contains(&(x - 1, y)),
            v_edges.contains(&(x, y)),
            h_edges.contains(&(x, y)),
        );
        if !c.conserves() {
            return Err(LatticeError::CrossingPaths(x, y));
        }
        e.set(x, y, c);
    }
    e.ensure_valid()?;
    Ok(e)
}

/// Entrance and exit data of a valid ensemble, under the index convention.
pub fn boundary_of(e: &Ensemble) -> Result<BoundaryData, LatticeError> {
    let p = to_paths(e)?;
    let entrance: Vec<(i64, i64)> = p.paths.iter().map(|q| q[0]).collect();
    let exit: Vec<(i64, i64)> = p.paths.iter().map(|q| *q.last().unwrap()).collect();
    let b = p.b;
    let a = p.a();
    Ok(BoundaryData { entrance, exit, a, b })
}

#[cfg(test)]
pub mod fixtures {
    use super::*;

    /// The 6x7 ensemble shown alongside the paper-style path picture: domain
    /// `[1,6] x [0,6]`, three south entrances at x = 1, 2, 5 and three west
    /// entrances at y = 1, 3, 5.
    pub fn six_by_seven() -> Ensemble {
        let paths = six_by_seven_paths();
        from_paths(&paths, Rect::new(1, 6, 0, 6)).unwrap()
    }

    pub fn six_by_seven_paths() -> PathEnsemble {
        let p_m2 = vec![(5, -1), (5, 0), (6, 0), (6, 1), (6, 2), (7, 2)];
        let p_m1 = vec![
            (2, -1), (2, 0), (3, 0), (4, 0), (4, 1), (4, 2), (5, 2), (5, 3), (6, 3), (6, 4), (7, 4),
        ];
        let p_0 = vec![
            (1, -1), (1, 0), (2, 0), (2, 1), (3, 1), (3, 2), (3, 3), (4, 3), (4, 4), (4, 5),
            (5, 5), (5, 6), (6, 6), (6, 7),
        ];
        let p_1 = vec![
            (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 4), (3, 5), (3, 6), (4, 6), (4, 7),
        ];
        let p_2 = vec![(0, 3), (1, 3), (1, 4), (1, 5), (2, 5), (2, 6), (3, 6), (3, 7)];
        let p_3 = vec![(0, 5), (1, 5), (1, 6), (2, 6), (2, 7)];
        PathEnsemble { paths: vec![p_m2, p_m1, p_0, p_1, p_2, p_3], b: 2 }
    }
}
