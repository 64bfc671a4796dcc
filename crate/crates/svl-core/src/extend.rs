//! Constructive ensemble extension: given regular boundary data on the big
//! square and a compatible inner ensemble on the centered small square, build
//! an ensemble on the big square agreeing with both. The annulus between them
//! is split into four frame domains filled by a canonical monotone routing.

use crate::lattice::{
    boundary_of, from_paths, BoundaryData, Ensemble, LatticeError, PathEnsemble, Rect,
};
use crate::weights::SlopePair;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExtendError {
    #[error("frame flow K{0} = {1} is not positive; inputs are outside the extension's sufficient conditions")]
    NegativeFlow(usize, i64),
    #[error("frame flow K{0} = {1} exceeds the frame width {2}")]
    FlowTooWide(usize, i64, i64),
    #[error("flow balance violated: path counts give {0} != {1}; inner and outer boundary data are inconsistent")]
    BalanceViolation(i64, i64),
    #[error("monotone criterion fails at path {index}: exit {exit:?} is not northeast of entrance {entrance:?}")]
    MonotoneViolation { index: i64, entrance: (i64, i64), exit: (i64, i64) },
    #[error("canonical routing blocked for path {index} at column {column}")]
    FillInfeasible { index: i64, column: i64 },
    #[error("while filling frame {gamma}: {source}")]
    FrameFill { gamma: usize, source: Box<ExtendError> },
    #[error("bad extension geometry: {0}")]
    Geometry(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The extension instance: outer boundary data on `[1, N+2W]^2`, an inner
/// ensemble on `[W+1, N+W]^2`, and the regularity parameters used only for
/// the advisory sufficient-condition report.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    pub n: i64,
    pub w: i64,
    pub outer_bd: BoundaryData,
    pub inner: Ensemble,
    pub r: u64,
    pub eta: f64,
    pub st: SlopePair<f64>,
}

impl ExtensionProblem {
    pub fn outer_domain(&self) -> Rect {
        Rect::of_size(self.n + 2 * self.w, self.n + 2 * self.w)
    }

    pub fn inner_domain(&self) -> Rect {
        Rect::new(self.w + 1, self.n + self.w, self.w + 1, self.n + self.w)
    }

    /// The sufficient conditions of the extension lemma; advisory only (the
    /// construction is attempted regardless and reports the failing stage).
    pub fn nwr_satisfied(&self) -> bool {
        let (n, w, r) = (self.n as f64, self.w as f64, self.r as f64);
        let (s, t) = (self.st.s, self.st.t);
        (s * w).min(t * w) >= 50.0 * self.eta * n
            && r <= self.eta * n
            && 50.0 * (1.0 / s + 1.0 / t) * r <= w
            && w <= n
    }
}

/// The four frame domains, their corridor flows and corridor vertex sets.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    pub gamma: [Rect; 4],
    /// `K1..K4`: paths crossing from frame i-1 into frame i (frame 0 = 4).
    pub flows: [i64; 4],
    /// Corridor vertex sets per frame pair: the exit-side and entrance-side
    /// lists realizing the same crossing edges from both sides.
    pub corridors: [(Vec<(i64, i64)>, Vec<(i64, i64)>); 4],
    /// Outer and inner path counts split at the frame boundaries.
    pub outer_counts: FrameCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameCounts {
    pub a1: i64,
    pub a4: i64,
    pub b1: i64,
    pub b2: i64,
    pub c2: i64,
    pub c3: i64,
    pub d3: i64,
    pub d4: i64,
    pub inner_west: i64,
    pub inner_south: i64,
    pub inner_east: i64,
    pub inner_north: i64,
}

fn count_in<F: Fn(&(i64, i64)) -> bool>(v: &[(i64, i64)], f: F) -> i64 {
    v.iter().filter(|p| f(p)).count() as i64
}

/// Solves the frame flows: `K1 = floor(s W)`, the next two from the balance
/// equations, and the fourth equation checked as a consistency audit.
pub fn plan_frame(p: &ExtensionProblem) -> Result<FramePlan, ExtendError> {
    let (n, w) = (p.n, p.w);
    if n < 1 || w < 1 {
        return Err(ExtendError::Geometry("need N >= 1 and W >= 1".into()));
    }
    let outer = p.outer_domain();
    if p.inner.domain() != p.inner_domain() {
        return Err(ExtendError::Geometry(format!(
            "inner ensemble domain {:?} is not the centered square {:?}",
            p.inner.domain(),
            p.inner_domain()
        )));
    }
    let inner_bd = boundary_of(&p.inner)?;

    let counts = FrameCounts {
        a1: count_in(&p.outer_bd.entrance, |&(x, y)| x < 1 && y <= n + w),
        a4: count_in(&p.outer_bd.entrance, |&(x, y)| x < 1 && y > n + w),
        b1: count_in(&p.outer_bd.entrance, |&(x, y)| y < 1 && x <= w),
        b2: count_in(&p.outer_bd.entrance, |&(x, y)| y < 1 && x > w),
        c2: count_in(&p.outer_bd.exit, |&(x, y)| x > outer.x_max && y <= w),
        c3: count_in(&p.outer_bd.exit, |&(x, y)| x > outer.x_max && y > w),
        d3: count_in(&p.outer_bd.exit, |&(x, y)| y > outer.y_max && x > n + w),
        d4: count_in(&p.outer_bd.exit, |&(x, y)| y > outer.y_max && x <= n + w),
        inner_west: count_in(&inner_bd.entrance, |&(x, _)| x == w),
        inner_south: count_in(&inner_bd.entrance, |&(_, y)| y == w),
        inner_east: count_in(&inner_bd.exit, |&(x, _)| x == n + w + 1),
        inner_north: count_in(&inner_bd.exit, |&(_, y)| y == n + w + 1),
    };

    let k1 = (p.st.s * w as f64).floor() as i64;
    let k2 = counts.a1 + counts.b1 - k1 - counts.inner_west;
    let k3 = k2 + counts.b2 - counts.c2 - counts.inner_south;
    let k4 = counts.c3 + counts.d3 - k3 - counts.inner_east;
    let flows = [k1, k2, k3, k4];

    let lhs = counts.a4 + k1 + counts.inner_north;
    let rhs = k4 + counts.d4;
    if lhs != rhs {
        return Err(ExtendError::BalanceViolation(lhs, rhs));
    }
    for (i, &k) in flows.iter().enumerate() {
        if k <= 0 {
            return Err(ExtendError::NegativeFlow(i + 1, k));
        }
        if k > w {
            return Err(ExtendError::FlowTooWide(i + 1, k, w));
        }
    }

    let gamma = [
        Rect::new(1, w, 1, n + w),
        Rect::new(w + 1, n + 2 * w, 1, w),
        Rect::new(n + w + 1, n + 2 * w, w + 1, n + 2 * w),
        Rect::new(1, n + w, n + w + 1, n + 2 * w),
    ];
    // (exit-side, entrance-side) corridor vertices per frame pair:
    // 1 -> 4 (north), 1 -> 2 (east), 2 -> 3 (north), 4 -> 3 (east)
    let corridors = [
        (
            (1..=k1).map(|x| (x, n + w + 1)).collect(),
            (1..=k1).map(|x| (x, n + w)).collect(),
        ),
        (
            (1..=k2).map(|y| (w + 1, y)).collect(),
            (1..=k2).map(|y| (w, y)).collect(),
        ),
        (
            (1..=k3).map(|x| (n + w + x, w + 1)).collect(),
            (1..=k3).map(|x| (n + w + x, w)).collect(),
        ),
        (
            (1..=k4).map(|y| (n + w + 1, n + w + y)).collect(),
            (1..=k4).map(|y| (n + w, n + w + y)).collect(),
        ),
    ];
    Ok(FramePlan { gamma, flows, corridors, outer_counts: counts })
}

/// Canonical monotone filling of a rectangle with prescribed boundary data:
/// paths are routed lowest-first, each as low as the previous path allows.
/// Succeeds exactly when the componentwise criterion `v_i >= u_i` admits an
/// ensemble.
pub fn fill_monotone(gamma: Rect, bd: &BoundaryData) -> Result<Ensemble, ExtendError> {
    for i in bd.indices() {
        let u = bd.entrance_at(i);
        let v = bd.exit_at(i);
        if v.0 < u.0 || v.1 < u.1 {
            return Err(ExtendError::MonotoneViolation { index: i, entrance: u, exit: v });
        }
    }
    let mut paths: Vec<Vec<(i64, i64)>> = Vec::with_capacity(bd.len());
    // per-column occupancy of the previously routed path
    let mut prev_step: HashMap<i64, i64> = HashMap::new(); // east-step height by source column
    let mut prev_top: HashMap<i64, i64> = HashMap::new(); // top vertex height by column

    for i in bd.indices() {
        let (ux, uy) = bd.entrance_at(i);
        let (vx, vy) = bd.exit_at(i);
        let west_entry = ux == gamma.x_min - 1;
        let east_exit = vx == gamma.x_max + 1;
        let blocked = |column: i64| ExtendError::FillInfeasible { index: i, column };

        let mut verts: Vec<(i64, i64)> = vec![(ux, uy)];
        let mut steps: Vec<(i64, i64)> = Vec::new(); // (source column, height)
        let mut cur = uy;
        for c in ux..vx {
            let mut lb = cur.max(gamma.y_min);
            if let Some(&g) = prev_step.get(&c) {
                lb = lb.max(g + 1);
            }
            if c + 1 <= gamma.x_max {
                if let Some(&t) = prev_top.get(&(c + 1)) {
                    lb = lb.max(t);
                }
            }
            let h = if west_entry && c == ux {
                if lb > uy {
                    return Err(blocked(c));
                }
                uy
            } else if east_exit && c == vx - 1 {
                if lb > vy {
                    return Err(blocked(c));
                }
                vy
            } else {
                if lb > vy.min(gamma.y_max) {
                    return Err(blocked(c));
                }
                lb
            };
            // climb within column c, then step east at height h
            if c >= gamma.x_min {
                for y in (cur + 1)..=h {
                    verts.push((c, y));
                }
            }
            verts.push((c + 1, h));
            steps.push((c, h));
            cur = h;
        }
        if !east_exit {
            if vx == ux && prev_top.contains_key(&vx) {
                // straight vertical path needs a completely free column
                return Err(blocked(vx));
            }
            // final climb in the exit column, onto the north boundary
            for y in (cur + 1)..=vy {
                verts.push((vx, y));
            }
        }
        debug_assert_eq!(*verts.last().unwrap(), (vx, vy));

        prev_step = steps.iter().copied().collect();
        prev_top.clear();
        for &(x, y) in &verts {
            if x >= gamma.x_min && x <= gamma.x_max {
                let e = prev_top.entry(x).or_insert(y);
                *e = (*e).max(y);
            }
        }
        if !east_exit {
            prev_top.insert(vx, vy); // the run reaches the boundary vertex
        }
        paths.push(verts);
    }

    let south = bd.entrance.iter().filter(|&&(_, y)| y == gamma.y_min - 1).count() as i64;
    let pe = PathEnsemble { paths, b: south - 1 };
    Ok(from_paths(&pe, gamma)?)
}

/// A completed extension with its plan and the advisory report.
#[derive(Debug, Clone)]
pub struct ExtensionResult {
    pub ensemble: Ensemble,
    pub plan: FramePlan,
    pub nwr_satisfied: bool,
}

/// Builds the extension: plans the frame flows, assembles each frame's
/// boundary data from the outer data, the inner ensemble's boundary and the
/// corridors, fills all four frames, and fuses everything on the big square.
/// The output always validates, reproduces the outer boundary data exactly
/// and restricts to the inner ensemble.
pub fn extend(p: &ExtensionProblem) -> Result<ExtensionResult, ExtendError> {
    let plan = plan_frame(p)?;
    let (n, w) = (p.n, p.w);
    let outer = p.outer_domain();
    let inner_bd = boundary_of(&p.inner)?;

    let outer_entr = |f: &dyn Fn(&(i64, i64)) -> bool| -> Vec<(i64, i64)> {
        p.outer_bd.entrance.iter().copied().filter(|v| f(v)).collect()
    };
    let outer_exit = |f: &dyn Fn(&(i64, i64)) -> bool| -> Vec<(i64, i64)> {
        p.outer_bd.exit.iter().copied().filter(|v| f(v)).collect()
    };
    let inner_entr = |f: &dyn Fn(&(i64, i64)) -> bool| -> Vec<(i64, i64)> {
        inner_bd.entrance.iter().copied().filter(|v| f(v)).collect()
    };
    let inner_exit = |f: &dyn Fn(&(i64, i64)) -> bool| -> Vec<(i64, i64)> {
        inner_bd.exit.iter().copied().filter(|v| f(v)).collect()
    };

    // frame 1: west strip including the southwest block
    let mut entr1 = outer_entr(&|&(x, y)| x < 1 && y <= n + w);
    entr1.extend(outer_entr(&|&(x, y)| y < 1 && x <= w));
    let mut exit1 = plan.corridors[0].0.clone(); // north, into frame 4
    exit1.extend(plan.corridors[1].0.clone()); // east, into frame 2
    exit1.extend(inner_entr(&|&(x, _)| x == w).iter().map(|&(_, y)| (w + 1, y)));

    // frame 2: south strip east of frame 1
    let mut entr2 = plan.corridors[1].1.clone();
    entr2.extend(outer_entr(&|&(x, y)| y < 1 && x > w));
    let mut exit2 = outer_exit(&|&(x, y)| x > outer.x_max && y <= w);
    exit2.extend(inner_entr(&|&(_, y)| y == w).iter().map(|&(x, _)| (x, w + 1)));
    exit2.extend(plan.corridors[2].0.clone()); // north, into frame 3

    // frame 3: east strip including the northeast block
    let mut entr3 = plan.corridors[2].1.clone();
    entr3.extend(inner_exit(&|&(x, _)| x == n + w + 1).iter().map(|&(_, y)| (n + w, y)));
    entr3.extend(plan.corridors[3].1.clone()); // from frame 4
    let mut exit3 = outer_exit(&|&(x, y)| x > outer.x_max && y > w);
    exit3.extend(outer_exit(&|&(x, y)| y > outer.y_max && x > n + w));

    // frame 4: north strip west of frame 3
    let mut entr4 = outer_entr(&|&(x, y)| x < 1 && y > n + w);
    entr4.extend(plan.corridors[0].1.clone()); // from frame 1
    entr4.extend(inner_exit(&|&(_, y)| y == n + w + 1).iter().map(|&(x, _)| (x, n + w)));
    let mut exit4 = outer_exit(&|&(x, y)| y > outer.y_max && x <= n + w);
    exit4.extend(plan.corridors[3].0.clone()); // east, into frame 3

    let frames = [(entr1, exit1), (entr2, exit2), (entr3, exit3), (entr4, exit4)];
    let mut result = Ensemble::empty(outer);
    for (fi, ((entr, exit), rect)) in frames.into_iter().zip(plan.gamma).enumerate() {
        let wrap =
            |source: ExtendError| ExtendError::FrameFill { gamma: fi + 1, source: Box::new(source) };
        let bd = BoundaryData::from_sets(rect, &entr, &exit)
            .map_err(|e| wrap(ExtendError::Lattice(e)))?;
        let fill = fill_monotone(rect, &bd).map_err(wrap)?;
        for (x, y) in rect.vertices() {
            result.set(x, y, fill.get(x, y));
        }
    }
    for (x, y) in p.inner.domain().vertices() {
        result.set(x, y, p.inner.get(x, y));
    }

    result.ensure_valid()?;
    let got_bd = boundary_of(&result)?;
    if got_bd != p.outer_bd {
        return Err(ExtendError::Geometry(
            "assembled ensemble does not reproduce the outer boundary data".into(),
        ));
    }
    if result.restrict_to(p.inner_domain())? != p.inner {
        return Err(ExtendError::Geometry(
            "assembled ensemble does not restrict to the inner ensemble".into(),
        ));
    }
    Ok(ExtensionResult { ensemble: result, plan, nwr_satisfied: p.nwr_satisfied() })
}
