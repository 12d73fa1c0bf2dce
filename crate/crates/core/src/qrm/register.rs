//! Matrix-free interaction-picture generator on a subset of sites.

use std::cell::RefCell;

use super::{CoupledQrmSystem, HoppingDrive, QrmError, Result, MAX_DIM};
use crate::numerics::{propagate_states, TimeDependentGenerator, C64, ZERO};

#[derive(Debug, Clone)]
struct LocalDrive {
    a: usize,
    b: usize,
    drive: HoppingDrive,
}

/// The drives of a system restricted to the sites they touch, in the
/// interaction picture with respect to the site Hamiltonians:
/// `H_I(t) = Σ_d J_d cos(ω_d t + φ_d) X_a(t) X_b(t)` with
/// `X(t) = e^{iEt} X e^{−iEt}`. Sites outside the register evolve trivially
/// in this frame.
#[derive(Debug, Clone)]
pub struct DrivenRegister {
    sites: Vec<usize>,
    levels: usize,
    energies: Vec<Vec<f64>>,
    /// Row-major `levels × levels` hopping matrices, one per local site.
    hopping: Vec<Vec<C64>>,
    drives: Vec<LocalDrive>,
    dim: usize,
}

pub struct RegisterSnapshot {
    amplitudes: Vec<f64>,
    phases: Vec<C64>,
}

impl DrivenRegister {
    /// Register on `sites` (in that order) carrying `drives`, which must
    /// only touch those sites.
    pub fn new(sys: &CoupledQrmSystem, sites: &[usize], drives: &[HoppingDrive]) -> Result<Self> {
        let levels = sys.kept();
        let dim = levels.saturating_pow(sites.len() as u32);
        if dim > MAX_DIM {
            return Err(QrmError::DimensionOverflow { dim, max: MAX_DIM });
        }
        let local = |s: usize| {
            sites
                .iter()
                .position(|&x| x == s)
                .ok_or_else(|| QrmError::InvalidDrive(format!("site {s} is not in the register {sites:?}")))
        };
        let drives = drives
            .iter()
            .map(|d| Ok(LocalDrive { a: local(d.pair.0)?, b: local(d.pair.1)?, drive: *d }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sites: sites.to_vec(),
            levels,
            energies: sites.iter().map(|&s| sys.relative_energies(s)).collect(),
            hopping: sites.iter().map(|&s| sys.hopping(s).transpose().iter().copied().collect()).collect(),
            drives,
            dim,
        })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Flat index of per-site levels (register order).
    pub fn index(&self, levels: &[usize]) -> usize {
        levels.iter().fold(0, |acc, &l| acc * self.levels + l)
    }

    /// Per-site levels of a flat index.
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sites.len()];
        for slot in out.iter_mut().rev() {
            *slot = index % self.levels;
            index /= self.levels;
        }
        out
    }

    /// `input` acted on by site `pos`'s hopping matrix, written to `output`.
    fn apply_site(&self, pos: usize, input: &[C64], output: &mut [C64]) {
        let l = self.levels;
        let stride = l.pow((self.sites.len() - 1 - pos) as u32);
        let op = &self.hopping[pos];
        for outer in (0..self.dim).step_by(l * stride) {
            for inner in 0..stride {
                let base = outer + inner;
                for r in 0..l {
                    let row = &op[r * l..(r + 1) * l];
                    let mut acc = ZERO;
                    for (c, m) in row.iter().enumerate() {
                        acc += m * input[base + c * stride];
                    }
                    output[base + r * stride] = acc;
                }
            }
        }
    }

    /// Propagates `states` from `t0` to `t1` with steps no longer than
    /// `max_step`.
    pub fn propagate(&self, t0: f64, t1: f64, max_step: f64, states: &mut [Vec<C64>]) -> Result<()> {
        if t1 <= t0 || self.drives.is_empty() {
            return Ok(());
        }
        let steps = ((t1 - t0) / max_step).ceil().max(1.0) as usize;
        propagate_states(self, t0, t1, steps, states)?;
        Ok(())
    }
}

impl TimeDependentGenerator for DrivenRegister {
    type Snapshot = RegisterSnapshot;

    fn dim(&self) -> usize {
        self.dim
    }

    fn snapshot(&self, t: f64) -> RegisterSnapshot {
        let mut phases = vec![C64::from(1.0)];
        for e in &self.energies {
            let site: Vec<C64> = e.iter().map(|x| C64::from_polar(1.0, x * t)).collect();
            phases = phases.iter().flat_map(|p| site.iter().map(move |s| p * s)).collect();
        }
        RegisterSnapshot { amplitudes: self.drives.iter().map(|d| d.drive.amplitude(t)).collect(), phases }
    }

    fn apply(&self, snap: &RegisterSnapshot, scale: C64, v: &[C64], out: &mut [C64]) {
        SCRATCH.with(|cell| {
            let scratch = &mut *cell.borrow_mut();
            scratch.resize(self.dim);
            let Scratch { w, acc, once, twice } = scratch;
            for ((x, y), p) in w.iter_mut().zip(v).zip(&snap.phases) {
                *x = y * p.conj();
            }
            acc.fill(ZERO);
            for (d, &amp) in self.drives.iter().zip(&snap.amplitudes) {
                if amp == 0.0 {
                    continue;
                }
                self.apply_site(d.a, w, once);
                self.apply_site(d.b, once, twice);
                for (a, x) in acc.iter_mut().zip(twice.iter()) {
                    *a += x * amp;
                }
            }
            for ((o, a), p) in out.iter_mut().zip(acc.iter()).zip(&snap.phases) {
                *o += scale * p * a;
            }
        });
    }
}

#[derive(Default)]
struct Scratch {
    w: Vec<C64>,
    acc: Vec<C64>,
    once: Vec<C64>,
    twice: Vec<C64>,
}

impl Scratch {
    fn resize(&mut self, dim: usize) {
        for v in [&mut self.w, &mut self.acc, &mut self.once, &mut self.twice] {
            v.resize(dim, ZERO);
        }
    }
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}
