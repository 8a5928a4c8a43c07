//! Stationary structure of the unperturbed Hamiltonian
//! `H0 = p^2/2 - gamma sigma_z p + Omega0 sigma_x + V(x)`.
//!
//! The four lowest eigenpairs are obtained from the two `sigma_x P` symmetry
//! sectors of the discretized operator. Each sector is expanded in a real basis
//! of `sigma_x T`-invariant vectors, which turns the 2n x 2n complex problem
//! into two real symmetric n x n problems. Eigenvectors returned this way are
//! automatically `sigma_x P` eigenstates (this also settles any exact
//! degeneracy between the two members of a doublet) and satisfy
//! `sigma_x T |psi> = +|psi>`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::model::{sample_potential, ModelParams, SpatialGrid, SpinorField};

const RESIDUAL_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-3;
const FROZEN_SPLITTING: f64 = 1e-6;

/// One of the four lowest stationary states `|ij>`, ordered by energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    L11,
    L12,
    L21,
    L22,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::L11, Level::L12, Level::L21, Level::L22];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::L11 => "11",
            Level::L12 => "12",
            Level::L21 => "21",
            Level::L22 => "22",
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(self, Level::L11 | Level::L12)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>", self.label())
    }
}

/// Discretized `H0` acting on stacked `(psi_up, psi_down)`.
///
/// Kinetic and SOC terms are spectral; the SOC multiplier vanishes at the
/// Nyquist index so that the discrete momentum stays odd under parity.
pub struct Hamiltonian {
    grid: SpatialGrid,
    params: ModelParams,
    kinetic: Vec<f64>,
    soc_momentum: Vec<f64>,
    potential: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("n", &self.grid.n())
            .field("params", &self.params)
            .finish()
    }
}

/// Momentum values used for first-derivative terms: the grid momenta with the
/// Nyquist entry set to zero.
pub(crate) fn odd_momentum(grid: &SpatialGrid) -> Vec<f64> {
    let n = grid.n();
    let mut k = grid.k().to_vec();
    k[n / 2] = 0.0;
    k
}

pub fn build_h0(grid: &SpatialGrid, params: &ModelParams) -> Result<Hamiltonian> {
    params.validate()?;
    let mut planner = FftPlanner::new();
    let n = grid.n();
    Ok(Hamiltonian {
        grid: grid.clone(),
        params: *params,
        kinetic: grid.k().iter().map(|k| 0.5 * k * k).collect(),
        soc_momentum: odd_momentum(grid),
        potential: sample_potential(grid, params),
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    })
}

impl Hamiltonian {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Applies `H0` through FFTs.
    pub fn apply(&self, field: &SpinorField) -> SpinorField {
        let n = self.grid.n();
        let gamma = self.params.gamma;
        let omega0 = self.params.omega0;
        let inv_n = 1.0 / n as f64;
        let momentum_part = |comp: &[Complex64], sign: f64| -> Vec<Complex64> {
            let mut buf = comp.to_vec();
            self.forward.process(&mut buf);
            for ((z, t), k) in buf.iter_mut().zip(&self.kinetic).zip(&self.soc_momentum) {
                *z *= (t - sign * gamma * k) * inv_n;
            }
            self.inverse.process(&mut buf);
            buf
        };
        let mut up = momentum_part(&field.up, 1.0);
        let mut down = momentum_part(&field.down, -1.0);
        for j in 0..n {
            let v = self.potential[j];
            up[j] += v * field.up[j] + omega0 * field.down[j];
            down[j] += v * field.down[j] + omega0 * field.up[j];
        }
        SpinorField { up, down }
    }

    /// First rows of the kinetic circulant `t[r]` and of the momentum
    /// circulant `p[r] = i q[r]`; both `t` and `q` are real.
    fn circulants(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n();
        let row = |spectrum: &[f64]| -> Vec<Complex64> {
            let mut buf: Vec<Complex64> = spectrum
                .iter()
                .map(|&v| Complex64::new(v / n as f64, 0.0))
                .collect();
            self.inverse.process(&mut buf);
            buf
        };
        let t = row(&self.kinetic).into_iter().map(|z| z.re).collect();
        let q = row(&self.soc_momentum).into_iter().map(|z| z.im).collect();
        (t, q)
    }

    /// Dense `2n x 2n` matrix in the stacked `(up, down)` ordering.
    pub fn to_dense(&self) -> Mat<Complex64> {
        let n = self.grid.n();
        let (t, q) = self.circulants();
        let gamma = self.params.gamma;
        let omega0 = self.params.omega0;
        Mat::from_fn(2 * n, 2 * n, |a, b| {
            let (sa, j) = (a / n, a % n);
            let (sb, l) = (b / n, b % n);
            if sa == sb {
                let r = (j + n - l) % n;
                let sign = if sa == 0 { 1.0 } else { -1.0 };
                let mut z = Complex64::new(t[r], -sign * gamma * q[r]);
                if j == l {
                    z += self.potential[j];
                }
                z
            } else if j == l {
                Complex64::new(omega0, 0.0)
            } else {
                Complex64::default()
            }
        })
    }

    /// Real symmetric matrix of `H0` restricted to the `sigma_x P = sector`
    /// subspace, written in the `sigma_x T`-invariant basis of [`sector_basis`].
    fn sector_matrix(&self, sector: f64, basis: &[BasisVector]) -> Mat<f64> {
        let n = self.grid.n();
        let (t, q) = self.circulants();
        let gamma = self.params.gamma;
        let omega0 = self.params.omega0;
        // H_s(j, l) acting on the up component u, with psi = (u, s P u)
        let h = |j: usize, l: usize| -> Complex64 {
            let r = (j + n - l) % n;
            let mut z = Complex64::new(t[r], -gamma * q[r]);
            if j == l {
                z += self.potential[j];
            }
            if l == self.grid.mirror_index(j) {
                z += sector * omega0;
            }
            z
        };
        Mat::from_fn(basis.len(), basis.len(), |a, b| {
            let mut acc = Complex64::default();
            for (j, cj) in basis[a].terms() {
                for (l, cl) in basis[b].terms() {
                    acc += cj.conj() * h(j, l) * cl;
                }
            }
            acc.re
        })
    }
}

/// A unit vector with at most two nonzero grid entries.
#[derive(Debug, Clone, Copy)]
struct BasisVector {
    idx: [usize; 2],
    coef: [Complex64; 2],
    len: usize,
}

impl BasisVector {
    fn terms(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (0..self.len).map(move |i| (self.idx[i], self.coef[i]))
    }
}

/// Orthonormal basis of the up-component space fixed by the antiunitary map
/// `u -> s P conj(u)`; coordinates in this basis are real for every state
/// with `sigma_x T psi = psi` in the sector `sigma_x P = s`.
fn sector_basis(grid: &SpatialGrid, sector: f64) -> Vec<BasisVector> {
    let n = grid.n();
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let h = FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n);
    let fixed = if sector > 0.0 { one } else { i };
    for j in [0, n / 2] {
        basis.push(BasisVector {
            idx: [j, j],
            coef: [fixed, Complex64::default()],
            len: 1,
        });
    }
    for j in 1..n / 2 {
        let m = grid.mirror_index(j);
        basis.push(BasisVector {
            idx: [j, m],
            coef: [one * h, one * (sector * h)],
            len: 2,
        });
        basis.push(BasisVector {
            idx: [j, m],
            coef: [i * h, i * (-sector * h)],
            len: 2,
        });
    }
    basis
}

/// Values of the three Klein-group symmetries and the spin components for
/// one state. Antiunitary expectations are `Re <psi|A psi>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryTable {
    pub pt: f64,
    pub sxp: f64,
    pub sxt: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

fn parity(field: &SpinorField, grid: &SpatialGrid) -> SpinorField {
    let n = grid.n();
    let mirror = |c: &[Complex64]| (0..n).map(|j| c[grid.mirror_index(j)]).collect();
    SpinorField {
        up: mirror(&field.up),
        down: mirror(&field.down),
    }
}

fn conjugate(field: &SpinorField) -> SpinorField {
    SpinorField {
        up: field.up.iter().map(|z| z.conj()).collect(),
        down: field.down.iter().map(|z| z.conj()).collect(),
    }
}

/// `PT psi`.
pub fn apply_pt(field: &SpinorField, grid: &SpatialGrid) -> SpinorField {
    conjugate(&parity(field, grid))
}

/// `sigma_x P psi`.
pub fn apply_sxp(field: &SpinorField, grid: &SpatialGrid) -> SpinorField {
    parity(field, grid).sigma_x()
}

/// `sigma_x T psi`.
pub fn apply_sxt(field: &SpinorField) -> SpinorField {
    conjugate(field).sigma_x()
}

/// Expectation values of the Pauli matrices, `(<sx>, <sy>, <sz>)`, without
/// the factor 1/2.
pub fn pauli_expectations(field: &SpinorField, dx: f64) -> [f64; 3] {
    let mut cross = Complex64::default();
    let mut diff = 0.0;
    for (u, d) in field.up.iter().zip(&field.down) {
        cross += u.conj() * d;
        diff += u.norm_sqr() - d.norm_sqr();
    }
    [2.0 * cross.re * dx, 2.0 * cross.im * dx, diff * dx]
}

pub fn symmetry_expectations(state: &SpinorField, grid: &SpatialGrid) -> SymmetryTable {
    let dx = grid.dx();
    let [sx, sy, sz] = pauli_expectations(state, dx);
    SymmetryTable {
        pt: state.inner(&apply_pt(state, grid), dx).re,
        sxp: state.inner(&apply_sxp(state, grid), dx).re,
        sxt: state.inner(&apply_sxt(state), dx).re,
        sx,
        sy,
        sz,
    }
}

/// Puts a (normalized) eigenstate into the gauge `sigma_x T psi = +psi`, then
/// removes the leftover sign by making the largest-magnitude real or imaginary
/// entry of the up component (leftmost on ties) positive.
pub fn fix_gauge(state: &SpinorField, grid: &SpatialGrid) -> Result<SpinorField> {
    state.check_grid(grid)?;
    let dx = grid.dx();
    let norm2 = state.norm_sqr(dx);
    if !(norm2 > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let overlap = state.inner(&apply_sxt(state), dx) / norm2;
    if (overlap.norm() - 1.0).abs() > SYMMETRY_TOL {
        return Err(Error::SymmetryBroken {
            overlap: overlap.norm(),
        });
    }
    // sigma_x T (e^{i a} psi) = e^{-i a} e^{i theta} psi, so a = theta / 2
    let mut fixed = state.scaled(Complex64::from_polar(1.0, 0.5 * overlap.arg()));
    let sign = canonical_sign(&fixed.up);
    if sign < 0.0 {
        fixed.scale(Complex64::new(-1.0, 0.0));
    }
    Ok(fixed)
}

fn canonical_sign(up: &[Complex64]) -> f64 {
    let max_re = up.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let max_im = up.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let (part, max): (fn(&Complex64) -> f64, f64) = if max_re >= max_im {
        (|z| z.re, max_re)
    } else {
        (|z| z.im, max_im)
    };
    let threshold = max * (1.0 - 1e-8);
    up.iter()
        .map(part)
        .find(|v| v.abs() >= threshold)
        .map_or(1.0, f64::signum)
}

/// The four lowest eigenpairs of `H0` in the fixed gauge.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    /// `E11 <= E12 < E21 <= E22`.
    pub energies: [f64; 4],
    pub states: [SpinorField; 4],
    /// Eigenvalue of `sigma_x P` for each state.
    pub sxp_labels: [i8; 4],
    /// `E0 = sum(E_ij) / 4`.
    pub e0: f64,
    pub symmetry: [SymmetryTable; 4],
    pub residuals: [f64; 4],
    grid: SpatialGrid,
    params: ModelParams,
}

impl EigenSolution {
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn energy(&self, level: Level) -> f64 {
        self.energies[level.index()]
    }

    pub fn state(&self, level: Level) -> &SpinorField {
        &self.states[level.index()]
    }

    /// `E12 - E11`.
    pub fn lower_splitting(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// `E22 - E21`.
    pub fn upper_splitting(&self) -> f64 {
        self.energies[3] - self.energies[2]
    }

    /// `<m|sigma_x|n>` for all pairs, in the order 11, 12, 21, 22.
    pub fn sigma_x_matrix(&self) -> [[Complex64; 4]; 4] {
        let dx = self.grid.dx();
        let flipped: Vec<SpinorField> = self.states.iter().map(SpinorField::sigma_x).collect();
        let mut out = [[Complex64::default(); 4]; 4];
        for m in 0..4 {
            for n in 0..4 {
                out[m][n] = self.states[m].inner(&flipped[n], dx);
            }
        }
        out
    }

    /// Writes `label,energy,pt,sxp,sxt,sx,sy,sz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "label,energy,pt,sxp,sxt,sx,sy,sz")?;
        for level in Level::ALL {
            let s = &self.symmetry[level.index()];
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                level.label(),
                fmt_num(self.energy(level)),
                fmt_num(s.pt),
                fmt_num(s.sxp),
                fmt_num(s.sxt),
                fmt_num(s.sx),
                fmt_num(s.sy),
                fmt_num(s.sz)
            )?;
        }
        Ok(())
    }

    /// Writes `x,re_up,im_up,re_down,im_down` for one state.
    pub fn write_wavefunction_csv<W: Write>(&self, level: Level, mut w: W) -> Result<()> {
        writeln!(w, "x,re_up,im_up,re_down,im_down")?;
        let state = self.state(level);
        for (j, x) in self.grid.x().iter().enumerate() {
            let (u, d) = (state.up[j], state.down[j]);
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_num(*x),
                fmt_num(u.re),
                fmt_num(u.im),
                fmt_num(d.re),
                fmt_num(d.im)
            )?;
        }
        Ok(())
    }
}

fn residual(h0: &Hamiltonian, state: &SpinorField, energy: f64) -> f64 {
    let applied = h0.apply(state);
    let diff = applied.combine(
        Complex64::new(1.0, 0.0),
        state,
        Complex64::new(-energy, 0.0),
    );
    diff.norm_sqr(h0.grid.dx()).sqrt()
}

/// Lowest eigenpairs of one symmetry sector as `(energy, state)`.
fn sector_eigenpairs(h0: &Hamiltonian, sector: f64, count: usize) -> Result<Vec<(f64, SpinorField)>> {
    let grid = &h0.grid;
    let n = grid.n();
    let basis = sector_basis(grid, sector);
    let m = h0.sector_matrix(sector, &basis);
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let scale = (2.0 * grid.dx()).sqrt().recip();
    let pairs = order
        .into_iter()
        .take(count)
        .map(|col| {
            let mut up = vec![Complex64::default(); n];
            for (a, b) in basis.iter().enumerate() {
                let y = vectors[(a, col)];
                for (j, c) in b.terms() {
                    up[j] += c * y;
                }
            }
            let down = (0..n)
                .map(|j| up[grid.mirror_index(j)] * sector)
                .collect::<Vec<_>>();
            let mut state = SpinorField { up, down };
            state.scale(Complex64::new(scale, 0.0));
            (values[col], state)
        })
        .collect();
    Ok(pairs)
}

/// Four algebraically smallest eigenpairs of `h0`, sorted ascending and gauge
/// fixed. Within each doublet the sign of `|i1>` is chosen so that
/// `(|i2> - |i1>)/sqrt(2)` sits in the left well.
pub fn lowest_four(h0: &Hamiltonian) -> Result<EigenSolution> {
    let grid = &h0.grid;
    if !grid.is_symmetric() {
        return Err(Error::InvalidGrid(
            "the stationary solver needs a grid centred on x = 0".into(),
        ));
    }
    let mut candidates: Vec<(f64, i8, SpinorField)> = Vec::with_capacity(8);
    for (sector, label) in [(1.0, 1i8), (-1.0, -1i8)] {
        for (e, s) in sector_eigenpairs(h0, sector, 4)? {
            candidates.push((e, label, s));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.truncate(4);

    let mut energies = [0.0; 4];
    let mut sxp_labels = [0i8; 4];
    let mut states: Vec<SpinorField> = Vec::with_capacity(4);
    for (i, (e, label, s)) in candidates.into_iter().enumerate() {
        energies[i] = e;
        sxp_labels[i] = label;
        states.push(fix_gauge(&s, grid)?);
    }
    let half = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for pair in [0, 2] {
        let left = states[pair + 1].combine(half, &states[pair], -half);
        if left.mean_position(grid) > 0.0 {
            states[pair].scale(Complex64::new(-1.0, 0.0));
        }
    }

    let mut residuals = [0.0; 4];
    for i in 0..4 {
        residuals[i] = residual(h0, &states[i], energies[i]);
    }
    if residuals.iter().any(|r| !(*r < RESIDUAL_TOL)) {
        return Err(Error::EigenNotConverged {
            residuals: residuals.to_vec(),
        });
    }
    let symmetry = std::array::from_fn(|i| symmetry_expectations(&states[i], grid));
    let states: [SpinorField; 4] = states.try_into().expect("four states");
    Ok(EigenSolution {
        energies,
        states,
        sxp_labels,
        e0: 0.25 * energies.iter().sum::<f64>(),
        symmetry,
        residuals,
        grid: grid.clone(),
        params: *h0.params(),
    })
}

/// `build_h0` followed by `lowest_four`.
pub fn solve(grid: &SpatialGrid, params: &ModelParams) -> Result<EigenSolution> {
    lowest_four(&build_h0(grid, params)?)
}

/// Localized combinations `|i+-> = (|i2> +- |i1>)/sqrt(2)`.
#[derive(Debug, Clone)]
pub struct LocalizedBasis {
    /// `|1->, |1+>, |2->, |2+>`.
    pub states: [SpinorField; 4],
    /// `<x>` for each state in the same order.
    pub positions: [f64; 4],
    /// `S_xi = <i+-|sigma_x|i+->/2` for `i = 1, 2`.
    pub spin_x: [f64; 2],
    /// Notes about states too close to the barrier to count as localized.
    pub warnings: Vec<String>,
}

impl LocalizedBasis {
    pub fn left_lower(&self) -> &SpinorField {
        &self.states[0]
    }
}

pub fn localized_basis(solution: &EigenSolution) -> LocalizedBasis {
    let grid = solution.grid();
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut states = Vec::with_capacity(4);
    for pair in [0, 2] {
        let (i1, i2) = (&solution.states[pair], &solution.states[pair + 1]);
        states.push(i2.combine(h, i1, -h));
        states.push(i2.combine(h, i1, h));
    }
    let positions: [f64; 4] = std::array::from_fn(|i| states[i].mean_position(grid));
    let dx = grid.dx();
    let spin_x = [0, 2].map(|i| 0.5 * pauli_expectations(&states[i], dx)[0]);
    let threshold = 0.1 * 0.5 * solution.params().well_separation;
    let names = ["|1->", "|1+>", "|2->", "|2+>"];
    let warnings = positions
        .iter()
        .zip(names)
        .filter(|(x, _)| x.abs() < threshold)
        .map(|(x, name)| format!("{name} is delocalized: <x> = {x:.4}"))
        .collect();
    LocalizedBasis {
        states: states.try_into().expect("four states"),
        positions,
        spin_x,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TunnelingPeriod {
    Finite(f64),
    /// Degenerate lower doublet: the left-localized state does not tunnel.
    Frozen,
}

pub fn tunneling_period(solution: &EigenSolution) -> TunnelingPeriod {
    period_from_splitting(solution.lower_splitting())
}

pub fn period_from_splitting(splitting: f64) -> TunnelingPeriod {
    if splitting.abs() < FROZEN_SPLITTING {
        TunnelingPeriod::Frozen
    } else {
        TunnelingPeriod::Finite(2.0 * PI / splitting.abs())
    }
}
