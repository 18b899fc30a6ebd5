//! Numeric oracle: fields valued in a finite Grassmann algebra, sampled on a
//! periodic grid. Independent of the symbolic engine except for the
//! expressions it evaluates.
//!
//! `∂⁻¹` is realized as the mean-zero periodic antiderivative. Grids are
//! oversampled so that products of the band-limited samples stay resolved.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffring::{DiffPoly, Field, Jet, Monomial, MuMode, Side, GRASSMANN_SIDE};
use crate::grassmann::{rational_to_f64, Rational};
use crate::hamiltonian::{
    build_j, build_j_composed, build_j_left, build_p_composed, build_p_expected, build_p_left,
    build_q, build_r, build_r_left, HamiltonianFunctional,
};
use crate::hierarchy::{
    build_flow, build_m, build_recursion_operator, build_time_matrix, derive_levels,
    HierarchyError, HierarchyLevel, U_ORDER,
};
use crate::operator::{NonlocalOperator, OperandSpace};
use crate::superlie::SuperMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("integrand has mean {mean:e} in Grassmann component {mask:#b}")]
    NonZeroMean { mask: u32, mean: f64 },
    #[error("solution norm {norm:e} exceeded the blow-up bound at step {step}")]
    BlowUp { step: usize, norm: f64 },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error("operator application failed: {0}")]
    Operator(String),
}

/// Sign of `θ_a θ_b` relative to `θ_{a|b}` (generators in increasing order).
pub fn mask_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An element of the real Grassmann algebra on `gens` generators, dense in
/// the `2^gens` basis monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannNumber {
    gens: usize,
    coeffs: Vec<f64>,
}

impl GrassmannNumber {
    pub fn zero(gens: usize) -> Self {
        GrassmannNumber {
            gens,
            coeffs: vec![0.0; 1 << gens],
        }
    }

    pub fn scalar(gens: usize, x: f64) -> Self {
        let mut g = GrassmannNumber::zero(gens);
        g.coeffs[0] = x;
        g
    }

    pub fn generator(gens: usize, i: usize) -> Self {
        let mut g = GrassmannNumber::zero(gens);
        g.coeffs[1 << i] = 1.0;
        g
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs[mask as usize]
    }

    pub fn set(&mut self, mask: u32, x: f64) {
        self.coeffs[mask as usize] = x;
    }

    pub fn body(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn add(&self, o: &Self) -> Self {
        GrassmannNumber {
            gens: self.gens,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, x: f64) -> Self {
        GrassmannNumber {
            gens: self.gens,
            coeffs: self.coeffs.iter().map(|a| a * x).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = GrassmannNumber::zero(self.gens);
        for (a, x) in self.coeffs.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            for (b, y) in o.coeffs.iter().enumerate() {
                if *y == 0.0 || a & b != 0 {
                    continue;
                }
                out.coeffs[a | b] += mask_sign(a as u32, b as u32) * x * y;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Nonzero coefficients, keyed by basis monomial.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(m, x)| (m as u32, *x))
    }
}

/// Grassmann-valued samples on a grid, sparse in the basis monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannGrid {
    gens: usize,
    len: usize,
    comps: BTreeMap<u32, Vec<f64>>,
}

impl GrassmannGrid {
    pub fn zero(gens: usize, len: usize) -> Self {
        GrassmannGrid {
            gens,
            len,
            comps: BTreeMap::new(),
        }
    }

    pub fn constant(x: &GrassmannNumber, len: usize) -> Self {
        let mut g = GrassmannGrid::zero(x.gens, len);
        for (m, c) in x.terms() {
            g.comps.insert(m, vec![c; len]);
        }
        g
    }

    pub fn from_component(gens: usize, mask: u32, vals: Vec<f64>) -> Self {
        let mut g = GrassmannGrid::zero(gens, vals.len());
        g.comps.insert(mask, vals);
        g
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, mask: u32) -> Option<&[f64]> {
        self.comps.get(&mask).map(|v| v.as_slice())
    }

    pub fn components(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.comps.iter().map(|(m, v)| (*m, v.as_slice()))
    }

    fn accumulate(&mut self, mask: u32, vals: &[f64], sign: f64) {
        let e = self
            .comps
            .entry(mask)
            .or_insert_with(|| vec![0.0; vals.len()]);
        for (a, b) in e.iter_mut().zip(vals) {
            *a += sign * b;
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &o.comps {
            out.accumulate(*m, v, 1.0);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, v) in &o.comps {
            out.accumulate(*m, v, -1.0);
        }
        out
    }

    pub fn scale(&self, x: f64) -> Self {
        self.map_components(|v| v.iter().map(|a| a * x).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = GrassmannGrid::zero(self.gens, self.len);
        let mut buf = vec![0.0; self.len];
        for (a, x) in &self.comps {
            for (b, y) in &o.comps {
                if a & b != 0 {
                    continue;
                }
                for ((t, u), v) in buf.iter_mut().zip(x).zip(y) {
                    *t = u * v;
                }
                out.accumulate(a | b, &buf, mask_sign(*a, *b));
            }
        }
        out
    }

    pub fn map_components<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Self {
        GrassmannGrid {
            gens: self.gens,
            len: self.len,
            comps: self.comps.iter().map(|(m, v)| (*m, f(v))).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .values()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn at(&self, i: usize) -> GrassmannNumber {
        let mut g = GrassmannNumber::zero(self.gens);
        for (m, v) in &self.comps {
            g.set(*m, v[i]);
        }
        g
    }

    pub fn mean(&self) -> GrassmannNumber {
        let mut g = GrassmannNumber::zero(self.gens);
        for (m, v) in &self.comps {
            g.set(*m, v.iter().sum::<f64>() / self.len as f64);
        }
        g
    }

    /// `∫ dx` over one period.
    pub fn integral(&self, period: f64) -> GrassmannNumber {
        self.mean().scale(period)
    }
}

/// FFT-based derivative and antiderivative on a uniform periodic grid.
#[derive(Clone)]
pub struct Spectral {
    len: usize,
    period: f64,
    origin: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("len", &self.len)
            .field("period", &self.period)
            .finish()
    }
}

impl Spectral {
    pub fn new(len: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let scale = 2.0 * PI / period;
        let wavenumbers = (0..len)
            .map(|k| {
                let k = if k <= len / 2 {
                    k as f64
                } else {
                    k as f64 - len as f64
                };
                k * scale
            })
            .collect();
        Spectral {
            len,
            period,
            origin: 0.0,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            wavenumbers,
        }
    }

    /// The same grid over `[−period/2, period/2)`.
    pub fn centered(len: usize, period: f64) -> Self {
        Spectral {
            origin: -period / 2.0,
            ..Spectral::new(len, period)
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.period / self.len as f64
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len)
            .map(|j| self.origin + j as f64 * self.step())
            .collect()
    }

    fn transform<F: Fn(usize, Complex<f64>) -> Complex<f64>>(&self, v: &[f64], f: F) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|x| Complex::new(*x, 0.0)).collect();
        self.fwd.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            *c = f(k, *c);
        }
        self.inv.process(&mut buf);
        let n = self.len as f64;
        buf.iter().map(|c| c.re / n).collect()
    }

    fn nyquist(&self, k: usize) -> bool {
        self.len.is_multiple_of(2) && k == self.len / 2
    }

    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        self.transform(v, |k, c| {
            if self.nyquist(k) {
                Complex::new(0.0, 0.0)
            } else {
                c * Complex::new(0.0, self.wavenumbers[k])
            }
        })
    }

    /// The mean-zero antiderivative of a mean-zero signal; `Err(mean)` otherwise.
    pub fn antiderivative(&self, v: &[f64], tol: f64) -> Result<Vec<f64>, f64> {
        let mean = v.iter().sum::<f64>() / self.len as f64;
        let size = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if mean.abs() > tol * size {
            return Err(mean);
        }
        Ok(self.projected_antiderivative(v))
    }

    /// Antiderivative of `v − mean(v)`.
    pub fn projected_antiderivative(&self, v: &[f64]) -> Vec<f64> {
        self.transform(v, |k, c| {
            if k == 0 || self.nyquist(k) {
                Complex::new(0.0, 0.0)
            } else {
                c / Complex::new(0.0, self.wavenumbers[k])
            }
        })
    }

    /// `∫_{x₀}^x v` from the left end of the grid, and the total integral.
    /// Accurate for signals that vanish at both ends.
    pub fn antiderivative_from_left(&self, v: &[f64]) -> (Vec<f64>, f64) {
        let mean = v.iter().sum::<f64>() / self.len as f64;
        let prim = self.projected_antiderivative(v);
        let h = self.step();
        let out = prim
            .iter()
            .enumerate()
            .map(|(j, f)| f - prim[0] + mean * h * j as f64)
            .collect();
        (out, mean * self.period)
    }

    /// Zeroes the upper third of the spectrum.
    pub fn dealias(&self, v: &[f64]) -> Vec<f64> {
        let cut = self.len / 3;
        self.transform(v, |k, c| {
            let kk = if k <= self.len / 2 { k } else { self.len - k };
            if kk > cut {
                Complex::new(0.0, 0.0)
            } else {
                c
            }
        })
    }

    pub fn d(&self, g: &GrassmannGrid) -> GrassmannGrid {
        g.map_components(|v| self.derivative(v))
    }

    pub fn inv(&self, g: &GrassmannGrid, tol: f64) -> Result<GrassmannGrid, NumError> {
        let mut out = GrassmannGrid::zero(g.gens, g.len);
        for (m, v) in &g.comps {
            let a = self
                .antiderivative(v, tol)
                .map_err(|mean| NumError::NonZeroMean { mask: *m, mean })?;
            out.comps.insert(*m, a);
        }
        Ok(out)
    }

    /// `∂⁻¹` vanishing at the left end; rejects integrands whose total
    /// integral is not negligible against `∫|v|`.
    pub fn inv_decaying(&self, g: &GrassmannGrid, tol: f64) -> Result<GrassmannGrid, NumError> {
        let h = self.step();
        let mut out = GrassmannGrid::zero(g.gens, g.len);
        for (m, v) in &g.comps {
            let (a, total) = self.antiderivative_from_left(v);
            let size = v.iter().map(|x| x.abs()).sum::<f64>() * h;
            if total.abs() > tol * size.max(1.0) {
                return Err(NumError::NonZeroMean {
                    mask: *m,
                    mean: total / self.period,
                });
            }
            out.comps.insert(*m, a);
        }
        Ok(out)
    }

    /// `½(∫_{−∞}^x − ∫_x^{∞})`, skew-adjoint on decaying signals.
    pub fn inv_symmetric(&self, g: &GrassmannGrid) -> GrassmannGrid {
        g.map_components(|v| {
            let (a, total) = self.antiderivative_from_left(v);
            a.iter().map(|x| x - total / 2.0).collect()
        })
    }

    pub fn inv_projected(&self, g: &GrassmannGrid) -> GrassmannGrid {
        g.map_components(|v| self.projected_antiderivative(v))
    }
}

/// The antiderivative vanishing at `−∞` of a localized integrand;
/// `NonZeroMean` flags one that is not a total derivative.
pub fn numeric_antiderivative(
    g: &GrassmannGrid,
    spectral: &Spectral,
    tol: f64,
) -> Result<GrassmannGrid, NumError> {
    spectral.inv_decaying(g, tol)
}

/// Sampling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Nominal grid.
    pub grid: usize,
    /// Fields are evaluated on `grid · oversample` points so that products
    /// of localized samples stay resolved.
    pub oversample: usize,
    /// Length of the computational box, centred on the origin.
    pub domain: f64,
    /// Width of the Gaussian envelope every field carries.
    pub width: f64,
    /// Number of carrier wavenumbers per field component.
    pub modes: usize,
    /// Spacing of the carrier wavenumbers.
    pub wavenumber: f64,
    /// Grassmann generators available to the odd fields.
    pub gens: usize,
    /// Extra generators left free for nilpotent test directions.
    pub spare_gens: usize,
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            grid: 32,
            oversample: 16,
            domain: 40.0,
            width: 2.5,
            modes: 5,
            wavenumber: 0.5,
            gens: 6,
            spare_gens: 0,
            amplitude: 0.5,
            seed: 1,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<(), NumError> {
        if self.grid < 4 || !self.grid.is_power_of_two() || !self.oversample.is_power_of_two() {
            return Err(NumError::Config(format!(
                "grid {} and oversample {} must be powers of two",
                self.grid, self.oversample
            )));
        }
        if !(self.width > 0.0 && self.domain > 0.0) {
            return Err(NumError::Config("width and domain must be positive".into()));
        }
        // fields must be negligible at the box edge
        let edge = (-(self.domain / 2.0).powi(2) / (2.0 * self.width.powi(2))).exp();
        if edge > 1e-12 {
            return Err(NumError::Config(format!(
                "envelope is {edge:.1e} at the box edge; widen the domain"
            )));
        }
        let nyquist = PI * self.points() as f64 / self.domain;
        if self.modes as f64 * self.wavenumber * 8.0 > nyquist {
            return Err(NumError::Config(format!(
                "carriers do not resolve on {} points",
                self.points()
            )));
        }
        if self.gens + self.spare_gens > 12 {
            return Err(NumError::Config("at most 12 Grassmann generators".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.grid * self.oversample
    }

    pub fn total_gens(&self) -> usize {
        self.gens + self.spare_gens
    }
}

/// Anything that supplies the jets of the six potentials on a grid.
pub trait JetSource: Sync {
    fn gens(&self) -> usize;
    fn spectral(&self) -> &Spectral;
    fn jet(&self, j: Jet) -> GrassmannGrid;
}

type Trig = Vec<(f64, f64)>;

/// Random localized fields `e^{−x²/2σ²} Σ (a cos kx + b sin kx)`: even fields
/// carry only a body, odd fields only degree-one and degree-three souls.
#[derive(Debug)]
pub struct FieldSample {
    config: SampleConfig,
    spectral: Spectral,
    coeffs: BTreeMap<Field, BTreeMap<u32, Trig>>,
    cache: std::sync::Mutex<BTreeMap<Jet, GrassmannGrid>>,
}

fn random_trig(rng: &mut ChaCha8Rng, modes: usize, amp: f64, with_mean: bool) -> Trig {
    (0..=modes)
        .map(|m| {
            if m == 0 && !with_mean {
                return (0.0, 0.0);
            }
            let s = amp / (1.0 + m as f64);
            (
                s * rng.gen_range(-1.0..1.0),
                if m == 0 {
                    0.0
                } else {
                    s * rng.gen_range(-1.0..1.0)
                },
            )
        })
        .collect()
}

fn odd_masks(gens: usize) -> Vec<u32> {
    (1u32..(1 << gens))
        .filter(|m| matches!(m.count_ones(), 1 | 3))
        .collect()
}

impl FieldSample {
    pub fn new(config: &SampleConfig) -> Result<Self, NumError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut coeffs = BTreeMap::new();
        for f in U_ORDER {
            let mut comps = BTreeMap::new();
            if f.is_odd() {
                for m in odd_masks(config.gens) {
                    comps.insert(
                        m,
                        random_trig(&mut rng, config.modes, config.amplitude, true),
                    );
                }
            } else {
                comps.insert(
                    0,
                    random_trig(&mut rng, config.modes, config.amplitude, true),
                );
            }
            coeffs.insert(f, comps);
        }
        Ok(FieldSample {
            spectral: Spectral::centered(config.points(), config.domain),
            config: config.clone(),
            coeffs,
            cache: Default::default(),
        })
    }

    pub fn config(&self) -> &SampleConfig {
        &self.config
    }

    /// Exact `order`-th derivative of one sampled profile.
    fn trig_jet(&self, t: &Trig, order: u16) -> Vec<f64> {
        let s2 = self.config.width.powi(2);
        // a cos kx + b sin kx = Re[(a − ib) e^{ikx}]; d(P e^g) = (P' + P g') e^g
        let terms: Vec<(f64, Vec<Complex<f64>>)> = t
            .iter()
            .enumerate()
            .map(|(m, (a, b))| {
                let k = m as f64 * self.config.wavenumber;
                let mut poly = vec![Complex::new(*a, -*b)];
                for _ in 0..order {
                    let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
                    for (i, c) in poly.iter().enumerate() {
                        if i > 0 {
                            next[i - 1] += c * i as f64;
                        }
                        next[i] += c * Complex::new(0.0, k);
                        next[i + 1] -= c / s2;
                    }
                    poly = next;
                }
                (k, poly)
            })
            .collect();
        self.spectral
            .points()
            .iter()
            .map(|x| {
                let env = (-x * x / (2.0 * s2)).exp();
                terms
                    .iter()
                    .map(|(k, poly)| {
                        let p = poly
                            .iter()
                            .rev()
                            .fold(Complex::new(0.0, 0.0), |acc, c| acc * x + c);
                        (p * Complex::new(0.0, k * x).exp()).re
                    })
                    .sum::<f64>()
                    * env
            })
            .collect()
    }

    /// A fresh random profile on this grid.
    pub fn random_profile(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let t = random_trig(rng, self.config.modes, self.config.amplitude, true);
        self.trig_jet(&t, 0)
    }

    /// The six fields as plain grids.
    pub fn to_state(&self) -> GridState {
        let fields = U_ORDER
            .iter()
            .map(|f| (*f, self.jet(Jet::new(*f, 0))))
            .collect();
        GridState::new(self.spectral.clone(), self.config.total_gens(), fields)
    }
}

impl JetSource for FieldSample {
    fn gens(&self) -> usize {
        self.config.total_gens()
    }

    fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    fn jet(&self, j: Jet) -> GrassmannGrid {
        if let Some(g) = self.cache.lock().unwrap().get(&j) {
            return g.clone();
        }
        let mut g = GrassmannGrid::zero(self.gens(), self.spectral.len());
        if let Some(comps) = self.coeffs.get(&j.field) {
            for (m, t) in comps {
                g.comps.insert(*m, self.trig_jet(t, j.order));
            }
        }
        self.cache.lock().unwrap().insert(j, g.clone());
        g
    }
}

/// Grid values of the six fields, with jets by spectral differentiation.
#[derive(Debug)]
pub struct GridState {
    spectral: Spectral,
    gens: usize,
    fields: BTreeMap<Field, GrassmannGrid>,
    cache: std::sync::Mutex<BTreeMap<Jet, GrassmannGrid>>,
}

impl GridState {
    pub fn new(spectral: Spectral, gens: usize, fields: BTreeMap<Field, GrassmannGrid>) -> Self {
        GridState {
            spectral,
            gens,
            fields,
            cache: Default::default(),
        }
    }

    pub fn field(&self, f: Field) -> GrassmannGrid {
        self.fields
            .get(&f)
            .cloned()
            .unwrap_or_else(|| GrassmannGrid::zero(self.gens, self.spectral.len()))
    }

    pub fn fields(&self) -> &BTreeMap<Field, GrassmannGrid> {
        &self.fields
    }

    /// A copy with `f` replaced by `f + delta`.
    pub fn perturbed(&self, f: Field, delta: &GrassmannGrid) -> GridState {
        let mut fields = self.fields.clone();
        let v = self.field(f).add(delta);
        fields.insert(f, v);
        GridState::new(self.spectral.clone(), self.gens, fields)
    }

    pub fn max_abs(&self) -> f64 {
        self.fields.values().fold(0.0, |m, g| m.max(g.max_abs()))
    }
}

impl JetSource for GridState {
    fn gens(&self) -> usize {
        self.gens
    }

    fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    fn jet(&self, j: Jet) -> GrassmannGrid {
        if let Some(g) = self.cache.lock().unwrap().get(&j) {
            return g.clone();
        }
        let mut g = self.field(j.field);
        for _ in 0..j.order {
            g = self.spectral.d(&g);
        }
        self.cache.lock().unwrap().insert(j, g.clone());
        g
    }
}

/// Numeric value of a scalar (field-free) polynomial in μ.
pub fn scalar_value(s: &DiffPoly, mu: f64) -> f64 {
    s.terms()
        .map(|(m, c)| {
            debug_assert!(m.jets().is_empty(), "scalar expected");
            rational_to_f64(c) * mu.powi(m.mu_power() as i32)
        })
        .sum()
}

/// Numeric value of μ for a mode; symbolic μ is sampled at `fallback`.
pub fn mu_value(mode: &MuMode, fallback: f64) -> f64 {
    match mode {
        MuMode::Symbolic => fallback,
        MuMode::Value(v) => rational_to_f64(v),
    }
}

/// Pointwise evaluation of differential polynomials with monomial caching.
pub struct Evaluator<'a> {
    src: &'a dyn JetSource,
    mu: f64,
    cache: RefCell<BTreeMap<Monomial, GrassmannGrid>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(src: &'a dyn JetSource, mu: f64) -> Self {
        Evaluator {
            src,
            mu,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn source(&self) -> &'a dyn JetSource {
        self.src
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn len(&self) -> usize {
        self.src.spectral().len()
    }

    fn monomial(&self, m: &Monomial) -> GrassmannGrid {
        let mut key = m.clone();
        key = strip_mu(&key);
        if let Some(g) = self.cache.borrow().get(&key) {
            return g.clone();
        }
        let gens = self.src.gens();
        let mut acc = GrassmannGrid::constant(&GrassmannNumber::scalar(gens, 1.0), self.len());
        for (j, e) in key.even_factors() {
            let g = self.src.jet(*j);
            for _ in 0..*e {
                acc = acc.mul(&g);
            }
        }
        for j in key.odd_word().factors() {
            acc = acc.mul(&self.src.jet(*j));
        }
        self.cache.borrow_mut().insert(key, acc.clone());
        acc
    }

    pub fn eval(&self, p: &DiffPoly) -> GrassmannGrid {
        let mut out = GrassmannGrid::zero(self.src.gens(), self.len());
        for (m, c) in p.terms() {
            let k = rational_to_f64(c) * self.mu.powi(m.mu_power() as i32);
            if k == 0.0 {
                continue;
            }
            out = out.add(&self.monomial(m).scale(k));
        }
        out
    }

    pub fn eval_vec(&self, v: &[DiffPoly]) -> Vec<GrassmannGrid> {
        v.iter().map(|p| self.eval(p)).collect()
    }

    /// A λ-dependent matrix at a numeric λ.
    pub fn eval_matrix(&self, m: &SuperMatrix, lambda: f64) -> Vec<Vec<GrassmannGrid>> {
        (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| {
                        let mut acc = GrassmannGrid::zero(self.src.gens(), self.len());
                        for (k, c) in m.get(i, j).terms() {
                            acc = acc.add(&self.eval(c).scale(lambda.powi(k)));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }
}

fn strip_mu(m: &Monomial) -> Monomial {
    if m.mu_power() == 0 {
        return m.clone();
    }
    let jets = m.jets();
    Monomial::from_jets(0, &jets).expect("nonzero monomial").1
}

type GridMatrix = Vec<Vec<GrassmannGrid>>;

fn mat_mul(a: &GridMatrix, b: &GridMatrix) -> GridMatrix {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let gens = a[0][0].gens();
    let len = a[0][0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..k).fold(GrassmannGrid::zero(gens, len), |acc, l| {
                        acc.add(&a[i][l].mul(&b[l][j]))
                    })
                })
                .collect()
        })
        .collect()
}

/// How `∂⁻¹` treats an integrand with nonzero mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InverseMode {
    /// Integrate from `−∞` and reject a non-exact integrand.
    Strict { tol: f64 },
    /// `½(∫_{−∞}^x − ∫_x^{∞})`, skew-adjoint on localized data.
    Symmetric,
    /// Periodic data: drop the mean first.
    Projected,
}

/// Operators acting on grid samples.
pub struct GridSpace<'a> {
    pub ev: Evaluator<'a>,
    pub mode: InverseMode,
}

impl<'a> GridSpace<'a> {
    pub fn new(src: &'a dyn JetSource, mu: f64, mode: InverseMode) -> Self {
        GridSpace {
            ev: Evaluator::new(src, mu),
            mode,
        }
    }

    pub fn apply(
        &self,
        op: &NonlocalOperator,
        v: &[GrassmannGrid],
    ) -> Result<Vec<GrassmannGrid>, NumError> {
        op.apply_in(self, v)
            .map_err(|e| NumError::Operator(e.to_string()))
    }
}

impl OperandSpace for GridSpace<'_> {
    type V = GrassmannGrid;

    fn zero(&self) -> GrassmannGrid {
        GrassmannGrid::zero(self.ev.src.gens(), self.ev.len())
    }

    fn add(&self, a: &GrassmannGrid, b: &GrassmannGrid) -> GrassmannGrid {
        a.add(b)
    }

    fn scale(&self, s: &DiffPoly, v: &GrassmannGrid) -> GrassmannGrid {
        v.scale(scalar_value(s, self.ev.mu))
    }

    fn mul(&self, p: &DiffPoly, v: &GrassmannGrid) -> GrassmannGrid {
        self.ev.eval(p).mul(v)
    }

    fn d(&self, v: &GrassmannGrid) -> GrassmannGrid {
        self.ev.src.spectral().d(v)
    }

    fn inv(&self, v: &GrassmannGrid) -> Result<GrassmannGrid, String> {
        match self.mode {
            InverseMode::Strict { tol } => self
                .ev
                .src
                .spectral()
                .inv_decaying(v, tol)
                .map_err(|e| e.to_string()),
            InverseMode::Symmetric => Ok(self.ev.src.spectral().inv_symmetric(v)),
            InverseMode::Projected => Ok(self.ev.src.spectral().inv_projected(v)),
        }
    }
}

/// Largest coefficient of `a − b` relative to the larger of the two.
pub fn relative_residual(a: &[GrassmannGrid], b: &[GrassmannGrid]) -> (f64, f64) {
    let res = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max(x.sub(y).max_abs()));
    let size = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.max_abs()));
    (res, size)
}

/// One numeric confirmation of a symbolic identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericCheck {
    pub name: String,
    pub seed: u64,
    /// Largest Grassmann coefficient of the residual.
    pub residual: f64,
    /// Largest coefficient of the compared quantities.
    pub scale: f64,
    pub pass: bool,
    pub error: Option<String>,
}

impl NumericCheck {
    fn new(name: &str, seed: u64, residual: f64, scale: f64, tol: f64) -> Self {
        NumericCheck {
            name: name.into(),
            seed,
            residual,
            scale,
            pass: residual < tol * scale.max(1.0),
            error: None,
        }
    }

    fn failed(name: &str, seed: u64, e: impl ToString) -> Self {
        NumericCheck {
            name: name.into(),
            seed,
            residual: f64::INFINITY,
            scale: 0.0,
            pass: false,
            error: Some(e.to_string()),
        }
    }
}

/// Parameters of the numeric identity suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumConfig {
    pub sample: SampleConfig,
    pub samples: usize,
    pub tolerance: f64,
    /// Value of μ used for symbolic-μ expressions.
    pub mu: f64,
    pub skew_trials: usize,
    pub skew_tolerance: f64,
}

impl Default for NumConfig {
    fn default() -> Self {
        NumConfig {
            sample: SampleConfig::default(),
            samples: 10,
            tolerance: 1e-8,
            mu: 0.3,
            skew_trials: 50,
            skew_tolerance: 1e-7,
        }
    }
}

/// Precomputed symbolic artifacts the suite evaluates.
#[derive(Debug, Clone)]
pub struct SymbolicArtifacts {
    pub levels: Vec<HierarchyLevel>,
    pub mu: MuMode,
}

impl SymbolicArtifacts {
    pub fn derive(mu: &MuMode) -> Result<Self, NumError> {
        Ok(SymbolicArtifacts {
            levels: derive_levels(4, mu)?,
            mu: mu.clone(),
        })
    }
}

fn check_leibniz(ev: &Evaluator, seed: u64, tol: f64) -> NumericCheck {
    let sp = ev.source().spectral();
    let probes = [
        crate::diffring::parse("p*q_x*alpha*beta_x + mu*alpha_x*beta*r^2 - s*q_xx").unwrap(),
        crate::diffring::parse("alpha*alpha_x*beta*p + r^3*s_x").unwrap(),
    ];
    let mut res = 0.0f64;
    let mut size = 0.0f64;
    for f in &probes {
        let (r, s) = relative_residual(&[ev.eval(&f.d_total())], &[sp.d(&ev.eval(f))]);
        res = res.max(r);
        size = size.max(s);
    }
    NumericCheck::new(
        "total derivative vs spectral derivative",
        seed,
        res,
        size,
        tol,
    )
}

fn check_antiderivatives(
    art: &SymbolicArtifacts,
    ev: &Evaluator,
    seed: u64,
    tol: f64,
) -> NumericCheck {
    let sp = ev.source().spectral();
    let mut res = 0.0f64;
    let mut size = 0.0f64;
    for l in &art.levels[1..=3] {
        for (integrand, value) in [(l.a_derivative(), &l.a), (l.e_derivative(), &l.e)] {
            let num = match numeric_antiderivative(&ev.eval(&integrand), sp, 1e-10) {
                Ok(x) => x,
                Err(e) => return NumericCheck::failed("a, e by numeric antiderivative", seed, e),
            };
            let exact = ev.eval(value);
            let (r, s) = relative_residual(&[num], &[exact]);
            res = res.max(r);
            size = size.max(s);
        }
    }
    NumericCheck::new("a, e by numeric antiderivative", seed, res, size, tol)
}

fn check_zero_curvature(
    art: &SymbolicArtifacts,
    ev: &Evaluator,
    seed: u64,
    tol: f64,
) -> Vec<NumericCheck> {
    let sp = ev.source().spectral();
    let m = build_m(&art.mu);
    let mut out = Vec::new();
    for n in 1..=2 {
        let name = format!("zero curvature n = {n}");
        let (flow, nm) = match (
            build_flow(n, &art.levels, &art.mu),
            build_time_matrix(n, &art.levels, &art.mu),
        ) {
            (Ok(f), Ok(t)) => (f, t),
            (Err(e), _) | (_, Err(e)) => {
                out.push(NumericCheck::failed(&name, seed, e));
                continue;
            }
        };
        let mt = m.map_poly(|x| flow.time_derivative(x));
        let mut res = 0.0f64;
        let mut size = 0.0f64;
        for lambda in [0.7, -1.3] {
            let mv = ev.eval_matrix(&m, lambda);
            let nv = ev.eval_matrix(&nm, lambda);
            let mtv = ev.eval_matrix(&mt, lambda);
            let mn = mat_mul(&mv, &nv);
            let nmv = mat_mul(&nv, &mv);
            for i in 0..5 {
                for j in 0..5 {
                    let nx = sp.d(&nv[i][j]);
                    let lhs = mtv[i][j].add(&mn[i][j]);
                    let rhs = nx.add(&nmv[i][j]);
                    let (r, s) = relative_residual(&[lhs], &[rhs]);
                    res = res.max(r);
                    size = size.max(s);
                }
            }
        }
        out.push(NumericCheck::new(&name, seed, res, size, tol));
    }
    out
}

fn check_operators(
    art: &SymbolicArtifacts,
    src: &dyn JetSource,
    mu: f64,
    seed: u64,
    tol: f64,
) -> Vec<NumericCheck> {
    let space = GridSpace::new(src, mu, InverseMode::Strict { tol: 1e-9 });
    let ev = &space.ev;
    let m = &art.mu;
    let q = build_q(m);
    let r = build_r(m);
    let rl = build_r_left(m);
    let l = build_recursion_operator(m).expect("L parses");
    let mut out = Vec::new();
    let check = |name: String,
                 lhs: Result<Vec<GrassmannGrid>, NumError>,
                 rhs: Vec<GrassmannGrid>| match lhs {
        Ok(x) => {
            let (res, size) = relative_residual(&x, &rhs);
            NumericCheck::new(&name, seed, res, size, tol)
        }
        Err(e) => NumericCheck::failed(&name, seed, e),
    };
    for n in 1..=2 {
        let flow = match build_flow(n, &art.levels, m) {
            Ok(f) => ev.eval_vec(&f.rhs),
            Err(e) => {
                out.push(NumericCheck::failed(&format!("flows n = {n}"), seed, e));
                continue;
            }
        };
        let v = ev.eval_vec(&art.levels[n + 1].vector());
        let g = ev.eval_vec(&art.levels[n + 1].gradient(m));
        let dh = HamiltonianFunctional::from_levels(n + 1, &art.levels).expect("levels available");
        let dh = ev.eval_vec(&dh.gradient(GRASSMANN_SIDE));
        out.push(check(
            format!("flow = Q v, n = {n}"),
            space.apply(&q, &v),
            flow.clone(),
        ));
        out.push(check(
            format!("v = R G, n = {n}"),
            space.apply(&r, &g),
            v.clone(),
        ));
        out.push(check(
            format!("flow = Q R_left dH/du, n = {n}"),
            space.apply(&rl, &dh).and_then(|x| space.apply(&q, &x)),
            flow.clone(),
        ));
        let vn = ev.eval_vec(&art.levels[n].vector());
        out.push(check(
            format!("v_{} = L v_{}", n + 1, n),
            space.apply(&l, &vn),
            v.clone(),
        ));
    }
    out
}

/// `∫H(u + εφ) − ∫H(u) = ∫ εφ · δH/δu` with a nilpotent `ε`, so the
/// directional derivative is exact. Needs two spare generators.
fn check_variational(
    art: &SymbolicArtifacts,
    sample: &FieldSample,
    mu: f64,
    seed: u64,
    tol: f64,
) -> Vec<NumericCheck> {
    let cfg = sample.config();
    let gens = cfg.total_gens();
    let len = sample.spectral().len();
    let period = sample.spectral().period();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let t1 = GrassmannNumber::generator(gens, cfg.gens);
    let t2 = GrassmannNumber::generator(gens, cfg.gens + 1);
    let state = sample.to_state();
    let mut out = Vec::new();
    for n in 1..=2 {
        let h = HamiltonianFunctional::from_levels(n, &art.levels).expect("levels available");
        let base = Evaluator::new(&state, mu).eval(&h.density).integral(period);
        let grad = h.gradient(GRASSMANN_SIDE);
        let mut res = 0.0f64;
        let mut size = 0.0f64;
        for (i, f) in U_ORDER.iter().enumerate() {
            let eps = if f.is_odd() { t1.clone() } else { t1.mul(&t2) };
            let phi = sample.random_profile(&mut rng);
            let dir = GrassmannGrid::constant(&eps, len)
                .mul(&GrassmannGrid::from_component(gens, 0, phi));
            let moved = state.perturbed(*f, &dir);
            let lhs = Evaluator::new(&moved, mu)
                .eval(&h.density)
                .integral(period)
                .sub(&base);
            let rhs = dir
                .mul(&Evaluator::new(&state, mu).eval(&grad[i]))
                .integral(period);
            res = res.max(lhs.sub(&rhs).max_abs());
            size = size.max(lhs.max_abs()).max(rhs.max_abs());
        }
        out.push(NumericCheck::new(
            &format!("dH_{n}/du by nilpotent directions ({GRASSMANN_SIDE:?})"),
            seed,
            res,
            size,
            tol,
        ));
    }
    out
}

/// All numeric confirmations of the certified identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericReport {
    pub config: NumConfig,
    pub mu: MuMode,
    pub checks: Vec<NumericCheck>,
}

impl NumericReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_relative(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.residual / c.scale.max(1.0))
            .fold(0.0, f64::max)
    }

    /// Worst residual per check name.
    pub fn summary(&self) -> BTreeMap<String, (f64, bool)> {
        let mut out: BTreeMap<String, (f64, bool)> = BTreeMap::new();
        for c in &self.checks {
            let e = out.entry(c.name.clone()).or_insert((0.0, true));
            e.0 = e.0.max(c.residual / c.scale.max(1.0));
            e.1 &= c.pass;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "numeric oracle: {} samples, grid {} x {} on [-{}, {}], {} modes, {} generators, mu {}\n",
            self.config.samples,
            self.config.sample.grid,
            self.config.sample.oversample,
            self.config.sample.domain / 2.0,
            self.config.sample.domain / 2.0,
            self.config.sample.modes,
            self.config.sample.gens,
            self.mu.label()
        );
        for (name, (r, ok)) in self.summary() {
            out.push_str(&format!(
                "  {:<4} {:<48} max relative residual {:.2e}\n",
                if ok { "ok" } else { "FAIL" },
                name,
                r
            ));
        }
        for c in self.checks.iter().filter(|c| c.error.is_some()) {
            out.push_str(&format!(
                "  seed {} {}: {}\n",
                c.seed,
                c.name,
                c.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Evaluates every certified identity on `config.samples` seeded samples.
pub fn numeric_identity_suite(config: &NumConfig, mu: &MuMode) -> Result<NumericReport, NumError> {
    config.sample.validate()?;
    numeric_identity_suite_with(config, &SymbolicArtifacts::derive(mu)?)
}

/// The suite on artifacts obtained elsewhere, e.g. from a level cache.
pub fn numeric_identity_suite_with(
    config: &NumConfig,
    art: &SymbolicArtifacts,
) -> Result<NumericReport, NumError> {
    config.sample.validate()?;
    if art.levels.len() < 5 {
        return Err(NumError::Config(format!(
            "levels through 4 are required, {} given",
            art.levels.len().saturating_sub(1)
        )));
    }
    let mu = &art.mu;
    let muv = mu_value(mu, config.mu);
    let checks: Vec<Vec<NumericCheck>> = (0..config.samples as u64)
        .into_par_iter()
        .map(|k| {
            let seed = config.sample.seed.wrapping_add(k);
            let sc = SampleConfig {
                seed,
                ..config.sample.clone()
            };
            let sample = FieldSample::new(&sc).expect("validated");
            let ev = Evaluator::new(&sample, muv);
            let mut out = vec![check_leibniz(&ev, seed, config.tolerance)];
            out.push(check_antiderivatives(art, &ev, seed, config.tolerance));
            out.extend(check_zero_curvature(art, &ev, seed, config.tolerance));
            out.extend(check_operators(art, &sample, muv, seed, config.tolerance));
            let spare = SampleConfig {
                spare_gens: 2,
                gens: sc.gens.min(6),
                ..sc
            };
            let sample2 = FieldSample::new(&spare).expect("validated");
            out.extend(check_variational(
                art,
                &sample2,
                muv,
                seed,
                config.tolerance,
            ));
            out
        })
        .collect();
    Ok(NumericReport {
        config: config.clone(),
        mu: mu.clone(),
        checks: checks.into_iter().flatten().collect(),
    })
}

/// Result of one skew-adjointness trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewTrial {
    pub seed: u64,
    /// `|⟨v, Jw⟩ + ⟨w, Jv⟩|` relative to the larger pairing.
    pub relative: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewReport {
    pub operator: String,
    pub mu: f64,
    pub tolerance: f64,
    pub trials: Vec<SkewTrial>,
}

impl SkewReport {
    pub fn passed(&self) -> usize {
        self.trials.iter().filter(|t| t.pass).count()
    }

    pub fn pass(&self) -> bool {
        self.passed() == self.trials.len()
    }

    pub fn worst(&self) -> f64 {
        self.trials.iter().map(|t| t.relative).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        format!(
            "skew check {}: {}/{} trials below {:.0e}, worst relative {:.2e}\n",
            self.operator,
            self.passed(),
            self.trials.len(),
            self.tolerance,
            self.worst()
        )
    }
}

fn pairing(v: &[GrassmannGrid], w: &[GrassmannGrid], period: f64) -> GrassmannNumber {
    let gens = v[0].gens();
    v.iter()
        .zip(w)
        .fold(GrassmannNumber::zero(gens), |acc, (a, b)| {
            acc.add(&a.mul(b).integral(period))
        })
}

/// Antisymmetry of the bracket `B(v, w) = ∫ Σ (Op w)ᵢ vᵢ` on random localized
/// test vectors whose components have the parities of `u`, with the symmetric
/// `∂⁻¹`. The flow sits to the left of the gradient, as in
/// `dH/dt = ∫ uₜ · δH/δu` for left derivatives.
pub fn skew_check(
    op: &NonlocalOperator,
    name: &str,
    trials: usize,
    config: &SampleConfig,
    mu: f64,
    tol: f64,
) -> Result<SkewReport, NumError> {
    config.validate()?;
    let results: Vec<Result<SkewTrial, NumError>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let seed = config.seed.wrapping_add(1000 + 3 * k);
            let mk = |s: u64| {
                FieldSample::new(&SampleConfig {
                    seed: s,
                    ..config.clone()
                })
            };
            let base = mk(seed)?;
            let vs = mk(seed + 1)?;
            let ws = mk(seed + 2)?;
            let v: Vec<GrassmannGrid> = U_ORDER.iter().map(|f| vs.jet(Jet::new(*f, 0))).collect();
            let w: Vec<GrassmannGrid> = U_ORDER.iter().map(|f| ws.jet(Jet::new(*f, 0))).collect();
            let space = GridSpace::new(&base, mu, InverseMode::Symmetric);
            let jw = space.apply(op, &w)?;
            let jv = space.apply(op, &v)?;
            let period = base.spectral().period();
            let a = pairing(&jw, &v, period);
            let b = pairing(&jv, &w, period);
            let relative =
                a.add(&b).max_abs() / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE);
            Ok(SkewTrial {
                seed,
                relative,
                pass: relative < tol,
            })
        })
        .collect();
    Ok(SkewReport {
        operator: name.into(),
        mu,
        tolerance: tol,
        trials: results.into_iter().collect::<Result<_, _>>()?,
    })
}

/// The operators whose skewness is probed, by name.
pub fn skew_candidates(mu: &MuMode) -> Vec<(&'static str, NonlocalOperator)> {
    vec![
        ("J (printed)", build_j(mu)),
        ("Q R", build_j_composed(mu)),
        ("Q R_left", build_j_left(mu)),
        ("P (printed)", build_p_expected(mu)),
        ("Q L R", build_p_composed(mu)),
        ("Q L R_left", build_p_left(mu)),
    ]
}

/// Parameters of the time-stepping probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub n: usize,
    pub mu: Rational,
    pub steps: usize,
    pub dt: f64,
    pub grid: usize,
    /// Domain length.
    pub period: f64,
    pub modes: usize,
    pub amplitude: f64,
    pub gens: usize,
    pub seed: u64,
    pub blow_up: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            n: 2,
            mu: Rational::from_integer(0.into()),
            steps: 200,
            dt: 1e-3,
            grid: 64,
            period: 8.0 * PI,
            modes: 3,
            amplitude: 0.1,
            gens: 4,
            seed: 7,
            blow_up: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub config: ProbeConfig,
    /// Relative drift of every coefficient of `∫(2a₂ + e₂)dx`.
    pub drift_density: f64,
    /// The same for `H̃₁ = −2∫(2a₂ + e₂)dx`.
    pub drift_hamiltonian: f64,
    /// Drift of `∫(p² + q²)dx`, which the flow does not conserve; a scale
    /// for how much the data actually moved.
    pub drift_control: f64,
    pub initial: Vec<(u32, f64)>,
    pub final_value: Vec<(u32, f64)>,
    pub max_norm: f64,
}

impl ProbeReport {
    pub fn to_text(&self) -> String {
        format!(
            "conservation probe n = {}, mu = {}, {} steps of {}: drift {:.2e} (density), {:.2e} (H1), {:.2e} (control), max |u| {:.3}\n",
            self.config.n,
            crate::grassmann::format_rational(&self.config.mu),
            self.config.steps,
            self.config.dt,
            self.drift_density,
            self.drift_hamiltonian,
            self.drift_control,
            self.max_norm
        )
    }
}

fn relative_drift(a: &GrassmannNumber, b: &GrassmannNumber) -> f64 {
    let d = b.sub(a).max_abs();
    let s = a.max_abs();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// RK4 integration of the `n`-th flow on Grassmann-valued periodic data,
/// tracking `∫(2a₂ + e₂)dx`.
pub fn conservation_probe(config: &ProbeConfig) -> Result<ProbeReport, NumError> {
    if config.grid < 8 || !config.grid.is_power_of_two() {
        return Err(NumError::Config(format!(
            "grid {} is not a power of two ≥ 8",
            config.grid
        )));
    }
    let mu = MuMode::Value(config.mu.clone());
    let levels = derive_levels(config.n + 1, &mu)?;
    let flow = build_flow(config.n, &levels, &mu)?;
    let density = &levels[2].a.scale_int(2) + &levels[2].e;
    let control = crate::diffring::parse("p^2 + q^2").expect("control density");
    let spectral = Spectral::new(config.grid, config.period);
    let xs = spectral.points();
    let kappa = 2.0 * PI / config.period;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trig = |amp: f64| -> Vec<f64> {
        let t: Vec<(f64, f64)> = (1..=config.modes)
            .map(|_| {
                (
                    amp * rng.gen_range(-1.0..1.0),
                    amp * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        xs.iter()
            .map(|x| {
                t.iter()
                    .enumerate()
                    .map(|(m, (a, b))| {
                        let k = kappa * (m + 1) as f64;
                        a * (k * x).cos() + b * (k * x).sin()
                    })
                    .sum()
            })
            .collect()
    };
    let mut fields = BTreeMap::new();
    for f in U_ORDER {
        let g = if f.is_odd() {
            (0..config.gens).fold(GrassmannGrid::zero(config.gens, config.grid), |acc, i| {
                acc.add(&GrassmannGrid::from_component(
                    config.gens,
                    1 << i,
                    trig(config.amplitude),
                ))
            })
        } else {
            GrassmannGrid::from_component(config.gens, 0, trig(config.amplitude))
        };
        fields.insert(f, g);
    }
    let mu_f = rational_to_f64(&config.mu);
    let integral = |st: &GridState| {
        Evaluator::new(st, mu_f)
            .eval(&density)
            .integral(config.period)
    };
    let rhs = |st: &GridState| -> BTreeMap<Field, GrassmannGrid> {
        let ev = Evaluator::new(st, mu_f);
        U_ORDER
            .iter()
            .zip(&flow.rhs)
            .map(|(f, e)| (*f, ev.eval(e).map_components(|v| spectral.dealias(v))))
            .collect()
    };
    let combine =
        |base: &BTreeMap<Field, GrassmannGrid>, k: &BTreeMap<Field, GrassmannGrid>, h: f64| {
            base.iter()
                .map(|(f, g)| (*f, g.add(&k[f].scale(h))))
                .collect::<BTreeMap<_, _>>()
        };
    let mut state = GridState::new(spectral.clone(), config.gens, fields);
    let i0 = integral(&state);
    let c0 = Evaluator::new(&state, mu_f)
        .eval(&control)
        .integral(config.period);
    let mut max_norm = state.max_abs();
    for step in 0..config.steps {
        let u = state.fields().clone();
        let k1 = rhs(&state);
        let s2 = GridState::new(
            spectral.clone(),
            config.gens,
            combine(&u, &k1, config.dt / 2.0),
        );
        let k2 = rhs(&s2);
        let s3 = GridState::new(
            spectral.clone(),
            config.gens,
            combine(&u, &k2, config.dt / 2.0),
        );
        let k3 = rhs(&s3);
        let s4 = GridState::new(spectral.clone(), config.gens, combine(&u, &k3, config.dt));
        let k4 = rhs(&s4);
        let next: BTreeMap<Field, GrassmannGrid> = u
            .iter()
            .map(|(f, g)| {
                let inc = k1[f]
                    .add(&k2[f].scale(2.0))
                    .add(&k3[f].scale(2.0))
                    .add(&k4[f])
                    .scale(config.dt / 6.0);
                (*f, g.add(&inc))
            })
            .collect();
        state = GridState::new(spectral.clone(), config.gens, next);
        let norm = state.max_abs();
        max_norm = max_norm.max(norm);
        if !norm.is_finite() || norm > config.blow_up {
            return Err(NumError::BlowUp { step, norm });
        }
    }
    let i1 = integral(&state);
    let c1 = Evaluator::new(&state, mu_f)
        .eval(&control)
        .integral(config.period);
    let drift = relative_drift(&i0, &i1);
    Ok(ProbeReport {
        config: config.clone(),
        drift_density: drift,
        drift_hamiltonian: relative_drift(&i0.scale(-2.0), &i1.scale(-2.0)),
        drift_control: relative_drift(&c0, &c1),
        initial: i0.terms().collect(),
        final_value: i1.terms().collect(),
        max_norm,
    })
}

/// Directional derivative sign test: the left derivative of `αβ` in `α` is
/// `β`, read off numerically with a nilpotent direction.
pub fn side_probe(seed: u64) -> Result<Side, NumError> {
    let cfg = SampleConfig {
        gens: 4,
        spare_gens: 1,
        seed,
        ..SampleConfig::default()
    };
    let sample = FieldSample::new(&cfg)?;
    let state = sample.to_state();
    let f = crate::diffring::parse("alpha*beta").unwrap();
    let len = sample.spectral().len();
    let eps = GrassmannGrid::constant(&GrassmannNumber::generator(cfg.total_gens(), cfg.gens), len);
    let moved = state.perturbed(Field::Alpha, &eps);
    let diff = Evaluator::new(&moved, 0.0)
        .eval(&f)
        .sub(&Evaluator::new(&state, 0.0).eval(&f));
    let beta = state.field(Field::Beta);
    let left = eps.mul(&beta);
    Ok(if diff.sub(&left).max_abs() < 1e-12 {
        Side::Left
    } else {
        Side::Right
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffring::parse;

    fn brute_mul(a: u32, b: u32) -> Option<(f64, u32)> {
        if a & b != 0 {
            return None;
        }
        let mut word: Vec<u32> = (0..32).filter(|i| a >> i & 1 == 1).collect();
        word.extend((0..32).filter(|i| b >> i & 1 == 1));
        let mut sign = 1.0;
        for i in 0..word.len() {
            for j in 0..word.len() - 1 - i {
                if word[j] > word[j + 1] {
                    word.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        Some((sign, a | b))
    }

    #[test]
    fn multiplication_table_matches_brute_force() {
        for gens in 1..=4 {
            for a in 0u32..(1 << gens) {
                for b in 0u32..(1 << gens) {
                    let mut x = GrassmannNumber::zero(gens);
                    x.set(a, 1.0);
                    let mut y = GrassmannNumber::zero(gens);
                    y.set(b, 1.0);
                    let z = x.mul(&y);
                    match brute_mul(a, b) {
                        None => assert_eq!(z.max_abs(), 0.0),
                        Some((s, m)) => assert_eq!(z.coeff(m), s),
                    }
                }
            }
        }
    }

    #[test]
    fn generators_anticommute_and_square_to_zero() {
        let a = GrassmannNumber::generator(3, 0);
        let b = GrassmannNumber::generator(3, 2);
        assert_eq!(a.mul(&a).max_abs(), 0.0);
        assert_eq!(a.mul(&b).add(&b.mul(&a)).max_abs(), 0.0);
    }

    fn small() -> SampleConfig {
        SampleConfig {
            oversample: 8,
            gens: 4,
            ..SampleConfig::default()
        }
    }

    #[test]
    fn leibniz_on_grid() {
        let s = FieldSample::new(&small()).unwrap();
        let ev = Evaluator::new(&s, 0.3);
        let f = parse("p*q").unwrap();
        let lhs = ev.eval(&f.d_total());
        let rhs = ev.eval(&parse("p_x*q + p*q_x").unwrap());
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn odd_products_cancel() {
        let s = FieldSample::new(&small()).unwrap();
        let ev = Evaluator::new(&s, 0.0);
        let a = ev.eval(&parse("alpha").unwrap());
        let b = ev.eval(&parse("beta").unwrap());
        assert!(a.mul(&b).add(&b.mul(&a)).max_abs() < 1e-13);
        assert!(a.mul(&a).max_abs() < 1e-13);
    }

    #[test]
    fn antiderivative_roundtrip_and_nonzero_mean() {
        let s = FieldSample::new(&small()).unwrap();
        let ev = Evaluator::new(&s, 0.0);
        let sp = s.spectral();
        let px = ev.eval(&parse("p_x").unwrap());
        let p = ev.eval(&parse("p").unwrap());
        let back = numeric_antiderivative(&px, sp, 1e-10).unwrap();
        assert!(back.sub(&p).max_abs() < 1e-12);
        let pq = ev.eval(&parse("p*p").unwrap());
        assert!(matches!(
            numeric_antiderivative(&pq, sp, 1e-10),
            Err(NumError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn numeric_side_is_left() {
        assert_eq!(side_probe(3).unwrap(), Side::Left);
        assert_eq!(side_probe(3).unwrap(), GRASSMANN_SIDE);
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = ProbeConfig {
            amplitude: 0.0,
            steps: 3,
            ..ProbeConfig::default()
        };
        let r = conservation_probe(&cfg).unwrap();
        assert_eq!(r.max_norm, 0.0);
        assert_eq!(r.drift_density, 0.0);
    }
}
