//! Physical constants, periodic lattices and second-order discrete calculus.
//!
//! Sites are stored row-major over `(axis 0, axis 1)`: the flat index of
//! `(i0, i1)` is `i0 * n1 + i1`, so axis 1 is contiguous. A 1D lattice is the
//! special case `n1 = 1`. Site `(i0, i1)` sits at `x = i0 * dx0`, `y = i1 * dx1`.
//!
//! Every stencil wraps periodically. The first derivative is the central
//! difference `(f[k+1] - f[k-1]) / 2dx`; the Laplacian is the compact
//! `(f[k+1] - 2 f[k] + f[k-1]) / dx^2` per axis. The central difference is
//! antisymmetric, so `integrate(partial(f))` vanishes to round-off.

use std::ops::{Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest site count allowed along any axis.
pub const MIN_POINTS: usize = 8;

/// `hbar`, `m`, `e` and `c` in whatever unit system the caller picked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge_e: f64,
    pub light_c: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64, charge_e: f64, light_c: f64) -> Result<Self> {
        let c = Self {
            hbar,
            mass,
            charge_e,
            light_c,
        };
        c.validate()?;
        Ok(c)
    }

    /// `hbar = m = e = c = 1`.
    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            charge_e: 1.0,
            light_c: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("charge_e", self.charge_e),
            ("light_c", self.light_c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConstants(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Coupling `e / (hbar c)` of the covariant derivative.
    #[inline]
    pub fn coupling(&self) -> f64 {
        self.charge_e / (self.hbar * self.light_c)
    }

    /// Converts `arg psi` (radians) into the phase `S` in units of `hbar c / e`.
    #[inline]
    pub fn phase_unit(&self) -> f64 {
        self.hbar * self.light_c / self.charge_e
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

/// Uniform periodic lattice in one or two dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    dim: usize,
    points: [usize; 2],
    extents: [f64; 2],
}

impl Lattice {
    pub fn new(points: &[usize], extents: &[f64]) -> Result<Self> {
        let dim = points.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidLattice(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if extents.len() != dim {
            return Err(Error::InvalidLattice(format!(
                "{dim} point counts but {} extents",
                extents.len()
            )));
        }
        let mut p = [1usize; 2];
        let mut l = [1.0f64; 2];
        for a in 0..dim {
            if points[a] < MIN_POINTS {
                return Err(Error::InvalidLattice(format!(
                    "axis {a} needs at least {MIN_POINTS} points, got {}",
                    points[a]
                )));
            }
            if !(extents[a].is_finite() && extents[a] > 0.0) {
                return Err(Error::InvalidLattice(format!(
                    "axis {a} extent must be positive, got {}",
                    extents[a]
                )));
            }
            p[a] = points[a];
            l[a] = extents[a];
        }
        Ok(Self {
            dim,
            points: p,
            extents: l,
        })
    }

    pub fn line(n: usize, length: f64) -> Result<Self> {
        Self::new(&[n], &[length])
    }

    pub fn square(n: usize, length: f64) -> Result<Self> {
        Self::new(&[n, n], &[length, length])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    #[inline]
    pub fn extent(&self, axis: usize) -> f64 {
        self.extents[axis]
    }

    #[inline]
    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.points[axis] as f64
    }

    /// Smallest spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total number of sites.
    #[inline]
    pub fn len(&self) -> usize {
        self.points[0] * self.points[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `prod dx_a`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Total volume `prod L_a`.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.extents[a]).product()
    }

    /// Flat-index stride of `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            self.points[1]
        } else {
            1
        }
    }

    #[inline]
    pub fn index(&self, coords: [usize; 2]) -> usize {
        coords[0] * self.points[1] + coords[1]
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 2] {
        [index / self.points[1], index % self.points[1]]
    }

    /// Site reached from `index` by moving `offset` sites along `axis`, wrapping.
    #[inline]
    pub fn shift(&self, index: usize, axis: usize, offset: isize) -> usize {
        let mut c = self.coords(index);
        let n = self.points[axis] as isize;
        c[axis] = (c[axis] as isize + offset).rem_euclid(n) as usize;
        self.index(c)
    }

    /// Physical coordinate of a site along `axis`.
    #[inline]
    pub fn coordinate(&self, index: usize, axis: usize) -> f64 {
        self.coords(index)[axis] as f64 * self.spacing(axis)
    }

    /// Physical position of a site; unused axes read as zero.
    #[inline]
    pub fn position(&self, index: usize) -> [f64; 2] {
        let c = self.coords(index);
        let mut p = [0.0; 2];
        for a in 0..self.dim {
            p[a] = c[a] as f64 * self.spacing(a);
        }
        p
    }

    /// Same lattice with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let pts: Vec<usize> = (0..self.dim).map(|a| self.points[a] * factor).collect();
        Self::new(&pts, &self.extents[..self.dim])
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.dim {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            })
        }
    }
}

/// Central difference of raw site values along `axis`.
pub(crate) fn central_diff<T>(lattice: &Lattice, values: &[T], axis: usize) -> Vec<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = lattice.points(axis);
    let stride = lattice.stride(axis);
    let inv = 0.5 / lattice.spacing(axis);
    (0..values.len())
        .map(|k| {
            let i = (k / stride) % n;
            let fwd = if i + 1 == n { k + stride - n * stride } else { k + stride };
            let bwd = if i == 0 { k + (n - 1) * stride } else { k - stride };
            (values[fwd] - values[bwd]) * inv
        })
        .collect()
}

/// Compact second difference of raw site values along `axis`.
pub(crate) fn second_diff<T>(lattice: &Lattice, values: &[T], axis: usize) -> Vec<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = lattice.points(axis);
    let stride = lattice.stride(axis);
    let inv = 1.0 / (lattice.spacing(axis) * lattice.spacing(axis));
    (0..values.len())
        .map(|k| {
            let i = (k / stride) % n;
            let fwd = if i + 1 == n { k + stride - n * stride } else { k + stride };
            let bwd = if i == 0 { k + (n - 1) * stride } else { k - stride };
            ((values[fwd] - values[k]) - (values[k] - values[bwd])) * inv
        })
        .collect()
}

/// One real value per lattice site.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    lattice: Lattice,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidLattice(format!(
                "expected {} values, got {}",
                lattice.len(),
                values.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub(crate) fn from_vec(lattice: Lattice, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), lattice.len());
        Self { lattice, values }
    }

    pub fn constant(lattice: Lattice, value: f64) -> Self {
        Self {
            lattice,
            values: vec![value; lattice.len()],
        }
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self::constant(lattice, 0.0)
    }

    /// Samples `f(position)` at every site.
    pub fn from_fn(lattice: Lattice, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..lattice.len()).map(|k| f(lattice.position(k))).collect();
        Self { lattice, values }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.lattice, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination; both fields must share a lattice.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.lattice, other.lattice);
        Self::from_vec(
            self.lattice,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a / b)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// An `n`-vector of reals per site, stored as one scalar field per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidLattice("vector field needs components".into()))?;
        let lattice = *first.lattice();
        if components.len() != lattice.dim() {
            return Err(Error::InvalidLattice(format!(
                "{} components on a {}-dimensional lattice",
                components.len(),
                lattice.dim()
            )));
        }
        if components.iter().any(|c| *c.lattice() != lattice) {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self { components })
    }

    pub(crate) fn from_components(components: Vec<ScalarField>) -> Self {
        debug_assert_eq!(components.len(), components[0].lattice().dim());
        Self { components }
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            components: (0..lattice.dim()).map(|_| ScalarField::zeros(lattice)).collect(),
        }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        Self {
            components: (0..lattice.dim())
                .map(|a| ScalarField::from_fn(lattice, |x| f(x)[a]))
                .collect(),
        }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        self.components[0].lattice()
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut ScalarField {
        &mut self.components[axis]
    }

    /// Site value padded to two components.
    #[inline]
    pub fn at(&self, index: usize) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (a, c) in self.components.iter().enumerate() {
            v[a] = c.get(index);
        }
        v
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Copy) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.zip_map(b, f))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.scaled(factor)).collect(),
        }
    }

    /// Multiplies every component by a scalar field.
    pub fn times(&self, s: &ScalarField) -> Self {
        Self {
            components: self.components.iter().map(|c| c.mul(s)).collect(),
        }
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField {
        let mut out = ScalarField::zeros(*self.lattice());
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((o, &x), &y) in out.values.iter_mut().zip(&a.values).zip(&b.values) {
                *o += x * y;
            }
        }
        out
    }

    pub fn norm_squared(&self) -> ScalarField {
        self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }
}

/// One complex value per lattice site.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidLattice(format!(
                "expected {} values, got {}",
                lattice.len(),
                values.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub(crate) fn from_vec(lattice: Lattice, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), lattice.len());
        Self { lattice, values }
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            lattice,
            values: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..lattice.len()).map(|k| f(lattice.position(k))).collect();
        Self { lattice, values }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_vec(self.lattice, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `|psi|^2` per site.
    pub fn norm_sqr(&self) -> ScalarField {
        ScalarField::from_vec(self.lattice, self.values.iter().map(|v| v.norm_sqr()).collect())
    }

    pub fn real(&self) -> ScalarField {
        ScalarField::from_vec(self.lattice, self.values.iter().map(|v| v.re).collect())
    }

    pub fn imag(&self) -> ScalarField {
        ScalarField::from_vec(self.lattice, self.values.iter().map(|v| v.im).collect())
    }

    /// Central difference along `axis`.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        self.lattice.check_axis(axis)?;
        Ok(Self::from_vec(
            self.lattice,
            central_diff(&self.lattice, &self.values, axis),
        ))
    }

    /// Compact Laplacian.
    pub fn laplacian(&self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for a in 0..self.lattice.dim() {
            for (o, v) in out.iter_mut().zip(second_diff(&self.lattice, &self.values, a)) {
                *o += v;
            }
        }
        Self::from_vec(self.lattice, out)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// First non-finite site, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    }
}

/// Central difference `(f[k+1] - f[k-1]) / 2dx` along `axis`.
pub fn partial(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    field.lattice.check_axis(axis)?;
    Ok(ScalarField::from_vec(
        field.lattice,
        central_diff(&field.lattice, &field.values, axis),
    ))
}

/// Compact 1-2-1 Laplacian summed over axes.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let lat = field.lattice;
    let mut out = vec![0.0; lat.len()];
    for a in 0..lat.dim() {
        for (o, v) in out.iter_mut().zip(second_diff(&lat, &field.values, a)) {
            *o += v;
        }
    }
    ScalarField::from_vec(lat, out)
}

/// Rectangle rule `sum(f) * prod(dx)`.
pub fn integrate(field: &ScalarField) -> f64 {
    field.values.iter().sum::<f64>() * field.lattice.cell_volume()
}

/// `sqrt(integrate(f^2))`.
pub fn l2_norm(field: &ScalarField) -> f64 {
    (field.values.iter().map(|v| v * v).sum::<f64>() * field.lattice.cell_volume()).sqrt()
}

pub fn gradient(field: &ScalarField) -> VectorField {
    let lat = field.lattice;
    VectorField::from_components(
        (0..lat.dim())
            .map(|a| ScalarField::from_vec(lat, central_diff(&lat, &field.values, a)))
            .collect(),
    )
}

/// Central-difference divergence.
pub fn divergence(v: &VectorField) -> ScalarField {
    let lat = *v.lattice();
    let mut out = vec![0.0; lat.len()];
    for a in 0..lat.dim() {
        for (o, d) in out
            .iter_mut()
            .zip(central_diff(&lat, v.component(a).values(), a))
        {
            *o += d;
        }
    }
    ScalarField::from_vec(lat, out)
}

/// `divergence(gradient(f))`: the wide (2dx) Laplacian that is the exact
/// discrete adjoint pairing of the central difference with itself.
pub fn wide_laplacian(field: &ScalarField) -> ScalarField {
    divergence(&gradient(field))
}

/// Relative L2 distance `|a - b| / |b|`; falls back to absolute when `b` vanishes.
pub fn relative_l2(a: &ScalarField, b: &ScalarField) -> f64 {
    let num = l2_norm(&a.sub(b));
    let den = l2_norm(b);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}
