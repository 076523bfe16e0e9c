//! Dense univariate polynomials over a [`Scalar`], scalar- and vector-valued.
//!
//! Interpolation is Newton/divided-differences, O(n²), which is plenty at the
//! node counts this crate targets.

use crate::scalar::Scalar;

/// Scalar-valued polynomial, coefficients ascending by power, normalized so
/// the leading coefficient is nonzero (the zero polynomial has no coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }.normalized()
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        Poly { coeffs }.normalized()
    }

    /// The monic linear factor `x - root`.
    pub fn linear(root: &T) -> Self {
        Poly {
            coeffs: vec![-root.clone(), T::one()],
        }
    }

    fn normalized(mut self) -> Self {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the convention that the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> T {
        self.coeffs.get(power).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        Poly { coeffs: out }.normalized()
    }

    pub fn scale(&self, factor: &T) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly { coeffs: out }.normalized()
    }

    /// Euclidean division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < divisor.coeffs.len() {
            return (Poly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dn = divisor.coeffs.len();
        let lead = divisor.coeffs[dn - 1].clone();
        let mut quot = vec![T::zero(); rem.len() - dn + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dn - 1].clone() / lead.clone();
            quot[k] = q.clone();
            for j in 0..dn {
                rem[k + j] = rem[k + j].clone() - q.clone() * divisor.coeffs[j].clone();
            }
        }
        (
            Poly { coeffs: quot }.normalized(),
            Poly { coeffs: rem }.normalized(),
        )
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * T::from_int(i as i64))
            .collect();
        Poly { coeffs }.normalized()
    }

    /// Interpolating polynomial through distinct points (Newton form expanded
    /// to monomial coefficients). Panics on duplicate nodes.
    pub fn newton_interpolate(points: &[(T, T)]) -> Self {
        let n = points.len();
        assert!(n > 0, "need at least one interpolation point");
        // Divided-difference table, in place over one column.
        let mut dd: Vec<T> = points.iter().map(|(_, y)| y.clone()).collect();
        for level in 1..n {
            for i in (level..n).rev() {
                let dx = points[i].0.clone() - points[i - level].0.clone();
                assert!(!dx.is_zero(), "duplicate interpolation node");
                dd[i] = (dd[i].clone() - dd[i - 1].clone()) / dx;
            }
        }
        // Accumulate sum of dd[i] * prod_{j<i} (x - x_j).
        let mut result = Poly::zero();
        let mut basis = Poly::constant(T::one());
        for (i, d) in dd.iter().enumerate() {
            result = result.add(&basis.scale(d));
            if i + 1 < n {
                basis = basis.mul(&Poly::linear(&points[i].0));
            }
        }
        result
    }
}

/// Vector-valued polynomial: `coeffs[j]` is the length-`width` coefficient of
/// x^j. Trailing all-zero coefficients are kept (callers track the degree
/// bound); `degree()` reports the trimmed degree.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoly<T> {
    coeffs: Vec<Vec<T>>,
    width: usize,
}

impl<T: Scalar> VectorPoly<T> {
    pub fn zero(width: usize) -> Self {
        VectorPoly {
            coeffs: Vec::new(),
            width,
        }
    }

    pub fn from_coeffs(coeffs: Vec<Vec<T>>, width: usize) -> Self {
        for c in &coeffs {
            assert_eq!(c.len(), width, "coefficient width mismatch");
        }
        VectorPoly { coeffs, width }
    }

    /// Builds from one scalar polynomial per component.
    pub fn from_components(components: &[Poly<T>]) -> Self {
        let width = components.len();
        let len = components.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
        let mut coeffs = vec![vec![T::zero(); width]; len];
        for (c, p) in components.iter().enumerate() {
            for (j, v) in p.coeffs().iter().enumerate() {
                coeffs[j][c] = v.clone();
            }
        }
        VectorPoly { coeffs, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    /// Trimmed degree: highest power with a nonzero coefficient vector.
    pub fn degree(&self) -> usize {
        let mut deg = 0;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.iter().any(|v| !v.is_zero()) {
                deg = j;
            }
        }
        deg
    }

    pub fn component(&self, index: usize) -> Poly<T> {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c[index].clone()).collect())
    }

    pub fn eval(&self, x: &T) -> Vec<T> {
        let mut acc = vec![T::zero(); self.width];
        for c in self.coeffs.iter().rev() {
            for (a, ci) in acc.iter_mut().zip(c.iter()) {
                *a = a.clone() * x.clone() + ci.clone();
            }
        }
        acc
    }

    /// Adds `vector ⊗ scalar_poly` into self.
    pub fn add_outer(&mut self, vector: &[T], scalar_poly: &Poly<T>) {
        assert_eq!(vector.len(), self.width);
        if self.coeffs.len() < scalar_poly.coeffs().len() {
            self.coeffs
                .resize(scalar_poly.coeffs().len(), vec![T::zero(); self.width]);
        }
        for (j, s) in scalar_poly.coeffs().iter().enumerate() {
            for (acc, v) in self.coeffs[j].iter_mut().zip(vector.iter()) {
                *acc = acc.clone() + v.clone() * s.clone();
            }
        }
    }

    /// Multiplies every component by a scalar polynomial.
    pub fn mul_scalar_poly(&self, p: &Poly<T>) -> Self {
        if self.coeffs.is_empty() || p.is_zero() {
            return VectorPoly::zero(self.width);
        }
        let mut out = vec![vec![T::zero(); self.width]; self.coeffs.len() + p.coeffs().len() - 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            for (j, s) in p.coeffs().iter().enumerate() {
                for (o, v) in out[i + j].iter_mut().zip(c.iter()) {
                    *o = o.clone() + v.clone() * s.clone();
                }
            }
        }
        VectorPoly {
            coeffs: out,
            width: self.width,
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.width, other.width);
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs
                .resize(other.coeffs.len(), vec![T::zero(); self.width]);
        }
        for (j, c) in other.coeffs.iter().enumerate() {
            for (a, v) in self.coeffs[j].iter_mut().zip(c.iter()) {
                *a = a.clone() + v.clone();
            }
        }
    }

    /// Newton interpolation through distinct nodes with vector values.
    #[allow(clippy::needless_range_loop)] // two rows of the table are live at once
    pub fn newton_interpolate(points: &[(T, Vec<T>)]) -> Self {
        let n = points.len();
        assert!(n > 0);
        let width = points[0].1.len();
        let mut dd: Vec<Vec<T>> = points.iter().map(|(_, y)| y.clone()).collect();
        for level in 1..n {
            for i in (level..n).rev() {
                let dx = points[i].0.clone() - points[i - level].0.clone();
                assert!(!dx.is_zero(), "duplicate interpolation node");
                for c in 0..width {
                    dd[i][c] = (dd[i][c].clone() - dd[i - 1][c].clone()) / dx.clone();
                }
            }
        }
        let mut result = VectorPoly::zero(width);
        let mut basis = Poly::constant(T::one());
        for (i, d) in dd.iter().enumerate() {
            result.add_outer(d, &basis);
            if i + 1 < n {
                basis = basis.mul(&Poly::linear(&points[i].0));
            }
        }
        result
    }
}
