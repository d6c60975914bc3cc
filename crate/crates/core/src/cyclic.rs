//! Periodic sequences on the integer and half-integer lattices.
//!
//! A closed polygon with `n` nodes carries two kinds of discrete data: values
//! at nodes `i ∈ ℤ` and values at edges `i + ½ ∈ ℤ + ½`. Both are stored as
//! arrays of length `n` with all access taken modulo `n`:
//!
//! * [`NodeSeq`] slot `i` holds the value at node `i`;
//! * [`EdgeSeq`] slot `k` holds the value at edge `k + ½`.
//!
//! The forward difference of a node sequence lives on edges,
//! `g′(i+½) = g(i+1) − g(i)`, and the difference of an edge sequence lives on
//! nodes, `h′(i) = h(i+½) − h(i−½)`. Composing the two gives `g″`.

use std::ops::{Index, Sub};

use crate::error::{Error, Result};

/// Relative tolerances shared by every sign predicate and identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Dead-band for strict sign predicates, relative to a magnitude scale.
    pub tol_sign: f64,
    /// Bound for relative residuals of identity checks.
    pub tol_residual: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            tol_sign: 1e-9,
            tol_residual: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn new(tol_sign: f64, tol_residual: f64) -> Result<Self> {
        let ok = |t: f64| t > 0.0 && t < 1.0;
        if !ok(tol_sign) || !ok(tol_residual) {
            return Err(Error::InvalidInput(format!(
                "tolerances must lie in (0, 1): tol_sign = {tol_sign}, tol_residual = {tol_residual}"
            )));
        }
        Ok(ToleranceConfig {
            tol_sign,
            tol_residual,
        })
    }
}

#[inline]
fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

macro_rules! cyclic_seq {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name<T> {
            values: Vec<T>,
        }

        impl<T> $name<T> {
            /// Wraps `values`; the period is `values.len()` and must be at least 3.
            pub fn new(values: Vec<T>) -> Result<Self> {
                if values.len() < 3 {
                    return Err(Error::PeriodTooShort(values.len()));
                }
                Ok($name { values })
            }

            pub fn from_fn(n: usize, f: impl FnMut(usize) -> T) -> Result<Self> {
                Self::new((0..n).map(f).collect())
            }

            #[inline]
            pub fn n(&self) -> usize {
                self.values.len()
            }

            #[inline]
            pub fn values(&self) -> &[T] {
                &self.values
            }

            pub fn into_values(self) -> Vec<T> {
                self.values
            }

            pub fn iter(&self) -> std::slice::Iter<'_, T> {
                self.values.iter()
            }

            /// Slot access with periodic wrap-around.
            #[inline]
            pub fn at(&self, slot: i64) -> &T {
                &self.values[wrap(slot, self.values.len())]
            }

            pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> $name<U> {
                $name { values: self.values.iter().map(f).collect() }
            }

            /// Cyclic relabeling: slot `k` of the result is slot `k + shift` of `self`.
            pub fn rotated(&self, shift: i64) -> Self
            where
                T: Clone,
            {
                let n = self.n();
                $name {
                    values: (0..n).map(|k| self.values[wrap(k as i64 + shift, n)].clone()).collect(),
                }
            }
        }

        impl<T> Index<usize> for $name<T> {
            type Output = T;
            #[inline]
            fn index(&self, slot: usize) -> &T {
                &self.values[slot % self.values.len()]
            }
        }
    };
}

cyclic_seq!(
    /// Values at integer indices `i`, stored in slot `i mod n`.
    NodeSeq
);
cyclic_seq!(
    /// Values at half-integer indices `k + ½`, stored in slot `k mod n`.
    EdgeSeq
);

impl<T> NodeSeq<T> {
    /// Reinterprets node slots as edge slots without moving data: node `i`
    /// becomes edge `i + ½`.
    pub fn into_edges(self) -> EdgeSeq<T> {
        EdgeSeq { values: self.values }
    }
}

impl<T> EdgeSeq<T> {
    /// Reinterprets edge slots as node slots without moving data: edge `k + ½`
    /// becomes node `k`.
    pub fn into_nodes(self) -> NodeSeq<T> {
        NodeSeq { values: self.values }
    }
}

/// `g′(i+½) = g(i+1) − g(i)`.
pub fn node_diff<V: Copy + Sub<Output = V>>(g: &NodeSeq<V>) -> EdgeSeq<V> {
    let n = g.n();
    EdgeSeq {
        values: (0..n).map(|k| g.values[(k + 1) % n] - g.values[k]).collect(),
    }
}

/// `h′(i) = h(i+½) − h(i−½)`.
pub fn edge_diff<V: Copy + Sub<Output = V>>(h: &EdgeSeq<V>) -> NodeSeq<V> {
    let n = h.n();
    NodeSeq {
        values: (0..n).map(|i| h.values[i] - h.values[(i + n - 1) % n]).collect(),
    }
}

/// Second difference `g″(i) = g(i+1) − 2g(i) + g(i−1)`.
pub fn second_diff<V: Copy + Sub<Output = V>>(g: &NodeSeq<V>) -> NodeSeq<V> {
    edge_diff(&node_diff(g))
}

/// Strict sign with a relative dead-band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// `+1` above `tol_sign·scale`, `−1` below `−tol_sign·scale`, `0` in between.
pub fn sign_of(value: f64, scale: f64, cfg: &ToleranceConfig) -> Sign {
    let band = cfg.tol_sign * scale.abs();
    if value > band {
        Sign::Positive
    } else if value < -band {
        Sign::Negative
    } else {
        Sign::Zero
    }
}

/// Strict sign changes around a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignChanges {
    pub count: usize,
    /// Slot `j` is listed when entries `j` and `j + 1 (mod n)` have opposite signs.
    pub locations: Vec<usize>,
}

/// Scans a cyclic sequence for strict sign changes, using the largest
/// magnitude in the sequence as the dead-band scale.
pub fn cyclic_sign_changes(values: &[f64], cfg: &ToleranceConfig) -> Result<SignChanges> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    cyclic_sign_changes_scaled(values, scale, cfg)
}

/// As [`cyclic_sign_changes`] with an explicit dead-band scale.
pub fn cyclic_sign_changes_scaled(
    values: &[f64],
    scale: f64,
    cfg: &ToleranceConfig,
) -> Result<SignChanges> {
    let signs = strict_signs(values, scale, cfg)?;
    let n = signs.len();
    let locations: Vec<usize> = (0..n).filter(|&j| signs[j] != signs[(j + 1) % n]).collect();
    Ok(SignChanges {
        count: locations.len(),
        locations,
    })
}

/// Signs of every entry, failing on the first one inside the dead-band.
pub fn strict_signs(values: &[f64], scale: f64, cfg: &ToleranceConfig) -> Result<Vec<Sign>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| match sign_of(v, scale, cfg) {
            Sign::Zero => Err(Error::DegenerateSign { index }),
            s => Ok(s),
        })
        .collect()
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
