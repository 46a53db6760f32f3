//! Geometry of the rooted Cayley tree of order `k`.
//!
//! A vertex is addressed by its path from the root, `(i_1, ..., i_n)` with
//! every digit in `1..=k`; the root is the empty path. Levels are enumerated
//! in lexicographic ("forward") order, so the first vertex of `W_n` is
//! `(1, ..., 1)` and the last is `(k, ..., k)`. The backward order is the exact
//! reverse.
//!
//! [`ball`] concatenates the levels `W_0, ..., W_n` and is the canonical
//! vertex → tensor-leg map used by every dense construction in the crate.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// Address of a vertex: the sequence of child indices from the root.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_digits(digits: &[u8]) -> Result<Self, Error> {
        if digits.contains(&0) {
            return Err(Error::InvalidVertex(format_digits(digits)));
        }
        Ok(Vertex(digits.to_vec()))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<Vertex> {
        let (_, rest) = self.0.split_last()?;
        Some(Vertex(rest.to_vec()))
    }

    /// The `i`-th direct successor `(x, i)`, 1-based.
    pub fn child(&self, i: u8) -> Vertex {
        debug_assert!(i >= 1);
        let mut digits = self.0.clone();
        digits.push(i);
        Vertex(digits)
    }

    /// True when every digit is a valid child index for order `k`.
    pub fn fits_order(&self, k: usize) -> bool {
        self.0.iter().all(|&d| (d as usize) <= k)
    }
}

fn format_digits(digits: &[u8]) -> String {
    let mut out = String::new();
    for (i, d) in digits.iter().enumerate() {
        if i > 0 {
            out.push('.');
        }
        out.push_str(&d.to_string());
    }
    out
}

/// Dot-separated digits, `"1.2.1"`; the root prints as the empty string.
impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digits(&self.0))
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("Vertex(root)")
        } else {
            write!(f, "Vertex({self})")
        }
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Vertex::root());
        }
        let digits = s
            .split('.')
            .map(|part| match part.parse::<u8>() {
                Ok(d) if d >= 1 => Ok(d),
                _ => Err(Error::InvalidVertex(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Vertex(digits))
    }
}

/// The vertices at distance `level` from the root, in forward order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSet {
    level: usize,
    vertices: Vec<Vertex>,
}

impl LevelSet {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn forward(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn backward(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().rev()
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.vertices
    }
}

/// `W_n` for the tree of order `k`.
pub fn level_set(n: usize, k: usize) -> LevelSet {
    let mut vertices = alloc::vec![Vertex::root()];
    for _ in 0..n {
        vertices = vertices.iter().flat_map(|x| successors(x, k)).collect();
    }
    LevelSet { level: n, vertices }
}

/// `S(x)` in forward order `((x,1), ..., (x,k))`.
pub fn successors(x: &Vertex, k: usize) -> Vec<Vertex> {
    (1..=k).map(|i| x.child(i as u8)).collect()
}

/// `Λ_n` as the concatenation of `W_0, ..., W_n`, each in forward order.
pub fn ball(n: usize, k: usize) -> Vec<Vertex> {
    (0..=n).flat_map(|m| level_set(m, k).into_vec()).collect()
}

/// `|Λ_n|` without materializing it.
pub fn ball_size(n: usize, k: usize) -> usize {
    (0..=n).map(|m| k.pow(m as u32)).sum()
}
