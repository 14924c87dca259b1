//! Enumeration of permutation-symmetric Pauli-string classes.
//!
//! A class is fixed by how many sites carry `X`, `Y` and `Z`; the rest carry
//! the identity. The symmetric operator space has one basis element per
//! class, the normalized sum of all strings in it.

use crate::error::{Error, Result};

/// Pauli content of a string class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Counts {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Counts {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }

    pub fn weight(&self) -> usize {
        self.x + self.y + self.z
    }

    /// Identity sites in an `n`-spin string.
    pub fn identities(&self, n: usize) -> usize {
        n - self.weight()
    }

    /// Whether `x + y` is even; the model never mixes the two parities.
    pub fn is_even(&self) -> bool {
        (self.x + self.y) % 2 == 0
    }
}

#[derive(Debug, Clone)]
pub struct PermBasis {
    n: usize,
    classes: Vec<Counts>,
    lookup: Vec<u32>,
    ln_factorial: Vec<f64>,
}

const ABSENT: u32 = u32::MAX;

impl PermBasis {
    /// All `C(N+3, 3)` classes, ordered by weight so the identity comes first.
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidParameter("n_spins must be at least 1".into()));
        }
        let n = n_spins;
        let side = n + 1;
        let mut classes = Vec::with_capacity(dimension(n));
        let mut lookup = vec![ABSENT; side * side * side];
        for w in 0..=n {
            for x in (0..=w).rev() {
                for y in (0..=w - x).rev() {
                    let c = Counts::new(x, y, w - x - y);
                    lookup[(c.x * side + c.y) * side + c.z] = classes.len() as u32;
                    classes.push(c);
                }
            }
        }
        let mut ln_factorial = vec![0.0; n + 1];
        for k in 1..=n {
            ln_factorial[k] = ln_factorial[k - 1] + (k as f64).ln();
        }
        Ok(Self {
            n,
            classes,
            lookup,
            ln_factorial,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Counts] {
        &self.classes
    }

    pub fn counts(&self, index: usize) -> Counts {
        self.classes[index]
    }

    pub fn index(&self, c: Counts) -> Option<usize> {
        if c.weight() > self.n {
            return None;
        }
        let side = self.n + 1;
        match self.lookup[(c.x * side + c.y) * side + c.z] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    /// Index of `(x, y, z)` with possibly negative entries; `None` outside the simplex.
    pub(crate) fn offset(&self, c: Counts, dx: isize, dy: isize, dz: isize) -> Option<usize> {
        let x = c.x as isize + dx;
        let y = c.y as isize + dy;
        let z = c.z as isize + dz;
        if x < 0 || y < 0 || z < 0 {
            return None;
        }
        self.index(Counts::new(x as usize, y as usize, z as usize))
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// `ln` of the number of strings in the class (a multinomial coefficient).
    pub fn ln_string_count(&self, index: usize) -> f64 {
        let c = self.classes[index];
        let f = &self.ln_factorial;
        f[self.n] - f[c.x] - f[c.y] - f[c.z] - f[c.identities(self.n)]
    }

    pub(crate) fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        let f = &self.ln_factorial;
        f[n] - f[k] - f[n - k]
    }

    /// Hilbert-Schmidt norm of the unnormalized class sum,
    /// `sqrt(count * 2^N)`; dividing by it yields an orthonormal element.
    pub fn norm(&self, index: usize) -> f64 {
        (0.5 * (self.ln_string_count(index) + self.n as f64 * std::f64::consts::LN_2)).exp()
    }

    /// Factor turning a string moment `Tr(P rho)` into the orthonormal
    /// coefficient of the class: `sqrt(count / 2^N)`.
    pub fn coefficient_scale(&self, index: usize) -> f64 {
        (0.5 * (self.ln_string_count(index) - self.n as f64 * std::f64::consts::LN_2)).exp()
    }

    /// Full-basis indices of the even (`x + y` even) classes, in order.
    pub fn even_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.classes[i].is_even()).collect()
    }
}

/// `C(N+3, 3)`
pub fn dimension(n_spins: usize) -> usize {
    (n_spins + 1) * (n_spins + 2) * (n_spins + 3) / 6
}

/// Class of the string with bit masks `p` (X or Y sites) and `s` (Y or Z sites).
pub(crate) fn class_of_masks(p: usize, s: usize) -> Counts {
    Counts::new(
        (p & !s).count_ones() as usize,
        (p & s).count_ones() as usize,
        (s & !p).count_ones() as usize,
    )
}
