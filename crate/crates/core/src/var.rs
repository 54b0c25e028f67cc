//! Variables and literals shared by every layer.

use std::fmt;

/// A propositional variable, dense 0-based. DIMACS index is `id + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn dimacs(self) -> i64 {
        self.0 as i64 + 1
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, false)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, true)
    }
}

/// A literal packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(var.0 << 1 | negated as u32)
    }

    pub fn from_dimacs(x: i64) -> Option<Lit> {
        if x == 0 || x.unsigned_abs() > (u32::MAX >> 1) as u64 {
            return None;
        }
        Some(Lit::new(Var(x.unsigned_abs() as u32 - 1), x < 0))
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    pub fn dimacs(self) -> i64 {
        let v = self.var().dimacs();
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Truth value under a total assignment indexed by variable id.
    pub fn eval(self, values: &[bool]) -> bool {
        values[self.var().index()] != self.is_negated()
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.dimacs())
    }
}
