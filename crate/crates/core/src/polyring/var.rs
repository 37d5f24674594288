use std::fmt;
use std::sync::{LazyLock, RwLock};

/// Names registered up front, in the order that drives monomial comparison.
const BUILTIN: &[&str] = &[
    "n", "m", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "t2", "t3", "t4", "t5", "t6", "t7",
    "t8", "t9",
];

static REGISTRY: LazyLock<RwLock<Vec<String>>> =
    LazyLock::new(|| RwLock::new(BUILTIN.iter().map(|s| s.to_string()).collect()));

/// An indeterminate, interned by name.
///
/// Variables compare by registration order: the builtin names first, then
/// any fresh names (refinement variables such as `t5p`) in the order they
/// were first seen.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u16);

impl Var {
    pub fn new(name: &str) -> Var {
        assert!(is_valid_name(name), "invalid variable name {name:?}");
        if let Some(v) = Self::lookup(name) {
            return v;
        }
        let mut reg = REGISTRY.write().expect("variable registry poisoned");
        if let Some(idx) = reg.iter().position(|s| s == name) {
            return Var(idx as u16);
        }
        assert!(reg.len() < u16::MAX as usize, "variable registry full");
        reg.push(name.to_string());
        Var((reg.len() - 1) as u16)
    }

    pub fn lookup(name: &str) -> Option<Var> {
        let reg = REGISTRY.read().expect("variable registry poisoned");
        reg.iter().position(|s| s == name).map(|idx| Var(idx as u16))
    }

    pub fn name(self) -> String {
        REGISTRY.read().expect("variable registry poisoned")[self.0 as usize].clone()
    }

    pub fn n() -> Var {
        Var(0)
    }

    pub fn m() -> Var {
        Var(1)
    }

    /// `x1`..`x8`, the coordinates of an element on an integral basis.
    pub fn x(i: usize) -> Var {
        assert!((1..=8).contains(&i), "x index out of range: {i}");
        Var(1 + i as u16)
    }

    /// `t2`..`t9`, the parity-split parameters.
    pub fn t(i: usize) -> Var {
        assert!((2..=9).contains(&i), "t index out of range: {i}");
        Var(8 + i as u16)
    }
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_have_fixed_slots() {
        assert_eq!(Var::n().name(), "n");
        assert_eq!(Var::x(5).name(), "x5");
        assert_eq!(Var::t(9).name(), "t9");
        assert_eq!(Var::new("x2"), Var::x(2));
        assert!(Var::n() < Var::x(1));
        assert!(Var::x(8) < Var::t(2));
    }

    #[test]
    fn fresh_names_are_interned_once() {
        let a = Var::new("t5p_test");
        let b = Var::new("t5p_test");
        assert_eq!(a, b);
        assert!(Var::t(9) < a);
    }
}
