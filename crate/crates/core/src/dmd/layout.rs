use std::fmt;

use crate::error::{Error, Result};

/// Ordered compartment names, each owning `node_count` consecutive rows of
/// the state vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompartmentLayout {
    names: Vec<String>,
    node_count: usize,
}

impl CompartmentLayout {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, node_count: usize) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::input("layout needs at least one compartment"));
        }
        if node_count == 0 {
            return Err(Error::input("layout node count must be positive"));
        }
        for (k, name) in names.iter().enumerate() {
            if name.is_empty() || name.contains([':', ',', '\n', '=']) {
                return Err(Error::input(format!("invalid compartment name `{name}`")));
            }
            if names[..k].contains(name) {
                return Err(Error::input(format!("duplicate compartment name `{name}`")));
            }
        }
        Ok(Self { names, node_count })
    }

    /// One compartment covering `node_count` rows.
    pub fn single(name: &str, node_count: usize) -> Result<Self> {
        Self::new([name], node_count)
    }

    /// Parses `name:count,name:count,...`; counts must agree.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut count = None;
        for entry in text.trim().split(',') {
            let (name, n) = entry
                .split_once(':')
                .ok_or_else(|| Error::input(format!("layout entry `{entry}` is not name:count")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("layout count `{n}` is not an integer")))?;
            match count {
                None => count = Some(n),
                Some(c) if c != n => {
                    return Err(Error::input(format!(
                        "layout counts differ ({c} vs {n}); compartments must share a node count"
                    )))
                }
                _ => {}
            }
            names.push(name.trim().to_string());
        }
        Self::new(names, count.unwrap_or(0))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn compartments(&self) -> usize {
        self.names.len()
    }

    pub fn state_dim(&self) -> usize {
        self.names.len() * self.node_count
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Row range of compartment `i`.
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        i * self.node_count..(i + 1) * self.node_count
    }

    /// Layout with compartments reordered: position `k` holds old compartment `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.compartments())?;
        Self::new(perm.iter().map(|&i| self.names[i].clone()), self.node_count)
    }
}

impl fmt::Display for CompartmentLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, name) in self.names.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{name}:{}", self.node_count)?;
        }
        Ok(())
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::input(format!(
            "permutation has {} entries, expected {n}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::input(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}
