use std::fmt;

use crate::term::Sym;

/// A finite set of integers stored as sorted, disjoint, non-adjacent
/// inclusive ranges.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct IntSet {
    ranges: Vec<(i64, i64)>,
}

impl IntSet {
    pub fn empty() -> Self {
        IntSet { ranges: Vec::new() }
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        if lo > hi {
            IntSet::empty()
        } else {
            IntSet {
                ranges: vec![(lo, hi)],
            }
        }
    }

    pub fn singleton(v: i64) -> Self {
        IntSet::range(v, v)
    }

    pub fn from_values(values: impl IntoIterator<Item = i64>) -> Self {
        let mut vs: Vec<i64> = values.into_iter().collect();
        vs.sort_unstable();
        vs.dedup();
        let mut ranges: Vec<(i64, i64)> = Vec::new();
        for v in vs {
            match ranges.last_mut() {
                Some((_, hi)) if *hi + 1 == v => *hi = v,
                _ => ranges.push((v, v)),
            }
        }
        IntSet { ranges }
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn size(&self) -> u64 {
        self.ranges
            .iter()
            .map(|(lo, hi)| (hi - lo) as u64 + 1)
            .sum()
    }

    pub fn min(&self) -> Option<i64> {
        self.ranges.first().map(|r| r.0)
    }

    pub fn max(&self) -> Option<i64> {
        self.ranges.last().map(|r| r.1)
    }

    pub fn contains(&self, v: i64) -> bool {
        match self.ranges.binary_search_by(|&(lo, hi)| {
            if hi < v {
                std::cmp::Ordering::Less
            } else if lo > v {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        }) {
            Ok(_) => true,
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.ranges.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    pub fn intersect(&self, other: &IntSet) -> IntSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a0, a1) = self.ranges[i];
            let (b0, b1) = other.ranges[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntSet { ranges: out }
    }

    pub fn subtract(&self, other: &IntSet) -> IntSet {
        let mut out = Vec::new();
        let mut j = 0;
        for &(mut lo, hi) in &self.ranges {
            while j < other.ranges.len() && other.ranges[j].1 < lo {
                j += 1;
            }
            let mut k = j;
            while lo <= hi {
                match other.ranges.get(k) {
                    Some(&(b0, b1)) if b0 <= hi => {
                        if b0 > lo {
                            out.push((lo, b0 - 1));
                        }
                        if b1 >= hi {
                            lo = hi + 1;
                        } else {
                            lo = b1 + 1;
                            k += 1;
                        }
                    }
                    _ => {
                        out.push((lo, hi));
                        lo = hi + 1;
                    }
                }
            }
        }
        IntSet { ranges: out }
    }

    pub fn remove(&self, v: i64) -> IntSet {
        self.subtract(&IntSet::singleton(v))
    }

    /// Keeps values `>= v`.
    pub fn at_least(&self, v: i64) -> IntSet {
        match self.max() {
            Some(max) if max >= v => self.intersect(&IntSet::range(v, max)),
            _ => IntSet::empty(),
        }
    }

    /// Keeps values `<= v`.
    pub fn at_most(&self, v: i64) -> IntSet {
        match self.min() {
            Some(min) if min <= v => self.intersect(&IntSet::range(min, v)),
            _ => IntSet::empty(),
        }
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |f: &mut fmt::Formatter<'_>, (lo, hi): (i64, i64)| {
            if lo == hi {
                write!(f, "{}", lo)
            } else {
                write!(f, "{}..{}", lo, hi)
            }
        };
        match self.ranges.as_slice() {
            [] => write!(f, "{{}}"),
            [r] => part(f, *r),
            rs => {
                write!(f, "{{")?;
                for (i, r) in rs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    part(f, *r)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A finite set of atoms kept in declaration order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct AtomSet {
    items: Vec<Sym>,
}

impl AtomSet {
    pub fn new(items: impl IntoIterator<Item = Sym>) -> Self {
        let mut out: Vec<Sym> = Vec::new();
        for s in items {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        AtomSet { items: out }
    }

    pub fn items(&self) -> &[Sym] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, s: &str) -> bool {
        self.items.iter().any(|x| &**x == s)
    }

    pub fn intersect(&self, other: &AtomSet) -> AtomSet {
        AtomSet {
            items: self
                .items
                .iter()
                .filter(|x| other.contains(x))
                .cloned()
                .collect(),
        }
    }

    pub fn subtract(&self, other: &AtomSet) -> AtomSet {
        AtomSet {
            items: self
                .items
                .iter()
                .filter(|x| !other.contains(x))
                .cloned()
                .collect(),
        }
    }

    pub fn remove(&self, s: &str) -> AtomSet {
        AtomSet {
            items: self.items.iter().filter(|x| &***x != s).cloned().collect(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Domain {
    Int(IntSet),
    Atom(AtomSet),
}

/// A single domain value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Value {
    Int(i64),
    Atom(Sym),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{}", i),
            Value::Atom(a) => write!(f, "{}", crate::term::Term::Atom(a.clone())),
        }
    }
}

impl Domain {
    pub fn is_empty(&self) -> bool {
        match self {
            Domain::Int(s) => s.is_empty(),
            Domain::Atom(s) => s.is_empty(),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            Domain::Int(s) => s.size(),
            Domain::Atom(s) => s.len() as u64,
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Domain::Int(_))
    }

    pub fn as_int(&self) -> Option<&IntSet> {
        match self {
            Domain::Int(s) => Some(s),
            _ => None,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Int(s), Value::Int(i)) => s.contains(*i),
            (Domain::Atom(s), Value::Atom(a)) => s.contains(a),
            _ => false,
        }
    }

    pub fn single(&self) -> Option<Value> {
        match self {
            Domain::Int(s) if s.size() == 1 => s.min().map(Value::Int),
            Domain::Atom(s) if s.len() == 1 => Some(Value::Atom(s.items()[0].clone())),
            _ => None,
        }
    }

    /// Values in labelling order: ascending integers, declaration order for atoms.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Domain::Int(s) => s.iter().map(Value::Int).collect(),
            Domain::Atom(s) => s.items().iter().cloned().map(Value::Atom).collect(),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Int(s) => s.fmt(f),
            Domain::Atom(s) => {
                write!(f, "[")?;
                for (i, a) in s.items().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", crate::term::Term::Atom(a.clone()))?;
                }
                write!(f, "]")
            }
        }
    }
}
