//! Uniform covers of an index set.
//!
//! An s-cover of `sigma` is a multiset of nonempty subsets of `sigma` in
//! which every element of `sigma` appears in exactly `s` parts. A cover is
//! irreducible when no proper nonempty sub-multiset is itself a uniform
//! cover. Ground sets are subsets of {1..n} with n <= 16, stored as bitmasks.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub const MAX_GROUND: usize = 16;

/// Subset of {1..n}, elements 1-based, bit i-1 set iff i is a member.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IndexSet {
    ground_n: u8,
    bits: u16,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CoverError {
    OutOfRange { element: usize, ground_n: usize },
    GroundTooLarge { ground_n: usize },
    EmptySigma,
    EmptyPart { index: usize },
    PartNotInSigma { index: usize },
    GroundMismatch,
    NotUniform { element: usize, count: u32, expected: u32 },
    Capacity { what: &'static str, limit: usize },
}

impl fmt::Display for CoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverError::OutOfRange { element, ground_n } => {
                write!(f, "element {element} outside ground set 1..={ground_n}")
            }
            CoverError::GroundTooLarge { ground_n } => {
                write!(f, "ground set size {ground_n} exceeds {MAX_GROUND}")
            }
            CoverError::EmptySigma => write!(f, "sigma must be nonempty"),
            CoverError::EmptyPart { index } => write!(f, "part {index} is empty"),
            CoverError::PartNotInSigma { index } => {
                write!(f, "part {index} is not contained in sigma")
            }
            CoverError::GroundMismatch => write!(f, "mixed ground-set sizes"),
            CoverError::NotUniform { element, count, expected } => write!(
                f,
                "element {element} lies in {count} parts, expected {expected}"
            ),
            CoverError::Capacity { what, limit } => {
                write!(f, "{what} exceeds the supported limit {limit}")
            }
        }
    }
}

impl core::error::Error for CoverError {}

impl IndexSet {
    pub fn empty(ground_n: usize) -> Result<Self, CoverError> {
        if ground_n == 0 || ground_n > MAX_GROUND {
            return Err(CoverError::GroundTooLarge { ground_n });
        }
        Ok(IndexSet { ground_n: ground_n as u8, bits: 0 })
    }

    pub fn full(ground_n: usize) -> Result<Self, CoverError> {
        let mut s = Self::empty(ground_n)?;
        s.bits = ((1u32 << ground_n) - 1) as u16;
        Ok(s)
    }

    pub fn from_elems(ground_n: usize, elems: &[usize]) -> Result<Self, CoverError> {
        let mut s = Self::empty(ground_n)?;
        for &e in elems {
            if e == 0 || e > ground_n {
                return Err(CoverError::OutOfRange { element: e, ground_n });
            }
            s.bits |= 1 << (e - 1);
        }
        Ok(s)
    }

    pub fn from_bits(ground_n: usize, bits: u16) -> Result<Self, CoverError> {
        let full = Self::full(ground_n)?;
        if bits & !full.bits != 0 {
            return Err(CoverError::OutOfRange {
                element: 16 - (bits & !full.bits).leading_zeros() as usize,
                ground_n,
            });
        }
        Ok(IndexSet { ground_n: ground_n as u8, bits })
    }

    #[inline]
    pub fn ground_n(&self) -> usize {
        self.ground_n as usize
    }

    #[inline]
    pub fn bits(&self) -> u16 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn contains(&self, element: usize) -> bool {
        element >= 1 && element <= self.ground_n() && self.bits & (1 << (element - 1)) != 0
    }

    #[inline]
    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet { ground_n: self.ground_n, bits: self.bits | other.bits }
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet { ground_n: self.ground_n, bits: self.bits & other.bits }
    }

    /// self minus other.
    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet { ground_n: self.ground_n, bits: self.bits & !other.bits }
    }

    /// Complement within the full ground set {1..n}.
    pub fn complement(&self) -> IndexSet {
        let full = ((1u32 << self.ground_n) - 1) as u16;
        IndexSet { ground_n: self.ground_n, bits: full & !self.bits }
    }

    pub fn insert(&mut self, element: usize) -> Result<(), CoverError> {
        if element == 0 || element > self.ground_n() {
            return Err(CoverError::OutOfRange { element, ground_n: self.ground_n() });
        }
        self.bits |= 1 << (element - 1);
        Ok(())
    }

    /// Elements in increasing order, 1-based.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (1..=self.ground_n()).filter(move |e| bits & (1 << (e - 1)) != 0)
    }

    /// All nonempty subsets of self, sorted by (cardinality, bitmask).
    pub fn nonempty_subsets(&self) -> Vec<IndexSet> {
        let mut out = Vec::new();
        let mut sub = self.bits;
        loop {
            if sub != 0 {
                out.push(IndexSet { ground_n: self.ground_n, bits: sub });
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & self.bits;
        }
        out.sort_by_key(|p| (p.len(), p.bits));
        out
    }

    /// Compact text form: digits concatenated for n <= 9, comma-joined above.
    pub fn to_compact(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        if self.is_empty() {
            s.push('0');
            return s;
        }
        let mut first = true;
        for e in self.iter() {
            if !first && self.ground_n() > 9 {
                s.push(',');
            }
            let _ = write!(s, "{e}");
            first = false;
        }
        s
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, e) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// Uniform s-cover of `sigma`: every element of sigma lies in exactly `s`
/// parts. Parts are kept sorted by (cardinality, bitmask) so that equal
/// multisets compare equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cover {
    sigma: IndexSet,
    parts: Vec<IndexSet>,
    s: u32,
}

impl Cover {
    #[inline]
    pub fn sigma(&self) -> IndexSet {
        self.sigma
    }

    #[inline]
    pub fn parts(&self) -> &[IndexSet] {
        &self.parts
    }

    #[inline]
    pub fn s(&self) -> u32 {
        self.s
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.parts.len()
    }

    /// Parts joined by '|': "12|13|23".
    pub fn to_compact(&self) -> String {
        let mut out = String::new();
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                out.push('|');
            }
            out.push_str(&p.to_compact());
        }
        out
    }

    /// Distinct parts with multiplicities, sorted by (cardinality, bitmask).
    pub fn part_counts(&self) -> Vec<(IndexSet, u32)> {
        let mut out: Vec<(IndexSet, u32)> = Vec::new();
        for p in &self.parts {
            match out.last_mut() {
                Some((q, k)) if q == p => *k += 1,
                _ => out.push((*p, 1)),
            }
        }
        out
    }
}

/// Checks the multiset of parts forms a uniform cover of sigma and infers s.
pub fn validate_cover(sigma: IndexSet, parts: &[IndexSet]) -> Result<Cover, CoverError> {
    if sigma.is_empty() {
        return Err(CoverError::EmptySigma);
    }
    if parts.is_empty() {
        return Err(CoverError::NotUniform {
            element: sigma.iter().next().unwrap_or(0),
            count: 0,
            expected: 1,
        });
    }
    for (i, p) in parts.iter().enumerate() {
        if p.ground_n != sigma.ground_n {
            return Err(CoverError::GroundMismatch);
        }
        if p.is_empty() {
            return Err(CoverError::EmptyPart { index: i });
        }
        if !p.is_subset(&sigma) {
            return Err(CoverError::PartNotInSigma { index: i });
        }
    }
    let mut expected = None;
    for e in sigma.iter() {
        let count = parts.iter().filter(|p| p.contains(e)).count() as u32;
        match expected {
            None => expected = Some(count),
            Some(s) if s != count => {
                return Err(CoverError::NotUniform { element: e, count, expected: s })
            }
            _ => {}
        }
    }
    let s = expected.unwrap();
    if s == 0 {
        // Unreachable: parts are nonempty subsets of sigma, so some element
        // is covered, and uniformity then forces s >= 1.
        return Err(CoverError::NotUniform {
            element: sigma.iter().next().unwrap(),
            count: 0,
            expected: 1,
        });
    }
    let mut sorted = parts.to_vec();
    sorted.sort_by_key(|p| (p.len(), p.bits));
    Ok(Cover { sigma, parts: sorted, s })
}

/// The complement cover (sigma \ part_i)_i, an (m-s)-cover of sigma.
/// Errors when some part equals sigma, which would leave an empty part.
pub fn complement_cover(cover: &Cover) -> Result<Cover, CoverError> {
    let comp: Vec<IndexSet> = cover.parts.iter().map(|p| cover.sigma.difference(p)).collect();
    for (i, p) in comp.iter().enumerate() {
        if p.is_empty() {
            return Err(CoverError::EmptyPart { index: i });
        }
    }
    validate_cover(cover.sigma, &comp)
}

/// Groups elements of sigma by their membership signature across the parts;
/// the resulting atoms partition sigma, i.e. form a 1-cover.
pub fn induced_one_cover(cover: &Cover) -> Cover {
    let mut atoms: Vec<(u32, IndexSet)> = Vec::new();
    for e in cover.sigma.iter() {
        let mut sig = 0u32;
        for (j, p) in cover.parts.iter().enumerate() {
            if p.contains(e) {
                sig |= 1 << j;
            }
        }
        match atoms.iter_mut().find(|(s, _)| *s == sig) {
            Some((_, a)) => a.insert(e).expect("element within ground set"),
            None => {
                let mut a = IndexSet { ground_n: cover.sigma.ground_n, bits: 0 };
                a.insert(e).expect("element within ground set");
                atoms.push((sig, a));
            }
        }
    }
    let parts: Vec<IndexSet> = atoms.into_iter().map(|(_, a)| a).collect();
    validate_cover(cover.sigma, &parts).expect("atoms partition sigma")
}

const SUBMULTISET_LIMIT: usize = 1 << 12;

/// True iff no proper nonempty sub-multiset of the parts is itself a
/// uniform cover of sigma. Exhaustive over sub-multisets; errors when the
/// count-vector space exceeds the supported limit (about twelve distinct
/// parts).
pub fn is_irreducible(cover: &Cover) -> Result<bool, CoverError> {
    let counts = cover.part_counts();
    irreducible_from_counts(cover.sigma, &counts)
}

fn irreducible_from_counts(
    sigma: IndexSet,
    counts: &[(IndexSet, u32)],
) -> Result<bool, CoverError> {
    let mut space: usize = 1;
    for &(_, k) in counts {
        space = space.saturating_mul(k as usize + 1);
        if space > SUBMULTISET_LIMIT {
            return Err(CoverError::Capacity {
                what: "sub-multiset search space",
                limit: SUBMULTISET_LIMIT,
            });
        }
    }
    let elems: Vec<usize> = sigma.iter().collect();
    let total: u32 = counts.iter().map(|&(_, k)| k).sum();
    // Mixed-radix counter over sub-count-vectors 0 <= k' <= k.
    let mut sub = vec![0u32; counts.len()];
    loop {
        // Advance.
        let mut i = 0;
        loop {
            if i == counts.len() {
                return Ok(true);
            }
            if sub[i] < counts[i].1 {
                sub[i] += 1;
                break;
            }
            sub[i] = 0;
            i += 1;
        }
        let picked: u32 = sub.iter().sum();
        if picked == 0 || picked == total {
            continue;
        }
        let mut uniform = true;
        let mut level = None;
        for &e in &elems {
            let c: u32 = counts
                .iter()
                .zip(&sub)
                .filter(|((p, _), _)| p.contains(e))
                .map(|(_, &k)| k)
                .sum();
            match level {
                None => level = Some(c),
                Some(l) if l != c => {
                    uniform = false;
                    break;
                }
                _ => {}
            }
        }
        // A sub-multiset of nonempty parts with uniform coverage >= 1 is a
        // cover; coverage 0 everywhere is impossible since parts are nonempty.
        if uniform && level.unwrap_or(0) >= 1 {
            return Ok(false);
        }
    }
}

pub const MAX_ENUM_SIGMA: usize = 5;

/// Result of irreducible-cover enumeration. `caps_binding` is set when some
/// returned cover sits exactly at a cap (m == max_m or s == max_mult), i.e.
/// when larger caps might reveal further covers.
#[derive(Clone, Debug)]
pub struct CoverEnumeration {
    pub covers: Vec<Cover>,
    pub caps_binding: bool,
    pub max_m: usize,
    pub max_mult: u32,
}

/// Enumerates all irreducible covers of sigma with at most `max_m` parts and
/// multiplicity at most `max_mult`, each exactly once, sorted by
/// (s, m, parts). Supports |sigma| <= 5.
pub fn enumerate_irreducible_covers(
    sigma: IndexSet,
    max_m: usize,
    max_mult: u32,
) -> Result<CoverEnumeration, CoverError> {
    if sigma.is_empty() {
        return Err(CoverError::EmptySigma);
    }
    if sigma.len() > MAX_ENUM_SIGMA {
        return Err(CoverError::Capacity { what: "sigma size for enumeration", limit: MAX_ENUM_SIGMA });
    }
    let types = sigma.nonempty_subsets();
    let elems: Vec<usize> = sigma.iter().collect();
    // Union of types from index t onward, for dead-branch pruning.
    let mut remaining_union = vec![0u16; types.len() + 1];
    for t in (0..types.len()).rev() {
        remaining_union[t] = remaining_union[t + 1] | types[t].bits();
    }

    let mut covers: Vec<Cover> = Vec::new();
    let mut caps_binding = false;
    for s in 1..=max_mult {
        let mut counts = vec![0u32; types.len()];
        let mut coverage = vec![0u32; elems.len()];
        enum_rec(
            sigma,
            &types,
            &elems,
            &remaining_union,
            s,
            max_m,
            0,
            0,
            &mut counts,
            &mut coverage,
            &mut covers,
            &mut caps_binding,
        )?;
    }
    covers.sort_by(|a, b| {
        (a.s, a.m(), &a.parts).cmp(&(b.s, b.m(), &b.parts))
    });
    if covers.iter().any(|c| c.m() == max_m || c.s == max_mult) {
        caps_binding = true;
    }
    Ok(CoverEnumeration { covers, caps_binding, max_m, max_mult })
}

#[allow(clippy::too_many_arguments)]
fn enum_rec(
    sigma: IndexSet,
    types: &[IndexSet],
    elems: &[usize],
    remaining_union: &[u16],
    s: u32,
    max_m: usize,
    t: usize,
    used_m: usize,
    counts: &mut Vec<u32>,
    coverage: &mut Vec<u32>,
    out: &mut Vec<Cover>,
    _caps_binding: &mut bool,
) -> Result<(), CoverError> {
    // Dead branch: some element can no longer reach coverage s.
    for (i, &e) in elems.iter().enumerate() {
        if coverage[i] < s && remaining_union[t] & (1 << (e - 1)) == 0 {
            return Ok(());
        }
    }
    if t == types.len() {
        if coverage.iter().all(|&c| c == s) && used_m >= 1 {
            let cc: Vec<(IndexSet, u32)> = types
                .iter()
                .zip(counts.iter())
                .filter(|(_, &k)| k > 0)
                .map(|(p, &k)| (*p, k))
                .collect();
            if irreducible_from_counts(sigma, &cc)? {
                let mut parts = Vec::with_capacity(used_m);
                for (p, k) in &cc {
                    for _ in 0..*k {
                        parts.push(*p);
                    }
                }
                out.push(validate_cover(sigma, &parts)?);
            }
        }
        return Ok(());
    }
    // Max count for this type: element budgets and the part budget.
    let mut kmax = (max_m - used_m) as u32;
    for (i, &e) in elems.iter().enumerate() {
        if types[t].contains(e) {
            kmax = kmax.min(s - coverage[i]);
        }
    }
    for k in 0..=kmax {
        if k > 0 {
            counts[t] = k;
            for (i, &e) in elems.iter().enumerate() {
                if types[t].contains(e) {
                    coverage[i] += 1;
                }
            }
        }
        enum_rec(
            sigma,
            types,
            elems,
            remaining_union,
            s,
            max_m,
            t + 1,
            used_m + k as usize,
            counts,
            coverage,
            out,
            _caps_binding,
        )?;
    }
    // Undo all k increments for this type.
    for (i, &e) in elems.iter().enumerate() {
        if types[t].contains(e) {
            coverage[i] -= kmax.min(counts[t]);
        }
    }
    counts[t] = 0;
    Ok(())
}

/// Enumeration with the default caps max_m = 2^|sigma|, max_mult = |sigma|.
pub fn enumerate_irreducible_covers_default(
    sigma: IndexSet,
) -> Result<CoverEnumeration, CoverError> {
    enumerate_irreducible_covers(sigma, 1usize << sigma.len(), sigma.len() as u32)
}
