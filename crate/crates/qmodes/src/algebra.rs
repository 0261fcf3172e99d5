//! The four Lie algebras as named generator sets with exact rational matrix
//! representations, plus their commutation tables.
//!
//! All matrices here are stored over `Rational64` so commutator checks are
//! exact; conversion to floating point happens only at the [`assemble`]
//! boundary.
//!
//! Representations used (all dimension 2 or 3, entries in {0, ±1, ±1/2}):
//!
//! * su(2): `J- = [[0,0],[1,0]]`, `J+ = [[0,1],[0,0]]`, `J3 = diag(1,-1)/2`
//! * su(1,1): `K- = [[0,0],[-1,0]]`, `K+ = [[0,1],[0,0]]`, `K3 = diag(1,-1)/2`
//! * su(2,1): nine matrices A..K acting on the invariant mode triple
//!   (a, v, s†); the relations `[A,B] = 2C`, `[D,E] = -2F`, `[G,J] = -2K`
//!   and `F - C = K` all hold exactly.
//! * su(3): nine matrices A..K acting on (b†, a†, c†); `[A,B] = 2C`,
//!   `[D,E] = 2F`, `[G,J] = 2K`, `[A,G] = D`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::smallmat::CMat;

type Rat = Rational64;

/// The four supported groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Su2,
    Su11,
    Su21,
    Su3,
}

impl Group {
    pub fn rep_dim(self) -> usize {
        match self {
            Group::Su2 | Group::Su11 => 2,
            Group::Su21 | Group::Su3 => 3,
        }
    }

    pub const ALL: [Group; 4] = [Group::Su2, Group::Su11, Group::Su21, Group::Su3];
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::Su2 => "SU(2)",
            Group::Su11 => "SU(1,1)",
            Group::Su21 => "SU(2,1)",
            Group::Su3 => "SU(3)",
        };
        f.write_str(s)
    }
}

/// Generator names. The letters A..K name two different families (one for
/// su(2,1), one for su(3)); the owning [`Group`] disambiguates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenName {
    JMinus,
    JPlus,
    J3,
    KMinus,
    KPlus,
    K3,
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    J,
    K,
}

impl fmt::Display for GenName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GenName::JMinus => "J-",
            GenName::JPlus => "J+",
            GenName::J3 => "J3",
            GenName::KMinus => "K-",
            GenName::KPlus => "K+",
            GenName::K3 => "K3",
            GenName::A => "A",
            GenName::B => "B",
            GenName::C => "C",
            GenName::D => "D",
            GenName::E => "E",
            GenName::F => "F",
            GenName::G => "G",
            GenName::J => "J",
            GenName::K => "K",
        };
        f.write_str(s)
    }
}

/// Dense square matrix over exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    dim: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zeros(dim: usize) -> Self {
        RatMat {
            dim,
            data: vec![Rat::zero(); dim * dim],
        }
    }

    /// Build from integer numerator/denominator entry pairs, row-major.
    pub fn from_halves(dim: usize, entries: &[(i64, i64)]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        RatMat {
            dim,
            data: entries.iter().map(|&(n, d)| Rat::new(n, d)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Rat {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.dim + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_zero())
    }

    pub fn mul(&self, other: &RatMat) -> Result<RatMat> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = RatMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RatMat) -> Result<RatMat> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} - {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        Ok(out)
    }

    /// Exact commutator `[self, other]`.
    pub fn commutator(&self, other: &RatMat) -> Result<RatMat> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Convert to complex floating point.
    pub fn to_complex(&self) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let r = self.get(i, j);
                let v = *r.numer() as f64 / *r.denom() as f64;
                m.set(i, j, C64::new(v, 0.0));
            }
        }
        m
    }
}

/// Structure constants: `(i, j) -> [(k, c)]` meaning `[G_i, G_j] = sum c G_k`,
/// stored for i < j only (the table is antisymmetric and `[G_i, G_i] = 0`).
pub type StructureConstants = BTreeMap<(usize, usize), Vec<(usize, Rat)>>;

/// A named generator set with its faithful matrix representation and the
/// exact structure constants computed from it.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub group: Group,
    pub generators: Vec<(GenName, RatMat)>,
    pub structure_constants: StructureConstants,
}

impl GeneratorSet {
    pub fn names(&self) -> Vec<GenName> {
        self.generators.iter().map(|(n, _)| *n).collect()
    }

    pub fn matrix(&self, name: GenName) -> Result<&RatMat> {
        self.generators
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::UnknownGenerator {
                group: self.group.to_string(),
                name: name.to_string(),
            })
    }
}

fn e(dim: usize, i: usize, j: usize, sign: i64) -> RatMat {
    let mut m = RatMat::zeros(dim);
    m.set(i, j, Rat::new(sign, 1));
    m
}

fn diag_halves(dim: usize, entries: &[i64]) -> RatMat {
    let mut m = RatMat::zeros(dim);
    for (i, &v) in entries.iter().enumerate() {
        m.set(i, i, Rat::new(v, 2));
    }
    m
}

fn build_set(group: Group) -> GeneratorSet {
    use GenName::*;
    let generators: Vec<(GenName, RatMat)> = match group {
        Group::Su2 => vec![
            (JMinus, e(2, 1, 0, 1)),
            (JPlus, e(2, 0, 1, 1)),
            (J3, diag_halves(2, &[1, -1])),
        ],
        Group::Su11 => vec![
            (KMinus, e(2, 1, 0, -1)),
            (KPlus, e(2, 0, 1, 1)),
            (K3, diag_halves(2, &[1, -1])),
        ],
        // Basis pinned by the representative Hamiltonian matrix: the
        // diagonal ordering puts the converter pair A, B in the upper-left
        // block and the amplifier pair D, E in the lower-right block.
        Group::Su21 => vec![
            (A, e(3, 0, 1, 1)),
            (B, e(3, 1, 0, 1)),
            (C, diag_halves(3, &[1, -1, 0])),
            (D, e(3, 2, 1, -1)),
            (E, e(3, 1, 2, 1)),
            (F, diag_halves(3, &[0, -1, 1])),
            (G, e(3, 2, 0, 1)),
            (J, e(3, 0, 2, -1)),
            (K, diag_halves(3, &[-1, 0, 1])),
        ],
        Group::Su3 => vec![
            (A, e(3, 0, 1, 1)),
            (B, e(3, 1, 0, 1)),
            (C, diag_halves(3, &[1, -1, 0])),
            (D, e(3, 0, 2, 1)),
            (E, e(3, 2, 0, 1)),
            (F, diag_halves(3, &[1, 0, -1])),
            (G, e(3, 1, 2, 1)),
            (J, e(3, 2, 1, 1)),
            (K, diag_halves(3, &[0, 1, -1])),
        ],
    };
    let structure_constants = compute_table(&generators)
        .expect("built-in generator sets close under commutation");
    GeneratorSet {
        group,
        generators,
        structure_constants,
    }
}

/// Expand `m` exactly in the rational span of the generator matrices.
/// Returns the coefficient list, or None if `m` lies outside the span.
fn expand_in_span(gens: &[(GenName, RatMat)], m: &RatMat) -> Option<Vec<(usize, Rat)>> {
    let dim = m.dim();
    let rows = dim * dim;
    let cols = gens.len();
    // Augmented system over rationals: columns are vectorized generators.
    let mut aug = vec![vec![Rat::zero(); cols + 1]; rows];
    for (c, (_, g)) in gens.iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                aug[i * dim + j][c] = g.get(i, j);
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            aug[i * dim + j][cols] = m.get(i, j);
        }
    }
    // Exact Gauss-Jordan elimination.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, p);
        let inv = aug[row][col].recip();
        for v in aug[row].iter_mut() {
            *v *= inv;
        }
        for r in 0..rows {
            if r != row && !aug[r][col].is_zero() {
                let f = aug[r][col];
                for c2 in 0..=cols {
                    let delta = f * aug[row][c2];
                    aug[r][c2] -= delta;
                }
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == rows {
            break;
        }
    }
    // Inconsistent if any zero row has nonzero rhs.
    for r in row..rows {
        if !aug[r][cols].is_zero() {
            return None;
        }
    }
    let mut coeffs = Vec::new();
    for (c, p) in pivot_of_col.iter().enumerate() {
        if let Some(r) = p {
            let v = aug[*r][cols];
            if !v.is_zero() {
                coeffs.push((c, v));
            }
        }
    }
    Some(coeffs)
}

/// The nine-generator families are linearly dependent through F = C + K,
/// so span expansions are unique only modulo the kernel vector C - F + K.
/// Shift by the multiple that leaves the fewest diagonal generators in the
/// expansion; this reproduces the conventional single-generator brackets
/// ([G, J] = -2K rather than 2C - 2F).
fn canonicalize(gens: &[(GenName, RatMat)], coeffs: Vec<(usize, Rat)>) -> Vec<(usize, Rat)> {
    let pos = |name: GenName| gens.iter().position(|(n, _)| *n == name);
    let (Some(ic), Some(if_), Some(ik)) = (pos(GenName::C), pos(GenName::F), pos(GenName::K))
    else {
        return coeffs;
    };
    let get = |c: &[(usize, Rat)], i: usize| {
        c.iter()
            .find(|(k, _)| *k == i)
            .map(|(_, v)| *v)
            .unwrap_or_else(Rat::zero)
    };
    let (cc, cf, ck) = (get(&coeffs, ic), get(&coeffs, if_), get(&coeffs, ik));
    let mut best = (cc, cf, ck);
    let mut best_count = [cc, cf, ck].iter().filter(|v| !v.is_zero()).count();
    for lambda in [-cc, cf, -ck] {
        let cand = (cc + lambda, cf - lambda, ck + lambda);
        let count = [cand.0, cand.1, cand.2]
            .iter()
            .filter(|v| !v.is_zero())
            .count();
        if count < best_count {
            best = cand;
            best_count = count;
        }
    }
    let mut out: Vec<(usize, Rat)> = coeffs
        .into_iter()
        .filter(|(k, _)| *k != ic && *k != if_ && *k != ik)
        .collect();
    for (idx, v) in [(ic, best.0), (if_, best.1), (ik, best.2)] {
        if !v.is_zero() {
            out.push((idx, v));
        }
    }
    out.sort_by_key(|(k, _)| *k);
    out
}

fn compute_table(gens: &[(GenName, RatMat)]) -> Result<StructureConstants> {
    let dim = gens[0].1.dim();
    if gens.iter().any(|(_, g)| g.dim() != dim) {
        return Err(Error::DimensionMismatch(
            "generator matrices have unequal dimensions".into(),
        ));
    }
    let mut table = StructureConstants::new();
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            let comm = gens[i].1.commutator(&gens[j].1)?;
            let coeffs = expand_in_span(gens, &comm).ok_or_else(|| {
                Error::DimensionMismatch(format!(
                    "[{}, {}] not in generator span",
                    gens[i].0, gens[j].0
                ))
            })?;
            let coeffs = canonicalize(gens, coeffs);
            if !coeffs.is_empty() {
                table.insert((i, j), coeffs);
            }
        }
    }
    Ok(table)
}

static SETS: OnceLock<[GeneratorSet; 4]> = OnceLock::new();

/// The generator set for `group`, built once.
pub fn generators(group: Group) -> &'static GeneratorSet {
    let sets = SETS.get_or_init(|| {
        [
            build_set(Group::Su2),
            build_set(Group::Su11),
            build_set(Group::Su21),
            build_set(Group::Su3),
        ]
    });
    match group {
        Group::Su2 => &sets[0],
        Group::Su11 => &sets[1],
        Group::Su21 => &sets[2],
        Group::Su3 => &sets[3],
    }
}

/// Recompute the structure-constant table exactly from the stored matrices.
pub fn commutator_table(set: &GeneratorSet) -> Result<StructureConstants> {
    compute_table(&set.generators)
}

/// Assemble `sum coeffs[g] * matrix(g)` as a complex matrix.
pub fn assemble(coeffs: &[(GenName, C64)], set: &GeneratorSet) -> Result<CMat> {
    let dim = set.group.rep_dim();
    let mut out = CMat::zeros(dim);
    for &(name, c) in coeffs {
        let g = set.matrix(name)?;
        for i in 0..dim {
            for j in 0..dim {
                let r = g.get(i, j);
                if !r.is_zero() {
                    let v = *r.numer() as f64 / *r.denom() as f64;
                    out.set(i, j, out.get(i, j) + c * v);
                }
            }
        }
    }
    Ok(out)
}

/// Look up the structure constants of `[G_i, G_j]` by name, with the
/// antisymmetric completion (returns negated coefficients for i > j).
pub fn bracket(set: &GeneratorSet, a: GenName, b: GenName) -> Vec<(GenName, Rat)> {
    let names = set.names();
    let ia = names.iter().position(|n| *n == a).expect("known generator");
    let ib = names.iter().position(|n| *n == b).expect("known generator");
    if ia == ib {
        return Vec::new();
    }
    let (key, sign) = if ia < ib {
        ((ia, ib), Rat::new(1, 1))
    } else {
        ((ib, ia), Rat::new(-1, 1))
    };
    set.structure_constants
        .get(&key)
        .map(|v| v.iter().map(|&(k, c)| (names[k], c * sign)).collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use GenName::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn su2_matrices_match_print() {
        let set = generators(Group::Su2);
        let jm = set.matrix(JMinus).unwrap();
        assert_eq!(jm.get(1, 0), rat(1, 1));
        assert_eq!(jm.get(0, 1), rat(0, 1));
        let j3 = set.matrix(J3).unwrap();
        assert_eq!(j3.get(0, 0), rat(1, 2));
        assert_eq!(j3.get(1, 1), rat(-1, 2));
    }

    #[test]
    fn su11_sign_flip_on_lowering() {
        let set = generators(Group::Su11);
        assert_eq!(set.matrix(KMinus).unwrap().get(1, 0), rat(-1, 1));
    }

    #[test]
    fn su2_commutators() {
        let set = generators(Group::Su2);
        // [J+, J-] = 2 J3
        assert_eq!(bracket(set, JPlus, JMinus), vec![(J3, rat(2, 1))]);
        // [J3, J+-] = +- J+-
        assert_eq!(bracket(set, J3, JPlus), vec![(JPlus, rat(1, 1))]);
        assert_eq!(bracket(set, J3, JMinus), vec![(JMinus, rat(-1, 1))]);
    }

    #[test]
    fn su11_commutators() {
        let set = generators(Group::Su11);
        assert_eq!(bracket(set, KPlus, KMinus), vec![(K3, rat(-2, 1))]);
        assert_eq!(bracket(set, K3, KPlus), vec![(KPlus, rat(1, 1))]);
    }

    #[test]
    fn su21_commutators_and_fck_relation() {
        let set = generators(Group::Su21);
        assert_eq!(bracket(set, A, B), vec![(C, rat(2, 1))]);
        assert_eq!(bracket(set, D, E), vec![(F, rat(-2, 1))]);
        assert_eq!(bracket(set, G, J), vec![(K, rat(-2, 1))]);
        assert_eq!(bracket(set, A, G), vec![(D, rat(1, 1))]);
        // F - C = K as an exact matrix identity.
        let f = set.matrix(F).unwrap();
        let c = set.matrix(C).unwrap();
        let k = set.matrix(K).unwrap();
        assert_eq!(&f.sub(c).unwrap(), k);
    }

    #[test]
    fn su3_commutators_and_fck_relation() {
        let set = generators(Group::Su3);
        assert_eq!(bracket(set, A, B), vec![(C, rat(2, 1))]);
        assert_eq!(bracket(set, D, E), vec![(F, rat(2, 1))]);
        assert_eq!(bracket(set, G, J), vec![(K, rat(2, 1))]);
        assert_eq!(bracket(set, A, G), vec![(D, rat(1, 1))]);
        let f = set.matrix(F).unwrap();
        let c = set.matrix(C).unwrap();
        let k = set.matrix(K).unwrap();
        assert_eq!(&f.sub(c).unwrap(), k);
    }

    #[test]
    fn all_groups_close_and_tables_match() {
        for group in Group::ALL {
            let set = generators(group);
            let recomputed = commutator_table(set).unwrap();
            assert_eq!(recomputed, set.structure_constants, "{group}");
        }
    }

    #[test]
    fn self_commutator_vanishes() {
        for group in Group::ALL {
            let set = generators(group);
            for (_, g) in &set.generators {
                assert!(g.commutator(g).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn assemble_zero_and_sum() {
        let set = generators(Group::Su2);
        let z = assemble(&[], set).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let m = assemble(
            &[(JPlus, C64::new(1.0, 0.0)), (JMinus, C64::new(1.0, 0.0))],
            set,
        )
        .unwrap();
        assert_eq!(m.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(m.get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(m.get(0, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn assemble_unknown_name_errors() {
        let set = generators(Group::Su2);
        assert!(assemble(&[(A, C64::new(1.0, 0.0))], set).is_err());
    }

    #[test]
    fn commutator_table_rejects_mixed_dimensions() {
        let su2 = generators(Group::Su2);
        let su3 = generators(Group::Su3);
        let mixed = GeneratorSet {
            group: Group::Su2,
            generators: vec![
                su2.generators[0].clone(),
                (GenName::A, su3.matrix(A).unwrap().clone()),
            ],
            structure_constants: StructureConstants::new(),
        };
        assert!(commutator_table(&mixed).is_err());
    }

    #[test]
    fn assemble_raman_representative_matrix() {
        // Coupling coefficients with g_s = g_a = 1 and zero detunings give
        // the antisymmetric-in-the-lower-pair representative matrix.
        let set = generators(Group::Su21);
        let one = C64::new(-1.0, 0.0);
        let m = assemble(&[(A, one), (B, one), (D, one), (E, one)], set).unwrap();
        let expect = [
            [0.0, -1.0, 0.0],
            [-1.0, 0.0, -1.0],
            [0.0, 1.0, 0.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), C64::new(expect[i][j], 0.0));
            }
        }
    }
}
