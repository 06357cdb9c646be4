//! Chain definitions, quenched disorder and the restricted one-excitation
//! Hamiltonians of the dimer and trimer qubit-cavity chains.
//!
//! Sites are ordered cell by cell: `A1, B1, [C1,] A2, B2, ...`. The last
//! sublattice of every cell (B for the dimer, C for the trimer) is the leaky
//! cavity and carries `-iΓ` on the diagonal.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::ComplexMatrix;
use crate::seed::derive_seed;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("invalid disorder: {0}")]
    InvalidDisorder(String),
    #[error("noise shape mismatch for {family:?}: expected {expected} entries, found {found}")]
    NoiseShape {
        family: NoiseFamily,
        expected: usize,
        found: usize,
    },
    #[error("{n_sites} sites is not a whole number of {cell_size}-site cells")]
    IncompleteCell { n_sites: usize, cell_size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Dimer,
    Trimer,
}

impl ChainKind {
    pub fn cell_size(self) -> usize {
        match self {
            ChainKind::Dimer => 2,
            ChainKind::Trimer => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sublattice {
    A,
    B,
    C,
}

/// Static chain definition. `j3` and `j` are ignored for the dimer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ChainKind,
    pub n_sites: usize,
    pub j1: f64,
    pub j2: f64,
    #[serde(default)]
    pub j3: f64,
    #[serde(default)]
    pub j: f64,
    #[serde(default)]
    pub eps_a: f64,
    #[serde(default)]
    pub eps_b: f64,
    #[serde(default)]
    pub eps_c: f64,
    pub gamma: f64,
}

impl ModelSpec {
    pub fn dimer(n_sites: usize, j1: f64, j2: f64, gamma: f64) -> Self {
        Self {
            kind: ChainKind::Dimer,
            n_sites,
            j1,
            j2,
            j3: 0.0,
            j: 0.0,
            eps_a: 0.0,
            eps_b: 0.0,
            eps_c: 0.0,
            gamma,
        }
    }

    pub fn trimer(n_sites: usize, j1: f64, j2: f64, j3: f64, j: f64, gamma: f64) -> Self {
        Self {
            kind: ChainKind::Trimer,
            n_sites,
            j1,
            j2,
            j3,
            j,
            eps_a: 0.0,
            eps_b: 0.0,
            eps_c: 0.0,
            gamma,
        }
    }

    pub fn with_onsite(mut self, eps_a: f64, eps_b: f64, eps_c: f64) -> Self {
        self.eps_a = eps_a;
        self.eps_b = eps_b;
        self.eps_c = eps_c;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_sites < 2 {
            return Err(ModelError::InvalidSpec(format!(
                "n_sites must be at least 2, got {}",
                self.n_sites
            )));
        }
        let values = [
            ("j1", self.j1),
            ("j2", self.j2),
            ("j3", self.j3),
            ("j", self.j),
            ("eps_a", self.eps_a),
            ("eps_b", self.eps_b),
            ("eps_c", self.eps_c),
            ("gamma", self.gamma),
        ];
        if let Some((name, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::InvalidSpec(format!("{name} is not finite ({v})")));
        }
        if self.gamma < 0.0 {
            return Err(ModelError::InvalidSpec(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> usize {
        self.kind.cell_size()
    }

    /// Number of complete unit cells, failing if the last cell is incomplete.
    pub fn cells(&self) -> Result<usize, ModelError> {
        let n = self.cell_size();
        if !self.n_sites.is_multiple_of(n) {
            return Err(ModelError::IncompleteCell {
                n_sites: self.n_sites,
                cell_size: n,
            });
        }
        Ok(self.n_sites / n)
    }

    pub fn sublattice(&self, site: usize) -> Sublattice {
        match (self.kind, site % self.cell_size()) {
            (_, 0) => Sublattice::A,
            (_, 1) => Sublattice::B,
            _ => Sublattice::C,
        }
    }

    pub fn is_leaky(&self, site: usize) -> bool {
        site % self.cell_size() == self.cell_size() - 1
    }

    fn onsite(&self, site: usize) -> f64 {
        match self.sublattice(site) {
            Sublattice::A => self.eps_a,
            Sublattice::B => self.eps_b,
            Sublattice::C => self.eps_c,
        }
    }

    fn clean_coupling(&self, family: NoiseFamily) -> f64 {
        match family {
            NoiseFamily::J1 => self.j1,
            NoiseFamily::J2 => self.j2,
            NoiseFamily::J3 => self.j3,
            NoiseFamily::J => self.j,
            NoiseFamily::Diagonal => 0.0,
        }
    }
}

/// Independently perturbed element families. The discriminant doubles as
/// the RNG stream id, so each family's draws do not depend on the others.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseFamily {
    J1 = 0,
    J2 = 1,
    J3 = 2,
    J = 3,
    Diagonal = 4,
}

impl NoiseFamily {
    pub const ALL: [NoiseFamily; 5] = [
        NoiseFamily::J1,
        NoiseFamily::J2,
        NoiseFamily::J3,
        NoiseFamily::J,
        NoiseFamily::Diagonal,
    ];
}

/// One physical bond: `family` coupling number `index` between two sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bond {
    pub family: NoiseFamily,
    pub index: usize,
    pub sites: (usize, usize),
}

/// Every bond of the open chain, in site order.
///
/// Dimer: `A_j–B_j` (J1) and `B_j–A_{j+1}` (J2). Trimer: `A_j–B_j` (J1),
/// `B_j–C_j` (J2), `A_j–C_j` (J) and `C_j–A_{j+1}` (J3). The last cell of an
/// open chain has no outgoing bond.
pub fn bonds(spec: &ModelSpec) -> Vec<Bond> {
    let n = spec.n_sites;
    let mut out = Vec::with_capacity(2 * n);
    match spec.kind {
        ChainKind::Dimer => {
            for k in 0..n.saturating_sub(1) {
                let family = if k % 2 == 0 {
                    NoiseFamily::J1
                } else {
                    NoiseFamily::J2
                };
                out.push(Bond {
                    family,
                    index: k / 2,
                    sites: (k, k + 1),
                });
            }
        }
        ChainKind::Trimer => {
            for k in 0..n.saturating_sub(1) {
                let family = match k % 3 {
                    0 => NoiseFamily::J1,
                    1 => NoiseFamily::J2,
                    _ => NoiseFamily::J3,
                };
                out.push(Bond {
                    family,
                    index: k / 3,
                    sites: (k, k + 1),
                });
                if k % 3 == 0 && k + 2 < n {
                    out.push(Bond {
                        family: NoiseFamily::J,
                        index: k / 3,
                        sites: (k, k + 2),
                    });
                }
            }
        }
    }
    out
}

/// Number of perturbed elements per family implied by `spec`.
pub fn family_counts(spec: &ModelSpec) -> [usize; 5] {
    let mut counts = [0usize; 5];
    for b in bonds(spec) {
        counts[b.family as usize] += 1;
    }
    counts[NoiseFamily::Diagonal as usize] = spec.n_sites;
    counts
}

/// Disorder half-widths and the base seed. Every perturbed element gets
/// `μ·ω` with `ω` uniform on `[-1, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
    #[serde(default)]
    pub mu3: f64,
    #[serde(default)]
    pub mu_j: f64,
    #[serde(default)]
    pub mu_diag: f64,
    #[serde(default)]
    pub base_seed: u64,
}

impl DisorderSpec {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn bonds(mu1: f64, mu2: f64) -> Self {
        Self {
            mu1,
            mu2,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, base_seed: u64) -> Self {
        self.base_seed = base_seed;
        self
    }

    pub fn half_width(&self, family: NoiseFamily) -> f64 {
        match family {
            NoiseFamily::J1 => self.mu1,
            NoiseFamily::J2 => self.mu2,
            NoiseFamily::J3 => self.mu3,
            NoiseFamily::J => self.mu_j,
            NoiseFamily::Diagonal => self.mu_diag,
        }
    }

    pub fn is_clean(&self) -> bool {
        NoiseFamily::ALL.iter().all(|&f| self.half_width(f) == 0.0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for f in NoiseFamily::ALL {
            let mu = self.half_width(f);
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(ModelError::InvalidDisorder(format!(
                    "half-width for {f:?} must be finite and non-negative, got {mu}"
                )));
            }
        }
        Ok(())
    }
}

/// A single quenched disorder realization.
#[derive(Clone, Debug, PartialEq)]
pub struct BondNoise {
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub j3: Vec<f64>,
    pub j: Vec<f64>,
    pub diag: Vec<f64>,
    pub seed: u64,
}

impl BondNoise {
    /// All-zero offsets with the right shape for `spec`.
    pub fn zeros(spec: &ModelSpec) -> Self {
        let c = family_counts(spec);
        Self {
            j1: vec![0.0; c[0]],
            j2: vec![0.0; c[1]],
            j3: vec![0.0; c[2]],
            j: vec![0.0; c[3]],
            diag: vec![0.0; c[4]],
            seed: 0,
        }
    }

    pub fn offsets(&self, family: NoiseFamily) -> &[f64] {
        match family {
            NoiseFamily::J1 => &self.j1,
            NoiseFamily::J2 => &self.j2,
            NoiseFamily::J3 => &self.j3,
            NoiseFamily::J => &self.j,
            NoiseFamily::Diagonal => &self.diag,
        }
    }

    fn offsets_mut(&mut self, family: NoiseFamily) -> &mut Vec<f64> {
        match family {
            NoiseFamily::J1 => &mut self.j1,
            NoiseFamily::J2 => &mut self.j2,
            NoiseFamily::J3 => &mut self.j3,
            NoiseFamily::J => &mut self.j,
            NoiseFamily::Diagonal => &mut self.diag,
        }
    }

    pub fn check_shape(&self, spec: &ModelSpec) -> Result<(), ModelError> {
        let counts = family_counts(spec);
        for f in NoiseFamily::ALL {
            let found = self.offsets(f).len();
            if found != counts[f as usize] {
                return Err(ModelError::NoiseShape {
                    family: f,
                    expected: counts[f as usize],
                    found,
                });
            }
        }
        Ok(())
    }

    pub fn has_diagonal_disorder(&self) -> bool {
        self.diag.iter().any(|&d| d != 0.0)
    }

    /// Perturbed coupling `J_f + μ_f ω_{f,index}`.
    pub fn coupling(&self, spec: &ModelSpec, family: NoiseFamily, index: usize) -> f64 {
        spec.clean_coupling(family) + self.offsets(family)[index]
    }
}

/// Noise for realization `index` of the (0, 0) grid cell.
pub fn sample_noise(spec: &ModelSpec, dspec: &DisorderSpec, index: u64) -> BondNoise {
    sample_noise_seeded(spec, dspec, derive_seed(dspec.base_seed, 0, 0, index))
}

/// Noise drawn from an explicit seed; family `f` uses ChaCha8 stream `f`.
pub fn sample_noise_seeded(spec: &ModelSpec, dspec: &DisorderSpec, seed: u64) -> BondNoise {
    let mut noise = BondNoise::zeros(spec);
    noise.seed = seed;
    for family in NoiseFamily::ALL {
        let mu = dspec.half_width(family);
        if mu == 0.0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(family as u64);
        for x in noise.offsets_mut(family).iter_mut() {
            *x = mu * rng.random_range(-1.0..=1.0);
        }
    }
    noise
}

/// Restricted non-Hermitian Hamiltonian of the chain for one realization.
pub fn build_hamiltonian(spec: &ModelSpec, noise: &BondNoise) -> Result<ComplexMatrix, ModelError> {
    spec.validate()?;
    noise.check_shape(spec)?;
    let n = spec.n_sites;
    let mut h = ComplexMatrix::zeros(n);
    for site in 0..n {
        let loss = if spec.is_leaky(site) { spec.gamma } else { 0.0 };
        h.set(
            site,
            site,
            c64::new(spec.onsite(site) + noise.diag[site], -loss),
        );
    }
    for bond in bonds(spec) {
        let t = c64::new(noise.coupling(spec, bond.family, bond.index), 0.0);
        let (a, b) = bond.sites;
        h.set(a, b, t);
        h.set(b, a, t);
    }
    Ok(h)
}

pub fn clean_hamiltonian(spec: &ModelSpec) -> Result<ComplexMatrix, ModelError> {
    build_hamiltonian(spec, &BondNoise::zeros(spec))
}

/// Sublattice-ordered blocks of the Hamiltonian,
/// `H = [[Λ, V], [Vᵀ, ε_leaky − iΓ]]` after permuting sites by sublattice.
#[derive(Clone, Debug)]
pub struct SublatticeBlocks {
    /// Couplings among the non-leaky sites, `(n−1)M × (n−1)M`.
    pub lambda: ComplexMatrix,
    /// `M × M` hopping blocks from each non-leaky sublattice (A, then B) to
    /// the leaky one. Rows index the non-leaky cell, columns the leaky cell.
    pub v_blocks: Vec<ComplexMatrix>,
    /// Diagonal of the leaky block.
    pub leaky_diag: Vec<c64>,
}

impl SublatticeBlocks {
    pub fn cells(&self) -> usize {
        self.leaky_diag.len()
    }

    /// Stacked `V` as a dense `(n−1)M × M` matrix.
    pub fn v_stacked(&self) -> faer::Mat<c64> {
        let m = self.cells();
        let rows = m * self.v_blocks.len();
        faer::Mat::from_fn(rows, m, |i, j| self.v_blocks[i / m][(i % m, j)])
    }
}

/// Permutation taking sublattice order back to site order: entry `p` of the
/// result is the site index of sublattice-ordered position `p`.
pub fn sublattice_order(spec: &ModelSpec) -> Result<Vec<usize>, ModelError> {
    let m = spec.cells()?;
    let n = spec.cell_size();
    Ok((0..n).flat_map(|s| (0..m).map(move |c| c * n + s)).collect())
}

pub fn sublattice_blocks(
    spec: &ModelSpec,
    noise: &BondNoise,
) -> Result<SublatticeBlocks, ModelError> {
    spec.validate()?;
    noise.check_shape(spec)?;
    let m = spec.cells()?;
    let n = spec.cell_size();
    let eps = |site: usize| spec.onsite(site) + noise.diag[site];

    let k = (n - 1) * m;
    let mut lambda = ComplexMatrix::zeros(k);
    for s in 0..n - 1 {
        for c in 0..m {
            lambda.set(s * m + c, s * m + c, c64::new(eps(c * n + s), 0.0));
        }
    }
    let mut v_blocks = vec![ComplexMatrix::zeros(m); n - 1];
    for bond in bonds(spec) {
        let t = noise.coupling(spec, bond.family, bond.index);
        let (a, b) = bond.sites;
        let (ca, sa) = (a / n, a % n);
        let (cb, sb) = (b / n, b % n);
        let leak = n - 1;
        match (sa == leak, sb == leak) {
            (false, false) => {
                let (p, q) = (sa * m + ca, sb * m + cb);
                lambda.set(p, q, c64::new(t, 0.0));
                lambda.set(q, p, c64::new(t, 0.0));
            }
            (false, true) => v_blocks[sa].set(ca, cb, c64::new(t, 0.0)),
            (true, false) => v_blocks[sb].set(cb, ca, c64::new(t, 0.0)),
            (true, true) => unreachable!("one leaky site per cell"),
        }
    }
    let leaky_diag = (0..m)
        .map(|c| c64::new(eps(c * n + n - 1), -spec.gamma))
        .collect();
    Ok(SublatticeBlocks {
        lambda,
        v_blocks,
        leaky_diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn dimer_two_sites() {
        let spec = ModelSpec::dimer(2, 0.5, 1.0, 0.5);
        let h = clean_hamiltonian(&spec).unwrap();
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        assert_eq!(h[(0, 1)], c(0.5, 0.0));
        assert_eq!(h[(1, 0)], c(0.5, 0.0));
        assert_eq!(h[(1, 1)], c(0.0, -0.5));
    }

    #[test]
    fn fully_dimerized_first_site_is_dark() {
        for n in [2, 5, 10] {
            let h = clean_hamiltonian(&ModelSpec::dimer(n, 0.0, 1.0, 0.5)).unwrap();
            for i in 1..n {
                assert_eq!(h[(i, 0)], c(0.0, 0.0));
                assert_eq!(h[(0, i)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn trimer_six_sites_pattern() {
        let spec = ModelSpec::trimer(6, 1.0, 2.0, 3.0, 1.0, 0.5);
        let h = clean_hamiltonian(&spec).unwrap();
        // Sites: A1=0 B1=1 C1=2 A2=3 B2=4 C2=5, assembled index by index.
        let mut expected = [[c(0.0, 0.0); 6]; 6];
        for (a, b, t) in [
            (0, 1, 1.0),
            (1, 2, 2.0),
            (0, 2, 1.0),
            (2, 3, 3.0),
            (3, 4, 1.0),
            (4, 5, 2.0),
            (3, 5, 1.0),
        ] {
            expected[a][b] = c(t, 0.0);
            expected[b][a] = c(t, 0.0);
        }
        expected[2][2] = c(0.0, -0.5);
        expected[5][5] = c(0.0, -0.5);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(h[(i, j)], expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn odd_lengths_have_consistent_bond_counts() {
        let d = family_counts(&ModelSpec::dimer(7, 1.0, 1.0, 0.0));
        assert_eq!(&d[..4], &[3, 3, 0, 0]);
        let t = family_counts(&ModelSpec::trimer(299, 1.0, 2.0, 3.5, 1.0, 0.5));
        // 99 full cells plus a trailing A,B pair.
        assert_eq!(&t[..4], &[100, 99, 99, 99]);
    }

    #[test]
    fn zero_disorder_gives_exact_zeros() {
        let spec = ModelSpec::trimer(30, 1.0, 2.0, 3.0, 1.0, 0.5);
        let noise = sample_noise(&spec, &DisorderSpec::clean().with_seed(99), 3);
        assert_eq!(noise, BondNoise { seed: noise.seed, ..BondNoise::zeros(&spec) });
        for f in NoiseFamily::ALL {
            assert!(noise.offsets(f).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = ModelSpec::dimer(40, 0.5, 1.0, 0.5);
        let d = DisorderSpec::bonds(1.0, 0.0).with_seed(2024);
        assert_eq!(sample_noise(&spec, &d, 7), sample_noise(&spec, &d, 7));
        assert_ne!(sample_noise(&spec, &d, 7).j1, sample_noise(&spec, &d, 8).j1);
    }

    #[test]
    fn family_streams_are_independent_of_other_widths() {
        let spec = ModelSpec::dimer(40, 0.5, 1.0, 0.5);
        let a = sample_noise(&spec, &DisorderSpec::bonds(1.0, 0.0), 1);
        let b = sample_noise(&spec, &DisorderSpec::bonds(1.0, 0.7), 1);
        assert_eq!(a.j1, b.j1);
    }

    #[test]
    fn uniform_moments() {
        let spec = ModelSpec::dimer(2_000, 0.5, 1.0, 0.5);
        let d = DisorderSpec::bonds(1.0, 0.0).with_seed(5);
        let mut xs = Vec::new();
        for r in 0..100 {
            xs.extend(sample_noise(&spec, &d, r).j1);
        }
        assert_eq!(xs.len(), 100_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0 / 3.0).abs() < 0.01, "var {var}");
        assert!(xs.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let spec = ModelSpec::dimer(10, 0.5, 1.0, 0.5);
        let noise = BondNoise::zeros(&ModelSpec::dimer(12, 0.5, 1.0, 0.5));
        assert!(matches!(
            build_hamiltonian(&spec, &noise),
            Err(ModelError::NoiseShape { .. })
        ));
    }

    #[test]
    fn invalid_specs() {
        assert!(ModelSpec::dimer(1, 0.5, 1.0, 0.5).validate().is_err());
        assert!(ModelSpec::dimer(4, 0.5, 1.0, -0.1).validate().is_err());
        assert!(ModelSpec::dimer(4, f64::NAN, 1.0, 0.1).validate().is_err());
        assert!(DisorderSpec::bonds(-1.0, 0.0).validate().is_err());
    }

    #[test]
    fn dimer_blocks() {
        let spec = ModelSpec::dimer(4, 0.5, 1.0, 0.5);
        let blocks = sublattice_blocks(&spec, &BondNoise::zeros(&spec)).unwrap();
        assert_eq!(blocks.v_blocks.len(), 1);
        let v = &blocks.v_blocks[0];
        assert_eq!(v[(0, 0)], c(0.5, 0.0));
        assert_eq!(v[(0, 1)], c(0.0, 0.0));
        assert_eq!(v[(1, 0)], c(1.0, 0.0));
        assert_eq!(v[(1, 1)], c(0.5, 0.0));
        assert_eq!(blocks.lambda, ComplexMatrix::zeros(2));
        assert_eq!(blocks.leaky_diag, vec![c(0.0, -0.5); 2]);
    }

    #[test]
    fn dimer_blocks_decouple_without_inter_cell_bonds() {
        let spec = ModelSpec::dimer(10, 0.7, 0.0, 0.5);
        let v = sublattice_blocks(&spec, &BondNoise::zeros(&spec)).unwrap().v_blocks[0].clone();
        let gram = v.adjoint().matmul(&v);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(gram[(i, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn trimer_blocks() {
        let spec = ModelSpec::trimer(6, 1.0, 2.0, 3.0, 1.0, 0.5);
        let blocks = sublattice_blocks(&spec, &BondNoise::zeros(&spec)).unwrap();
        let (hac, hbc) = (&blocks.v_blocks[0], &blocks.v_blocks[1]);
        let expect_ac = [[1.0, 0.0], [3.0, 1.0]];
        let expect_bc = [[2.0, 0.0], [0.0, 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(hac[(i, j)], c(expect_ac[i][j], 0.0));
                assert_eq!(hbc[(i, j)], c(expect_bc[i][j], 0.0));
            }
        }
        // Λ = [[εA·I, J1·I], [J1·I, εB·I]]
        let l = &blocks.lambda;
        assert_eq!(l[(0, 2)], c(1.0, 0.0));
        assert_eq!(l[(1, 3)], c(1.0, 0.0));
        assert_eq!(l[(0, 3)], c(0.0, 0.0));
    }

    #[test]
    fn incomplete_cells_rejected_by_blocks() {
        let spec = ModelSpec::trimer(299, 1.0, 2.0, 3.5, 1.0, 0.5);
        assert!(matches!(
            sublattice_blocks(&spec, &BondNoise::zeros(&spec)),
            Err(ModelError::IncompleteCell { .. })
        ));
    }
}
