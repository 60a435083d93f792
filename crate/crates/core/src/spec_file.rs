//! The versioned JSON input format describing a finite quantum group.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builders::{self, FiniteQuantumGroup, GroupTable};
use crate::error::{Error, Result};
use crate::numlin::{c64, CMatrix, CVector, Tolerance, ZERO};
use crate::star_algebra::StarAlgebra;

pub const SPEC_VERSION: u32 = 1;

const KAC_PALJUTKIN: &str = include_str!("../data/kac_paljutkin.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    GroupFunction,
    GroupAlgebra,
    StructureConstants,
    KacPaljutkin,
}

/// Complex numbers appear as trailing `re, im` pairs in every entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGSpecFile {
    pub version: u32,
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Cayley table for the group kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// `(i, j, k, re, im)`: coefficient of `e_k` in `e_i e_j`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub product: Vec<(usize, usize, usize, f64, f64)>,
    /// `(i, j, re, im)`: coefficient of `e_j` in `e_i^*`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub involution: Vec<(usize, usize, f64, f64)>,
    /// `(k, re, im)`: coordinates of the unit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unit: Vec<(usize, f64, f64)>,
    /// `(k, i, j, re, im)`: coefficient of `e_i ⊗ e_j` in `Δ(e_k)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comultiplication: Vec<(usize, usize, usize, f64, f64)>,
}

/// Algebra and comultiplication before any Haar weight is known.
#[derive(Clone, Debug)]
pub struct RawStructure {
    pub name: String,
    pub alg: StarAlgebra,
    pub comul: CMatrix,
}

impl QGSpecFile {
    pub fn group(kind: SpecKind, table: &GroupTable, name: &str) -> Self {
        QGSpecFile {
            version: SPEC_VERSION,
            kind,
            name: Some(name.to_string()),
            table: Some(table.rows()),
            dim: None,
            labels: None,
            product: Vec::new(),
            involution: Vec::new(),
            unit: Vec::new(),
            comultiplication: Vec::new(),
        }
    }

    pub fn kac_paljutkin() -> Self {
        QGSpecFile::parse(KAC_PALJUTKIN).expect("bundled data parses")
    }

    /// Sparse structure-constant description of an already built structure.
    pub fn from_structure(name: &str, alg: &StarAlgebra, comul: &CMatrix) -> Self {
        let n = alg.dim();
        let nz = |z: num_complex::Complex64| z.norm() > 0.0;
        let mut product = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let z = alg.c(i, j, k);
                    if nz(z) {
                        product.push((i, j, k, z.re, z.im));
                    }
                }
            }
        }
        let s = alg.involution();
        let involution = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| nz(s[(i, j)]))
            .map(|(i, j)| (i, j, s[(i, j)].re, s[(i, j)].im))
            .collect();
        let unit = (0..n).filter(|&k| nz(alg.unit()[k])).map(|k| (k, alg.unit()[k].re, alg.unit()[k].im)).collect();
        let mut comultiplication = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let z = comul[(i * n + j, k)];
                    if nz(z) {
                        comultiplication.push((k, i, j, z.re, z.im));
                    }
                }
            }
        }
        QGSpecFile {
            version: SPEC_VERSION,
            kind: SpecKind::StructureConstants,
            name: Some(name.to_string()),
            table: None,
            dim: Some(n),
            labels: Some(alg.labels().to_vec()),
            product,
            involution,
            unit,
            comultiplication,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let spec: QGSpecFile = serde_json::from_str(text).map_err(|e| Error::SpecInvalid(e.to_string()))?;
        if spec.version != SPEC_VERSION {
            return Err(Error::VersionUnsupported(spec.version));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        QGSpecFile::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("{:?}", self.kind).to_lowercase())
    }

    fn table(&self) -> Result<GroupTable> {
        let rows = self.table.as_ref().ok_or_else(|| Error::SpecInvalid("group kinds need a `table`".into()))?;
        GroupTable::from_rows(rows.clone())
    }

    /// Algebra and comultiplication, validated only for index ranges.
    pub fn structure(&self) -> Result<RawStructure> {
        let name = self.name();
        match self.kind {
            SpecKind::GroupFunction => {
                let (alg, comul) = builders::function_algebra_structure(&self.table()?);
                Ok(RawStructure { name, alg, comul })
            }
            SpecKind::GroupAlgebra => {
                let (alg, comul) = builders::group_algebra_structure(&self.table()?);
                Ok(RawStructure { name, alg, comul })
            }
            SpecKind::KacPaljutkin => {
                let mut raw = QGSpecFile::kac_paljutkin().structure()?;
                raw.name = self.name.clone().unwrap_or_else(|| "kac_paljutkin".into());
                Ok(raw)
            }
            SpecKind::StructureConstants => self.sparse_structure(name),
        }
    }

    fn sparse_structure(&self, name: String) -> Result<RawStructure> {
        let n = self.dim.ok_or_else(|| Error::SpecInvalid("structure_constants needs `dim`".into()))?;
        if n == 0 {
            return Err(Error::SpecInvalid("dim must be positive".into()));
        }
        let bad = |what: &str| Error::SpecInvalid(format!("{what} index out of range for dim {n}"));
        let mut structure = vec![ZERO; n * n * n];
        for &(i, j, k, re, im) in &self.product {
            if i >= n || j >= n || k >= n {
                return Err(bad("product"));
            }
            structure[(i * n + j) * n + k] += c64(re, im);
        }
        let mut star = CMatrix::zeros(n, n);
        for &(i, j, re, im) in &self.involution {
            if i >= n || j >= n {
                return Err(bad("involution"));
            }
            star[(i, j)] += c64(re, im);
        }
        let mut unit = CVector::zeros(n);
        for &(k, re, im) in &self.unit {
            if k >= n {
                return Err(bad("unit"));
            }
            unit[k] += c64(re, im);
        }
        let mut comul = CMatrix::zeros(n * n, n);
        for &(k, i, j, re, im) in &self.comultiplication {
            if i >= n || j >= n || k >= n {
                return Err(bad("comultiplication"));
            }
            comul[(i * n + j, k)] += c64(re, im);
        }
        let labels = match &self.labels {
            Some(l) if l.len() == n => l.clone(),
            Some(l) => return Err(Error::SpecInvalid(format!("{} labels for dim {n}", l.len()))),
            None => (0..n).map(|k| format!("e{k}")).collect(),
        };
        let alg = StarAlgebra::new(structure, star, unit, labels)?;
        Ok(RawStructure { name, alg, comul })
    }

    /// Builds the quantum group including its Haar functionals.
    pub fn build(&self, tol: Tolerance) -> Result<FiniteQuantumGroup> {
        let raw = self.structure()?;
        FiniteQuantumGroup::new(raw.name, raw.alg, raw.comul, tol)
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 13] =
    ["c-trivial", "l-trivial", "c-z2", "l-z2", "c-z3", "l-z3", "c-z4", "l-z4", "c-s3", "l-s3", "c-q8", "l-q8", "kp"];

/// Bundled examples: `c-<group>` is the function algebra, `l-<group>` the
/// group algebra, `kp` the Kac–Paljutkin algebra.
pub fn builtin(name: &str) -> Result<QGSpecFile> {
    let name = name.to_ascii_lowercase();
    if name == "kp" || name == "kac_paljutkin" {
        return Ok(QGSpecFile::kac_paljutkin());
    }
    let unknown = || Error::SpecInvalid(format!("unknown example `{name}`; known: {}", BUILTIN_NAMES.join(", ")));
    let (kind, group) = name.split_once('-').ok_or_else(unknown)?;
    let kind = match kind {
        "c" => SpecKind::GroupFunction,
        "l" => SpecKind::GroupAlgebra,
        _ => return Err(unknown()),
    };
    let (table, label) = match group {
        "trivial" => (GroupTable::trivial(), "trivial".to_string()),
        "s3" => (GroupTable::symmetric3(), "S3".to_string()),
        "q8" => (GroupTable::quaternion8(), "Q8".to_string()),
        g => match g.strip_prefix('z').and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if k >= 1 => (GroupTable::cyclic(k), format!("Z{k}")),
            _ => return Err(unknown()),
        },
    };
    let prefix = if kind == SpecKind::GroupFunction { "C" } else { "L" };
    Ok(QGSpecFile::group(kind, &table, &format!("{prefix}({label})")))
}
