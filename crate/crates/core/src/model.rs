//! Covariance matrices of n-mode GHZ states and the loss/noise channel.
//!
//! Quadrature ordering is (x_1..x_n, p_1..p_n); vacuum variance is 1.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{min_eigenvalue_herm, C64};

/// Largest mode count for which a symmetric CM is expanded into a dense matrix.
pub const EXPAND_CAP: usize = 512;

/// Tolerance on the smallest eigenvalue of gamma + i*Omega.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Physical parameters of a lossy, noisy GHZ state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzParams {
    pub n: usize,
    pub r: f64,
    pub eta: f64,
    /// Mean thermal photon number of the environment.
    pub noise_n: f64,
}

impl GhzParams {
    pub fn new(n: usize, r: f64, eta: f64, noise_n: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("n = {n} must be >= 2"));
        }
        if !(r.is_finite() && r >= 0.0) {
            return domain(format!("squeezing r = {r} must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&eta) {
            return domain(format!("transmission eta = {eta} outside [0, 1]"));
        }
        if !(noise_n.is_finite() && noise_n >= 0.0) {
            return domain(format!("thermal photon number N = {noise_n} must be >= 0"));
        }
        Ok(Self { n, r, eta, noise_n })
    }

    /// Same as [`GhzParams::new`] with the noise given as v = N/(N+1).
    pub fn with_v(n: usize, r: f64, eta: f64, v: f64) -> Result<Self> {
        Self::new(n, r, eta, noise_from_v(v)?)
    }

    /// Excess noise added per quadrature, (1-eta)(2N+1).
    pub fn n1(&self) -> f64 {
        added_noise(self.eta, self.noise_n)
    }

    pub fn cm(&self) -> SymmetricCm {
        let pure = pure_ghz_cm(self.n, self.r).expect("validated");
        apply_loss_noise(&pure, self.eta, self.noise_n).expect("validated")
    }
}

pub fn added_noise(eta: f64, noise_n: f64) -> f64 {
    (1.0 - eta) * (2.0 * noise_n + 1.0)
}

/// N = v/(1-v); v must lie in [0, 1).
pub fn noise_from_v(v: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&v) {
        return domain(format!("noise parameter v = {v} outside [0, 1)"));
    }
    Ok(v / (1.0 - v))
}

pub fn v_from_noise(noise_n: f64) -> f64 {
    noise_n / (noise_n + 1.0)
}

/// Permutation-symmetric CM: gamma_x = (a-c) I + c J, gamma_p = (b+c) I - c J.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricCm {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicality {
    pub min_eigenvalue: f64,
    pub physical: bool,
}

impl Physicality {
    fn from_margin(min_eigenvalue: f64) -> Self {
        Self {
            min_eigenvalue,
            physical: min_eigenvalue >= -PHYSICALITY_TOL,
        }
    }
}

impl SymmetricCm {
    pub fn new(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("n = {n} must be >= 2"));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Validation("non-finite entry".into()));
        }
        Ok(Self { n, a, b, c })
    }

    pub fn gamma_x(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if i == j { self.a } else { self.c })
    }

    pub fn gamma_p(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if i == j { self.b } else { -self.c })
    }

    /// Dense 2n x 2n matrix; refuses above [`EXPAND_CAP`] modes.
    pub fn expand(&self) -> Result<FullCm> {
        if self.n > EXPAND_CAP {
            return Err(Error::Capacity {
                what: "modes for dense expansion",
                got: self.n as u64,
                limit: EXPAND_CAP as u64,
            });
        }
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.gamma_x());
        m.view_mut((n, n), (n, n)).copy_from(&self.gamma_p());
        Ok(FullCm { n, matrix: m })
    }

    /// Closed-form physicality margin.
    ///
    /// gamma_x and gamma_p commute, so gamma + i*Omega splits into 2x2 blocks
    /// [[x, -i], [i, p]] over the symmetric and orthogonal eigenspaces.
    pub fn physicality(&self) -> Physicality {
        let n = self.n as f64;
        let low = |x: f64, p: f64| 0.5 * ((x + p) - ((x - p).powi(2) + 4.0).sqrt());
        let sym = low(self.a + (n - 1.0) * self.c, self.b - (n - 1.0) * self.c);
        let perp = low(self.a - self.c, self.b + self.c);
        Physicality::from_margin(sym.min(perp))
    }
}

pub fn pure_ghz_cm(n: usize, r: f64) -> Result<SymmetricCm> {
    if n < 2 {
        return domain(format!("n = {n} must be >= 2"));
    }
    if !(r.is_finite() && r >= 0.0) {
        return domain(format!("squeezing r = {r} must be finite and >= 0"));
    }
    let nf = n as f64;
    let (e, ei) = ((2.0 * r).exp(), (-2.0 * r).exp());
    // c = sinh(2r) * 2/n, written without cancellation for small r
    let c = 2.0 * (2.0 * r).sinh() / nf;
    Ok(SymmetricCm {
        n,
        a: (e + (nf - 1.0) * ei) / nf,
        b: ((nf - 1.0) * e + ei) / nf,
        c,
    })
}

/// Each mode passes a beam splitter of transmission eta mixed with thermal noise N.
pub fn apply_loss_noise(cm: &SymmetricCm, eta: f64, noise_n: f64) -> Result<SymmetricCm> {
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("transmission eta = {eta} outside [0, 1]"));
    }
    if !(noise_n.is_finite() && noise_n >= 0.0) {
        return domain(format!("thermal photon number N = {noise_n} must be >= 0"));
    }
    let n1 = added_noise(eta, noise_n);
    Ok(SymmetricCm {
        n: cm.n,
        a: eta * cm.a + n1,
        b: eta * cm.b + n1,
        c: eta * cm.c,
    })
}

/// Omega = [[0, -I], [I, 0]] in (x, p) ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(i, n + i)] = -1.0;
        o[(n + i, i)] = 1.0;
    }
    o
}

/// A general 2n x 2n covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FullCm {
    n: usize,
    matrix: DMatrix<f64>,
}

impl FullCm {
    /// Validates shape and symmetry (relative tolerance 1e-10), then symmetrizes.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r % 2 != 0 || r == 0 {
            return Err(Error::Dimension(format!(
                "covariance matrix must be 2n x 2n, got {r} x {c}"
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite entry".into()));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..r {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::Validation(format!(
                        "not symmetric at ({i}, {j}): {} vs {}",
                        matrix[(i, j)],
                        matrix[(j, i)]
                    )));
                }
            }
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { n: r / 2, matrix: sym })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn gamma_x(&self) -> DMatrix<f64> {
        self.matrix.view((0, 0), (self.n, self.n)).into_owned()
    }

    pub fn gamma_p(&self) -> DMatrix<f64> {
        self.matrix.view((self.n, self.n), (self.n, self.n)).into_owned()
    }

    /// True when there are no x-p correlations.
    pub fn is_xp_block_diagonal(&self) -> bool {
        self.matrix
            .view((0, self.n), (self.n, self.n))
            .iter()
            .all(|&v| v == 0.0)
    }

    /// Reads (a, b, c) back if the matrix has the symmetric GHZ form.
    pub fn to_symmetric(&self, tol: f64) -> Option<SymmetricCm> {
        if self.n < 2 || !self.is_xp_block_diagonal() {
            return None;
        }
        let a = self.matrix[(0, 0)];
        let c = self.matrix[(0, 1)];
        let b = self.matrix[(self.n, self.n)];
        let cand = SymmetricCm::new(self.n, a, b, c).ok()?;
        let e = cand.expand().ok()?;
        let dev = (&e.matrix - &self.matrix).amax();
        (dev <= tol).then_some(cand)
    }

    /// gamma + i*Omega as a Hermitian matrix.
    pub fn with_symplectic(&self) -> DMatrix<C64> {
        let om = symplectic_form(self.n);
        DMatrix::from_fn(2 * self.n, 2 * self.n, |i, j| {
            C64::new(self.matrix[(i, j)], om[(i, j)])
        })
    }

    pub fn physicality(&self) -> Physicality {
        Physicality::from_margin(min_eigenvalue_herm(&self.with_symplectic()))
    }

    /// Relabels modes: new mode k is old mode `perm[k]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<FullCm> {
        let n = self.n;
        if perm.len() != n {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {} modes",
                perm.len(),
                n
            )));
        }
        let idx = |k: usize| if k < n { perm[k] } else { n + perm[k - n] };
        let m = DMatrix::from_fn(2 * n, 2 * n, |i, j| self.matrix[(idx(i), idx(j))]);
        FullCm::new(m)
    }
}

/// On-disk covariance matrix document (JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmDocument {
    pub format_version: u32,
    pub n: usize,
    /// "symmetric" (a, b, c) or "full" (row-major matrix).
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug)]
pub enum CovarianceMatrix {
    Symmetric(SymmetricCm),
    Full(FullCm),
}

impl CovarianceMatrix {
    pub fn n(&self) -> usize {
        match self {
            Self::Symmetric(s) => s.n,
            Self::Full(f) => f.n(),
        }
    }

    pub fn to_full(&self) -> Result<FullCm> {
        match self {
            Self::Symmetric(s) => s.expand(),
            Self::Full(f) => Ok(f.clone()),
        }
    }
}

pub fn parse_cm_document(text: &str) -> Result<CovarianceMatrix> {
    let doc: CmDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let field_err = |field: &str, message: String| Error::Parse {
        location: format!("field `{field}`"),
        message,
    };
    if doc.format_version != 1 {
        return Err(field_err(
            "format_version",
            format!("unsupported version {}", doc.format_version),
        ));
    }
    match doc.kind.as_str() {
        "symmetric" => {
            let get = |name: &str, v: Option<f64>| {
                v.ok_or_else(|| field_err(name, "required for kind \"symmetric\"".into()))
            };
            let cm = SymmetricCm::new(doc.n, get("a", doc.a)?, get("b", doc.b)?, get("c", doc.c)?)?;
            Ok(CovarianceMatrix::Symmetric(cm))
        }
        "full" => {
            let rows = doc
                .matrix
                .ok_or_else(|| field_err("matrix", "required for kind \"full\"".into()))?;
            let dim = 2 * doc.n;
            if rows.len() != dim {
                return Err(field_err(
                    "matrix",
                    format!("expected {dim} rows, found {}", rows.len()),
                ));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return Err(field_err(
                        &format!("matrix[{i}]"),
                        format!("expected {dim} entries, found {}", row.len()),
                    ));
                }
            }
            let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
            Ok(CovarianceMatrix::Full(FullCm::new(m)?))
        }
        other => Err(field_err(
            "kind",
            format!("expected \"symmetric\" or \"full\", found {other:?}"),
        )),
    }
}
