use serde::{Deserialize, Serialize};

use super::{DirectionCosines, GeometryError};

/// Determinants at or below this magnitude are treated as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveKind {
    ThreeSat,
    VirtualSat,
}

/// Position and clock corrections in metres. `determinant` is `D` for the
/// three-satellite system and `D' = f2 - f1` for the virtual-satellite one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub delta_u: f64,
    pub delta_v: f64,
    pub delta_b: f64,
    pub determinant: f64,
    pub kind: SolveKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnificationUV {
    pub m_u: Option<f64>,
    pub m_v: Option<f64>,
    pub admissible: bool,
    /// Satellite order under which every cyclic cofactor is positive.
    pub permutation: Option<[usize; 3]>,
}

impl MagnificationUV {
    fn inadmissible() -> Self {
        Self {
            m_u: None,
            m_v: None,
            admissible: false,
            permutation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnificationS {
    pub m_s: Option<f64>,
    pub admissible: bool,
    /// Pair order with the negative cosine first.
    pub permutation: Option<[usize; 2]>,
}

impl MagnificationS {
    /// Upper bound on `|ds|` for a clock-bias error of magnitude `clock_bias_error`.
    pub fn along_track_bound(&self, clock_bias_error: f64) -> Option<f64> {
        self.m_s.map(|m| m * clock_bias_error.abs())
    }
}

/// Cyclic cofactors `(f2 h3 - f3 h2, f3 h1 - f1 h3, f1 h2 - f2 h1)`; the
/// `j`-th is the `j`-th entry of the last adjugate row.
fn cofactors(s: &[DirectionCosines; 3]) -> [f64; 3] {
    [
        s[1].f * s[2].h - s[2].f * s[1].h,
        s[2].f * s[0].h - s[0].f * s[2].h,
        s[0].f * s[1].h - s[1].f * s[0].h,
    ]
}

/// `D = f1 h2 - f2 h1 + f2 h3 - f3 h2 + f3 h1 - f1 h3`, the determinant of
/// `[[f1, h1, 1], [f2, h2, 1], [f3, h3, 1]]`.
pub fn determinant_d(sats: &[DirectionCosines; 3]) -> f64 {
    let [c1, c2, c3] = cofactors(sats);
    c3 + c1 + c2
}

/// Closed-form inverse `adj(A) / D` of the forward matrix
/// `A = [[f1, h1, 1], [f2, h2, 1], [f3, h3, 1]]`. Rows map residuals to
/// `du`, `dv` and `db`.
pub fn inverse_forward_matrix(sats: &[DirectionCosines; 3]) -> Result<[[f64; 3]; 3], GeometryError> {
    let d = determinant_d(sats);
    if !d.is_finite() || d.abs() <= DEGENERACY_THRESHOLD {
        return Err(GeometryError::Degenerate(d));
    }
    let [s1, s2, s3] = sats;
    let c = cofactors(sats);
    Ok([
        [(s2.h - s3.h) / d, (s3.h - s1.h) / d, (s1.h - s2.h) / d],
        [(s3.f - s2.f) / d, (s1.f - s3.f) / d, (s2.f - s1.f) / d],
        [c[0] / d, c[1] / d, c[2] / d],
    ])
}

/// Solves `r_j = f_j du + h_j dv + db` for three satellites through the
/// closed-form adjugate.
pub fn solve_three_sat(sats: &[DirectionCosines; 3], residuals: &[f64; 3]) -> Result<SolveResult, GeometryError> {
    let inv = inverse_forward_matrix(sats)?;
    let row = |k: usize| inv[k][0] * residuals[0] + inv[k][1] * residuals[1] + inv[k][2] * residuals[2];
    Ok(SolveResult {
        delta_u: row(0),
        delta_v: row(1),
        delta_b: row(2),
        determinant: determinant_d(sats),
        kind: SolveKind::ThreeSat,
    })
}

/// Finds a satellite ordering under which `f_j h_{j+1} - f_{j+1} h_j > 0` for
/// `j = 1, 2, 3` cyclically. All six orderings are tried in lexicographic order.
pub fn sign_condition(sats: &[DirectionCosines; 3]) -> Option<[usize; 3]> {
    PERMUTATIONS.into_iter().find(|p| {
        let permuted = p.map(|i| sats[i]);
        cofactors(&permuted).iter().all(|&c| c > 0.0)
    })
}

/// Along-track and cross-track magnification coefficients:
///
/// ```text
/// M_u = max |h_j - h_k| / min |f_j h_k - f_k h_j|
/// M_v = max |f_j - f_k| / min |f_j h_k - f_k h_j|
/// ```
///
/// Admissible only when [`sign_condition`] finds an ordering.
pub fn magnification_uv(sats: &[DirectionCosines; 3]) -> MagnificationUV {
    let Some(permutation) = sign_condition(sats) else {
        return MagnificationUV::inadmissible();
    };
    let s = permutation.map(|i| sats[i]);
    let min_cofactor = cofactors(&s).into_iter().fold(f64::INFINITY, f64::min);
    if !(min_cofactor > 0.0) {
        return MagnificationUV::inadmissible();
    }
    let spread = |x: [f64; 3]| {
        [(x[1] - x[2]).abs(), (x[2] - x[0]).abs(), (x[0] - x[1]).abs()]
            .into_iter()
            .fold(0.0, f64::max)
    };
    MagnificationUV {
        m_u: Some(spread(s.map(|c| c.h)) / min_cofactor),
        m_v: Some(spread(s.map(|c| c.f)) / min_cofactor),
        admissible: true,
        permutation: Some(permutation),
    }
}

/// Two physical satellites plus a virtual one holding the receiver on the
/// track: solves `r_j = f_j ds + db`, with `dv = 0`.
pub fn solve_two_sat(
    sat1: DirectionCosines,
    sat2: DirectionCosines,
    residuals: &[f64; 2],
) -> Result<SolveResult, GeometryError> {
    let d_prime = sat2.f - sat1.f;
    if !d_prime.is_finite() || d_prime.abs() <= DEGENERACY_THRESHOLD {
        return Err(GeometryError::Degenerate(d_prime));
    }
    let [r1, r2] = *residuals;
    Ok(SolveResult {
        delta_u: (r2 - r1) / d_prime,
        delta_v: 0.0,
        delta_b: (sat2.f * r1 - sat1.f * r2) / d_prime,
        determinant: d_prime,
        kind: SolveKind::VirtualSat,
    })
}

/// `M_s = 1 / min(|f1|, |f2|)`, admissible when the cosines have opposite signs.
pub fn magnification_s(sat1: DirectionCosines, sat2: DirectionCosines) -> MagnificationS {
    if !(sat1.f * sat2.f < 0.0) {
        return MagnificationS {
            m_s: None,
            admissible: false,
            permutation: None,
        };
    }
    let permutation = if sat1.f < 0.0 { [0, 1] } else { [1, 0] };
    MagnificationS {
        m_s: Some(1.0 / sat1.f.abs().min(sat2.f.abs())),
        admissible: true,
        permutation: Some(permutation),
    }
}
