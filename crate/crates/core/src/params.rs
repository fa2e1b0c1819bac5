//! System parameters of the dissipative two-level system.
//!
//! All dynamics run in the interaction picture of the Zeeman Hamiltonian, so the
//! Larmor frequency never appears here. Times carry whatever unit the caller
//! picked (units of T2 by default in sequence files, seconds when requested).

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative tolerance within which a user-supplied (t1, t2, tphi) triple is
/// accepted as consistent.
pub const T2_CONSISTENCY_TOL: f64 = 1e-9;

/// Relative tolerance of the `1/t2 = 1/(2 t1) + 1/tphi` identity on every
/// constructed [`SystemParams`].
pub const T2_IDENTITY_TOL: f64 = 1e-12;

/// Pure dephasing timescale. `Infinite` is the pure-relaxation limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dephasing {
    Finite(f64),
    Infinite,
}

impl Dephasing {
    /// `1 / tphi`, zero for the infinite marker.
    pub fn rate(self) -> f64 {
        match self {
            Dephasing::Finite(t) => 1.0 / t,
            Dephasing::Infinite => 0.0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Dephasing::Finite(t) => t,
            Dephasing::Infinite => f64::INFINITY,
        }
    }

    /// Maps `f64::INFINITY` onto the explicit marker.
    pub fn from_f64(t: f64) -> Self {
        if t == f64::INFINITY {
            Dephasing::Infinite
        } else {
            Dephasing::Finite(t)
        }
    }
}

impl fmt::Display for Dephasing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dephasing::Finite(t) => write!(f, "{t}"),
            Dephasing::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dephasing {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dephasing::Finite(t) => s.serialize_f64(*t),
            Dephasing::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Unvalidated parameter set. At most one of the three timescales may be
/// left as `None`; it is solved from the other two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub t_phi: Option<Dephasing>,
    pub m_eq: f64,
    pub omega1: f64,
}

/// Validated dissipation timescales, equilibrium magnetization and drive
/// amplitude. Construct through [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    t1: f64,
    t2: f64,
    t_phi: Dephasing,
    m_eq: f64,
    omega1: f64,
}

impl SystemParams {
    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn t_phi(&self) -> Dephasing {
        self.t_phi
    }

    pub fn m_eq(&self) -> f64 {
        self.m_eq
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    /// Rate of the raising jump operator, `(1 + M∘) / (2 T1)`.
    pub fn gamma_up(&self) -> f64 {
        (1.0 + self.m_eq) / (2.0 * self.t1)
    }

    /// Rate of the lowering jump operator, `(1 - M∘) / (2 T1)`.
    pub fn gamma_down(&self) -> f64 {
        (1.0 - self.m_eq) / (2.0 * self.t1)
    }

    /// Rate of the `σz` jump operator, `1 / (2 Tφ)`.
    pub fn gamma_phi(&self) -> f64 {
        0.5 * self.t_phi.rate()
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            t1: Some(self.t1),
            t2: Some(self.t2),
            t_phi: Some(self.t_phi),
            m_eq: self.m_eq,
            omega1: self.omega1,
        }
    }

    /// Parameters in units of T2 (t2 = 1) for a given `T1/T2` ratio.
    pub fn from_ratio(t1_over_t2: f64, m_eq: f64, omega1: f64) -> Result<Self> {
        validate_params(RawParams { t1: Some(t1_over_t2), t2: Some(1.0), t_phi: None, m_eq, omega1 })
    }

    /// Same parameters with a different equilibrium magnetization.
    pub fn with_m_eq(&self, m_eq: f64) -> Result<Self> {
        validate_params(RawParams { m_eq, ..self.to_raw() })
    }
}

fn check_time(name: &'static str, t: Option<f64>) -> Result<()> {
    match t {
        Some(v) if !v.is_finite() => Err(Error::NonFinite { name }),
        Some(v) if v <= 0.0 => Err(Error::NonPositiveTimescale { name, value: v }),
        _ => Ok(()),
    }
}

/// Completes and validates a parameter set.
///
/// The missing timescale (if any) is solved from `1/T2 = 1/(2 T1) + 1/Tφ`.
pub fn validate_params(raw: RawParams) -> Result<SystemParams> {
    if !raw.m_eq.is_finite() {
        return Err(Error::NonFinite { name: "meq" });
    }
    if !raw.omega1.is_finite() {
        return Err(Error::NonFinite { name: "omega1" });
    }
    check_time("t1", raw.t1)?;
    check_time("t2", raw.t2)?;
    if let Some(Dephasing::Finite(t)) = raw.t_phi {
        check_time("tphi", Some(t))?;
    }
    if raw.omega1 <= 0.0 {
        return Err(Error::NonPositiveTimescale { name: "omega1", value: raw.omega1 });
    }
    if raw.m_eq.abs() > 1.0 {
        return Err(Error::MagnetizationOutOfRange(format!("|meq| = {} > 1", raw.m_eq.abs())));
    }

    let (t1, t2, t_phi) = match (raw.t1, raw.t2, raw.t_phi) {
        (Some(t1), Some(t2), Some(t_phi)) => {
            let expected = 0.5 / t1 + t_phi.rate();
            let inv_t2 = 1.0 / t2;
            let rel = (inv_t2 - expected).abs() / inv_t2;
            if rel > T2_CONSISTENCY_TOL {
                return Err(Error::InconsistentT2 { inv_t2, expected });
            }
            let t2 = if rel > T2_IDENTITY_TOL { 1.0 / expected } else { t2 };
            (t1, t2, t_phi)
        }
        (Some(t1), None, Some(t_phi)) => (t1, 1.0 / (0.5 / t1 + t_phi.rate()), t_phi),
        (Some(t1), Some(t2), None) => {
            let inv_t2 = 1.0 / t2;
            let rate_phi = inv_t2 - 0.5 / t1;
            let t_phi = if rate_phi.abs() <= T2_IDENTITY_TOL * inv_t2 {
                Dephasing::Infinite
            } else if rate_phi < 0.0 {
                return Err(Error::InconsistentT2 { inv_t2, expected: 0.5 / t1 });
            } else {
                Dephasing::Finite(1.0 / rate_phi)
            };
            (t1, t2, t_phi)
        }
        (None, Some(t2), Some(t_phi)) => {
            let inv_t2 = 1.0 / t2;
            let half_rate1 = inv_t2 - t_phi.rate();
            if half_rate1 <= T2_IDENTITY_TOL * inv_t2 {
                return Err(Error::InconsistentT2 { inv_t2, expected: t_phi.rate() });
            }
            (0.5 / half_rate1, t2, t_phi)
        }
        _ => return Err(Error::MissingTimescale("at least two of t1, t2, tphi must be given".into())),
    };

    Ok(SystemParams { t1, t2, t_phi, m_eq: raw.m_eq, omega1: raw.omega1 })
}
