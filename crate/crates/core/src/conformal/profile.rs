//! Radial conformal factors `u(r)` supported in `[0, R]`.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ProfileKind {
    /// `u(r) = (1 − r² R⁻²)²`.
    Quartic,
    /// Any smooth profile with `u(R) = 0`, given with analytic derivatives.
    Custom {
        name: String,
        value: RadialFn,
        d1: RadialFn,
        d2: RadialFn,
    },
}

/// Conformal factor as a function of distance to a center, vanishing for `r ≥ R`.
#[derive(Clone)]
pub struct RadialProfile {
    radius: f64,
    kind: ProfileKind,
    mu0: Option<f64>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("kind", &self.name())
            .field("radius", &self.radius)
            .field("mu0", &self.mu0)
            .finish()
    }
}

impl RadialProfile {
    pub fn quartic(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            radius,
            kind: ProfileKind::Quartic,
            mu0: None,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        radius: f64,
        value: RadialFn,
        d1: RadialFn,
        d2: RadialFn,
    ) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            radius,
            kind: ProfileKind::Custom {
                name: name.into(),
                value,
                d1,
                d2,
            },
            mu0: None,
        })
    }

    /// `u(r) = (1 − r²)/2` on the unit disk: turns the flat metric into the
    /// Poincaré metric of curvature −1.
    pub fn poincare_disk() -> Self {
        Self::custom(
            "poincare-disk",
            1.0,
            Arc::new(|r| 0.5 * (1.0 - r * r)),
            Arc::new(|r| -r),
            Arc::new(|_| -1.0),
        )
        .expect("unit radius is valid")
    }

    /// Attach the ratio `μ₀ = L₀/R` of an estimate run.
    pub fn with_mu0(mut self, mu0: f64) -> Self {
        self.mu0 = Some(mu0);
        self
    }

    pub fn mu0(&self) -> Option<f64> {
        self.mu0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn is_quartic(&self) -> bool {
        matches!(self.kind, ProfileKind::Quartic)
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            ProfileKind::Quartic => "quartic",
            ProfileKind::Custom { name, .. } => name,
        }
    }

    fn inside(&self, r: f64) -> bool {
        r.abs() <= self.radius
    }

    pub fn value(&self, r: f64) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::Quartic => {
                let s = 1.0 - (r / self.radius).powi(2);
                s * s
            }
            ProfileKind::Custom { value, .. } => value(r),
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::Quartic => {
                let r2 = self.radius * self.radius;
                -4.0 * r / r2 * (1.0 - r * r / r2)
            }
            ProfileKind::Custom { d1, .. } => d1(r),
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::Quartic => {
                let r2 = self.radius * self.radius;
                -4.0 / r2 + 12.0 * r * r / (r2 * r2)
            }
            ProfileKind::Custom { d2, .. } => d2(r),
        }
    }

    /// `u′(r)/r`, extended by `u″(0)` at the origin.
    pub fn d1_over_r(&self, r: f64) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::Quartic => {
                let r2 = self.radius * self.radius;
                -4.0 / r2 * (1.0 - r * r / r2)
            }
            ProfileKind::Custom { d1, d2, .. } => {
                if r.abs() < 1e-8 {
                    d2(0.0)
                } else {
                    d1(r) / r
                }
            }
        }
    }

    /// `u″ − u′/r = r (u′/r)′`, evaluated without cancellation for the quartic profile.
    pub fn curvature_excess(&self, r: f64) -> f64 {
        if !self.inside(r) {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::Quartic => 8.0 * r * r / self.radius.powi(4),
            ProfileKind::Custom { .. } => self.d2(r) - self.d1_over_r(r),
        }
    }

    /// `u′²/u`, finite up to and including `r = R` for the quartic profile.
    pub fn d1_sq_over_value(&self, r: f64) -> Result<f64> {
        match &self.kind {
            ProfileKind::Quartic => {
                if r.abs() > self.radius {
                    return Err(Error::InvalidParameter(format!(
                        "r = {r} exceeds the profile radius {}",
                        self.radius
                    )));
                }
                Ok(16.0 * r * r / self.radius.powi(4))
            }
            ProfileKind::Custom { .. } => {
                let u = self.value(r);
                if u <= 0.0 {
                    return Err(Error::NonPositiveFactor(u));
                }
                Ok(self.d1(r).powi(2) / u)
            }
        }
    }

    /// Sup of `|u′|` on `[0, R]` for the quartic profile: `(8√3/9) R⁻¹`.
    pub fn gradient_bound(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Quartic => Some(8.0 * 3f64.sqrt() / 9.0 / self.radius),
            ProfileKind::Custom { .. } => None,
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "profile radius must be positive, got {radius}"
        )))
    }
}
