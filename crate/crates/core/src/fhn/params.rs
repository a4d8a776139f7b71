use serde::{Deserialize, Serialize};

use super::ModelError;

/// Model and integration constants.
///
/// `u_display` is the threshold for rendering a node as excited in frames;
/// `u_active` is the threshold used by activity, frequency and reachability
/// measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub dt: f64,
    pub dx: f64,
    pub d_u: f64,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub u_display: f64,
    pub u_active: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.015,
            dx: 2.0,
            d_u: 1.0,
            a: 0.13,
            b: 0.013,
            c1: 0.26,
            c2: 0.1,
            u_display: 0.04,
            u_active: 0.1,
        }
    }
}

/// Excitability range accepted for `c2`: 0.09 is fully excitable, 0.13
/// is non-excitable.
pub const C2_RANGE: std::ops::RangeInclusive<f64> = 0.09..=0.13;

impl SimParams {
    pub fn with_c2(self, c2: f64) -> Self {
        Self { c2, ..self }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let checks = [
            ("dt", self.dt > 0.0),
            ("dx", self.dx > 0.0),
            ("d_u", self.d_u >= 0.0),
            ("a", self.a > 0.0 && self.a < 1.0),
            ("b", self.b > 0.0),
            ("c1", self.c1 > 0.0),
            ("c2", C2_RANGE.contains(&self.c2)),
            ("u_display", self.u_display.is_finite()),
            ("u_active", self.u_active.is_finite()),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(ModelError::InvalidParam {
                    name,
                    value: self.get(name).unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Look up a field by name (used by parameter sweeps).
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "dt" => self.dt,
            "dx" => self.dx,
            "d_u" => self.d_u,
            "a" => self.a,
            "b" => self.b,
            "c1" => self.c1,
            "c2" => self.c2,
            "u_display" => self.u_display,
            "u_active" => self.u_active,
            _ => return None,
        })
    }

    /// Set a field by name; `false` if there is no such field.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "dt" => &mut self.dt,
            "dx" => &mut self.dx,
            "d_u" => &mut self.d_u,
            "a" => &mut self.a,
            "b" => &mut self.b,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "u_display" => &mut self.u_display,
            "u_active" => &mut self.u_active,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// Local reaction term of the fast variable (without current or diffusion).
    #[inline(always)]
    pub fn reaction_u(&self, u: f64, v: f64) -> f64 {
        self.c1 * u * (u - self.a) * (1.0 - u) - self.c2 * u * v
    }

    #[inline(always)]
    pub fn reaction_v(&self, u: f64, v: f64) -> f64 {
        self.b * (u - v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimParams::default().validate().unwrap();
    }

    #[test]
    fn c2_outside_range_rejected() {
        for c2 in [0.013, 0.0, 0.2] {
            let err = SimParams::default().with_c2(c2).validate().unwrap_err();
            assert!(matches!(err, ModelError::InvalidParam { name: "c2", .. }));
        }
        SimParams::default().with_c2(0.13).validate().unwrap();
    }

    #[test]
    fn threshold_a_must_be_in_unit_interval() {
        let p = SimParams {
            a: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn get_set_by_name() {
        let mut p = SimParams::default();
        assert!(p.set("c2", 0.107));
        assert_eq!(p.get("c2"), Some(0.107));
        assert!(!p.set("gamma", 1.0));
        assert_eq!(p.get("gamma"), None);
    }
}
