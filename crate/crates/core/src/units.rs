//! Unit-suffixed scalars for config files.
//!
//! A config key is a quantity name followed by a unit suffix, e.g. `w_um`,
//! `Omega_rf_MHz`, `V_rf_V`. Dimensionless quantities carry no suffix.
//! Angular-frequency quantities accept ordinary-frequency suffixes and
//! multiply by 2π (the `2π×70 MHz` convention), or `rad_per_s` verbatim.

use std::f64::consts::PI;

use crate::constants::{ATOMIC_MASS, ELEMENTARY_CHARGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Dimensionless,
    Length,
    Frequency,
    AngularFrequency,
    Voltage,
    Power,
    Time,
    Angle,
    Current,
    MagneticField,
    FieldGradient,
    MagneticMoment,
    Mass,
    Charge,
}

impl Quantity {
    /// Suffix used when writing the SI value back out. Angles stay in degrees
    /// because every angle in the toolkit's interfaces is in degrees.
    pub fn si_suffix(self) -> Option<&'static str> {
        use Quantity::*;
        Some(match self {
            Dimensionless => return None,
            Length => "m",
            Frequency => "Hz",
            AngularFrequency => "rad_per_s",
            Voltage => "V",
            Power => "W",
            Time => "s",
            Angle => "deg",
            Current => "A",
            MagneticField => "T",
            FieldGradient => "T_per_m",
            MagneticMoment => "J_per_T",
            Mass => "kg",
            Charge => "C",
        })
    }

    fn suffixes(self) -> &'static [(&'static str, f64)] {
        use Quantity::*;
        match self {
            Dimensionless => &[],
            Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9)],
            Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            AngularFrequency => &[
                ("rad_per_s", 1.0),
                ("Hz", 2.0 * PI),
                ("kHz", 2.0 * PI * 1e3),
                ("MHz", 2.0 * PI * 1e6),
                ("GHz", 2.0 * PI * 1e9),
            ],
            Voltage => &[("V", 1.0), ("mV", 1e-3)],
            Power => &[("W", 1.0), ("mW", 1e-3), ("uW", 1e-6), ("nW", 1e-9), ("pW", 1e-12)],
            Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)],
            Angle => &[("deg", 1.0), ("rad", 180.0 / PI)],
            Current => &[("A", 1.0), ("mA", 1e-3)],
            MagneticField => &[("T", 1.0), ("mT", 1e-3), ("uT", 1e-6)],
            FieldGradient => &[("T_per_m", 1.0)],
            MagneticMoment => &[("J_per_T", 1.0)],
            Mass => &[("kg", 1.0), ("u", ATOMIC_MASS)],
            Charge => &[("C", 1.0), ("e", ELEMENTARY_CHARGE)],
        }
    }

    /// Every accepted suffix, for error messages.
    pub fn accepted(self) -> Vec<&'static str> {
        let mut v: Vec<&str> = self.suffixes().iter().map(|s| s.0).collect();
        if self == Quantity::Power {
            v.push("dBm");
        }
        v
    }
}

/// Converts `value` given in `suffix` units to SI. `None` if the suffix is
/// not a unit of `q`.
pub fn to_si(q: Quantity, suffix: &str, value: f64) -> Option<f64> {
    if q == Quantity::Power && suffix == "dBm" {
        return Some(1e-3 * 10f64.powf(value / 10.0));
    }
    q.suffixes().iter().find(|(s, _)| *s == suffix).map(|(_, f)| value * f)
}

/// How a config key relates to a quantity name.
#[derive(Debug, PartialEq, Eq)]
pub enum KeyMatch<'a> {
    /// `key == name` (dimensionless) or `name_<suffix>`.
    Suffix(Option<&'a str>),
    NoMatch,
}

pub fn match_key<'a>(key: &'a str, name: &str, q: Quantity) -> KeyMatch<'a> {
    if key == name {
        return KeyMatch::Suffix(None);
    }
    if q != Quantity::Dimensionless {
        if let Some(rest) = key.strip_prefix(name).and_then(|r| r.strip_prefix('_')) {
            return KeyMatch::Suffix(Some(rest));
        }
    }
    KeyMatch::NoMatch
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(to_si(Quantity::Length, "um", 10.0), Some(10.0 * 1e-6));
        let w = to_si(Quantity::AngularFrequency, "MHz", 4.4).unwrap();
        assert!((w - 2.7646e7).abs() < 1e3);
        assert_eq!(to_si(Quantity::AngularFrequency, "rad_per_s", 5.0), Some(5.0));
        assert!((to_si(Quantity::Power, "dBm", 0.0).unwrap() - 1e-3).abs() < 1e-18);
        assert!((to_si(Quantity::Power, "dBm", -30.0).unwrap() - 1e-6).abs() < 1e-18);
        assert_eq!(to_si(Quantity::Length, "furlong", 1.0), None);
        assert!((to_si(Quantity::Angle, "rad", PI).unwrap() - 180.0).abs() < 1e-12);
    }

    #[test]
    fn key_matching() {
        assert_eq!(match_key("V_rf_V", "V_rf", Quantity::Voltage), KeyMatch::Suffix(Some("V")));
        assert_eq!(match_key("Q_int", "Q_int", Quantity::Dimensionless), KeyMatch::Suffix(None));
        assert_eq!(match_key("Q_int_x", "Q_int", Quantity::Dimensionless), KeyMatch::NoMatch);
        assert_eq!(match_key("w_um", "s", Quantity::Length), KeyMatch::NoMatch);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const ALL: [Quantity; 13] = [
            Quantity::Length,
            Quantity::Frequency,
            Quantity::AngularFrequency,
            Quantity::Voltage,
            Quantity::Power,
            Quantity::Time,
            Quantity::Angle,
            Quantity::Current,
            Quantity::MagneticField,
            Quantity::FieldGradient,
            Quantity::MagneticMoment,
            Quantity::Mass,
            Quantity::Charge,
        ];

        proptest! {
            #[test]
            fn si_suffix_is_the_identity(k in 0usize..13, v in -1e12f64..1e12) {
                let q = ALL[k];
                prop_assert_eq!(to_si(q, q.si_suffix().unwrap(), v), Some(v));
            }

            #[test]
            fn linear_units_scale(k in 0usize..13, v in -1e6f64..1e6, a in 0.1f64..10.0) {
                let q = ALL[k];
                for s in q.accepted() {
                    if s == "dBm" {
                        continue;
                    }
                    let (x, y) = (to_si(q, s, v).unwrap(), to_si(q, s, a * v).unwrap());
                    prop_assert!((y - a * x).abs() <= 1e-12 * y.abs().max(1e-300));
                }
            }

            #[test]
            fn dbm_steps_are_decades(p in -100.0f64..40.0) {
                let (x, y) = (to_si(Quantity::Power, "dBm", p).unwrap(), to_si(Quantity::Power, "dBm", p + 10.0).unwrap());
                prop_assert!((y / x - 10.0).abs() < 1e-9);
            }
        }
    }
}
