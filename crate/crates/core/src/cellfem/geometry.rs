use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusion shape, centered in the unit cell `[-1/2, 1/2]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Geometry {
    Circle { radius: f64 },
    Rectangle { a: f64, b: f64 },
}

impl Geometry {
    pub fn circle(radius: f64) -> Result<Self> {
        let g = Geometry::Circle { radius };
        g.validate()?;
        Ok(g)
    }

    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        let g = Geometry::Rectangle { a, b };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v < 0.5 && v.is_finite();
        match *self {
            Geometry::Circle { radius } if !ok(radius) => Err(Error::Geometry(format!(
                "circle radius {radius} must lie in (0, 0.5)"
            ))),
            Geometry::Rectangle { a, b } if !ok(a) || !ok(b) => Err(Error::Geometry(format!(
                "rectangle half-widths ({a}, {b}) must lie in (0, 0.5)"
            ))),
            _ => Ok(()),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Geometry::Circle { radius } => std::f64::consts::PI * radius * radius,
            Geometry::Rectangle { a, b } => 4.0 * a * b,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            Geometry::Circle { radius } => 2.0 * std::f64::consts::PI * radius,
            Geometry::Rectangle { a, b } => 4.0 * (a + b),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Geometry::Circle { radius } => p[0] * p[0] + p[1] * p[1] < radius * radius,
            Geometry::Rectangle { a, b } => p[0].abs() < a && p[1].abs() < b,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Geometry::Circle { radius } => format!("circle r={radius}"),
            Geometry::Rectangle { a, b } => format!("rectangle a={a} b={b}"),
        }
    }
}
