use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// One of the three geodesic boundary pieces of the fundamental domain.
///
/// `Delta1` is `z = iy`, `Delta2` is `z = 1/2 + iy` (parameter `y`), `Delta3` is the arc
/// `z = e^(i theta)` with `theta` in `[pi/2, 2 pi/3]` (parameter `theta`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Delta1,
    Delta2,
    Delta3,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::Delta1, Segment::Delta2, Segment::Delta3];

    /// Parameter range inside the closed fundamental domain (vertical lines are unbounded above).
    pub fn range(self) -> (f64, f64) {
        match self {
            Segment::Delta1 => (1.0, f64::INFINITY),
            Segment::Delta2 => (3f64.sqrt() / 2.0, f64::INFINITY),
            Segment::Delta3 => (PI / 2.0, 2.0 * PI / 3.0),
        }
    }

    /// `(alpha, y)` for a parameter value.
    pub fn point(self, param: f64) -> (f64, f64) {
        match self {
            Segment::Delta1 => (0.0, param),
            Segment::Delta2 => (0.5, param),
            Segment::Delta3 => (param.cos(), param.sin()),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Segment::Delta1 => "delta1",
            Segment::Delta2 => "delta2",
            Segment::Delta3 => "delta3",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Segment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "delta1" | "d1" | "1" => Ok(Segment::Delta1),
            "delta2" | "d2" | "2" => Ok(Segment::Delta2),
            "delta3" | "d3" | "3" => Ok(Segment::Delta3),
            _ => Err(Error::InvalidArgument(format!("unknown segment {s}"))),
        }
    }
}
