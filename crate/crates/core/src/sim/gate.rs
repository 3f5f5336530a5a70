use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate vocabulary shared by logical and transpiled circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    SX,
    Id,
    RX,
    RY,
    RZ,
    CNOT,
    ZZ,
    SWAP,
    Measure,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::H,
        GateKind::X,
        GateKind::SX,
        GateKind::Id,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CNOT,
        GateKind::ZZ,
        GateKind::SWAP,
        GateKind::Measure,
    ];

    /// Lower-case name as used in device profiles (`cx` for CNOT).
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::SX => "sx",
            GateKind::Id => "id",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::CNOT => "cx",
            GateKind::ZZ => "zz",
            GateKind::SWAP => "swap",
            GateKind::Measure => "measure",
        }
    }

    pub fn parse(s: &str) -> Result<GateKind> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "cnot" => return Ok(GateKind::CNOT),
            "i" => return Ok(GateKind::Id),
            _ => {}
        }
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gate kind '{s}'")))
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CNOT | GateKind::ZZ | GateKind::SWAP => 2,
            _ => 1,
        }
    }

    pub fn takes_angle(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::ZZ)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reference from a gate angle to a trainable slot: `angle = scale * value + offset`.
///
/// `occurrence` numbers the gates sharing one slot so a single occurrence can be
/// shifted on its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotRef {
    pub slot: usize,
    pub occurrence: usize,
    pub scale: f64,
    pub offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Slot(SlotRef),
}

impl Angle {
    /// Affine map applied on top of the current angle, used by decomposition rules.
    pub fn affine(self, scale: f64, offset: f64) -> Angle {
        match self {
            Angle::Fixed(v) => Angle::Fixed(scale * v + offset),
            Angle::Slot(r) => Angle::Slot(SlotRef {
                scale: scale * r.scale,
                offset: scale * r.offset + offset,
                ..r
            }),
        }
    }

    pub fn resolve(&self, bindings: Option<&Bindings<'_>>) -> Result<f64> {
        match *self {
            Angle::Fixed(v) => Ok(v),
            Angle::Slot(r) => {
                let b = bindings.ok_or(Error::UnboundSlot(r.slot))?;
                let mut value = *b.values.get(r.slot).ok_or(Error::UnboundSlot(r.slot))?;
                if let Some(shift) = b.shift {
                    if shift.slot == r.slot && shift.occurrence.is_none_or(|o| o == r.occurrence) {
                        value += shift.delta;
                    }
                }
                Ok(r.scale * value + r.offset)
            }
        }
    }
}

/// Shift of one slot (optionally a single occurrence of it) applied at bind time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OccurrenceShift {
    pub slot: usize,
    pub occurrence: Option<usize>,
    pub delta: f64,
}

/// Slot values plus an optional per-occurrence shift.
#[derive(Clone, Copy, Debug)]
pub struct Bindings<'a> {
    pub values: &'a [f64],
    pub shift: Option<OccurrenceShift>,
}

impl<'a> Bindings<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        Bindings { values, shift: None }
    }

    pub fn with_shift(values: &'a [f64], shift: OccurrenceShift) -> Self {
        Bindings { values, shift: Some(shift) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [usize; 2],
    pub angle: Option<Angle>,
    /// Classical bit written by a measurement.
    pub clbit: Option<usize>,
}

impl Gate {
    fn one(kind: GateKind, q: usize, angle: Option<Angle>) -> Gate {
        Gate { kind, qubits: [q, usize::MAX], angle, clbit: None }
    }

    fn two(kind: GateKind, a: usize, b: usize, angle: Option<Angle>) -> Gate {
        Gate { kind, qubits: [a, b], angle, clbit: None }
    }

    pub fn h(q: usize) -> Gate {
        Gate::one(GateKind::H, q, None)
    }
    pub fn x(q: usize) -> Gate {
        Gate::one(GateKind::X, q, None)
    }
    pub fn sx(q: usize) -> Gate {
        Gate::one(GateKind::SX, q, None)
    }
    pub fn id(q: usize) -> Gate {
        Gate::one(GateKind::Id, q, None)
    }
    pub fn rx(q: usize, angle: impl Into<Angle>) -> Gate {
        Gate::one(GateKind::RX, q, Some(angle.into()))
    }
    pub fn ry(q: usize, angle: impl Into<Angle>) -> Gate {
        Gate::one(GateKind::RY, q, Some(angle.into()))
    }
    pub fn rz(q: usize, angle: impl Into<Angle>) -> Gate {
        Gate::one(GateKind::RZ, q, Some(angle.into()))
    }
    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::two(GateKind::CNOT, control, target, None)
    }
    pub fn zz(a: usize, b: usize, angle: impl Into<Angle>) -> Gate {
        Gate::two(GateKind::ZZ, a, b, Some(angle.into()))
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        Gate::two(GateKind::SWAP, a, b, None)
    }
    pub fn measure(q: usize, clbit: usize) -> Gate {
        Gate { kind: GateKind::Measure, qubits: [q, usize::MAX], angle: None, clbit: Some(clbit) }
    }

    /// Build a gate of `kind` from an operand slice, checking arity.
    pub fn new(kind: GateKind, operands: &[usize], angle: Option<Angle>) -> Result<Gate> {
        if operands.len() != kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{kind} takes {} operand(s), got {}",
                kind.arity(),
                operands.len()
            )));
        }
        if kind.takes_angle() != angle.is_some() {
            return Err(Error::InvalidArgument(format!("angle mismatch for {kind}")));
        }
        Ok(match kind.arity() {
            1 if kind == GateKind::Measure => Gate::measure(operands[0], operands[0]),
            1 => Gate::one(kind, operands[0], angle),
            _ => Gate::two(kind, operands[0], operands[1], angle),
        })
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    /// Same gate acting on relabelled qubits.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        let mut g = *self;
        for q in g.qubits[..self.kind.arity()].iter_mut() {
            *q = map(*q);
        }
        g
    }

    pub fn with_angle(mut self, angle: Angle) -> Gate {
        self.angle = Some(angle);
        self
    }

    pub fn slot(&self) -> Option<SlotRef> {
        match self.angle {
            Some(Angle::Slot(r)) => Some(r),
            _ => None,
        }
    }

    pub fn resolve_angle(&self, bindings: Option<&Bindings<'_>>) -> Result<f64> {
        match &self.angle {
            Some(a) => a.resolve(bindings),
            None => Ok(0.0),
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Angle {
        Angle::Fixed(v)
    }
}

impl From<SlotRef> for Angle {
    fn from(r: SlotRef) -> Angle {
        Angle::Slot(r)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        match self.angle {
            Some(Angle::Fixed(v)) => write!(f, "({v:.6})")?,
            Some(Angle::Slot(r)) => {
                write!(f, "({}*p{}", r.scale, r.slot)?;
                if r.offset != 0.0 {
                    write!(f, "{:+.6}", r.offset)?;
                }
                write!(f, ")")?;
            }
            None => {}
        }
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        write!(f, " q[{}]", qs.join(","))?;
        if let Some(c) = self.clbit {
            write!(f, " -> c[{c}]")?;
        }
        Ok(())
    }
}

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// 2x2 unitary of a single-qubit kind at angle `theta` (ignored when unused).
pub fn single_qubit_matrix(kind: GateKind, theta: f64) -> Result<Mat2> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Ok(match kind {
        GateKind::H => {
            let h = C64::new(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Id => [[ONE, ZERO], [ZERO, ONE]],
        GateKind::SX => {
            let a = C64::new(0.5, 0.5);
            let b = C64::new(0.5, -0.5);
            [[a, b], [b, a]]
        }
        GateKind::RX => {
            let m = C64::new(0.0, -s);
            [[C64::new(c, 0.0), m], [m, C64::new(c, 0.0)]]
        }
        GateKind::RY => [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]],
        GateKind::RZ => [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]],
        GateKind::Measure => return Err(Error::MeasureNotUnitary),
        k => return Err(Error::InvalidArgument(format!("{k} is not a single-qubit gate"))),
    })
}

/// 4x4 unitary of a two-qubit kind. Local basis index is `b(op0) + 2*b(op1)`;
/// for CNOT op0 is the control.
pub fn two_qubit_matrix(kind: GateKind, theta: f64) -> Result<Mat4> {
    let mut m = [[ZERO; 4]; 4];
    match kind {
        GateKind::CNOT => {
            // control = bit 0 of the local index
            m[0][0] = ONE;
            m[2][2] = ONE;
            m[3][1] = ONE;
            m[1][3] = ONE;
        }
        GateKind::SWAP => {
            m[0][0] = ONE;
            m[1][2] = ONE;
            m[2][1] = ONE;
            m[3][3] = ONE;
        }
        GateKind::ZZ => {
            let even = C64::from_polar(1.0, -theta);
            let odd = C64::from_polar(1.0, theta);
            m[0][0] = even;
            m[1][1] = odd;
            m[2][2] = odd;
            m[3][3] = even;
        }
        k => return Err(Error::InvalidArgument(format!("{k} is not a two-qubit gate"))),
    }
    Ok(m)
}
