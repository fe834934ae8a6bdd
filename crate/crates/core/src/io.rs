//! JSON records for dense tensors, TT tensors and cone vectors.
//!
//! Every block is a `{"dims": [...], "data": [...]}` record with row-major
//! data. TT cores drop their unit boundary bonds: the first core of an
//! order-`d` tensor is `[n_1, k_1]`, the last `[k_{d-1}, n_d]`. Floats are
//! written with 17 significant digits so a write/read cycle is exact.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::tt::{Core, Orthogonality, TTTensor};
use crate::tt_cone::TangentConeVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TtRecord {
    pub cores: Vec<Record>,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksRecord {
    #[serde(rename = "X")]
    pub x: Vec<Record>,
    #[serde(rename = "U")]
    pub u: Vec<Record>,
    #[serde(rename = "V")]
    pub v: Vec<Record>,
    #[serde(rename = "Z")]
    pub z: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeRecord {
    pub base: TtRecord,
    pub slack: Vec<usize>,
    pub blocks: BlocksRecord,
}

fn core_record(core: &Core, position: usize, order: usize) -> Record {
    Record {
        dims: core.external_dims(position, order),
        data: core.data().to_vec(),
    }
}

fn core_from_record(r: &Record, position: usize, order: usize) -> Result<Core> {
    Core::from_external(&r.dims, r.data.clone(), position, order)
}

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    if data.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} contains NaN or infinity")))
    }
}

impl From<&DenseTensor> for Record {
    fn from(t: &DenseTensor) -> Self {
        Record {
            dims: t.dims().to_vec(),
            data: t.data().to_vec(),
        }
    }
}

impl TryFrom<Record> for DenseTensor {
    type Error = Error;

    fn try_from(r: Record) -> Result<Self> {
        check_finite(&r.data, "tensor")?;
        DenseTensor::new(r.dims, r.data)
    }
}

impl From<&TTTensor> for TtRecord {
    fn from(t: &TTTensor) -> Self {
        let d = t.order();
        TtRecord {
            cores: t
                .cores()
                .iter()
                .enumerate()
                .map(|(i, c)| core_record(c, i, d))
                .collect(),
            flag: match t.flag() {
                Orthogonality::Left => "left",
                Orthogonality::None => "none",
            }
            .to_string(),
        }
    }
}

impl TryFrom<TtRecord> for TTTensor {
    type Error = Error;

    fn try_from(r: TtRecord) -> Result<Self> {
        let d = r.cores.len();
        if d == 0 {
            return Err(Error::InvalidArgument("TT tensor has no cores".into()));
        }
        let flag = match r.flag.as_str() {
            "left" => Orthogonality::Left,
            "none" => Orthogonality::None,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown orthogonality flag {other:?}"
                )))
            }
        };
        let cores = r
            .cores
            .iter()
            .enumerate()
            .map(|(i, c)| {
                check_finite(&c.data, "TT core")?;
                core_from_record(c, i, d)
            })
            .collect::<Result<Vec<_>>>()?;
        TTTensor::new(cores, flag)
    }
}

impl From<&TangentConeVector> for ConeRecord {
    fn from(v: &TangentConeVector) -> Self {
        let d = v.order();
        ConeRecord {
            base: v.base().into(),
            slack: v.slack().to_vec(),
            blocks: BlocksRecord {
                x: v
                    .x_blocks()
                    .iter()
                    .enumerate()
                    .map(|(c, b)| core_record(b, c, d))
                    .collect(),
                u: v
                    .u_blocks()
                    .iter()
                    .enumerate()
                    .map(|(c, b)| core_record(b, c, d))
                    .collect(),
                v: v
                    .v_blocks()
                    .iter()
                    .enumerate()
                    .map(|(c, b)| core_record(b, c + 1, d))
                    .collect(),
                z: v
                    .z_blocks()
                    .iter()
                    .enumerate()
                    .map(|(c, b)| core_record(b, c + 1, d))
                    .collect(),
            },
        }
    }
}

impl TryFrom<ConeRecord> for TangentConeVector {
    type Error = Error;

    fn try_from(r: ConeRecord) -> Result<Self> {
        let base = TTTensor::try_from(r.base)?;
        let d = base.order();
        let read = |records: &[Record], offset: usize, name: &str| {
            records
                .iter()
                .enumerate()
                .map(|(c, b)| {
                    check_finite(&b.data, name)?;
                    core_from_record(b, c + offset, d).map_err(|e| {
                        Error::BlockShape(format!("{name}[{c}]: {e}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        let x = read(&r.blocks.x, 0, "X")?;
        let u = read(&r.blocks.u, 0, "U")?;
        let v = read(&r.blocks.v, 1, "V")?;
        let z = read(&r.blocks.z, 1, "Z")?;
        TangentConeVector::new(base, r.slack, x, u, v, z)
    }
}

/// `serde_json` formatter printing every float as `{:.16e}`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any value with 17 significant digits per float. Non-finite
/// floats are rejected by the caller-facing helpers below.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

pub fn dense_to_json(t: &DenseTensor) -> Result<String> {
    check_finite(t.data(), "tensor")?;
    to_json(&Record::from(t))
}

pub fn dense_from_json(s: &str) -> Result<DenseTensor> {
    DenseTensor::try_from(serde_json::from_str::<Record>(s)?)
}

pub fn tt_to_json(t: &TTTensor) -> Result<String> {
    if !t.is_finite() {
        return Err(Error::NonFinite("TT tensor contains NaN or infinity".into()));
    }
    to_json(&TtRecord::from(t))
}

pub fn tt_from_json(s: &str) -> Result<TTTensor> {
    TTTensor::try_from(serde_json::from_str::<TtRecord>(s)?)
}

pub fn cone_to_json(v: &TangentConeVector) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::NonFinite("cone vector contains NaN or infinity".into()));
    }
    to_json(&ConeRecord::from(v))
}

pub fn cone_from_json(s: &str) -> Result<TangentConeVector> {
    TangentConeVector::try_from(serde_json::from_str::<ConeRecord>(s)?)
}

pub fn read_dense(path: impl AsRef<Path>) -> Result<DenseTensor> {
    dense_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_tt(path: impl AsRef<Path>) -> Result<TTTensor> {
    tt_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_cone(path: impl AsRef<Path>) -> Result<TangentConeVector> {
    cone_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_dense(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    Ok(std::fs::write(path, dense_to_json(t)?)?)
}

pub fn write_tt(path: impl AsRef<Path>, t: &TTTensor) -> Result<()> {
    Ok(std::fs::write(path, tt_to_json(t)?)?)
}

pub fn write_cone(path: impl AsRef<Path>, v: &TangentConeVector) -> Result<()> {
    Ok(std::fs::write(path, cone_to_json(v)?)?)
}
