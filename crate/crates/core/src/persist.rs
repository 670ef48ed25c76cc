//! On-disk formats: binary dataset container, per-instance debug CSV, JSON checkpoints.
//!
//! Dataset container (all integers and floats little-endian):
//!
//! ```text
//! magic        8 bytes   "VQCDSET\0"
//! version      u32       1
//! header_len   u64
//! header       JSON      DatasetHeader (scenario echo, stream, count, N, M)
//! instances    count × { pilot      M·N complex, row-major
//!                        activity   N bytes, 0 or 1
//!                        channel    N complex
//!                        signal     N complex
//!                        observation M complex
//!                        noise_var  f64 }
//! ```
//!
//! Complex values are stored as interleaved `(re, im)` 64-bit floats.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cplx, Scalar, C};
use crate::system_model::{Instance, ScenarioConfig};

pub const DATASET_MAGIC: &[u8; 8] = b"VQCDSET\0";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub scenario: ScenarioConfig,
    pub stream: u64,
    pub count: usize,
    pub n_devices: usize,
    pub n_measurements: usize,
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn put_c<T: Scalar>(buf: &mut Vec<u8>, z: &C<T>) {
    buf.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
    buf.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
}

pub fn encode_dataset<T: Scalar>(header: &DatasetHeader, data: &[Instance<T>]) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(header)?;
    let mut buf = Vec::new();
    buf.extend_from_slice(DATASET_MAGIC);
    buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for inst in data {
        if inst.n_devices() != header.n_devices || inst.n_measurements() != header.n_measurements {
            return Err(crate::error::dim_err(
                "encode_dataset instance shape",
                format!("{}x{}", header.n_measurements, header.n_devices),
                format!("{}x{}", inst.n_measurements(), inst.n_devices()),
            ));
        }
        inst.pilot.as_slice().iter().for_each(|z| put_c(&mut buf, z));
        buf.extend(inst.activity.iter().map(|&a| a as u8));
        inst.channel.iter().for_each(|z| put_c(&mut buf, z));
        inst.signal.iter().for_each(|z| put_c(&mut buf, z));
        inst.observation.iter().for_each(|z| put_c(&mut buf, z));
        buf.extend_from_slice(&inst.noise_var.to_f64_lossy().to_le_bytes());
    }
    Ok(buf)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format(format!("dataset truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn complex<T: Scalar>(&mut self) -> Result<C<T>> {
        let re = self.f64()?;
        let im = self.f64()?;
        Ok(cplx(T::lit(re), T::lit(im)))
    }

    fn complexes<T: Scalar>(&mut self, n: usize) -> Result<Vec<C<T>>> {
        (0..n).map(|_| self.complex()).collect()
    }
}

pub fn decode_dataset<T: Scalar>(bytes: &[u8]) -> Result<(DatasetHeader, Vec<Instance<T>>)> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(8)? != DATASET_MAGIC {
        return Err(Error::Format("not a dataset container (bad magic)".into()));
    }
    let version = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
    if version != DATASET_VERSION {
        return Err(Error::Format(format!("dataset version {version} unsupported")));
    }
    let hlen = u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes")) as usize;
    let header: DatasetHeader = serde_json::from_slice(cur.take(hlen)?)?;
    let (n, m) = (header.n_devices, header.n_measurements);
    let mut out = Vec::with_capacity(header.count);
    for _ in 0..header.count {
        let pilot = CMatrix::from_vec(m, n, cur.complexes(m * n)?)?;
        let activity = cur
            .take(n)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Format(format!("activity byte {other}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        let channel = cur.complexes(n)?;
        let signal = cur.complexes(n)?;
        let observation = cur.complexes(m)?;
        let noise_var = T::lit(cur.f64()?);
        out.push(Instance {
            pilot,
            activity,
            channel,
            signal,
            observation,
            noise_var,
        });
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after last instance".into()));
    }
    Ok((header, out))
}

pub fn write_dataset<T: Scalar>(path: &Path, header: &DatasetHeader, data: &[Instance<T>]) -> Result<String> {
    let bytes = encode_dataset(header, data)?;
    atomic_write(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

pub fn read_dataset<T: Scalar>(path: &Path) -> Result<(DatasetHeader, Vec<Instance<T>>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_dataset(&bytes)
}

/// Long-format debug dump: `array,row,col,re,im`.
pub fn instance_csv<T: Scalar>(inst: &Instance<T>) -> String {
    let mut s = String::from("array,row,col,re,im\n");
    for r in 0..inst.pilot.rows() {
        for c in 0..inst.pilot.cols() {
            let z = inst.pilot[(r, c)];
            s.push_str(&format!("pilot,{r},{c},{},{}\n", z.re, z.im));
        }
    }
    for (i, &a) in inst.activity.iter().enumerate() {
        s.push_str(&format!("activity,{i},0,{},0\n", a as u8));
    }
    for (name, v) in [("channel", &inst.channel), ("signal", &inst.signal), ("observation", &inst.observation)] {
        for (i, z) in v.iter().enumerate() {
            s.push_str(&format!("{name},{i},0,{},{}\n", z.re, z.im));
        }
    }
    s.push_str(&format!("noise_var,0,0,{},0\n", inst.noise_var));
    s
}

pub fn to_json_pretty<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn save_json<S: Serialize>(path: &Path, value: &S) -> Result<String> {
    let bytes = to_json_pretty(value)?;
    atomic_write(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

pub fn load_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}
