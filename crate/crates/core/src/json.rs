//! JSON output with 17 significant digits per float.
//!
//! `{:.16e}` round-trips every finite `f64` exactly; non-finite values are
//! written as `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

#[derive(Clone, Copy, Debug, Default)]
pub struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// `serialize_with` helpers for matrices and vectors as `[re, im]` pairs.
pub mod ser {
    use nalgebra::DVector;
    use serde::{Serialize, Serializer};

    use crate::hmap::mat_to_pairs;
    use crate::matops::{CMat, C64};

    #[derive(Serialize)]
    struct Mat {
        rows: usize,
        data: Vec<[f64; 2]>,
    }

    fn pairs(v: &DVector<C64>) -> Vec<[f64; 2]> {
        v.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn mat<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        Mat { rows: m.nrows(), data: mat_to_pairs(m) }.serialize(s)
    }

    pub fn opt_mat<S: Serializer>(m: &Option<CMat>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(|m| Mat { rows: m.nrows(), data: mat_to_pairs(m) }).serialize(s)
    }

    pub fn vec<S: Serializer>(v: &DVector<C64>, s: S) -> Result<S::Ok, S::Error> {
        pairs(v).serialize(s)
    }

    pub fn opt_vec<S: Serializer>(v: &Option<DVector<C64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(pairs).serialize(s)
    }

    pub fn vecs<S: Serializer>(vs: &[DVector<C64>], s: S) -> Result<S::Ok, S::Error> {
        vs.iter().map(pairs).collect::<Vec<_>>().serialize(s)
    }
}
