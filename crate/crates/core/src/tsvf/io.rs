//! JSON form of states and operators: states are flat `[re, im, re, im, ...]`
//! arrays, operators arrays of such rows. Values pass through f64.

use num_complex::Complex;
use serde_json::{json, Value};

use super::{HermitianOperator, Matrix, TwoStateVector, WeakValueResult};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn state_to_json<T: Real>(v: &[Complex<T>]) -> Value {
    Value::Array(v.iter().flat_map(|z| [json!(z.re.to_f64()), json!(z.im.to_f64())]).collect())
}

pub fn state_from_json<T: Real>(v: &Value) -> Result<Vec<Complex<T>>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("state must be a JSON array".into()))?;
    if arr.len() % 2 != 0 {
        return Err(Error::Parse("state array must interleave re/im pairs".into()));
    }
    let nums: Vec<f64> = arr
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| Error::Parse(format!("not a number: {x}"))))
        .collect::<Result<_>>()?;
    Ok(nums.chunks(2).map(|c| Complex::new(T::lit(c[0]), T::lit(c[1]))).collect())
}

pub fn operator_to_json<T: Real>(a: &HermitianOperator<T>) -> Value {
    let m = a.matrix();
    Value::Array((0..m.dim()).map(|i| state_to_json(m.row(i))).collect())
}

pub fn operator_from_json<T: Real>(v: &Value) -> Result<HermitianOperator<T>> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("operator must be an array of rows".into()))?;
    let rows = rows.iter().map(state_from_json).collect::<Result<Vec<_>>>()?;
    HermitianOperator::new(Matrix::from_rows(rows)?)
}

pub fn tsv_to_json<T: Real>(t: &TwoStateVector<T>) -> Value {
    json!({ "pre": state_to_json(t.pre()), "post": state_to_json(t.post()) })
}

pub fn tsv_from_json<T: Real>(v: &Value) -> Result<TwoStateVector<T>> {
    let get = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("missing field {k:?}")));
    TwoStateVector::new(state_from_json(get("pre")?)?, state_from_json(get("post")?)?)
}

impl<T: Real> WeakValueResult<T> {
    pub fn to_json(&self) -> Value {
        json!({ "re": self.value.re.to_f64(), "im": self.value.im.to_f64(), "overlap": self.overlap.to_f64() })
    }
}
