//! Serialization helpers: exact values travel as strings next to a float approximation.

use num_rational::BigRational;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::field::FieldElement;
use crate::rat;

pub fn ser_rat<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Rational", 2)?;
    st.serialize_field("exact", &rat::format_rat(q))?;
    st.serialize_field("approx", &rat::to_f64(q))?;
    st.end()
}

pub fn ser_rat_pair<S: Serializer>(q: &(BigRational, BigRational), s: S) -> Result<S::Ok, S::Error> {
    Enclosure::new(&q.0, &q.1).serialize(s)
}

/// `[lo, hi]` with exact endpoints.
#[derive(Clone, Debug, Serialize)]
pub struct Enclosure {
    pub lo: String,
    pub hi: String,
    pub lo_f64: f64,
    pub hi_f64: f64,
}

impl Enclosure {
    pub fn new(lo: &BigRational, hi: &BigRational) -> Self {
        Enclosure {
            lo: rat::format_rat(lo),
            hi: rat::format_rat(hi),
            lo_f64: rat::to_f64_down(lo),
            hi_f64: rat::to_f64_up(hi),
        }
    }
}

/// A field element as power-basis coefficients (lowest power first).
#[derive(Clone, Debug, Serialize)]
pub struct ExactElement {
    pub coeffs: Vec<String>,
    pub pretty: String,
    pub approx: f64,
}

impl From<&FieldElement> for ExactElement {
    fn from(x: &FieldElement) -> Self {
        ExactElement { coeffs: x.coeff_strings(), pretty: x.pretty(), approx: x.to_f64() }
    }
}

pub fn ser_elem<S: Serializer>(x: &FieldElement, s: S) -> Result<S::Ok, S::Error> {
    ExactElement::from(x).serialize(s)
}

pub fn ser_elems<S: Serializer>(xs: &[FieldElement], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<ExactElement> = xs.iter().map(ExactElement::from).collect();
    v.serialize(s)
}

pub fn ser_opt_elem<S: Serializer>(x: &Option<FieldElement>, s: S) -> Result<S::Ok, S::Error> {
    x.as_ref().map(ExactElement::from).serialize(s)
}

pub fn ser_opt_rat<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => ser_rat(q, s),
        None => s.serialize_none(),
    }
}

pub fn ser_opt_rat_pair<S: Serializer>(q: &Option<(BigRational, BigRational)>, s: S) -> Result<S::Ok, S::Error> {
    q.as_ref().map(|(a, b)| Enclosure::new(a, b)).serialize(s)
}
