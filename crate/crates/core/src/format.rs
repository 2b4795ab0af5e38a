//! Plain-text files for plants, controllers, SLS responses and delay masks.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Matrix values list rows separated by `;` and entries separated by commas
//! or whitespace, optionally wrapped in `[ ]`: `A = 1, 0; 1, 0`. Keys outside
//! a section header belong to the unnamed section `""`. Unknown sections and
//! keys are errors.

use std::fmt::Write as _;

use crate::controllers::{ControllerKind, ControllerParams, ControllerRealization, Direction, OfOptions};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::plant::{LabeledPlant, SignalRole, StateSpace};
use crate::sls::{DelayMask, Mask, SlsResponse};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Reject keys that are neither listed nor start with one of `prefixes`.
    pub fn allow_keys(&self, keys: &[&str], prefixes: &[&str]) -> Result<()> {
        for e in &self.entries {
            let known = keys.contains(&e.key.as_str()) || prefixes.iter().any(|p| e.key.starts_with(p));
            if !known {
                return Err(parse_err(e.line, format!("unknown key '{}' in [{}]", e.key, self.name)));
            }
        }
        Ok(())
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key)
            .ok_or_else(|| parse_err(self.line, format!("[{}] is missing '{key}'", self.name)))
    }

    pub fn matrix(&self, key: &str) -> Result<Option<Matrix>> {
        self.get(key).map(|e| parse_matrix(&e.value, e.line)).transpose()
    }

    pub fn require_matrix(&self, key: &str) -> Result<Matrix> {
        let e = self.require(key)?;
        parse_matrix(&e.value, e.line)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<f64>()
                    .map_err(|_| parse_err(e.line, format!("'{key}' is not a number: {}", e.value)))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<usize>()
                    .map_err(|_| parse_err(e.line, format!("'{key}' is not a nonnegative integer: {}", e.value)))
            })
            .transpose()
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        self.get(key).map(|e| e.value.as_str())
    }

    pub fn list(&self, key: &str) -> Option<Vec<&str>> {
        self.get(key).map(|e| split_list(&e.value))
    }
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "section header is missing ']'"))?
                    .trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(parse_err(line, format!("bad section name '{name}'")));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(parse_err(line, format!("duplicate section [{name}]")));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected 'key = value', got '{content}'")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            if sections.is_empty() {
                sections.push(Section {
                    name: String::new(),
                    line,
                    entries: Vec::new(),
                });
            }
            let sec = sections.last_mut().expect("nonempty");
            if sec.get(key).is_some() {
                return Err(parse_err(line, format!("duplicate key '{key}'")));
            }
            sec.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Document { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section> {
        self.section(name)
            .ok_or_else(|| parse_err(0, format!("missing section [{name}]")))
    }

    pub fn allow_sections(&self, names: &[&str]) -> Result<()> {
        for s in &self.sections {
            if !names.contains(&s.name.as_str()) {
                let shown = if s.name.is_empty() { "(top level)" } else { &s.name };
                return Err(parse_err(s.line, format!("unexpected section [{shown}]")));
            }
        }
        Ok(())
    }
}

/// Parse `1, 2; 3 4` into a 2x2 matrix. `[]` or an empty string is 0x0.
pub fn parse_matrix(text: &str, line: usize) -> Result<Matrix> {
    let mut body = text.trim();
    if let Some(inner) = body.strip_prefix('[') {
        body = inner
            .strip_suffix(']')
            .ok_or_else(|| parse_err(line, "matrix is missing ']'"))?
            .trim();
    }
    if body.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for row in body.split(';') {
        let vals = split_list(row)
            .into_iter()
            .map(|t| {
                let v: f64 = t
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad matrix entry '{t}'")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(line, format!("non-finite matrix entry '{t}'")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if vals.is_empty() {
            return Err(parse_err(line, "empty matrix row"));
        }
        if let Some(first) = rows.first() {
            if first.len() != vals.len() {
                return Err(parse_err(
                    line,
                    format!("ragged matrix: row {} has {} entries, expected {}", rows.len() + 1, vals.len(), first.len()),
                ));
            }
        }
        rows.push(vals);
    }
    let ncols = rows[0].len();
    let flat: Vec<f64> = rows.concat();
    Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Round-trip exact matrix literal.
pub fn format_matrix(m: &Matrix) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| fmt_f64(m[(i, j)]))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn format_mask(m: &Mask) -> String {
    format_matrix(&m.map(|b| if b { 1.0 } else { 0.0 }))
}

fn parse_mask(sec: &Section, key: &str, shape: (usize, usize)) -> Result<Mask> {
    match sec.get(key) {
        None => Ok(Mask::from_element(shape.0, shape.1, false)),
        Some(e) => {
            let m = parse_matrix(&e.value, e.line)?;
            if m.shape() != shape {
                return Err(parse_err(e.line, format!("'{key}' is {:?}, expected {shape:?}", m.shape())));
            }
            if m.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(parse_err(e.line, format!("'{key}' entries must be 0 or 1")));
            }
            Ok(m.map(|v| v == 1.0))
        }
    }
}

fn parse_role(token: &str, line: usize) -> Result<SignalRole> {
    match token {
        "external" => Ok(SignalRole::External),
        "internal-delay" => Ok(SignalRole::InternalDelay),
        "internal-wire" => Ok(SignalRole::InternalWire),
        other => Err(parse_err(line, format!("unknown signal role '{other}'"))),
    }
}

fn parse_roles(sec: &Section, key: &str, count: usize) -> Result<Vec<SignalRole>> {
    match sec.get(key) {
        None => Ok(vec![SignalRole::External; count]),
        Some(e) => {
            let roles = split_list(&e.value)
                .into_iter()
                .map(|t| parse_role(t, e.line))
                .collect::<Result<Vec<_>>>()?;
            if roles.len() != count {
                return Err(parse_err(e.line, format!("'{key}' lists {} roles for {count} signals", roles.len())));
            }
            Ok(roles)
        }
    }
}

fn join_roles(roles: &[SignalRole]) -> String {
    roles.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

const PLANT_KEYS: &[&str] = &["A", "B", "C", "W", "V", "state_roles", "input_roles"];

fn plant_from_section(sec: &Section) -> Result<LabeledPlant> {
    sec.allow_keys(PLANT_KEYS, &[])?;
    let a = sec.require_matrix("A")?;
    let n = a.nrows();
    let b = sec.require_matrix("B")?;
    let c = sec.matrix("C")?.unwrap_or_else(|| Matrix::identity(n, n));
    let w = sec.matrix("W")?.unwrap_or_else(|| Matrix::identity(n, n));
    let v = sec.matrix("V")?.unwrap_or_else(|| Matrix::zeros(c.nrows(), c.nrows()));
    let plant = StateSpace::new(a, b, c, w, v).map_err(|e| parse_err(sec.line, format!("[{}]: {e}", sec.name)))?;
    let state_roles = parse_roles(sec, "state_roles", plant.n())?;
    let input_roles = parse_roles(sec, "input_roles", plant.m())?;
    Ok(LabeledPlant {
        plant,
        state_roles,
        input_roles,
    })
}

fn write_plant_section(out: &mut String, lp: &LabeledPlant) {
    let p = &lp.plant;
    let _ = writeln!(out, "[plant]");
    for (k, m) in [("A", &p.a), ("B", &p.b), ("C", &p.c), ("W", &p.w), ("V", &p.v)] {
        let _ = writeln!(out, "{k} = {}", format_matrix(m));
    }
    let _ = writeln!(out, "state_roles = {}", join_roles(&lp.state_roles));
    let _ = writeln!(out, "input_roles = {}", join_roles(&lp.input_roles));
}

/// `[plant]` with `A` and `B` required; `C` defaults to `I`, `W` to `I`,
/// `V` to `0`, roles to external.
pub fn parse_plant(text: &str) -> Result<LabeledPlant> {
    let doc = Document::parse(text)?;
    doc.allow_sections(&["plant"])?;
    plant_from_section(doc.require_section("plant")?)
}

pub fn write_plant(lp: &LabeledPlant) -> String {
    let mut out = String::new();
    write_plant_section(&mut out, lp);
    out
}

fn sls_from_section(sec: &Section) -> Result<SlsResponse> {
    sec.allow_keys(&["T"], &["phi_x.", "phi_u.", "mask_x.", "mask_u."])?;
    let t = sec
        .usize("T")?
        .ok_or_else(|| parse_err(sec.line, "[sls] is missing 'T'"))?;
    if t == 0 {
        return Err(parse_err(sec.get("T").map_or(sec.line, |e| e.line), "T must be at least 1"));
    }
    for e in &sec.entries {
        if let Some((_, idx)) = e.key.split_once('.') {
            match idx.parse::<usize>() {
                Ok(k) if (1..=t).contains(&k) => {}
                _ => return Err(parse_err(e.line, format!("component index in '{}' outside 1..={t}", e.key))),
            }
        }
    }
    let mut phi_x = Vec::with_capacity(t);
    let mut phi_u = Vec::with_capacity(t);
    for k in 1..=t {
        phi_x.push(sec.require_matrix(&format!("phi_x.{k}"))?);
        phi_u.push(sec.require_matrix(&format!("phi_u.{k}"))?);
    }
    let n = phi_x[0].nrows();
    let m = phi_u[0].nrows();
    let mut mask_x = Vec::with_capacity(t);
    let mut mask_u = Vec::with_capacity(t);
    for k in 1..=t {
        mask_x.push(parse_mask(sec, &format!("mask_x.{k}"), (n, n))?);
        mask_u.push(parse_mask(sec, &format!("mask_u.{k}"), (m, n))?);
    }
    SlsResponse::new(phi_x, phi_u, mask_x, mask_u).map_err(|e| parse_err(sec.line, format!("[sls]: {e}")))
}

fn write_sls_section(out: &mut String, resp: &SlsResponse) {
    let _ = writeln!(out, "[sls]");
    let _ = writeln!(out, "T = {}", resp.horizon());
    for k in 0..resp.horizon() {
        let _ = writeln!(out, "phi_x.{} = {}", k + 1, format_matrix(&resp.phi_x[k]));
        let _ = writeln!(out, "phi_u.{} = {}", k + 1, format_matrix(&resp.phi_u[k]));
        if resp.mask_x[k].iter().any(|&b| b) {
            let _ = writeln!(out, "mask_x.{} = {}", k + 1, format_mask(&resp.mask_x[k]));
        }
        if resp.mask_u[k].iter().any(|&b| b) {
            let _ = writeln!(out, "mask_u.{} = {}", k + 1, format_mask(&resp.mask_u[k]));
        }
    }
}

/// A standalone `[sls]` section.
pub fn parse_sls(text: &str) -> Result<SlsResponse> {
    let doc = Document::parse(text)?;
    doc.allow_sections(&["sls"])?;
    sls_from_section(doc.require_section("sls")?)
}

pub fn write_sls(resp: &SlsResponse) -> String {
    let mut out = String::new();
    write_sls_section(&mut out, resp);
    out
}

/// `[mask]` with integer matrices `state_delay` (n x n) and `input_delay` (m x n).
pub fn parse_delay_mask(text: &str) -> Result<DelayMask> {
    let doc = Document::parse(text)?;
    doc.allow_sections(&["mask"])?;
    let sec = doc.require_section("mask")?;
    sec.allow_keys(&["state_delay", "input_delay"], &[])?;
    let to_counts = |key: &str| -> Result<nalgebra::DMatrix<usize>> {
        let e = sec.require(key)?;
        let m = parse_matrix(&e.value, e.line)?;
        if m.iter().any(|&v| v < 0.0 || v != v.trunc()) {
            return Err(parse_err(e.line, format!("'{key}' entries must be nonnegative integers")));
        }
        Ok(m.map(|v| v as usize))
    };
    Ok(DelayMask {
        state_delay: to_counts("state_delay")?,
        input_delay: to_counts("input_delay")?,
    })
}

pub fn write_delay_mask(mask: &DelayMask) -> String {
    let f = |m: &nalgebra::DMatrix<usize>| format_matrix(&m.map(|v| v as f64));
    format!(
        "[mask]\nstate_delay = {}\ninput_delay = {}\n",
        f(&mask.state_delay),
        f(&mask.input_delay)
    )
}

/// A synthesized controller together with the plant and weights it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerArtifact {
    pub plant: LabeledPlant,
    pub q: Matrix,
    pub r: Matrix,
    pub controller: ControllerRealization,
}

fn parse_direction(s: &str, line: usize) -> Result<Direction> {
    match s {
        "forward" => Ok(Direction::Forward),
        "feedback" => Ok(Direction::Feedback),
        "lateral" => Ok(Direction::Lateral),
        other => Err(parse_err(line, format!("unknown direction '{other}'"))),
    }
}

/// Sections `[plant]`, `[weights]` (`Q`, `R`), `[controller]` and, for SLS,
/// `[sls]`. Controller keys: `kind` (`sf|fc|of|sls`); `gain` for sf/fc;
/// `K`, `L`, `estimator_dynamics` for of; optional `P_control`, `P_filter`.
pub fn parse_controller(text: &str) -> Result<ControllerArtifact> {
    let doc = Document::parse(text)?;
    doc.allow_sections(&["plant", "weights", "controller", "sls"])?;
    let plant = plant_from_section(doc.require_section("plant")?)?;
    let (n, m) = (plant.plant.n(), plant.plant.m());
    let (q, r) = match doc.section("weights") {
        Some(w) => {
            w.allow_keys(&["Q", "R"], &[])?;
            let (dq, dr) = plant.default_weights();
            (w.matrix("Q")?.unwrap_or(dq), w.matrix("R")?.unwrap_or(dr))
        }
        None => plant.default_weights(),
    };
    if q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(parse_err(0, format!("weights must be {n}x{n} and {m}x{m}")));
    }
    let sec = doc.require_section("controller")?;
    sec.allow_keys(&["kind", "gain", "K", "L", "estimator_dynamics", "P_control", "P_filter"], &[])?;
    let kind_entry = sec.require("kind")?;
    let kind = ControllerKind::parse(&kind_entry.value)
        .ok_or_else(|| parse_err(kind_entry.line, format!("unknown controller kind '{}'", kind_entry.value)))?;
    let mut opts = OfOptions::default();
    let params = match kind {
        ControllerKind::StateFeedback | ControllerKind::FullControl => ControllerParams::StaticGain {
            gain: sec.require_matrix("gain")?,
        },
        ControllerKind::OutputFeedback => {
            if let Some(e) = sec.get("estimator_dynamics") {
                opts.estimator_dynamics = parse_direction(&e.value, e.line)?;
            }
            let p = &plant.plant;
            ControllerParams::Observer {
                a: p.a.clone(),
                b: p.b.clone(),
                c: p.c.clone(),
                k: sec.require_matrix("K")?,
                l: sec.require_matrix("L")?,
            }
        }
        ControllerKind::Sls => ControllerParams::Sls(sls_from_section(doc.require_section("sls")?)?),
    };
    let roles = (kind == ControllerKind::FullControl).then_some(plant.input_roles.as_slice());
    let controller = ControllerRealization::from_params(kind, params, roles, opts)
        .map_err(|e| parse_err(sec.line, format!("[controller]: {e}")))?
        .with_riccati(sec.matrix("P_control")?, sec.matrix("P_filter")?);
    Ok(ControllerArtifact {
        plant,
        q,
        r,
        controller,
    })
}

pub fn write_controller(art: &ControllerArtifact) -> String {
    let mut out = String::new();
    write_plant_section(&mut out, &art.plant);
    let _ = writeln!(out, "\n[weights]\nQ = {}\nR = {}", format_matrix(&art.q), format_matrix(&art.r));
    let ctrl = &art.controller;
    let _ = writeln!(out, "\n[controller]\nkind = {}", ctrl.kind().as_str());
    match ctrl.params() {
        ControllerParams::StaticGain { gain } => {
            let _ = writeln!(out, "gain = {}", format_matrix(gain));
        }
        ControllerParams::Observer { k, l, .. } => {
            let _ = writeln!(out, "K = {}", format_matrix(k));
            let _ = writeln!(out, "L = {}", format_matrix(l));
            let _ = writeln!(out, "estimator_dynamics = {}", ctrl.options().estimator_dynamics);
        }
        ControllerParams::Sls(_) => {}
    }
    if let Some(p) = ctrl.control_p() {
        let _ = writeln!(out, "P_control = {}", format_matrix(p));
    }
    if let Some(p) = ctrl.filter_p() {
        let _ = writeln!(out, "P_filter = {}", format_matrix(p));
    }
    if let ControllerParams::Sls(resp) = ctrl.params() {
        out.push('\n');
        write_sls_section(&mut out, resp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{make_fc, make_of, make_sf};
    use crate::plant::{delay_chain_plant, scalar_plant, DelaySpec};
    use crate::sls::{make_sls_controller, synthesize};

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -0.0, 1.0, -0.6180339887498589, 1e-8, 123456.789, 3e20, f64::MIN_POSITIVE, f64::MAX] {
            let m = Matrix::from_element(1, 1, v);
            assert_eq!(parse_matrix(&format_matrix(&m), 1).unwrap()[(0, 0)].to_bits(), v.to_bits(), "{v}");
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-8), "1e-8");
    }

    #[test]
    fn matrix_literals() {
        let m = parse_matrix("[1, 2; 3 4]", 1).unwrap();
        assert_eq!(m, Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(parse_matrix("-1.5e-3", 1).unwrap()[(0, 0)], -1.5e-3);
        assert_eq!(parse_matrix("[]", 1).unwrap().shape(), (0, 0));
        assert!(matches!(parse_matrix("1, 2; 3", 7), Err(Error::Parse { line: 7, .. })));
        assert!(parse_matrix("1, x", 1).is_err());
        assert!(parse_matrix("1; ;2", 1).is_err());
        assert!(parse_matrix("inf", 1).is_err());
    }

    #[test]
    fn document_rules() {
        let doc = Document::parse("x = 1 # trailing\n\n[a]\ny = 2\n").unwrap();
        assert_eq!(doc.section("").unwrap().string("x"), Some("1"));
        assert_eq!(doc.section("a").unwrap().f64("y").unwrap(), Some(2.0));
        assert!(matches!(Document::parse("[a]\n[a]\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Document::parse("[a]\nk = 1\nk = 2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(Document::parse("[a\n").is_err());
        assert!(Document::parse("[a]\njunk\n").is_err());
    }

    #[test]
    fn plant_defaults_and_unknown_keys() {
        let lp = parse_plant("[plant]\nA = 0.5\nB = 1\n").unwrap();
        assert_eq!(lp.plant.c, Matrix::identity(1, 1));
        assert!(lp.plant.has_perfect_sensing());
        assert_eq!(lp.input_roles, vec![SignalRole::External]);
        let err = parse_plant("[plant]\nA = 1\nB = 1\nD = 0\n").unwrap_err();
        assert!(err.to_string().contains("unknown key 'D'"), "{err}");
        assert!(parse_plant("[plant]\nA = 1\nB = 1\n[extra]\n").is_err());
        assert!(parse_plant("[plant]\nA = 1, 0\nB = 1\n").is_err());
        assert!(parse_plant("[plant]\nA = 1\nB = 1\nW = -1\n").is_err());
    }

    #[test]
    fn plant_round_trip() {
        let lp = delay_chain_plant(&DelaySpec::new(2, 1.1, 0.3, 0.7)).unwrap();
        assert_eq!(parse_plant(&write_plant(&lp)).unwrap(), lp);
    }

    #[test]
    fn controller_round_trips() {
        let lp = delay_chain_plant(&DelaySpec::new(1, 1.0, 1.0, 1.0)).unwrap();
        let (q, r) = lp.default_weights();
        let art = ControllerArtifact {
            plant: lp.clone(),
            q: q.clone(),
            r: r.clone(),
            controller: make_fc(&lp).unwrap(),
        };
        assert_eq!(parse_controller(&write_controller(&art)).unwrap(), art);

        let sp = scalar_plant(1.0, 1.0, 1.0).unwrap();
        let one = Matrix::identity(1, 1);
        let lps = LabeledPlant {
            plant: sp.clone(),
            state_roles: vec![SignalRole::External],
            input_roles: vec![SignalRole::External],
        };
        let art = ControllerArtifact {
            plant: lps.clone(),
            q: one.clone(),
            r: one.clone(),
            controller: make_of(&sp, &one, &one).unwrap(),
        };
        assert_eq!(parse_controller(&write_controller(&art)).unwrap(), art);

        let sf_plant = scalar_plant(1.0, 1.0, 0.0).unwrap();
        let lsf = LabeledPlant {
            plant: sf_plant.clone(),
            ..lps.clone()
        };
        for controller in [
            make_sf(&sf_plant, &one, &one).unwrap(),
            make_sls_controller(&synthesize(&sf_plant, 3, &one, &one, None).unwrap()).unwrap(),
        ] {
            let art = ControllerArtifact {
                plant: lsf.clone(),
                q: one.clone(),
                r: one.clone(),
                controller,
            };
            assert_eq!(parse_controller(&write_controller(&art)).unwrap(), art);
        }
    }

    #[test]
    fn sls_and_mask_round_trip() {
        let p = scalar_plant(0.8, 1.0, 0.0).unwrap();
        let one = Matrix::identity(1, 1);
        let mask = DelayMask::uniform_input(1, 1, 1);
        let resp = synthesize(&p, 3, &one, &one, Some(&mask)).unwrap();
        assert_eq!(parse_sls(&write_sls(&resp)).unwrap(), resp);
        assert_eq!(parse_delay_mask(&write_delay_mask(&mask)).unwrap(), mask);
        assert!(parse_sls("[sls]\nT = 1\nphi_x.1 = 1\nphi_u.1 = 0\nphi_x.2 = 0\n").is_err());
        assert!(parse_delay_mask("[mask]\nstate_delay = 0.5\ninput_delay = 0\n").is_err());
    }
}
