//! Čech 0- and 1-cochains with values in sheaves presented chart-wise,
//! the coboundary, cocycle checks and an exact coboundary solver.
//!
//! Every sheaf here is equivariant for a torus grading found from the
//! transition monomials. When the grading separates the even coordinates
//! of every chart, each weight space of cochains is finite and the solver
//! is definitive; otherwise it searches a degree window.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::atlas::{Atlas, TransitionMap};
use crate::coeffring::{write_sum, Exponent, LaurentPoly, Rational};
use crate::connection::{transport_tensor, Tensor21};
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, Parity, SuperElement};
use crate::linalg::{self, SparseRow};
use crate::svector::VectorField;

pub const DEFAULT_WINDOW: i32 = 12;

/// The degree window, overridable through `SUPERSPLIT_WINDOW`.
pub fn window_from_env() -> i32 {
    std::env::var("SUPERSPLIT_WINDOW")
        .ok()
        .and_then(|v| v.trim().parse::<i32>().ok())
        .filter(|w| *w > 0)
        .unwrap_or(DEFAULT_WINDOW)
}

/// Components of a value on one chart, one per slot.
pub type Section = Vec<SuperElement>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cochain0 {
    pub entries: BTreeMap<usize, Section>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cochain1 {
    pub entries: BTreeMap<(usize, usize), Section>,
}

fn section_is_zero(s: &Section) -> bool {
    s.iter().all(|c| c.is_zero())
}

fn section_zip(
    a: &Section,
    b: &Section,
    f: impl Fn(&SuperElement, &SuperElement) -> Result<SuperElement>,
) -> Result<Section> {
    if a.len() != b.len() {
        return Err(Error::KindMismatch(format!(
            "{} vs {} slots",
            a.len(),
            b.len()
        )));
    }
    a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

impl Cochain0 {
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(section_is_zero)
    }
}

impl Cochain1 {
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(section_is_zero)
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&Section> {
        self.entries.get(&(a, b))
    }

    fn combine(&self, other: &Cochain1, sub: bool) -> Result<Cochain1> {
        let keys: BTreeSet<(usize, usize)> = self
            .entries
            .keys()
            .chain(other.entries.keys())
            .copied()
            .collect();
        let mut entries = BTreeMap::new();
        for k in keys {
            let v = match (self.entries.get(&k), other.entries.get(&k)) {
                (Some(a), Some(b)) => section_zip(a, b, |x, y| {
                    if sub {
                        x.checked_sub(y)
                    } else {
                        x.checked_add(y)
                    }
                })?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => {
                    if sub {
                        b.iter().map(|c| c.neg()).collect()
                    } else {
                        b.clone()
                    }
                }
                (None, None) => unreachable!(),
            };
            entries.insert(k, v);
        }
        Ok(Cochain1 { entries })
    }

    pub fn checked_add(&self, other: &Cochain1) -> Result<Cochain1> {
        self.combine(other, false)
    }

    pub fn checked_sub(&self, other: &Cochain1) -> Result<Cochain1> {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &Rational) -> Cochain1 {
        Cochain1 {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (*k, v.iter().map(|x| x.scale(c)).collect()))
                .collect(),
        }
    }

    pub fn from_fields(fields: BTreeMap<(usize, usize), VectorField>) -> Cochain1 {
        Cochain1 {
            entries: fields
                .into_iter()
                .map(|(k, v)| (k, v.components().to_vec()))
                .collect(),
        }
    }
}

/// Torus weights of every coordinate and frame element, as vectors in `ℚ^d`.
#[derive(Clone, Debug)]
pub struct Grading {
    pub dim: usize,
    pub coords: Vec<Vec<Vec<Rational>>>,
    pub frames: Vec<Vec<Vec<Rational>>>,
    /// True when the even weights of every chart have full rank.
    pub definitive: bool,
}

pub type Weight = Vec<Rational>;

fn wadd(a: &mut Weight, b: &[Rational], k: &Rational) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += &(k * y);
    }
}

impl Grading {
    /// Weights making every transition image (and bundle matrix entry)
    /// homogeneous. `frame_data` lists, for each ordered overlap `(α, β)`,
    /// a matrix whose `[r][s]` entry has weight `σ^β_r − σ^α_s`.
    pub fn compute(
        atlas: &Atlas,
        frame_rank: usize,
        frame_data: &[((usize, usize), &Vec<Vec<LaurentPoly>>)],
    ) -> Grading {
        let n = atlas.charts().len();
        let dim = atlas.p() + atlas.q();
        let p = atlas.p();
        let coord_var = |c: usize, k: usize| c * dim + k;
        let frame_var = |c: usize, r: usize| n * dim + c * frame_rank + r;
        let nvars = n * dim + n * frame_rank;
        let mut rows: Vec<SparseRow> = Vec::new();
        let bump = |row: &mut SparseRow, k: usize, v: Rational| {
            let e = row.entry(k).or_insert_with(Rational::zero);
            *e += &v;
            if e.is_zero() {
                row.remove(&k);
            }
        };
        for t in atlas.declared() {
            let (a, b) = (t.source(), t.target());
            for (k, im) in t.images().iter().enumerate() {
                for (mask, f) in im.terms() {
                    for e in f.terms().keys() {
                        let mut row = SparseRow::new();
                        for (i, &v) in e.iter().enumerate() {
                            if v != 0 {
                                bump(&mut row, coord_var(a, i), Rational::from(v));
                            }
                        }
                        for j in 0..atlas.q() {
                            if mask >> j & 1 == 1 {
                                bump(&mut row, coord_var(a, p + j), Rational::one());
                            }
                        }
                        bump(&mut row, coord_var(b, k), Rational::from(-1));
                        rows.push(row);
                    }
                }
            }
        }
        for ((a, b), g) in frame_data {
            for (r, grow) in g.iter().enumerate() {
                for (s, entry) in grow.iter().enumerate() {
                    for e in entry.terms().keys() {
                        let mut row = SparseRow::new();
                        for (i, &v) in e.iter().enumerate() {
                            if v != 0 {
                                bump(&mut row, coord_var(*a, i), Rational::from(v));
                            }
                        }
                        bump(&mut row, frame_var(*b, r), Rational::from(-1));
                        bump(&mut row, frame_var(*a, s), Rational::one());
                        rows.push(row);
                    }
                }
            }
        }
        let basis = linalg::nullspace(&rows, nvars);
        let d = basis.len();
        let weight_of = |var: usize| -> Weight { basis.iter().map(|v| v[var].clone()).collect() };
        let coords: Vec<Vec<Weight>> = (0..n)
            .map(|c| (0..dim).map(|k| weight_of(coord_var(c, k))).collect())
            .collect();
        let frames: Vec<Vec<Weight>> = (0..n)
            .map(|c| {
                (0..frame_rank)
                    .map(|r| weight_of(frame_var(c, r)))
                    .collect()
            })
            .collect();
        let definitive = coords.iter().all(|cw| linalg::rank(&cw[..p]) == p);
        Grading {
            dim: d,
            coords,
            frames,
            definitive,
        }
    }

    fn zero(&self) -> Weight {
        vec![Rational::zero(); self.dim]
    }

    /// Weight of `x^e θ_mask` on chart `c` plus an offset.
    pub fn term_weight(&self, c: usize, mask: u32, e: &[i32], offset: &Weight) -> Weight {
        let mut w = offset.clone();
        let p = e.len();
        for (i, &v) in e.iter().enumerate() {
            if v != 0 {
                wadd(&mut w, &self.coords[c][i], &Rational::from(v));
            }
        }
        let mut m = mask;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            wadd(&mut w, &self.coords[c][p + j], &Rational::one());
        }
        w
    }

    /// Exponents `e` on chart `c` with `weight(x^e θ_mask) + offset = target`,
    /// admissible in `ring`.
    fn exponents_for(
        &self,
        c: usize,
        ring: &ChartSignature,
        mask: u32,
        offset: &Weight,
        target: &Weight,
        window: i32,
    ) -> Vec<Exponent> {
        let p = ring.p();
        let base = self.term_weight(c, mask, &vec![0; p], offset);
        let rhs: Weight = target.iter().zip(&base).map(|(t, b)| t - b).collect();
        let admissible = |e: &Exponent| {
            e.iter()
                .enumerate()
                .all(|(i, &v)| v >= 0 || ring.is_invertible(i))
        };
        if self.definitive {
            if p == 0 {
                return if rhs.iter().all(|r| r.is_zero()) {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                };
            }
            let cols: Vec<BTreeMap<usize, Rational>> = (0..p)
                .map(|i| {
                    self.coords[c][i]
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(r, v)| (r, v.clone()))
                        .collect()
                })
                .collect();
            let b: BTreeMap<usize, Rational> = rhs
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(r, v)| (r, v.clone()))
                .collect();
            let sol = linalg::solve_columns(&cols, &b);
            let Some(x) = sol.solution else {
                return Vec::new();
            };
            let mut e = vec![0i32; p];
            for (i, v) in x {
                if !v.is_integer() {
                    return Vec::new();
                }
                match v.to_i64() {
                    Some(k) if k.abs() <= i32::MAX as i64 / 2 => e[i] = k as i32,
                    _ => return Vec::new(),
                }
            }
            if admissible(&e) {
                vec![e]
            } else {
                Vec::new()
            }
        } else {
            let mut out = Vec::new();
            let mut e = vec![-window; p];
            loop {
                if admissible(&e) && self.term_weight(c, mask, &e, offset) == *target {
                    out.push(e.clone());
                }
                let mut i = 0;
                loop {
                    if i == p {
                        return out;
                    }
                    if e[i] < window {
                        e[i] += 1;
                        break;
                    }
                    e[i] = -window;
                    i += 1;
                }
            }
        }
    }
}

/// A sheaf whose local sections are tuples of chart functions, with a rule
/// for moving sections between charts.
pub trait ValueSheaf {
    fn describe(&self) -> String;
    /// Atlas whose charts and overlaps index the cochains.
    fn base(&self) -> &Atlas;
    fn nslots(&self) -> usize;
    fn slot_label(&self, chart: usize, slot: usize) -> String;
    /// Express a section living on chart `from` in chart `to`.
    fn transport(&self, value: &Section, from: usize, to: usize) -> Result<Section>;
    /// Odd subsets allowed in a slot.
    fn allowed_masks(&self, slot: usize) -> Vec<u32>;
    fn grading(&self) -> &Grading;
    /// Weight shift of a slot on a chart.
    fn slot_offset(&self, chart: usize, slot: usize) -> Weight;

    fn zero_section(&self, chart: usize) -> Section {
        vec![SuperElement::zero(self.base().chart(chart)); self.nslots()]
    }

    fn render(&self, chart: usize, value: &Section) -> String {
        struct R(Vec<(Rational, String)>);
        impl fmt::Display for R {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_sum(f, &self.0)
            }
        }
        let mut items = Vec::new();
        for (k, c) in value.iter().enumerate() {
            items.extend(c.render_items(&self.slot_label(chart, k)));
        }
        R(items).to_string()
    }
}

fn masks_with(q: usize, pred: impl Fn(u32) -> bool) -> Vec<u32> {
    (0u32..1 << q).filter(|m| pred(*m)).collect()
}

/// Vector fields on an atlas, optionally restricted to one filtration degree
/// and optionally projected onto the ∂x block.
pub struct FieldSheaf {
    atlas: Atlas,
    degree: Option<i32>,
    parity: Option<Parity>,
    project_even: bool,
    grading: Grading,
}

impl FieldSheaf {
    pub fn new(
        atlas: &Atlas,
        degree: Option<i32>,
        parity: Option<Parity>,
        project_even: bool,
    ) -> FieldSheaf {
        FieldSheaf {
            grading: Grading::compute(atlas, 0, &[]),
            atlas: atlas.clone(),
            degree,
            parity,
            project_even,
        }
    }

    /// Homogeneous degree-`m` fields (transported with the given atlas,
    /// normally a split model).
    pub fn graded(atlas: &Atlas, m: i32) -> FieldSheaf {
        FieldSheaf::new(atlas, Some(m), None, false)
    }

    /// The `Λ^m T*_{X,−} ⊗ T_X` block of degree-`m` fields.
    pub fn graded_even_block(atlas: &Atlas, m: i32) -> FieldSheaf {
        FieldSheaf::new(atlas, Some(m), None, true)
    }

    pub fn atlas(&self) -> &Atlas {
        &self.atlas
    }

    pub fn to_field(&self, chart: usize, value: &Section) -> Result<VectorField> {
        VectorField::new(self.atlas.chart(chart), value.clone())
    }

    fn normalize(&self, v: VectorField) -> VectorField {
        let v = match self.degree {
            Some(m) => v.graded_part(m),
            None => v,
        };
        if self.project_even {
            v.even_block()
        } else {
            v
        }
    }
}

impl ValueSheaf for FieldSheaf {
    fn describe(&self) -> String {
        let mut s = String::from("vector fields");
        if let Some(m) = self.degree {
            s.push_str(&format!(" of degree {m}"));
        }
        if self.project_even {
            s.push_str(", d/dx block");
        }
        s
    }

    fn base(&self) -> &Atlas {
        &self.atlas
    }

    fn nslots(&self) -> usize {
        self.atlas.p() + self.atlas.q()
    }

    fn slot_label(&self, chart: usize, slot: usize) -> String {
        format!("d/d{}", self.atlas.chart(chart).coord_name(slot))
    }

    fn transport(&self, value: &Section, from: usize, to: usize) -> Result<Section> {
        let v = VectorField::new(self.atlas.chart(from), value.clone())?;
        let w = self.normalize(self.atlas.push_field(&v, from, to)?);
        Ok(w.components().to_vec())
    }

    fn allowed_masks(&self, slot: usize) -> Vec<u32> {
        let p = self.atlas.p();
        let q = self.atlas.q();
        let odd_slot = slot >= p;
        if self.project_even && odd_slot {
            return Vec::new();
        }
        masks_with(q, |m| {
            let deg = m.count_ones() as i32;
            let ok_degree = match self.degree {
                Some(d) => deg == d + odd_slot as i32,
                None => true,
            };
            let ok_parity = match self.parity {
                Some(par) => (deg % 2 == 1) == (par.is_odd() ^ odd_slot),
                None => true,
            };
            ok_degree && ok_parity
        })
    }

    fn grading(&self) -> &Grading {
        &self.grading
    }

    fn slot_offset(&self, chart: usize, slot: usize) -> Weight {
        let mut w = self.grading.zero();
        wadd(
            &mut w,
            &self.grading.coords[chart][slot],
            &Rational::from(-1),
        );
        w
    }
}

/// Even graded-symmetric (2,1)-tensors, transported tensorially.
pub struct TensorSheaf {
    atlas: Atlas,
    grading: Grading,
}

impl TensorSheaf {
    pub fn new(atlas: &Atlas) -> TensorSheaf {
        TensorSheaf {
            grading: Grading::compute(atlas, 0, &[]),
            atlas: atlas.clone(),
        }
    }

    fn triple(&self, slot: usize) -> (usize, usize, usize) {
        let n = self.atlas.p() + self.atlas.q();
        (slot / (n * n), (slot / n) % n, slot % n)
    }

    pub fn to_tensor(&self, chart: usize, value: &Section) -> Result<Tensor21> {
        Tensor21::from_components(self.atlas.chart(chart), value.clone())
    }
}

impl ValueSheaf for TensorSheaf {
    fn describe(&self) -> String {
        "graded-symmetric (2,1)-tensors".into()
    }

    fn base(&self) -> &Atlas {
        &self.atlas
    }

    fn nslots(&self) -> usize {
        let n = self.atlas.p() + self.atlas.q();
        n * n * n
    }

    fn slot_label(&self, chart: usize, slot: usize) -> String {
        let (a, b, c) = self.triple(slot);
        let s = self.atlas.chart(chart);
        format!(
            "[{},{};{}]",
            s.coord_name(a),
            s.coord_name(b),
            s.coord_name(c)
        )
    }

    fn transport(&self, value: &Section, from: usize, to: usize) -> Result<Section> {
        let t = Tensor21::from_components(self.atlas.chart(from), value.clone())?;
        Ok(transport_tensor(&t, &self.atlas, to)?.components().to_vec())
    }

    fn allowed_masks(&self, slot: usize) -> Vec<u32> {
        let (a, b, c) = self.triple(slot);
        let p = self.atlas.p();
        let par = (a >= p) as u32 + (b >= p) as u32 + (c >= p) as u32;
        masks_with(self.atlas.q(), |m| m.count_ones() % 2 == par % 2)
    }

    fn grading(&self) -> &Grading {
        &self.grading
    }

    fn slot_offset(&self, chart: usize, slot: usize) -> Weight {
        let (a, b, c) = self.triple(slot);
        let cw = &self.grading.coords[chart];
        let mut w = self.grading.zero();
        wadd(&mut w, &cw[a], &Rational::one());
        wadd(&mut w, &cw[b], &Rational::one());
        wadd(&mut w, &cw[c], &Rational::from(-1));
        w
    }
}

/// A vector bundle on the reduced space: components transform as
/// `s_β = g_αβ s_α`, with `g_αβ` written on chart α.
#[derive(Clone, Debug)]
pub struct VectorBundle {
    name: String,
    base: Atlas,
    rank: usize,
    maps: BTreeMap<(usize, usize), Vec<Vec<LaurentPoly>>>,
}

fn pull_matrix(t: &TransitionMap, m: &[Vec<LaurentPoly>]) -> Result<Vec<Vec<LaurentPoly>>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|f| {
                    Ok(
                        t.pull(&SuperElement::from_poly(t.target_sig(), 0, f.clone()))?
                            .body(),
                    )
                })
                .collect()
        })
        .collect()
}

fn ring_poly(sig: &ChartSignature, f: &LaurentPoly) -> Result<LaurentPoly> {
    let ctx = crate::coeffring::PolyCtx::join(sig.ctx(), f.ctx())?;
    f.with_ctx(&ctx)
}

fn mat_mul(a: &[Vec<LaurentPoly>], b: &[Vec<LaurentPoly>]) -> Result<Vec<Vec<LaurentPoly>>> {
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        let mut r = Vec::with_capacity(b[0].len());
        for j in 0..b[0].len() {
            let mut acc = LaurentPoly::zero(row[0].ctx());
            for (l, x) in row.iter().enumerate() {
                acc = acc.checked_add(&x.checked_mul(&b[l][j])?)?;
            }
            r.push(acc);
        }
        out.push(r);
    }
    Ok(out)
}

impl VectorBundle {
    /// `maps` holds `g_αβ` for every declared overlap `α < β`.
    pub fn new(
        name: impl Into<String>,
        base: &Atlas,
        rank: usize,
        maps: BTreeMap<(usize, usize), Vec<Vec<LaurentPoly>>>,
    ) -> Result<VectorBundle> {
        let mut all = BTreeMap::new();
        for (a, b) in base.overlaps() {
            let g = maps.get(&(a, b)).ok_or_else(|| {
                Error::InvalidArgument(format!("bundle map for ({a},{b}) missing"))
            })?;
            if g.len() != rank || g.iter().any(|r| r.len() != rank) {
                return Err(Error::InvalidArgument(format!(
                    "bundle map ({a},{b}) is not {rank}x{rank}"
                )));
            }
            let src = base.transition(a, b)?.source_sig().clone();
            let g: Vec<Vec<LaurentPoly>> = g
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|f| ring_poly(&src, f))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            let ginv = linalg::laurent_inverse(&g)?;
            let back = pull_matrix(base.transition(b, a)?, &ginv)?;
            all.insert((a, b), g);
            all.insert((b, a), back);
        }
        let vb = VectorBundle {
            name: name.into(),
            base: base.clone(),
            rank,
            maps: all,
        };
        vb.check_cocycle()?;
        Ok(vb)
    }

    pub fn trivial(base: &Atlas, rank: usize) -> Result<VectorBundle> {
        let mut maps = BTreeMap::new();
        for (a, b) in base.overlaps() {
            let ctx = base.transition(a, b)?.source_sig().ctx().clone();
            let m = (0..rank)
                .map(|r| {
                    (0..rank)
                        .map(|s| {
                            if r == s {
                                LaurentPoly::one(&ctx)
                            } else {
                                LaurentPoly::zero(&ctx)
                            }
                        })
                        .collect()
                })
                .collect();
            maps.insert((a, b), m);
        }
        VectorBundle::new("trivial", base, rank, maps)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Atlas {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `g` with `s_to = g · s_from`, written on chart `from`.
    pub fn matrix(&self, from: usize, to: usize) -> Result<&Vec<Vec<LaurentPoly>>> {
        self.maps
            .get(&(from, to))
            .ok_or_else(|| Error::InvalidArgument(format!("bundle has no overlap ({from},{to})")))
    }

    /// Declared matrices `g_αβ`, `α < β`.
    pub fn declared(&self) -> Vec<((usize, usize), &Vec<Vec<LaurentPoly>>)> {
        self.maps
            .iter()
            .filter(|((a, b), _)| a < b)
            .map(|(k, v)| (*k, v))
            .collect()
    }

    /// Dual bundle: inverse-transpose matrices.
    pub fn dual(&self) -> Result<VectorBundle> {
        let mut maps = BTreeMap::new();
        for ((a, b), g) in self.declared() {
            maps.insert((a, b), linalg::transpose(&linalg::laurent_inverse(g)?));
        }
        VectorBundle::new(format!("{}*", self.name), &self.base, self.rank, maps)
    }

    fn check_cocycle(&self) -> Result<()> {
        for (a, b, c) in self.base.triples() {
            let ring = self.base.triple_ring(a, b, c)?;
            let widen = |m: &Vec<Vec<LaurentPoly>>| -> Result<Vec<Vec<LaurentPoly>>> {
                m.iter()
                    .map(|r| r.iter().map(|f| ring_poly(&ring, f)).collect())
                    .collect()
            };
            let gab = widen(self.matrix(a, b)?)?;
            let gac = widen(self.matrix(a, c)?)?;
            let gbc = widen(&pull_matrix(
                self.base.transition(a, b)?,
                self.matrix(b, c)?,
            )?)?;
            if mat_mul(&gbc, &gab)? != gac {
                return Err(Error::NotACocycle(format!(
                    "bundle `{}`: g_{b}{c} g_{a}{b} differs from g_{a}{c}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    fn grading(&self) -> Grading {
        let decl = self.declared();
        Grading::compute(&self.base, self.rank, &decl)
    }

    /// Matrix `g_αβ^{-1} dg_αβ` per overlap, as a list of `p` matrices.
    pub fn atiyah_entries(&self) -> Result<BTreeMap<(usize, usize), Vec<Vec<Vec<LaurentPoly>>>>> {
        let mut out = BTreeMap::new();
        for ((a, b), g) in self.declared() {
            let ginv = linalg::laurent_inverse(g)?;
            let mut forms = Vec::new();
            for mu in 0..self.base.p() {
                let dg: Vec<Vec<LaurentPoly>> = g
                    .iter()
                    .map(|r| r.iter().map(|f| f.derivative(mu)).collect())
                    .collect();
                forms.push(mat_mul(&ginv, &dg)?);
            }
            out.insert((a, b), forms);
        }
        Ok(out)
    }
}

/// End(E)-valued 1-forms `Σ_μ dx_μ ⊗ A_μ` on the reduced space.
pub struct EndFormSheaf {
    bundle: VectorBundle,
    grading: Grading,
}

impl EndFormSheaf {
    pub fn new(bundle: &VectorBundle) -> EndFormSheaf {
        EndFormSheaf {
            grading: bundle.grading(),
            bundle: bundle.clone(),
        }
    }

    pub fn bundle(&self) -> &VectorBundle {
        &self.bundle
    }

    /// Slot of `A_μ[r][s]`.
    pub fn slot(&self, mu: usize, r: usize, s: usize) -> usize {
        let n = self.bundle.rank;
        (mu * n + r) * n + s
    }

    fn unslot(&self, slot: usize) -> (usize, usize, usize) {
        let n = self.bundle.rank;
        (slot / (n * n), (slot / n) % n, slot % n)
    }

    /// Package per-overlap matrices of forms into a 1-cochain.
    pub fn cochain(
        &self,
        forms: &BTreeMap<(usize, usize), Vec<Vec<Vec<LaurentPoly>>>>,
    ) -> Result<Cochain1> {
        let mut entries = BTreeMap::new();
        for (&(a, b), mats) in forms {
            let sig = self.bundle.base.transition(a, b)?.source_sig().clone();
            let mut sec = self.zero_section(a);
            for (mu, m) in mats.iter().enumerate() {
                for (r, row) in m.iter().enumerate() {
                    for (s, f) in row.iter().enumerate() {
                        sec[self.slot(mu, r, s)] =
                            SuperElement::from_poly(&sig, 0, ring_poly(&sig, f)?);
                    }
                }
            }
            entries.insert((a, b), sec);
        }
        Ok(Cochain1 { entries })
    }
}

impl ValueSheaf for EndFormSheaf {
    fn describe(&self) -> String {
        format!("End({})-valued 1-forms", self.bundle.name)
    }

    fn base(&self) -> &Atlas {
        &self.bundle.base
    }

    fn nslots(&self) -> usize {
        self.bundle.base.p() * self.bundle.rank * self.bundle.rank
    }

    fn slot_label(&self, chart: usize, slot: usize) -> String {
        let (mu, r, s) = self.unslot(slot);
        let name = self.bundle.base.chart(chart).coord_name(mu).to_string();
        format!("d{name}*E{}{}", r + 1, s + 1)
    }

    fn transport(&self, value: &Section, from: usize, to: usize) -> Result<Section> {
        if from == to {
            return Ok(value.clone());
        }
        let t = self.bundle.base.transition(to, from)?;
        let g = self.bundle.matrix(to, from)?;
        let ginv = linalg::laurent_inverse(g)?;
        let jac = t.body_jacobian();
        let p = self.bundle.base.p();
        let n = self.bundle.rank;
        let mut pulled: Vec<Vec<Vec<LaurentPoly>>> = Vec::with_capacity(p);
        for nu in 0..p {
            let mut m = Vec::with_capacity(n);
            for r in 0..n {
                let mut row = Vec::with_capacity(n);
                for s in 0..n {
                    row.push(t.pull(&value[self.slot(nu, r, s)])?.body());
                }
                m.push(row);
            }
            pulled.push(m);
        }
        let mut out = self.zero_section(to);
        let mut ring = t.source_sig().clone();
        let mut mats = Vec::with_capacity(p);
        for mu in 0..p {
            let mut acc: Option<Vec<Vec<LaurentPoly>>> = None;
            for (nu, pm) in pulled.iter().enumerate() {
                let j = &jac[nu][mu];
                if j.is_zero() {
                    continue;
                }
                let conj = mat_mul(&mat_mul(&ginv, pm)?, g)?;
                let scaled: Vec<Vec<LaurentPoly>> = conj
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|f| j.checked_mul(f))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                acc = Some(match acc {
                    None => scaled,
                    Some(a) => a
                        .iter()
                        .zip(&scaled)
                        .map(|(x, y)| {
                            x.iter()
                                .zip(y)
                                .map(|(u, v)| u.checked_add(v))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<_>>()?,
                });
            }
            mats.push(acc);
        }
        for mu in 0..p {
            if let Some(m) = &mats[mu] {
                for r in 0..n {
                    for s in 0..n {
                        let f = SuperElement::from_poly(&ring, 0, ring_poly(&ring, &m[r][s])?);
                        ring = ChartSignature::join(&ring, f.sig())?;
                        out[self.slot(mu, r, s)] = f;
                    }
                }
            }
        }
        out.iter().map(|f| f.with_sig(&ring)).collect()
    }

    fn allowed_masks(&self, _slot: usize) -> Vec<u32> {
        vec![0]
    }

    fn grading(&self) -> &Grading {
        &self.grading
    }

    fn slot_offset(&self, chart: usize, slot: usize) -> Weight {
        let (mu, r, s) = self.unslot(slot);
        let mut w = self.grading.zero();
        wadd(&mut w, &self.grading.coords[chart][mu], &Rational::one());
        wadd(&mut w, &self.grading.frames[chart][s], &Rational::one());
        wadd(&mut w, &self.grading.frames[chart][r], &Rational::from(-1));
        w
    }
}

/// Sections of a vector bundle: `s_α = g_αβ^{-1} s_β`.
pub struct SectionSheaf {
    bundle: VectorBundle,
    grading: Grading,
}

impl SectionSheaf {
    pub fn new(bundle: &VectorBundle) -> SectionSheaf {
        SectionSheaf {
            grading: bundle.grading(),
            bundle: bundle.clone(),
        }
    }
}

impl ValueSheaf for SectionSheaf {
    fn describe(&self) -> String {
        format!("sections of {}", self.bundle.name)
    }

    fn base(&self) -> &Atlas {
        &self.bundle.base
    }

    fn nslots(&self) -> usize {
        self.bundle.rank
    }

    fn slot_label(&self, _chart: usize, slot: usize) -> String {
        format!("e{}", slot + 1)
    }

    fn transport(&self, value: &Section, from: usize, to: usize) -> Result<Section> {
        if from == to {
            return Ok(value.clone());
        }
        let t = self.bundle.base.transition(to, from)?;
        let ginv = linalg::laurent_inverse(self.bundle.matrix(to, from)?)?;
        let pulled: Vec<LaurentPoly> = value
            .iter()
            .map(|f| Ok(t.pull(f)?.body()))
            .collect::<Result<_>>()?;
        let mut ring = t.source_sig().clone();
        let mut out = Vec::with_capacity(pulled.len());
        for row in &ginv {
            let mut acc = LaurentPoly::zero(row[0].ctx());
            for (x, y) in row.iter().zip(&pulled) {
                acc = acc.checked_add(&x.checked_mul(y)?)?;
            }
            let f = SuperElement::from_poly(&ring, 0, ring_poly(&ring, &acc)?);
            ring = ChartSignature::join(&ring, f.sig())?;
            out.push(f);
        }
        out.iter().map(|f| f.with_sig(&ring)).collect()
    }

    fn allowed_masks(&self, _slot: usize) -> Vec<u32> {
        vec![0]
    }

    fn grading(&self) -> &Grading {
        &self.grading
    }

    fn slot_offset(&self, chart: usize, slot: usize) -> Weight {
        let mut w = self.grading.zero();
        wadd(
            &mut w,
            &self.grading.frames[chart][slot],
            &Rational::from(-1),
        );
        w
    }
}

/// `(δc)_αβ = c_β (moved to α) − c_α`.
pub fn coboundary(sheaf: &dyn ValueSheaf, c0: &Cochain0) -> Result<Cochain1> {
    let mut entries = BTreeMap::new();
    for (a, b) in sheaf.base().overlaps() {
        let zb = sheaf.zero_section(b);
        let za = sheaf.zero_section(a);
        let sb = c0.entries.get(&b).unwrap_or(&zb);
        let sa = c0.entries.get(&a).unwrap_or(&za);
        let moved = sheaf.transport(sb, b, a)?;
        entries.insert((a, b), section_zip(&moved, sa, |x, y| x.checked_sub(y))?);
    }
    Ok(Cochain1 { entries })
}

/// Failures of `c_βγ − c_αγ + c_αβ = 0` on triple overlaps.
pub fn cocycle_defects(
    sheaf: &dyn ValueSheaf,
    c1: &Cochain1,
) -> Result<Vec<(usize, usize, usize)>> {
    let mut bad = Vec::new();
    for (a, b, c) in sheaf.base().triples() {
        let zero = sheaf.zero_section(a);
        let zb = sheaf.zero_section(b);
        let cbc = sheaf.transport(c1.entries.get(&(b, c)).unwrap_or(&zb), b, a)?;
        let cac = c1.entries.get(&(a, c)).unwrap_or(&zero);
        let cab = c1.entries.get(&(a, b)).unwrap_or(&zero);
        let s = section_zip(
            &section_zip(&cbc, cac, |x, y| x.checked_sub(y))?,
            cab,
            |x, y| x.checked_add(y),
        )?;
        if !section_is_zero(&s) {
            bad.push((a, b, c));
        }
    }
    Ok(bad)
}

pub fn cocycle_check(sheaf: &dyn ValueSheaf, c1: &Cochain1) -> Result<bool> {
    Ok(cocycle_defects(sheaf, c1)?.is_empty())
}

type RowKey = (usize, usize, u32, Exponent);

fn expand(overlap: usize, value: &Section, out: &mut BTreeMap<RowKey, Rational>, scale: &Rational) {
    for (k, c) in value.iter().enumerate() {
        for (mask, f) in c.terms() {
            for (e, v) in f.terms() {
                let key = (overlap, k, *mask, e.clone());
                let entry = out.entry(key.clone()).or_insert_with(Rational::zero);
                *entry += &(scale * v);
                if entry.is_zero() {
                    out.remove(&key);
                }
            }
        }
    }
}

fn expand_cochain(overlaps: &[(usize, usize)], c1: &Cochain1) -> BTreeMap<RowKey, Rational> {
    let mut out = BTreeMap::new();
    for (oi, key) in overlaps.iter().enumerate() {
        if let Some(v) = c1.entries.get(key) {
            expand(oi, v, &mut out, &Rational::one());
        }
    }
    out
}

/// Outcome of solving `δs + Σ λ_i d_i = c`.
#[derive(Clone, Debug)]
pub struct Solve {
    pub cochain: Option<Cochain0>,
    pub multipliers: Vec<Rational>,
    /// True when a missing solution proves nonexistence.
    pub definitive: bool,
    /// Dimension of the space of global sections among the unknowns.
    pub kernel_dim: usize,
    pub window: i32,
}

impl Solve {
    pub fn solved(&self) -> bool {
        self.cochain.is_some()
    }
}

fn weights_of(
    sheaf: &dyn ValueSheaf,
    overlaps: &[(usize, usize)],
    rows: &BTreeMap<RowKey, Rational>,
) -> BTreeSet<Weight> {
    let g = sheaf.grading();
    rows.keys()
        .map(|(oi, k, mask, e)| {
            let a = overlaps[*oi].0;
            g.term_weight(a, *mask, e, &sheaf.slot_offset(a, *k))
        })
        .collect()
}

/// Basis 0-cochains (single monomials) of the given weights.
fn unknowns(
    sheaf: &dyn ValueSheaf,
    weights: &BTreeSet<Weight>,
    window: i32,
) -> Vec<(usize, usize, u32, Exponent)> {
    let g = sheaf.grading();
    let mut out = Vec::new();
    for c in 0..sheaf.base().charts().len() {
        let ring = sheaf.base().chart(c).clone();
        for k in 0..sheaf.nslots() {
            let off = sheaf.slot_offset(c, k);
            for mask in sheaf.allowed_masks(k) {
                for w in weights {
                    for e in g.exponents_for(c, &ring, mask, &off, w, window) {
                        out.push((c, k, mask, e));
                    }
                }
            }
        }
    }
    out
}

fn basis_section(
    sheaf: &dyn ValueSheaf,
    c: usize,
    k: usize,
    mask: u32,
    e: &Exponent,
) -> Result<Section> {
    let mut s = sheaf.zero_section(c);
    s[k] = SuperElement::monomial(sheaf.base().chart(c), mask, e.clone(), Rational::one())?;
    Ok(s)
}

fn column_of(
    sheaf: &dyn ValueSheaf,
    overlaps: &[(usize, usize)],
    u: &(usize, usize, u32, Exponent),
) -> Result<BTreeMap<RowKey, Rational>> {
    let (c, k, mask, e) = u;
    let s = basis_section(sheaf, *c, *k, *mask, e)?;
    let mut col = BTreeMap::new();
    for (oi, &(a, b)) in overlaps.iter().enumerate() {
        if b == *c {
            let moved = sheaf.transport(&s, b, a)?;
            expand(oi, &moved, &mut col, &Rational::one());
        }
        if a == *c {
            expand(oi, &s, &mut col, &Rational::from(-1));
        }
    }
    Ok(col)
}

fn check_homogeneous(
    sheaf: &dyn ValueSheaf,
    overlaps: &[(usize, usize)],
    col: &BTreeMap<RowKey, Rational>,
    w: &Weight,
) -> Result<()> {
    if !sheaf.grading().definitive {
        return Ok(());
    }
    let single: BTreeMap<RowKey, Rational> = col.clone();
    let ws = weights_of(sheaf, overlaps, &single);
    if ws.iter().any(|x| x != w) {
        return Err(Error::Assertion(format!(
            "transport of {} does not preserve the grading",
            sheaf.describe()
        )));
    }
    Ok(())
}

/// Solve `δs + Σ λ_i extras[i] = rhs` over monomials of the weights present.
pub fn solve_with(
    sheaf: &dyn ValueSheaf,
    rhs: &Cochain1,
    extras: &[Cochain1],
    window: i32,
) -> Result<Solve> {
    let overlaps = sheaf.base().overlaps();
    let b = expand_cochain(&overlaps, rhs);
    let extra_cols: Vec<BTreeMap<RowKey, Rational>> = extras
        .iter()
        .map(|x| expand_cochain(&overlaps, x))
        .collect();
    let mut weights = weights_of(sheaf, &overlaps, &b);
    for x in &extra_cols {
        weights.extend(weights_of(sheaf, &overlaps, x));
    }
    let unk = unknowns(sheaf, &weights, window);
    let mut cols = Vec::with_capacity(unk.len() + extras.len());
    for u in &unk {
        let col = column_of(sheaf, &overlaps, u)?;
        let w = sheaf
            .grading()
            .term_weight(u.0, u.2, &u.3, &sheaf.slot_offset(u.0, u.1));
        check_homogeneous(sheaf, &overlaps, &col, &w)?;
        cols.push(col);
    }
    let kernel_dim = linalg::solve_columns(&cols, &BTreeMap::new()).nullity();
    cols.extend(extra_cols);
    let sol = linalg::solve_columns(&cols, &b);
    let definitive = sheaf.grading().definitive;
    let Some(x) = sol.solution else {
        return Ok(Solve {
            cochain: None,
            multipliers: Vec::new(),
            definitive,
            kernel_dim,
            window,
        });
    };
    let mut c0 = Cochain0::default();
    for c in 0..sheaf.base().charts().len() {
        c0.entries.insert(c, sheaf.zero_section(c));
    }
    for (i, u) in unk.iter().enumerate() {
        if let Some(v) = x.get(&i) {
            let (c, k, mask, e) = u;
            let term = SuperElement::monomial(sheaf.base().chart(*c), *mask, e.clone(), v.clone())?;
            let slot = &mut c0.entries.get_mut(c).expect("chart entry")[*k];
            *slot = slot.checked_add(&term)?;
        }
    }
    let multipliers = (0..extras.len())
        .map(|j| {
            x.get(&(unk.len() + j))
                .cloned()
                .unwrap_or_else(Rational::zero)
        })
        .collect();
    Ok(Solve {
        cochain: Some(c0),
        multipliers,
        definitive,
        kernel_dim,
        window,
    })
}

/// Find `s` with `δs = c1`.
pub fn solve_coboundary(sheaf: &dyn ValueSheaf, c1: &Cochain1, window: i32) -> Result<Solve> {
    let bad = cocycle_defects(sheaf, c1)?;
    if !bad.is_empty() {
        return Err(Error::NotACocycle(format!("fails on triples {bad:?}")));
    }
    let s = solve_with(sheaf, c1, &[], window)?;
    if let Some(c0) = &s.cochain {
        let back = coboundary(sheaf, c0)?;
        if back.checked_sub(c1)?.is_zero() {
            return Ok(s);
        }
        return Err(Error::Assertion(
            "coboundary of the solution differs from the input".into(),
        ));
    }
    Ok(s)
}

/// Whether two cocycles define the same class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecision {
    pub equal: bool,
    pub definitive: bool,
}

pub fn class_equal(
    sheaf: &dyn ValueSheaf,
    a: &Cochain1,
    b: &Cochain1,
    window: i32,
) -> Result<ClassDecision> {
    let d = a.checked_sub(b)?;
    let s = solve_coboundary(sheaf, &d, window)?;
    Ok(ClassDecision {
        equal: s.solved(),
        definitive: s.solved() || s.definitive,
    })
}

/// The constant `λ` with `[a] = λ [b]`, when it exists and `[b] ≠ 0`.
pub fn proportionality(
    sheaf: &dyn ValueSheaf,
    a: &Cochain1,
    b: &Cochain1,
    window: i32,
) -> Result<Option<Rational>> {
    let trivial_b = solve_coboundary(sheaf, b, window)?;
    if trivial_b.solved() {
        return Ok(None);
    }
    let s = solve_with(sheaf, a, &[b.clone()], window)?;
    Ok(s.cochain.map(|_| s.multipliers[0].clone()))
}

/// `dim H¹` summed over the weights met by cochain monomials in the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1Count {
    pub dim: usize,
    pub definitive: bool,
    pub weights: BTreeMap<Weight, usize>,
}

pub fn h1_dimension(sheaf: &dyn ValueSheaf, window: i32) -> Result<H1Count> {
    let g = sheaf.grading();
    let overlaps = sheaf.base().overlaps();
    let mut weights = BTreeSet::new();
    for &(a, b) in &overlaps {
        let ring = sheaf.base().transition(a, b)?.source_sig().clone();
        let p = ring.p();
        for k in 0..sheaf.nslots() {
            let off = sheaf.slot_offset(a, k);
            for mask in sheaf.allowed_masks(k) {
                let mut e = vec![-window; p];
                'outer: loop {
                    if e.iter()
                        .enumerate()
                        .all(|(i, &v)| v >= 0 || ring.is_invertible(i))
                    {
                        weights.insert(g.term_weight(a, mask, &e, &off));
                    }
                    let mut i = 0;
                    loop {
                        if i == p {
                            break 'outer;
                        }
                        if e[i] < window {
                            e[i] += 1;
                            break;
                        }
                        e[i] = -window;
                        i += 1;
                    }
                }
            }
        }
    }
    let mut total = 0;
    let mut per = BTreeMap::new();
    for w in &weights {
        let single: BTreeSet<Weight> = [w.clone()].into_iter().collect();
        let mut c1_basis: Vec<(usize, usize, u32, Exponent)> = Vec::new();
        for (oi, &(a, b)) in overlaps.iter().enumerate() {
            let ring = sheaf.base().transition(a, b)?.source_sig().clone();
            for k in 0..sheaf.nslots() {
                let off = sheaf.slot_offset(a, k);
                for mask in sheaf.allowed_masks(k) {
                    for e in g.exponents_for(a, &ring, mask, &off, w, window) {
                        c1_basis.push((oi, k, mask, e));
                    }
                }
            }
        }
        if c1_basis.is_empty() {
            continue;
        }
        let triples = sheaf.base().triples();
        let mut z_rows: Vec<BTreeMap<(usize, usize, u32, Exponent), Rational>> = Vec::new();
        for (oi, k, mask, e) in &c1_basis {
            let (a, b) = overlaps[*oi];
            let ring = sheaf.base().transition(a, b)?.source_sig().clone();
            let mut sec = sheaf.zero_section(a);
            sec[*k] = SuperElement::monomial(&ring, *mask, e.clone(), Rational::one())?;
            let mut col = BTreeMap::new();
            for (ti, &(x, y, z)) in triples.iter().enumerate() {
                if (a, b) == (y, z) {
                    expand(
                        ti,
                        &sheaf.transport(&sec, y, x)?,
                        &mut col,
                        &Rational::one(),
                    );
                }
                if (a, b) == (x, z) {
                    expand(ti, &sec, &mut col, &Rational::from(-1));
                }
                if (a, b) == (x, y) {
                    expand(ti, &sec, &mut col, &Rational::one());
                }
            }
            z_rows.push(col);
        }
        let zdim = linalg::solve_columns(&z_rows, &BTreeMap::new()).nullity();
        let unk = unknowns(sheaf, &single, window);
        let mut cols = Vec::with_capacity(unk.len());
        for u in &unk {
            cols.push(column_of(sheaf, &overlaps, u)?);
        }
        let brank = linalg::solve_columns(&cols, &BTreeMap::new()).rank;
        let h = zdim.saturating_sub(brank);
        if h > 0 {
            per.insert(w.clone(), h);
            total += h;
        }
    }
    Ok(H1Count {
        dim: total,
        definitive: g.definitive,
        weights: per,
    })
}

/// Two-chart fast path on P¹ for a rank-one sheaf whose transport sends
/// `y^k` to a multiple of `x^(shift−k)`: coboundaries span exponents `≥ 0`
/// and `≤ shift`; everything strictly between is cohomology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSplit {
    pub chart0: LaurentPoly,
    pub from_chart1: LaurentPoly,
    pub residue: LaurentPoly,
}

pub fn laurent_split(c: &LaurentPoly, shift: i32) -> Result<LaurentSplit> {
    if c.ctx().nvars() != 1 {
        return Err(Error::InvalidArgument(
            "Laurent splitting needs one variable".into(),
        ));
    }
    let pick = |pred: &dyn Fn(i32) -> bool| -> LaurentPoly {
        LaurentPoly::from_terms(
            c.ctx(),
            c.terms()
                .iter()
                .filter(|(e, _)| pred(e[0]))
                .map(|(e, v)| (e.clone(), v.clone())),
        )
        .expect("terms of an existing polynomial")
    };
    Ok(LaurentSplit {
        chart0: pick(&|e| e >= 0),
        from_chart1: pick(&|e| e < 0 && e <= shift),
        residue: pick(&|e| e < 0 && e > shift),
    })
}

/// `dim H¹(P¹, O(n)) = #{e : n < e < 0}` read off the fast path.
pub fn p1_line_bundle_h1(n: i32) -> usize {
    (n + 1..0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> Atlas {
        let s0 = ChartSignature::new(0, &["x"], &[], &[]).unwrap();
        let s1 = ChartSignature::new(1, &["y"], &[], &[]).unwrap();
        let ov = s0.extended(1);
        let y = SuperElement::monomial(&ov, 0, vec![-1], Rational::one()).unwrap();
        let t = TransitionMap::new(&ov, &s1, vec![y]).unwrap();
        Atlas::new("P1", vec![s0, s1], vec![t]).unwrap()
    }

    fn line(n: i32) -> VectorBundle {
        let a = p1();
        let ctx = a.transition(0, 1).unwrap().source_sig().ctx().clone();
        let g = LaurentPoly::monomial(&ctx, vec![-n], Rational::one()).unwrap();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), vec![vec![g]]);
        VectorBundle::new(format!("O({n})"), &a, 1, maps).unwrap()
    }

    #[test]
    fn line_bundle_cohomology() {
        for n in -4..=2 {
            let sh = SectionSheaf::new(&line(n));
            assert!(sh.grading().definitive);
            let h = h1_dimension(&sh, 12).unwrap();
            assert_eq!(h.dim, p1_line_bundle_h1(n), "n = {n}");
            assert_eq!(h.dim, (-n - 1).max(0) as usize);
        }
    }

    #[test]
    fn laurent_fast_path() {
        let ctx = crate::coeffring::PolyCtx::new(vec!["x".into()], &["x"]).unwrap();
        let c = LaurentPoly::from_terms(
            &ctx,
            [
                (vec![-3], Rational::one()),
                (vec![-1], Rational::from(2)),
                (vec![2], Rational::one()),
            ],
        )
        .unwrap();
        let s = laurent_split(&c, -2).unwrap();
        assert_eq!(s.residue.to_string(), "2*x^-1");
        assert_eq!(s.chart0.to_string(), "1*x^2");
    }

    #[test]
    fn weight_minus_two_solver() {
        let sh = SectionSheaf::new(&line(-2));
        let ring = sh.base().transition(0, 1).unwrap().source_sig().clone();
        let mk = |e: i32| {
            let mut c = Cochain1::default();
            c.entries.insert(
                (0, 1),
                vec![SuperElement::monomial(&ring, 0, vec![e], Rational::one()).unwrap()],
            );
            c
        };
        let s = solve_coboundary(&sh, &mk(-1), 12).unwrap();
        assert!(!s.solved() && s.definitive);
        for e in [-4, -2, 0, 3] {
            let s = solve_coboundary(&sh, &mk(e), 12).unwrap();
            assert!(s.solved(), "x^{e}");
        }
        let d = class_equal(&sh, &mk(-1), &mk(-1).scale(&Rational::from(2)), 12).unwrap();
        assert!(!d.equal && d.definitive);
        assert_eq!(
            proportionality(&sh, &mk(-1).scale(&Rational::from(3)), &mk(-1), 12).unwrap(),
            Some(Rational::from(3))
        );
    }

    #[test]
    fn coboundary_squares_to_zero() {
        let a = p1();
        let sh = SectionSheaf::new(&line(1));
        let mut c0 = Cochain0::default();
        let s0 = a.chart(0).clone();
        let s1 = a.chart(1).clone();
        c0.entries.insert(
            0,
            vec![SuperElement::monomial(&s0, 0, vec![2], Rational::one()).unwrap()],
        );
        c0.entries.insert(
            1,
            vec![SuperElement::monomial(&s1, 0, vec![1], Rational::from(3)).unwrap()],
        );
        let d = coboundary(&sh, &c0).unwrap();
        assert!(cocycle_check(&sh, &d).unwrap());
        let s = solve_coboundary(&sh, &d, 12).unwrap();
        assert!(s.solved());
    }
}
