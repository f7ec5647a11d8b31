//! String-diagram rendering of categorical terms.
//!
//! [`layout`] turns a well-typed [`Term`] into a [`Layout`]: ordered layers
//! of cells read left to right, where sequential composition juxtaposes
//! layers, parallel composition stacks cells, braidings become crossings,
//! unit and counit become wire bends, unit wires are drawn gray, and
//! derivative primitives get a thick rounded frame. Formal sums render their
//! branches side by side joined by plus signs inside a framed cell.
//!
//! [`to_svg`] serializes a layout as a self-contained SVG 1.1 document and
//! is byte-deterministic: the same term and style always produce the same
//! bytes. [`term_wiring`] and [`layout_wiring`] extract a canonical
//! description of the wiring multigraph from either representation, so tests
//! can verify that a rendering is isomorphic to the term it came from.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::objects::Obj;
use crate::roger::Term;

/// What a wire carries: a primal space, a dual space (drawn with a reversed
/// arrowhead), or the unit object (drawn gray).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireKind {
    Primal,
    Dual,
    Unit,
}

/// The visual vocabulary of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    /// A labeled generator box.
    Box,
    /// A straight pass-through wire.
    Wire,
    /// A gray unit wire; may start or end inside its cell.
    UnitWire,
    /// Two wire bundles exchanging places.
    Crossing,
    /// A unit bend opening to the right (dual-pair creation).
    BendLeft,
    /// A counit bend closing to the left (dual-pair annihilation).
    BendRight,
    /// A thick rounded frame for derivative primitives.
    DerivFrame,
    /// A thick vertical bar for the antisymmetrizer.
    AntisymBar,
    /// A filled lens for metric and cometric generators.
    MetricLens,
    /// A framed cell holding sum branches side by side.
    SumFrame,
}

/// A port anchor on a cell edge: its vertical position and wire kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PortAnchor {
    pub y: f64,
    pub kind: WireKind,
}

/// One cell of a layer. `split` records the size of the first bundle for
/// crossings; `panels` holds the branch layouts of a sum cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub glyph: Glyph,
    pub label: String,
    pub inputs: Vec<PortAnchor>,
    pub outputs: Vec<PortAnchor>,
    pub y0: f64,
    pub y1: f64,
    pub split: usize,
    pub panels: Vec<Layout>,
}

/// One vertical column of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub cells: Vec<Cell>,
    pub width: f64,
}

/// A laid-out diagram: columns left to right, plus the boundary wire kinds.
/// Input anchors of each layer align one-to-one with the output anchors of
/// the previous layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub layers: Vec<Layer>,
    pub width: f64,
    pub height: f64,
    pub n_in: Vec<WireKind>,
    pub n_out: Vec<WireKind>,
}

/// Rendering style: stroke widths, font size, and colors. Defaults follow
/// the source visual language: 0.4-unit wires and a 1.2-unit-thick
/// antisymmetrizer bar.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleConfig {
    pub wire_width: f64,
    pub antisym_width: f64,
    pub frame_width: f64,
    pub font_size: f64,
    pub wire_color: String,
    pub unit_color: String,
    pub box_fill: String,
    pub lens_fill: String,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self {
            wire_width: 0.4,
            antisym_width: 1.2,
            frame_width: 1.0,
            font_size: 6.0,
            wire_color: "#000000".to_string(),
            unit_color: "#9b9b9b".to_string(),
            box_fill: "#ffffff".to_string(),
            lens_fill: "#c8c8c8".to_string(),
        }
    }
}

impl StyleConfig {
    /// Parse a `key = value` style file; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    msg: "expected `key = value`".to_string(),
                    line: lineno + 1,
                    col: 1,
                });
            };
            let key = key.trim();
            let value = value.trim();
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    msg: format!("invalid number {v:?}"),
                    line: lineno + 1,
                    col: 1,
                })
            };
            match key {
                "wire_width" => out.wire_width = num(value)?,
                "antisym_width" => out.antisym_width = num(value)?,
                "frame_width" => out.frame_width = num(value)?,
                "font_size" => out.font_size = num(value)?,
                "wire_color" => out.wire_color = value.to_string(),
                "unit_color" => out.unit_color = value.to_string(),
                "box_fill" => out.box_fill = value.to_string(),
                "lens_fill" => out.lens_fill = value.to_string(),
                other => {
                    return Err(Error::Parse {
                        msg: format!("unknown style key {other:?}"),
                        line: lineno + 1,
                        col: 1,
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Flatten an object into its drawn wires: one primal or dual wire per
/// atomic factor, one gray wire per unit factor.
pub fn factor(o: &Obj) -> Vec<WireKind> {
    match o {
        Obj::Unit => vec![WireKind::Unit],
        Obj::Atom(_) => vec![WireKind::Primal],
        Obj::Dual(inner) => factor(inner)
            .into_iter()
            .map(|k| match k {
                WireKind::Primal => WireKind::Dual,
                WireKind::Dual => WireKind::Primal,
                WireKind::Unit => WireKind::Unit,
            })
            .collect(),
        Obj::Prod(a, b) => {
            let mut v = factor(a);
            v.extend(factor(b));
            v
        }
    }
}

struct PlanCell {
    glyph: Glyph,
    label: String,
    ins: Vec<WireKind>,
    outs: Vec<WireKind>,
    split: usize,
    panels: Vec<Plan>,
}

struct Plan {
    layers: Vec<Vec<PlanCell>>,
    n_in: Vec<WireKind>,
    n_out: Vec<WireKind>,
}

fn wire_cell(kind: WireKind) -> PlanCell {
    PlanCell {
        glyph: if kind == WireKind::Unit {
            Glyph::UnitWire
        } else {
            Glyph::Wire
        },
        label: String::new(),
        ins: vec![kind],
        outs: vec![kind],
        split: 0,
        panels: vec![],
    }
}

fn id_layer(kinds: &[WireKind]) -> Vec<PlanCell> {
    kinds.iter().map(|k| wire_cell(*k)).collect()
}

fn glyph_for_prim(name: &str) -> Glyph {
    match name {
        "\u{2202}" => Glyph::DerivFrame,
        "antisym" => Glyph::AntisymBar,
        "g" | "g'" | "metric" | "cometric" => Glyph::MetricLens,
        _ => Glyph::Box,
    }
}

fn build_plan(t: &Term) -> Plan {
    let n_in = factor(&t.dom());
    let n_out = factor(&t.cod());
    let single = |cell: PlanCell| Plan {
        layers: vec![vec![cell]],
        n_in: n_in.clone(),
        n_out: n_out.clone(),
    };
    match t {
        Term::Id(_) => Plan {
            layers: vec![id_layer(&n_in)],
            n_in: n_in.clone(),
            n_out,
        },
        Term::Comp(g, f) => {
            let pf = build_plan(f);
            let pg = build_plan(g);
            let mut layers = pf.layers;
            layers.extend(pg.layers);
            Plan {
                layers,
                n_in: pf.n_in,
                n_out: pg.n_out,
            }
        }
        Term::Ten(f, g) => {
            let mut pf = build_plan(f);
            let mut pg = build_plan(g);
            while pf.layers.len() < pg.layers.len() {
                pf.layers.push(id_layer(&pf.n_out));
            }
            while pg.layers.len() < pf.layers.len() {
                pg.layers.push(id_layer(&pg.n_out));
            }
            let layers = pf
                .layers
                .into_iter()
                .zip(pg.layers)
                .map(|(mut a, b)| {
                    a.extend(b);
                    a
                })
                .collect();
            let mut n_in = pf.n_in;
            n_in.extend(pg.n_in);
            let mut n_out = pf.n_out;
            n_out.extend(pg.n_out);
            Plan {
                layers,
                n_in,
                n_out,
            }
        }
        Term::Sigma(a, b) => {
            let fa = factor(a);
            let fb = factor(b);
            let split = fa.len();
            let mut outs = fb.clone();
            outs.extend(fa.clone());
            let mut ins = fa;
            ins.extend(fb);
            single(PlanCell {
                glyph: Glyph::Crossing,
                label: String::new(),
                ins,
                outs,
                split,
                panels: vec![],
            })
        }
        Term::Alpha(..) | Term::AlphaInv(..) => Plan {
            layers: vec![id_layer(&n_in)],
            n_in: n_in.clone(),
            n_out,
        },
        Term::RhoIntro(a) => {
            let mut cells = id_layer(&factor(a));
            cells.push(PlanCell {
                glyph: Glyph::UnitWire,
                label: String::new(),
                ins: vec![],
                outs: vec![WireKind::Unit],
                split: 0,
                panels: vec![],
            });
            Plan {
                layers: vec![cells],
                n_in,
                n_out,
            }
        }
        Term::RhoElim(a) => {
            let mut cells = id_layer(&factor(a));
            cells.push(PlanCell {
                glyph: Glyph::UnitWire,
                label: String::new(),
                ins: vec![WireKind::Unit],
                outs: vec![],
                split: 0,
                panels: vec![],
            });
            Plan {
                layers: vec![cells],
                n_in,
                n_out,
            }
        }
        Term::Eta(_) => single(PlanCell {
            glyph: Glyph::BendLeft,
            label: String::new(),
            ins: n_in.clone(),
            outs: n_out.clone(),
            split: 0,
            panels: vec![],
        }),
        Term::Eps(_) => single(PlanCell {
            glyph: Glyph::BendRight,
            label: String::new(),
            ins: n_in.clone(),
            outs: n_out.clone(),
            split: 0,
            panels: vec![],
        }),
        Term::Prim(name, _) => single(PlanCell {
            glyph: glyph_for_prim(name),
            label: name.clone(),
            ins: n_in.clone(),
            outs: n_out.clone(),
            split: 0,
            panels: vec![],
        }),
        Term::ZeroM(..) => single(PlanCell {
            glyph: Glyph::Box,
            label: "0".to_string(),
            ins: n_in.clone(),
            outs: n_out.clone(),
            split: 0,
            panels: vec![],
        }),
        Term::Scale(s, inner) => {
            let pi = build_plan(inner);
            let mut prefix = vec![PlanCell {
                glyph: Glyph::Box,
                label: s.to_string(),
                ins: vec![],
                outs: vec![],
                split: 0,
                panels: vec![],
            }];
            prefix.extend(id_layer(&pi.n_in));
            let mut layers = vec![prefix];
            layers.extend(pi.layers);
            Plan {
                layers,
                n_in: pi.n_in,
                n_out: pi.n_out,
            }
        }
        Term::Sum(ts) => single(PlanCell {
            glyph: Glyph::SumFrame,
            label: String::new(),
            ins: n_in.clone(),
            outs: n_out.clone(),
            split: 0,
            panels: ts.iter().map(build_plan).collect(),
        }),
    }
}

const ROW_GAP: f64 = 12.0;
const LAYER_W: f64 = 36.0;
const MARGIN: f64 = 10.0;
const PANEL_GAP: f64 = 16.0;
const CELL_PAD: f64 = 4.0;

fn centered_ys(count: usize, height: f64) -> Vec<f64> {
    if count == 0 {
        return vec![];
    }
    let start = height / 2.0 - (count as f64 - 1.0) * ROW_GAP / 2.0;
    (0..count).map(|i| start + i as f64 * ROW_GAP).collect()
}

fn assign(plan: &Plan) -> Layout {
    let mut interfaces: Vec<Vec<WireKind>> = vec![plan.n_in.clone()];
    for layer in &plan.layers {
        let outs: Vec<WireKind> = layer.iter().flat_map(|c| c.outs.iter().copied()).collect();
        interfaces.push(outs);
    }
    let mut panel_layouts: Vec<Vec<Vec<Layout>>> = Vec::new();
    let mut max_rows = interfaces.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let mut extra_height: f64 = 0.0;
    for layer in &plan.layers {
        let mut per_cell = Vec::new();
        let mut rows = 0usize;
        for cell in layer {
            let panels: Vec<Layout> = cell.panels.iter().map(assign).collect();
            let panel_h = panels.iter().map(|p| p.height).fold(0.0, f64::max);
            extra_height = extra_height.max(panel_h);
            rows += cell.ins.len().max(cell.outs.len()).max(1);
            per_cell.push(panels);
        }
        max_rows = max_rows.max(rows);
        panel_layouts.push(per_cell);
    }
    let height = (2.0 * MARGIN + (max_rows as f64 - 1.0) * ROW_GAP).max(extra_height + 2.0 * MARGIN);
    let mut layers = Vec::with_capacity(plan.layers.len());
    for (k, layer) in plan.layers.iter().enumerate() {
        let in_ys = centered_ys(interfaces[k].len(), height);
        let out_ys = centered_ys(interfaces[k + 1].len(), height);
        let mut in_cursor = 0usize;
        let mut out_cursor = 0usize;
        let mut cells = Vec::with_capacity(layer.len());
        let mut width: f64 = LAYER_W;
        let mut prev_bottom: f64 = MARGIN;
        for (ci, cell) in layer.iter().enumerate() {
            let inputs: Vec<PortAnchor> = cell
                .ins
                .iter()
                .map(|kind| {
                    let y = in_ys[in_cursor];
                    in_cursor += 1;
                    PortAnchor { y, kind: *kind }
                })
                .collect();
            let outputs: Vec<PortAnchor> = cell
                .outs
                .iter()
                .map(|kind| {
                    let y = out_ys[out_cursor];
                    out_cursor += 1;
                    PortAnchor { y, kind: *kind }
                })
                .collect();
            let panels = panel_layouts[k][ci].clone();
            let (mut y0, mut y1) = if inputs.is_empty() && outputs.is_empty() {
                (prev_bottom + 2.0, prev_bottom + 12.0)
            } else {
                let ys: Vec<f64> = inputs
                    .iter()
                    .chain(outputs.iter())
                    .map(|p| p.y)
                    .collect();
                let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo - CELL_PAD, hi + CELL_PAD)
            };
            if !panels.is_empty() {
                let need: f64 = panels.iter().map(|p| p.height).fold(0.0, f64::max) + 8.0;
                let have = y1 - y0;
                if need > have {
                    let grow = (need - have) / 2.0;
                    y0 -= grow;
                    y1 += grow;
                }
                let panel_w: f64 = panels.iter().map(|p| p.width).sum::<f64>()
                    + PANEL_GAP * (panels.len() as f64 + 1.0);
                width = width.max(panel_w + 8.0);
            }
            prev_bottom = y1;
            cells.push(Cell {
                glyph: cell.glyph,
                label: cell.label.clone(),
                inputs,
                outputs,
                y0,
                y1,
                split: cell.split,
                panels,
            });
        }
        layers.push(Layer { cells, width });
    }
    let width = 2.0 * MARGIN + layers.iter().map(|l| l.width).sum::<f64>();
    Layout {
        layers,
        width,
        height,
        n_in: plan.n_in.clone(),
        n_out: plan.n_out.clone(),
    }
}

/// Lay out a well-typed term as a left-to-right string diagram. The result
/// is deterministic: the same term always produces the same layout.
pub fn layout(t: &Term) -> Layout {
    assign(&build_plan(t))
}

fn fmt_f(x: f64) -> String {
    let v = if x.abs() < 0.005 { 0.0 } else { x };
    format!("{v:.2}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn wire_style(kind: WireKind, style: &StyleConfig) -> (String, f64) {
    match kind {
        WireKind::Unit => (style.unit_color.clone(), style.wire_width),
        _ => (style.wire_color.clone(), style.wire_width),
    }
}

fn line(out: &mut String, x0: f64, y0: f64, x1: f64, y1: f64, color: &str, w: f64) {
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
        fmt_f(x0),
        fmt_f(y0),
        fmt_f(x1),
        fmt_f(y1),
        color,
        fmt_f(w)
    ));
}

fn dual_arrow(out: &mut String, x: f64, y: f64, style: &StyleConfig) {
    out.push_str(&format!(
        "<polygon points=\"{},{} {},{} {},{}\" fill=\"{}\"/>\n",
        fmt_f(x + 2.4),
        fmt_f(y - 1.6),
        fmt_f(x + 2.4),
        fmt_f(y + 1.6),
        fmt_f(x - 2.4),
        fmt_f(y),
        style.wire_color
    ));
}

fn wire_segment(out: &mut String, x0: f64, x1: f64, y: f64, kind: WireKind, style: &StyleConfig) {
    let (color, w) = wire_style(kind, style);
    line(out, x0, y, x1, y, &color, w);
    if kind == WireKind::Dual {
        dual_arrow(out, (x0 + x1) / 2.0, y, style);
    }
}

fn text(out: &mut String, x: f64, y: f64, label: &str, style: &StyleConfig) {
    if label.is_empty() {
        return;
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"monospace\" \
         text-anchor=\"middle\" fill=\"{}\">{}</text>\n",
        fmt_f(x),
        fmt_f(y),
        fmt_f(style.font_size),
        style.wire_color,
        esc(label)
    ));
}

fn render_cell(out: &mut String, cell: &Cell, x0: f64, x1: f64, style: &StyleConfig) {
    let xm = (x0 + x1) / 2.0;
    match cell.glyph {
        Glyph::Wire | Glyph::UnitWire => {
            match (cell.inputs.first(), cell.outputs.first()) {
                (Some(i), Some(o)) => {
                    let (color, w) = wire_style(i.kind, style);
                    line(out, x0, i.y, x1, o.y, &color, w);
                    if i.kind == WireKind::Dual {
                        dual_arrow(out, xm, (i.y + o.y) / 2.0, style);
                    }
                }
                (None, Some(o)) => {
                    let (color, w) = wire_style(o.kind, style);
                    line(out, xm, o.y, x1, o.y, &color, w);
                }
                (Some(i), None) => {
                    let (color, w) = wire_style(i.kind, style);
                    line(out, x0, i.y, xm, i.y, &color, w);
                }
                (None, None) => {}
            }
        }
        Glyph::Crossing => {
            let na = cell.split;
            let nb = cell.inputs.len() - na;
            for (i, p) in cell.inputs.iter().enumerate() {
                let target = if i < na {
                    &cell.outputs[nb + i]
                } else {
                    &cell.outputs[i - na]
                };
                let (color, w) = wire_style(p.kind, style);
                line(out, x0, p.y, x1, target.y, &color, w);
            }
        }
        Glyph::BendLeft => {
            if let Some(u) = cell.inputs.first() {
                let (color, w) = wire_style(u.kind, style);
                line(out, x0, u.y, xm - 4.0, u.y, &color, w);
            }
            let pairs = cell.outputs.len() / 2;
            for i in 0..pairs {
                let top = &cell.outputs[i];
                let bot = &cell.outputs[pairs + i];
                let (color, w) = wire_style(WireKind::Primal, style);
                out.push_str(&format!(
                    "<path d=\"M {} {} C {} {} {} {} {} {}\" stroke=\"{}\" \
                     stroke-width=\"{}\" fill=\"none\"/>\n",
                    fmt_f(x1),
                    fmt_f(top.y),
                    fmt_f(xm - 6.0),
                    fmt_f(top.y),
                    fmt_f(xm - 6.0),
                    fmt_f(bot.y),
                    fmt_f(x1),
                    fmt_f(bot.y),
                    color,
                    fmt_f(w)
                ));
                let dual_y = if top.kind == WireKind::Dual { top.y } else { bot.y };
                dual_arrow(out, (xm + x1) / 2.0, dual_y, style);
            }
        }
        Glyph::BendRight => {
            let pairs = cell.inputs.len() / 2;
            for i in 0..pairs {
                let top = &cell.inputs[i];
                let bot = &cell.inputs[pairs + i];
                let (color, w) = wire_style(WireKind::Primal, style);
                out.push_str(&format!(
                    "<path d=\"M {} {} C {} {} {} {} {} {}\" stroke=\"{}\" \
                     stroke-width=\"{}\" fill=\"none\"/>\n",
                    fmt_f(x0),
                    fmt_f(top.y),
                    fmt_f(xm + 6.0),
                    fmt_f(top.y),
                    fmt_f(xm + 6.0),
                    fmt_f(bot.y),
                    fmt_f(x0),
                    fmt_f(bot.y),
                    color,
                    fmt_f(w)
                ));
                let dual_y = if top.kind == WireKind::Dual { top.y } else { bot.y };
                dual_arrow(out, (x0 + xm) / 2.0, dual_y, style);
            }
            if let Some(u) = cell.outputs.first() {
                let (color, w) = wire_style(u.kind, style);
                line(out, xm + 4.0, u.y, x1, u.y, &color, w);
            }
        }
        Glyph::Box | Glyph::DerivFrame | Glyph::MetricLens | Glyph::AntisymBar
        | Glyph::SumFrame => {
            let bx0 = x0 + 5.0;
            let bx1 = x1 - 5.0;
            for p in &cell.inputs {
                let (color, w) = wire_style(p.kind, style);
                line(out, x0, p.y, bx0, p.y, &color, w);
                if p.kind == WireKind::Dual {
                    dual_arrow(out, (x0 + bx0) / 2.0, p.y, style);
                }
            }
            for p in &cell.outputs {
                let (color, w) = wire_style(p.kind, style);
                line(out, bx1, p.y, x1, p.y, &color, w);
                if p.kind == WireKind::Dual {
                    dual_arrow(out, (bx1 + x1) / 2.0, p.y, style);
                }
            }
            let ym = (cell.y0 + cell.y1) / 2.0;
            match cell.glyph {
                Glyph::AntisymBar => {
                    line(
                        out,
                        xm,
                        cell.y0,
                        xm,
                        cell.y1,
                        &style.wire_color,
                        style.antisym_width,
                    );
                    for p in &cell.inputs {
                        let (color, w) = wire_style(p.kind, style);
                        line(out, bx0, p.y, xm, p.y, &color, w);
                    }
                    for p in &cell.outputs {
                        let (color, w) = wire_style(p.kind, style);
                        line(out, xm, p.y, bx1, p.y, &color, w);
                    }
                }
                Glyph::MetricLens => {
                    out.push_str(&format!(
                        "<path d=\"M {} {} Q {} {} {} {} Q {} {} {} {} Z\" fill=\"{}\" \
                         stroke=\"{}\" stroke-width=\"{}\"/>\n",
                        fmt_f(bx0),
                        fmt_f(ym),
                        fmt_f(xm),
                        fmt_f(cell.y0),
                        fmt_f(bx1),
                        fmt_f(ym),
                        fmt_f(xm),
                        fmt_f(cell.y1),
                        fmt_f(bx0),
                        fmt_f(ym),
                        style.lens_fill,
                        style.wire_color,
                        fmt_f(style.wire_width)
                    ));
                    text(out, xm, ym + style.font_size / 3.0, &cell.label, style);
                }
                Glyph::DerivFrame => {
                    out.push_str(&format!(
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"3\" \
                         fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                        fmt_f(bx0),
                        fmt_f(cell.y0),
                        fmt_f(bx1 - bx0),
                        fmt_f(cell.y1 - cell.y0),
                        style.box_fill,
                        style.wire_color,
                        fmt_f(style.frame_width * 1.6)
                    ));
                    text(out, xm, ym + style.font_size / 3.0, &cell.label, style);
                }
                Glyph::SumFrame => {
                    out.push_str(&format!(
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"4\" \
                         fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                        fmt_f(bx0),
                        fmt_f(cell.y0),
                        fmt_f(bx1 - bx0),
                        fmt_f(cell.y1 - cell.y0),
                        style.unit_color,
                        fmt_f(style.frame_width)
                    ));
                    let mut px = bx0 + PANEL_GAP;
                    for (i, panel) in cell.panels.iter().enumerate() {
                        if i > 0 {
                            text(
                                out,
                                px - PANEL_GAP / 2.0,
                                ym + style.font_size / 3.0,
                                "+",
                                style,
                            );
                        }
                        let py = ym - panel.height / 2.0;
                        render_layers(out, panel, px, py, style);
                        px += panel.width + PANEL_GAP;
                    }
                }
                _ => {
                    out.push_str(&format!(
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" \
                         stroke=\"{}\" stroke-width=\"{}\"/>\n",
                        fmt_f(bx0),
                        fmt_f(cell.y0),
                        fmt_f(bx1 - bx0),
                        fmt_f(cell.y1 - cell.y0),
                        style.box_fill,
                        style.wire_color,
                        fmt_f(style.frame_width)
                    ));
                    text(out, xm, ym + style.font_size / 3.0, &cell.label, style);
                }
            }
        }
    }
}

fn render_layers(out: &mut String, l: &Layout, ox: f64, oy: f64, style: &StyleConfig) {
    let mut x = ox + MARGIN;
    for layer in &l.layers {
        let x1 = x + layer.width;
        for cell in &layer.cells {
            let mut shifted = cell.clone();
            for p in shifted.inputs.iter_mut().chain(shifted.outputs.iter_mut()) {
                p.y += oy;
            }
            shifted.y0 += oy;
            shifted.y1 += oy;
            render_cell(out, &shifted, x, x1, style);
        }
        x = x1;
    }
    let _ = wire_segment;
}

/// Serialize a layout as a self-contained SVG 1.1 document. Byte-identical
/// output for identical layout and style.
pub fn to_svg(l: &Layout, style: &StyleConfig) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" \
         height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        fmt_f(l.width),
        fmt_f(l.height),
        fmt_f(l.width),
        fmt_f(l.height)
    ));
    render_layers(&mut out, l, 0.0, 0.0, style);
    out.push_str("</svg>\n");
    out.into_bytes()
}

const SENTINEL: usize = usize::MAX;

struct Uf {
    parent: Vec<usize>,
    endpoints: Vec<Vec<String>>,
}

impl Uf {
    fn new() -> Self {
        Self {
            parent: vec![],
            endpoints: vec![],
        }
    }

    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.endpoints.push(vec![]);
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let moved = std::mem::take(&mut self.endpoints[rb]);
            self.endpoints[ra].extend(moved);
            self.parent[rb] = ra;
        }
    }

    fn endpoint(&mut self, x: usize, e: String) {
        let r = self.find(x);
        self.endpoints[r].push(e);
    }
}

struct Sim {
    uf: Uf,
    open: Vec<usize>,
    boxes: Vec<String>,
    occ: BTreeMap<String, usize>,
}

impl Sim {
    fn begin(kinds: &[WireKind]) -> Self {
        let mut uf = Uf::new();
        let open = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| {
                if *k == WireKind::Unit {
                    SENTINEL
                } else {
                    let w = uf.fresh();
                    uf.endpoint(w, format!("L{i}"));
                    w
                }
            })
            .collect();
        Self {
            uf,
            open,
            boxes: vec![],
            occ: BTreeMap::new(),
        }
    }

    fn box_at(&mut self, name: &str, start: usize, n_in: usize, outs: &[WireKind]) {
        let n = self.occ.entry(name.to_string()).or_insert(0);
        let id = format!("{name}#{n}");
        *n += 1;
        for (off, w) in self.open[start..start + n_in].iter().enumerate() {
            if *w != SENTINEL {
                self.uf.endpoint(*w, format!("I:{id}:{off}"));
            }
        }
        let new_wires: Vec<usize> = outs
            .iter()
            .enumerate()
            .map(|(off, k)| {
                if *k == WireKind::Unit {
                    SENTINEL
                } else {
                    let w = self.uf.fresh();
                    self.uf.endpoint(w, format!("O:{id}:{off}"));
                    w
                }
            })
            .collect();
        self.boxes
            .push(format!("{id}({n_in},{})", outs.len()));
        self.open.splice(start..start + n_in, new_wires);
    }

    fn crossing(&mut self, start: usize, na: usize, nb: usize) {
        self.open[start..start + na + nb].rotate_left(na);
    }

    fn bend_open(&mut self, start: usize, kinds: &[WireKind]) {
        let ids: Vec<usize> = kinds
            .iter()
            .map(|k| {
                if *k == WireKind::Unit {
                    SENTINEL
                } else {
                    self.uf.fresh()
                }
            })
            .collect();
        let mut doubled = ids.clone();
        doubled.extend(ids);
        self.open.splice(start..start + 1, doubled);
    }

    fn bend_close(&mut self, start: usize, pairs: usize) {
        for i in 0..pairs {
            let a = self.open[start + i];
            let b = self.open[start + pairs + i];
            if a != SENTINEL && b != SENTINEL {
                self.uf.union(a, b);
            }
        }
        self.open.splice(start..start + 2 * pairs, [SENTINEL]);
    }

    fn unit_intro(&mut self, pos: usize) {
        self.open.insert(pos, SENTINEL);
    }

    fn unit_elim(&mut self, pos: usize) {
        self.open.remove(pos);
    }

    fn finish(mut self) -> String {
        for (i, w) in self.open.clone().into_iter().enumerate() {
            if w != SENTINEL {
                self.uf.endpoint(w, format!("R{i}"));
            }
        }
        let mut wires = Vec::new();
        let mut loops = 0usize;
        for x in 0..self.uf.parent.len() {
            if self.uf.find(x) == x {
                let mut eps = self.uf.endpoints[x].clone();
                if eps.is_empty() {
                    loops += 1;
                } else {
                    eps.sort();
                    wires.push(eps.join("~"));
                }
            }
        }
        wires.sort();
        let mut boxes = self.boxes;
        boxes.sort();
        format!("B[{}] W[{}] L{}", boxes.join(";"), wires.join(";"), loops)
    }
}

fn wire_count(o: &Obj) -> usize {
    factor(o).len()
}

fn sim_term(t: &Term, sim: &mut Sim, start: usize) {
    match t {
        Term::Id(_) | Term::Alpha(..) | Term::AlphaInv(..) => {}
        Term::Comp(g, f) => {
            sim_term(f, sim, start);
            sim_term(g, sim, start);
        }
        Term::Ten(f, g) => {
            sim_term(f, sim, start);
            sim_term(g, sim, start + wire_count(&f.cod()));
        }
        Term::Sigma(a, b) => {
            sim.crossing(start, wire_count(a), wire_count(b));
        }
        Term::RhoIntro(a) => {
            sim.unit_intro(start + wire_count(a));
        }
        Term::RhoElim(a) => {
            sim.unit_elim(start + wire_count(a));
        }
        Term::Eta(a) => {
            sim.bend_open(start, &factor(&a.clone().dual()));
        }
        Term::Eps(a) => {
            sim.bend_close(start, wire_count(a));
        }
        Term::Prim(name, m) => {
            sim.box_at(name, start, wire_count(m.dom()), &factor(m.cod()));
        }
        Term::ZeroM(a, b) => {
            sim.box_at("0", start, wire_count(a), &factor(b));
        }
        Term::Scale(s, inner) => {
            sim.box_at(&s.to_string(), start, 0, &[]);
            sim_term(inner, sim, start);
        }
        Term::Sum(ts) => {
            let branches: Vec<String> = ts
                .iter()
                .map(|b| {
                    let mut inner = Sim::begin(&factor(&b.dom()));
                    sim_term(b, &mut inner, 0);
                    inner.finish()
                })
                .collect();
            let name = format!("sum[{}]", branches.join(" + "));
            let dom = ts[0].dom();
            let cod = ts[0].cod();
            sim.box_at(&name, start, wire_count(&dom), &factor(&cod));
        }
    }
}

/// Canonical description of a term's wiring multigraph: generator boxes,
/// wires between box ports and boundary ports, and closed loops. Unit wires
/// are bookkeeping and are not part of the graph.
pub fn term_wiring(t: &Term) -> String {
    let mut sim = Sim::begin(&factor(&t.dom()));
    sim_term(t, &mut sim, 0);
    sim.finish()
}

fn sim_layout(l: &Layout, sim: &mut Sim) {
    for layer in &l.layers {
        let mut p = 0usize;
        for cell in &layer.cells {
            match cell.glyph {
                Glyph::Wire => p += 1,
                Glyph::UnitWire => match (cell.inputs.len(), cell.outputs.len()) {
                    (1, 1) => p += 1,
                    (0, 1) => {
                        sim.unit_intro(p);
                        p += 1;
                    }
                    (1, 0) => sim.unit_elim(p),
                    _ => {}
                },
                Glyph::Crossing => {
                    let na = cell.split;
                    let nb = cell.inputs.len() - na;
                    sim.crossing(p, na, nb);
                    p += cell.inputs.len();
                }
                Glyph::BendLeft => {
                    let pairs = cell.outputs.len() / 2;
                    let kinds: Vec<WireKind> =
                        cell.outputs[..pairs].iter().map(|a| a.kind).collect();
                    sim.bend_open(p, &kinds);
                    p += cell.outputs.len();
                }
                Glyph::BendRight => {
                    let pairs = cell.inputs.len() / 2;
                    sim.bend_close(p, pairs);
                    p += 1;
                }
                Glyph::SumFrame => {
                    let branches: Vec<String> = cell
                        .panels
                        .iter()
                        .map(|panel| {
                            let mut inner = Sim::begin(&panel.n_in);
                            sim_layout(panel, &mut inner);
                            inner.finish()
                        })
                        .collect();
                    let name = format!("sum[{}]", branches.join(" + "));
                    let outs: Vec<WireKind> = cell.outputs.iter().map(|a| a.kind).collect();
                    sim.box_at(&name, p, cell.inputs.len(), &outs);
                    p += cell.outputs.len();
                }
                Glyph::Box | Glyph::DerivFrame | Glyph::AntisymBar | Glyph::MetricLens => {
                    let name = if cell.label.is_empty() {
                        "box"
                    } else {
                        &cell.label
                    };
                    let outs: Vec<WireKind> = cell.outputs.iter().map(|a| a.kind).collect();
                    sim.box_at(name, p, cell.inputs.len(), &outs);
                    p += cell.outputs.len();
                }
            }
        }
    }
}

/// Canonical description of a layout's wiring multigraph, in the same format
/// as [`term_wiring`]; a faithful rendering yields an equal string.
pub fn layout_wiring(l: &Layout) -> String {
    let mut sim = Sim::begin(&l.n_in);
    sim_layout(l, &mut sim);
    sim.finish()
}
