//! JSON persistence and text/PGM rendering of windows.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cell::{Cell, CellKind, PatternLayout};
use super::window::ArrayWindow;
use crate::error::{Error, Result};
use crate::group::GroupElement;

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

#[derive(Serialize, Deserialize)]
struct WindowFile {
    layout: PatternLayout,
    lo: GroupElement,
    hi: GroupElement,
    band: usize,
    margin: i64,
    columns: Vec<ColumnEntry>,
}

#[derive(Serialize, Deserialize)]
struct ColumnEntry {
    at: GroupElement,
    rows: BTreeMap<i32, String>,
}

fn cell_token(layout: &PatternLayout, c: Cell) -> String {
    match c.kind() {
        CellKind::Zero => "0".into(),
        CellKind::One => "1".into(),
        CellKind::Star => "*".into(),
        CellKind::Point => {
            let mut s = String::from("x");
            for sym in layout.symbols(c.pattern().unwrap()) {
                s.push(DIGITS[sym as usize] as char);
            }
            s
        }
    }
}

fn parse_token(layout: &PatternLayout, t: &str) -> Result<Cell> {
    match t {
        "0" => Ok(Cell::ZERO),
        "1" => Ok(Cell::ONE),
        "*" => Ok(Cell::STAR),
        _ if t.starts_with('x') => {
            let syms: Option<Vec<u8>> = t[1..]
                .bytes()
                .map(|b| DIGITS.iter().position(|&d| d == b).map(|p| p as u8))
                .collect();
            let syms = syms.filter(|s| {
                s.len() == layout.offsets().len() && s.iter().all(|&x| x < layout.alphabet())
            });
            syms.map(|s| Cell::point(layout.encode(s.into_iter())))
                .ok_or_else(|| Error::config("arrays::read_window", format!("bad point token {t:?}")))
        }
        _ => Err(Error::config("arrays::read_window", format!("unknown cell token {t:?}"))),
    }
}

/// Domain bounds, band, margin and a sparse row map per non-Zero column.
pub fn window_to_json(w: &ArrayWindow) -> Result<String> {
    let k = w.band() as i32;
    let mut columns = Vec::new();
    for i in 0..w.len() {
        let col = w.column_at(i);
        let rows: BTreeMap<i32, String> = col
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(r, c)| (r as i32 - k, cell_token(w.layout(), *c)))
            .collect();
        if !rows.is_empty() {
            columns.push(ColumnEntry {
                at: w.index().point(i),
                rows,
            });
        }
    }
    let file = WindowFile {
        layout: w.layout().clone(),
        lo: w.lo(),
        hi: w.hi(),
        band: w.band(),
        margin: w.margin(),
        columns,
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn window_from_json(s: &str) -> Result<ArrayWindow> {
    let file: WindowFile = serde_json::from_str(s)?;
    let layout = Arc::new(file.layout);
    let mut w = ArrayWindow::zero(layout.clone(), file.lo, file.hi, file.band)?;
    w.set_margin(file.margin);
    for entry in file.columns {
        for (row, tok) in entry.rows {
            let c = parse_token(&layout, &tok)?;
            w.set(&entry.at, row, c).map_err(|e| match e {
                Error::Boundary { .. } => Error::config("arrays::read_window", format!("column {} outside the domain", entry.at)),
                other => other,
            })?;
        }
    }
    Ok(w)
}

/// One line per row from `K` down to `-K` (or the rows listed): blank for
/// Zero, `1`, `*`, and a letter for the centre symbol of a point.
pub fn render_ascii(w: &ArrayWindow, rows: Option<&[i32]>) -> Result<String> {
    if w.dim() != 1 {
        return Err(Error::argument("arrays::render_ascii", "text rendering needs dimension 1"));
    }
    let k = w.band() as i32;
    let all: Vec<i32> = (-k..=k).rev().collect();
    let rows = rows.unwrap_or(&all);
    let mut out = String::new();
    for &row in rows {
        if row.abs() > k {
            return Err(Error::argument("arrays::render_ascii", format!("row {row} outside band {k}")));
        }
        out.push_str(&format!("{row:>3} |"));
        for i in 0..w.len() {
            let c = w.column_at(i)[(row + k) as usize];
            out.push(match c.kind() {
                CellKind::Zero => ' ',
                CellKind::One => '1',
                CellKind::Star => '*',
                CellKind::Point => (b'a' + w.layout().center(c.pattern().unwrap())) as char,
            });
        }
        out.push('\n');
    }
    Ok(out)
}

/// Plain PGM of one row of a two-dimensional window: Zero black, One grey,
/// points in `32..=191` by centre symbol, Star white (255).
pub fn render_pgm(w: &ArrayWindow, row: i32) -> Result<String> {
    if w.dim() != 2 {
        return Err(Error::argument("arrays::render_pgm", "PGM rendering needs dimension 2"));
    }
    let k = w.band() as i32;
    if row.abs() > k {
        return Err(Error::argument("arrays::render_pgm", format!("row {row} outside band {k}")));
    }
    let (lo, hi) = (w.lo(), w.hi());
    let width = (hi.coord(1) - lo.coord(1) + 1) as usize;
    let height = (hi.coord(0) - lo.coord(0) + 1) as usize;
    let a = w.layout().alphabet() as u32;
    let mut out = format!("P2\n{width} {height}\n255\n");
    for y in 0..height {
        let line: Vec<String> = (0..width)
            .map(|x| {
                let c = w.column_at(y * width + x)[(row + k) as usize];
                let v = match c.kind() {
                    CellKind::Zero => 0,
                    CellKind::One => 208,
                    CellKind::Star => 255,
                    CellKind::Point => 32 + w.layout().center(c.pattern().unwrap()) as u32 * 159 / (a - 1),
                };
                v.to_string()
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}
