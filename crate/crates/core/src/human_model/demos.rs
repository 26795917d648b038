//! Demonstration logs: `D^H` (intention-labelled state/action tuples used to
//! learn the human model) and `D^G` (expert state/action pairs used for the
//! safe-probability table).
//!
//! Both are plain text, one episode per file:
//!
//! ```text
//! intention conservative        # D^H only
//! scenario intersection
//! t,d_h,d_r,v_h,v_r,a_r,a_h     # D^G: t,d_h,d_r,v_h,v_r,action
//! 0,21.5,18.25,5.1,2.0,2,-0.03
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use crate::domain::{Intention, RobotAction, ScenarioKind, WorldState};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const HUMAN_COLUMNS: &str = "t,d_h,d_r,v_h,v_r,a_r,a_h";
pub const GUIDE_COLUMNS: &str = "t,d_h,d_r,v_h,v_r,action";

#[derive(Debug, Clone, PartialEq)]
pub struct HumanRecord {
    pub t: usize,
    pub state: WorldState,
    /// Robot acceleration in the conflict frame (m/s²).
    pub robot_accel: f64,
    pub human_accel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanDemo {
    pub intention: Intention,
    pub kind: ScenarioKind,
    pub rows: Vec<HumanRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuideRecord {
    pub t: usize,
    pub state: WorldState,
    pub action: RobotAction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuideDemo {
    pub kind: ScenarioKind,
    pub rows: Vec<GuideRecord>,
}

impl HumanDemo {
    pub fn to_text(&self) -> String {
        let mut s = format!("intention {}\nscenario {}\n{HUMAN_COLUMNS}\n", self.intention, self.kind);
        for r in &self.rows {
            let x = &r.state;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.t, x.d_h, x.d_r, x.v_h, x.v_r, r.robot_accel, r.human_accel
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<HumanDemo> {
        let mut lines = content_lines(text);
        let intention = header(&mut lines, "intention", Intention::parse)?;
        let kind = header(&mut lines, "scenario", ScenarioKind::parse)?;
        columns(&mut lines, HUMAN_COLUMNS)?;
        let mut rows = Vec::new();
        for (n, line) in lines {
            let f = fields(n, line, 7)?;
            rows.push(HumanRecord {
                t: parse_t(n, f[0])?,
                state: parse_state(n, &f[1..5])?,
                robot_accel: parse_f64(n, f[5])?,
                human_accel: parse_f64(n, f[6])?,
            });
        }
        check_times(rows.iter().map(|r| r.t), text)?;
        Ok(HumanDemo {
            intention,
            kind,
            rows,
        })
    }
}

impl GuideDemo {
    pub fn to_text(&self) -> String {
        let mut s = format!("scenario {}\n{GUIDE_COLUMNS}\n", self.kind);
        for r in &self.rows {
            let x = &r.state;
            let _ = writeln!(s, "{},{},{},{},{},{}", r.t, x.d_h, x.d_r, x.v_h, x.v_r, r.action);
        }
        s
    }

    pub fn parse(text: &str) -> Result<GuideDemo> {
        let mut lines = content_lines(text);
        let kind = header(&mut lines, "scenario", ScenarioKind::parse)?;
        columns(&mut lines, GUIDE_COLUMNS)?;
        let mut rows = Vec::new();
        for (n, line) in lines {
            let f = fields(n, line, 6)?;
            let action = RobotAction::parse(f[5])
                .ok_or_else(|| Error::parse(n, format!("unknown action '{}'", f[5])))?;
            action
                .check_allowed(kind)
                .map_err(|e| Error::parse(n, e.to_string()))?;
            rows.push(GuideRecord {
                t: parse_t(n, f[0])?,
                state: parse_state(n, &f[1..5])?,
                action,
            });
        }
        check_times(rows.iter().map(|r| r.t), text)?;
        Ok(GuideDemo { kind, rows })
    }
}

type Lines<'a> = std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>;

fn content_lines(text: &str) -> Lines<'_> {
    let it: Box<dyn Iterator<Item = (usize, &str)>> = Box::new(
        text.lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty()),
    );
    it.peekable()
}

fn header<T>(lines: &mut Lines<'_>, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| Error::parse(1, format!("missing '{key}' header")))?;
    let value = line
        .strip_prefix(key)
        .filter(|rest| rest.starts_with(char::is_whitespace))
        .ok_or_else(|| Error::parse(n, format!("expected '{key} <value>'")))?;
    parse(value.trim()).ok_or_else(|| Error::parse(n, format!("invalid {key} '{}'", value.trim())))
}

fn columns(lines: &mut Lines<'_>, expected: &str) -> Result<()> {
    match lines.next() {
        Some((_, l)) if l.replace(' ', "") == expected => Ok(()),
        Some((n, l)) => Err(Error::parse(n, format!("expected column line '{expected}', got '{l}'"))),
        None => Err(Error::parse(1, "missing column line")),
    }
}

fn fields(n: usize, line: &str, count: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != count {
        return Err(Error::parse(n, format!("expected {count} fields, found {}", f.len())));
    }
    Ok(f)
}

fn parse_f64(n: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(n, format!("invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(n, format!("non-finite value '{s}'")));
    }
    Ok(v)
}

fn parse_t(n: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(n, format!("invalid step index '{s}'")))
}

fn parse_state(n: usize, f: &[&str]) -> Result<WorldState> {
    WorldState::new(
        parse_f64(n, f[0])?,
        parse_f64(n, f[1])?,
        parse_f64(n, f[2])?,
        parse_f64(n, f[3])?,
    )
    .map_err(|e| Error::parse(n, e.to_string()))
}

fn check_times(ts: impl Iterator<Item = usize>, text: &str) -> Result<()> {
    let mut prev: Option<usize> = None;
    for t in ts {
        if prev.is_some_and(|p| t <= p) {
            let line = text
                .lines()
                .position(|l| l.trim().starts_with(&format!("{t},")))
                .map_or(1, |i| i + 1);
            return Err(Error::parse(line, "timestamps must be strictly increasing"));
        }
        prev = Some(t);
    }
    Ok(())
}

/// Writes one file per episode into `dir/human` and `dir/guide`.
pub fn write_demo_dir(dir: &Path, human: &[HumanDemo], guide: &[GuideDemo]) -> Result<()> {
    let hdir = dir.join("human");
    let gdir = dir.join("guide");
    fs::create_dir_all(&hdir)?;
    fs::create_dir_all(&gdir)?;
    for (i, d) in human.iter().enumerate() {
        fs::write(hdir.join(format!("{}_{i:04}.txt", d.kind)), d.to_text())?;
    }
    for (i, d) in guide.iter().enumerate() {
        fs::write(gdir.join(format!("{}_{i:04}.txt", d.kind)), d.to_text())?;
    }
    Ok(())
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

fn with_file<T>(path: &Path, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    parse(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Reads `dir/human` and `dir/guide` in file-name order.
pub fn read_demo_dir(dir: &Path) -> Result<(Vec<HumanDemo>, Vec<GuideDemo>)> {
    let human = sorted_files(&dir.join("human"))?
        .iter()
        .map(|p| with_file(p, HumanDemo::parse))
        .collect::<Result<_>>()?;
    let guide = sorted_files(&dir.join("guide"))?
        .iter()
        .map(|p| with_file(p, GuideDemo::parse))
        .collect::<Result<_>>()?;
    Ok((human, guide))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> HumanDemo {
        HumanDemo {
            intention: Intention::Aggressive,
            kind: ScenarioKind::Intersection,
            rows: vec![
                HumanRecord {
                    t: 0,
                    state: WorldState::new(20.0, 18.5, 5.0, 2.0).unwrap(),
                    robot_accel: 2.0,
                    human_accel: 0.1 + 0.2,
                },
                HumanRecord {
                    t: 1,
                    state: WorldState::new(18.1, 17.7, 5.1, 2.66).unwrap(),
                    robot_accel: -2.0,
                    human_accel: 1.0 / 3.0,
                },
            ],
        }
    }

    #[test]
    fn human_demo_round_trips_exactly() {
        let d = demo();
        let text = d.to_text();
        assert!(text.starts_with("intention aggressive\n"));
        assert_eq!(HumanDemo::parse(&text).unwrap(), d);
    }

    #[test]
    fn malformed_row_reports_its_line() {
        let text = demo().to_text().replace("18.1,", "abc,");
        match HumanDemo::parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        let missing = "scenario intersection\nt,d_h,d_r,v_h,v_r,a_r,a_h\n";
        assert!(matches!(HumanDemo::parse(missing), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn guide_rejects_switch_outside_lane_switch() {
        let text = "scenario intersection\nt,d_h,d_r,v_h,v_r,action\n0,1,2,3,4,switch-left\n";
        assert!(matches!(GuideDemo::parse(text), Err(Error::Parse { line: 3, .. })));
        let ok = text.replace("intersection", "lane-switch");
        assert_eq!(GuideDemo::parse(&ok).unwrap().rows[0].action, RobotAction::SwitchLeft);
    }
}
