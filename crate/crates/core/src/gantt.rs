//! Gantt charts for schedules: processors on top, links below, one shared
//! time axis.

use std::fmt::Write;

use crate::graph::id_cmp;
use crate::scheduler::Schedule;

struct Bar<'a> {
    row: usize,
    start: f64,
    finish: f64,
    label: &'a str,
}

struct Layout<'a> {
    rows: Vec<String>,
    processors: usize,
    bars: Vec<Bar<'a>>,
    horizon: f64,
}

fn layout(schedule: &Schedule) -> Layout<'_> {
    let mut procs: Vec<&str> = schedule
        .tasks
        .iter()
        .map(|t| t.processor.as_str())
        .collect();
    procs.sort_by(|a, b| id_cmp(a, b));
    procs.dedup();
    let mut links: Vec<&str> = schedule
        .messages
        .iter()
        .flat_map(|m| m.hops.iter().map(|h| h.link.as_str()))
        .collect();
    links.sort_by(|a, b| id_cmp(a, b));
    links.dedup();
    let row_of = |list: &[&str], id: &str| list.iter().position(|x| *x == id).expect("row exists");

    let mut bars = Vec::new();
    for t in &schedule.tasks {
        bars.push(Bar {
            row: row_of(&procs, &t.processor),
            start: t.start,
            finish: t.finish,
            label: &t.id,
        });
    }
    for m in &schedule.messages {
        for h in &m.hops {
            bars.push(Bar {
                row: procs.len() + row_of(&links, &h.link),
                start: h.start,
                finish: h.finish,
                label: &m.src,
            });
        }
    }
    let horizon = bars
        .iter()
        .map(|b| b.finish)
        .fold(schedule.makespan, f64::max);
    Layout {
        rows: procs.iter().chain(&links).map(|s| s.to_string()).collect(),
        processors: procs.len(),
        bars,
        horizon,
    }
}

/// Number of bars a chart of `schedule` contains.
pub fn bar_count(schedule: &Schedule) -> usize {
    schedule.tasks.len()
        + schedule
            .messages
            .iter()
            .map(|m| m.hops.len())
            .sum::<usize>()
}

const WIDTH: f64 = 960.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 20.0;
const ROW: f64 = 26.0;

pub fn render_svg(schedule: &Schedule) -> String {
    let l = layout(schedule);
    let scale = (WIDTH - LEFT - 20.0) / l.horizon.max(1.0);
    let axis_y = TOP + ROW * l.rows.len() as f64 + 6.0;
    let height = axis_y + 40.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="monospace" font-size="11">"#
    );
    for (i, name) in l.rows.iter().enumerate() {
        let y = TOP + ROW * i as f64;
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{}</text>"#, y + 16.0, xml(name));
    }
    for b in &l.bars {
        let x = LEFT + b.start * scale;
        let w = ((b.finish - b.start) * scale).max(0.5);
        let y = TOP + ROW * b.row as f64 + 3.0;
        let fill = if b.row < l.processors {
            "#8fb8de"
        } else {
            "#f2c57c"
        };
        let _ = writeln!(
            s,
            r##"<rect class="bar" x="{x:.3}" y="{y:.1}" width="{w:.3}" height="{:.1}" fill="{fill}" stroke="#333"><title>{} [{}, {})</title></rect>"##,
            ROW - 6.0,
            xml(b.label),
            b.start,
            b.finish
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.1}">{}</text>"#,
            x + 2.0,
            y + 13.0,
            xml(b.label)
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="#000"/>"##,
        WIDTH - 20.0
    );
    let ticks = 10;
    for k in 0..=ticks {
        let t = l.horizon * k as f64 / ticks as f64;
        let x = LEFT + t * scale;
        let _ = writeln!(
            s,
            r##"<line x1="{x:.3}" y1="{axis_y:.1}" x2="{x:.3}" y2="{:.1}" stroke="#000"/><text x="{x:.3}" y="{:.1}" text-anchor="middle">{}</text>"##,
            axis_y + 5.0,
            axis_y + 18.0,
            trim(t)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Plain-text chart, `columns` characters wide for the time axis.
pub fn render_ascii(schedule: &Schedule, columns: usize) -> String {
    let l = layout(schedule);
    let columns = columns.max(10);
    let scale = columns as f64 / l.horizon.max(1.0);
    let name_w = l.rows.iter().map(String::len).max().unwrap_or(0).max(4);
    let mut grid: Vec<Vec<char>> = vec![vec!['.'; columns]; l.rows.len()];
    for b in &l.bars {
        let from = ((b.start * scale).round() as usize).min(columns);
        let to = ((b.finish * scale).round() as usize).clamp(from, columns);
        let mark: Vec<char> = b.label.chars().collect();
        for (k, cell) in grid[b.row][from..to].iter_mut().enumerate() {
            *cell = if k == 0 {
                '|'
            } else {
                *mark.get(k - 1).unwrap_or(&'=')
            };
        }
    }
    let mut s = String::new();
    for (name, row) in l.rows.iter().zip(&grid) {
        let _ = writeln!(s, "{name:>name_w$} {}", row.iter().collect::<String>());
    }
    let _ = writeln!(
        s,
        "{:>name_w$} 0{:>w$}",
        "time",
        trim(l.horizon),
        w = columns - 1
    );
    s
}

fn trim(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::ScheduledTask;

    fn empty() -> Schedule {
        Schedule {
            tasks: vec![],
            messages: vec![],
            makespan: 0.0,
            alpha: 0.0,
        }
    }

    #[test]
    fn empty_chart_has_only_axis() {
        let svg = render_svg(&empty());
        assert_eq!(svg.matches("class=\"bar\"").count(), 0);
        assert!(svg.contains("<line"));
        assert_eq!(bar_count(&empty()), 0);
        assert!(render_ascii(&empty(), 20).starts_with("time"));
    }

    #[test]
    fn one_task_one_bar() {
        let s = Schedule {
            tasks: vec![ScheduledTask {
                id: "n1".into(),
                processor: "p1".into(),
                start: 0.0,
                finish: 10.0,
            }],
            makespan: 10.0,
            ..empty()
        };
        let svg = render_svg(&s);
        assert_eq!(svg.matches("class=\"bar\"").count(), 1);
        let scale = (WIDTH - LEFT - 20.0) / 10.0;
        assert!(svg.contains(&format!("width=\"{:.3}\"", 10.0 * scale)));
        assert_eq!(render_svg(&s), svg);
        let text = render_ascii(&s, 20);
        assert!(text.starts_with("  p1 |n1=================\n"), "{text}");
    }
}
