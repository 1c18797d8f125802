use std::fmt::Write as _;
use std::io::{self, Write};

use super::model::{Direction, LpModel, Sense, VarKind};

fn column_name(model: &LpModel, c: usize) -> String {
    match model.vars[c].kind {
        VarKind::Assign { cluster, tag } => format!("x_{cluster}_{tag}"),
        VarKind::Cover { object } => format!("z_{object}"),
        VarKind::Overlap { tag } => format!("y_{tag}"),
        VarKind::Free => format!("v_{c}"),
    }
}

fn push_terms(line: &mut String, model: &LpModel, terms: impl Iterator<Item = (usize, f64)>) {
    let mut any = false;
    for (c, a) in terms {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(line, " {sign} {} {}", a.abs(), column_name(model, c));
        any = true;
    }
    if !any {
        line.push_str(" 0");
    }
}

/// Writes `model` in CPLEX LP text format so an external solver can be run on
/// it. Column names are `x_<cluster>_<tag>`, `z_<object>` and `y_<tag>`.
pub fn write_lp_format<W: Write>(model: &LpModel, mut out: W) -> io::Result<()> {
    let mut text = String::new();
    text.push_str(match model.direction {
        Direction::Minimize => "Minimize\n",
        Direction::Maximize => "Maximize\n",
    });
    let mut line = String::from(" obj:");
    push_terms(
        &mut line,
        model,
        model
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.cost != 0.0)
            .map(|(c, v)| (c, v.cost)),
    );
    text.push_str(&line);
    text.push_str("\nSubject To\n");
    for (r, row) in model.rows.iter().enumerate() {
        if row.coeffs.is_empty() {
            continue;
        }
        let mut line = format!(" c{r}:");
        push_terms(&mut line, model, row.coeffs.iter().copied());
        let op = match row.sense {
            Sense::Ge => ">=",
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(line, " {op} {}", row.rhs);
        text.push_str(&line);
    }
    text.push_str("Bounds\n");
    for (c, v) in model.vars.iter().enumerate() {
        let upper = if v.upper.is_finite() {
            v.upper.to_string()
        } else {
            "+inf".to_string()
        };
        let _ = writeln!(
            text,
            " {} <= {} <= {}",
            v.lower,
            column_name(model, c),
            upper
        );
    }
    text.push_str("End\n");
    out.write_all(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::build_relaxation;
    use crate::model::{Instance, Requirements};

    #[test]
    fn exports_named_sections() {
        let inst = Instance::new(2, 2, vec![(0, vec![0]), (1, vec![1])]).unwrap();
        let model = build_relaxation(&inst, &Requirements::new(vec![1, 1])).unwrap();
        let mut buf = Vec::new();
        write_lp_format(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("Minimize\n obj: + 1 x_0_0 + 1 x_0_1 + 1 x_1_0 + 1 x_1_1\n"));
        assert!(text.contains(" c0: + 1 x_0_0 - 1 z_0 >= 0\n"));
        assert!(text.contains(" c2: + 1 z_0 >= 1\n"));
        assert!(text.contains(" c4: + 1 x_0_0 + 1 x_1_0 <= 1\n"));
        assert!(text.contains(" 0 <= z_1 <= 1\n"));
        assert!(text.ends_with("End\n"));
    }
}
