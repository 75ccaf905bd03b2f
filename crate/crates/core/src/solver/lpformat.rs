//! Plain-text problem dump for debugging; grammar in `docs/lp-format.md`.

use std::fmt::Write;

use super::{MilpProblem, ObjectiveSense, RowSense};
use crate::num::Scalar;

fn term<T: Scalar>(out: &mut String, first: bool, coef: T, name: &str) {
    let c = coef.as_f64();
    if first {
        let _ = write!(out, "{c} {name}");
    } else if c < 0.0 {
        let _ = write!(out, "- {} {name}", -c);
    } else {
        let _ = write!(out, "+ {c} {name}");
    }
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        v.to_string()
    }
}

pub fn write_lp<T: Scalar>(milp: &MilpProblem<T>) -> String {
    let lp = &milp.lp;
    let mut out = String::new();
    out.push_str(match lp.sense {
        ObjectiveSense::Minimize => "minimize\n",
        ObjectiveSense::Maximize => "maximize\n",
    });
    out.push_str("  obj:");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != T::zero() {
            out.push(' ');
            term(&mut out, first, c, &lp.names[j]);
            first = false;
        }
    }
    if lp.objective_offset != T::zero() || first {
        out.push(' ');
        term(&mut out, first, lp.objective_offset, "");
    }
    out.push_str("\nsubject to\n");
    for row in &lp.rows {
        let _ = write!(out, "  {}:", row.name);
        for (k, &(j, a)) in row.coeffs.iter().enumerate() {
            out.push(' ');
            term(&mut out, k == 0, a, &lp.names[j]);
        }
        let op = match row.sense {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs.as_f64());
    }
    out.push_str("bounds\n");
    for j in 0..lp.num_vars() {
        let _ = writeln!(
            out,
            "  {} <= {} <= {}",
            bound(lp.lower[j].as_f64()),
            lp.names[j],
            bound(lp.upper[j].as_f64())
        );
    }
    let ints: Vec<&str> = milp
        .integer
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(j, _)| lp.names[j].as_str())
        .collect();
    if !ints.is_empty() {
        out.push_str("general\n");
        for name in ints {
            let _ = writeln!(out, "  {name}");
        }
    }
    if !milp.convex.is_empty() {
        out.push_str("convex\n");
        for c in &milp.convex {
            let _ = writeln!(out, "  {}", c.name());
        }
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::LinearProgram;

    #[test]
    fn dump_lists_every_section() {
        let mut milp = MilpProblem::new(LinearProgram::new(ObjectiveSense::Minimize));
        let x = milp.add_var("x", 0.0, 1.0, 2.0, true);
        let y = milp.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -1.0, false);
        milp.add_row("r0", vec![(x, 1.0), (y, -3.5)], RowSense::Ge, 1.0);
        let text = write_lp(&milp);
        assert_eq!(
            text,
            "minimize\n  obj: 2 x - 1 y\nsubject to\n  r0: 1 x - 3.5 y >= 1\nbounds\n  0 <= x <= 1\n  -inf <= y <= inf\ngeneral\n  x\nend\n"
        );
    }
}
