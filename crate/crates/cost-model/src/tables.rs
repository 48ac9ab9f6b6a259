//! Named cost tables emitted by the CLI and checked cell-by-cell in tests.

use crate::{round_one_decimal, round_two_decimals, Operator, UnsupportedModel, WorkModel};

/// One emitted value: either an exact integer or a rounded ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableCell {
    Int(u64),
    Fixed1(f64),
    Fixed2(f64),
}

impl std::fmt::Display for TableCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TableCell::Int(v) => write!(f, "{v}"),
            TableCell::Fixed1(v) => write!(f, "{v:.1}"),
            TableCell::Fixed2(v) => write!(f, "{v:.2}"),
        }
    }
}

/// A rendered table: header plus one row per polynomial degree.
#[derive(Debug, Clone)]
pub struct CostTable {
    pub name: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<TableCell>)>,
}

impl CostTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (p, cells) in &self.rows {
            out.push_str(&p.to_string());
            for c in cells {
                out.push(',');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn table_names() -> &'static [&'static str] {
    &[
        "residual-flops",
        "jacobian-matvec",
        "mesh-jacobian-matvec",
        "hessian-xx-matvec",
        "jacobian-assembly",
        "mesh-jacobian-assembly",
        "hessian-uu-assembly",
        "hessian-ux-assembly",
        "breakeven-mesh-jacobian",
        "breakeven-hessian-uu",
        "breakeven-hessian-ux",
        "breakeven-hessian-xx",
    ]
}

/// Build a named table over the requested degrees and dimensions.
pub fn table_by_name(
    name: &str,
    degrees: &[usize],
    dims: &[usize],
) -> Result<CostTable, UnsupportedModel> {
    let mut columns = Vec::new();
    let mut rows: Vec<(usize, Vec<TableCell>)> = degrees.iter().map(|p| (*p, Vec::new())).collect();

    let mut push_col = |label: String, values: Vec<TableCell>| {
        columns.push(label);
        for (row, v) in rows.iter_mut().zip(values) {
            row.1.push(v);
        }
    };

    for &d in dims {
        let models: Vec<WorkModel> = degrees
            .iter()
            .map(|&p| WorkModel::new(d, p))
            .collect::<Result<_, _>>()?;
        match name {
            "residual-flops" => {
                push_col(
                    format!("volume_d{d}"),
                    models
                        .iter()
                        .map(|m| TableCell::Int(m.residual_volume_flops()))
                        .collect(),
                );
                push_col(
                    format!("face_d{d}"),
                    models
                        .iter()
                        .map(|m| TableCell::Int(m.residual_face_flops()))
                        .collect(),
                );
                push_col(
                    format!("total_d{d}"),
                    models
                        .iter()
                        .map(|m| TableCell::Int(m.residual_flops()))
                        .collect(),
                );
            }
            "jacobian-matvec" | "mesh-jacobian-matvec" | "hessian-xx-matvec" => {
                let op = match name {
                    "jacobian-matvec" => Operator::FlowJacobian,
                    "mesh-jacobian-matvec" => Operator::MeshJacobian,
                    _ => Operator::DualHessianXx,
                };
                push_col(
                    format!("flops_d{d}"),
                    models
                        .iter()
                        .map(|m| TableCell::Int(m.matvec_flops(op)))
                        .collect(),
                );
                let rel: Vec<TableCell> = models
                    .iter()
                    .map(|m| {
                        let r = m.matvec_relwork(op);
                        if op == Operator::FlowJacobian {
                            TableCell::Fixed1(round_one_decimal(r))
                        } else {
                            TableCell::Fixed2(round_two_decimals(r))
                        }
                    })
                    .collect();
                push_col(format!("relative_d{d}"), rel);
            }
            "jacobian-assembly" | "mesh-jacobian-assembly" | "hessian-uu-assembly"
            | "hessian-ux-assembly" => {
                let op = match name {
                    "jacobian-assembly" => Operator::FlowJacobian,
                    "mesh-jacobian-assembly" => Operator::MeshJacobian,
                    "hessian-uu-assembly" => Operator::DualHessianUu,
                    _ => Operator::DualHessianUx,
                };
                push_col(
                    format!("relwork_d{d}"),
                    models
                        .iter()
                        .map(|m| TableCell::Fixed1(round_one_decimal(m.assembly_relwork(op))))
                        .collect(),
                );
            }
            "breakeven-mesh-jacobian" | "breakeven-hessian-uu" | "breakeven-hessian-ux"
            | "breakeven-hessian-xx" => {
                let op = match name {
                    "breakeven-mesh-jacobian" => Operator::MeshJacobian,
                    "breakeven-hessian-uu" => Operator::DualHessianUu,
                    "breakeven-hessian-ux" => Operator::DualHessianUx,
                    _ => Operator::DualHessianXx,
                };
                let vals: Result<Vec<TableCell>, _> = models
                    .iter()
                    .map(|m| m.breakeven_count(op).map(TableCell::Int))
                    .collect();
                push_col(format!("count_d{d}"), vals?);
            }
            other => return Err(UnsupportedModel(format!("unknown table '{other}'"))),
        }
    }

    Ok(CostTable {
        name: table_names()
            .iter()
            .find(|n| **n == name)
            .copied()
            .unwrap_or("custom"),
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let t = table_by_name("residual-flops", &[1, 2], &[2]).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("p,volume_d2"));
        assert!(lines[1].starts_with("1,692,710,2112"));
    }

    #[test]
    fn unknown_table_is_an_error() {
        assert!(table_by_name("nope", &[1], &[2]).is_err());
    }
}
