use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use lshxdp::privacy::{
    epsilon_for_target_xi, laplsh_epsilon_for_target_xi, laplsh_report, pxdp_budget_simple, pxdp_budget_tight,
    solve_alpha, table1, worst_case_report, BudgetReport, PrivacyParams,
};
use serde::Serialize;

use crate::io::{write_rows, Format};
use crate::MechanismArg;

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Print the XDP-to-LDP conversion table for d_θ ∈ {0.05, 0.1}, δ = 0.01.
    #[arg(long)]
    table1: bool,
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<usize>,
    #[arg(long, value_delimiter = ',', conflicts_with = "xi")]
    eps: Vec<f64>,
    /// Target total budget; inverted to ε under the tight bound.
    #[arg(long, value_delimiter = ',')]
    xi: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long = "d-theta", alias = "d")]
    d_theta: Option<f64>,
    #[arg(long, value_enum, default_value_t = MechanismArg::Lshrr)]
    mechanism: MechanismArg,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    bound_kind: &'static str,
    epsilon: f64,
    kappa: Option<usize>,
    d_theta: Option<f64>,
    delta: Option<f64>,
    xi: f64,
    alpha: Option<f64>,
    delta_out: f64,
    ldp_budget: Option<f64>,
    flip_prob: Option<f64>,
}

impl Row {
    fn from_report(r: BudgetReport, d_theta: Option<f64>, delta: Option<f64>) -> Self {
        let lap = r.bound_kind == lshxdp::privacy::BoundKind::Laplsh;
        Self {
            bound_kind: r.bound_kind.as_str(),
            epsilon: r.epsilon,
            kappa: (!lap).then_some(r.kappa),
            d_theta,
            delta,
            xi: r.xi,
            alpha: r.alpha,
            delta_out: r.delta_out,
            ldp_budget: r.ldp_budget,
            flip_prob: r.flip_prob,
        }
    }
}

pub fn run(a: BudgetArgs) -> Result<()> {
    if a.table1 {
        return write_rows(a.out.as_ref(), a.format, "lshxdp.ldp-table.v1", &table1());
    }
    let mut rows = Vec::new();
    match a.mechanism {
        MechanismArg::Laplsh => {
            let Some(d) = a.d_theta else {
                bail!("laplsh budgets need --d-theta")
            };
            let eps: Vec<f64> = if a.xi.is_empty() {
                a.eps.clone()
            } else {
                a.xi.iter()
                    .map(|&xi| laplsh_epsilon_for_target_xi(xi, d))
                    .collect::<Result<_, _>>()?
            };
            if eps.is_empty() {
                bail!("pass --eps or --xi");
            }
            for e in eps {
                rows.push(Row::from_report(laplsh_report(e, d)?, Some(d), None));
            }
        }
        MechanismArg::Lshrr => {
            if a.kappa.is_empty() {
                bail!("pass --kappa");
            }
            if a.eps.is_empty() && a.xi.is_empty() {
                bail!("pass --eps or --xi");
            }
            for &kappa in &a.kappa {
                for &e in &a.eps {
                    rows.push(Row::from_report(worst_case_report(e, kappa)?, None, None));
                    if let Some(d) = a.d_theta {
                        let p = PrivacyParams::new(e, kappa, a.delta, d)?;
                        rows.push(Row::from_report(pxdp_budget_simple(&p)?, Some(d), Some(a.delta)));
                        match solve_alpha(kappa, d, a.delta) {
                            Ok(alpha) => {
                                rows.push(Row::from_report(pxdp_budget_tight(&p, alpha)?, Some(d), Some(a.delta)))
                            }
                            Err(e) => log::warn!("tight bound skipped at kappa={kappa}: {e}"),
                        }
                    }
                }
                for &xi in &a.xi {
                    let Some(d) = a.d_theta else {
                        bail!("--xi needs --d-theta")
                    };
                    let e = epsilon_for_target_xi(xi, kappa, d, a.delta)?;
                    let p = PrivacyParams::new(e, kappa, a.delta, d)?;
                    let alpha = solve_alpha(kappa, d, a.delta)?;
                    rows.push(Row::from_report(pxdp_budget_tight(&p, alpha)?, Some(d), Some(a.delta)));
                }
            }
        }
        other => bail!("no budget for mechanism {other:?}"),
    }
    write_rows(a.out.as_ref(), a.format, "lshxdp.budget.v1", &rows)
}
