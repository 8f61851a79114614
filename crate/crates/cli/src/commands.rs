use cournot_core::equilibrium::{foc_residuals, solve_foc_system};
use cournot_core::partitions::{enumerate_partitions, PartCount};
use cournot_core::report::{csv_field, fmt_num, fmt_parts, render_table};
use cournot_core::stability::{frontier, is_stable, FrontierRow};
use cournot_core::worth::accounting_worth;
use cournot_core::{
    closed_form_equilibrium, coalition_worth, core_check, exhaustive_scan, threshold_gamma1, threshold_zeta,
    CoalitionStructure, EquilibriumProfile, Error, MarketParams, ScanLimits, ScanReport,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{Common, FigureArgs, Format};
use crate::CliError;

/// Number of scan cells cross-checked by `scan --check`.
const CHECK_SAMPLE: usize = 32;

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn render(
    format: Format,
    header: &[&str],
    rows: &[Vec<String>],
    json: impl FnOnce() -> Result<String, CliError>,
) -> Result<String, CliError> {
    match format {
        Format::Json => json(),
        Format::Csv => Ok(csv(header, rows)),
        Format::Table => Ok(render_table(header, rows)),
    }
}

#[derive(Serialize)]
struct OracleCheck {
    /// Largest relative gap between closed-form and full-solve quantities.
    max_rel_diff: Option<f64>,
    /// Largest within-coalition spread of the full solve.
    max_spread: Option<f64>,
    /// Largest first-order residual of the closed form, relative to a - c.
    max_residual: f64,
    oracle_error: Option<String>,
}

fn oracle_check(
    params: &MarketParams,
    structure: &CoalitionStructure,
    eq: &EquilibriumProfile,
) -> Result<OracleCheck, CliError> {
    let max_residual = foc_residuals(params, &eq.sizes, &eq.y)
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs() / params.margin()));
    match solve_foc_system(params, structure) {
        Ok(oracle) => {
            let max_rel_diff =
                eq.y.iter()
                    .zip(&oracle.y)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs() / b.abs()));
            Ok(OracleCheck {
                max_rel_diff: Some(max_rel_diff),
                max_spread: Some(oracle.max_spread),
                max_residual,
                oracle_error: None,
            })
        }
        // per-agent quantities are not unique here; only the closed form applies
        Err(err @ Error::SingularSystem { .. }) => Ok(OracleCheck {
            max_rel_diff: None,
            max_spread: None,
            max_residual,
            oracle_error: Some(err.to_string()),
        }),
        Err(err) => Err(err.into()),
    }
}

pub fn equilibrium(args: &Common) -> Result<String, CliError> {
    let scenario = args.scenario()?;
    let params = scenario.params()?;
    let structure = scenario.structure()?;
    let eq = closed_form_equilibrium(&params, &structure)?;
    let check = if args.check {
        Some(oracle_check(&params, &structure, &eq)?)
    } else {
        None
    };

    #[derive(Serialize)]
    struct Out<'a> {
        params: &'a MarketParams,
        structure: &'a CoalitionStructure,
        equilibrium: &'a EquilibriumProfile,
        nonpositive_price: bool,
        check: Option<OracleCheck>,
    }

    let header = ["coalition", "size", "y", "lambda", "A", "price"];
    let rows: Vec<Vec<String>> = (0..eq.y.len())
        .map(|k| {
            vec![
                if k == 0 { "S".to_string() } else { format!("S{k}") },
                eq.sizes[k].to_string(),
                fmt_num(eq.y[k]),
                fmt_num(eq.lambdas[k]),
                fmt_num(eq.big_a[k]),
                fmt_num(eq.prices[k]),
            ]
        })
        .collect();
    let format = args.format.unwrap_or(Format::Table);
    if format == Format::Json {
        return to_json(&Out {
            params: &params,
            structure: &structure,
            nonpositive_price: eq.has_nonpositive_price(),
            equilibrium: &eq,
            check,
        });
    }
    let mut text = match format {
        Format::Csv => csv(&header, &rows),
        _ => render_table(&header, &rows),
    };
    if format == Format::Table {
        text.push_str(&format!("C_0 = {}\n", fmt_num(eq.c0)));
        if eq.has_nonpositive_price() {
            text.push_str("warning: some equilibrium price is not positive\n");
        }
        if let Some(check) = check {
            match (check.max_rel_diff, check.max_spread) {
                (Some(d), Some(sp)) => text.push_str(&format!(
                    "check: max relative difference vs full solve = {d:.3e}, within-coalition spread = {sp:.3e}, residual = {:.3e}\n",
                    check.max_residual
                )),
                _ => text.push_str(&format!(
                    "check: residual = {:.3e}; full solve unavailable ({})\n",
                    check.max_residual,
                    check.oracle_error.unwrap_or_default()
                )),
            }
        }
    }
    Ok(text)
}

pub fn worth(args: &Common) -> Result<String, CliError> {
    let scenario = args.scenario()?;
    let params = scenario.params()?;
    let structure = scenario.structure()?;
    let report = coalition_worth(&params, &structure)?;
    let margin = report.margin();
    let stable = is_stable(margin, report.grand_per_agent);

    let accounting = if args.check {
        match solve_foc_system(&params, &structure) {
            Ok(oracle) => Some(accounting_worth(&params, &oracle)),
            Err(Error::SingularSystem { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        report: &'a cournot_core::WorthReport,
        margin: f64,
        stable: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        accounting_v_s: Option<f64>,
    }

    let header = [
        "s",
        "partition",
        "v_s",
        "per_agent",
        "v_n",
        "grand_per_agent",
        "margin",
        "stable",
    ];
    let rows = vec![vec![
        structure.s().to_string(),
        fmt_parts(structure.outsiders()),
        fmt_num(report.v_s),
        fmt_num(report.per_agent),
        fmt_num(report.v_n),
        fmt_num(report.grand_per_agent),
        fmt_num(margin),
        stable.to_string(),
    ]];
    let format = args.format.unwrap_or(Format::Table);
    let mut text = render(format, &header, &rows, || {
        to_json(&Out {
            report: &report,
            margin,
            stable,
            accounting_v_s: accounting,
        })
    })?;
    if format == Format::Table {
        if let Some(acc) = accounting {
            text.push_str(&format!("check: price-times-quantity worth = {}\n", fmt_num(acc)));
        }
    }
    Ok(text)
}

pub fn jstar(args: &Common) -> Result<String, CliError> {
    let scenario = args.scenario()?;
    let params = scenario.params()?;
    let s = scenario.s()?;
    let report = threshold_zeta(params.n(), s, params.gamma())?;
    let gamma1 = if params.gamma() == 1.0 {
        Some(threshold_gamma1(params.n(), s)?)
    } else {
        None
    };

    // empirical frontier for this s over every outsider partition
    let empirical = if args.check {
        let limits = ScanLimits {
            threads: args.threads,
            ..ScanLimits::default()
        };
        let rows = frontier(&params, s, &limits)?;
        let jstar = rows.iter().rev().take_while(|r| r.all_stable).last().map(|r| r.j);
        let sufficient = rows
            .iter()
            .filter(|r| r.j > report.zeta.floor() as usize)
            .all(|r| r.all_stable);
        Some((jstar, sufficient))
    } else {
        None
    };

    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        report: &'a cournot_core::ThresholdReport,
        first_j_above: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        gamma1_threshold: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        empirical_jstar: Option<Option<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        zeta_sufficient: Option<bool>,
    }

    let mut header = vec!["n", "s", "gamma", "zeta", "first_j_above", "feasible"];
    let mut row = vec![
        params.n().to_string(),
        s.to_string(),
        fmt_num(params.gamma()),
        fmt_num(report.zeta),
        report.first_j_above().to_string(),
        report.feasible.to_string(),
    ];
    if let Some((jstar, sufficient)) = empirical {
        header.extend(["empirical_jstar", "zeta_sufficient"]);
        row.push(jstar.map(|j| j.to_string()).unwrap_or_default());
        row.push(sufficient.to_string());
    }
    render(args.format.unwrap_or(Format::Table), &header, &[row], || {
        to_json(&Out {
            report: &report,
            first_j_above: report.first_j_above(),
            gamma1_threshold: gamma1,
            empirical_jstar: empirical.map(|e| e.0),
            zeta_sufficient: empirical.map(|e| e.1),
        })
    })
}

#[derive(Serialize)]
struct ScanCheck {
    seed: u64,
    sampled: usize,
    singular: usize,
    /// `None` when every sampled cell had a singular per-agent system.
    max_rel_diff: Option<f64>,
}

fn scan_check(params: &MarketParams, report: &ScanReport, seed: u64) -> Result<ScanCheck, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<_> = report.cells.choose_multiple(&mut rng, CHECK_SAMPLE).collect();
    let mut singular = 0;
    let mut max_rel_diff: Option<f64> = None;
    for cell in &picks {
        let st = CoalitionStructure::new(params.n(), cell.s, cell.partition.clone())?;
        match solve_foc_system(params, &st) {
            Ok(oracle) => {
                let acc = accounting_worth(params, &oracle);
                let diff = (acc - cell.v_s).abs() / cell.v_s.abs();
                max_rel_diff = Some(max_rel_diff.map_or(diff, |m| m.max(diff)));
            }
            Err(Error::SingularSystem { .. }) => singular += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ScanCheck {
        seed,
        sampled: picks.len(),
        singular,
        max_rel_diff,
    })
}

pub fn scan(args: &Common) -> Result<String, CliError> {
    let scenario = args.scenario()?;
    let params = scenario.params()?;
    let limits = ScanLimits {
        threads: args.threads,
        ..ScanLimits::default()
    };
    let report = exhaustive_scan(&params, &limits)?;
    let check = if args.check {
        Some(scan_check(&params, &report, args.seed)?)
    } else {
        None
    };

    match args.format.unwrap_or(Format::Json) {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                report: &'a ScanReport,
                #[serde(skip_serializing_if = "Option::is_none")]
                check: Option<ScanCheck>,
            }
            to_json(&Out { report: &report, check })
        }
        Format::Csv => Ok(report.to_csv()),
        Format::Table => {
            let header = [
                "s",
                "cells",
                "unstable",
                "empirical_jstar",
                "zeta",
                "zeta_first_j",
                "zeta_sufficient",
            ];
            let opt = |o: Option<String>| o.unwrap_or_else(|| "-".into());
            let rows: Vec<Vec<String>> = report
                .per_s
                .iter()
                .map(|r| {
                    vec![
                        r.s.to_string(),
                        r.cells.to_string(),
                        r.unstable.to_string(),
                        opt(r.empirical_jstar.map(|j| j.to_string())),
                        opt(r.zeta.map(fmt_num)),
                        opt(r.zeta_first_j.map(|j| j.to_string())),
                        opt(r.zeta_sufficient.map(|b| b.to_string())),
                    ]
                })
                .collect();
            let mut text = render_table(&header, &rows);
            text.push_str(&format!(
                "total cells = {}, unstable = {}\n",
                report.total_cells, report.unstable_cells
            ));
            if let Some(c) = check {
                let diff = c.max_rel_diff.map_or_else(|| "n/a".to_string(), |d| format!("{d:.3e}"));
                text.push_str(&format!(
                    "check: {} sampled cells (seed {}), max relative worth difference vs accounting = {diff}, singular = {}\n",
                    c.sampled, c.seed, c.singular
                ));
            }
            Ok(text)
        }
    }
}

pub fn figure(args: &FigureArgs) -> Result<String, CliError> {
    let scenario = args.common.scenario()?.with_defaults(0.9, 46, 4);
    let params = scenario.params()?;
    let s = scenario.s()?;
    if s >= params.n() {
        return Err(CliError::Validation(format!(
            "figure requires s < n, got s={s}, n={}",
            params.n()
        )));
    }
    let format = args.common.format.unwrap_or(Format::Csv);
    match args.which {
        1 => figure_extremes(&params, s, args.j.unwrap_or(6), format),
        _ => figure_frontier(&params, s, args.common.threads, format),
    }
}

#[derive(Serialize)]
struct ExtremeRow {
    rank: usize,
    partition: Vec<usize>,
    v_s: f64,
    per_agent: f64,
    margin: f64,
    stable: bool,
    extreme: &'static str,
}

fn figure_extremes(params: &MarketParams, s: usize, j: usize, format: Format) -> Result<String, CliError> {
    let m = params.n() - s;
    let mut rows = Vec::new();
    for parts in enumerate_partitions(m, PartCount::Exactly(j))? {
        let verdict = core_check(params, &CoalitionStructure::new(params.n(), s, parts)?)?;
        rows.push(verdict);
    }
    rows.sort_by(|a, b| a.worth.v_s.total_cmp(&b.worth.v_s));
    let last = rows.len() - 1;
    let rows: Vec<ExtremeRow> = rows
        .into_iter()
        .enumerate()
        .map(|(i, v)| ExtremeRow {
            rank: i + 1,
            partition: v.structure().outsiders().to_vec(),
            v_s: v.worth.v_s,
            per_agent: v.worth.per_agent,
            margin: v.margin,
            stable: v.stable,
            extreme: match i {
                0 if last == 0 => "min,max",
                0 => "min",
                i if i == last => "max",
                _ => "",
            },
        })
        .collect();
    let header = ["rank", "partition", "v_s", "per_agent", "margin", "stable", "extreme"];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.rank.to_string(),
                fmt_parts(&r.partition),
                fmt_num(r.v_s),
                fmt_num(r.per_agent),
                fmt_num(r.margin),
                r.stable.to_string(),
                r.extreme.to_string(),
            ]
        })
        .collect();
    render(format, &header, &table, || to_json(&rows))
}

fn figure_frontier(
    params: &MarketParams,
    s: usize,
    threads: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    let limits = ScanLimits {
        threads,
        ..ScanLimits::default()
    };
    let rows = frontier(params, s, &limits)?;
    let zeta = if params.gamma() > 0.0 {
        Some(threshold_zeta(params.n(), s, params.gamma())?)
    } else {
        None
    };

    #[derive(Serialize)]
    struct Out<'a> {
        n: usize,
        s: usize,
        gamma: f64,
        zeta: Option<f64>,
        rows: &'a [FrontierRow],
    }

    let header = [
        "j",
        "partitions",
        "unstable",
        "all_stable",
        "worst_partition",
        "worst_margin",
        "balanced_stable",
        "balanced_margin",
        "zeta",
        "above_zeta",
    ];
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.j.to_string(),
                r.partitions.to_string(),
                r.unstable.to_string(),
                r.all_stable.to_string(),
                fmt_parts(&r.worst_partition),
                fmt_num(r.worst_margin),
                r.balanced_stable.to_string(),
                fmt_num(r.balanced_margin),
                zeta.as_ref().map(|z| fmt_num(z.zeta)).unwrap_or_default(),
                zeta.as_ref()
                    .map(|z| (r.j as f64 > z.zeta).to_string())
                    .unwrap_or_default(),
            ]
        })
        .collect();
    render(format, &header, &table, || {
        to_json(&Out {
            n: params.n(),
            s,
            gamma: params.gamma(),
            zeta: zeta.map(|z| z.zeta),
            rows: &rows,
        })
    })
}
