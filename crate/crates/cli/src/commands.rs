use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use regionscore::config::default_generator;
use regionscore::evaluation::hedging::hedging_study;
use regionscore::evaluation::score_table;
use regionscore::numeric::{fmt_num, mean};
use regionscore::{
    crps_decomposed, generate_synthetic, murphy_curve, simulate_hedging, CompareOptions,
    EmpiricalCDF, Error, ForecastCase, HedgingOption, MixingMeasure, Result,
};
use serde_json::json;

use crate::output::{csv, json, Sink};
use crate::settings::Settings;
use crate::{
    CompareArgs, CrpsArgs, Format, HedgeArgs, MurphyArgs, ScoreArgs, SynthArgs, ValidateArgs,
};

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

/// Systems from `--inputs` (one file each) or a paired `--input` file.
fn systems(
    inputs: &Option<Vec<PathBuf>>,
    input: &Option<PathBuf>,
) -> Result<Vec<(String, Vec<ForecastCase>)>> {
    match (inputs, input) {
        (Some(files), _) => {
            let mut out = Vec::new();
            for f in files {
                let mut name = stem(f);
                if out.iter().any(|(n, _): &(String, _)| *n == name) {
                    name = format!("{name}_{}", out.len() + 1);
                }
                out.push((name, regionscore::io::read_cases(f)?));
            }
            Ok(out)
        }
        (None, Some(f)) => {
            let (a, b) = regionscore::io::read_paired(f)?;
            Ok(vec![("A".into(), a), ("B".into(), b)])
        }
        (None, None) => Err(Error::Validation("give --inputs or --input".into())),
    }
}

pub fn score(args: &ScoreArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let spec = s.scoring(&args.scoring)?;
    let p = s.partition()?;
    let cases = regionscore::io::read_cases(&args.input)?;
    let table = score_table(&cases, &spec, &p)?;
    let summary = table.summary();
    let sink = Sink::new(args.common.out.clone())?;
    match args.common.format {
        Format::Csv => sink.primary("scores.csv", &csv(&table.header(), &table.rows())?)?,
        Format::Json => {
            let rows: Vec<_> = table
                .cases
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "case_id": c.case_id,
                        "forecast": c.forecast,
                        "obs": c.observation,
                        "total": table.totals[i],
                        "components": table.components.iter().map(|col| col[i]).collect::<Vec<_>>(),
                    })
                })
                .collect();
            sink.primary("scores.json", &json(&rows))?
        }
    }
    let meta = json!({
        "scoring": spec.to_string(),
        "partition": p,
        "summary": summary,
    });
    sink.extra("summary.json", &json(&meta))?;

    let mut text = String::new();
    let _ = writeln!(text, "scoring:  {spec}");
    let _ = writeln!(text, "cases:    {}", summary.n_cases);
    let _ = writeln!(text, "mean total score: {:.2}", summary.mean_total);
    for (j, m) in summary.mean_components.iter().enumerate() {
        let _ = writeln!(text, "  component {}: {m:.2}", j + 1);
    }
    sink.summary(&text);
    Ok(0)
}

pub fn compare(args: &CompareArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let spec = s.scoring(&args.scoring)?;
    let p = s.partition()?;
    let sys = systems(&args.inputs, &args.input)?;
    let [(na, a), (nb, b)] = <[_; 2]>::try_from(sys)
        .map_err(|_| Error::Validation("compare needs exactly two systems".into()))?;
    let opts = CompareOptions {
        ci: s.ci(args.ci)?,
        combiner: args.combiner,
        names: [na, nb],
    };
    let report = regionscore::compare(&a, &b, &spec, &p, &opts)?;
    let sink = Sink::new(args.common.out.clone())?;
    match args.common.format {
        Format::Csv => {
            let header: Vec<String> = [
                "label".to_string(),
                format!("mean_{}", report.systems[0]),
                format!("mean_{}", report.systems[1]),
                "difference".into(),
                "ci_lower".into(),
                "ci_upper".into(),
            ]
            .to_vec();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.label.clone(),
                        fmt_num(r.mean_a),
                        fmt_num(r.mean_b),
                        fmt_num(r.difference),
                        fmt_num(r.ci_lower),
                        fmt_num(r.ci_upper),
                    ]
                })
                .collect();
            sink.primary("comparison.csv", &csv(&header, &rows)?)?;
            sink.extra("report.json", &json(&report))?;
        }
        Format::Json => sink.primary("report.json", &json(&report))?,
    }
    sink.summary(&report.render_text());
    Ok(0)
}

pub fn murphy(args: &MurphyArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let spec = s.scoring(&args.scoring)?;
    let grid = s.grid(args.grid.as_deref())?;
    let sys = systems(&args.inputs, &args.input)?;
    let weight = match args.component {
        None => None,
        Some(j) => {
            let p = s.partition()?;
            if j == 0 || j > p.len() {
                return Err(Error::Validation(format!(
                    "--component must be between 1 and {}",
                    p.len()
                )));
            }
            Some(p.weights[j - 1].clone())
        }
    };
    let curve = murphy_curve(&sys, spec.functional(), &grid)?.with_weight(weight.clone());
    let sink = Sink::new(args.common.out.clone())?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    let csv_text = String::from_utf8(buf).expect("utf-8 csv");
    match args.common.format {
        Format::Csv => {
            sink.primary("murphy.csv", &csv_text)?;
            sink.extra("murphy.json", &json(&curve.sidecar()))?;
        }
        Format::Json => {
            let mut meta = curve.sidecar();
            meta["thresholds"] = json!(curve.thresholds);
            meta["mean_scores"] = json!(curve.mean_scores);
            sink.primary("murphy.json", &json(&meta))?;
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "functional: {}", spec.functional());
    let _ = writeln!(text, "thresholds: {}", curve.thresholds.len());
    let generator = if spec.generator().has_density() {
        spec.generator().clone()
    } else {
        default_generator(spec.functional())
    };
    let measure = MixingMeasure::new(generator, weight)?;
    let areas = curve.weighted_area(&measure);
    for ((name, cases), area) in sys.iter().zip(areas) {
        let _ = writeln!(
            text,
            "  {name}: {} cases, weighted area {area:.2}",
            cases.len()
        );
    }
    sink.summary(&text);
    Ok(0)
}

pub fn crps(args: &CrpsArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let p = s.partition()?;
    let cases = regionscore::io::read_ensembles(&args.input)?;
    if cases.is_empty() {
        return Err(Error::Validation("no cases".into()));
    }
    let mut header: Vec<String> = ["case_id", "obs", "crps"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=p.len()).map(|j| format!("component_{j}")));
    let mut rows = Vec::with_capacity(cases.len());
    let mut totals = Vec::with_capacity(cases.len());
    let mut comps = vec![Vec::with_capacity(cases.len()); p.len()];
    for c in &cases {
        let f = EmpiricalCDF::from_members(&c.members)?;
        let d = crps_decomposed(&f, c.observation, &p)?;
        let mut row = vec![c.case_id.clone(), fmt_num(c.observation), fmt_num(d.total)];
        row.extend(d.per_component.iter().map(|v| fmt_num(*v)));
        rows.push(row);
        totals.push(d.total);
        for (j, v) in d.per_component.iter().enumerate() {
            comps[j].push(*v);
        }
    }
    let summary = json!({
        "n_cases": cases.len(),
        "mean_crps": mean(&totals),
        "mean_components": comps.iter().map(|c| mean(c)).collect::<Vec<_>>(),
    });
    let sink = Sink::new(args.common.out.clone())?;
    match args.common.format {
        Format::Csv => {
            sink.primary("crps.csv", &csv(&header, &rows)?)?;
            sink.extra("summary.json", &json(&summary))?;
        }
        Format::Json => sink.primary(
            "crps.json",
            &json(&json!({"header": header, "rows": rows, "summary": summary})),
        )?,
    }
    let mut text = format!("cases: {}\nmean CRPS: {:.2}\n", cases.len(), mean(&totals));
    for (j, c) in comps.iter().enumerate() {
        let _ = writeln!(text, "  component {}: {:.2}", j + 1, mean(c));
    }
    sink.summary(&text);
    Ok(0)
}

pub fn synth(args: &SynthArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let mut cfg = s.config.synthetic.clone().unwrap_or_default();
    cfg.seed = s.seed;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    let data = generate_synthetic(&cfg)?;
    let header: Vec<String> = ["case_id", "forecast_A", "forecast_B", "obs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = data
        .a
        .iter()
        .zip(&data.b)
        .map(|(a, b)| {
            vec![
                a.case_id.clone(),
                fmt_num(a.forecast),
                fmt_num(b.forecast),
                fmt_num(a.observation),
            ]
        })
        .collect();
    let sink = Sink::new(args.common.out.clone())?;
    match args.common.format {
        Format::Csv => sink.primary("synthetic.csv", &csv(&header, &rows)?)?,
        Format::Json => sink.primary(
            "synthetic.json",
            &json(&json!({"header": header, "rows": rows})),
        )?,
    }
    sink.extra("synthetic_config.json", &json(&cfg))?;
    let mse = |c: &[ForecastCase]| {
        let e: Vec<f64> = c
            .iter()
            .map(|c| (c.forecast - c.observation).powi(2))
            .collect();
        mean(&e)
    };
    sink.summary(&format!(
        "synthetic cases: {} (seed {})\nMSE A: {:.2}\nMSE B: {:.2}\n",
        cfg.n,
        cfg.seed,
        mse(&data.a),
        mse(&data.b)
    ));
    Ok(0)
}

pub fn hedge(args: &HedgeArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let mut cfg = s.config.hedging.clone().unwrap_or_default();
    cfg.seed = s.seed;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if args.seeds < 1 {
        return Err(Error::Validation("--seeds must be at least 1".into()));
    }
    let options: Vec<HedgingOption> = match args.option {
        Some(k) => vec![HedgingOption::from_number(k)?],
        None => HedgingOption::ALL.to_vec(),
    };
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| cfg.seed + i).collect();
    let mut results = Vec::new();
    let mut text = format!(
        "hedging: n = {}, threshold = {}, seeds {}..={}\n",
        cfg.n,
        fmt_num(cfg.threshold),
        seeds[0],
        seeds[seeds.len() - 1]
    );
    let _ = writeln!(
        text,
        "{:<8}{:<12}{:>10}{:>14}{:>14}{:>24}",
        "option", "strategy", "assessed", "honest", "strategic", "gain"
    );
    for o in options {
        let first = simulate_hedging(o, &cfg)?;
        let study = hedging_study(o, &cfg, &seeds)?;
        for (k, st) in first.strategic.iter().enumerate() {
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            let gain = match (study.get(k), args.seeds > 1) {
                (Some(g), true) => {
                    format!("{:.4} ± {:.4}", g.mean_difference, 2.0 * g.standard_error)
                }
                (Some(g), false) => format!("{:.4}", g.mean_difference),
                (None, _) => "-".into(),
            };
            let _ = writeln!(
                text,
                "{:<8}{:<12}{:>10}{:>14}{:>14}{:>24}",
                o.number(),
                st.strategy,
                st.assessed,
                opt(first.honest.mean_b),
                opt(st.mean_b),
                gain
            );
        }
        results.push(json!({"option": o.number(), "first_seed": first, "study": study}));
    }
    let sink = Sink::new(args.common.out.clone())?;
    sink.primary(
        "hedging.json",
        &json(&json!({"config": cfg, "seeds": seeds, "options": results})),
    )?;
    sink.summary(&text);
    Ok(0)
}

pub fn validate_partition(args: &ValidateArgs) -> Result<u8> {
    let s = Settings::load(&args.common)?;
    let p = s.partition_config.build_unchecked()?;
    let report = regionscore::validate_partition(&p, &s.partition_config.probe_grid());
    let sink = Sink::new(args.common.out.clone())?;
    sink.primary(
        "partition_report.json",
        &json(&json!({"partition": p, "report": report})),
    )?;
    sink.summary(&(report.summary() + "\n"));
    Ok(if report.passed { 0 } else { 2 })
}
