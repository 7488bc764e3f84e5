use isoprofile::action_profile::{profile_action_exact_with, profile_action_tiling, SearchMode, SearchOptions};
use isoprofile::bounds::{
    check_generating_set_comparison, check_lower_bound, check_tiling_upper_bound, positivity_check,
    BoundCheck,
};
use isoprofile::isoperimetry::profile_exact_with_budget;
use isoprofile::rokhlin::{build_towers, verify_tower_family};
use isoprofile::tilings::verify_multitile_window;
use isoprofile::{Exponent, Rational, Verdict};
use serde_json::{json, Value};

use crate::failure::{Failure, Outcome, EXIT_BUDGET, EXIT_CHECK_FAILED, EXIT_OK};
use crate::inputs;
use crate::output::{decimal, fraction, render_json, Table};
use crate::Budgets;

/// Rendered output plus the exit code it implies.
pub struct Artifact {
    pub body: String,
    pub code: u8,
    /// Printed on stderr.
    pub message: Option<String>,
}

impl Artifact {
    fn ok(body: String) -> Self {
        Artifact {
            body,
            code: EXIT_OK,
            message: None,
        }
    }

    fn with(body: String, code: u8, message: impl Into<String>) -> Self {
        Artifact {
            body,
            code,
            message: (code != EXIT_OK).then(|| message.into()),
        }
    }
}

pub fn profile_group(group_arg: &str, n_max: usize, dec: bool, b: &Budgets) -> Outcome<Artifact> {
    let gv = inputs::read_json("--group", group_arg)?;
    let group = inputs::group("--group", &gv)?;
    let config = json!({
        "command": "profile-group", "group": gv, "n_max": n_max,
        "decimal": dec, "set_budget": b.set_budget,
    });
    let run = profile_exact_with_budget::<Rational>(&group, n_max, b.set_budget);
    let mut t = Table::new(&["n", "numerator", "denominator", "witness"]);
    if dec {
        t.header.push("decimal");
    }
    for p in &run.points {
        let mut row = vec![
            p.n.to_string(),
            p.value.numer().to_string(),
            p.value.denom().to_string(),
            p.witness.encode(),
        ];
        if dec {
            row.push(decimal(&p.value));
        }
        t.rows.push(row);
    }
    if run.complete {
        return Ok(Artifact::ok(t.render(&config)));
    }
    let reached = run.points.len();
    t.note("status", "partial");
    t.note("completed_n", reached.to_string());
    Ok(Artifact::with(
        t.render(&config),
        EXIT_BUDGET,
        format!("set budget {} ran out after n = {reached}", b.set_budget),
    ))
}

pub struct ActionArgs<'a> {
    pub graphing: &'a str,
    pub n: usize,
    pub tiling: Option<&'a str>,
    pub epsilon: Option<&'a str>,
    pub mode: Option<SearchMode>,
    pub decimal: bool,
}

pub fn profile_action(a: &ActionArgs, b: &Budgets) -> Outcome<Artifact> {
    let gv = inputs::read_json("--graphing", a.graphing)?;
    let g = inputs::graphing("--graphing", &gv, b.max_vertices)?;
    let mut t = Table::new(&["n", "numerator", "denominator", "method", "witness-partition"]);
    if a.decimal {
        t.header.push("decimal");
    }
    let row = |value: &Rational, method: &str, witness: String| {
        let mut r = vec![
            a.n.to_string(),
            value.numer().to_string(),
            value.denom().to_string(),
            method.to_string(),
            witness,
        ];
        if a.decimal {
            r.push(decimal(value));
        }
        r
    };
    if let Some(tile_arg) = a.tiling {
        let tv = inputs::read_json("--tiling", tile_arg)?;
        let mt = inputs::tile("--tiling", g.group(), &tv)?;
        let eps_text = a
            .epsilon
            .ok_or_else(|| Failure::Usage("--tiling needs --epsilon".into()))?;
        let eps = inputs::rational("--epsilon", eps_text)?;
        if mt.max_shape_size() > a.n {
            return Err(Failure::Usage(format!(
                "a tile shape has {} elements, above --n {}",
                mt.max_shape_size(),
                a.n
            )));
        }
        let config = json!({
            "command": "profile-action", "graphing": gv, "n": a.n, "tiling": tv,
            "epsilon": fraction(&eps), "decimal": a.decimal,
        });
        let tp = profile_action_tiling(&g, &mt, eps)?;
        t.rows.push(row(&tp.value, "tiling", tp.partition.encode()));
        t.note("coverage", fraction(&tp.towers.coverage));
        t.note("guaranteed", fraction(&tp.guaranteed));
        let code = if tp.within_guarantee() { EXIT_OK } else { EXIT_CHECK_FAILED };
        return Ok(Artifact::with(
            t.render(&config),
            code,
            "tower partition exceeds the tile-ratio guarantee",
        ));
    }
    if a.epsilon.is_some() {
        return Err(Failure::Usage("--epsilon only applies with --tiling".into()));
    }
    let config = json!({
        "command": "profile-action", "graphing": gv, "n": a.n,
        "mode": a.mode.map(|m| format!("{m:?}")), "decimal": a.decimal,
        "node_budget": b.node_budget, "cell_budget": b.cell_budget,
    });
    let opts = SearchOptions {
        mode: a.mode,
        node_budget: b.node_budget,
        cell_budget: b.cell_budget,
    };
    let r = profile_action_exact_with(&g, a.n, opts)?;
    if r.optimal {
        t.rows.push(row(&r.value, "exact", r.partition.encode()));
        return Ok(Artifact::ok(t.render(&config)));
    }
    t.rows.push(row(&r.value, "incumbent", r.partition.encode()));
    t.note("status", "partial");
    t.note("lower_bound", fraction(&r.lower_bound));
    Ok(Artifact::with(
        t.render(&config),
        EXIT_BUDGET,
        format!(
            "node budget {} ran out; optimum lies in [{}, {}]",
            b.node_budget,
            fraction(&r.lower_bound),
            fraction(&r.value)
        ),
    ))
}

pub fn verify_tile(group_arg: &str, tile_arg: &str, window: u32, b: &Budgets) -> Outcome<Artifact> {
    let gv = inputs::read_json("--group", group_arg)?;
    let group = inputs::group("--group", &gv)?;
    let tv = inputs::read_json("--tile", tile_arg)?;
    let mt = inputs::tile("--tile", &group, &tv)?;
    if window > b.max_radius {
        return Err(Failure::Budget(format!(
            "window {window} exceeds the radius limit {}",
            b.max_radius
        )));
    }
    let config = json!({ "command": "verify-tile", "group": gv, "tile": tv, "window": window });
    let r = verify_multitile_window(&mt, window)?;
    let translate = |t: &isoprofile::tilings::TranslateRef| {
        json!({ "shape": t.shape, "center": group.element_to_json(&t.center) })
    };
    let report = json!({
        "pass": r.pass(),
        "disjoint": r.disjoint,
        "covered": r.covered,
        "radius": r.radius,
        "margin": r.margin,
        "window_size": r.window_size,
        "coverage_region_size": r.coverage_region_size,
        "total_coverage": r.total_coverage,
        "translates_used": r.translates_used,
        "collision": r.collision.as_ref().map(|c| json!({
            "point": group.element_to_json(&c.point),
            "first": translate(&c.first),
            "second": translate(&c.second),
        })),
        "uncovered": r.uncovered.as_ref().map(|u| group.element_to_json(u)),
    });
    let code = if r.pass() { EXIT_OK } else { EXIT_CHECK_FAILED };
    let why = if r.disjoint { "translates leave a gap" } else { "translates overlap" };
    Ok(Artifact::with(render_json(report, &config), code, why))
}

pub fn build_graphing(spec: Value, b: &Budgets) -> Outcome<Artifact> {
    let g = inputs::graphing("build-graphing", &spec, b.max_vertices)?;
    let config = json!({ "command": "build-graphing", "spec": spec });
    Ok(Artifact::ok(render_json(g.to_json(), &config)))
}

pub fn build_rokhlin(graphing_arg: &str, tile_arg: &str, eps_text: &str, b: &Budgets) -> Outcome<Artifact> {
    let gv = inputs::read_json("--graphing", graphing_arg)?;
    let g = inputs::graphing("--graphing", &gv, b.max_vertices)?;
    let tv = inputs::read_json("--tile", tile_arg)?;
    let mt = inputs::tile("--tile", g.group(), &tv)?;
    let eps = inputs::rational("--epsilon", eps_text)?;
    let config = json!({
        "command": "build-rokhlin", "graphing": gv, "tile": tv, "epsilon": fraction(&eps),
    });
    let tf = build_towers(&g, &mt, eps)?;
    let r = verify_tower_family(&g, &mt, &tf)?;
    let mut out = tf.to_json();
    out["verified"] = json!({
        "pass": r.pass(),
        "disjoint": r.disjoint,
        "coverage_matches": r.coverage_matches,
        "meets_target": r.meets_target,
    });
    let code = if r.pass() { EXIT_OK } else { EXIT_CHECK_FAILED };
    let why = format!("towers cover {}, target 1 - {}", fraction(&tf.coverage), fraction(&tf.epsilon_target));
    Ok(Artifact::with(render_json(out, &config), code, why))
}

/// Names accepted by `check-bounds --suite`.
pub const SUITES: [&str; 4] = ["lower-bound", "tiling-upper-bound", "generating-set", "positivity"];

pub fn check_bounds(suite: &str, params_arg: &str, dec: bool, b: &Budgets) -> Outcome<Artifact> {
    let pv = inputs::read_json("--params", params_arg)?;
    let what = "--params";
    let g = inputs::graphing(&format!("{what}.graphing"), inputs::required(what, &pv, "graphing")?, b.max_vertices)?;
    let ns = |default: Option<usize>| match (pv.get("n"), default) {
        (Some(v), _) => inputs::n_list(what, v),
        (None, Some(n)) => Ok(vec![n]),
        (None, None) => Err(Failure::Usage(format!("{what}: missing \"n\""))),
    };
    let mut checks: Vec<BoundCheck<Rational>> = Vec::new();
    match suite {
        "lower-bound" => {
            let group = match pv.get("group") {
                Some(v) => inputs::group(&format!("{what}.group"), v)?,
                None => g.group().clone(),
            };
            let ns = match pv.get("n") {
                Some(v) => inputs::n_list(what, v)?,
                None => (1..=g.free_window()).collect(),
            };
            for n in ns {
                checks.push(check_lower_bound(&g, &group, n)?);
            }
        }
        "tiling-upper-bound" => {
            let mt = inputs::tile(&format!("{what}.tile"), g.group(), inputs::required(what, &pv, "tile")?)?;
            let eps = inputs::rational_field(what, &pv, "epsilon")?;
            for n in ns(Some(mt.max_shape_size()))? {
                checks.push(check_tiling_upper_bound(&g, &mt, n, eps.clone())?);
            }
        }
        "generating-set" => {
            let g2 = inputs::graphing(
                &format!("{what}.graphing2"),
                inputs::required(what, &pv, "graphing2")?,
                b.max_vertices,
            )?;
            let p = match pv.get("p") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) if s == "inf" => None,
                Some(v) => {
                    let text = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                    Some(text.parse::<Exponent>().map_err(|e| Failure::Usage(format!("{what}.p: {e}")))?)
                }
            };
            for n in ns(None)? {
                checks.push(check_generating_set_comparison(&g, &g2, n, p)?);
            }
        }
        "positivity" => {
            for n in ns(None)? {
                checks.push(positivity_check(&g, n)?);
            }
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown suite \"{other}\" (expected one of {})",
                SUITES.join(", ")
            )))
        }
    }
    let config = json!({ "command": "check-bounds", "suite": suite, "params": pv, "decimal": dec });
    let mut t = Table::new(&["check", "n", "lhs", "relation", "rhs_lo", "rhs_hi", "verdict", "context"]);
    if dec {
        t.header.push("lhs_decimal");
    }
    let mut failed = Vec::new();
    for c in &checks {
        let n = c.context.get("n").cloned().unwrap_or_default();
        let context: Vec<String> = c
            .context
            .iter()
            .filter(|(k, _)| k.as_str() != "n")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let mut row = vec![
            c.name.clone(),
            n.clone(),
            fraction(&c.lhs),
            c.relation.to_string(),
            fraction(&c.rhs.lo),
            fraction(&c.rhs.hi),
            c.verdict.to_string(),
            context.join(" "),
        ];
        if dec {
            row.push(decimal(&c.lhs));
        }
        t.rows.push(row);
        if matches!(c.verdict, Verdict::Violated | Verdict::Undecided) {
            failed.push(format!("n={n} {}", c.verdict));
        }
    }
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Artifact::with(t.render(&config), code, failed.join(", ")))
}
