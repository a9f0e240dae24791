use std::collections::BTreeMap;

use affine_games::bsde::{solve_reflected_bsde, verify_bsde_solution};
use affine_games::lcp::{solvability_p0prime, solve_enum_capped, LcpProblem, P0Solvability};
use affine_games::matrices::{classify_capped, gen_k_matrix, gen_p_matrix, CLASSIFY_CAP};
use affine_games::multi_period::{
    backward_induction, evaluate_profile, nash_search, verify_optimal_equilibrium, StoppingGame,
    ValueProcess, ENUMERATION_BUDGET,
};
use affine_games::redistribution::{grg_payoff, RedistributionSpec};
use affine_games::single_period::{
    canonical_equilibrium, coalition_value, dummy_extension, equilibrium_report, sol, wuc_check,
};
use affine_games::{GameSpec, ScenarioTree, SquareMatrix, StrategyProfile};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::input::{coalition, parse};
use crate::{CliError, Command, GenKind, Options};

/// Runs one subcommand and returns the `(input echo, result)` pair.
pub fn run(cmd: &Command, doc: Option<Value>, opts: &Options) -> Result<(Value, Value), CliError> {
    let doc = || doc.clone().ok_or_else(|| CliError::Malformed("--input is required".into()));
    let tol = opts.tolerance;
    match cmd {
        Command::Classify => {
            let m: SquareMatrix = parse(&doc()?, "matrix")?;
            let c = classify_capped(&m, tol, opts.cap.unwrap_or(CLASSIFY_CAP))?;
            let result = json!({
                "is_Z": c.is_z,
                "is_P": c.is_p,
                "is_P0prime": c.is_p0prime,
                "is_K": c.is_k,
                "is_K0prime": c.is_k0prime,
                "has_positive_diagonal": c.has_positive_diagonal,
                "has_nonzero_proper_minors": c.has_nonzero_proper_minors,
                "column_sums_nonneg": c.column_sums_nonneg,
                "det": c.det,
                "singular": c.singular,
            });
            Ok((to_value(&m), result))
        }
        Command::Solve => {
            let d = doc()?;
            if d.get("q").is_some() {
                let p: LcpProblem = parse(&d, "LCP")?;
                Ok((to_value(&p), solve_lcp(&p, opts)?))
            } else {
                let spec = game(&d)?;
                let v = sol(&spec, tol)?;
                let s = canonical_equilibrium(&spec, tol)?;
                Ok((to_value(&spec), json!({ "V_star": v, "equilibrium": s })))
            }
        }
        Command::Equilibria => {
            let spec = game(&doc()?)?;
            Ok((to_value(&spec), to_value(&equilibrium_report(&spec, tol)?)))
        }
        Command::Wuc => {
            let spec = game(&doc()?)?;
            Ok((to_value(&spec), json!({ "wuc": wuc_check(&spec, tol)? })))
        }
        Command::Coalition => {
            let spec = game(&doc()?)?;
            let m = spec.players();
            let groups: Vec<Vec<usize>> = match &opts.coalition {
                Some(list) => vec![coalition(list)?],
                None => (1..1u32 << m)
                    .map(|b| (0..m).filter(|i| b & (1 << i) != 0).collect())
                    .collect(),
            };
            let sol_v = sol(&spec, tol).ok();
            let mut rows = Vec::with_capacity(groups.len());
            for a in groups {
                let value = coalition_value(&spec, &a, tol)?;
                let sum = sol_v.as_ref().map(|v| a.iter().map(|&i| v[i]).sum::<f64>());
                rows.push(json!({ "members": a, "value": value, "sum_of_sol": sum }));
            }
            Ok((to_value(&spec), json!({ "coalitions": rows })))
        }
        Command::Dummy => {
            let spec = game(&doc()?)?;
            Ok((to_value(&spec), to_value(&dummy_extension(&spec, tol)?)))
        }
        Command::Grg => {
            let g: GrgInput = parse(&doc()?, "redistribution game")?;
            let r = RedistributionSpec::new(g.alpha.clone())?;
            let m = g.alpha.len();
            let mut profiles = Vec::with_capacity(1 << m);
            for idx in 0..1u32 << m {
                let s = StrategyProfile::new((0..m).map(|i| ((idx >> (m - 1 - i)) & 1) as u8).collect())?;
                let v = grg_payoff(&g.x, &g.p, &g.alpha, &s)?;
                profiles.push(json!({ "s": s, "V": v }));
            }
            let spec = GameSpec::new(g.x.clone(), g.p.clone(), r.dhat())?;
            let result = json!({
                "D_hat": r.dhat(),
                "det": r.det_closed_form(),
                "profiles": profiles,
                "V_star": sol(&spec, tol)?,
            });
            Ok((to_value(&g), result))
        }
        Command::TreeSolve => {
            let tree = scenario_tree(&doc()?)?;
            let vp = backward_induction(&tree, tol)?;
            Ok((to_value(&tree), value_process_json(&tree, &vp)))
        }
        Command::TreeVerify => {
            let tree = scenario_tree(&doc()?)?;
            let vp = backward_induction(&tree, tol)?;
            let root = tree.root();
            let at_root = evaluate_profile(&tree, &vp, &vp.tau_star, root, tol)?;
            let budget = opts.cap.map_or(ENUMERATION_BUDGET, |c| c as u128);
            let optimal = verify_optimal_equilibrium(&tree, &vp, &vp.tau_star, tol, budget)?;
            let result = json!({
                "root_value": vp.u.at(root),
                "tau_star_payoff": at_root,
                "optimal_equilibrium": optimal,
            });
            Ok((to_value(&tree), result))
        }
        Command::NaiveCounterexample => {
            let d = match doc() {
                Ok(d) => d,
                Err(_) => crate::input::load(Some("paper-counterexample"))?,
            };
            let tree = scenario_tree(&d)?;
            let game = StoppingGame::naive(&tree, tol)?;
            let budget = opts.cap.map_or(ENUMERATION_BUDGET, |c| c as u128);
            let report = nash_search(&game, budget)?;
            let result = json!({
                "nash_payoff_count": report.nash_payoffs.len(),
                "optimal_equilibrium_exists": report.optimal_count > 0,
                "profiles_searched": report.profiles_searched,
                "nash_profile_count": report.nash_count,
                "nash_payoffs": report.nash_payoffs,
            });
            Ok((to_value(&tree), result))
        }
        Command::Bsde => {
            let tree = scenario_tree(&doc()?)?;
            let s = solve_reflected_bsde(&tree, tol)?;
            let violations = verify_bsde_solution(&tree, &s, tol);
            let result = json!({
                "Z": s.z.to_map(&tree),
                "K": s.k.to_map(&tree),
                "J": s.j.to_map(&tree),
                "violations": violations,
            });
            Ok((to_value(&tree), result))
        }
        Command::Gen { kind, players, horizon, branching } => {
            let seed = opts.seed;
            let m = *players;
            if m == 0 {
                return Err(CliError::Malformed("--players must be positive".into()));
            }
            let instance = match kind {
                GenKind::KMatrix => to_value(&gen_k_matrix(seed, m, false)),
                GenKind::PMatrix => to_value(&gen_p_matrix(seed, m)),
                GenKind::KGame => to_value(&GameSpec::random_payoffs(seed, gen_k_matrix(seed, m, false))?),
                GenKind::PGame => to_value(&GameSpec::random_payoffs(seed, gen_p_matrix(seed, m))?),
                GenKind::Tree => to_value(&ScenarioTree::random(
                    seed,
                    m,
                    *horizon,
                    *branching,
                    Some(gen_k_matrix(seed, m, false)),
                )),
            };
            Ok((json!({ "kind": kind, "players": m, "horizon": horizon, "branching": branching, "seed": seed }), instance))
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrgInput {
    #[serde(rename = "X")]
    x: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<f64>,
    alpha: Vec<f64>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn game(doc: &Value) -> Result<GameSpec, CliError> {
    let spec: GameSpec = parse(doc, "game")?;
    spec.validate()?;
    Ok(spec)
}

fn scenario_tree(doc: &Value) -> Result<ScenarioTree, CliError> {
    let tree: ScenarioTree = parse(doc, "scenario tree")?;
    let problems = tree.validate();
    if problems.is_empty() {
        Ok(tree)
    } else {
        let list: Vec<String> = problems.iter().map(ToString::to_string).collect();
        Err(CliError::Malformed(format!("invalid tree: {}", list.join("; "))))
    }
}

fn solve_lcp(p: &LcpProblem, opts: &Options) -> Result<Value, CliError> {
    let tol = opts.tolerance;
    let cap = opts.cap.unwrap_or(CLASSIFY_CAP);
    let class = classify_capped(&p.m, tol, cap)?;
    let found = if class.is_p0prime {
        match solvability_p0prime(p, tol) {
            Ok(P0Solvability::Solvable(s)) => Some(s),
            Ok(P0Solvability::Unsolvable(cert)) => {
                return Ok(json!({
                    "z": null,
                    "w": null,
                    "support": null,
                    "status": "unsolvable_certificate",
                    "certificate": cert.v,
                }));
            }
            Err(affine_games::Error::NoSolution) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        solve_enum_capped(p, tol, cap)?
    };
    Ok(match found {
        Some(s) => json!({ "z": s.z, "w": s.w, "support": s.support, "status": "solved" }),
        None => json!({ "z": null, "w": null, "support": null, "status": "no_solution" }),
    })
}

fn value_process_json(tree: &ScenarioTree, vp: &ValueProcess) -> Value {
    let tau: BTreeMap<String, Vec<u64>> = vp
        .tau_star
        .stop_ids(tree)
        .into_iter()
        .enumerate()
        .map(|(i, ids)| (i.to_string(), ids))
        .collect();
    json!({
        "U": vp.u.to_map(tree),
        "tau_star": tau,
        "root_value": vp.u.at(tree.root()),
    })
}
