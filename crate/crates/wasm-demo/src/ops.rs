use affine_games::bsde::solve_reflected_bsde;
use affine_games::matrices::{classify, gen_k_matrix};
use affine_games::multi_period::backward_induction;
use affine_games::single_period::{canonical_equilibrium, enumerate_nash, payoff, sol};
use affine_games::{GameSpec, ScenarioTree, SquareMatrix, StrategyProfile};
use serde::Serialize;
use serde_json::json;

/// Largest game the page will enumerate.
pub const MAX_PLAYERS: usize = 6;
/// Largest tree the page will build.
pub const MAX_HORIZON: usize = 6;

#[derive(Debug, Serialize)]
struct ProfileRow {
    s: StrategyProfile,
    #[serde(rename = "V")]
    v: Vec<f64>,
    nash: bool,
}

#[derive(Debug, Serialize)]
struct GameView {
    #[serde(rename = "X")]
    x: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<f64>,
    #[serde(rename = "V_star")]
    v_star: Vec<f64>,
    equilibrium: StrategyProfile,
    profiles: Vec<ProfileRow>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn solve_game(json: &str, tol: f64) -> Result<String, String> {
    let spec: GameSpec = serde_json::from_str(json).map_err(err)?;
    spec.validate().map_err(err)?;
    let m = spec.players();
    if m > MAX_PLAYERS {
        return Err(format!("at most {MAX_PLAYERS} players"));
    }
    let v_star = sol(&spec, tol).map_err(err)?;
    let equilibrium = canonical_equilibrium(&spec, tol).map_err(err)?;
    let nash = enumerate_nash(&spec, tol).map_err(err)?;
    let mut profiles = Vec::with_capacity(1 << m);
    for idx in 0..1u32 << m {
        let s = StrategyProfile {
            s: (0..m).map(|i| ((idx >> (m - 1 - i)) & 1) as u8).collect(),
        };
        let v = payoff(&spec, &s, tol).map_err(err)?.v;
        profiles.push(ProfileRow { nash: nash.contains(&s), s, v });
    }
    let view = GameView {
        x: spec.x,
        p: spec.p,
        v_star,
        equilibrium,
        profiles,
    };
    serde_json::to_string(&view).map_err(err)
}

pub fn classify_matrix(json: &str, tol: f64) -> Result<String, String> {
    let m: SquareMatrix = serde_json::from_str(json).map_err(err)?;
    let c = classify(&m, tol).map_err(err)?;
    let label = match (c.is_k, c.is_k0prime, c.is_p, c.is_p0prime) {
        (true, ..) => "K",
        (_, true, ..) => "K0'",
        (_, _, true, _) => "P",
        (.., true) => "P0'",
        _ => "none",
    };
    let out = json!({ "class": label, "rows": m.rows(), "details": c });
    serde_json::to_string(&out).map_err(err)
}

pub fn solve_random_tree(seed: u64, players: usize, horizon: usize, tol: f64) -> Result<String, String> {
    if players == 0 || players > 3 || horizon > MAX_HORIZON {
        return Err(format!("need 1 to 3 players and a horizon of at most {MAX_HORIZON}"));
    }
    let tree = ScenarioTree::random(seed, players, horizon, 2, Some(gen_k_matrix(seed, players, false)));
    let vp = backward_induction(&tree, tol).map_err(err)?;
    let z = solve_reflected_bsde(&tree, tol).map_err(err)?.z;
    let gap = (0..tree.len())
        .flat_map(|n| vp.u.at(n).iter().zip(z.at(n)).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let nodes: Vec<_> = (0..tree.len())
        .map(|n| {
            let node = tree.node(n);
            json!({
                "id": node.id,
                "t": node.t,
                "parent": node.parent,
                "X": node.x,
                "U": vp.u.at(n),
                "stops": vp.tau_star.stops.iter().map(|s| s[n] && !tree.is_leaf(n)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let out = json!({
        "G": tree.default_matrix(),
        "root_value": vp.u.at(tree.root()),
        "max_bsde_gap": gap,
        "nodes": nodes,
    });
    serde_json::to_string(&out).map_err(err)
}
