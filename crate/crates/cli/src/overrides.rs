//! `key=value` overrides for solver and factorization parameters.

use hilung::mlilu::FactorParams;
use hilung::nonlinear::SolverConfig;

/// Parameter names accepted by [`apply_factor`].
pub const FACTOR_KEYS: &[&str] = &[
    "alpha",
    "droptol",
    "cond_thresh",
    "diag_thresh",
    "pivot_floor",
    "min_retained",
    "dense_switch",
    "max_levels",
];

/// Parameter names accepted by [`apply_solver`] besides the factor keys.
pub const SOLVER_KEYS: &[&str] = &[
    "sigma",
    "eta_max",
    "eta_picard",
    "beta",
    "epsilon",
    "regime",
    "alpha_picard",
    "alpha_newton",
    "droptol_picard",
    "droptol_newton",
    "restart",
    "max_gmres",
    "refactor_iters",
    "theta",
    "refine_picard",
    "refine_newton",
    "max_nonlinear",
    "max_halvings",
];

pub fn split(item: &str) -> Result<(&str, &str), String> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("override `{item}` is not of the form key=value"))
}

fn real(key: &str, v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("`{key}` expects a number, got `{v}`"))
}

fn count(key: &str, v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("`{key}` expects a nonnegative integer, got `{v}`"))
}

pub fn apply_factor(p: &mut FactorParams, key: &str, v: &str) -> Result<(), String> {
    match key {
        "alpha" => p.alpha = real(key, v)?,
        "droptol" => p.droptol = real(key, v)?,
        "cond_thresh" => p.cond_thresh = real(key, v)?,
        "diag_thresh" => p.diag_thresh = real(key, v)?,
        "pivot_floor" => p.pivot_floor = real(key, v)?,
        "min_retained" => p.min_retained = count(key, v)?,
        "dense_switch" => p.dense_switch = if v == "auto" { None } else { Some(count(key, v)?) },
        "max_levels" => p.max_levels = count(key, v)?,
        _ => return Err(format!("unknown factorization parameter `{key}` (known: {})", FACTOR_KEYS.join(", "))),
    }
    Ok(())
}

/// Applies one override. `alpha` and `droptol` set both phases.
pub fn apply_solver(c: &mut SolverConfig, key: &str, v: &str) -> Result<(), String> {
    match key {
        "sigma" => c.sigma = real(key, v)?,
        "eta_max" => c.eta_max = real(key, v)?,
        "eta_picard" => c.eta_picard = real(key, v)?,
        "beta" => c.beta = real(key, v)?,
        "epsilon" => c.epsilon = real(key, v)?,
        "regime" => c.regime = v.parse().map_err(|e: hilung::Error| e.to_string())?,
        "alpha_picard" => c.alpha_picard = Some(real(key, v)?),
        "alpha_newton" => c.alpha_newton = Some(real(key, v)?),
        "droptol_picard" => c.droptol_picard = Some(real(key, v)?),
        "droptol_newton" => c.droptol_newton = Some(real(key, v)?),
        "alpha" => {
            let a = real(key, v)?;
            c.alpha_picard = Some(a);
            c.alpha_newton = Some(a);
        }
        "droptol" => {
            let d = real(key, v)?;
            c.droptol_picard = Some(d);
            c.droptol_newton = Some(d);
        }
        "restart" => c.restart = count(key, v)?,
        "max_gmres" => c.max_gmres = count(key, v)?,
        "refactor_iters" => c.refactor_iters = count(key, v)?,
        "theta" => c.theta = real(key, v)?,
        "refine_picard" => c.refine_picard = count(key, v)?,
        "refine_newton" => c.refine_newton = count(key, v)?,
        "max_nonlinear" => c.max_nonlinear = count(key, v)?,
        "max_halvings" => c.max_halvings = count(key, v)?,
        _ if FACTOR_KEYS.contains(&key) => apply_factor(&mut c.factor, key, v)?,
        _ => {
            return Err(format!(
                "unknown parameter `{key}` (known: {}, {})",
                SOLVER_KEYS.join(", "),
                FACTOR_KEYS.join(", ")
            ))
        }
    }
    Ok(())
}
