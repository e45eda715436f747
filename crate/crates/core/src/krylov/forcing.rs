/// Eisenstat–Walker forcing term (second choice, `γ = 0.9`, `α = 2`) with the
/// usual previous-term safeguard and a floor tied to the final tolerance, so the
/// last linear solves are not oversolved.
pub fn eta_newton(
    norm_f: f64,
    norm_f_prev: f64,
    eta_prev: f64,
    eta_max: f64,
    sigma: f64,
    norm_f0: f64,
) -> f64 {
    const GAMMA: f64 = 0.9;
    let ratio = norm_f / norm_f_prev;
    let mut eta = eta_max.min(GAMMA * ratio * ratio);
    let carried = GAMMA * eta_prev * eta_prev;
    if carried > 0.1 {
        eta = eta.max(carried);
    }
    eta = eta.max(0.5 * sigma * norm_f0 / norm_f);
    if eta > eta_max {
        eta_max
    } else if eta > 0.0 {
        eta
    } else {
        // keep the result inside (0, eta_max]
        f64::MIN_POSITIVE.max(eta_max * f64::EPSILON)
    }
}
