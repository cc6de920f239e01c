//! Construction formulas recorded verbatim in every derived certificate.

pub const REMARK_N: &str = "N_is(t) = N(t)";
pub const GRID_DECAY: &str = "f(u) = min ||Phi(u+t0,t0,x)v|| / ||v||";

pub const INTEGRAL_DECAY_K: &str = "K = int_0^1 f(tau) dtau";
pub const INTEGRAL_DECAY_N: &str = "N(t) = 1/f(1) + M(t)/K";

pub const SHIFT_ALPHA: &str = "alpha = nu/2";
pub const SHIFT_M: &str = "M(t) = N(t)/alpha";
pub const SHIFT_K: &str = "K = int_0^1 exp(-alpha*u) f(u) du";
pub const SHIFT_N: &str = "N(t) = max(M(t)/K, 1 + headroom), nu = alpha";

pub const THM1_M: &str = "M(t) = max(1, N(t)/nu)";
pub const THM1_M_TILDE: &str = "M_tilde(t) = M(t)/f(t)";

pub const THM2_LAMBDA: &str = "lambda = min{k integer >= 2 : f(k) < 1}";
pub const THM2_K1: &str = "K1 = int_0^1 f(tau) dtau";
pub const THM2_N: &str = "N(t) = 1/f(lambda) + M_tilde(t)";

/// Every formula, keyed by its constant name.
pub const TABLE: &[(&str, &str)] = &[
    ("REMARK_N", REMARK_N),
    ("GRID_DECAY", GRID_DECAY),
    ("INTEGRAL_DECAY_K", INTEGRAL_DECAY_K),
    ("INTEGRAL_DECAY_N", INTEGRAL_DECAY_N),
    ("SHIFT_ALPHA", SHIFT_ALPHA),
    ("SHIFT_M", SHIFT_M),
    ("SHIFT_K", SHIFT_K),
    ("SHIFT_N", SHIFT_N),
    ("THM1_M", THM1_M),
    ("THM1_M_TILDE", THM1_M_TILDE),
    ("THM2_LAMBDA", THM2_LAMBDA),
    ("THM2_K1", THM2_K1),
    ("THM2_N", THM2_N),
];
