//! Published optimization tables: problem definitions and reference values.
//!
//! | name  | problem |
//! |-------|---------|
//! | tab1  | BM, passage, `x = x_R` |
//! | tab2  | BM, passage, `x_R = 1` |
//! | tab3  | drifted BM `η = ∓0.1`, passage, `x = x_R` |
//! | tab4  | drifted BM `η = ∓1`, passage, `x = x_R` |
//! | tab5  | BM, exit from `(0, 1)`, `x_R = 0.3` |
//! | tab6  | BM, exit from `(0, 1)`, `x_R = 0.2` |
//! | tab7  | BM, exit from `(0, 1)`, `x = x_R` |
//! | tab8  | drifted BM `η = 1`, exit from `(0, 1)`, `x_R = 0.2` |
//! | tab9  | OU `μ = σ = 1`, passage, `x = x_R` |
//! | tab10 | OU `μ = 0.1, σ = 1`, passage, `x = x_R` |
//! | tab11 | OU `μ = σ = 1`, passage, `x_R = 1` |
//! | tab12 | OU `μ = σ = 1`, passage, `x_R = 2` |
//! | tab13 | drifted BM `η = ∓0.1`, passage, `x_R = 1` |
//! | tab14 | drifted BM `η = ∓1`, passage, `x_R = 1` |
//! | tab15 | drifted BM `η = -1`, exit from `(0, 1)`, `x_R = 0.2` |
//! | tab16 | OU `μ = 0.05, σ = 1`, passage, `x = x_R` |

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ProblemSpec};
use crate::optimize::{minimize_over_r, OptResult};

const INF: f64 = f64::INFINITY;

/// Printed values; `None` where a column is absent or unusable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub x: f64,
    pub r_m: Option<f64>,
    pub m: Option<f64>,
    pub baseline: Option<f64>,
    /// Entry known to be inconsistent with neighbouring rows.
    pub suspect: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub label: String,
    /// Template; `x` (and `x_R` when `reset_at_start`) are set per row.
    pub spec: ProblemSpec,
    pub reset_at_start: bool,
    pub rows: Vec<Reference>,
}

impl Panel {
    pub fn row_spec(&self, x: f64) -> ProblemSpec {
        let s = self.spec.with_x(x);
        if self.reset_at_start {
            s.with_x_r(x)
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub title: &'static str,
    pub panels: Vec<Panel>,
}

pub const TABLE_NAMES: [&str; 16] = [
    "tab1", "tab2", "tab3", "tab4", "tab5", "tab6", "tab7", "tab8", "tab9", "tab10", "tab11",
    "tab12", "tab13", "tab14", "tab15", "tab16",
];

fn rows(data: &[(f64, f64, f64, f64)]) -> Vec<Reference> {
    data.iter()
        .map(|&(x, r_m, m, baseline)| Reference {
            x,
            r_m: Some(r_m),
            m: Some(m),
            baseline: (!baseline.is_nan()).then_some(baseline),
            suspect: false,
        })
        .collect()
}

fn panel(
    label: &str,
    spec: ProblemSpec,
    reset_at_start: bool,
    data: &[(f64, f64, f64, f64)],
) -> Panel {
    Panel {
        label: label.to_string(),
        spec,
        reset_at_start,
        rows: rows(data),
    }
}

fn mark_suspect(mut p: Panel, xs: &[f64]) -> Panel {
    for row in &mut p.rows {
        if xs.contains(&row.x) {
            row.suspect = true;
        }
    }
    p
}

const NA: f64 = f64::NAN;

#[allow(clippy::approx_constant)]
pub fn table(name: &str) -> Result<Table> {
    let bm = |eta| ModelSpec::bm(eta);
    let fpt = |model, x_r| ProblemSpec::fpt(model, 1.0, x_r);
    let fet = |model, x_r| ProblemSpec::fet(model, 0.5, x_r, 1.0);
    let t = match name {
        "tab1" => Table {
            name: "tab1",
            title: "BM passage, x = x_R",
            panels: vec![panel(
                "eta=0",
                fpt(bm(0.0), 1.0),
                true,
                &[
                    (0.1, 126.980, 0.030, INF),
                    (0.5, 5.079, 0.772, INF),
                    (1.0, 1.269, 3.088, INF),
                    (2.0, 0.317, 12.353, INF),
                    (3.0, 0.141, 27.79, INF),
                    (5.0, 0.050, 77.206, INF),
                    (10.0, 0.012, 308.827, INF),
                ],
            )],
        },
        "tab2" => Table {
            name: "tab2",
            title: "BM passage, x_R = 1",
            panels: vec![mark_suspect(
                panel(
                    "eta=0",
                    fpt(bm(0.0), 1.0),
                    false,
                    &[
                        (0.0001, 0.5000, 0.00054, INF),
                        (0.001, 0.5005, 0.05430, INF),
                        (0.01, 0.5050, 0.05409, INF),
                        (0.1, 0.5529, 0.51671, INF),
                        (0.3, 0.6780, 1.39345, INF),
                        (0.5, 0.8289, 2.07535, INF),
                        (0.9, 1.1812, 2.94998, INF),
                        (1.0, 1.2698, 3.08827, INF),
                        (1.5, 1.6323, 3.48334, INF),
                        (2.0, 1.7323, 3.57000, INF),
                        (2.5, 1.8000, 3.65000, INF),
                        (3.0, 1.9691, 3.68515, INF),
                        (5.0, 1.9990, 3.69436, INF),
                        (7.0, 1.9990, 3.69505, INF),
                    ],
                ),
                &[0.0001, 0.001, 0.01],
            )],
        },
        "tab3" => Table {
            name: "tab3",
            title: "Drifted BM passage, x = x_R, eta = -0.1 and 0.1",
            panels: vec![
                mark_suspect(
                    panel(
                        "eta=-0.1",
                        fpt(bm(-0.1), 1.0),
                        true,
                        &[
                            (0.1, 185.0, 0.030, 1.0),
                            (0.5, 4.859, 0.725, 5.0),
                            (1.0, 1.159, 2.727, 10.0),
                            (2.0, 0.261, 9.659, 20.0),
                            (3.0, 0.103, 19.291, 30.0),
                            (5.0, 0.027, 42.547, 50.0),
                            (10.0, 0.0, 100.0, 100.0),
                        ],
                    ),
                    // Out of line with the x = x_R trend of the other drifts.
                    &[0.1],
                ),
                panel(
                    "eta=0.1",
                    fpt(bm(0.1), 1.0),
                    true,
                    &[
                        (0.1, 128.072, 0.0312, INF),
                        (0.5, 5.296, 0.822, INF),
                        (1.0, 1.377, 3.505, INF),
                        (2.0, 0.370, 15.955, INF),
                        (3.0, 0.176, 40.949, INF),
                        (5.0, 0.071, 149.025, INF),
                        (10.0, 0.022, 1216.25, INF),
                    ],
                ),
            ],
        },
        "tab4" => Table {
            name: "tab4",
            title: "Drifted BM passage, x = x_R, eta = -1 and 1",
            panels: vec![
                mark_suspect(
                    panel(
                        "eta=-1",
                        fpt(bm(-1.0), 1.0),
                        true,
                        &[
                            (0.1, 114.811, 0.027, 0.1),
                            (0.5, 2.744, 0.425, 0.5),
                            (1.0, 1.0008, 0.99, 1.0),
                            (2.0, 0.0, 2.0, 2.0),
                            (3.0, 0.0, 3.0, 3.0),
                            (5.0, 0.0, 5.0, 5.0),
                            (10.0, 0.0, 10.0, 10.0),
                        ],
                    ),
                    // Mean exceeds the baseline for every r > 0 here.
                    &[1.0],
                ),
                panel(
                    "eta=1",
                    fpt(bm(1.0), 1.0),
                    true,
                    &[
                        (0.1, 137.767, 0.0350, INF),
                        (0.5, 7.154, 1.490, INF),
                        (1.0, 2.272, 12.162, INF),
                        (2.0, 0.802, 231.053, INF),
                        (3.0, 0.4620, 2786.840, INF),
                        (5.0, 0.2439, 270967.0, INF),
                        (10.0, 0.1104, 125e10, INF),
                    ],
                ),
            ],
        },
        "tab5" => Table {
            name: "tab5",
            title: "BM exit from (0, 1), x_R = 0.3",
            panels: vec![panel(
                "eta=0",
                fet(bm(0.0), 0.3),
                false,
                &[
                    (0.0, 0.0, 0.0, 0.0),
                    (0.1, 0.0, 0.09, 0.09),
                    (0.2, 0.0, 0.16, 0.16),
                    (0.3, 0.0, 0.21, 0.21),
                    (0.4, 0.0, 0.24, 0.24),
                    (0.5, 0.0, 0.25, 0.25),
                ],
            )],
        },
        "tab6" => Table {
            name: "tab6",
            title: "BM exit from (0, 1), x_R = 0.2",
            panels: vec![panel(
                "eta=0",
                fet(bm(0.0), 0.2),
                false,
                &[
                    (1e-6, 3.4325, 9.8e-8, 0.0),
                    (0.1, 14.948, 0.0804, 0.09),
                    (0.2, 28.444, 0.1221, 0.16),
                    (0.3, 38.548, 0.1384, 0.21),
                    (0.4, 43.583, 0.1438, 0.24),
                    (0.5, 45.009, 0.1451, 0.25),
                ],
            )],
        },
        "tab7" => Table {
            name: "tab7",
            title: "BM exit from (0, 1), x = x_R",
            panels: vec![panel(
                "eta=0",
                fet(bm(0.0), 0.5),
                true,
                &[
                    (0.1, 126.972, 0.0308, 0.09),
                    (0.2, 28.442, 0.1221, 0.16),
                    (0.25, 10.131, 0.1795, 0.1875),
                    (0.27, 2.610, 0.1965, 0.1971),
                    (0.275, 0.580, 0.199, 0.1993),
                    (0.28, 0.0, 0.201, 0.2016),
                    (0.3, 0.0, 0.21, 0.21),
                    (0.4, 0.0, 0.24, 0.24),
                    (0.5, 0.0, 0.25, 0.25),
                ],
            )],
        },
        "tab8" => Table {
            name: "tab8",
            title: "Drifted BM exit from (0, 1), eta = 1, x_R = 0.2",
            panels: vec![panel(
                "eta=1",
                fet(bm(1.0), 0.2),
                false,
                &[
                    (0.0, 0.0, 0.0, 0.0),
                    (0.1, 14.242, 0.107, 0.109),
                    (0.2, 30.681, 0.156, 0.181),
                    (0.3, 39.731, 0.122, 0.221),
                    (0.4, 43.269, 0.1775, 0.231),
                    (0.45, 43.621, 0.1780, 0.236),
                    (0.5, 43.186, 0.1778, 0.231),
                    (0.6, 39.642, 0.1746, 0.208),
                    (0.7, 30.222, 0.1646, 0.1713),
                    (0.8, 0.0, 0.123, 0.123),
                    (0.9, 0.0, 0.065, 0.065),
                    (1.0, 0.0, 0.0, 0.0),
                ],
            )],
        },
        "tab9" => Table {
            name: "tab9",
            title: "OU passage, mu = sigma = 1, x = x_R",
            panels: vec![mark_suspect(
                panel(
                    "mu=1",
                    fpt(ModelSpec::ou(1.0, 1.0), 1.0),
                    true,
                    &[
                        (0.0, 0.0, 0.0, 0.0),
                        (0.1, 49.99, 0.03, 0.16),
                        (0.2, 29.97, 0.11, 0.31),
                        (0.3, 12.29, 0.25, 0.54),
                        (0.4, 6.05, 0.41, 0.57),
                        (0.5, 3.10, 0.59, 0.69),
                        (0.6, 1.42, 0.75, 0.79),
                        (0.7, 0.33, 0.89, 0.891),
                        (0.8, 0.0, 0.98, 0.98),
                        (0.9, 0.0, 1.07, 1.07),
                        (1.0, 0.0, 1.14, 1.14),
                        (2.0, 0.0, 1.72, 1.72),
                        (3.0, 0.0, 2.10, 2.10),
                        (5.0, 0.0, 2.60, 2.60),
                        (10.0, 0.0, 3.29, 3.29),
                        (20.0, 0.0, 3.98, 3.98),
                        (30.0, 0.0, 4.38, 4.38),
                    ],
                ),
                // Optimum sits on the apparent search cap.
                &[0.1],
            )],
        },
        "tab10" => Table {
            name: "tab10",
            title: "OU passage, mu = 0.1, sigma = 1, x = x_R",
            panels: vec![mark_suspect(
                panel(
                    "mu=0.1",
                    fpt(ModelSpec::ou(0.1, 1.0), 1.0),
                    true,
                    &[
                        (0.0, 0.0, 0.0, 0.0),
                        (0.1, 29.99, 0.03, 0.54),
                        (0.2, 29.98, 0.12, 1.07),
                        (0.3, 13.93, 0.27, 1.58),
                        (0.4, 7.76, 0.48, 2.08),
                        (0.5, 4.90, 0.75, 2.56),
                        (0.6, 3.35, 1.07, 3.03),
                        (0.7, 2.41, 1.43, 3.47),
                        (0.75, 2.07, 1.63, 3.69),
                        (0.8, 1.80, 1.85, 3.91),
                        (0.9, 1.38, 2.30, 4.33),
                        (1.0, 1.08, 2.78, 4.74),
                        (1.5, 0.36, 5.49, 6.64),
                        (2.0, 0.10, 8.06, 8.30),
                        (3.0, 0.0, 11.09, 11.09),
                        (5.0, 0.0, 15.26, 15.26),
                        (10.0, 0.0, 21.73, 21.73),
                        (20.0, 0.0, 28.66, 28.66),
                    ],
                ),
                // Optima sit on the apparent search cap.
                &[0.1, 0.2],
            )],
        },
        "tab11" => Table {
            name: "tab11",
            title: "OU passage, mu = sigma = 1, x_R = 1",
            panels: vec![panel(
                "x_r=1",
                fpt(ModelSpec::ou(1.0, 1.0), 1.0),
                false,
                &[
                    (0.0, 0.0, 0.0, 0.0),
                    (0.1, 0.0, 0.167, 0.167),
                    (0.2, 0.0, 0.318, 0.318),
                    (0.3, 0.0, 0.455, 0.455),
                    (0.4, 0.0, 0.579, 0.579),
                    (0.5, 0.0, 0.693, 0.693),
                    (1.0, 0.0, 1.147, 1.147),
                    (1.5, 0.0, 1.475, 1.475),
                    (2.0, 0.388, 1.714, 1.728),
                    (2.5, 0.888, 1.844, 1.933),
                    (3.0, 1.195, 1.916, 2.105),
                    (5.0, 1.692, 2.016, 2.599),
                    (7.0, 1.843, 2.041, 2.931),
                    (10.0, 1.928, 2.054, 3.284),
                    (15.0, 1.977, 2.060, 3.687),
                    (20.0, 1.996, 2.062, 3.974),
                    (50.0, 2.023, 2.064, 4.886),
                ],
            )],
        },
        "tab12" => Table {
            name: "tab12",
            title: "OU passage, mu = sigma = 1, x_R = 2",
            panels: vec![mark_suspect(
                panel(
                    "x_r=2",
                    fpt(ModelSpec::ou(1.0, 1.0), 2.0),
                    false,
                    &[
                        (0.0, 0.0, 0.0, 0.0),
                        (0.1, 0.0, 0.167, 0.167),
                        (0.2, 0.0, 0.318, 0.318),
                        (0.3, 0.0, 0.455, 0.455),
                        (0.4, 0.0, 0.579, 0.579),
                        (0.5, 0.0, 0.693, 0.693),
                        (1.0, 0.0, 1.147, 1.147),
                        (1.5, 0.0, 1.475, 1.475),
                        (2.0, 0.0, 1.728, 1.728),
                        (2.5, 0.0, 1.844, 1.933),
                        (3.0, 0.0, 2.106, 2.106),
                        (5.0, 0.0, 2.600, 2.600),
                        (7.0, 0.0, 2.932, 2.932),
                        (8.0, 0.008, 3.06500, 3.06505),
                        (10.0, 0.193, 3.255, 3.286),
                        (15.0, 0.421, 3.488, 3.689),
                        (20.0, 0.527, 3.594, 3.976),
                        (50.0, 0.849, 3.876, 5.580),
                    ],
                ),
                // m differs from the baseline although r_m = 0; the last
                // baseline disagrees with the x_R = 1 table.
                &[2.5, 50.0],
            )],
        },
        "tab13" => Table {
            name: "tab13",
            title: "Drifted BM passage, x_R = 1, eta = -0.1 and 0.1",
            panels: vec![
                panel(
                    "eta=-0.1",
                    fpt(bm(-0.1), 1.0),
                    false,
                    &[
                        (0.1, 0.448, 0.427, 1.0),
                        (0.5, 0.708, 1.777, 5.0),
                        (1.0, 1.1593, 2.727, 10.0),
                        (2.0, 1.7973, 3.269, 20.0),
                        (3.0, 1.963, 3.339, 30.0),
                        (5.0, 2.0035, 3.351, 50.0),
                        (10.0, 2.0049, 3.3513, 100.0),
                        (50.0, 2.0049, 3.3513, 500.0),
                    ],
                ),
                panel(
                    "eta=0.1",
                    fpt(bm(0.1), 1.0),
                    false,
                    &[
                        (0.1, 0.657, 0.624, INF),
                        (0.5, 0.948, 2.425, INF),
                        (1.0, 1.377, 3.505, INF),
                        (2.0, 1.873, 4.028, INF),
                        (3.0, 1.982, 4.085, INF),
                        (5.0, 2.0044, 4.093, INF),
                        (10.0, 2.0049, 4.093, INF),
                        (50.0, 2.0049, 4.093, INF),
                    ],
                ),
            ],
        },
        "tab14" => {
            let mut left = panel(
                "eta=-1",
                fpt(bm(-1.0), 1.0),
                false,
                &[
                    (0.1, 0.0, 0.1, 0.1),
                    (0.5, 0.0, 0.5, 0.5),
                    (1.0, 0.0011, 1.0, 1.0),
                    (2.0, 1.607, 1.566, 2.0),
                    (3.0, 2.193, 1.675, 3.0),
                    (5.0, 2.396, 1.702, 5.0),
                    (10.0, 2.4141, 1.703, 10.0),
                    (50.0, 2.4142, 1.703, NA),
                ],
            );
            left = mark_suspect(left, &[50.0]);
            Table {
                name: "tab14",
                title: "Drifted BM passage, x_R = 1, eta = -1 and 1",
                panels: vec![
                    left,
                    panel(
                        "eta=1",
                        fpt(bm(1.0), 1.0),
                        false,
                        &[
                            (0.1, 1.6009, 3.466, INF),
                            (0.5, 1.9814, 10.194, INF),
                            (1.0, 2.272, 12.162, INF),
                            (2.0, 2.405, 12.575, INF),
                            (3.0, 2.413, 12.588, INF),
                            (5.0, 2.4142, 12.589, INF),
                            (10.0, 2.4142, 12.589, INF),
                            (50.0, 2.4142, 12.589, INF),
                        ],
                    ),
                ],
            }
        }
        "tab15" => Table {
            name: "tab15",
            title: "Drifted BM exit from (0, 1), eta = -1, x_R = 0.2",
            panels: vec![panel(
                "eta=-1",
                fet(bm(-1.0), 0.2),
                false,
                &[
                    (0.0, 0.0, 0.0, 0.0),
                    (0.1, 11.168, 0.059, 0.065),
                    (0.2, 24.277, 0.095, 0.123),
                    (0.3, 36.140, 0.112, 0.171),
                    (0.4, 43.998, 0.118, 0.208),
                    (0.5, 45.857, 0.120, 0.231),
                    (0.6, 45.886, 0.119, 0.236),
                    (0.7, 42.871, 0.116, 0.221),
                    (0.8, 35.547, 0.106, 0.181),
                    (0.9, 24.467, 0.075, 0.109),
                    (1.0, 0.0, 0.0, 0.0),
                ],
            )],
        },
        "tab16" => Table {
            name: "tab16",
            title: "OU passage, mu = 0.05, sigma = 1, x = x_R",
            panels: vec![mark_suspect(
                panel(
                    "mu=0.05",
                    fpt(ModelSpec::ou(0.05, 1.0), 1.0),
                    true,
                    &[
                        (0.0, 0.0, 0.0, 0.0),
                        (0.1, 9.9999, 0.05626, 0.7726),
                        (0.2, 9.9997, 0.14407, 1.5271),
                        (0.3, 9.9996, 0.28103, 2.2642),
                        (0.4, 7.8495, 0.4901, 2.9844),
                        (0.5, 4.9992, 0.7622, 3.6885),
                        (0.6, 3.4399, 1.0915, 4.3770),
                        (0.7, 2.5038, 1.4757, 5.0504),
                        (0.8, 1.8961, 1.9127, 5.7092),
                        (0.9, 1.4793, 2.3997, 6.3539),
                        (1.0, 1.18107, 2.9338, 6.9851),
                        (1.5, 0.47262, 6.187, 9.9526),
                        (2.0, 0.2212, 10.0305, 12.6418),
                        (3.0, 0.0306, 17.1461, 17.3407),
                        (5.0, 0.0, 24.7728, 24.7728),
                        (10.0, 0.0, 37.0560, 37.0560),
                        (20.0, 0.0, 50.8449, 50.8449),
                    ],
                ),
                // Optima sit on the apparent search cap.
                &[0.1, 0.2, 0.3],
            )],
        },
        other => {
            return Err(Error::Validation(format!(
                "unknown table '{other}'; expected one of {}",
                TABLE_NAMES.join(", ")
            )))
        }
    };
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputedRow {
    pub panel: String,
    pub spec: ProblemSpec,
    pub reference: Reference,
    pub result: std::result::Result<OptResult, Error>,
}

/// Recomputes every row of `table` from scratch.
pub fn compute(table: &Table) -> Vec<ComputedRow> {
    let jobs: Vec<(&Panel, Reference)> = table
        .panels
        .iter()
        .flat_map(|p| p.rows.iter().map(move |r| (p, *r)))
        .collect();
    jobs.par_iter()
        .map(|(p, reference)| {
            let spec = p.row_spec(reference.x);
            ComputedRow {
                panel: p.label.clone(),
                result: minimize_over_r(&spec),
                spec,
                reference: *reference,
            }
        })
        .collect()
}
