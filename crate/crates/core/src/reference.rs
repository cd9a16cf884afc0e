//! Published type I error tables and worked examples, bundled for
//! reproduction checks.
//!
//! Rows are stored exactly as printed, each with a [`RowStatus`]. In Table 1
//! the δ₀ = 0.15 block lost its three P_C = 0.95 rows: later rows moved up one
//! place under the old labels and the block was padded with copies of the
//! δ₀ = 0.05 rows. Two rows of Table 2 sit under wrong labels as well, and one
//! repeats another row's values. Every
//! status is backed by the Farrington–Manning sample size of the design, which
//! reproduces the printed N_T (see [`design_n_test`]).

use serde::{Deserialize, Serialize};

use crate::intervals::Method;
use crate::oc::{fm_sample_size_with, OcScenario, Rounding, SampleSizeSpec};

/// Column order of the printed type I error tables.
pub const TABLE_METHODS: [Method; 7] = [
    Method::Wald,
    Method::AgrestiCaffo,
    Method::HauckAnderson,
    Method::NewcombeCc,
    Method::Newcombe,
    Method::Als,
    Method::Els,
];

pub const NOMINAL_PERCENT: f64 = 2.5;
pub const ONE_SIDED_ALPHA: f64 = 0.025;

/// A design `(δ₀, ratio, P_C)` with equal true proportions under the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub margin: f64,
    /// `N_T : N_C`
    pub ratio: (u32, u32),
    pub p_control: f64,
}

/// How a printed row relates to its labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RowStatus {
    /// The labels describe the row.
    AsLabelled,
    /// The row belongs to another design; its labels are shifted.
    Moved(Design),
    /// The row repeats another printed row of the given design.
    Copy(Design),
    /// The labels are right but all columns except ELS repeat the printed
    /// row of the given design.
    Repeats(Design),
}

const AS_LABELLED: RowStatus = RowStatus::AsLabelled;

const fn moved(margin: f64, ratio: (u32, u32), p_control: f64) -> RowStatus {
    RowStatus::Moved(Design {
        margin,
        ratio,
        p_control,
    })
}

const fn copy(margin: f64, ratio: (u32, u32), p_control: f64) -> RowStatus {
    RowStatus::Copy(Design {
        margin,
        ratio,
        p_control,
    })
}

const fn repeats(margin: f64, ratio: (u32, u32), p_control: f64) -> RowStatus {
    RowStatus::Repeats(Design {
        margin,
        ratio,
        p_control,
    })
}

/// One printed row: labels, test-arm size and type I errors in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedRow {
    pub table: u8,
    pub margin: f64,
    pub ratio: (u32, u32),
    pub p_control: f64,
    pub n_test: u32,
    pub percent: [f64; 7],
    pub status: RowStatus,
}

const fn row(
    table: u8,
    margin: f64,
    ratio: (u32, u32),
    p_control: f64,
    n_test: u32,
    percent: [f64; 7],
    status: RowStatus,
) -> PrintedRow {
    PrintedRow {
        table,
        margin,
        ratio,
        p_control,
        n_test,
        percent,
        status,
    }
}

pub const TABLE1: &[PrintedRow] = &[
    row(1, 0.10, (1, 2), 0.25, 207, [2.21, 2.45, 1.83, 2.31, 2.77, 2.65, 2.49], AS_LABELLED),
    row(1, 0.10, (1, 2), 0.40, 275, [2.34, 2.50, 2.06, 2.30, 2.62, 2.56, 2.48], AS_LABELLED),
    row(1, 0.10, (1, 2), 0.60, 285, [2.46, 2.47, 2.19, 2.18, 2.46, 2.44, 2.44], AS_LABELLED),
    row(1, 0.10, (1, 2), 0.75, 233, [2.70, 2.60, 2.34, 2.13, 2.48, 2.44, 2.47], AS_LABELLED),
    row(1, 0.10, (1, 2), 0.90, 132, [3.38, 2.80, 2.60, 1.72, 2.33, 2.29, 2.51], AS_LABELLED),
    row(1, 0.10, (1, 2), 0.95, 90, [3.94, 3.08, 3.05, 1.41, 2.05, 2.05, 2.39], AS_LABELLED),
    row(1, 0.10, (1, 1), 0.25, 295, [2.57, 2.57, 2.25, 2.16, 2.57, 2.50, 2.50], AS_LABELLED),
    row(1, 0.10, (1, 1), 0.40, 374, [2.46, 2.54, 2.27, 2.28, 2.57, 2.51, 2.46], AS_LABELLED),
    row(1, 0.10, (1, 1), 0.60, 374, [2.37, 2.43, 2.36, 2.36, 2.50, 2.40, 2.38], AS_LABELLED),
    row(1, 0.10, (1, 1), 0.75, 295, [2.50, 2.54, 2.24, 2.24, 2.58, 2.50, 2.47], AS_LABELLED),
    row(1, 0.10, (1, 1), 0.90, 154, [2.78, 2.76, 2.19, 1.97, 2.55, 2.36, 2.47], AS_LABELLED),
    row(1, 0.10, (1, 1), 0.95, 99, [3.27, 2.91, 2.47, 1.67, 2.42, 2.32, 2.32], AS_LABELLED),
    row(1, 0.10, (2, 1), 0.25, 466, [2.88, 2.67, 2.48, 2.02, 2.42, 2.39, 2.48], AS_LABELLED),
    row(1, 0.10, (2, 1), 0.40, 570, [2.62, 2.57, 2.31, 2.20, 2.52, 2.47, 2.50], AS_LABELLED),
    row(1, 0.10, (2, 1), 0.60, 550, [2.47, 2.48, 2.20, 2.23, 2.54, 2.49, 2.48], AS_LABELLED),
    row(1, 0.10, (2, 1), 0.75, 414, [2.29, 2.49, 1.94, 2.27, 2.65, 2.59, 2.48], AS_LABELLED),
    row(1, 0.10, (2, 1), 0.90, 194, [2.13, 2.52, 1.52, 2.16, 2.97, 2.69, 2.48], AS_LABELLED),
    row(1, 0.10, (2, 1), 0.95, 116, [2.00, 2.67, 1.37, 1.97, 2.88, 2.82, 2.38], AS_LABELLED),
    row(1, 0.15, (1, 2), 0.25, 90, [2.14, 2.56, 1.49, 2.25, 2.94, 2.57, 2.46], AS_LABELLED),
    row(1, 0.15, (1, 2), 0.40, 120, [2.22, 2.48, 1.81, 2.26, 2.76, 2.63, 2.48], AS_LABELLED),
    row(1, 0.15, (1, 2), 0.60, 127, [2.61, 2.61, 2.12, 2.20, 2.61, 2.61, 2.47], AS_LABELLED),
    row(1, 0.15, (1, 2), 0.75, 106, [2.76, 2.67, 2.22, 2.03, 2.53, 2.46, 2.50], AS_LABELLED),
    row(1, 0.15, (1, 2), 0.90, 65, [3.55, 2.87, 2.56, 1.65, 2.22, 2.19, 2.51], AS_LABELLED),
    row(1, 0.15, (1, 2), 0.95, 131, [2.75, 2.77, 2.14, 1.96, 2.56, 2.37, 2.50], moved(0.15, (1, 1), 0.25)),
    row(1, 0.15, (1, 1), 0.25, 165, [2.47, 2.63, 2.11, 2.16, 2.66, 2.58, 2.52], moved(0.15, (1, 1), 0.40)),
    row(1, 0.15, (1, 1), 0.40, 165, [2.38, 2.76, 2.13, 2.13, 2.76, 2.81, 2.50], moved(0.15, (1, 1), 0.60)),
    row(1, 0.15, (1, 1), 0.60, 131, [2.50, 2.59, 2.12, 2.18, 2.67, 2.50, 2.42], moved(0.15, (1, 1), 0.75)),
    row(1, 0.15, (1, 1), 0.75, 73, [2.78, 2.74, 2.08, 1.83, 2.73, 2.37, 2.38], moved(0.15, (1, 1), 0.90)),
    row(1, 0.15, (1, 1), 0.90, 212, [3.20, 2.91, 2.60, 1.81, 2.36, 2.27, 2.45], moved(0.15, (2, 1), 0.25)),
    row(1, 0.15, (1, 1), 0.95, 254, [2.73, 2.65, 2.23, 2.07, 2.52, 2.47, 2.47], moved(0.15, (2, 1), 0.40)),
    row(1, 0.15, (2, 1), 0.25, 240, [2.31, 2.69, 1.92, 2.30, 2.74, 2.62, 2.41], moved(0.15, (2, 1), 0.60)),
    row(1, 0.15, (2, 1), 0.40, 180, [2.21, 2.50, 1.74, 2.18, 2.78, 2.61, 2.50], moved(0.15, (2, 1), 0.75)),
    row(1, 0.15, (2, 1), 0.60, 88, [2.02, 2.41, 1.21, 2.27, 2.92, 2.83, 2.41], moved(0.15, (2, 1), 0.90)),
    row(1, 0.15, (2, 1), 0.75, 289, [3.41, 2.81, 2.82, 1.76, 2.17, 2.17, 2.43], copy(0.05, (1, 2), 0.95)),
    row(1, 0.15, (2, 1), 0.90, 334, [2.85, 2.62, 2.31, 1.93, 2.41, 2.41, 2.41], copy(0.05, (1, 1), 0.95)),
    row(1, 0.15, (2, 1), 0.95, 414, [2.14, 2.49, 1.56, 2.14, 2.90, 2.55, 2.40], copy(0.05, (2, 1), 0.95)),
    row(1, 0.05, (1, 2), 0.95, 289, [3.41, 2.81, 2.82, 1.76, 2.17, 2.17, 2.43], AS_LABELLED),
    row(1, 0.05, (1, 1), 0.95, 334, [2.85, 2.62, 2.31, 1.93, 2.41, 2.41, 2.41], AS_LABELLED),
    row(1, 0.05, (2, 1), 0.95, 414, [2.14, 2.49, 1.56, 2.14, 2.90, 2.55, 2.40], AS_LABELLED),
];
pub const TABLE2: &[PrintedRow] = &[
    row(2, 0.10, (1, 2), 0.25, 280, [2.24, 2.48, 1.89, 2.32, 2.71, 2.59, 2.49], AS_LABELLED),
    row(2, 0.10, (1, 2), 0.40, 369, [2.37, 2.50, 2.11, 2.32, 2.61, 2.55, 2.50], AS_LABELLED),
    row(2, 0.10, (1, 2), 0.60, 382, [2.46, 2.48, 2.22, 2.21, 2.48, 2.44, 2.44], AS_LABELLED),
    row(2, 0.10, (1, 2), 0.75, 310, [2.67, 2.60, 2.35, 2.17, 2.49, 2.46, 2.49], AS_LABELLED),
    row(2, 0.10, (1, 2), 0.90, 172, [3.20, 2.79, 2.60, 1.89, 2.33, 2.28, 2.43], AS_LABELLED),
    row(2, 0.10, (1, 2), 0.95, 113, [4.03, 2.93, 2.93, 1.52, 2.12, 2.12, 2.31], AS_LABELLED),
    row(2, 0.10, (1, 1), 0.25, 395, [2.55, 2.60, 2.28, 2.20, 2.57, 2.49, 2.49], AS_LABELLED),
    row(2, 0.10, (1, 1), 0.40, 502, [2.46, 2.51, 2.29, 2.31, 2.54, 2.49, 2.48], AS_LABELLED),
    row(2, 0.10, (1, 1), 0.60, 502, [2.53, 2.53, 2.20, 2.21, 2.53, 2.53, 2.53], AS_LABELLED),
    row(2, 0.10, (1, 1), 0.75, 395, [2.55, 2.60, 2.28, 2.20, 2.57, 2.49, 2.50], repeats(0.10, (1, 1), 0.25)),
    row(2, 0.10, (1, 1), 0.90, 204, [2.71, 2.70, 2.30, 2.01, 2.55, 2.40, 2.46], AS_LABELLED),
    row(2, 0.10, (1, 1), 0.95, 128, [3.38, 2.91, 2.34, 1.83, 2.44, 2.31, 2.48], AS_LABELLED),
    row(2, 0.10, (2, 1), 0.25, 620, [2.83, 2.65, 2.47, 2.11, 2.46, 2.40, 2.47], AS_LABELLED),
    row(2, 0.10, (2, 1), 0.40, 764, [2.60, 2.56, 2.33, 2.24, 2.51, 2.49, 2.49], AS_LABELLED),
    row(2, 0.10, (2, 1), 0.60, 738, [2.40, 2.57, 2.14, 2.33, 2.58, 2.57, 2.54], AS_LABELLED),
    row(2, 0.10, (2, 1), 0.75, 560, [2.31, 2.48, 2.02, 2.32, 2.64, 2.59, 2.47], AS_LABELLED),
    row(2, 0.15, (1, 2), 0.25, 121, [2.15, 2.56, 1.63, 2.30, 2.82, 2.66, 2.42], AS_LABELLED),
    row(2, 0.15, (1, 2), 0.40, 161, [2.25, 2.53, 1.89, 2.30, 2.72, 2.59, 2.47], AS_LABELLED),
    row(2, 0.15, (1, 2), 0.60, 169, [2.42, 2.44, 2.08, 2.10, 2.55, 2.42, 2.42], AS_LABELLED),
    row(2, 0.15, (1, 2), 0.75, 140, [2.69, 2.62, 2.27, 2.07, 2.55, 2.45, 2.46], AS_LABELLED),
    row(2, 0.15, (1, 2), 0.90, 83, [3.35, 2.98, 2.67, 1.70, 2.36, 2.20, 2.36], AS_LABELLED),
    row(2, 0.15, (1, 2), 0.95, 154, [2.16, 2.67, 1.29, 1.95, 2.83, 2.59, 2.34], moved(0.10, (2, 1), 0.95)),
    row(2, 0.15, (1, 1), 0.25, 176, [2.67, 2.80, 2.21, 2.08, 2.64, 2.49, 2.49], AS_LABELLED),
    row(2, 0.15, (1, 1), 0.40, 221, [2.47, 2.62, 2.17, 2.22, 2.65, 2.51, 2.46], AS_LABELLED),
    row(2, 0.15, (1, 1), 0.60, 221, [2.37, 2.38, 2.37, 2.37, 2.47, 2.43, 2.37], AS_LABELLED),
    row(2, 0.15, (1, 1), 0.75, 176, [2.50, 2.62, 2.11, 2.16, 2.64, 2.56, 2.50], AS_LABELLED),
    row(2, 0.15, (1, 1), 0.90, 96, [2.76, 2.76, 2.28, 1.88, 2.73, 2.47, 2.47], AS_LABELLED),
    row(2, 0.15, (1, 1), 0.95, 120, [1.98, 2.40, 1.30, 2.34, 2.94, 2.84, 2.40], moved(0.15, (2, 1), 0.90)),
    row(2, 0.15, (2, 1), 0.25, 280, [3.16, 2.84, 2.54, 1.87, 2.42, 2.28, 2.45], AS_LABELLED),
    row(2, 0.15, (2, 1), 0.40, 338, [2.67, 2.63, 2.25, 2.14, 2.54, 2.49, 2.49], AS_LABELLED),
    row(2, 0.15, (2, 1), 0.60, 322, [2.31, 2.63, 1.95, 2.26, 2.63, 2.63, 2.58], AS_LABELLED),
    row(2, 0.15, (2, 1), 0.75, 242, [2.22, 2.50, 1.81, 2.26, 2.76, 2.62, 2.50], AS_LABELLED),
    row(2, 0.05, (1, 2), 0.95, 374, [3.30, 2.77, 2.77, 1.82, 2.24, 2.23, 2.47], AS_LABELLED),
    row(2, 0.05, (1, 1), 0.95, 440, [2.82, 2.65, 2.35, 2.02, 2.48, 2.37, 2.48], AS_LABELLED),
    row(2, 0.05, (2, 1), 0.95, 560, [2.12, 2.43, 1.62, 2.18, 2.78, 2.62, 2.44], AS_LABELLED),
];

/// Table 3 summary statistics in column order of [`TABLE_METHODS`]:
/// percent above 2.5%, mean distance, range, min, max, mean of those ≤ 2.5%,
/// mean of those > 2.5% (`None` where printed as "--").
pub const TABLE3: [[Option<f64>; 7]; 7] = [
    [Some(49.0), Some(74.0), Some(14.0), Some(0.0), Some(69.0), Some(42.0), Some(8.0)],
    [Some(0.324), Some(0.145), Some(0.410), Some(0.401), Some(0.161), Some(0.120), Some(0.046)],
    [Some(2.05), Some(0.7), Some(1.84), Some(0.96), Some(0.92), Some(0.79), Some(0.27)],
    [Some(1.98), Some(2.38), Some(1.21), Some(1.41), Some(2.05), Some(2.05), Some(2.31)],
    [Some(4.03), Some(3.08), Some(3.05), Some(2.37), Some(2.97), Some(2.84), Some(2.58)],
    [Some(2.30), Some(2.46), Some(2.06), Some(2.10), Some(2.37), Some(2.38), Some(2.45)],
    [Some(2.95), Some(2.68), Some(2.71), None, Some(2.67), Some(2.62), Some(2.53)],
];

pub const TABLE3_ROWS: [&str; 7] = [
    "% > 2.5%",
    "mean distance",
    "range",
    "min",
    "max",
    "mean of those <= 2.5%",
    "mean of those > 2.5%",
];

/// A worked example: data, margin, and printed 95% intervals (percent) and p-values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub counts: (u32, u32, u32, u32),
    pub margin: f64,
    /// `(method, lower %, upper %)` in printed order.
    pub intervals: [(Method, f64, f64); 7],
    pub als_p: f64,
    pub els_p: f64,
}

pub const TABLE4: [Example; 3] = [
    Example {
        counts: (264, 328, 268, 317),
        margin: 0.10,
        intervals: [
            (Method::Wald, -9.91, 1.80),
            (Method::AgrestiCaffo, -9.88, 1.84),
            (Method::HauckAnderson, -10.07, 1.96),
            (Method::Newcombe, -9.90, 1.83),
            (Method::NewcombeCc, -10.11, 2.06),
            (Method::Als, -9.94, 1.83),
            (Method::Els, -9.94, 1.84),
        ],
        als_p: 0.0238,
        els_p: 0.0239,
    },
    Example {
        counts: (285, 326, 99, 108),
        margin: 0.10,
        intervals: [
            (Method::Wald, -10.58, 2.09),
            (Method::AgrestiCaffo, -10.19, 2.76),
            (Method::HauckAnderson, -11.06, 2.58),
            (Method::Newcombe, -9.85, 3.21),
            (Method::NewcombeCc, -10.20, 3.78),
            (Method::Als, -9.98, 3.16),
            (Method::Els, -10.14, 2.91),
        ],
        als_p: 0.0246,
        els_p: 0.0281,
    },
    Example {
        counts: (411, 435, 426, 441),
        margin: 0.05,
        intervals: [
            (Method::Wald, -4.85, 0.62),
            (Method::AgrestiCaffo, -4.89, 0.68),
            (Method::HauckAnderson, -4.97, 0.73),
            (Method::Newcombe, -5.00, 0.66),
            (Method::NewcombeCc, -5.16, 0.83),
            (Method::Als, -5.03, 0.64),
            (Method::Els, -4.99, 0.66),
        ],
        als_p: 0.0260,
        els_p: 0.0246,
    },
];

/// Target power of the designs in a table.
pub fn table_power(table: u8) -> f64 {
    if table == 1 {
        0.8
    } else {
        0.9
    }
}

pub const MARGINS: [f64; 3] = [0.05, 0.10, 0.15];
pub const RATIOS: [(u32, u32); 3] = [(1, 2), (1, 1), (2, 1)];
pub const CONTROL_PROPORTIONS: [f64; 6] = [0.25, 0.40, 0.60, 0.75, 0.90, 0.95];

/// Test-arm size the design receives at `power`, rounded to the nearest whole
/// multiple of the allocation ratio.
pub fn design_n_test(design: &Design, power: f64) -> u32 {
    let spec = SampleSizeSpec {
        margin: design.margin,
        ratio_test: design.ratio.0,
        ratio_control: design.ratio.1,
        p_control: design.p_control,
        p_test: design.p_control,
        power,
        one_sided_alpha: ONE_SIDED_ALPHA,
    };
    fm_sample_size_with(&spec, Rounding::Nearest)
        .expect("tabulated designs are valid")
        .n_test
}

impl PrintedRow {
    pub fn design(&self) -> Design {
        Design {
            margin: self.margin,
            ratio: self.ratio,
            p_control: self.p_control,
        }
    }

    /// The design the printed values belong to.
    pub fn actual_design(&self) -> Design {
        match self.status {
            RowStatus::AsLabelled | RowStatus::Repeats(_) => self.design(),
            RowStatus::Moved(d) | RowStatus::Copy(d) => d,
        }
    }

    pub fn is_as_labelled(&self) -> bool {
        self.status == RowStatus::AsLabelled
    }

    pub fn value(&self, method: Method) -> Option<f64> {
        TABLE_METHODS.iter().position(|&m| m == method).map(|k| self.percent[k])
    }

    /// Null scenario of the row's actual design at the printed N_T.
    pub fn scenario(&self) -> OcScenario {
        scenario(&self.actual_design(), self.n_test)
    }
}

/// Null scenario at `P_T = P_C − δ₀` with `N_C` from the allocation ratio.
pub fn scenario(design: &Design, n_test: u32) -> OcScenario {
    let (a, b) = design.ratio;
    let n_control = (u64::from(n_test) * u64::from(b)).div_ceil(u64::from(a)) as u32;
    OcScenario {
        n_test,
        n_control,
        margin: design.margin,
        p_control: design.p_control,
        one_sided_alpha: ONE_SIDED_ALPHA,
    }
}

/// All printed rows of Tables 1 and 2.
pub fn printed_rows() -> impl Iterator<Item = &'static PrintedRow> {
    TABLE1.iter().chain(TABLE2.iter())
}

/// Table 2 design with no printed row (δ₀ = 0.10, 2:1, P_C = 0.90).
pub const TABLE2_MISSING: Design = Design {
    margin: 0.10,
    ratio: (2, 1),
    p_control: 0.90,
};

/// The 71 distinct designs with a printed row in Tables 1 and 2 (every row
/// except copies, with moved rows under their actual design). Table 3 is
/// reproduced from these. Returned as `(table, design, N_T)`.
pub fn summary_scenarios() -> Vec<(u8, Design, u32)> {
    printed_rows()
        .filter(|r| !matches!(r.status, RowStatus::Copy(_)))
        .map(|r| (r.table, r.actual_design(), r.n_test))
        .collect()
}

/// All 72 designs of Tables 1 and 2: [`summary_scenarios`] plus the Table 2
/// design whose row is missing.
pub fn design_scenarios() -> Vec<(u8, Design, u32)> {
    let mut v = summary_scenarios();
    v.push((2, TABLE2_MISSING, design_n_test(&TABLE2_MISSING, table_power(2))));
    v
}
