//! Reference configurations and published values for the 1987 Swiss bond.
//!
//! Rates run 0.01..0.10 in steps of 0.01. Break-even rows run from the last
//! decision date `tau_20` down to `tau_11`; `None` marks dates without an
//! exercise region.

use serde::Serialize;

use crate::error::Result;
use crate::models::DiffusionModel;
use crate::subordinators::{PricingModel, SubordinatorSpec};

pub const RATES: [f64; 10] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10];

pub const CIR_PARAMS: (f64, f64, f64) = (0.14294371, 0.133976855, 0.38757496);
pub const VASICEK_PARAMS: (f64, f64, f64) = (0.44178462, 0.098397028, 0.13264223);

/// Inverse Gaussian clocks with unit mean rate.
pub const JD_PARAMS: (f64, f64, f64) = (0.5, 0.5, 1.0);
pub const PJ_PARAMS: (f64, f64, f64) = (0.0, 1.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Config {
    Cir,
    Vasicek,
    SubCirJd,
    SubCirPj,
    SubVasicekJd,
    SubVasicekPj,
}

impl Config {
    pub const ALL: [Config; 6] =
        [Config::Cir, Config::Vasicek, Config::SubCirJd, Config::SubCirPj, Config::SubVasicekJd, Config::SubVasicekPj];

    pub fn label(self) -> &'static str {
        match self {
            Config::Cir => "CIR",
            Config::Vasicek => "Vasicek",
            Config::SubCirJd => "SubCIR JD",
            Config::SubCirPj => "SubCIR PJ",
            Config::SubVasicekJd => "SubVasicek JD",
            Config::SubVasicekPj => "SubVasicek PJ",
        }
    }

    pub fn model(self) -> Result<PricingModel> {
        let cir = || DiffusionModel::cir(CIR_PARAMS.0, CIR_PARAMS.1, CIR_PARAMS.2);
        let vas = || DiffusionModel::vasicek(VASICEK_PARAMS.0, VASICEK_PARAMS.1, VASICEK_PARAMS.2);
        let ig = |p: (f64, f64, f64)| SubordinatorSpec::inverse_gaussian(p.0, p.1, p.2);
        match self {
            Config::Cir => Ok(PricingModel::diffusion(cir()?)),
            Config::Vasicek => Ok(PricingModel::diffusion(vas()?)),
            Config::SubCirJd => PricingModel::new(cir()?, ig(JD_PARAMS)?),
            Config::SubCirPj => PricingModel::new(cir()?, ig(PJ_PARAMS)?),
            Config::SubVasicekJd => PricingModel::new(vas()?, ig(JD_PARAMS)?),
            Config::SubVasicekPj => PricingModel::new(vas()?, ig(PJ_PARAMS)?),
        }
    }

    fn column(self) -> usize {
        Config::ALL.iter().position(|c| *c == self).unwrap()
    }

    /// Published callable bond values, if tabulated for this configuration.
    pub fn callable_values(self) -> [f64; 10] {
        let c = self.column();
        std::array::from_fn(|j| CALLABLE_VALUES[j][c])
    }

    pub fn callable_putable_values(self) -> [f64; 10] {
        let c = self.column();
        std::array::from_fn(|j| CALLABLE_PUTABLE_VALUES[j][c])
    }

    pub fn call_break_evens(self) -> [Option<f64>; 10] {
        let c = self.column();
        std::array::from_fn(|j| CALL_BREAK_EVENS[j][c])
    }

    pub fn call_break_evens_with_put(self) -> [f64; 10] {
        let c = self.column();
        std::array::from_fn(|j| CALLPUT_CALL_BREAK_EVENS[j][c])
    }

    pub fn put_break_evens(self) -> [f64; 10] {
        let c = self.column();
        std::array::from_fn(|j| CALLPUT_PUT_BREAK_EVENS[j][c])
    }
}

/// Callable bond values by rate; columns follow [`Config::ALL`].
pub const CALLABLE_VALUES: [[f64; 6]; 10] = [
    [0.939259, 0.842845, 0.967362, 0.972668, 0.874805, 0.884935],
    [0.915992, 0.826294, 0.941069, 0.946130, 0.855193, 0.864408],
    [0.893341, 0.810091, 0.915446, 0.920208, 0.835999, 0.844285],
    [0.871290, 0.794230, 0.890481, 0.894892, 0.817216, 0.824562],
    [0.849823, 0.778702, 0.866160, 0.870174, 0.798837, 0.805233],
    [0.828923, 0.763502, 0.842470, 0.846044, 0.780854, 0.786293],
    [0.808577, 0.748621, 0.819396, 0.822492, 0.763261, 0.767737],
    [0.788769, 0.734053, 0.796927, 0.799510, 0.746050, 0.749559],
    [0.769484, 0.719792, 0.775050, 0.777087, 0.729215, 0.731754],
    [0.750708, 0.705830, 0.753752, 0.755215, 0.712749, 0.714318],
];

pub const CALLABLE_PUTABLE_VALUES: [[f64; 6]; 10] = [
    [1.030391, 0.995407, 1.054194, 1.058549, 1.022068, 1.030678],
    [1.004673, 0.975223, 1.025454, 1.029652, 0.998893, 1.006540],
    [0.979637, 0.955474, 0.997443, 1.001420, 0.976211, 0.982876],
    [0.955265, 0.936150, 0.970147, 0.973843, 0.954015, 0.959680],
    [0.931540, 0.917242, 0.943553, 0.946911, 0.932295, 0.936946],
    [0.908443, 0.898741, 0.917644, 0.920614, 0.911044, 0.914668],
    [0.885958, 0.880639, 0.892409, 0.894942, 0.890253, 0.892840],
    [0.864068, 0.862926, 0.867831, 0.869886, 0.869914, 0.871456],
    [0.842758, 0.845594, 0.843898, 0.845435, 0.850019, 0.850510],
    [0.822011, 0.828635, 0.820595, 0.821579, 0.830559, 0.829996],
];

/// Call break-even short rates of the callable bond.
pub const CALL_BREAK_EVENS: [[Option<f64>; 6]; 10] = [
    [Some(0.03388791), Some(0.02706597), Some(0.03614163), Some(0.03672670), Some(0.03189678), Some(0.03348832)],
    [Some(0.01792789), Some(-0.01012520), Some(0.02292836), Some(0.02439808), Some(0.00299207), Some(0.00734621)],
    [Some(0.00978966), Some(-0.03655983), Some(0.01665424), Some(0.01758017), Some(-0.01809927), Some(-0.01208475)],
    [Some(0.00488209), Some(-0.05701483), Some(0.01161351), Some(0.01333251), Some(-0.03477951), Some(-0.02766935)],
    [Some(0.00157881), Some(-0.07350682), Some(0.00873978), Some(0.01047766), Some(-0.04847549), Some(-0.04061315)],
    [None, Some(-0.09100438), None, None, Some(-0.06370872), Some(-0.05539452)],
    [None, Some(-0.10481935), None, None, Some(-0.07568237), Some(-0.06698556)],
    [None, Some(-0.11653925), None, None, Some(-0.08590952), Some(-0.07694429)],
    [None, Some(-0.12671317), None, None, Some(-0.09485232), Some(-0.08570132)],
    [None, Some(-0.13566906), None, None, Some(-0.10277749), Some(-0.09350086)],
];

/// Call break-even short rates of the callable and putable bond.
pub const CALLPUT_CALL_BREAK_EVENS: [[f64; 6]; 10] = [
    [0.03388791, 0.02706597, 0.03614163, 0.03672670, 0.03189678, 0.03348832],
    [0.03050674, 0.01653941, 0.03271682, 0.03328046, 0.02560234, 0.02738706],
    [0.03032523, 0.01570707, 0.03248071, 0.03298851, 0.02523355, 0.02696967],
    [0.03031566, 0.01565754, 0.03246480, 0.03296440, 0.02521294, 0.02694260],
    [0.03031515, 0.01565469, 0.03246373, 0.03296242, 0.02521179, 0.02694084],
    [0.02494569, 0.01423308, 0.02715933, 0.02765770, 0.01905492, 0.02088314],
    [0.02447879, 0.01412248, 0.02662948, 0.02705660, 0.01851858, 0.02030185],
    [0.02427643, 0.01407361, 0.02641769, 0.02682992, 0.01830026, 0.02007824],
    [0.02409131, 0.01402853, 0.02623127, 0.02663907, 0.01810142, 0.01987946],
    [0.02390885, 0.01398410, 0.02604835, 0.02645309, 0.01790549, 0.01968408],
];

/// Put break-even short rates of the callable and putable bond. The
/// SubVasicek JD entry at `tau_14` is printed as 0.3080348 in the source
/// table; the neighbouring entries show a dropped zero, so 0.03080348 is
/// used.
pub const CALLPUT_PUT_BREAK_EVENS: [[f64; 6]; 10] = [
    [0.04534067, 0.04044891, 0.04765628, 0.04838597, 0.04477592, 0.04625085],
    [0.04136813, 0.01957849, 0.04346118, 0.04402728, 0.03798709, 0.03955459],
    [0.04117866, 0.01857462, 0.04320875, 0.04371211, 0.03762279, 0.03914175],
    [0.04116872, 0.01851743, 0.04319187, 0.04368645, 0.03760252, 0.03911518],
    [0.04116820, 0.01851414, 0.04319074, 0.04368434, 0.03760139, 0.03911347],
    [0.03572256, 0.01708147, 0.03780731, 0.03830289, 0.03139350, 0.03301665],
    [0.03519281, 0.01694566, 0.03720163, 0.03761288, 0.03080348, 0.03238388],
    [0.03493847, 0.01688151, 0.03693765, 0.03733291, 0.03052750, 0.03210465],
    [0.03470234, 0.01682184, 0.03670090, 0.03709169, 0.03027123, 0.03185029],
    [0.03446938, 0.01676298, 0.03646824, 0.03685602, 0.03001840, 0.03159982],
];

/// Published convergence profile at `r = 0.05`: tolerance, then maximum `N`
/// at `tau_20, .., tau_11` and at time zero.
pub struct ConvergenceRow {
    pub eps: f64,
    pub max_terms: [usize; 11],
    pub average_terms: [f64; 11],
}

pub fn convergence_rows(config: Config) -> Option<[ConvergenceRow; 3]> {
    let row = |eps, max_terms, average_terms| ConvergenceRow { eps, max_terms, average_terms };
    match config {
        Config::Cir => Some([
            row(1e-5, [6, 5, 5, 5, 4, 4, 4, 4, 4, 4, 2], [6.0, 3.4, 3.2, 3.1, 3.0, 4.0, 4.0, 4.0, 4.0, 4.0, 2.0]),
            row(1e-6, [9, 8, 8, 8, 7, 5, 6, 6, 6, 6, 2], [8.9, 7.0, 5.3, 5.4, 5.1, 5.0, 6.0, 6.0, 6.0, 6.0, 2.0]),
            // The published average row has one entry fewer than the dates;
            // the missing entry is filled with its neighbour.
            row(1e-7, [11, 11, 12, 11, 11, 7, 7, 7, 7, 7, 3], [10.9, 11.0, 7.9, 9.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0, 3.0]),
        ]),
        Config::Vasicek => Some([
            row(1e-5, [5, 6, 6, 6, 6, 6, 7, 7, 7, 7, 2], [4.2, 5.8, 6.0, 4.3, 5.8, 5.9, 5.2, 5.2, 5.2, 5.2, 2.0]),
            row(1e-6, [6, 10, 10, 10, 11, 10, 11, 11, 11, 11, 3], [6.0, 8.3, 9.8, 9.8, 9.2, 9.0, 9.0, 9.3, 9.9, 10.0, 3.0]),
            row(
                1e-7,
                [7, 13, 14, 14, 14, 13, 13, 14, 14, 14, 3],
                [6.1, 12.0, 12.0, 13.0, 13.0, 12.8, 12.9, 13.9, 13.8, 13.5, 3.0],
            ),
        ]),
        _ => None,
    }
}
