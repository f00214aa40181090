//! Biorthogonal spline filter banks.
//!
//! Tables hold the four filters of each bank zero-padded to a common even
//! length `F`. The analysis low-pass is centred on sample `F/2` (odd tap
//! count) or `(F-1)/2` (even tap count); the synthesis low-pass is centred on
//! `F - 1 - c_analysis`. High-pass filters are the sign-modulated low-pass
//! filters of the opposite side:
//!
//! ```text
//! dec_hi[i] = (-1)^(i+1) rec_lo[i]
//! rec_hi[i] = (-1)^i     dec_lo[i]
//! ```
//!
//! For `biorNr.Nd` the analysis wavelet carries `Nd` vanishing moments and the
//! synthesis wavelet carries `Nr`: the synthesis low-pass holds the `(1+z)^Nd`
//! factor and the analysis low-pass is the order-`Nr` B-spline (bior6.8 splits
//! the spline polynomial across both sides).

// Reference taps keep their published digits.
#![allow(clippy::approx_constant, clippy::excessive_precision)]

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The supported wavelets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wavelet {
    #[serde(rename = "bior1.1")]
    Bior1_1,
    #[serde(rename = "bior1.5")]
    Bior1_5,
    #[serde(rename = "bior2.8")]
    Bior2_8,
    #[serde(rename = "bior3.9")]
    Bior3_9,
    #[serde(rename = "bior6.8")]
    Bior6_8,
}

impl Wavelet {
    pub const ALL: [Wavelet; 5] = [
        Wavelet::Bior1_1,
        Wavelet::Bior1_5,
        Wavelet::Bior2_8,
        Wavelet::Bior3_9,
        Wavelet::Bior6_8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Wavelet::Bior1_1 => "bior1.1",
            Wavelet::Bior1_5 => "bior1.5",
            Wavelet::Bior2_8 => "bior2.8",
            Wavelet::Bior3_9 => "bior3.9",
            Wavelet::Bior6_8 => "bior6.8",
        }
    }

    /// Identifier byte used by the compressed file format.
    pub fn id(self) -> u8 {
        match self {
            Wavelet::Bior1_1 => 1,
            Wavelet::Bior1_5 => 2,
            Wavelet::Bior2_8 => 3,
            Wavelet::Bior3_9 => 4,
            Wavelet::Bior6_8 => 5,
        }
    }

    pub fn from_id(id: u8) -> Option<Wavelet> {
        Wavelet::ALL.into_iter().find(|w| w.id() == id)
    }

    /// `(Nr, Nd)` as encoded in the name.
    pub fn orders(self) -> (usize, usize) {
        match self {
            Wavelet::Bior1_1 => (1, 1),
            Wavelet::Bior1_5 => (1, 5),
            Wavelet::Bior2_8 => (2, 8),
            Wavelet::Bior3_9 => (3, 9),
            Wavelet::Bior6_8 => (6, 8),
        }
    }

    pub fn bank(self) -> FilterBank {
        filter_bank_for(self)
    }
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Wavelet::ALL
            .into_iter()
            .find(|w| w.name() == lower)
            .ok_or_else(|| Error::UnsupportedWavelet(s.to_string()))
    }
}

/// Analysis/synthesis filter quadruple of one wavelet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterBank {
    pub wavelet: Wavelet,
    pub dec_lo: &'static [f64],
    pub dec_hi: &'static [f64],
    pub rec_lo: &'static [f64],
    pub rec_hi: &'static [f64],
    /// Vanishing moments of the synthesis wavelet.
    pub nr: usize,
    /// Vanishing moments of the analysis wavelet.
    pub nd: usize,
}

impl FilterBank {
    /// Common (padded) length of all four filters.
    pub fn filter_len(&self) -> usize {
        self.dec_lo.len()
    }
}

/// Looks a bank up by its identifier, e.g. `"bior2.8"`.
pub fn filter_bank(name: &str) -> Result<FilterBank> {
    Ok(name.parse::<Wavelet>()?.bank())
}

fn filter_bank_for(wavelet: Wavelet) -> FilterBank {
    let (nr, nd) = wavelet.orders();
    let (dec_lo, dec_hi, rec_lo, rec_hi): (&[f64], &[f64], &[f64], &[f64]) = match wavelet {
        Wavelet::Bior1_1 => (&BIOR1_1_DEC_LO, &BIOR1_1_DEC_HI, &BIOR1_1_REC_LO, &BIOR1_1_REC_HI),
        Wavelet::Bior1_5 => (&BIOR1_5_DEC_LO, &BIOR1_5_DEC_HI, &BIOR1_5_REC_LO, &BIOR1_5_REC_HI),
        Wavelet::Bior2_8 => (&BIOR2_8_DEC_LO, &BIOR2_8_DEC_HI, &BIOR2_8_REC_LO, &BIOR2_8_REC_HI),
        Wavelet::Bior3_9 => (&BIOR3_9_DEC_LO, &BIOR3_9_DEC_HI, &BIOR3_9_REC_LO, &BIOR3_9_REC_HI),
        Wavelet::Bior6_8 => (&BIOR6_8_DEC_LO, &BIOR6_8_DEC_HI, &BIOR6_8_REC_LO, &BIOR6_8_REC_HI),
    };
    FilterBank {
        wavelet,
        dec_lo,
        dec_hi,
        rec_lo,
        rec_hi,
        nr,
        nd,
    }
}

const BIOR1_1_DEC_LO: [f64; 2] = [0.70710678118654752, 0.70710678118654752];

const BIOR1_1_DEC_HI: [f64; 2] = [-0.70710678118654752, 0.70710678118654752];

const BIOR1_1_REC_LO: [f64; 2] = [0.70710678118654752, 0.70710678118654752];

const BIOR1_1_REC_HI: [f64; 2] = [0.70710678118654752, -0.70710678118654752];

const BIOR1_5_DEC_LO: [f64; 10] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.70710678118654752,
    0.70710678118654752,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR1_5_DEC_HI: [f64; 10] = [
    -0.016572815184059708,
    -0.016572815184059708,
    0.12153397801643786,
    0.12153397801643786,
    -0.70710678118654752,
    0.70710678118654752,
    -0.12153397801643786,
    -0.12153397801643786,
    0.016572815184059708,
    0.016572815184059708,
];

const BIOR1_5_REC_LO: [f64; 10] = [
    0.016572815184059708,
    -0.016572815184059708,
    -0.12153397801643786,
    0.12153397801643786,
    0.70710678118654752,
    0.70710678118654752,
    0.12153397801643786,
    -0.12153397801643786,
    -0.016572815184059708,
    0.016572815184059708,
];

const BIOR1_5_REC_HI: [f64; 10] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.70710678118654752,
    -0.70710678118654752,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR2_8_DEC_LO: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.35355339059327376,
    0.70710678118654752,
    0.35355339059327376,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR2_8_DEC_HI: [f64; 18] = [
    -0.0015105430506304421,
    -0.0030210861012608842,
    0.012947511862546647,
    0.028916109826354177,
    -0.05299848189069094,
    -0.13491307360773606,
    0.16382918343409023,
    0.46257144047591653,
    -0.95164212189717852,
    0.46257144047591653,
    0.16382918343409023,
    -0.13491307360773606,
    -0.05299848189069094,
    0.028916109826354177,
    0.012947511862546647,
    -0.0030210861012608842,
    -0.0015105430506304421,
    0.0,
];

const BIOR2_8_REC_LO: [f64; 18] = [
    0.0015105430506304421,
    -0.0030210861012608842,
    -0.012947511862546647,
    0.028916109826354177,
    0.05299848189069094,
    -0.13491307360773606,
    -0.16382918343409023,
    0.46257144047591653,
    0.95164212189717852,
    0.46257144047591653,
    -0.16382918343409023,
    -0.13491307360773606,
    0.05299848189069094,
    0.028916109826354177,
    -0.012947511862546647,
    -0.0030210861012608842,
    0.0015105430506304421,
    0.0,
];

const BIOR2_8_REC_HI: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.35355339059327376,
    -0.70710678118654752,
    0.35355339059327376,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR3_9_DEC_LO: [f64; 20] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.17677669529663688,
    0.53033008588991064,
    0.53033008588991064,
    0.17677669529663688,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR3_9_DEC_HI: [f64; 20] = [
    0.00067974437278369894,
    0.0020392331183510968,
    -0.005060319219611981,
    -0.020618912641105535,
    0.014112787930175845,
    0.099134782494232157,
    -0.012300136269419314,
    -0.32019196836077857,
    -0.0020500227115698857,
    0.94212570067820674,
    -0.94212570067820674,
    0.0020500227115698857,
    0.32019196836077857,
    0.012300136269419314,
    -0.099134782494232157,
    -0.014112787930175845,
    0.020618912641105535,
    0.005060319219611981,
    -0.0020392331183510968,
    -0.00067974437278369894,
];

const BIOR3_9_REC_LO: [f64; 20] = [
    -0.00067974437278369894,
    0.0020392331183510968,
    0.005060319219611981,
    -0.020618912641105535,
    -0.014112787930175845,
    0.099134782494232157,
    0.012300136269419314,
    -0.32019196836077857,
    0.0020500227115698857,
    0.94212570067820674,
    0.94212570067820674,
    0.0020500227115698857,
    -0.32019196836077857,
    0.012300136269419314,
    0.099134782494232157,
    -0.014112787930175845,
    -0.020618912641105535,
    0.005060319219611981,
    0.0020392331183510968,
    -0.00067974437278369894,
];

const BIOR3_9_REC_HI: [f64; 20] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.17677669529663688,
    -0.53033008588991064,
    0.53033008588991064,
    -0.17677669529663688,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
];

const BIOR6_8_DEC_LO: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.014426282505622247,
    0.014467504896774099,
    -0.078722001062668717,
    -0.040367979030381904,
    0.41784910915032023,
    0.75890772945376313,
    0.41784910915032023,
    -0.040367979030381904,
    -0.078722001062668717,
    0.014467504896774099,
    0.014426282505622247,
    0.0,
    0.0,
    0.0,
];

const BIOR6_8_DEC_HI: [f64; 18] = [
    -0.0019088317364850262,
    -0.0019142861290808863,
    0.016990639867607099,
    0.011934565279726731,
    -0.049732903490937654,
    -0.077263173167211342,
    0.09405920349576163,
    0.42079628460983926,
    -0.82592299745843962,
    0.42079628460983926,
    0.09405920349576163,
    -0.077263173167211342,
    -0.049732903490937654,
    0.011934565279726731,
    0.016990639867607099,
    -0.0019142861290808863,
    -0.0019088317364850262,
    0.0,
];

const BIOR6_8_REC_LO: [f64; 18] = [
    0.0019088317364850262,
    -0.0019142861290808863,
    -0.016990639867607099,
    0.011934565279726731,
    0.049732903490937654,
    -0.077263173167211342,
    -0.09405920349576163,
    0.42079628460983926,
    0.82592299745843962,
    0.42079628460983926,
    -0.09405920349576163,
    -0.077263173167211342,
    0.049732903490937654,
    0.011934565279726731,
    -0.016990639867607099,
    -0.0019142861290808863,
    0.0019088317364850262,
    0.0,
];

const BIOR6_8_REC_HI: [f64; 18] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.014426282505622247,
    -0.014467504896774099,
    -0.078722001062668717,
    0.040367979030381904,
    0.41784910915032023,
    -0.75890772945376313,
    0.41784910915032023,
    0.040367979030381904,
    -0.078722001062668717,
    -0.014467504896774099,
    0.014426282505622247,
    0.0,
    0.0,
    0.0,
];
