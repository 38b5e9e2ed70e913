//! Adaptive 61-point Gauss–Kronrod quadrature.
//!
//! Panels are kept in a max-heap keyed by their error estimate and the worst
//! panel is bisected until the global estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1); the odd entries are the 30-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 31] = [
    0.999_484_410_050_490_637_571_325_895_705_811,
    0.996_893_484_074_649_540_271_630_050_918_695,
    0.991_630_996_870_404_594_858_628_366_109_486,
    0.983_668_123_279_747_209_970_032_581_605_663,
    0.973_116_322_501_126_268_374_693_868_423_707,
    0.960_021_864_968_307_512_216_871_025_581_798,
    0.944_374_444_748_559_979_415_831_324_037_439,
    0.926_200_047_429_274_325_879_324_277_080_474,
    0.905_573_307_699_907_798_546_522_558_925_958,
    0.882_560_535_792_052_681_543_116_462_530_226,
    0.857_205_233_546_061_098_958_658_510_658_944,
    0.829_565_762_382_768_397_442_898_119_732_502,
    0.799_727_835_821_839_083_013_668_942_322_683,
    0.767_777_432_104_826_194_917_977_340_974_503,
    0.733_790_062_453_226_804_726_171_131_369_528,
    0.697_850_494_793_315_796_932_292_388_026_640,
    0.660_061_064_126_626_961_370_053_668_149_271,
    0.620_526_182_989_242_861_140_477_556_431_189,
    0.579_345_235_826_361_691_756_024_932_172_540,
    0.536_624_148_142_019_899_264_169_793_311_073,
    0.492_480_467_861_778_574_993_693_061_207_709,
    0.447_033_769_538_089_176_780_609_900_322_854,
    0.400_401_254_830_394_392_535_476_211_542_661,
    0.352_704_725_530_878_113_471_037_207_089_374,
    0.304_073_202_273_625_077_372_677_107_199_257,
    0.254_636_926_167_889_846_439_805_129_817_805,
    0.204_525_116_682_309_891_438_957_671_002_025,
    0.153_869_913_608_583_546_963_794_672_743_256,
    0.102_806_937_966_737_030_147_096_751_318_001,
    0.051_471_842_555_317_695_833_025_213_166_723,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 15] = [
    0.007_968_192_496_166_605_615_465_883_474_674,
    0.018_466_468_311_090_959_142_302_131_912_047,
    0.028_784_707_883_323_369_349_719_179_611_292,
    0.038_799_192_569_627_049_596_801_936_446_348,
    0.048_402_672_830_594_052_902_938_140_422_808,
    0.057_493_156_217_619_066_481_721_689_402_056,
    0.065_974_229_882_180_495_128_128_515_115_962,
    0.073_755_974_737_705_206_268_243_850_022_191,
    0.080_755_895_229_420_215_354_694_938_460_530,
    0.086_899_787_201_082_979_802_387_530_715_126,
    0.092_122_522_237_786_128_717_632_707_087_619,
    0.096_368_737_174_644_259_639_468_626_351_810,
    0.099_593_420_586_795_267_062_780_282_103_569,
    0.101_762_389_748_405_504_596_428_952_168_554,
    0.102_852_652_893_558_840_341_285_636_705_415,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 31] = [
    0.001_389_013_698_677_007_624_551_591_226_760,
    0.003_890_461_127_099_884_051_267_201_844_516,
    0.006_630_703_915_931_292_173_319_826_369_750,
    0.009_273_279_659_517_763_428_441_146_892_024,
    0.011_823_015_253_496_341_742_232_898_853_251,
    0.014_369_729_507_045_804_812_451_432_443_580,
    0.016_920_889_189_053_272_627_572_289_420_322,
    0.019_414_141_193_942_381_173_408_951_050_128,
    0.021_828_035_821_609_192_297_167_485_738_339,
    0.024_191_162_078_080_601_365_686_370_725_232,
    0.026_509_954_882_333_101_610_601_709_335_075,
    0.028_754_048_765_041_292_843_978_785_354_334,
    0.030_907_257_562_387_762_472_884_252_943_092,
    0.032_981_447_057_483_726_031_814_191_016_854,
    0.034_979_338_028_060_024_137_499_670_731_468,
    0.036_882_364_651_821_229_223_911_065_617_136,
    0.038_678_945_624_727_592_950_348_651_532_281,
    0.040_374_538_951_535_959_111_995_279_752_468,
    0.041_969_810_215_164_246_147_147_541_285_970,
    0.043_452_539_701_356_069_316_831_728_117_073,
    0.044_814_800_133_162_663_192_355_551_616_723,
    0.046_059_238_271_006_988_116_271_735_559_374,
    0.047_185_546_569_299_153_945_261_478_181_099,
    0.048_185_861_757_087_129_140_779_492_298_305,
    0.049_055_434_555_029_778_887_528_165_367_238,
    0.049_795_683_427_074_206_357_811_569_379_942,
    0.050_405_921_402_782_346_840_893_085_653_585,
    0.050_881_795_898_749_606_492_297_473_049_805,
    0.051_221_547_849_258_772_170_656_282_604_944,
    0.051_426_128_537_459_025_933_862_879_215_781,
    0.051_494_729_429_451_567_558_340_433_647_099,
];

/// Accuracy targets for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-14,
            rel: 1e-10,
            max_panels: 10_000,
        }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self {
            rel,
            ..Self::default()
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

/// Value and error estimate of an adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Fixed 61-point rule on one panel: `(kronrod value, error estimate)`.
pub fn gk61<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gk61_abs(f, a, b);
    (v, e)
}

/// As [`gk61`], also returning the integral of `|f|`.
fn gk61_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[30] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 30];
    let mut fv2 = [0.0; 30];
    for j in 0..15 {
        let k = 2 * j + 1;
        let dx = half * XGK[k];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[k] = f1;
        fv2[k] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
    }
    for j in 0..15 {
        let k = 2 * j;
        let dx = half * XGK[k];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[k] = f1;
        fv2[k] = f2;
        res_k += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[30] * (fc - mean).abs();
    for k in 0..30 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }
    let err = ((res_k - res_g) * half).abs();
    let (res_abs, res_asc) = (res_abs * half.abs(), res_asc * half.abs());
    (res_k * half, rescale_error(err, res_abs, res_asc), res_abs)
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// Nodes and weights of the 61-point Kronrod rule mapped onto `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..61).map(move |i| {
        if i < 30 {
            (center - half * XGK[i], half * WGK[i])
        } else if i == 30 {
            (center, half * WGK[30])
        } else {
            let k = 60 - i;
            (center + half * XGK[k], half * WGK[k])
        }
    })
}

const ROUNDOFF: f64 = 60.0 * f64::EPSILON;

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]` adaptively.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_many(&f, &[a, b], tol)
}

/// Integrates over `[a, b]` with the given interior break points seeded as
/// initial panels. `points` must be sorted and have at least two entries.
pub fn integrate_many<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance) -> Result<Integral> {
    assert!(points.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err, mut total_abs) = (0.0, 0.0, 0.0);
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error, abs) = gk61_abs(f, w[0], w[1]);
        total += value;
        total_err += error;
        total_abs += abs;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            abs,
        });
    }
    let mut panels = heap.len();
    // Panels that cannot be split further in floating point.
    let mut frozen_err = 0.0;
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite integrand on [{}, {}]",
                points[0],
                points[points.len() - 1]
            )));
        }
        // Error estimates floor at 50·eps·∫|f| per panel; below that only
        // rounding remains.
        if total_err <= tol.abs.max(tol.rel * total.abs()).max(ROUNDOFF * total_abs) {
            return Ok(Integral {
                value: total,
                error: total_err,
                panels,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 4.0 * f64::EPSILON * mid.abs() {
            frozen_err += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if panels >= tol.max_panels {
            heap.push(worst);
            break;
        }
        let (v1, e1, a1) = gk61_abs(f, worst.a, mid);
        let (v2, e2, a2) = gk61_abs(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs: a1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs: a2,
        });
        panels += 1;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum::<f64>() + frozen_err;
    let abs: f64 = heap.iter().map(|p| p.abs).sum();
    if error <= tol.abs.max(tol.rel * value.abs()).max(ROUNDOFF * abs) {
        return Ok(Integral { value, error, panels });
    }
    Err(Error::Numerical(format!(
        "quadrature on [{}, {}] did not converge: value {value:e}, error estimate {error:e} after {panels} panels",
        points[0],
        points[points.len() - 1]
    )))
}

/// Integrates `f` over `[a, ∞)` through the map `x = a + t/(1-t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Integral> {
    integrate_to_infinity_scaled(f, a, 1.0, tol)
}

/// As [`integrate_to_infinity`] with `x = a + c·t/(1-t)`; `c` should be the
/// decay length of the integrand.
pub fn integrate_to_infinity_scaled<F: Fn(f64) -> f64>(f: F, a: f64, c: f64, tol: Tolerance) -> Result<Integral> {
    let g = |t: f64| {
        let s = 1.0 - t;
        let x = a + c * t / s;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            c * v / (s * s)
        }
    };
    integrate_many(&g, &[0.0, 0.5, 1.0], tol)
}
