//! Dormand-Prince 8(5,3) with Hairer's step size control, autonomous
//! right-hand sides only.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::numerics::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-12,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub y: Vector,
    pub steps: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(y)` from time 0 to `t_end` (either sign).
pub fn integrate<F>(mut f: F, y0: &Vector, t_end: f64, tol: &OdeTolerances) -> Result<Integration>
where
    F: FnMut(&Vector) -> Vector,
{
    if !t_end.is_finite() {
        return Err(Error::BlowUp { t: t_end });
    }
    if t_end == 0.0 || y0.is_empty() {
        return Ok(Integration {
            y: y0.clone(),
            steps: 0,
            rejected: 0,
        });
    }
    let dir = t_end.signum();
    let hmax = t_end.abs();
    let n = y0.len() as f64;

    let mut y = y0.clone();
    let mut k1 = f(&y);
    check_finite(&k1, 0.0)?;
    let mut h = dir * initial_step(&mut f, &y, &k1, hmax, tol);
    let mut t = 0.0;
    let mut steps = 0;
    let mut rejected = 0;
    let mut last_rejected = false;

    loop {
        let mut last = false;
        if (t + 1.01 * h - t_end) * dir > 0.0 {
            h = t_end - t;
            last = true;
        }
        if h.abs() < 1e-14 * t_end.abs() {
            return Err(Error::Stiffness { t, h });
        }
        if steps + rejected >= tol.max_steps {
            return Err(Error::Stiffness { t, h });
        }

        let stage = |coeffs: &[(f64, &Vector)]| -> Vector {
            let mut acc = y.clone();
            for (c, k) in coeffs {
                acc.axpy(h * c, k, 1.0);
            }
            acc
        };
        let k2 = f(&stage(&[(A21, &k1)]));
        let k3 = f(&stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = f(&stage(&[(A41, &k1), (A43, &k3)]));
        let k5 = f(&stage(&[(A51, &k1), (A53, &k3), (A54, &k4)]));
        let k6 = f(&stage(&[(A61, &k1), (A64, &k4), (A65, &k5)]));
        let k7 = f(&stage(&[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
        let k8 = f(&stage(&[
            (A81, &k1),
            (A84, &k4),
            (A85, &k5),
            (A86, &k6),
            (A87, &k7),
        ]));
        let k9 = f(&stage(&[
            (A91, &k1),
            (A94, &k4),
            (A95, &k5),
            (A96, &k6),
            (A97, &k7),
            (A98, &k8),
        ]));
        let k10 = f(&stage(&[
            (A101, &k1),
            (A104, &k4),
            (A105, &k5),
            (A106, &k6),
            (A107, &k7),
            (A108, &k8),
            (A109, &k9),
        ]));
        let k11 = f(&stage(&[
            (A111, &k1),
            (A114, &k4),
            (A115, &k5),
            (A116, &k6),
            (A117, &k7),
            (A118, &k8),
            (A119, &k9),
            (A1110, &k10),
        ]));
        let k12 = f(&stage(&[
            (A121, &k1),
            (A124, &k4),
            (A125, &k5),
            (A126, &k6),
            (A127, &k7),
            (A128, &k8),
            (A129, &k9),
            (A1210, &k10),
            (A1211, &k11),
        ]));

        let mut slope = &k1 * B1;
        for (c, k) in [
            (B6, &k6),
            (B7, &k7),
            (B8, &k8),
            (B9, &k9),
            (B10, &k10),
            (B11, &k11),
            (B12, &k12),
        ] {
            slope.axpy(c, k, 1.0);
        }
        let y_new = &y + &slope * h;
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t: t + h });
        }

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..y.len() {
            let sk = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            let e3 = slope[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
            let e5 = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i];
            err3 += (e3 / sk) * (e3 / sk);
            err5 += (e5 / sk) * (e5 / sk);
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err5 * (1.0 / (n * deno)).sqrt();
        if !err.is_finite() {
            return Err(Error::BlowUp { t: t + h });
        }

        let fac11 = err.powf(1.0 / 8.0);
        if err <= 1.0 {
            steps += 1;
            t += h;
            y = y_new;
            if last || (t - t_end) * dir >= 0.0 {
                return Ok(Integration { y, steps, rejected });
            }
            k1 = f(&y);
            check_finite(&k1, t)?;
            let fac = (fac11 / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if h_new.abs() > hmax {
                h_new = dir * hmax;
            }
            if last_rejected && h_new.abs() > h.abs() {
                h_new = h;
            }
            last_rejected = false;
            h = h_new;
        } else {
            rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
        }
    }
}

fn check_finite(v: &Vector, t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::BlowUp { t })
    }
}

fn initial_step<F>(f: &mut F, y0: &Vector, f0: &Vector, hmax: f64, tol: &OdeTolerances) -> f64
where
    F: FnMut(&Vector) -> Vector,
{
    let sk = |i: usize| tol.abs + tol.rel * y0[i].abs();
    let dnf: f64 = (0..y0.len()).map(|i| (f0[i] / sk(i)).powi(2)).sum();
    let dny: f64 = (0..y0.len()).map(|i| (y0[i] / sk(i)).powi(2)).sum();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(hmax);
    let y1 = y0 + f0 * h;
    let f1 = f(&y1);
    let der2 = (0..y0.len())
        .map(|i| ((f1[i] - f0[i]) / sk(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    (100.0 * h).min(h1).min(hmax)
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

const A21: f64 = 5.26001519587677318785587544488e-2;
const A31: f64 = 1.97250569845378994544595329183e-2;
const A32: f64 = 5.91751709536136983633785987549e-2;
const A41: f64 = 2.95875854768068491816892993775e-2;
const A43: f64 = 8.87627564304205475450678981324e-2;
const A51: f64 = 2.41365134159266685502369798665e-1;
const A53: f64 = -8.84549479328286085344864962717e-1;
const A54: f64 = 9.24834003261792003115737966543e-1;
const A61: f64 = 3.7037037037037037037037037037e-2;
const A64: f64 = 1.70828608729473871279604482173e-1;
const A65: f64 = 1.25467687566822425016691814123e-1;
const A71: f64 = 3.7109375e-2;
const A74: f64 = 1.70252211019544039314978060272e-1;
const A75: f64 = 6.02165389804559606850219397283e-2;
const A76: f64 = -1.7578125e-2;
const A81: f64 = 3.70920001185047927108779319836e-2;
const A84: f64 = 1.70383925712239993810214054705e-1;
const A85: f64 = 1.07262030446373284651809199168e-1;
const A86: f64 = -1.53194377486244017527936158236e-2;
const A87: f64 = 8.27378916381402288758473766002e-3;
const A91: f64 = 6.24110958716075717114429577812e-1;
const A94: f64 = -3.36089262944694129406857109825e0;
const A95: f64 = -8.68219346841726006818189891453e-1;
const A96: f64 = 2.75920996994467083049415600797e1;
const A97: f64 = 2.01540675504778934086186788979e1;
const A98: f64 = -4.34898841810699588477366255144e1;
const A101: f64 = 4.77662536438264365890433908527e-1;
const A104: f64 = -2.48811461997166764192642586468e0;
const A105: f64 = -5.90290826836842996371446475743e-1;
const A106: f64 = 2.12300514481811942347288949897e1;
const A107: f64 = 1.52792336328824235832596922938e1;
const A108: f64 = -3.32882109689848629194453265587e1;
const A109: f64 = -2.03312017085086261358222928593e-2;
const A111: f64 = -9.3714243008598732571704021658e-1;
const A114: f64 = 5.18637242884406370830023853209e0;
const A115: f64 = 1.09143734899672957818500254654e0;
const A116: f64 = -8.14978701074692612513997267357e0;
const A117: f64 = -1.85200656599969598641566180701e1;
const A118: f64 = 2.27394870993505042818970056734e1;
const A119: f64 = 2.49360555267965238987089396762e0;
const A1110: f64 = -3.0467644718982195003823669022e0;
const A121: f64 = 2.27331014751653820792359768449e0;
const A124: f64 = -1.05344954667372501984066689879e1;
const A125: f64 = -2.00087205822486249909675718444e0;
const A126: f64 = -1.79589318631187989172765950534e1;
const A127: f64 = 2.79488845294199600508499808837e1;
const A128: f64 = -2.85899827713502369474065508674e0;
const A129: f64 = -8.87285693353062954433549289258e0;
const A1210: f64 = 1.23605671757943030647266201528e1;
const A1211: f64 = 6.43392746015763530355970484046e-1;

const B1: f64 = 5.42937341165687622380535766363e-2;
const B6: f64 = 4.45031289275240888144113950566e0;
const B7: f64 = 1.89151789931450038304281599044e0;
const B8: f64 = -5.8012039600105847814672114227e0;
const B9: f64 = 3.1116436695781989440891606237e-1;
const B10: f64 = -1.52160949662516078556178806805e-1;
const B11: f64 = 2.01365400804030348374776537501e-1;
const B12: f64 = 4.47106157277725905176885569043e-2;

const BHH1: f64 = 0.244094488188976377952755905512e+00;
const BHH2: f64 = 0.733846688281611857341361741547e+00;
const BHH3: f64 = 0.220588235294117647058823529412e-01;

const ER1: f64 = 0.1312004499419488073250102996e-01;
const ER6: f64 = -0.1225156446376204440720569753e+01;
const ER7: f64 = -0.4957589496572501915214079952e+00;
const ER8: f64 = 0.1664377182454986536961530415e+01;
const ER9: f64 = -0.3503288487499736816886487290e+00;
const ER10: f64 = 0.3341791187130174790297318841e+00;
const ER11: f64 = 0.8192320648511571246570742613e-01;
const ER12: f64 = -0.2235530786388629525884427845e-01;
