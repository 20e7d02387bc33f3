//! Dormand–Prince 8(5,3) with the Hairer step-size controller, fixed-size
//! real state vectors and no dense output.

#![allow(clippy::excessive_precision)]

use crate::error::{GalError, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance { rtol: 1e-10, atol: 1e-12 };
}

const MAX_STEPS: usize = 200_000;
const SAFE: f64 = 0.9;
const MIN_SCALE: f64 = 0.333;
const MAX_SCALE: f64 = 6.0;

const C2: f64 = 0.526001519587677318785587544488e-01;
const C3: f64 = 0.789002279381515978178381316732e-01;
const C4: f64 = 0.118350341907227396726757197510e+00;
const C5: f64 = 0.281649658092772603273242802490e+00;
const C6: f64 = 0.333333333333333333333333333333e+00;
const C7: f64 = 0.25e+00;
const C8: f64 = 0.307692307692307692307692307692e+00;
const C9: f64 = 0.651282051282051282051282051282e+00;
const C10: f64 = 0.6e+00;
const C11: f64 = 0.857142857142857142857142857142e+00;

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

/// `y + h Σ c_i k_i`.
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn check<const N: usize>(x: f64, v: [f64; N]) -> Result<[f64; N]> {
    if v.iter().all(|t| t.is_finite()) {
        Ok(v)
    } else {
        Err(GalError::Integration { x, reason: "non-finite right-hand side".into() })
    }
}

fn initial_step<const N: usize, F>(f: &mut F, x: f64, y: &[f64; N], k1: &[f64; N], span: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let norm = |v: &[f64; N]| {
        let s: f64 = v
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a / (tol.atol + tol.rtol * b.abs())).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1 = comb(y, h0, &[(1.0, k1)]);
    let k2 = check(x + h0, f(x + h0, &y1))?;
    let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = norm(&diff) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(1.0 / 8.0) };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates `y' = f(x, y)` from `x0` to `x1 > x0`.
pub fn integrate<const N: usize, F>(mut f: F, x0: f64, x1: f64, y0: [f64; N], tol: Tolerance) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = x1 - x0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut k1 = check(x, f(x, &y))?;
    let mut h = initial_step(&mut f, x, &y, &k1, span, tol)?;
    let mut reject = false;
    for _ in 0..MAX_STEPS {
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        let k2 = check(x, f(x + C2 * h, &comb(&y, h, &[(A21, &k1)])))?;
        let k3 = check(x, f(x + C3 * h, &comb(&y, h, &[(A31, &k1), (A32, &k2)])))?;
        let k4 = check(x, f(x + C4 * h, &comb(&y, h, &[(A41, &k1), (A43, &k3)])))?;
        let k5 = check(x, f(x + C5 * h, &comb(&y, h, &[(A51, &k1), (A53, &k3), (A54, &k4)])))?;
        let k6 = check(x, f(x + C6 * h, &comb(&y, h, &[(A61, &k1), (A64, &k4), (A65, &k5)])))?;
        let k7 = check(x, f(x + C7 * h, &comb(&y, h, &[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)])))?;
        let k8 = check(
            x,
            f(x + C8 * h, &comb(&y, h, &[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)])),
        )?;
        let k9 = check(
            x,
            f(
                x + C9 * h,
                &comb(&y, h, &[(A91, &k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)]),
            ),
        )?;
        let k10 = check(
            x,
            f(
                x + C10 * h,
                &comb(
                    &y,
                    h,
                    &[(A101, &k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)],
                ),
            ),
        )?;
        let k11 = check(
            x,
            f(
                x + C11 * h,
                &comb(
                    &y,
                    h,
                    &[
                        (A111, &k1),
                        (A114, &k4),
                        (A115, &k5),
                        (A116, &k6),
                        (A117, &k7),
                        (A118, &k8),
                        (A119, &k9),
                        (A1110, &k10),
                    ],
                ),
            ),
        )?;
        let k12 = check(
            x,
            f(
                x + h,
                &comb(
                    &y,
                    h,
                    &[
                        (A121, &k1),
                        (A124, &k4),
                        (A125, &k5),
                        (A126, &k6),
                        (A127, &k7),
                        (A128, &k8),
                        (A129, &k9),
                        (A1210, &k10),
                        (A1211, &k11),
                    ],
                ),
            ),
        )?;
        let mut inc = [0.0; N];
        let mut err = 0.0;
        let mut err2 = 0.0;
        let mut y_new = [0.0; N];
        for i in 0..N {
            inc[i] = B1 * k1[i]
                + B6 * k6[i]
                + B7 * k7[i]
                + B8 * k8[i]
                + B9 * k9[i]
                + B10 * k10[i]
                + B11 * k11[i]
                + B12 * k12[i];
            y_new[i] = y[i] + h * inc[i];
            let sk = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            let e5 = inc[i] - BHH1 * k1[i] - BHH2 * k9[i] - BHH3 * k12[i];
            let e3 = ER1 * k1[i]
                + ER6 * k6[i]
                + ER7 * k7[i]
                + ER8 * k8[i]
                + ER9 * k9[i]
                + ER10 * k10[i]
                + ER11 * k11[i]
                + ER12 * k12[i];
            err += (e3 / sk).powi(2);
            err2 += (e5 / sk).powi(2);
        }
        let deno = err + 0.01 * err2;
        let deno = if deno > 0.0 { deno } else { 1.0 };
        let err = h.abs() * err * (1.0 / (N as f64 * deno)).sqrt();
        if !err.is_finite() {
            return Err(GalError::Integration { x, reason: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            x = if last { x1 } else { x + h };
            y = y_new;
            if last {
                return Ok(y);
            }
            k1 = check(x, f(x, &y))?;
            let scale = if err == 0.0 { MAX_SCALE } else { (SAFE * err.powf(-1.0 / 8.0)).clamp(MIN_SCALE, MAX_SCALE) };
            h *= if reject { scale.min(1.0) } else { scale };
            reject = false;
        } else {
            h *= MIN_SCALE.max(SAFE * err.powf(-1.0 / 8.0));
            reject = true;
        }
        if h < 1e-14 * x.abs().max(1.0) {
            return Err(GalError::Integration { x, reason: format!("step size underflow (h = {h:e})") });
        }
    }
    Err(GalError::Integration { x, reason: format!("more than {MAX_STEPS} steps") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_turn() {
        let y = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, 2.0 * std::f64::consts::PI, [1.0, 0.0], Tolerance::DEFAULT)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn exponential_growth() {
        let y = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, 3.0, [1.0], Tolerance::DEFAULT).unwrap();
        assert!((y[0] - 3f64.exp()).abs() < 1e-8 * 3f64.exp());
    }

    #[test]
    fn blow_up_reports_location() {
        let err = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, 2.0, [1.0], Tolerance::DEFAULT).unwrap_err();
        match err {
            GalError::Integration { x, .. } => assert!((x - 1.0).abs() < 1e-3, "x = {x}"),
            e => panic!("unexpected {e}"),
        }
    }
}
