//! Closed-form band edges of the four table families.

use crate::catalog::{
    as_index, dedupe_states, delta_values, qes_spectrum_general, reflections, sort_states, QesState, Sector,
};
use crate::elliptic::{ModulusM, C64};
use crate::error::{GalError, Result};
use crate::gal::GalSpec;

/// One table row: energy and φ = sector · Σ coeff_k sn^2k.
struct Row {
    tag: String,
    energy: C64,
    sector: Sector,
    poly: Vec<C64>,
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn push_pm(rows: &mut Vec<Row>, tag: &str, center: f64, delta: C64, sector: Sector, poly: impl Fn(C64) -> Vec<C64>) {
    for (sgn, name) in [(1.0, "+"), (-1.0, "-")] {
        let e = re(center) + 2.0 * sgn * delta;
        rows.push(Row { tag: format!("{tag}{name}"), energy: e, sector, poly: poly(e) });
    }
}

fn single(tag: &str, e: f64, sector: Sector) -> Row {
    Row { tag: tag.to_string(), energy: re(e), sector, poly: vec![re(1.0)] }
}

fn table1(a: f64, n: usize, m: f64, d: &crate::catalog::DeltaSet) -> Vec<Row> {
    let sq = |x: f64| x * x;
    let mut rows = Vec::new();
    match n {
        0 => rows.push(single("table1:n=0", -(1.0 + m) * a * a, Sector::EMPTY)),
        1 => {
            rows.push(single("table1:n=1:cn", -a * a - m * sq(a - 1.0), Sector::C));
            rows.push(single("table1:n=1:dn", -sq(a - 1.0) - m * a * a, Sector::D));
        }
        2 => {
            rows.push(single("table1:n=2:cn*dn", -(1.0 + m) * sq(a - 1.0), Sector::CD));
            push_pm(&mut rows, "table1:n=2:", -(1.0 + m) * (a * a - 2.0 * a + 2.0), d.get(1), Sector::EMPTY, |e| {
                vec![re(2.0 * (2.0 * a - 3.0)), e + (1.0 + m) * sq(a - 2.0)]
            });
        }
        3 => {
            push_pm(
                &mut rows,
                "table1:n=3:cn",
                -(a * a - 2.0 * a + 2.0) - (a * a - 4.0 * a + 5.0) * m,
                d.get(2),
                Sector::C,
                |e| vec![re(2.0 * (2.0 * a - 5.0)), e + sq(a - 2.0) + m * sq(a - 3.0)],
            );
            push_pm(
                &mut rows,
                "table1:n=3:dn",
                -(a * a - 4.0 * a + 5.0) - (a * a - 2.0 * a + 2.0) * m,
                d.get(3),
                Sector::D,
                |e| vec![re(2.0 * (2.0 * a - 5.0)), e + sq(a - 3.0) + m * sq(a - 2.0)],
            );
        }
        4 => push_pm(&mut rows, "table1:n=4:cn*dn", -(1.0 + m) * (a * a - 4.0 * a + 5.0), d.get(4), Sector::CD, |e| {
            vec![re(2.0 * (2.0 * a - 7.0)), e + (1.0 + m) * sq(a - 3.0)]
        }),
        _ => {}
    }
    rows
}

fn table2(a: f64, n: usize, m: f64, d: &crate::catalog::DeltaSet) -> Vec<Row> {
    let sq = |x: f64| x * x;
    let mut rows = Vec::new();
    match n {
        0 => rows.push(single("table2:n=0", -a * a, Sector::EMPTY)),
        1 => {
            rows.push(single("table2:n=1:sn", -a * a - m, Sector::S));
            rows.push(single("table2:n=1:dn", -sq(a - 1.0) - m, Sector::D));
        }
        2 => {
            rows.push(single("table2:n=2:sn*dn", -sq(a - 1.0) - 4.0 * m, Sector::SD));
            push_pm(&mut rows, "table2:n=2:", -(a * a + 2.0 - 2.0 * a + 2.0 * m), d.get(5), Sector::EMPTY, |e| {
                vec![re(2.0), e + sq(a - 2.0)]
            });
        }
        3 => {
            push_pm(&mut rows, "table2:n=3:sn", -(a * a + 2.0 - 2.0 * a + 5.0 * m), d.get(6), Sector::S, |e| {
                vec![re(6.0), e + sq(a - 2.0) + m]
            });
            push_pm(&mut rows, "table2:n=3:dn", -(a * a + 5.0 - 4.0 * a + 5.0 * m), d.get(7), Sector::D, |e| {
                vec![re(2.0), e + sq(a - 3.0) + m]
            });
        }
        4 => push_pm(&mut rows, "table2:n=4:sn*dn", -(a * a + 5.0 - 4.0 * a + 10.0 * m), d.get(8), Sector::SD, |e| {
            vec![re(6.0), e + sq(a - 3.0) + 4.0 * m]
        }),
        _ => {}
    }
    rows
}

fn table3(a: f64, b: f64, n: usize, m: f64, d: &crate::catalog::DeltaSet) -> Vec<Row> {
    let sq = |x: f64| x * x;
    let mut rows = Vec::new();
    match n {
        0 => rows.push(single("table3:n=0", -sq(a + b) - m * a * a, Sector::EMPTY)),
        1 => rows.push(single("table3:n=1:cn", -sq(a + b) - m * sq(a - 1.0), Sector::C)),
        2 => push_pm(&mut rows, "table3:n=2:", -(1.0 + m) - sq(a + b - 1.0) - m * sq(a - 1.0), d.get(9), Sector::EMPTY, |e| {
            vec![re(2.0 * (2.0 * a + 2.0 * b - 3.0)), e + sq(a + b - 2.0) + m * sq(a - 2.0)]
        }),
        3 => push_pm(&mut rows, "table3:n=3:cn", -(1.0 + m) - sq(a + b - 1.0) - m * sq(a - 2.0), d.get(10), Sector::C, |e| {
            vec![re(2.0 * (2.0 * a + 2.0 * b - 5.0)), e + sq(a + b - 2.0) + m * sq(a - 3.0)]
        }),
        _ => {}
    }
    rows
}

fn table4(a: f64, b: f64, g: f64, n: usize, m: f64, d: &crate::catalog::DeltaSet) -> Vec<Row> {
    let sq = |x: f64| x * x;
    let mut rows = Vec::new();
    match n {
        0 => rows.push(single("table4:n=0", -sq(a + b) - m * sq(g + b), Sector::EMPTY)),
        1 => push_pm(
            &mut rows,
            "table4:n=1:",
            -sq(a + b - 1.0) - m * sq(b + g - 1.0) - (1.0 + m),
            d.get(11),
            Sector::EMPTY,
            |e| vec![re(-2.0 * (2.0 * g - 1.0)), e + sq(a + b - 2.0) + m * sq(b + g)],
        ),
        _ => {}
    }
    rows
}

/// Rows of every table family matched by one parameter representation.
fn rows_for(rep: [f64; 4], m: f64) -> Vec<Row> {
    let [a, b, f, g] = rep;
    let d = delta_values(a, b, g, ModulusM::new(m).expect("valid modulus"));
    let mut rows = Vec::new();
    if b == 0.0 && f == 0.0 {
        if let Some(n) = as_index(a + g).filter(|&n| n <= 4) {
            rows.extend(table1(a, n, m, &d));
        }
    }
    if b == 0.0 && g == 0.0 {
        if let Some(n) = as_index(a + f).filter(|&n| n <= 4) {
            rows.extend(table2(a, n, m, &d));
        }
    }
    if f == 0.0 {
        if let Some(n) = as_index(a + b + g).filter(|&n| n <= 3) {
            rows.extend(table3(a, b, n, m, &d));
        }
    }
    if let Some(twice) = as_index(a + b + f + g) {
        if twice % 2 == 0 && twice / 2 <= 1 {
            rows.extend(table4(a, b, g, twice / 2, m, &d));
        }
    }
    rows
}

/// Table states of `spec` read literally, without reflections or
/// deduplication. Each state lives in the representation `spec` itself.
pub fn table_states(spec: &GalSpec) -> Vec<QesState> {
    let rep = spec.params();
    let [_, b, f, g] = rep;
    rows_for(rep, spec.m.value())
        .into_iter()
        .map(|row| QesState::new(row.energy, [-g, -f, -b], row.sector, row.poly, row.tag))
        .collect()
}

/// Every table state of `spec`, over all sixteen reflection representations.
pub fn closed_form_edges(spec: &GalSpec) -> Result<Vec<QesState>> {
    let mut states = Vec::new();
    for rep in reflections(spec.params()) {
        let rs = GalSpec::from_params(rep, spec.m.value())?.with_beta(spec.beta)?;
        states.extend(table_states(&rs));
    }
    if states.is_empty() {
        return Err(GalError::Unsupported(format!(
            "{spec} matches no closed-form table family; use qes_spectrum_general"
        )));
    }
    let mut states = dedupe_states(states, spec);
    sort_states(&mut states);
    Ok(states)
}

/// The nine band edges of `[20,0,0,0]`: six in closed form, three from the
/// cubic of the sector-free collocation problem.
pub fn lame_a4_edges(m: ModulusM) -> Result<Vec<QesState>> {
    let spec = GalSpec::lame(4.0, m.value())?;
    let mv = m.value();
    let mut states = Vec::new();
    let closed: [(f64, f64, [f64; 4], &str); 3] = [
        (-5.0 * (mv + 2.0), 2.0 * (4.0 * mv * mv - 9.0 * mv + 9.0).sqrt(), [4.0, 0.0, -1.0, -1.0], "lame4:sn*cn"),
        (-5.0 * (1.0 + mv), 2.0 * (4.0 * mv * mv + mv + 4.0).sqrt(), [4.0, -1.0, -1.0, 0.0], "lame4:cn*dn"),
        (-5.0 * (1.0 + 2.0 * mv), 2.0 * (9.0 * mv * mv - 9.0 * mv + 4.0).sqrt(), [4.0, -1.0, 0.0, -1.0], "lame4:sn*dn"),
    ];
    // Each closed pair spans a two-dimensional problem; the eigenvector comes
    // from the collocation solver, the energy from the formula.
    for (center, half, rep, tag) in closed {
        let rep = GalSpec::from_params(rep, mv)?;
        let found = qes_spectrum_general(&rep, Sector::EMPTY, 2)?;
        for (sgn, name) in [(-1.0, "-"), (1.0, "+")] {
            let e = center + sgn * half;
            let Some(st) = found.iter().find(|s| (s.energy - e).norm() < 1e-8 * (1.0 + e.abs())) else {
                return Err(GalError::Verification(format!("closed-form edge {e} not reproduced")));
            };
            let mut st = st.clone();
            st.energy = C64::new(e, 0.0);
            st.provenance = format!("{tag}{name}");
            states.push(st);
        }
    }
    for mut st in qes_spectrum_general(&spec, Sector::EMPTY, 3)? {
        st.provenance = "lame4:cubic".to_string();
        states.push(st);
    }
    sort_states(&mut states);
    Ok(states)
}
