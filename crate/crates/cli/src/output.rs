//! CSV writers. Every file starts with `# schema=1`; floats use `{:.17e}`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nlse_core::evolve::EvolutionState;
use nlse_core::grid::{integrate, l2_norm};
use nlse_core::{Evolution, PhysicalConstants, ScalarField};

pub const SCHEMA_LINE: &str = "# schema=1";

pub fn float(v: f64) -> String {
    format!("{v:.17e}")
}

pub struct CsvFile {
    inner: csv::Writer<BufWriter<File>>,
}

impl CsvFile {
    pub fn create(path: &Path, header: &[&str]) -> std::io::Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{SCHEMA_LINE}")?;
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, cells: &[String]) -> std::io::Result<()> {
        self.inner.write_record(cells)?;
        Ok(())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Optional observables columns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Columns {
    pub maxwell: bool,
    pub commuting: bool,
    pub gauss: bool,
}

impl Columns {
    pub fn header(self) -> Vec<&'static str> {
        let mut h = vec![
            "step",
            "time",
            "total_charge",
            "l2_norm_psi",
            "max_density",
            "min_density",
            "continuity_residual_l2",
        ];
        if self.maxwell {
            h.push("maxwell_residual_l2");
        }
        if self.commuting {
            h.push("commuting_discrepancy");
        }
        if self.gauss {
            h.push("gauss_residual_max");
        }
        h
    }
}

/// Values of the optional columns for one row.
#[derive(Clone, Copy, Debug, Default)]
pub struct Extras {
    pub maxwell: Option<f64>,
    pub commuting: Option<f64>,
    pub gauss: Option<f64>,
}

pub struct Observables {
    file: CsvFile,
    columns: Columns,
}

impl Observables {
    pub fn create(dir: &Path, columns: Columns) -> std::io::Result<Self> {
        Ok(Self {
            file: CsvFile::create(&dir.join("observables.csv"), &columns.header())?,
            columns,
        })
    }

    pub fn write(
        &mut self,
        evo: &Evolution,
        state: &EvolutionState,
        extras: Extras,
    ) -> Result<(), crate::run::RunError> {
        let rho = state.wave.density();
        let c = &evo.model.constants;
        let continuity = l2_norm(&evo.continuity_residual(state).map_err(crate::run::runtime("continuity residual"))?);
        let mut row = vec![
            state.step_count.to_string(),
            float(state.time),
            float(c.charge_e * integrate(&rho)),
            float(integrate(&rho).sqrt()),
            float(rho.max()),
            float(rho.min()),
            float(continuity),
        ];
        let nan = f64::NAN;
        if self.columns.maxwell {
            row.push(float(extras.maxwell.unwrap_or(nan)));
        }
        if self.columns.commuting {
            row.push(float(extras.commuting.unwrap_or(nan)));
        }
        if self.columns.gauss {
            row.push(float(extras.gauss.unwrap_or(nan)));
        }
        self.file.row(&row)?;
        Ok(())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.file.flush()
    }
}

/// Combined L2 norm of all residual components.
pub fn combined_l2(components: &[ScalarField]) -> f64 {
    components.iter().map(|r| l2_norm(r).powi(2)).sum::<f64>().sqrt()
}

/// `snapshot_<step>.csv` with `site_index, x [, y], rho, phase, re_psi,
/// im_psi, a0, a_x [, a_y]`. `phase` is `arg psi` in units of `hbar c / e`.
pub fn write_snapshot(dir: &Path, state: &EvolutionState, constants: &PhysicalConstants) -> std::io::Result<()> {
    let lat = *state.lattice();
    let two_d = lat.dim() == 2;
    let mut header = vec!["site_index", "x"];
    if two_d {
        header.push("y");
    }
    header.extend(["rho", "phase", "re_psi", "im_psi", "a0", "a_x"]);
    if two_d {
        header.push("a_y");
    }
    let mut f = CsvFile::create(&dir.join(format!("snapshot_{}.csv", state.step_count)), &header)?;
    let unit = constants.phase_unit();
    for (i, psi) in state.wave.psi.values().iter().enumerate() {
        let x = lat.position(i);
        let mut row = vec![i.to_string(), float(x[0])];
        if two_d {
            row.push(float(x[1]));
        }
        row.extend([
            float(psi.norm_sqr()),
            float(unit * psi.arg()),
            float(psi.re),
            float(psi.im),
            float(state.gauge.a0.get(i)),
            float(state.gauge.avec.component(0).get(i)),
        ]);
        if two_d {
            row.push(float(state.gauge.avec.component(1).get(i)));
        }
        f.row(&row)?;
    }
    f.flush()
}
