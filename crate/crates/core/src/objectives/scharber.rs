//! Scharber model for single-junction organic solar cells.

use alloc::vec::Vec;

const PLANCK: f64 = 6.626_070_15e-34;
const LIGHT_SPEED: f64 = 2.997_924_58e8;
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScharberError {
    #[error("spectrum malformed: {0}")]
    SpectrumMalformed(&'static str),
    #[error("surrogate fit diverged: {0}")]
    FitDiverged(&'static str),
}

/// Tabulated solar irradiance: wavelength in nm, irradiance in W m⁻² nm⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    wavelength_nm: Vec<f64>,
    irradiance: Vec<f64>,
}

impl Spectrum {
    pub fn new(wavelength_nm: Vec<f64>, irradiance: Vec<f64>) -> Result<Spectrum, ScharberError> {
        if wavelength_nm.len() != irradiance.len() {
            return Err(ScharberError::SpectrumMalformed("column lengths differ"));
        }
        if wavelength_nm.len() < 2 {
            return Err(ScharberError::SpectrumMalformed("fewer than two samples"));
        }
        if wavelength_nm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ScharberError::SpectrumMalformed("wavelengths not strictly increasing"));
        }
        if wavelength_nm.iter().chain(&irradiance).any(|v| !v.is_finite())
            || irradiance.iter().any(|&v| v < 0.0)
        {
            return Err(ScharberError::SpectrumMalformed("non-finite or negative value"));
        }
        if wavelength_nm[0] > 280.0 || *wavelength_nm.last().unwrap() < 4000.0 {
            return Err(ScharberError::SpectrumMalformed("does not cover 280-4000 nm"));
        }
        Ok(Spectrum {
            wavelength_nm,
            irradiance,
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelength_nm
    }

    pub fn irradiance(&self) -> &[f64] {
        &self.irradiance
    }

    /// Incident power over the whole table, mW cm⁻².
    pub fn total_power_mw_cm2(&self) -> f64 {
        trapezoid(&self.wavelength_nm, &self.irradiance) / 10.0
    }

    /// q · eqe · (photon flux above `gap_ev`), mA cm⁻², by the trapezoidal
    /// rule over the tabulated wavelengths not longer than the band edge.
    pub fn jsc_integral(&self, gap_ev: f64, eqe: f64) -> f64 {
        let edge_nm = PLANCK * LIGHT_SPEED / (gap_ev * ELEMENTARY_CHARGE) * 1e9;
        let n = self.wavelength_nm.partition_point(|&w| w <= edge_nm);
        let flux: Vec<f64> = self.wavelength_nm[..n]
            .iter()
            .zip(&self.irradiance[..n])
            .map(|(&w, &i)| i * w * 1e-9 / (PLANCK * LIGHT_SPEED))
            .collect();
        ELEMENTARY_CHARGE * eqe * trapezoid(&self.wavelength_nm[..n], &flux) / 10.0
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Parameters of `J_SC(E_G) = A · exp(−E_G² / B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JscFit {
    /// mA cm⁻².
    pub a: f64,
    /// eV².
    pub b: f64,
    /// Largest |fit − integral| / integral over the 1–4 eV check grid.
    pub max_rel_error: f64,
}

impl JscFit {
    pub fn eval(&self, gap_ev: f64) -> f64 {
        self.a * libm::exp(-gap_ev * gap_ev / self.b)
    }
}

/// Band gaps used for fitting and for the error check, eV.
pub fn fit_grid() -> impl Iterator<Item = f64> {
    (0..=300).map(|i| 1.0 + i as f64 * 0.01)
}

/// Least-squares fit of the Gaussian surrogate to integrated currents on
/// the 1–4 eV grid (Levenberg-Marquardt, seeded by a log-linear fit).
pub fn fit_jsc_surrogate(spectrum: &Spectrum, eqe: f64) -> Result<JscFit, ScharberError> {
    if !(eqe > 0.0 && eqe <= 1.0) {
        return Err(ScharberError::FitDiverged("eqe must lie in (0, 1]"));
    }
    let xs: Vec<f64> = fit_grid().collect();
    let ys: Vec<f64> = xs.iter().map(|&e| spectrum.jsc_integral(e, eqe)).collect();
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(ScharberError::FitDiverged("integrated current vanishes on the grid"));
    }
    let (mut a, mut b) = log_linear_seed(&xs, &ys)?;
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = a * libm::exp(-x * x / b) - y;
                r * r
            })
            .sum()
    };
    let mut lambda = 1e-3;
    let mut current = sse(a, b);
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            let g = libm::exp(-x * x / b);
            let r = a * g - y;
            let j = [g, a * g * x * x / (b * b)];
            for p in 0..2 {
                jtr[p] += j[p] * r;
                for q in 0..2 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let m = [
                [jtj[0][0] * (1.0 + lambda), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + lambda)],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let da = -(m[1][1] * jtr[0] - m[0][1] * jtr[1]) / det;
            let db = -(m[0][0] * jtr[1] - m[1][0] * jtr[0]) / det;
            let (na, nb) = (a + da, b + db);
            if nb > 0.0 && na.is_finite() && nb.is_finite() {
                let candidate = sse(na, nb);
                if candidate < current {
                    let rel_step = (da / a).abs().max((db / b).abs());
                    a = na;
                    b = nb;
                    current = candidate;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    if rel_step < 1e-13 {
                        return finish(a, b, &xs, &ys);
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    finish(a, b, &xs, &ys)
}

fn finish(a: f64, b: f64, xs: &[f64], ys: &[f64]) -> Result<JscFit, ScharberError> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(ScharberError::FitDiverged("non-physical parameters"));
    }
    let mut fit = JscFit {
        a,
        b,
        max_rel_error: 0.0,
    };
    fit.max_rel_error = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| ((fit.eval(x) - y) / y).abs())
        .fold(0.0, f64::max);
    Ok(fit)
}

// ln J = ln A − E²/B is linear in E².
fn log_linear_seed(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), ScharberError> {
    let n = xs.len() as f64;
    let u: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let v: Vec<f64> = ys.iter().map(|&y| libm::log(y)).collect();
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let sxy: f64 = u.iter().zip(&v).map(|(a, b)| (a - mu) * (b - mv)).sum();
    let sxx: f64 = u.iter().map(|a| (a - mu) * (a - mu)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(ScharberError::FitDiverged("current does not decay with the gap"));
    }
    Ok((libm::exp(mv - slope * mu), -1.0 / slope))
}

/// Which gap sets the absorption edge for `J_SC`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapMode {
    /// The absorbing molecule's own HOMO-LUMO gap.
    #[default]
    Absorber,
    /// Donor HOMO to acceptor LUMO.
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceMode {
    /// The molecule is the donor, paired with a PCBM acceptor.
    DonorPcbm,
    /// The molecule is the acceptor, paired with a PCDTBT donor.
    AcceptorPcdtbt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScharberConfig {
    /// mA cm⁻².
    pub a: f64,
    /// eV².
    pub b: f64,
    /// mW cm⁻².
    pub p_in: f64,
    pub fill_factor: f64,
    pub eqe: f64,
    pub overpotential_ev: f64,
    pub acceptor_lumo_ev: f64,
    pub donor_homo_ev: f64,
    /// (slope, intercept eV) applied to raw HOMO energies.
    pub calib_homo: (f64, f64),
    pub calib_lumo: (f64, f64),
    pub gap_mode: GapMode,
}

impl ScharberConfig {
    pub fn new(a: f64, b: f64, p_in: f64) -> ScharberConfig {
        ScharberConfig {
            a,
            b,
            p_in,
            fill_factor: 0.65,
            eqe: 0.65,
            overpotential_ev: 0.3,
            acceptor_lumo_ev: -4.3,
            donor_homo_ev: -5.5,
            calib_homo: (0.8051, 2.5377),
            calib_lumo: (0.8788, 3.7913),
            gap_mode: GapMode::Absorber,
        }
    }

    /// Fits the surrogate and incident power from `spectrum` with the
    /// default quantum efficiency.
    pub fn from_spectrum(spectrum: &Spectrum) -> Result<(ScharberConfig, JscFit), ScharberError> {
        let probe = ScharberConfig::new(1.0, 1.0, 1.0);
        let fit = fit_jsc_surrogate(spectrum, probe.eqe)?;
        Ok((ScharberConfig::new(fit.a, fit.b, spectrum.total_power_mw_cm2()), fit))
    }

    pub fn jsc(&self, gap_ev: f64) -> f64 {
        self.a * libm::exp(-gap_ev * gap_ev / self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierEnergies {
    pub homo_ev: f64,
    pub lumo_ev: f64,
    pub gap_ev: f64,
    pub dipole_debye: f64,
}

impl FrontierEnergies {
    pub fn new(homo_ev: f64, lumo_ev: f64, dipole_debye: f64) -> FrontierEnergies {
        FrontierEnergies {
            homo_ev,
            lumo_ev,
            gap_ev: lumo_ev - homo_ev,
            dipole_debye,
        }
    }
}

pub fn calibrate(e: &FrontierEnergies, cfg: &ScharberConfig) -> FrontierEnergies {
    let homo = e.homo_ev * cfg.calib_homo.0 + cfg.calib_homo.1;
    let lumo = e.lumo_ev * cfg.calib_lumo.0 + cfg.calib_lumo.1;
    FrontierEnergies::new(homo, lumo, e.dipole_debye)
}

/// Open-circuit voltage in V with both clamps applied.
pub fn open_circuit_voltage(e: &FrontierEnergies, mode: DeviceMode, cfg: &ScharberConfig) -> f64 {
    let voc = match mode {
        DeviceMode::DonorPcbm => {
            if e.lumo_ev - cfg.acceptor_lumo_ev < cfg.overpotential_ev {
                return 0.0;
            }
            cfg.acceptor_lumo_ev - e.homo_ev - cfg.overpotential_ev
        }
        DeviceMode::AcceptorPcdtbt => e.lumo_ev - cfg.donor_homo_ev - cfg.overpotential_ev,
    };
    voc.max(0.0)
}

fn absorption_gap(e: &FrontierEnergies, mode: DeviceMode, cfg: &ScharberConfig) -> f64 {
    match (cfg.gap_mode, mode) {
        (GapMode::Absorber, _) => e.gap_ev,
        (GapMode::Interface, DeviceMode::DonorPcbm) => cfg.acceptor_lumo_ev - e.homo_ev,
        (GapMode::Interface, DeviceMode::AcceptorPcdtbt) => e.lumo_ev - cfg.donor_homo_ev,
    }
}

/// Power conversion efficiency in percent, from calibrated energies.
pub fn scharber_pce(e: &FrontierEnergies, mode: DeviceMode, cfg: &ScharberConfig) -> f64 {
    let voc = open_circuit_voltage(e, mode, cfg);
    let jsc = cfg.jsc(absorption_gap(e, mode, cfg));
    100.0 * voc * cfg.fill_factor * jsc / cfg.p_in
}
