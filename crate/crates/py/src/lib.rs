//! Python bindings for the spin-wave NOON simulator.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use swnoon_core::blockade::{decay_rate_from_lifetime, mhz_to_angular};
use swnoon_core::budget::{self, RabiBrackets};
use swnoon_core::error::Error;
use swnoon_core::experiment::{self, EnsembleSpec, FeasibilityTargets};
use swnoon_core::fringe::{self, CountSample};
use swnoon_core::pulse::{self, noon_arm_weights};
use swnoon_core::state::{CollectiveState, ModeLabel};
use swnoon_core::wave::{PulseWaveVectors, WaveVector};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidOrder(_) | Error::UnknownTransition(_) | Error::InvalidParameter { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Wave vectors (rad/μm) of the four pulses.
#[pyclass(name = "PulseWaveVectors", from_py_object)]
#[derive(Clone)]
struct PyWaves(PulseWaveVectors);

#[pymethods]
impl PyWaves {
    #[new]
    #[pyo3(signature = (gr_a=None, ra_sa=None, gr_b=None, rb_sb=None))]
    fn new(
        gr_a: Option<[f64; 3]>,
        ra_sa: Option<[f64; 3]>,
        gr_b: Option<[f64; 3]>,
        rb_sb: Option<[f64; 3]>,
    ) -> PyResult<Self> {
        let d = PulseWaveVectors::default();
        let pick = |v: Option<[f64; 3]>, dflt: WaveVector| v.map(WaveVector::from).unwrap_or(dflt);
        let w = PulseWaveVectors::new(
            pick(gr_a, d.gr_a),
            pick(ra_sa, d.ra_sa),
            pick(gr_b, d.gr_b),
            pick(rb_sb, d.rb_sb),
        );
        if !w.is_finite() {
            return Err(PyValueError::new_err("wave vectors must be finite"));
        }
        Ok(PyWaves(w))
    }

    #[getter]
    fn gr_a(&self) -> [f64; 3] {
        self.0.gr_a.to_array()
    }

    #[getter]
    fn ra_sa(&self) -> [f64; 3] {
        self.0.ra_sa.to_array()
    }

    #[getter]
    fn gr_b(&self) -> [f64; 3] {
        self.0.gr_b.to_array()
    }

    #[getter]
    fn rb_sb(&self) -> [f64; 3] {
        self.0.rb_sb.to_array()
    }

    /// Effective interferometer wave vector.
    fn delta_k(&self) -> [f64; 3] {
        self.0.delta_k().to_array()
    }

    fn __repr__(&self) -> String {
        format!(
            "PulseWaveVectors(gr_a={:?}, ra_sa={:?}, gr_b={:?}, rb_sb={:?})",
            self.gr_a(),
            self.ra_sa(),
            self.gr_b(),
            self.rb_sb()
        )
    }
}

fn waves_or_default(w: Option<PyRef<'_, PyWaves>>) -> PulseWaveVectors {
    w.map(|w| w.0).unwrap_or_default()
}

/// Result of the ideal generation sequence.
#[pyclass(name = "NoonState", frozen, skip_from_py_object)]
struct PyNoonState {
    #[pyo3(get)]
    order: u32,
    #[pyo3(get)]
    pulses: usize,
    #[pyo3(get)]
    noon_overlap: f64,
    #[pyo3(get)]
    noon_subspace_weight: f64,
    state: CollectiveState,
}

#[pymethods]
impl PyNoonState {
    /// `(occupations, amplitude)` for every branch, with occupations in the
    /// order s_a, s_b, r_a, r_b.
    fn branches(&self) -> Vec<([u32; 4], num_complex::Complex64)> {
        self.state
            .branches()
            .map(|(c, a)| (ModeLabel::ALL.map(|m| c.occupation(m)), *a))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("NoonState(order={}, noon_overlap={})", self.order, self.noon_overlap)
    }
}

/// Runs the generation sequence for order `order` from the vacuum.
#[pyfunction]
fn generate(order: u32) -> PyResult<PyNoonState> {
    let pulses = pulse::build_generation_sequence(order)
        .map_err(to_py)?
        .iter()
        .filter(|e| e.pulse().is_some())
        .count();
    let state = pulse::generate(order).map_err(to_py)?;
    let (wa, wb) = noon_arm_weights(&state, order);
    Ok(PyNoonState {
        order,
        pulses,
        noon_overlap: state.overlap(&CollectiveState::noon(order)).norm(),
        noon_subspace_weight: wa + wb,
        state,
    })
}

/// Detection probability of the full interferometer at displacement `dx` (μm).
#[pyfunction]
#[pyo3(signature = (order, dx, waves=None))]
fn interferometer_signal(order: u32, dx: [f64; 3], waves: Option<PyRef<'_, PyWaves>>) -> PyResult<f64> {
    pulse::interferometer_signal(order, dx, &waves_or_default(waves)).map_err(to_py)
}

#[pyfunction]
fn fringe_period(order: u32, dk_projection: f64) -> f64 {
    fringe::fringe_period(order, dk_projection)
}

#[pyfunction]
fn expected_signal(order: u32, dk_projection: f64, x: f64) -> f64 {
    fringe::expected_signal(order, dk_projection, x)
}

/// Seeded binomial counts; `index` decorrelates settings sharing a seed.
#[pyfunction]
#[pyo3(signature = (probability, shots, seed, index=0))]
fn simulate_counts(probability: f64, shots: u64, seed: u64, index: u64) -> PyResult<u64> {
    fringe::simulate_counts_at(probability, shots, seed, index).map_err(to_py)
}

/// Fits the displacement from `(setting_um, shots, count)` triples.
///
/// Returns `(estimate_um, stderr_um, period_um, ambiguous)`.
#[pyfunction]
fn estimate_displacement(
    samples: Vec<(f64, u64, u64)>,
    order: u32,
    dk_projection: f64,
) -> PyResult<(f64, f64, f64, bool)> {
    let counts: Vec<CountSample> = samples
        .into_iter()
        .map(|(setting, shots, count)| CountSample { setting, shots, count })
        .collect();
    let e = fringe::estimate_displacement(&counts, order, dk_projection).map_err(to_py)?;
    Ok((e.estimate, e.stderr, e.period, e.ambiguous))
}

#[pyfunction]
fn atom_number_error(order: u32, n_atoms: f64) -> f64 {
    budget::atom_number_error(order, n_atoms)
}

/// Optimized error budget of an order-ℓ interferometer.
#[pyclass(name = "ErrorBudget", frozen, get_all, skip_from_py_object)]
struct PyErrorBudget {
    order: u32,
    n_atoms: f64,
    p_success: f64,
    e_protocol: f64,
    e_atom_number: f64,
    fidelity: f64,
    excitation_rabi: f64,
    transfer_rabi: Vec<f64>,
    boundary_warnings: Vec<String>,
}

#[pymethods]
impl PyErrorBudget {
    fn __repr__(&self) -> String {
        format!(
            "ErrorBudget(order={}, p_success={}, e_protocol={}, fidelity={})",
            self.order, self.p_success, self.e_protocol, self.fidelity
        )
    }
}

impl From<budget::ErrorBudget> for PyErrorBudget {
    fn from(b: budget::ErrorBudget) -> Self {
        PyErrorBudget {
            order: b.order,
            n_atoms: b.n_atoms,
            p_success: b.p_success,
            e_protocol: b.e_protocol,
            e_atom_number: b.e_atom_number,
            fidelity: b.fidelity,
            excitation_rabi: b.excitation.best_rabi,
            transfer_rabi: b.transfer.iter().map(|t| t.best_rabi).collect(),
            boundary_warnings: b.boundary_warnings,
        }
    }
}

/// Error budget for shift `delta_e_mhz` and Rydberg lifetime `lifetime_us`.
#[pyfunction]
fn error_budget(py: Python<'_>, order: u32, n_atoms: f64, delta_e_mhz: f64, lifetime_us: f64) -> PyResult<PyErrorBudget> {
    let shift = mhz_to_angular(delta_e_mhz);
    let decay = decay_rate_from_lifetime(lifetime_us);
    py.detach(|| budget::success_probability(order, n_atoms, shift, decay, &RabiBrackets::default()))
        .map(Into::into)
        .map_err(to_py)
}

/// `(order, lifetime_us, delta_e_mhz, p_success, e_total)` over the grid.
#[pyfunction]
#[pyo3(signature = (orders, delta_e_mhz, lifetimes_us, n_atoms=400.0))]
fn sweep_error_vs_shift(
    py: Python<'_>,
    orders: Vec<u32>,
    delta_e_mhz: Vec<f64>,
    lifetimes_us: Vec<f64>,
    n_atoms: f64,
) -> PyResult<Vec<(u32, f64, f64, f64, f64)>> {
    let rows = py
        .detach(|| budget::sweep_error_vs_shift(&orders, &delta_e_mhz, &lifetimes_us, n_atoms, &RabiBrackets::default()))
        .map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.order, r.lifetime_us, r.delta_e_mhz, r.p_success, r.e_total))
        .collect())
}

/// Van der Waals shift of two Rydberg atoms at distance `r_um`.
///
/// Returns `(magnitude_mhz, sign, in_range)`.
#[pyfunction]
fn energy_shift(n: u32, r_um: f64) -> PyResult<(f64, i8, bool)> {
    let s = experiment::energy_shift(n, r_um).map_err(to_py)?;
    Ok((s.magnitude_mhz, s.sign, s.in_range))
}

#[pyfunction]
fn atom_number(density_cm3: f64, radius_um: f64) -> f64 {
    experiment::atom_number(density_cm3, radius_um)
}

/// Feasibility check of an ensemble against the default targets.
///
/// Returns a dict of the report fields.
#[pyfunction]
fn feasibility<'py>(
    py: Python<'py>,
    n: u32,
    radius_um: f64,
    density_cm3: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let spec = EnsembleSpec::new(radius_um, density_cm3, n).map_err(to_py)?;
    let r = py
        .detach(|| experiment::feasibility_report(&spec, &FeasibilityTargets::default()))
        .map_err(to_py)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("min_pair_shift_mhz", r.shift.magnitude_mhz)?;
    d.set_item("atom_number", r.atom_number)?;
    d.set_item("e_protocol", r.budget.e_protocol)?;
    d.set_item("e_atom_number", r.budget.e_atom_number)?;
    d.set_item("fidelity", r.budget.fidelity)?;
    d.set_item("shift_ok", r.shift_ok)?;
    d.set_item("error_ok", r.error_ok)?;
    d.set_item("pass", r.pass())?;
    Ok(d)
}

#[pymodule]
fn swnoon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWaves>()?;
    m.add_class::<PyNoonState>()?;
    m.add_class::<PyErrorBudget>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(interferometer_signal, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_period, m)?)?;
    m.add_function(wrap_pyfunction!(expected_signal, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_counts, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_displacement, m)?)?;
    m.add_function(wrap_pyfunction!(atom_number_error, m)?)?;
    m.add_function(wrap_pyfunction!(error_budget, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_error_vs_shift, m)?)?;
    m.add_function(wrap_pyfunction!(energy_shift, m)?)?;
    m.add_function(wrap_pyfunction!(atom_number, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    Ok(())
}
