"""Energy functional, production breakdown, and the identity residual audit."""
import numpy as np
import pytest

from rdawave.energy import (PSI_TERM_NAMES, EnergyObserver, energy_E,
                            energy_identity_residual, psi, tail_energy)
from rdawave.grid import Field, Grid, grad_sq, norm_l2, zeros
from rdawave.model import FieldProfile, PowerNonlinearity, make_model
from rdawave.paths import FrozenPath, generate_path
from rdawave.solver import SolveSpec, StateUV, evolve


@pytest.fixture
def model():
    grid = Grid(1, 5.0, 64)
    return make_model(grid, g=FieldProfile("gaussian"), h=FieldProfile("gaussian"))


def random_state(grid, seed=0):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return StateUV(Field(grid, rng.standard_normal(grid.shape)),
                   Field(grid, rng.standard_normal(grid.shape)), 0.0)


def test_energy_of_rest_state_is_zero(model):
    state = StateUV(zeros(model.grid), zeros(model.grid), 0.0)
    assert energy_E(state, model) == 0.0


def test_energy_formula(model):
    state = random_state(model.grid, 1)
    vol = model.grid.cell_volume
    expected = (norm_l2(state.v) ** 2
                + model.lam_prime * norm_l2(state.u) ** 2
                + grad_sq(state.u)
                + 2.0 * float(np.sum(model.nonlin.F(state.u.values)) * vol))
    assert energy_E(state, model) == pytest.approx(expected, rel=1e-14)


def test_psi_has_ten_named_terms_summing_to_total(model):
    path = generate_path(0, -1.0, 1.0, 0.01)
    state = random_state(model.grid, 2)
    total, terms = psi(state, 0.37, path, model)
    assert tuple(terms) == PSI_TERM_NAMES
    assert len(terms) == 10
    scale = max(abs(v) for v in terms.values())
    assert abs(total - sum(terms.values())) <= 1e-12 * max(scale, 1.0)


def test_psi_noise_terms_vanish_without_noise(model):
    path = FrozenPath(lambda t: 0.0)
    state = random_state(model.grid, 3)
    _, terms = psi(state, 1.0, path, model)
    for name in ("noise_u", "noise_grad", "noise_f", "noise_v"):
        assert terms[name] == 0.0


def _records_for(dt, model, path, t_end=2.0, record_every=1):
    u0 = Field(model.grid, np.exp(-model.grid.radius_sq()))
    obs = EnergyObserver(path, model)
    spec = SolveSpec(dt=dt, record_every=record_every)
    evolve(StateUV(u0, zeros(model.grid), 0.0), 0.0, t_end, path, model, spec,
           observers=[obs])
    return obs.records


def test_identity_residual_decreases_with_dt():
    # linear regime: the residual of dE/dt + 4 sigma E = Psi is pure
    # discretization error and must shrink at the scheme's first order
    grid = Grid(1, 5.0, 64)
    m = make_model(grid, nonlin=PowerNonlinearity(a=0.0),
                   g=FieldProfile("zero"), h=FieldProfile("zero"))
    path = FrozenPath(lambda t: 0.0)
    maxes = []
    for dt in (0.02, 0.01, 0.005):
        res = energy_identity_residual(_records_for(dt, m, path), m.sigma)
        maxes.append(res.max_diff)
    assert maxes[0] / maxes[1] > 1.7
    assert maxes[1] / maxes[2] > 1.7


def test_integral_residual_starts_at_zero(model):
    path = generate_path(0, -1.0, 5.0, 0.01)
    res = energy_identity_residual(_records_for(0.01, model, path), model.sigma)
    assert res.residual_int[0] == 0.0
    assert len(res.residual_diff) == len(res.times) - 1
    assert len(res.residual_int) == len(res.times)


def test_residual_requires_equally_spaced_records(model):
    path = FrozenPath(lambda t: 0.0)
    records = _records_for(0.01, model, path, t_end=0.05)
    records[1].t += 0.003
    with pytest.raises(ValueError, match="equally spaced"):
        energy_identity_residual(records, model.sigma)
    with pytest.raises(ValueError):
        energy_identity_residual(records[:1], model.sigma)


def test_tail_energy_below_total_and_decreasing_in_k():
    grid = Grid(1, 20.0, 256)
    m = make_model(grid, g=FieldProfile("gaussian"), h=FieldProfile("gaussian"))
    state = random_state(grid, 4)
    total = energy_E(state, m)
    tails = [tail_energy(state, k, m) for k in (2.0, 5.0, 10.0)]
    assert all(0.0 <= t <= total * (1.0 + 1e-12) for t in tails)
    assert tails[0] > tails[1] > tails[2]


def test_energy_observer_collects_tails(model):
    path = generate_path(1, -1.0, 1.0, 0.01)
    obs = EnergyObserver(path, model, k_list=(1.0, 2.0))
    obs(random_state(model.grid, 5))
    rec = obs.records[0]
    assert set(rec.tail) == {1.0, 2.0}
    assert rec.Psi == pytest.approx(sum(rec.terms.values()), rel=1e-12)
