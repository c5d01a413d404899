import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from conftest import small_mlp
from custom_utilities.custom_exception import NonFiniteError
from dto.request_dto.attack import AttackConfig
from dto.request_dto.training import OptimizerConfig
from enums.attacks import InitPolicy, StepRule
from enums.autodiff import GradMode
from models.layers import Linear, ReLU
from models.presets import build_preset
from models.sequential import Model
from services.advtrain.adv_training_service import fit_clean
from services.attacks import attack_service
from services.attacks.attack_service import accuracy, bim, evaluate_loss, fgsm, pgd, project_linf
from tensor.rng import Rng
from tensor.tensor import Tensor

ULP_SLACK = 1e-15


def logistic_model() -> Model:
    layer = Linear(2, 2)
    layer.weight.value = Tensor([[1.0, -1.0], [2.0, 0.5]])
    layer.bias.value = Tensor([0.1, -0.2])
    return Model([layer], input_shape=(2,))


def toy_dataset(seed: int, n: int = 200) -> tuple[np.ndarray, np.ndarray]:
    rng = Rng(seed)
    labels = np.arange(n) % 2
    centres = np.where(labels[:, None] == 0, 0.3, 0.7)
    features = np.clip(centres + rng.normal((n, 2), scale=0.05).data, 0.0, 1.0)
    return features, labels


def trained_linear(seed: int) -> tuple[Model, Tensor, np.ndarray]:
    features, labels = toy_dataset(seed)
    model = build_preset("linear", (2,), 2, seed=seed)
    fit_clean(model, features, labels, epochs=60, optimizer=OptimizerConfig(lr=1.0), batch_size=32, seed=seed)
    return model, Tensor(features), labels


class TestProjection:
    def test_saturates(self):
        assert project_linf(Tensor([0.5, -0.9]), 0.3) == Tensor([0.3, -0.3])

    def test_feasible_point_is_unchanged(self):
        p = Tensor([0.1, -0.2, 0.0])
        assert project_linf(p, 0.3) == p

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=16), st.floats(0, 5))
    def test_idempotent(self, values, epsilon):
        once = project_linf(Tensor(values), epsilon)
        assert project_linf(once, epsilon).bitwise_equal(once)


class TestConfig:
    def test_rejects_zero_steps(self):
        with pytest.raises(ValidationError):
            AttackConfig(epsilon=0.1, steps=0)

    def test_rejects_non_positive_eta(self):
        with pytest.raises(ValidationError):
            AttackConfig(epsilon=0.1, eta=0.0)

    def test_schedule_length_must_match_steps(self):
        with pytest.raises(ValidationError):
            AttackConfig(epsilon=0.1, steps=3, eta=[0.1, 0.1])

    def test_default_step_size(self):
        assert AttackConfig(epsilon=0.2, steps=1).step_size(0) == 0.2
        assert AttackConfig(epsilon=0.2, steps=5).step_size(3) == 0.05
        assert AttackConfig(epsilon=0.2, steps=2, eta=[0.1, 0.3]).step_size(1) == 0.3


class TestEquivalences:
    def test_zero_radius_leaves_input_unchanged(self, mlp, batch):
        x, y = batch
        result = fgsm(mlp, x, y, 0.0)
        assert result.perturbation == Tensor.zeros(x.shape)
        assert result.adversarial == x

    def test_single_signed_step_is_fgsm(self, mlp, batch):
        x, y = batch
        cfg = AttackConfig(epsilon=0.1, eta=0.1, steps=1, step_rule=StepRule.SIGNED_GRAD, init=InitPolicy.ZERO)
        assert pgd(mlp, x, y, cfg).perturbation.bitwise_equal(fgsm(mlp, x, y, 0.1).perturbation)

    def test_bim_is_pgd_from_zero_with_signed_steps(self, mlp, batch):
        x, y = batch
        cfg = AttackConfig(epsilon=0.1, steps=4, step_rule=StepRule.RAW_GRAD, init=InitPolicy.UNIFORM_RANDOM, seed=3)
        expected = pgd(mlp, x, y, cfg.model_copy(update={"init": InitPolicy.ZERO, "step_rule": StepRule.SIGNED_GRAD}))
        result = bim(mlp, x, y, cfg)
        assert result.perturbation.bitwise_equal(expected.perturbation)
        assert result.adversarial.bitwise_equal(expected.adversarial)
        assert result.loss_trace == expected.loss_trace
        assert result.final_loss == expected.final_loss

    def test_single_step_bim_is_fgsm(self, mlp, batch):
        x, y = batch
        cfg = AttackConfig(epsilon=0.05, eta=0.05, steps=1)
        assert bim(mlp, x, y, cfg).perturbation.bitwise_equal(fgsm(mlp, x, y, 0.05).perturbation)

    def test_final_loss_can_be_skipped(self, mlp, batch, monkeypatch):
        x, y = batch
        cfg = AttackConfig(epsilon=0.1, steps=3)
        reported = pgd(mlp, x, y, cfg)
        calls = []
        monkeypatch.setattr(attack_service, "evaluate_loss", lambda *args: calls.append(args))
        skipped = pgd(mlp, x, y, cfg.model_copy(update={"evaluate_final": False}))
        assert skipped.final_loss is None and reported.final_loss is not None
        assert calls == []
        assert skipped.perturbation.bitwise_equal(reported.perturbation)


def run_attack(kind: str, model: Model, x, y, cfg: AttackConfig, mode: GradMode):
    cfg = cfg.model_copy(update={"mode": mode})
    if kind == "fgsm":
        return fgsm(model, x, y, cfg.epsilon, mode, cfg.clamp_range)
    return (bim if kind == "bim" else pgd)(model, x, y, cfg)


class TestModeInvariance:
    @settings(max_examples=80)
    @given(
        seed=st.integers(0, 10_000),
        depth=st.integers(1, 4),
        kind=st.sampled_from(["pgd", "fgsm", "bim"]),
        steps=st.integers(1, 5),
        epsilon=st.sampled_from([0.0, 0.01, 0.1, 0.3]),
        rule=st.sampled_from(list(StepRule)),
        init=st.sampled_from(list(InitPolicy)),
        clamp=st.booleans(),
    )
    def test_semi_equals_full_on_mlps(self, seed, depth, kind, steps, epsilon, rule, init, clamp):
        model = small_mlp(depth=depth, seed=seed)
        rng = Rng(seed + 7)
        x, y = rng.uniform((3, 5)), rng.integers(0, 3, size=3)
        cfg = AttackConfig(epsilon=epsilon, steps=steps, step_rule=rule, init=init,
                           clamp_range=(0.0, 1.0) if clamp else None, seed=seed)
        full = run_attack(kind, model, x, y, cfg, GradMode.FULL)
        semi = run_attack(kind, model, x, y, cfg, GradMode.SEMI)
        assert semi.perturbation.bitwise_equal(full.perturbation)
        assert semi.loss_trace == full.loss_trace
        assert full.cost.backward_flops == 2 * semi.cost.backward_flops
        assert semi.cost.param_grad_bytes == 0 < full.cost.param_grad_bytes

    @pytest.mark.parametrize("seed", range(20))
    def test_all_attacks_agree_on_the_cnn(self, seed):
        model = build_preset("cnn-small", (1, 8, 8), 3, seed=seed)
        rng = Rng(seed)
        x, y = rng.uniform((2, 1, 8, 8)), rng.integers(0, 3, size=2)
        cfg = AttackConfig(epsilon=0.05, steps=1 + seed % 4, clamp_range=(0.0, 1.0), seed=seed,
                           init=InitPolicy.UNIFORM_RANDOM if seed % 2 else InitPolicy.ZERO)
        for kind in ("pgd", "bim", "fgsm"):
            semi = run_attack(kind, model, x, y, cfg, GradMode.SEMI)
            full = run_attack(kind, model, x, y, cfg, GradMode.FULL)
            assert semi.perturbation_digest == full.perturbation_digest

    def test_full_mode_attack_leaves_the_model_alone(self, mlp, batch):
        x, y = batch
        before = {name: param.value for name, param in mlp.named_parameters()}
        held = Tensor(np.ones(mlp.layers[0].weight.shape))
        mlp.layers[0].weight.grad = held
        pgd(mlp, x, y, AttackConfig(epsilon=0.1, steps=3, mode=GradMode.FULL))
        assert mlp.layers[0].weight.grad is held
        assert all(param.grad is None for param in mlp.parameters() if param is not mlp.layers[0].weight)
        assert all(param.value.bitwise_equal(before[name]) for name, param in mlp.named_parameters())


class TestClosedForm:
    @pytest.mark.parametrize("label,direction", [(0, [-1.0, -1.0]), (1, [1.0, 1.0])])
    def test_linear_model_reaches_the_signed_corner(self, label, direction):
        model = logistic_model()
        x, y = Tensor([[0.2, 0.4]]), np.array([label])
        result = pgd(model, x, y, AttackConfig(epsilon=0.25, steps=8))
        assert result.perturbation == Tensor([[0.25 * d for d in direction]])
        assert all(later >= earlier for earlier, later in zip(result.loss_trace, result.loss_trace[1:]))
        assert result.final_loss > result.loss_trace[0]

    def test_fgsm_matches_the_closed_form(self):
        model = logistic_model()
        x, y = Tensor([[0.2, 0.4], [0.9, 0.1]]), np.array([0, 1])
        weight = model.layers[0].weight.value.data
        column_gap = weight[:, 1] - weight[:, 0]
        expected = 0.1 * np.sign(np.where(y[:, None] == 0, column_gap, -column_gap))
        assert fgsm(model, x, y, 0.1).perturbation == Tensor(expected)


class TestFeasibility:
    def test_every_step_stays_feasible(self, mlp):
        rng = Rng(4)
        x, y = rng.uniform((6, 5)), rng.integers(0, 3, size=6)
        epsilon = 0.2
        seen = []

        def check(step, p, loss):
            assert np.abs(p.data).max() <= epsilon + ULP_SLACK
            moved = x.data + p.data
            assert moved.min() >= -ULP_SLACK and moved.max() <= 1.0 + ULP_SLACK
            seen.append(step)

        cfg = AttackConfig(epsilon=epsilon, steps=6, eta=0.15, init=InitPolicy.UNIFORM_RANDOM,
                           step_rule=StepRule.RAW_GRAD, clamp_range=(0.0, 1.0), seed=1)
        result = pgd(mlp, x, y, cfg, callback=check)
        assert seen == list(range(6))
        assert len(result.loss_trace) == 6
        assert result.adversarial.data.min() >= 0.0 and result.adversarial.data.max() <= 1.0

    def test_non_finite_loss_aborts_with_step_index(self):
        first, second = Linear(2, 3), Linear(3, 2)
        first.weight.value = Tensor(np.full((2, 3), 1e200))
        second.weight.value = Tensor(np.full((3, 2), 1e200))
        model = Model([first, ReLU(), second], input_shape=(2,))
        with pytest.raises(NonFiniteError) as info:
            pgd(model, Tensor([[1.0, 1.0]]), np.array([0]), AttackConfig(epsilon=0.1, steps=3))
        assert info.value.step == 0


class TestEfficacy:
    def test_fgsm_increases_per_example_loss(self):
        model, x, y = trained_linear(seed=0)
        adversarial = fgsm(model, x, y, 0.25, clamp_range=(0.0, 1.0)).adversarial
        increased = [
            evaluate_loss(model, Tensor(adversarial.data[i:i + 1]), y[i:i + 1]) >= evaluate_loss(model, Tensor(x.data[i:i + 1]), y[i:i + 1])
            for i in range(len(y))
        ]
        assert np.mean(increased) >= 0.95

    def test_attacks_drop_accuracy_on_toy_data(self):
        pgd_at_least_fgsm = 0
        seeds = range(10)
        for seed in seeds:
            model, x, y = trained_linear(seed)
            clean = accuracy(model, x, y)
            assert clean >= 0.95
            after_fgsm = accuracy(model, fgsm(model, x, y, 0.25, clamp_range=(0.0, 1.0)).adversarial, y)
            after_pgd = accuracy(model, pgd(model, x, y, AttackConfig(epsilon=0.25, steps=10, clamp_range=(0.0, 1.0))).adversarial, y)
            assert clean - after_fgsm >= 0.30
            pgd_at_least_fgsm += after_pgd <= after_fgsm
        assert pgd_at_least_fgsm >= 0.9 * len(seeds)
