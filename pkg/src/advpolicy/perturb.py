"""l-infinity attacks on Q-network policies: FGSM, PGD and a minimal-radius search.

The attack loss is the cross-entropy of softmax(Q) against the clean greedy
action (untargeted, ascended) or against a target action (targeted, descended).
"""

from dataclasses import dataclass, replace

import numpy as np

from .nn import LossSpec, argmax_action, check_observation, forward, loss_and_input_gradient

DEFAULT_EPSILON = 1.0 / 255.0
TRAIN_EPSILON = 8.0 / 255.0


@dataclass(frozen=True)
class AttackConfig:
    epsilon: float = DEFAULT_EPSILON
    alpha: float = DEFAULT_EPSILON / 10.0
    steps: int = 50
    norm: str = "linf"
    target: int = None

    def __post_init__(self):
        if self.norm != "linf":
            raise ValueError("only the l-infinity norm is supported")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.epsilon > 0 and not 0.0 < self.alpha <= self.epsilon:
            raise ValueError(f"alpha must lie in (0, epsilon], got {self.alpha}")
        if self.steps < 1:
            raise ValueError("steps must be positive")

    def scaled(self, epsilon):
        """Same config at radius ``epsilon``; alpha keeps its ratio to epsilon."""
        ratio = self.alpha / self.epsilon if self.epsilon > 0 else 0.1
        return replace(self, epsilon=epsilon, alpha=ratio * epsilon)


@dataclass
class PerturbationResult:
    eta: np.ndarray
    s_adv: np.ndarray
    linf_norm: float
    l2_norm: float
    original_action: int
    perturbed_action: int
    success: bool
    epsilon_used: float


def _result(net, s, s_adv, original_action, epsilon):
    eta = s_adv - s
    perturbed_action = argmax_action(forward(net, s_adv))
    return PerturbationResult(
        eta=eta,
        s_adv=s_adv,
        linf_norm=float(np.max(np.abs(eta))) if eta.size else 0.0,
        l2_norm=float(np.sqrt(np.sum(eta * eta))),
        original_action=original_action,
        perturbed_action=perturbed_action,
        success=perturbed_action != original_action,
        epsilon_used=float(epsilon),
    )


def _objective(net, x, original_action, config):
    """Objective to maximize and its input gradient."""
    if config.target is None:
        value, grad = loss_and_input_gradient(net, x, LossSpec.cross_entropy(original_action))
        return value, grad
    value, grad = loss_and_input_gradient(net, x, LossSpec.cross_entropy(config.target))
    return -value, -grad


def fgsm(net, s, config):
    """s_adv = clip01(s + epsilon * sign(grad))."""
    s = check_observation(net, s)
    a0 = argmax_action(forward(net, s))
    _, grad = _objective(net, s, a0, config)
    s_adv = np.clip(s + config.epsilon * np.sign(grad), 0.0, 1.0)
    return _result(net, s, s_adv, a0, config.epsilon)


def pgd(net, s, config):
    """Iterated signed-gradient steps, each clipped to [0, 1] and projected onto the ball.

    Returns the iterate with the highest objective among x^1..x^N.
    """
    s = check_observation(net, s)
    a0 = argmax_action(forward(net, s))
    eps = config.epsilon
    if eps == 0.0:
        return _result(net, s, s.copy(), a0, 0.0)
    lo, hi = s - eps, s + eps
    x = s
    _, grad = _objective(net, x, a0, config)
    best_x, best_value = None, -np.inf
    for _ in range(config.steps):
        x = np.clip(np.clip(x + config.alpha * np.sign(grad), 0.0, 1.0), lo, hi)
        value, grad = _objective(net, x, a0, config)
        if value > best_value:
            best_x, best_value = x, value
    return _result(net, s, best_x, a0, eps)


def minimal_perturbation(net, s, epsilon_max=DEFAULT_EPSILON, inner=None, bisection_iters=12):
    """Smallest l-infinity radius in (0, epsilon_max] at which PGD flips the greedy action.

    Bisects on the radius, running PGD (``inner`` rescaled to each probe radius)
    at every probe. Returns the successful result at the smallest successful
    probe; when even ``epsilon_max`` fails, returns eta = 0 with success False.
    """
    if not 0.0 < epsilon_max <= 1.0:
        raise ValueError(f"epsilon_max must lie in (0, 1], got {epsilon_max}")
    if bisection_iters < 1:
        raise ValueError("bisection_iters must be positive")
    s = check_observation(net, s)
    inner = AttackConfig() if inner is None else inner
    best = pgd(net, s, inner.scaled(epsilon_max))
    if not best.success:
        a0 = best.original_action
        return _result(net, s, s.copy(), a0, epsilon_max)
    lo, hi = 0.0, epsilon_max
    for _ in range(bisection_iters):
        mid = 0.5 * (lo + hi)
        trial = pgd(net, s, inner.scaled(mid))
        if trial.success:
            best, hi = trial, mid
        else:
            lo = mid
    return best
