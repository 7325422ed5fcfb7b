import logging

from ..config import RunConfig
from ..policies import (
    DoublingQFTRLPolicy,
    EXP4Policy,
    Policy,
    QFTRLPolicy,
    tuning_exp4,
    tuning_theorem1,
)
from ..tsallis import TsallisParams

logger = logging.getLogger(__name__)


class PolicyFactory:
    @staticmethod
    def build(config: RunConfig, n_experts: int, n_actions: int, horizon: int) -> Policy:
        """Instantiate the configured policy; explicit q / eta override the tuned values."""
        if config.policy == "exp4":
            eta = config.eta if config.eta is not None else tuning_exp4(n_experts, n_actions, horizon)
            return EXP4Policy(n_experts, eta)
        if config.policy == "qftrl":
            tuned = tuning_theorem1(n_experts, n_actions, horizon)
            params = TsallisParams(
                q=config.q if config.q is not None else tuned.q,
                eta=config.eta if config.eta is not None else tuned.eta,
            )
            return QFTRLPolicy(n_experts, params)
        if config.q is not None or config.eta is not None:
            logger.warning("q and eta are re-tuned per epoch by the doubling policy; overrides ignored")
        if config.initial_guess is None:
            return DoublingQFTRLPolicy.with_theorem2_preset(n_experts, horizon)
        return DoublingQFTRLPolicy(n_experts, horizon, config.initial_guess)
